"""Truncated periodic-strip grid, discrete energy, and the field dump format.

The strip (-lam/2, lam/2) x (0, L) is discretized with nx lateral cells
(periodic, node i = 0 on the seam x = -lam/2) and ny vertical cells; node
values live on the (ny + 1) x nx array values[j, i] with y_j = j dy going up.
Fixed data: the bottom row carries the datum m, the top row is clamped to 0,
and the seam column is clamped to 0 above the cut height gamma (gamma is
snapped to the nearest node; the snap distance is surfaced by the solver).

The energy uses forward differences per cell with periodic wrap in x and an
occupation factor per cell sampled at the lower-left node: the strict
indicator [u > 0] when eps = 0, else the ramp min(u/eps, 1).  Cell weights
are dx dy throughout, and reductions run in a fixed row-major order so that
repeated evaluations are bit-identical.

Dump format (text, bit-exact round trip):
    line 1:  "# fbfield v1"
    line 2:  nx=<int> ny=<int> lambda=<real> L=<real> gamma=<real> h=<real> b=<real> m=<real>
    then ny lines of nx space-separated node values, bottom row first; the
    top node row is identically zero by the field invariant and is implied.
Reals are written in shortest round-trip decimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .common import EnergyBreakdown, fmt_real
from .oned import OneDParams

DUMP_MAGIC = "# fbfield v1"


class BoundaryViolation(ValueError):
    """A field does not satisfy the fixed-data invariants of the strip."""


@dataclass(frozen=True)
class ProblemParams:
    """Physics of the two-dimensional strip functional (N = 2)."""

    b: float
    m: float
    h: float
    gamma: float
    lam: float

    def __post_init__(self):
        if not (self.b > 0 and self.m > 0 and self.h > 0 and self.gamma > 0 and self.lam > 0):
            raise ValueError(f"all parameters must be positive, got {self}")

    @property
    def oned(self) -> OneDParams:
        return OneDParams(b=self.b, m=self.m, h=self.h)


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    lam: float
    l_top: float

    def __post_init__(self):
        if self.nx < 8:
            raise ValueError(f"nx must be at least 8, got {self.nx}")
        if self.ny < 16:
            raise ValueError(f"ny must be at least 16, got {self.ny}")
        if self.lam <= 0 or self.l_top <= 0:
            raise ValueError("lam and l_top must be positive")
        ratio = self.dx / self.dy
        if not (1.0 / 8.0 <= ratio <= 8.0):
            raise ValueError(f"aspect ratio dx/dy = {ratio} outside [1/8, 8]")

    @property
    def dx(self) -> float:
        return self.lam / self.nx

    @property
    def dy(self) -> float:
        return self.l_top / self.ny

    def xs(self) -> np.ndarray:
        return -self.lam / 2.0 + self.dx * np.arange(self.nx)

    def ys(self) -> np.ndarray:
        return self.dy * np.arange(self.ny + 1)


@dataclass
class ScalarField:
    """Nonnegative node values on the truncated strip grid."""

    grid: GridSpec
    values: np.ndarray  # (ny + 1, nx) float64, values[j, i] at (x_i, y_j)

    def copy(self) -> "ScalarField":
        return ScalarField(grid=self.grid, values=self.values.copy())


def default_grid(params: ProblemParams, nx: int, ny: int) -> GridSpec:
    """Grid with the default truncation height max(gamma, h) + lam."""
    return GridSpec(nx=nx, ny=ny, lam=params.lam, l_top=max(params.gamma, params.h) + params.lam)


def seam_cut_row(params: ProblemParams, grid: GridSpec) -> tuple[int, float]:
    """Node row the cut snaps to, and the snap distance |gamma - j dy|."""
    j = int(round(params.gamma / grid.dy))
    j = min(max(j, 0), grid.ny)
    return j, abs(params.gamma - j * grid.dy)


def fixed_mask(params: ProblemParams, grid: GridSpec) -> np.ndarray:
    """Nodes carrying fixed data: bottom row, top row, seam above the cut."""
    mask = np.zeros((grid.ny + 1, grid.nx), dtype=bool)
    mask[0, :] = True
    mask[grid.ny, :] = True
    j_cut, _ = seam_cut_row(params, grid)
    mask[j_cut + 1 :, 0] = True
    return mask


def fixed_values(params: ProblemParams, grid: GridSpec) -> np.ndarray:
    """Values on the fixed nodes (m on the bottom, zero elsewhere)."""
    vals = np.zeros((grid.ny + 1, grid.nx))
    vals[0, :] = params.m
    return vals


def apply_fixed(values: np.ndarray, params: ProblemParams, grid: GridSpec) -> np.ndarray:
    fm = fixed_mask(params, grid)
    values[fm] = fixed_values(params, grid)[fm]
    return values


def validate_field(field: ScalarField, params: ProblemParams) -> None:
    g = field.grid
    u = field.values
    if u.shape != (g.ny + 1, g.nx):
        raise BoundaryViolation(f"field shape {u.shape} != {(g.ny + 1, g.nx)}")
    if np.any(u < 0):
        raise BoundaryViolation("negative node values")
    if not np.all(u[0, :] == params.m):
        raise BoundaryViolation("bottom row must equal the datum m")
    if not np.all(u[g.ny, :] == 0.0):
        raise BoundaryViolation("top row must be zero")
    j_cut, _ = seam_cut_row(params, g)
    if not np.all(u[j_cut + 1 :, 0] == 0.0):
        raise BoundaryViolation("seam column must vanish above the cut height")


def bulk_weights(params: ProblemParams, grid: GridSpec) -> np.ndarray:
    """(h - y_j)_+^(2b) per node row."""
    return np.maximum(params.h - grid.ys(), 0.0) ** (2.0 * params.b)


def dirichlet_energy(values: np.ndarray, grid: GridSpec) -> float:
    """Forward-difference gradient energy over cells, periodic in x."""
    u = values
    ddx = np.roll(u, -1, axis=1)[:-1, :] - u[:-1, :]
    ddy = u[1:, :] - u[:-1, :]
    return float(
        (np.sum(ddx * ddx) / grid.dx**2 + np.sum(ddy * ddy) / grid.dy**2)
        * grid.dx
        * grid.dy
    )


def bulk_energy(values: np.ndarray, params: ProblemParams, grid: GridSpec, eps: float) -> float:
    """Occupied-volume energy; ramp occupation for eps > 0, strict for eps = 0."""
    w = bulk_weights(params, grid)[:-1]
    body = values[:-1, :]
    if eps > 0:
        occ_rows = np.minimum(body / eps, 1.0).sum(axis=1)
    else:
        # row counts are exact small integers, keeping permuted fields bit-equal
        occ_rows = (body > 0).sum(axis=1).astype(np.float64)
    return float(np.dot(occ_rows, w) * grid.dx * grid.dy)


def discrete_energy(
    field: ScalarField, params: ProblemParams, eps: float = 0.0, validate: bool = True
) -> EnergyBreakdown:
    if validate:
        validate_field(field, params)
    return EnergyBreakdown(
        dirichlet=dirichlet_energy(field.values, field.grid),
        bulk=bulk_energy(field.values, params, field.grid, eps),
    )


def flat_profile_field(params: ProblemParams, grid: GridSpec, t: float) -> ScalarField:
    """Ramp profile v_t sampled at the nodes, fixed data applied."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    col = params.m * np.maximum(0.0, 1.0 - grid.ys() / t)
    vals = np.repeat(col[:, None], grid.nx, axis=1)
    return ScalarField(grid=grid, values=apply_fixed(vals, params, grid))


def full_support_field(params: ProblemParams, grid: GridSpec) -> ScalarField:
    """Everywhere-positive seed, linear from m at the bottom to 0 at the top."""
    return flat_profile_field(params, grid, grid.l_top)


def pyramid_field(params: ProblemParams, grid: GridSpec, delta: float) -> ScalarField:
    """Pyramid competitor sampled at the nodes (N = 2)."""
    from .competitor import CompetitorParams, pyramid_height

    cp = CompetitorParams(oned=params.oned, gamma=params.gamma, lam=params.lam, dims=2, delta=delta)
    tops = np.array([pyramid_height(cp, (x,)) for x in grid.xs()])
    vals = params.m * np.maximum(0.0, 1.0 - grid.ys()[:, None] / tops[None, :])
    return ScalarField(grid=grid, values=apply_fixed(vals, params, grid))


def write_field(path, field: ScalarField, params: ProblemParams) -> None:
    g = field.grid
    lines = [DUMP_MAGIC]
    lines.append(
        "nx=%d ny=%d lambda=%s L=%s gamma=%s h=%s b=%s m=%s"
        % (
            g.nx,
            g.ny,
            fmt_real(g.lam),
            fmt_real(g.l_top),
            fmt_real(params.gamma),
            fmt_real(params.h),
            fmt_real(params.b),
            fmt_real(params.m),
        )
    )
    for j in range(g.ny):
        lines.append(" ".join(fmt_real(v) for v in field.values[j, :]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path) -> tuple[ScalarField, ProblemParams]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != DUMP_MAGIC:
        raise ValueError(f"{path}: not a fbfield v1 dump")
    header = dict(item.split("=", 1) for item in lines[1].split())
    nx = int(header["nx"])
    ny = int(header["ny"])
    grid = GridSpec(nx=nx, ny=ny, lam=float(header["lambda"]), l_top=float(header["L"]))
    params = ProblemParams(
        b=float(header["b"]),
        m=float(header["m"]),
        h=float(header["h"]),
        gamma=float(header["gamma"]),
        lam=float(header["lambda"]),
    )
    if len(lines) < 2 + ny:
        raise ValueError(f"{path}: expected {ny} data rows, found {len(lines) - 2}")
    vals = np.zeros((ny + 1, nx))
    for j in range(ny):
        row = np.array([float(tok) for tok in lines[2 + j].split()])
        if row.shape != (nx,):
            raise ValueError(f"{path}: row {j} has {row.size} values, expected {nx}")
        vals[j, :] = row
    return ScalarField(grid=grid, values=vals), params
