"""Discrete minimization of the strip energy (N = 2).

Scheme: projected first-order descent on the eps-relaxed energy (indicator
replaced by the ramp min(u/eps, 1)), with the smoothing eps annealed
geometrically from eps0 down to a floor of order m dy / gamma.  Steps are
Barzilai-Borwein trial lengths on the Jacobi-preconditioned gradient, cut by
backtracking until the relaxed energy does not increase, so the accepted
energy sequence is non-increasing by construction.  The projection clamps to
u >= 0 and re-imposes the fixed rows and seam.

After annealing, one active-set polish: the support {u > eps_floor} is
frozen, the five-point Laplace system is solved on it by conjugate gradients
(periodic in x, Dirichlet elsewhere), and the reported energy is the strict
indicator evaluation of the polished field.  Convergence means the projected
gradient norm (in units of u, i.e. the Jacobi displacement) fell below
grad_tol at the floor smoothing; non-convergence still returns a flagged
result.  A support that reaches the top two node rows raises the
support_touches_top flag, which signals either a too-small truncation height
(callers may double it) or a genuinely unbounded positivity set.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .common import EnergyBreakdown
from .grid import (
    GridSpec,
    ProblemParams,
    ScalarField,
    bulk_energy,
    bulk_weights,
    dirichlet_energy,
    discrete_energy,
    fixed_mask,
    fixed_values,
    flat_profile_field,
    full_support_field,
    seam_cut_row,
)

CG_REL_TOL = 1e-10
CG_MAX_ITER = 50_000
STALL_LIMIT = 25


class SingularSupport(ValueError):
    """Support mask without the bottom row cannot anchor the Laplace solve."""


@dataclass(frozen=True)
class FlatProfile:
    """Seed at the flat ramp of depth t."""

    t: float


@dataclass(frozen=True)
class FullSupport:
    """Seed positive on the whole truncated strip."""


Init = Union[FlatProfile, FullSupport]


@dataclass(frozen=True)
class SolveConfig:
    init: Init
    eps0: Optional[float] = None  # default 0.5 m
    eps_floor: Optional[float] = None  # default m dy / gamma
    anneal_factor: float = 0.5
    max_outer: int = 40
    grad_tol: Optional[float] = None  # default 1e-4 m, units of u
    inner_cap: int = 500

    def __post_init__(self):
        if not (0.0 < self.anneal_factor < 1.0):
            raise ValueError("anneal_factor must lie in (0, 1)")
        if self.max_outer < 1 or self.inner_cap < 1:
            raise ValueError("max_outer and inner_cap must be positive")


@dataclass
class SupportInfo:
    mask: np.ndarray  # (ny + 1, nx) bool, strictly above threshold
    tops: np.ndarray  # per-column support height with sub-cell interpolation
    polyline: list[tuple[float, float]]


@dataclass
class MinimizeResult:
    field: ScalarField
    energy: EnergyBreakdown
    flatness: float
    support_top: np.ndarray
    converged: bool
    iterations: int
    support_touches_top: bool
    grad_norm: float
    eps_floor: float
    gamma_snap: float
    polish_residual: float
    stages: int


@dataclass
class BoundsVerdict:
    jensen_ok: bool
    jensen_margin: float
    max_top: float
    harmonic_ok: bool
    harmonic_residual: float
    harmonic_limit: float


def flatness_metric(field: ScalarField) -> float:
    """Largest lateral spread max_i u - min_i u over the rows, in units of u."""
    u = field.values
    return float(np.max(u.max(axis=1) - u.min(axis=1)))


def extract_support(field: ScalarField, threshold: float = 0.0) -> SupportInfo:
    """Thresholded support mask, per-column tops, and the top polyline.

    The top of a column is the highest node above the threshold plus a linear
    sub-cell correction from the next node up.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    g = field.grid
    u = field.values
    mask = u > threshold
    tops = np.zeros(g.nx)
    for i in range(g.nx):
        idx = np.flatnonzero(mask[:, i])
        if idx.size == 0:
            continue
        j = int(idx[-1])  # never the top row, which is identically zero
        frac = (u[j, i] - threshold) / (u[j, i] - u[j + 1, i])
        tops[i] = (j + min(1.0, frac)) * g.dy
    polyline = [(float(x), float(t)) for x, t in zip(g.xs(), tops)]
    return SupportInfo(mask=mask, tops=tops, polyline=polyline)


def _laplacian(u: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Five-point Laplacian on interior rows, periodic in x; edge rows zero."""
    out = np.zeros_like(u)
    east = np.roll(u, -1, axis=1)
    west = np.roll(u, 1, axis=1)
    out[1:-1, :] = (east[1:-1] + west[1:-1] - 2.0 * u[1:-1]) / dx**2 + (
        u[2:] + u[:-2] - 2.0 * u[1:-1]
    ) / dy**2
    return out


def harmonic_solve(
    support_mask: np.ndarray,
    boundary: np.ndarray,
    grid: GridSpec,
    rel_tol: float = CG_REL_TOL,
    warm_start: Optional[np.ndarray] = None,
) -> ScalarField:
    """Discrete-harmonic extension on the masked nodes by conjugate gradients.

    Nodes outside the mask (and the bottom/top rows) hold the boundary
    values; the five-point system on the remaining free nodes is solved to a
    residual rel_tol relative to the all-boundary start.
    """
    ny1, nx = boundary.shape
    if support_mask.shape != (ny1, nx):
        raise ValueError("mask and boundary shapes differ")
    if not np.all(support_mask[0, :]):
        raise SingularSupport("support mask must contain the bottom row")
    free = support_mask.copy()
    free[0, :] = False
    free[-1, :] = False
    dx, dy = grid.dx, grid.dy

    x = boundary.copy()
    x[free] = 0.0
    ref = np.linalg.norm(_laplacian(x, dx, dy)[free])
    if warm_start is not None:
        x = boundary.copy()
        x[free] = warm_start[free]

    r = np.zeros_like(x)
    r[free] = _laplacian(x, dx, dy)[free]
    tol = rel_tol * max(ref, 1e-300)
    rr = float(np.sum(r * r))
    if np.sqrt(rr) <= tol:
        return ScalarField(grid=grid, values=x)
    p = r.copy()
    for _ in range(CG_MAX_ITER):
        ap = np.zeros_like(x)
        ap[free] = -_laplacian(p, dx, dy)[free]
        alpha = rr / float(np.sum(p * ap))
        x[free] += alpha * p[free]
        r[free] -= alpha * ap[free]
        rr_new = float(np.sum(r * r))
        if np.sqrt(rr_new) <= tol:
            break
        p[free] = r[free] + (rr_new / rr) * p[free]
        rr = rr_new
    return ScalarField(grid=grid, values=x)


def _relaxed_total(
    u: np.ndarray, params: ProblemParams, grid: GridSpec, eps: float
) -> float:
    return dirichlet_energy(u, grid) + bulk_energy(u, params, grid, eps)


def _relaxed_grad(
    u: np.ndarray,
    wrow: np.ndarray,
    eps: float,
    dx: float,
    dy: float,
    free: np.ndarray,
) -> np.ndarray:
    east = np.roll(u, -1, axis=1)
    west = np.roll(u, 1, axis=1)
    g = np.zeros_like(u)
    g[1:-1, :] = (2.0 * u[1:-1] - east[1:-1] - west[1:-1]) / dx**2 + (
        2.0 * u[1:-1] - u[2:] - u[:-2]
    ) / dy**2
    g *= 2.0 * dx * dy
    ramp = np.zeros_like(u)
    ramp[:-1, :] = (u[:-1, :] < eps) * (wrow[:-1, None] / eps) * (dx * dy)
    g += ramp
    g[~free] = 0.0
    return g


def _descend(
    u: np.ndarray,
    params: ProblemParams,
    grid: GridSpec,
    eps: float,
    grad_tol: float,
    inner_cap: int,
    free: np.ndarray,
    fvals: np.ndarray,
    wrow: np.ndarray,
) -> tuple[np.ndarray, float, int]:
    """Monotone projected descent at fixed eps; returns (u, grad norm, iters)."""
    dx, dy = grid.dx, grid.dy
    diag = 4.0 * dx * dy * (1.0 / dx**2 + 1.0 / dy**2)

    def project(v: np.ndarray) -> np.ndarray:
        v = np.maximum(v, 0.0)
        v[~free] = fvals[~free]
        return v

    energy = _relaxed_total(u, params, grid, eps)
    grad = _relaxed_grad(u, wrow, eps, dx, dy, free)
    step = 0.25
    u_prev = None
    r_prev = None
    stall = 0
    gnorm = np.inf
    for it in range(inner_cap):
        r = grad / diag
        blocked = (u <= 0.0) & (r > 0.0)
        gnorm = float(np.max(np.abs(np.where(blocked, 0.0, r))))
        if gnorm < grad_tol:
            return u, gnorm, it
        if u_prev is not None:
            du = u - u_prev
            dr = r - r_prev
            denom = float(np.sum(du * dr))
            if denom > 1e-300:
                step = float(np.sum(du * du)) / denom
            else:
                step *= 2.0
            step = min(max(step, 1e-3), 1e3)
        trial = step
        accepted = None
        for _ in range(40):
            cand = project(u - trial * r)
            e_new = _relaxed_total(cand, params, grid, eps)
            if e_new <= energy:
                accepted = (cand, e_new)
                break
            trial *= 0.5
        if accepted is None:
            break  # no descent direction left at this smoothing
        cand, e_new = accepted
        # accepted line-search steps never increase the relaxed energy
        assert e_new <= energy
        if energy - e_new <= 1e-14 * (1.0 + abs(energy)):
            stall += 1
            if stall >= STALL_LIMIT:
                u = cand
                energy = e_new
                break
        else:
            stall = 0
        u_prev, r_prev = u, r
        u, energy = cand, e_new
        grad = _relaxed_grad(u, wrow, eps, dx, dy, free)
    r = _relaxed_grad(u, wrow, eps, dx, dy, free) / diag
    blocked = (u <= 0.0) & (r > 0.0)
    gnorm = float(np.max(np.abs(np.where(blocked, 0.0, r))))
    return u, gnorm, inner_cap


def _seed(params: ProblemParams, grid: GridSpec, init: Init) -> np.ndarray:
    if isinstance(init, FlatProfile):
        return flat_profile_field(params, grid, init.t).values
    return full_support_field(params, grid).values


def minimize(params: ProblemParams, grid: GridSpec, config: SolveConfig) -> MinimizeResult:
    """Annealed projected descent plus harmonic polish; see the module docstring."""
    if grid.l_top <= max(params.gamma, params.h):
        raise ValueError(
            f"l_top = {grid.l_top} must exceed max(gamma, h) = {max(params.gamma, params.h)}"
        )
    if grid.lam != params.lam:
        raise ValueError("grid period differs from the problem period")
    eps0 = config.eps0 if config.eps0 is not None else 0.5 * params.m
    eps_floor = (
        config.eps_floor
        if config.eps_floor is not None
        else params.m * grid.dy / params.gamma
    )
    if not (0.0 < eps_floor < eps0):
        raise ValueError(f"need 0 < eps_floor < eps0, got {eps_floor}, {eps0}")
    grad_tol = config.grad_tol if config.grad_tol is not None else 1e-4 * params.m

    fmask = fixed_mask(params, grid)
    free = ~fmask
    fvals = fixed_values(params, grid)
    wrow = bulk_weights(params, grid)
    _, gamma_snap = seam_cut_row(params, grid)

    u = _seed(params, grid, config.init)
    eps = eps0
    total_iters = 0
    stages = 0
    converged = False
    gnorm = np.inf
    while stages < config.max_outer:
        u, gnorm, iters = _descend(
            u, params, grid, eps, grad_tol, config.inner_cap, free, fvals, wrow
        )
        total_iters += iters
        stages += 1
        at_floor = eps <= eps_floor * (1.0 + 1e-12)
        if at_floor:
            if gnorm < grad_tol:
                converged = True
            break
        eps = max(eps * config.anneal_factor, eps_floor)

    # active-set polish: freeze the support, make the field discrete-harmonic
    support = u > eps_floor
    support[0, :] = True
    support &= ~(fmask & (fvals == 0.0))
    polished = harmonic_solve(support, fvals, grid, warm_start=u)
    u = polished.values

    field = ScalarField(grid=grid, values=u)
    energy = discrete_energy(field, params, eps=0.0)
    info = extract_support(field, threshold=0.0)
    touches = bool(np.any(info.mask[grid.ny - 1 :, :]))
    free_interior = support.copy()
    free_interior[0, :] = False
    free_interior[-1, :] = False
    residual = _laplacian(u, grid.dx, grid.dy)
    polish_residual = float(np.max(np.abs(residual[free_interior]))) if free_interior.any() else 0.0

    return MinimizeResult(
        field=field,
        energy=energy,
        flatness=flatness_metric(field),
        support_top=info.tops,
        converged=converged,
        iterations=total_iters,
        support_touches_top=touches,
        grad_norm=gnorm,
        eps_floor=eps_floor,
        gamma_snap=gamma_snap,
        polish_residual=polish_residual,
        stages=stages,
    )


def solve_auto(
    params: ProblemParams,
    grid: GridSpec,
    config: SolveConfig,
    max_doublings: int = 2,
) -> MinimizeResult:
    """minimize with automatic doubling of the truncation height.

    Each doubling keeps dy fixed (ny scales with l_top).  A result that still
    touches the top after max_doublings is returned flagged; that is the
    signature of a genuinely unbounded positivity set.
    """
    result = minimize(params, grid, config)
    for _ in range(max_doublings):
        if not result.support_touches_top:
            return result
        grid = GridSpec(nx=grid.nx, ny=2 * grid.ny, lam=grid.lam, l_top=2.0 * grid.l_top)
        result = minimize(params, grid, config)
    return result


def check_bounds(result: MinimizeResult, params: ProblemParams) -> BoundsVerdict:
    """Energy above the column lower bound, and harmonicity after polish.

    Any field carrying m to zero within height k has gradient energy at least
    lam m^2 / k (column-wise Cauchy-Schwarz), so the total must exceed that
    with k the tallest support column.  The polished field must satisfy the
    five-point Laplace equation on its support interior to 1e-6 m / dy^2.
    """
    g = result.field.grid
    max_top = float(np.max(result.support_top))
    jensen = params.lam * params.m**2 / max_top if max_top > 0 else 0.0
    margin = result.energy.total - jensen
    limit = 1e-6 * params.m / g.dy**2
    return BoundsVerdict(
        jensen_ok=margin > 0,
        jensen_margin=margin,
        max_top=max_top,
        harmonic_ok=result.polish_residual < limit,
        harmonic_residual=result.polish_residual,
        harmonic_limit=limit,
    )
