"""Pyramid-bump competitor and non-flatness certificates.

The competitor raises the flat endpoint ramp v_gamma into a pyramid: over the
period cube R of side lam, the positivity height is

    f(x') = gamma + delta (1 - (2/lam) max_i |x_i|),

the apex sitting delta above the cut, and the profile is
w(x) = m (1 - x_N / f(x'))_+.  By the symmetry of the cube the energy reduces
to one sector (prefactor 2^(N-1) (N-1)) and one radial integral per term:

    dirichlet = 2^(N-1)(N-1) m^2 (4 delta^2/(3 lam) + lam)
                  * int_0^(lam/2) x^(N-2) / ((gamma+delta) lam - 2 delta x) dx
    bulk      = lam^(N-1) h^(2b+1)/(2b+1)                       (h <= gamma)
    bulk      = same - 2^(N-1)(N-1)/(2b+1)
                  * int_0^(lam/2) x^(N-2) (h - gamma - delta + (2/lam) delta x)^(2b+1) dx
                                                                (gamma < h)

For N = 2 both integrals have elementary closed forms, which are used
directly; higher N goes through adaptive Simpson (relative target 1e-10,
absolute floor 1e-14; the integrands are smooth on [0, lam/2]).

To first order in delta the total is c0 + c1 delta with c0 = lam^(N-1)
g(gamma) and c1 = lam^(N-1) g'(gamma) / N for gamma < h (else
-lam^(N-1) m^2 / (N gamma^2)), so any admissible cut gives c1 < 0 and a small
enough delta certifies that the pyramid strictly undercuts every flat
profile.  The certificate search halves delta geometrically, mirroring the
"delta sufficiently small" logic, and demands a strict gap above a margin
that dominates the quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .common import EnergyBreakdown, adaptive_simpson
from .oned import Admissibility, OneDParams, g_eval, g_prime, gamma_admissible

QUAD_REL_TOL = 1e-10
QUAD_ABS_FLOOR = 1e-14
DELTA_MIN = 1e-8


class DeltaTooLarge(ValueError):
    """Pyramid apex would cross the bulk height when gamma < h."""


@dataclass(frozen=True)
class CompetitorParams:
    oned: OneDParams
    gamma: float
    lam: float
    dims: int
    delta: float

    def __post_init__(self):
        if self.gamma <= 0 or self.lam <= 0:
            raise ValueError(f"gamma and lam must be positive, got {self}")
        if self.dims < 2:
            raise ValueError(f"dims must be at least 2, got {self.dims}")
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.gamma < self.oned.h and self.gamma + self.delta > self.oned.h:
            raise DeltaTooLarge(
                f"gamma + delta = {self.gamma + self.delta} exceeds h = {self.oned.h}"
            )


@dataclass(frozen=True)
class ExpansionCoeffs:
    c0: float
    c1: float


@dataclass(frozen=True)
class DeltaSearch:
    delta_star: float
    energy: EnergyBreakdown
    target: float
    margin: float


@dataclass(frozen=True)
class NonFlatCertificate:
    """Machine check that the strip infimum sits strictly below every flat profile."""

    status: str  # "pass" | "not_admissible" | "inconsistent"
    admissibility: Admissibility
    target: float
    margin: float
    delta_star: Optional[float] = None
    energy: Optional[EnergyBreakdown] = None
    gap: Optional[float] = None

    def as_dict(self) -> dict:
        out = {
            "status": self.status,
            "admissible": self.admissibility.admissible,
            "reason": self.admissibility.reason,
            "target": self.target,
            "margin": self.margin,
        }
        if self.delta_star is not None:
            out["delta_star"] = self.delta_star
        if self.energy is not None:
            out["energy"] = self.energy.as_dict()
        if self.gap is not None:
            out["gap"] = self.gap
        return out


def pyramid_height(cp: CompetitorParams, x_prime: Sequence[float]) -> float:
    """Positivity height over a point of the period cube."""
    if len(x_prime) != cp.dims - 1:
        raise ValueError(f"expected {cp.dims - 1} lateral coordinates")
    r = max(abs(x) for x in x_prime)
    if r > cp.lam / 2.0:
        raise ValueError(f"point {x_prime} outside the closed cube of side {cp.lam}")
    return cp.gamma + cp.delta * (1.0 - 2.0 * r / cp.lam)


def competitor_eval(cp: CompetitorParams, x: Sequence[float]) -> float:
    """Pyramid profile w at a strip point (x', x_N)."""
    if len(x) != cp.dims:
        raise ValueError(f"expected {cp.dims} coordinates")
    f = pyramid_height(cp, x[:-1])
    return cp.oned.m * max(0.0, 1.0 - x[-1] / f)


def _dirichlet_quadrature(cp: CompetitorParams) -> float:
    n = cp.dims
    gamma, lam, delta = cp.gamma, cp.lam, cp.delta
    m = cp.oned.m

    def integrand(x: float) -> float:
        return x ** (n - 2) / ((gamma + delta) * lam - 2.0 * delta * x)

    val = adaptive_simpson(
        integrand, 0.0, lam / 2.0, rel_tol=QUAD_REL_TOL, abs_floor=QUAD_ABS_FLOOR
    )
    pref = 2.0 ** (n - 1) * (n - 1)
    return pref * m * m * (4.0 * delta * delta / (3.0 * lam) + lam) * val


def _dirichlet_closed_n2(cp: CompetitorParams) -> float:
    m = cp.oned.m
    return (
        m
        * m
        * (4.0 * cp.delta**2 / (3.0 * cp.lam) + cp.lam)
        * math.log1p(cp.delta / cp.gamma)
        / cp.delta
    )


def _bulk_quadrature(cp: CompetitorParams) -> float:
    n = cp.dims
    b, h = cp.oned.b, cp.oned.h
    gamma, lam, delta = cp.gamma, cp.lam, cp.delta
    q = 2.0 * b + 1.0
    base = lam ** (n - 1) * h**q / q
    if h <= gamma:
        return base
    a = h - gamma - delta

    def integrand(x: float) -> float:
        return x ** (n - 2) * (a + 2.0 * delta * x / lam) ** q

    val = adaptive_simpson(
        integrand, 0.0, lam / 2.0, rel_tol=QUAD_REL_TOL, abs_floor=QUAD_ABS_FLOOR
    )
    pref = 2.0 ** (n - 1) * (n - 1)
    return base - pref / q * val


def _bulk_closed_n2(cp: CompetitorParams) -> float:
    b, h = cp.oned.b, cp.oned.h
    gamma, lam, delta = cp.gamma, cp.lam, cp.delta
    q = 2.0 * b + 1.0
    base = lam * h**q / q
    if h <= gamma:
        return base
    a = h - gamma - delta
    integral = lam * ((a + delta) ** (q + 1.0) - a ** (q + 1.0)) / (2.0 * delta * (q + 1.0))
    return base - 2.0 / q * integral


def competitor_energy(cp: CompetitorParams) -> EnergyBreakdown:
    """Exact energy of the pyramid profile (closed forms at N = 2)."""
    if cp.dims == 2:
        return EnergyBreakdown(
            dirichlet=_dirichlet_closed_n2(cp), bulk=_bulk_closed_n2(cp)
        )
    return EnergyBreakdown(dirichlet=_dirichlet_quadrature(cp), bulk=_bulk_quadrature(cp))


def expansion_coeffs(
    p: OneDParams, gamma: float, lam: float, dims: int
) -> ExpansionCoeffs:
    """First-order coefficients of the pyramid energy in delta."""
    if gamma <= 0 or lam <= 0 or dims < 2:
        raise ValueError("gamma, lam must be positive and dims >= 2")
    scale = lam ** (dims - 1)
    c0 = scale * g_eval(p, gamma)
    if gamma < p.h:
        c1 = scale * g_prime(p, gamma) / dims
    else:
        c1 = -scale * p.m * p.m / (dims * gamma * gamma)
    return ExpansionCoeffs(c0=c0, c1=c1)


def find_delta(
    p: OneDParams,
    gamma: float,
    lam: float,
    dims: int,
    margin: Optional[float] = None,
) -> Optional[DeltaSearch]:
    """First pyramid height gain that strictly undercuts the flat target.

    Halves delta from min(gamma, h - gamma)/2 (gamma/2 when gamma >= h) and
    returns the first delta whose exact energy beats lam^(N-1) g(gamma) by
    more than the margin; None once delta drops below 1e-8.
    """
    target = lam ** (dims - 1) * g_eval(p, gamma)
    if margin is None:
        margin = 1e-6 * target
    if gamma < p.h:
        delta = 0.5 * min(gamma, p.h - gamma)
    else:
        delta = 0.5 * gamma
    while delta >= DELTA_MIN:
        cp = CompetitorParams(oned=p, gamma=gamma, lam=lam, dims=dims, delta=delta)
        energy = competitor_energy(cp)
        if energy.total < target - margin:
            return DeltaSearch(delta_star=delta, energy=energy, target=target, margin=margin)
        delta *= 0.5
    return None


def verify_nonflat(
    p: OneDParams,
    gamma: float,
    lam: float,
    dims: int,
    margin: Optional[float] = None,
) -> NonFlatCertificate:
    """PASS when the cut is admissible and the pyramid strictly beats it.

    An admissible cut with no successful delta is reported as inconsistent:
    the first-order slope is negative there, so failure signals a numerical
    or implementation fault rather than a property of the problem.
    """
    target = lam ** (dims - 1) * g_eval(p, gamma)
    if margin is None:
        margin = 1e-6 * target
    adm = gamma_admissible(p, gamma)
    if not adm.admissible:
        return NonFlatCertificate(
            status="not_admissible", admissibility=adm, target=target, margin=margin
        )
    found = find_delta(p, gamma, lam, dims, margin=margin)
    if found is None:
        return NonFlatCertificate(
            status="inconsistent", admissibility=adm, target=target, margin=margin
        )
    return NonFlatCertificate(
        status="pass",
        admissibility=adm,
        target=target,
        margin=margin,
        delta_star=found.delta_star,
        energy=found.energy,
        gap=target - found.energy.total,
    )
