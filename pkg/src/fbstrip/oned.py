"""Closed-form theory of height-only (flat) profiles on the strip.

A profile that depends only on the height coordinate and carries the bottom
datum m down to zero at depth t is the linear ramp v_t(s) = m (1 - s/t)_+.
Its energy per unit cross-section is

    g(t) = m^2 / t + (h^(2b+1) - (h - min(h, t))^(2b+1)) / (2b + 1),

which is C^1 on (0, inf) with

    g'(t) = psi(t) / t^2        for 0 < t < h,
    g'(t) = -m^2 / t^2          for t >= h,

where psi(t) = t^2 (h - t)^(2b) - m^2.  psi has a single interior maximum at
t = h / (b + 1), so the shape of g is governed by two height thresholds:

    h_sharp = (b + 1) b^(-b/(b+1)) m^(1/(b+1)),
    h_star  = (2b + 2) (2b + 1)^(-b/(b+1)) m^(1/(b+1)).

Below h_sharp, g is strictly decreasing.  Between the thresholds, g has a
local-minimum/local-maximum pair t_low < h/(b+1) < t_high in (0, h) and a
conjugate abscissa tau > t_high with g(tau) = g(t_low).  At or above h_star
the local minimum is the global one.  Minimizing g over (0, gamma] classifies
the flat profiles admissible under a lateral cut at height gamma, and the
lateral cut is "admissible" (every energy minimizer over the full strip class
must be non-flat) exactly when the best flat profile is the endpoint ramp
v_gamma and g still slopes downward there.

All functions are pure; bisections use brackets derived from the sign
structure of psi and a 1e-12 relative tolerance.  Parameter coincidences
(h at a threshold, gamma at a critical abscissa) are detected with a 1e-9
relative tolerance and reported through explicit tags instead of being
silently assigned to one side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .common import bisect_root

ROOT_REL_TOL = 1e-12
BOUNDARY_REL_TOL = 1e-9


class DegenerateCriticalPoints(ValueError):
    """Raised where a formula degenerates at h = h_sharp (zero denominator)."""


class Regime(Enum):
    SUB_SHARP = "sub_sharp"
    AT_SHARP = "at_sharp"
    TWO_CRITICAL = "two_critical"
    SUPER_STAR = "super_star"


@dataclass(frozen=True)
class OneDParams:
    """Exponent b, bottom datum m, and bulk height h of the ramp energy."""

    b: float
    m: float
    h: float

    def __post_init__(self):
        if not (self.b > 0 and self.m > 0 and self.h > 0):
            raise ValueError(f"b, m, h must be positive, got {self}")


@dataclass(frozen=True)
class Thresholds:
    h_sharp: float
    h_star: float


@dataclass(frozen=True)
class CriticalPoints:
    """Local minimum (lower) and local maximum (upper) abscissae of g."""

    lower: float
    upper: float


@dataclass(frozen=True)
class OneDClassification:
    regime: Regime
    gamma: float
    critical: Optional[CriticalPoints]
    tau: Optional[float]
    minimizer_ts: tuple[float, ...]
    inf_value: float
    boundary: Optional[str] = None


@dataclass(frozen=True)
class Admissibility:
    admissible: bool
    reason: str


@dataclass(frozen=True)
class Sensitivity:
    """d/dh of the two critical abscissae; tau_trend is the sign of d tau/dh."""

    d_lower: float
    d_upper: float
    tau_trend: int


@dataclass(frozen=True)
class BruteForceResult:
    t_best: float
    value: float


def thresholds(p: OneDParams) -> Thresholds:
    e = 1.0 / (p.b + 1.0)
    scale = p.m**e
    h_sharp = (p.b + 1.0) * p.b ** (-p.b * e) * scale
    h_star = (2.0 * p.b + 2.0) * (2.0 * p.b + 1.0) ** (-p.b * e) * scale
    return Thresholds(h_sharp=h_sharp, h_star=h_star)


def g_eval(p: OneDParams, t: float) -> float:
    """Ramp energy g(t) per unit cross-section."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    q = 2.0 * p.b + 1.0
    return p.m * p.m / t + (p.h**q - (p.h - min(p.h, t)) ** q) / q


def g_array(p: OneDParams, ts: np.ndarray) -> np.ndarray:
    """Vectorized g over an array of positive abscissae."""
    q = 2.0 * p.b + 1.0
    return p.m * p.m / ts + (p.h**q - (p.h - np.minimum(p.h, ts)) ** q) / q


def g_prime(p: OneDParams, t: float) -> float:
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if t < p.h:
        return -p.m * p.m / (t * t) + (p.h - t) ** (2.0 * p.b)
    return -p.m * p.m / (t * t)


def psi_eval(p: OneDParams, t: float) -> float:
    """psi(t) = t^2 (h - t)^(2b) - m^2 on (0, h); shares its sign with g'."""
    if not (0.0 < t < p.h):
        raise ValueError(f"t must lie in (0, h) = (0, {p.h}), got {t}")
    return _psi_raw(p, t)


def _psi_raw(p: OneDParams, t: float) -> float:
    return t * t * (p.h - t) ** (2.0 * p.b) - p.m * p.m


def _at_sharp(p: OneDParams, th: Thresholds) -> bool:
    return abs(p.h - th.h_sharp) <= BOUNDARY_REL_TOL * th.h_sharp


def critical_points_bisect(p: OneDParams) -> CriticalPoints:
    """Both roots of psi by bisection; valid only for h > h_sharp.

    psi is negative at both ends of (0, h) and positive at its single interior
    maximum h/(b+1), so each half-interval brackets exactly one root.
    """
    peak = p.h / (p.b + 1.0)
    lower = bisect_root(lambda t: _psi_raw(p, t), 0.0, peak, rel_tol=ROOT_REL_TOL)
    upper = bisect_root(lambda t: -_psi_raw(p, t), peak, p.h, rel_tol=ROOT_REL_TOL)
    return CriticalPoints(lower=lower, upper=upper)


def critical_points_trig(p: OneDParams) -> CriticalPoints:
    """Closed-form roots for b = 1/2 via the depressed-cubic cosine formula.

    For b = 1/2 the stationarity condition is t^3 - h t^2 + m^2 = 0; with
    theta = arccos(1 - (27/2) m^2 / h^3) the two positive roots are
    (2h/3) cos((theta + 4 pi)/3) + h/3 and (2h/3) cos(theta/3) + h/3.
    """
    if p.b != 0.5:
        raise ValueError("trigonometric closed form applies to b = 1/2 only")
    arg = 1.0 - 13.5 * p.m * p.m / p.h**3
    theta = math.acos(min(1.0, max(-1.0, arg)))
    lower = (2.0 * p.h / 3.0) * math.cos((theta + 4.0 * math.pi) / 3.0) + p.h / 3.0
    upper = (2.0 * p.h / 3.0) * math.cos(theta / 3.0) + p.h / 3.0
    return CriticalPoints(lower=lower, upper=upper)


def critical_points(p: OneDParams) -> Optional[CriticalPoints]:
    """Critical abscissae of g, or None below the first threshold.

    At h = h_sharp (within tolerance) the pair degenerates to h/(b+1).
    For b = 1/2 the trigonometric closed form is used; the generic path is
    sign-bracketed bisection on psi.
    """
    th = thresholds(p)
    if _at_sharp(p, th):
        t0 = p.h / (p.b + 1.0)
        return CriticalPoints(lower=t0, upper=t0)
    if p.h < th.h_sharp:
        return None
    if p.b == 0.5:
        return critical_points_trig(p)
    return critical_points_bisect(p)


def tau(p: OneDParams) -> Optional[float]:
    """Conjugate abscissa tau > t_high with g(tau) = g(t_low).

    Defined for h_sharp < h < h_star (h at h_sharp returns the degenerate
    h/(b+1)); None elsewhere.  g is strictly decreasing beyond t_high, so the
    bracket grows geometrically from t_high and, once it would pass h, the
    exact tail formula tau = m^2 / (g(t_low) - h^(2b+1)/(2b+1)) applies.
    """
    th = thresholds(p)
    if _at_sharp(p, th):
        return p.h / (p.b + 1.0)
    if p.h < th.h_sharp:
        return None
    if p.h >= th.h_star * (1.0 - BOUNDARY_REL_TOL):
        return None
    cp = critical_points(p)
    assert cp is not None
    target = g_eval(p, cp.lower)
    hi = cp.upper
    while hi < p.h and g_eval(p, hi) > target:
        hi = min(2.0 * hi, p.h)
    if g_eval(p, hi) > target:
        # solution exceeds h: beyond h only the m^2/t term varies
        q = 2.0 * p.b + 1.0
        return p.m * p.m / (target - p.h**q / q)
    return bisect_root(
        lambda t: g_eval(p, t) - target, cp.upper, hi, rel_tol=ROOT_REL_TOL
    )


def classify_oned(p: OneDParams, gamma: float) -> OneDClassification:
    """Full minimization of g over (0, gamma]: regime, minimizers, infimum.

    The minimizer set is the endpoint {gamma} whenever g decreases up to
    gamma, the interior local minimum {t_low} when gamma lands beyond it but
    before the conjugate abscissa, and both {t_low, gamma} exactly at the
    conjugate abscissa (detected within the boundary tolerance).
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    th = thresholds(p)

    if _at_sharp(p, th):
        t0 = p.h / (p.b + 1.0)
        cp = CriticalPoints(lower=t0, upper=t0)
        boundary = "gamma~t" if abs(gamma - t0) <= BOUNDARY_REL_TOL * t0 else None
        return OneDClassification(
            regime=Regime.AT_SHARP,
            gamma=gamma,
            critical=cp,
            tau=t0,
            minimizer_ts=(gamma,),
            inf_value=g_eval(p, gamma),
            boundary=boundary,
        )

    if p.h < th.h_sharp:
        return OneDClassification(
            regime=Regime.SUB_SHARP,
            gamma=gamma,
            critical=None,
            tau=None,
            minimizer_ts=(gamma,),
            inf_value=g_eval(p, gamma),
        )

    cp = critical_points(p)
    assert cp is not None

    if p.h >= th.h_star * (1.0 - BOUNDARY_REL_TOL):
        boundary = (
            "h~h_star" if abs(p.h - th.h_star) <= BOUNDARY_REL_TOL * th.h_star else None
        )
        if abs(gamma - cp.lower) <= BOUNDARY_REL_TOL * cp.lower:
            boundary = "gamma~t"
            ts: tuple[float, ...] = (gamma,)
        elif gamma <= cp.lower:
            ts = (gamma,)
        else:
            ts = (cp.lower,)
        return OneDClassification(
            regime=Regime.SUPER_STAR,
            gamma=gamma,
            critical=cp,
            tau=None,
            minimizer_ts=ts,
            inf_value=g_eval(p, ts[0]),
            boundary=boundary,
        )

    tv = tau(p)
    assert tv is not None
    if abs(gamma - cp.lower) <= BOUNDARY_REL_TOL * cp.lower:
        ts = (gamma,)
        boundary = "gamma~t"
    elif gamma < cp.lower:
        ts = (gamma,)
        boundary = None
    elif abs(gamma - tv) <= BOUNDARY_REL_TOL * tv:
        ts = (cp.lower, gamma)
        boundary = "gamma~tau"
    elif gamma < tv:
        ts = (cp.lower,)
        boundary = None
    else:
        ts = (gamma,)
        boundary = None
    return OneDClassification(
        regime=Regime.TWO_CRITICAL,
        gamma=gamma,
        critical=cp,
        tau=tv,
        minimizer_ts=ts,
        inf_value=g_eval(p, ts[0]),
        boundary=boundary,
    )


def gamma_admissible(p: OneDParams, gamma: float) -> Admissibility:
    """Whether the lateral cut at gamma forces every minimizer to be non-flat.

    True exactly when the endpoint ramp v_gamma is the unique flat minimizer
    and g still slopes downward at gamma; coincidences with a critical
    abscissa return False with a boundary reason.
    """
    cls = classify_oned(p, gamma)
    if cls.boundary == "gamma~t":
        return Admissibility(False, "boundary: gamma at the local-minimum abscissa")
    if cls.boundary == "gamma~tau":
        return Admissibility(False, "boundary: gamma at the conjugate abscissa")
    endpoint_only = cls.minimizer_ts == (gamma,)
    sloped = g_prime(p, gamma) < 0.0
    if endpoint_only and sloped:
        if cls.regime in (Regime.SUB_SHARP, Regime.AT_SHARP):
            return Admissibility(True, "all cuts admissible below the first threshold")
        if cls.critical is not None and gamma < cls.critical.lower:
            return Admissibility(True, "gamma below the local-minimum abscissa")
        return Admissibility(True, "gamma above the conjugate abscissa")
    if not endpoint_only:
        return Admissibility(False, "best flat profile detaches before gamma")
    return Admissibility(False, "g does not decrease at gamma")


def sensitivity(p: OneDParams) -> Sensitivity:
    """d t_low/dh < 0 and d t_high/dh > 0 from implicit differentiation.

    Both derivatives are -b t / (h - (b+1) t) at the respective abscissa;
    the conjugate abscissa always moves upward with h (trend +1).
    """
    th = thresholds(p)
    if _at_sharp(p, th):
        raise DegenerateCriticalPoints(
            f"critical-point sensitivity degenerates at h = h_sharp = {th.h_sharp}"
        )
    if p.h < th.h_sharp:
        raise ValueError(f"no critical points below h_sharp = {th.h_sharp}")
    cp = critical_points(p)
    assert cp is not None

    def deriv(t: float) -> float:
        return -p.b * t / (p.h - (p.b + 1.0) * t)

    return Sensitivity(d_lower=deriv(cp.lower), d_upper=deriv(cp.upper), tau_trend=+1)


def oned_energy_bruteforce(
    p: OneDParams, gamma: float, grid_points: int = 100_000
) -> BruteForceResult:
    """Grid minimization of g over (0, gamma]; the test oracle for classify.

    Scans g on the uniform grid gamma * k / n, k = 1..n.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if grid_points < 1000:
        raise ValueError(f"grid_points must be at least 1000, got {grid_points}")
    ts = gamma * np.arange(1, grid_points + 1, dtype=np.float64) / grid_points
    vals = g_array(p, ts)
    k = int(np.argmin(vals))
    return BruteForceResult(t_best=float(ts[k]), value=float(vals[k]))
