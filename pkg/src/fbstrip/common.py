"""Shared numerics: energy bookkeeping, scalar bisection, adaptive Simpson."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class EnergyBreakdown:
    """Gradient (Dirichlet) part and occupied-volume (bulk) part of an energy."""

    dirichlet: float
    bulk: float

    @property
    def total(self) -> float:
        return self.dirichlet + self.bulk

    def as_dict(self) -> dict:
        return {"dirichlet": self.dirichlet, "bulk": self.bulk, "total": self.total}


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Root of a sign-changing f on [lo, hi] by plain bisection.

    Stops when the bracket width drops below rel_tol relative to the midpoint
    magnitude (absolute fallback for roots near zero).
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel_tol * max(abs(mid), 1e-300):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0.0) == (flo > 0.0):
            lo = mid
            flo = fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_floor: float = 1e-14,
    max_depth: int = 50,
) -> float:
    """Adaptive Simpson quadrature of a smooth f on [a, b].

    The acceptance test per subinterval is the classical |S2 - S1| <= 15 tol
    criterion with the tolerance budget halved on each split; rel_tol applies
    to the running whole-interval estimate, abs_floor guards tiny integrals.
    """
    if b <= a:
        return 0.0

    def simpson(x0: float, x2: float, f0: float, f1: float, f2: float) -> float:
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    fa = f(a)
    fb = f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = simpson(a, b, fa, fm, fb)
    tol = max(rel_tol * abs(whole), abs_floor)

    def recurse(x0, x2, f0, f1, f2, s, tol, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if depth <= 0 or abs(left + right - s) <= 15.0 * tol:
            return left + right + (left + right - s) / 15.0
        half = 0.5 * tol
        return recurse(x0, xm, f0, fl, f1, left, half, depth - 1) + recurse(
            xm, x2, f1, fr, f2, right, half, depth - 1
        )

    return recurse(a, b, fa, fm, fb, whole, tol, max_depth)


def fmt_real(x: float) -> str:
    """Shortest decimal that round-trips to the same float64."""
    return repr(float(x))
