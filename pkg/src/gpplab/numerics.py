"""Scalar numerical routines: adaptive Simpson quadrature and inversion of
monotone functions by bisection with Newton polishing.

These back the numeric CDF/quantile path of smoothing kernels and the outer
integral of the D-norm functionals.  They favour robustness over speed; the
Monte Carlo hot loops never go through here.
"""
from __future__ import annotations

import math
from typing import Callable

from .errors import NoRootError

_MAX_DEPTH = 60


def _simpson(f, a, fa, b, fb):
    m = 0.5 * (a + b)
    fm = f(m)
    return m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, fa, b, fb, m, fm, whole, tol, depth):
    lm, flm, left = _simpson(f, a, fa, m, fm)
    rm, frm, right = _simpson(f, m, fm, b, fb)
    delta = left + right - whole
    if depth >= _MAX_DEPTH or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return _adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) + _adaptive(
        f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1
    )


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Classic recursive adaptive Simpson with Richardson correction.  The
    integrand may have isolated kinks; adaptivity localizes the refinement.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    fa, fb = f(a), f(b)
    m, fm, whole = _simpson(f, a, fa, b, fb)
    return sign * _adaptive(f, a, fa, b, fb, m, fm, whole, tol, 0)


def integrate_panels(f, knots, tol: float = 1e-10) -> float:
    """Adaptive Simpson over consecutive panels [knots[k], knots[k+1]].

    Splitting at known kink locations before going adaptive keeps the
    recursion shallow.  The tolerance is divided across panels.
    """
    knots = sorted(set(float(k) for k in knots))
    panels = len(knots) - 1
    if panels < 1:
        return 0.0
    per = tol / panels
    return sum(adaptive_simpson(f, knots[k], knots[k + 1], per) for k in range(panels))


def invert_monotone(
    f: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    *,
    dfdx: Callable[[float], float] | None = None,
    xtol: float = 1e-12,
    max_bisect: int = 200,
) -> float:
    """Solve ``f(x) = target`` for an increasing ``f`` on the bracket [lo, hi].

    Bisection narrows the bracket; when a derivative is supplied, Newton
    steps polish the midpoint as long as they stay inside the bracket.
    Raises :class:`NoRootError` when the bracket does not straddle the target.
    """
    flo = f(lo) - target
    fhi = f(hi) - target
    if flo > 0.0 or fhi < 0.0:
        raise NoRootError(
            f"target {target!r} not bracketed on [{lo!r}, {hi!r}] "
            f"(f(lo)-target={flo!r}, f(hi)-target={fhi!r})"
        )
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    x = 0.5 * (lo + hi)
    for _ in range(max_bisect):
        fx = f(x) - target
        if fx == 0.0:
            return x
        if fx < 0.0:
            lo = x
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(lo), abs(hi)):
            break
        x = 0.5 * (lo + hi)
        if dfdx is not None:
            d = dfdx(x)
            if d > 0.0 and math.isfinite(d):
                step = (f(x) - target) / d
                cand = x - step
                if lo < cand < hi:
                    x = cand
    return 0.5 * (lo + hi)


def expand_bracket(f, target, x0: float = 1.0, factor: float = 2.0, max_expand: int = 200):
    """Find [lo, hi] with f(lo) <= target <= f(hi) for an increasing f on R."""
    lo, hi = -x0, x0
    for _ in range(max_expand):
        if f(lo) <= target:
            break
        lo *= factor
    else:
        raise NoRootError(f"could not bracket target {target!r} from below")
    for _ in range(max_expand):
        if f(hi) >= target:
            break
        hi *= factor
    else:
        raise NoRootError(f"could not bracket target {target!r} from above")
    return lo, hi
