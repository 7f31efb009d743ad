"""Scalar minimization and quadrature helpers used by the bound engine.

The bound formulas are optimized over a time (or time-like) parameter on
windows where they are unimodal, so a golden-section search on a log axis
with explicit endpoint comparison is all that is needed.  The conformal
factor construction involves nested one-dimensional integrals, handled by
a recursive adaptive Simpson rule.
"""

from __future__ import annotations

import math
from typing import Callable, Tuple

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi


def golden_section_min(f: Callable[[float], float], a: float, b: float,
                       rel_tol: float = 1e-10,
                       max_iter: int = 400) -> Tuple[float, float]:
    """Minimize a unimodal ``f`` on [a, b]; returns (argmin, min).

    Endpoints are evaluated and compared against the interior solution, so
    monotone objectives resolve to the correct boundary point.
    """
    if not b > a:
        raise ValueError(f"invalid bracket [{a}, {b}]")
    fa, fb = f(a), f(b)
    lo, hi = a, b
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    scale = abs(b - a)
    for _ in range(max_iter):
        if hi - lo <= rel_tol * max(scale, abs(lo) + abs(hi)):
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    if fc < fd:
        x, fx = c, fc
    else:
        x, fx = d, fd
    # monotone cases: an endpoint may beat the interior estimate
    if fa < fx:
        x, fx = a, fa
    if fb < fx:
        x, fx = b, fb
    return x, fx


def minimize_log_scale(f: Callable[[float], float], t_lo: float, t_hi: float,
                       rel_tol: float = 1e-10,
                       grid_check: bool = False) -> Tuple[float, float]:
    """Minimize ``f(t)`` for t in [t_lo, t_hi] by golden section in log t.

    With ``grid_check`` a 64-point pre-scan asserts the sampled values are
    unimodal (single descent/ascent switch), guarding the bracket choice.
    """
    if not (t_lo > 0 and t_hi > t_lo):
        raise ValueError(f"invalid time bracket [{t_lo}, {t_hi}]")
    la, lb = math.log(t_lo), math.log(t_hi)
    if grid_check:
        xs = [la + (lb - la) * i / 63 for i in range(64)]
        ys = [f(math.exp(x)) for x in xs]
        switches = 0
        for i in range(1, 63):
            if ys[i - 1] >= ys[i] <= ys[i + 1]:
                continue
            if ys[i - 1] < ys[i] > ys[i + 1]:
                switches += 1
        assert switches == 0, "objective not unimodal on the bracket"
    x, fx = golden_section_min(lambda u: f(math.exp(u)), la, lb,
                               rel_tol=rel_tol)
    return math.exp(x), fx


def _simpson(fa: float, fm: float, fb: float, a: float, b: float) -> float:
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adaptive(f, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = _simpson(fa, flm, fm, a, m)
    right = _simpson(fm, frm, fb, m, b)
    if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
        return left + right + (left + right - whole) / 15.0
    return (_adaptive(f, a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
            _adaptive(f, m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1))


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 40) -> float:
    """Adaptive Simpson quadrature of ``f`` on [a, b] to absolute tolerance."""
    if a == b:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, a, b)
    return _adaptive(f, a, m, b, fa, fm, fb, whole, tol, max_depth)
