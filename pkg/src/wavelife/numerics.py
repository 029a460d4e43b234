"""Small numerical kernels shared by the exponent and proof modules.

Bracketing bisection for monotone scalar equations, and adaptive Simpson
quadrature (1-D and iterated 2-D) that returns an error estimate next to
the value so callers can tell "failed" apart from "not converged".
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

__all__ = [
    "QuadResult",
    "adaptive_simpson",
    "adaptive_simpson_2d",
    "bisect_increasing",
]


def bisect_increasing(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = 1e-14,
    max_expand: int = 2000,
    max_iter: int = 400,
) -> float:
    """Root of a strictly increasing function by bisection.

    The bracket ``[lo, hi]`` is widened by doubling its upper end until
    ``func(hi) > 0``; ``lo`` must already satisfy ``func(lo) <= 0``.
    Iteration stops once the bracket is narrower than ``rtol * hi`` or the
    midpoint no longer moves in floating point.
    """
    flo = func(lo)
    if flo > 0:
        raise ValueError(f"lower bracket end {lo!r} already has positive residual {flo!r}")
    fhi = func(hi)
    expansions = 0
    while fhi <= 0:
        if fhi == 0:
            return hi
        lo, hi = hi, 2.0 * hi if hi > 0 else 1.0
        fhi = func(hi)
        expansions += 1
        if expansions > max_expand:
            raise ArithmeticError("could not bracket the root by doubling")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * abs(hi):
            break
        fmid = func(mid)
        if fmid == 0:
            return mid
        if fmid < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int
    converged: bool


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(
    func: Callable[[float], float],
    a: float,
    b: float,
    rtol: float = 1e-10,
    atol: float = 0.0,
    min_depth: int = 4,
    max_depth: int = 48,
) -> QuadResult:
    """Integrate ``func`` over ``[a, b]`` with adaptive Simpson.

    The interval is first split into ``2**min_depth`` panels; each panel is
    then bisected until the Richardson estimate ``|S2 - S1| / 15`` fits its
    share of the tolerance. The tolerance is ``max(atol, rtol * |I0|)`` with
    ``I0`` the composite estimate on the initial panels.
    """
    if b == a:
        return QuadResult(0.0, 0.0, 0, True)
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0

    panels = 2**min_depth
    xs = [a + (b - a) * i / (2 * panels) for i in range(2 * panels + 1)]
    xs[-1] = b
    fs = [func(x) for x in xs]
    nevals = len(fs)
    coarse = sum(_simpson(fs[2 * i], fs[2 * i + 1], fs[2 * i + 2], xs[2 * i + 2] - xs[2 * i]) for i in range(panels))
    tol = max(atol, rtol * abs(coarse))
    if tol == 0.0:
        tol = 1e-300

    total = 0.0
    error = 0.0
    converged = True
    width = b - a
    # stack entries: (a, m, b, fa, fm, fb, whole, depth)
    stack = []
    for i in range(panels):
        x0, x1, x2 = xs[2 * i], xs[2 * i + 1], xs[2 * i + 2]
        f0, f1, f2 = fs[2 * i], fs[2 * i + 1], fs[2 * i + 2]
        stack.append((x0, x1, x2, f0, f1, f2, _simpson(f0, f1, f2, x2 - x0), min_depth))
    while stack:
        x0, xm, x2, f0, fm, f2, whole, depth = stack.pop()
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = func(xl)
        fr = func(xr)
        nevals += 2
        left = _simpson(f0, fl, fm, xm - x0)
        right = _simpson(fm, fr, f2, x2 - xm)
        delta = left + right - whole
        local_tol = tol * (x2 - x0) / width
        if abs(delta) <= 15.0 * local_tol or depth >= max_depth:
            if depth >= max_depth and abs(delta) > 15.0 * local_tol:
                converged = False
            total += left + right + delta / 15.0
            error += abs(delta) / 15.0
        else:
            stack.append((x0, xl, xm, f0, fl, fm, left, depth + 1))
            stack.append((xm, xr, x2, fm, fr, f2, right, depth + 1))
    if not math.isfinite(total):
        converged = False
    return QuadResult(sign * total, error, nevals, converged)


def adaptive_simpson_2d(
    func: Callable[[float, float], float],
    outer: tuple[float, float],
    inner: Callable[[float], tuple[float, float]],
    rtol: float = 1e-9,
    min_depth: int = 4,
    max_depth: int = 40,
) -> QuadResult:
    """Iterated adaptive Simpson for ``int dy int func(x, y) dx``.

    ``outer`` gives the limits of the outer variable ``y``; ``inner(y)``
    returns the limits of ``x`` for that ``y``. The reported error adds the
    outer Richardson estimate to the worst inner error times the outer
    length.
    """
    worst_inner = [0.0]
    count = [0]
    inner_ok = [True]

    def slice_integral(y: float) -> float:
        lo, hi = inner(y)
        if hi <= lo:
            return 0.0
        res = adaptive_simpson(lambda x: func(x, y), lo, hi, rtol=0.1 * rtol, min_depth=2, max_depth=max_depth)
        count[0] += res.evaluations
        worst_inner[0] = max(worst_inner[0], res.error)
        inner_ok[0] = inner_ok[0] and res.converged
        return res.value

    res = adaptive_simpson(slice_integral, outer[0], outer[1], rtol=rtol, min_depth=min_depth, max_depth=max_depth)
    error = res.error + abs(outer[1] - outer[0]) * worst_inner[0]
    return QuadResult(res.value, error, count[0], res.converged and inner_ok[0])
