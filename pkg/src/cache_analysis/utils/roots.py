"""Root finding for smooth increasing functions of one variable.

The Newton iteration is safeguarded the usual way: a step is only taken when
it stays inside the current bracket and halves the previous step, otherwise
the bracket is bisected.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

from src.cache_analysis.exception import RootFindingError


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    bracket: Tuple[float, float]
    iterations: int


def expand_bracket(func: Callable[[float], float], lo: float, hi: float,
                   max_doublings: int = 1100) -> Tuple[float, float]:
    """Double ``hi`` until ``func(hi) > 0``; ``func`` is increasing with ``func(lo) <= 0``."""
    if hi <= lo:
        hi = 2.0 * lo if lo > 0 else 1.0
    for _ in range(max_doublings):
        if func(hi) > 0.0:
            return lo, hi
        lo, hi = hi, 2.0 * hi
        if math.isinf(hi):
            break
    raise RootFindingError(f"Could not bracket a sign change above {lo:g}")


def safeguarded_newton(func: Callable[[float], float],
                       dfunc: Callable[[float], float],
                       lo: float, hi: float,
                       ftol: float,
                       max_iterations: int = 200) -> RootResult:
    """Find x in [lo, hi] with |func(x)| <= ftol for an increasing ``func``.

    Args:
        func: increasing function, func(lo) <= 0 <= func(hi)
        dfunc: its derivative
        lo, hi: bracket
        ftol: absolute tolerance on the residual
        max_iterations: iteration budget

    Raises:
        RootFindingError: if the bracket holds no sign change or the budget is exhausted
    """
    f_lo, f_hi = func(lo), func(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        raise RootFindingError(
            f"Root is not bracketed: f({lo:g})={f_lo:g}, f({hi:g})={f_hi:g}"
        )
    if abs(f_lo) <= ftol:
        return RootResult(lo, f_lo, (lo, hi), 0)
    if abs(f_hi) <= ftol:
        return RootResult(hi, f_hi, (lo, hi), 0)

    x = 0.5 * (lo + hi)
    dx_old = hi - lo
    dx = dx_old
    for iteration in range(1, max_iterations + 1):
        f = func(x)
        if abs(f) <= ftol:
            return RootResult(x, f, (lo, hi), iteration)
        if f < 0.0:
            lo = x
        else:
            hi = x

        df = dfunc(x)
        newton_ok = df > 0.0 and abs(2.0 * f) <= abs(dx_old * df)
        if newton_ok:
            candidate = x - f / df
            newton_ok = lo < candidate < hi
        dx_old = dx
        if newton_ok:
            dx = candidate - x
            x_new = candidate
        else:
            x_new = 0.5 * (lo + hi)
            dx = x_new - x

        if x_new == x or (hi - lo) <= 4.0 * math.ulp(hi):
            residual = func(x_new)
            if abs(residual) > ftol:
                logging.warning(
                    f"Bracket collapsed at x={x_new:.17g} with residual {residual:.3g} "
                    f"above tolerance {ftol:.3g}"
                )
            return RootResult(x_new, residual, (lo, hi), iteration)
        x = x_new

    raise RootFindingError(f"No convergence after {max_iterations} iterations")
