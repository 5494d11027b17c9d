"""
Monotone root finding with bracket expansion.
"""
import logging
import math
from typing import Callable, Tuple

from scipy import optimize

from concentration_risk.errors import InvalidParameterError, NoSignChangeError, NumericalError

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
DEFAULT_MAX_EXPANSIONS = 60

logger = logging.getLogger(__name__)


def _value(f: Callable[[float], float], x: float) -> float:
    value = float(f(x))
    if math.isnan(value):
        raise NumericalError(f"Function value is NaN at x={x}")
    return value


def solve_monotone(f: Callable[[float], float], lo: float, hi: float, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER, limits: Tuple[float, float] = (-math.inf, math.inf),
                   max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> float:
    """
    Find the root of a monotone function.

    The bracket [lo, hi] is grown geometrically toward the side where the root
    must lie until the sign changes, then Brent's hybrid bisection/secant
    iteration runs on it.

    Args:
        f: Continuous monotone scalar function
        lo: Lower end of the initial bracket
        hi: Upper end of the initial bracket
        tol: Absolute tolerance on the root
        max_iter: Iteration cap of the refinement
        limits: Hard domain limits the expansion never crosses
        max_expansions: Cap on bracket expansions

    Returns:
        float: Root r

    Raises:
        InvalidParameterError: If the bracket is empty
        NoSignChangeError: If no sign change is found within the expansion budget
    """
    if not lo < hi:
        raise InvalidParameterError(f"Empty bracket [{lo}, {hi}]")
    lower_limit, upper_limit = limits
    lo, hi = max(lo, lower_limit), min(hi, upper_limit)
    f_lo, f_hi = _value(f, lo), _value(f, hi)

    for expansion in range(max_expansions + 1):
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if (f_lo < 0.0) != (f_hi < 0.0):
            break
        if expansion == max_expansions:
            break

        width = hi - lo
        if f_hi == f_lo:
            new_lo, new_hi = max(lo - width, lower_limit), min(hi + width, upper_limit)
            if new_lo == lo and new_hi == hi:
                break
            lo, hi = new_lo, new_hi
            f_lo, f_hi = _value(f, lo), _value(f, hi)
            continue

        increasing = f_hi > f_lo
        if (f_lo > 0.0) == increasing:
            new_lo = max(lo - 2.0 * width, lower_limit)
            if new_lo == lo:
                break
            hi, f_hi = lo, f_lo
            lo, f_lo = new_lo, _value(f, new_lo)
        else:
            new_hi = min(hi + 2.0 * width, upper_limit)
            if new_hi == hi:
                break
            lo, f_lo = hi, f_hi
            hi, f_hi = new_hi, _value(f, new_hi)
    if (f_lo < 0.0) == (f_hi < 0.0):
        raise NoSignChangeError(
            f"No sign change on [{lo}, {hi}] (f={f_lo}, {f_hi})",
            details={'lo': lo, 'hi': hi, 'f_lo': f_lo, 'f_hi': f_hi}
        )

    try:
        root, info = optimize.brentq(f, lo, hi, xtol=tol, maxiter=max_iter, full_output=True)
    except RuntimeError as e:
        logger.error(f"Root refinement failed on [{lo}, {hi}]: {str(e)}")
        raise NumericalError(f"Root refinement failed on [{lo}, {hi}]: {str(e)}")
    logger.debug(f"Root {root} after {info.iterations} iterations")
    return float(root)
