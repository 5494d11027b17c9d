"""
Special functions: standard normal and the unit-mean Gamma factor.
"""
import math
from typing import Union

import numpy as np
from scipy import special

from concentration_risk.errors import InvalidParameterError
from concentration_risk.stochastics.distributions import GammaFactorSpec
from concentration_risk.stochastics.solvers import solve_monotone

ArrayLike = Union[float, np.ndarray]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x: ArrayLike) -> ArrayLike:
    """Standard normal distribution function."""
    return special.ndtr(x)


def normal_pdf(x: ArrayLike) -> ArrayLike:
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    value = np.exp(-0.5 * x * x) / _SQRT_2PI
    return float(value) if value.ndim == 0 else value


def normal_quantile(p: ArrayLike) -> ArrayLike:
    """
    Inverse of the standard normal distribution function.

    Args:
        p: Probability or array of probabilities in (0, 1)

    Returns:
        Quantile(s)

    Raises:
        InvalidParameterError: If any probability lies outside (0, 1)
    """
    array = np.asarray(p, dtype=float)
    if np.any(~(array > 0.0) | ~(array < 1.0)):
        raise InvalidParameterError(f"Normal quantile needs p in (0, 1), got {p}")
    value = special.ndtri(array)
    return float(value) if value.ndim == 0 else value


def gamma_cdf(spec: GammaFactorSpec, x: ArrayLike) -> ArrayLike:
    """
    Distribution function of Gamma(shape xi, scale 1/xi).

    Args:
        spec: Factor specification
        x: Evaluation point(s)

    Returns:
        P(X <= x)
    """
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    value = special.gammainc(spec.xi, spec.xi * x)
    return float(value) if value.ndim == 0 else value


def gamma_quantile(spec: GammaFactorSpec, q: float) -> float:
    """
    Quantile of the Gamma factor by monotone bracketing.

    The search runs in log(x) so that tiny lower quantiles of small shapes
    keep full relative precision.

    Args:
        spec: Factor specification
        q: Probability level in (0, 1)

    Returns:
        float: x with P(X <= x) = q
    """
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"Quantile level must lie in (0, 1), got {q}")

    def residual(log_x: float) -> float:
        return float(special.gammainc(spec.xi, spec.xi * math.exp(log_x))) - q

    log_root = solve_monotone(residual, -10.0, 5.0, tol=1e-14, limits=(-700.0, 700.0))
    return math.exp(log_root)
