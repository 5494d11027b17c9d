"""
Distribution specifications and samplers for the systematic factor and LGDs.
"""
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from concentration_risk.errors import InvalidParameterError
from concentration_risk.stochastics.streams import RandomSource, as_generator


@dataclass(frozen=True)
class GammaFactorSpec:
    """Gamma(xi, 1/xi) systematic factor: mean 1, variance 1/xi."""

    xi: float

    def __post_init__(self):
        if not self.xi > 0.0:
            raise InvalidParameterError(f"Gamma precision xi must be positive, got {self.xi}")

    @property
    def scale(self) -> float:
        return 1.0 / self.xi

    @property
    def variance(self) -> float:
        return 1.0 / self.xi


@dataclass(frozen=True)
class BetaLgdSpec:
    """
    Beta LGD with mean elgd and variance nu * elgd * (1 - elgd).

    nu = 0, elgd = 0 and elgd = 1 are the deterministic limits.
    """

    elgd: float
    nu: float

    def __post_init__(self):
        if not 0.0 <= self.elgd <= 1.0:
            raise InvalidParameterError(f"ELGD must lie in [0, 1], got {self.elgd}")
        if not 0.0 <= self.nu < 1.0:
            raise InvalidParameterError(f"LGD volatility multiplier nu must lie in [0, 1), got {self.nu}")

    @property
    def is_degenerate(self) -> bool:
        return self.nu == 0.0 or self.elgd in (0.0, 1.0)

    @property
    def variance(self) -> float:
        return self.nu * self.elgd * (1.0 - self.elgd)

    @property
    def shapes(self) -> Tuple[float, float]:
        """
        Beta shape parameters (alpha, beta).

        Raises:
            InvalidParameterError: For the degenerate limits
        """
        if self.is_degenerate:
            raise InvalidParameterError(f"Degenerate LGD (elgd={self.elgd}, nu={self.nu}) has no Beta shapes")
        concentration = 1.0 / self.nu - 1.0
        return self.elgd * concentration, (1.0 - self.elgd) * concentration


def sample_gamma(spec: GammaFactorSpec, scale_override: Optional[float], stream: RandomSource,
                 size: Optional[Union[int, Tuple[int, ...]]] = None) -> Union[float, np.ndarray]:
    """
    Draw the Gamma factor, optionally under a tilted scale.

    numpy's Gamma generator uses the Marsaglia-Tsang squeeze with the
    u^(1/shape) boost for shapes below one.

    Args:
        spec: Factor specification
        scale_override: Scale to use instead of 1/xi (tilted factor), or None
        stream: Random stream or generator
        size: Number of draws (None for a scalar)

    Returns:
        Draw(s) from Gamma(xi, scale)
    """
    scale = spec.scale if scale_override is None else scale_override
    if not scale > 0.0:
        raise InvalidParameterError(f"Gamma scale must be positive, got {scale}")
    draws = as_generator(stream).gamma(spec.xi, scale, size=size)
    return float(draws) if size is None else draws


def sample_beta_lgd(spec: BetaLgdSpec, stream: RandomSource,
                    size: Optional[Union[int, Tuple[int, ...]]] = None) -> Union[float, np.ndarray]:
    """
    Draw loss-given-default values.

    Args:
        spec: LGD specification
        stream: Random stream or generator
        size: Number of draws (None for a scalar)

    Returns:
        Draw(s) in [0, 1]
    """
    if spec.is_degenerate:
        return spec.elgd if size is None else np.full(size, spec.elgd)
    alpha, beta = spec.shapes
    draws = as_generator(stream).beta(alpha, beta, size=size)
    return float(draws) if size is None else draws


def sample_lgd_matrix(elgd: np.ndarray, nu: float, generator: np.random.Generator, n_paths: int) -> np.ndarray:
    """
    Draw an (n_paths, N) matrix of LGDs, one column per obligor.

    Args:
        elgd: Expected LGD per obligor
        nu: Volatility multiplier shared by all obligors
        generator: numpy generator
        n_paths: Number of simulated paths

    Returns:
        np.ndarray: LGD draws
    """
    elgd = np.asarray(elgd, dtype=float)
    if not 0.0 <= nu < 1.0:
        raise InvalidParameterError(f"LGD volatility multiplier nu must lie in [0, 1), got {nu}")
    lgd = np.broadcast_to(elgd, (n_paths, elgd.size)).copy()
    if nu == 0.0:
        return lgd
    random = (elgd > 0.0) & (elgd < 1.0)
    if np.any(random):
        concentration = 1.0 / nu - 1.0
        alpha = elgd[random] * concentration
        beta = (1.0 - elgd[random]) * concentration
        lgd[:, random] = generator.beta(alpha, beta, size=(n_paths, int(random.sum())))
    return lgd
