"""
Adaptive-moment gradient descent.
"""
from typing import List, Sequence, Tuple

import numpy as np

from concentration_risk.errors import InvalidParameterError


class Adam:
    """Adam updates applied in place to a list of parameter arrays."""

    def __init__(self, parameters: Sequence[np.ndarray], learning_rate: float = 1e-4,
                 betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8):
        if learning_rate <= 0.0:
            raise InvalidParameterError(f"Learning rate must be positive, got {learning_rate}")
        if not all(0.0 <= b < 1.0 for b in betas):
            raise InvalidParameterError(f"Moment decays must lie in [0, 1), got {betas}")
        self.parameters = list(parameters)
        self.learning_rate = learning_rate
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.step_count = 0
        self.m: List[np.ndarray] = [np.zeros_like(p) for p in self.parameters]
        self.v: List[np.ndarray] = [np.zeros_like(p) for p in self.parameters]

    def step(self, grads: Sequence[np.ndarray]) -> None:
        self.step_count += 1
        correction1 = 1.0 - self.beta1 ** self.step_count
        correction2 = 1.0 - self.beta2 ** self.step_count
        for p, g, m, v in zip(self.parameters, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
