"""
Fully connected rectifier network with hand-written backpropagation.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from concentration_risk.errors import InvalidParameterError, WidthMismatchError
from concentration_risk.neural.encoding import EncodingMeta

ACTIVATION = 'relu'

logger = logging.getLogger(__name__)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def relu_backward(y: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return (y > 0.0) * grad


def linear(x: np.ndarray, weights: np.ndarray, biases: np.ndarray) -> np.ndarray:
    """Affine layer x W^T + b on a batch of rows."""
    return x @ weights.T + biases


@dataclass
class MlpModel:
    """
    Rectifier MLP: ReLU on hidden layers, identity on the output.

    ``weights[l]`` has shape (layer_sizes[l + 1], layer_sizes[l]).
    """

    layer_sizes: Tuple[int, ...]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    encoding_meta: EncodingMeta
    history: Optional[pd.DataFrame] = field(default=None, compare=False)

    def __post_init__(self):
        self.layer_sizes = tuple(int(s) for s in self.layer_sizes)
        if len(self.layer_sizes) < 2 or self.layer_sizes[-1] != 1:
            raise InvalidParameterError(f"Layer sizes must run from the input width to 1, got {self.layer_sizes}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise InvalidParameterError("One weight matrix and bias vector per layer required")
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_sizes[index + 1], self.layer_sizes[index])
            if w.shape != expected or b.shape != (expected[0],):
                raise InvalidParameterError(
                    f"Layer {index} has weights {w.shape} and biases {b.shape}, expected {expected}")
        if self.layer_sizes[0] != self.encoding_meta.width:
            raise WidthMismatchError(
                f"Input width {self.layer_sizes[0]} does not match the encoding width {self.encoding_meta.width}")

    @classmethod
    def initialize(cls, encoding_meta: EncodingMeta, hidden: Sequence[int],
                   generator: np.random.Generator) -> 'MlpModel':
        """
        He-initialized network for an encoding layout.

        Args:
            encoding_meta: Input layout
            hidden: Hidden layer widths
            generator: Random generator

        Returns:
            MlpModel: Untrained model with zero biases
        """
        if any(int(h) < 1 for h in hidden):
            raise InvalidParameterError(f"Hidden widths must be positive, got {list(hidden)}")
        sizes = (encoding_meta.width,) + tuple(int(h) for h in hidden) + (1,)
        weights = [generator.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
                   for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]
        biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
        logger.debug(f"Initialized network with layer sizes {sizes}")
        return cls(sizes, weights, biases, encoding_meta)

    @property
    def model_kind(self) -> str:
        return self.encoding_meta.model_kind

    @property
    def n_parameters(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def parameters(self) -> List[np.ndarray]:
        """Weights and biases interleaved per layer, the order gradients use."""
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def copy_parameters(self) -> List[np.ndarray]:
        return [p.copy() for p in self.parameters()]

    def load_parameters(self, parameters: Sequence[np.ndarray]) -> None:
        for target, source in zip(self.parameters(), parameters):
            target[...] = source

    def _check_width(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        batch = np.atleast_2d(features)
        if batch.ndim != 2 or batch.shape[1] != self.layer_sizes[0]:
            raise WidthMismatchError(
                f"Features of shape {features.shape}, network expects width {self.layer_sizes[0]}")
        return batch

    def forward_batch(self, features: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """
        Forward pass keeping the activations needed by backward.

        Returns:
            Tuple: (outputs of shape (B,), activations per layer input)
        """
        x = self._check_width(features)
        activations = [x]
        last = len(self.weights) - 1
        for index, (w, b) in enumerate(zip(self.weights, self.biases)):
            x = linear(x, w, b)
            if index < last:
                x = relu(x)
            activations.append(x)
        return x[:, 0], activations

    def backward(self, activations: List[np.ndarray], grad_output: np.ndarray) -> List[np.ndarray]:
        """
        Gradients of a loss with respect to all parameters.

        Args:
            activations: Second value of forward_batch
            grad_output: dLoss/dOutput, shape (B,)

        Returns:
            List: Gradients in ``parameters()`` order
        """
        grad = np.asarray(grad_output, dtype=float).reshape(-1, 1)
        grads: List[np.ndarray] = []
        for index in range(len(self.weights) - 1, -1, -1):
            if index < len(self.weights) - 1:
                grad = relu_backward(activations[index + 1], grad)
            grads.append(grad.sum(axis=0))
            grads.append(grad.T @ activations[index])
            grad = grad @ self.weights[index]
        grads.reverse()
        return grads

    def loss_and_gradients(self, features: np.ndarray, targets: np.ndarray) -> Tuple[float, List[np.ndarray]]:
        """Mean squared error of a batch and its parameter gradients."""
        outputs, activations = self.forward_batch(features)
        residual = outputs - np.asarray(targets, dtype=float)
        loss = float(np.mean(residual ** 2))
        return loss, self.backward(activations, 2.0 * residual / residual.size)


def forward(model: MlpModel, features: np.ndarray):
    """
    Network output for one feature vector or a batch of rows.

    Args:
        model: Network
        features: Vector of the input width or matrix of such rows

    Returns:
        float for a vector, np.ndarray for a batch

    Raises:
        WidthMismatchError: If the width differs from the input layer
    """
    outputs, _ = model.forward_batch(features)
    if np.ndim(features) == 1:
        return float(outputs[0])
    return outputs
