"""
Reproducible random streams keyed by (seed, stream_id).
"""
from dataclasses import dataclass, field, replace
from typing import Tuple, Union

import numpy as np

from concentration_risk.errors import InvalidParameterError

MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class RandomStream:
    """
    Value-like handle on an independent random substream.

    The generator is rebuilt from (seed, stream_id, lineage) on every call, so
    streams can be copied to workers freely. Philox is counter based and
    distinct spawn keys give independent sequences.
    """

    seed: int
    stream_id: int = 0
    lineage: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= int(self.seed) < MAX_SEED:
            raise InvalidParameterError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")
        if int(self.stream_id) < 0:
            raise InvalidParameterError(f"Stream id must be nonnegative, got {self.stream_id}")

    def generator(self) -> np.random.Generator:
        """
        Build a fresh generator positioned at the start of this stream.

        Returns:
            Generator: numpy generator over a Philox bit generator
        """
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),) + tuple(self.lineage))
        return np.random.Generator(np.random.Philox(sequence))

    def substream(self, index: int) -> 'RandomStream':
        """
        Derive a child stream, e.g. one per simulation block.

        Args:
            index: Child index

        Returns:
            RandomStream: Independent child stream
        """
        if index < 0:
            raise InvalidParameterError(f"Substream index must be nonnegative, got {index}")
        return replace(self, lineage=tuple(self.lineage) + (int(index),))


RandomSource = Union[RandomStream, np.random.Generator]


def as_generator(source: RandomSource) -> np.random.Generator:
    """
    Return a generator for a stream or pass a generator through.

    Args:
        source: RandomStream or numpy Generator

    Returns:
        Generator: numpy generator
    """
    if isinstance(source, RandomStream):
        return source.generator()
    if isinstance(source, np.random.Generator):
        return source
    raise InvalidParameterError(f"Expected RandomStream or Generator, got {type(source).__name__}")
