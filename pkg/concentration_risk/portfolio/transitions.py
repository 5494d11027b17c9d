"""
Rating transition matrices with an absorbing default state at index 0.
"""
import logging
import math
import os
from typing import List, Sequence

import numpy as np
import pandas as pd

from concentration_risk.errors import (InvalidParameterError, NegativeEntryError, RowSumViolationError,
                                       SchemaViolationError)
from concentration_risk.validation.validators import Validators

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data')
DEFAULT_MATRIX_PATH = os.path.join(DATA_DIR, 'sovereign_transition_matrix.csv')

ROW_SUM_TOLERANCE = 1e-9
RENORMALIZE_TOLERANCE = 1e-4

logger = logging.getLogger(__name__)


class TransitionMatrix:
    """
    One-period rating migration matrix.

    States are ordered by credit quality: index 0 is default, 1 the worst
    non-default grade and S the best.
    """

    def __init__(self, labels: Sequence[str], probs: np.ndarray):
        """
        Initialize the transition matrix.

        Args:
            labels: S+1 grade labels, default first
            probs: (S+1)x(S+1) row-stochastic probabilities (fractions)

        Raises:
            InvalidParameterError: If shapes or labels are inconsistent
            NegativeEntryError: If a probability is negative
            RowSumViolationError: If a row does not sum to one or default is not absorbing
        """
        probs = np.array(probs, dtype=float)
        labels = tuple(str(label) for label in labels)
        if probs.ndim != 2 or probs.shape[0] != probs.shape[1] or probs.shape[0] != len(labels):
            raise InvalidParameterError(f"Transition matrix shape {probs.shape} does not match {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise InvalidParameterError(f"Duplicate grade labels in {labels}")
        if probs.shape[0] < 2:
            raise InvalidParameterError("Transition matrix needs a default and at least one non-default state")

        validators = Validators()
        check = validators.validate_nonnegative(probs, 'transition matrix')
        if not check['valid']:
            raise NegativeEntryError(check['message'], details={'cells': check['cells']})
        check = validators.validate_row_sums(probs, ROW_SUM_TOLERANCE)
        if not check['valid']:
            raise RowSumViolationError(check['message'], details={'rows': check['rows']})
        if probs[0, 0] != 1.0 and abs(probs[0, 0] - 1.0) > ROW_SUM_TOLERANCE:
            raise RowSumViolationError(f"Default state '{labels[0]}' is not absorbing (p00={probs[0, 0]})")

        probs.setflags(write=False)
        self.labels = labels
        self.probs = probs
        self._powers: List[np.ndarray] = [np.eye(len(labels))]

    @property
    def n_states(self) -> int:
        """Number S of non-default grades."""
        return len(self.labels) - 1

    @property
    def default_label(self) -> str:
        return self.labels[0]

    def index_of(self, label: str) -> int:
        """
        Grade index of a label.

        Raises:
            InvalidParameterError: If the label is unknown
        """
        try:
            return self.labels.index(str(label).strip())
        except ValueError:
            raise InvalidParameterError(f"Unknown rating label '{label}', expected one of {self.labels}")

    @property
    def default_probabilities(self) -> np.ndarray:
        """One-period default probability of every state."""
        return np.array(self.probs[:, 0])

    def power(self, periods: int) -> np.ndarray:
        """
        Multi-period transition matrix P^k.

        Args:
            periods: Number of periods k >= 0

        Returns:
            np.ndarray: Matrix power
        """
        if periods < 0:
            raise InvalidParameterError(f"Number of periods must be nonnegative, got {periods}")
        while len(self._powers) <= periods:
            self._powers.append(self._powers[-1] @ self.probs)
        return self._powers[periods]

    def cumulative_default(self, tenors: Sequence[float]) -> np.ndarray:
        """
        Physical cumulative default probabilities p_g(0, t).

        Integer tenors come from matrix powers, fractional tenors are
        interpolated linearly between the neighbouring years, which keeps
        the curve nondecreasing.

        Args:
            tenors: Year fractions t >= 0

        Returns:
            np.ndarray: Shape (S+1, len(tenors))
        """
        tenors = np.asarray(tenors, dtype=float)
        if np.any(tenors < 0.0):
            raise InvalidParameterError("Tenors must be nonnegative")
        horizon = int(math.ceil(float(tenors.max()))) if tenors.size else 0
        yearly = np.stack([self.power(k)[:, 0] for k in range(horizon + 1)], axis=1)
        years = np.arange(horizon + 1, dtype=float)
        curves = np.stack([np.interp(tenors, years, yearly[g]) for g in range(len(self.labels))])
        return np.clip(curves, 0.0, 1.0)

    def default_only(self) -> 'TransitionMatrix':
        """
        Two-outcome view: every grade either defaults or keeps its rating.

        Returns:
            TransitionMatrix: Matrix with migrations folded onto the diagonal
        """
        probs = np.zeros_like(self.probs)
        probs[:, 0] = self.probs[:, 0]
        for g in range(1, len(self.labels)):
            probs[g, g] = 1.0 - self.probs[g, 0]
        probs[0, 0] = 1.0
        return TransitionMatrix(self.labels, probs)

    def nearest_grade(self, pd_value: float) -> int:
        """
        Non-default grade whose one-period default probability is closest.

        Ties resolve to the worst such grade.

        Args:
            pd_value: Default probability

        Returns:
            int: Grade index in 1..S
        """
        distances = np.abs(self.probs[1:, 0] - pd_value)
        return int(np.flatnonzero(distances == distances.min())[0]) + 1

    def to_frame(self) -> pd.DataFrame:
        """
        Percent table in file layout (best grade first, default last).

        Returns:
            DataFrame: Transition matrix in percent
        """
        order = list(range(1, len(self.labels)))[::-1] + [0]
        labels = [self.labels[i] for i in order]
        frame = pd.DataFrame(self.probs[np.ix_(order, order)] * 100.0, index=labels, columns=labels)
        frame.index.name = 'grade'
        return frame

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.probs, other.probs)

    __hash__ = None

    def __repr__(self) -> str:
        return f"TransitionMatrix(labels={self.labels})"


def load_transition_matrix(path: str, default_label: str = 'D',
                           tolerance: float = RENORMALIZE_TOLERANCE) -> TransitionMatrix:
    """
    Load a transition matrix stored in percent.

    The first row and column hold grade labels; rows are listed from the best
    grade downwards and columns are matched to rows by label. Rows within
    ``tolerance`` of 100 % are renormalized.

    Args:
        path: CSV file
        default_label: Label of the default state
        tolerance: Admissible row-sum defect as a fraction

    Returns:
        TransitionMatrix: Loaded matrix

    Raises:
        SchemaViolationError: If labels are inconsistent or values are not numeric
        NegativeEntryError: If an entry is negative
        RowSumViolationError: If a row sum is off by more than the tolerance
    """
    try:
        frame = pd.read_csv(path, index_col=0, encoding='utf-8')
    except FileNotFoundError:
        logger.error(f"Transition matrix file not found: {path}")
        raise SchemaViolationError(f"Transition matrix file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        logger.error(f"Cannot parse transition matrix {path}: {str(e)}")
        raise SchemaViolationError(f"Cannot parse transition matrix {path}: {str(e)}")

    frame.index = [str(label).strip() for label in frame.index]
    frame.columns = [str(label).strip() for label in frame.columns]
    rows, columns = list(frame.index), list(frame.columns)
    if sorted(rows) != sorted(columns) or len(set(rows)) != len(rows):
        raise SchemaViolationError(f"Row labels {rows} and column labels {columns} of {path} differ")
    if default_label not in rows:
        raise SchemaViolationError(f"Default label '{default_label}' missing from {path}")
    try:
        frame = frame.astype(float)
    except ValueError as e:
        raise SchemaViolationError(f"Non-numeric entry in {path}: {str(e)}")

    order = [default_label] + [label for label in rows if label != default_label][::-1]
    percent = frame.loc[order, order].to_numpy()

    validators = Validators()
    check = validators.validate_nonnegative(percent, path)
    if not check['valid']:
        raise NegativeEntryError(check['message'], details={'cells': check['cells']})

    probs = percent / 100.0
    check = validators.validate_row_sums(probs, tolerance)
    if not check['valid']:
        raise RowSumViolationError(check['message'], details={'rows': [order[r] for r in check['rows']]})
    sums = probs.sum(axis=1)
    adjusted = [order[r] for r in np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE)]
    if adjusted:
        logger.warning(f"Renormalized rows {adjusted} of {path}")
    probs = probs / sums[:, None]

    matrix = TransitionMatrix(order, probs)
    logger.info(f"Loaded {matrix.n_states}-grade transition matrix from {path}")
    return matrix


def load_default_transition_matrix() -> TransitionMatrix:
    """Shipped one-year sovereign foreign currency transition matrix."""
    return load_transition_matrix(DEFAULT_MATRIX_PATH)
