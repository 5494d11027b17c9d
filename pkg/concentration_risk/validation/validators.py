"""
Validators for portfolio and transition matrix data.
"""
import logging
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd


class Validators:
    """Collection of validators for tabular risk inputs."""

    def __init__(self):
        """Initialize the validators."""
        self.logger = logging.getLogger(__name__)

    def validate_columns(self, frame: pd.DataFrame, expected: Sequence[str]) -> Dict[str, Any]:
        """
        Validate that a table carries the expected columns.

        Args:
            frame: Table to check
            expected: Required column names

        Returns:
            Dict: Validation result with 'valid' and 'message' keys
        """
        missing = [column for column in expected if column not in frame.columns]
        result = {
            'valid': not missing,
            'missing': missing,
            'expected': list(expected)
        }

        if missing:
            result['message'] = f"Missing columns {missing}, expected {list(expected)}"
            self.logger.warning(result['message'])
        else:
            result['message'] = "All expected columns present"
            self.logger.debug(result['message'])
        return result

    def validate_range(self, values: Iterable[float], name: str, lower: Optional[float] = None,
                       upper: Optional[float] = None, lower_inclusive: bool = True,
                       upper_inclusive: bool = True) -> Dict[str, Any]:
        """
        Validate that all values lie within an interval.

        Args:
            values: Values to check
            name: Field name for messages
            lower: Lower bound (optional)
            upper: Upper bound (optional)
            lower_inclusive: Whether the lower bound is admissible
            upper_inclusive: Whether the upper bound is admissible

        Returns:
            Dict: Validation result with 'valid', 'message' and offending 'rows'
        """
        array = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
        bad = ~np.isfinite(array)
        if lower is not None:
            bad |= array < lower if lower_inclusive else array <= lower
        if upper is not None:
            bad |= array > upper if upper_inclusive else array >= upper

        rows = np.flatnonzero(bad).tolist()
        left = '[' if lower_inclusive else '('
        right = ']' if upper_inclusive else ')'
        interval = f"{left}{lower if lower is not None else '-inf'}, {upper if upper is not None else 'inf'}{right}"
        result = {
            'valid': not rows,
            'field': name,
            'rows': rows,
            'expected': interval
        }

        if rows:
            result['message'] = f"Field '{name}' outside {interval} in rows {rows[:10]}"
            self.logger.warning(result['message'])
        else:
            result['message'] = f"Field '{name}' within {interval}"
        return result

    def validate_nonnegative(self, matrix: np.ndarray, name: str = 'matrix') -> Dict[str, Any]:
        """
        Validate that a matrix holds no negative entries.

        Args:
            matrix: Matrix to check
            name: Matrix name for messages

        Returns:
            Dict: Validation result with 'valid', 'message' and offending 'cells'
        """
        cells = [tuple(int(i) for i in cell) for cell in np.argwhere(matrix < 0)]
        result = {
            'valid': not cells,
            'cells': cells
        }

        if cells:
            result['message'] = f"Negative entries in {name} at {cells[:10]}"
            self.logger.warning(result['message'])
        else:
            result['message'] = f"All entries of {name} nonnegative"
        return result

    def validate_row_sums(self, matrix: np.ndarray, tolerance: float, target: float = 1.0) -> Dict[str, Any]:
        """
        Validate that every row sums to the target within a tolerance.

        Args:
            matrix: Matrix to check
            tolerance: Admissible absolute deviation
            target: Expected row sum

        Returns:
            Dict: Validation result with 'valid', 'message', 'sums' and offending 'rows'
        """
        sums = matrix.sum(axis=1)
        # Rows printed to two decimals in percent can be off by exactly one unit.
        rows = np.flatnonzero(np.abs(sums - target) > tolerance + 1e-12).tolist()
        result = {
            'valid': not rows,
            'rows': rows,
            'sums': sums.tolist()
        }

        if rows:
            result['message'] = f"Row sums {[round(float(sums[r]), 6) for r in rows]} of rows {rows} differ from {target} by more than {tolerance}"
            self.logger.warning(result['message'])
        else:
            result['message'] = f"All row sums within {tolerance} of {target}"
        return result
