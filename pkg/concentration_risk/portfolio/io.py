"""
Portfolio CSV reading and writing.
"""
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from concentration_risk.errors import EmptyPortfolioError, InvalidParameterError, SchemaViolationError
from concentration_risk.portfolio.models import (ACTUARIAL, ACTUARIAL_COLUMNS, DEFAULT_MAX_OBLIGORS, MODEL_KINDS,
                                                 MTM, MTM_COLUMNS, ActuarialObligor, MtmObligor, Portfolio)
from concentration_risk.portfolio.transitions import TransitionMatrix, load_default_transition_matrix
from concentration_risk.validation.validators import Validators

DEFAULT_LGD_NU = 0.25
LGD_NU_PREAMBLE = '# lgd_nu='

logger = logging.getLogger(__name__)

# field -> (lower, upper, lower_inclusive, upper_inclusive)
_RANGES = {
    'exposure': (0.0, None, False, True),
    'pd': (0.0, 1.0, True, True),
    'elgd': (0.0, 1.0, True, True),
    'omega': (0.0, 1.0, True, True),
    'rho': (0.0, 1.0, False, False),
    'coupon': (0.0, None, True, True),
    'maturity': (0.0, None, False, True),
}


def _read_frame(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype={'obligor_id': str, 'rating': str}, encoding='utf-8',
                           skipinitialspace=True, comment='#')
    except FileNotFoundError:
        logger.error(f"Portfolio file not found: {path}")
        raise SchemaViolationError(f"Portfolio file not found: {path}")
    except pd.errors.EmptyDataError:
        raise EmptyPortfolioError(f"Portfolio file {path} is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        logger.error(f"Cannot parse portfolio {path}: {str(e)}")
        raise SchemaViolationError(f"Cannot parse portfolio {path}: {str(e)}")


def _read_lgd_nu(path: str) -> Optional[float]:
    with open(path, encoding='utf-8') as f:
        for line in f:
            if not line.startswith('#'):
                return None
            if line.startswith(LGD_NU_PREAMBLE):
                text = line[len(LGD_NU_PREAMBLE):].strip()
                try:
                    return float(text)
                except ValueError:
                    raise SchemaViolationError(f"{path}: invalid lgd_nu '{text}'")
    return None


def _validate_frame(frame: pd.DataFrame, columns, path: str) -> pd.DataFrame:
    validators = Validators()
    check = validators.validate_columns(frame, columns)
    if not check['valid']:
        raise SchemaViolationError(f"{path}: {check['message']}", details={'missing': check['missing']})
    if frame.empty:
        raise EmptyPortfolioError(f"Portfolio file {path} holds no obligors")
    if frame['obligor_id'].isna().any():
        raise SchemaViolationError(f"{path}: empty obligor_id")

    numeric = [c for c in columns if c in _RANGES]
    for column in numeric:
        values = pd.to_numeric(frame[column], errors='coerce')
        lower, upper, lower_inclusive, upper_inclusive = _RANGES[column]
        check = validators.validate_range(values.to_numpy(dtype=float), column, lower, upper,
                                          lower_inclusive, upper_inclusive)
        if not check['valid']:
            raise SchemaViolationError(f"{path}: {check['message']}",
                                       details={'field': column, 'rows': check['rows']})
        frame[column] = values.astype(float)
    return frame


def _resolve_rating(value: str, matrix: TransitionMatrix, obligor_id: str) -> int:
    text = str(value).strip()
    if text in matrix.labels:
        index = matrix.index_of(text)
    else:
        try:
            index = int(text)
        except ValueError:
            raise SchemaViolationError(f"Obligor {obligor_id}: unknown rating '{text}'")
    if not 1 <= index <= matrix.n_states:
        raise SchemaViolationError(f"Obligor {obligor_id}: rating '{text}' is not a non-default grade")
    return index


def round_to_grid(maturity: float, accrual: float) -> float:
    """Nearest positive multiple of the accrual period."""
    return max(round(maturity / accrual), 1) * accrual


def load_portfolio(path: str, model_kind: str, matrix: Optional[TransitionMatrix] = None,
                   lgd_nu: float = DEFAULT_LGD_NU, max_obligors: int = DEFAULT_MAX_OBLIGORS,
                   accrual: Optional[float] = None) -> Portfolio:
    """
    Load and validate a portfolio CSV.

    Args:
        path: CSV file in the actuarial or mtm layout
        model_kind: 'actuarial' or 'mtm'
        matrix: Transition matrix resolving rating labels (mtm only, defaults to the shipped matrix)
        lgd_nu: LGD volatility multiplier, used when the file carries no lgd_nu line
        max_obligors: Maximum number of obligors
        accrual: Coupon period; mtm maturities are rounded to its grid when given

    Returns:
        Portfolio: Validated portfolio

    Raises:
        SchemaViolationError: On missing columns or out-of-range values
        EmptyPortfolioError: If the file has no rows
    """
    if model_kind not in MODEL_KINDS:
        raise InvalidParameterError(f"Unknown model kind '{model_kind}', expected one of {MODEL_KINDS}")
    columns = ACTUARIAL_COLUMNS if model_kind == ACTUARIAL else MTM_COLUMNS
    frame = _validate_frame(_read_frame(path), columns, path)
    stored_nu = _read_lgd_nu(path)
    if stored_nu is not None:
        lgd_nu = stored_nu
    metadata: Dict[str, Any] = {'source': os.path.abspath(path)}

    try:
        if model_kind == ACTUARIAL:
            obligors = [
                ActuarialObligor(str(row.obligor_id), float(row.exposure), float(row.pd),
                                 float(row.elgd), float(row.omega))
                for row in frame.itertuples(index=False)
            ]
            grade_labels = None
        else:
            matrix = matrix or load_default_transition_matrix()
            adjusted: List[str] = []
            obligors = []
            for row in frame.itertuples(index=False):
                maturity = float(row.maturity)
                if accrual is not None:
                    rounded = round_to_grid(maturity, accrual)
                    if not np.isclose(rounded, maturity, rtol=0.0, atol=1e-12):
                        adjusted.append(str(row.obligor_id))
                    maturity = rounded
                obligors.append(MtmObligor(str(row.obligor_id), float(row.exposure),
                                           _resolve_rating(row.rating, matrix, row.obligor_id),
                                           float(row.elgd), float(row.rho), float(row.coupon), maturity))
            if adjusted:
                metadata['maturity_adjustments'] = adjusted
                logger.warning(f"Rounded maturities of {len(adjusted)} obligors to the {accrual}-year grid")
            grade_labels = matrix.labels
        portfolio = Portfolio(tuple(obligors), lgd_nu, model_kind, metadata=metadata,
                              grade_labels=grade_labels, max_obligors=max_obligors)
    except InvalidParameterError as e:
        if isinstance(e, SchemaViolationError):
            raise
        raise SchemaViolationError(f"{path}: {e.message}")

    logger.info(f"Loaded {model_kind} portfolio with {portfolio.n_obligors} obligors from {path}")
    return portfolio


def save_portfolio(portfolio: Portfolio, path: str) -> None:
    """
    Write a portfolio in the CSV layout load_portfolio reads.

    The LGD volatility multiplier goes into a leading comment line.

    Args:
        portfolio: Portfolio to write
        path: Target file
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(f"{LGD_NU_PREAMBLE}{portfolio.lgd_nu!r}\n")
        portfolio.to_frame().to_csv(f, index=False)
    logger.info(f"Saved {portfolio.model_kind} portfolio with {portfolio.n_obligors} obligors to {path}")
