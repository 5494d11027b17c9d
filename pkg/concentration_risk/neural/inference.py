"""
Neural GA prediction for a single portfolio.
"""
import logging

from concentration_risk.engines.context import EngineContext
from concentration_risk.engines.results import GaResult
from concentration_risk.errors import KindMismatchError
from concentration_risk.neural.encoding import encode
from concentration_risk.neural.mlp import MlpModel, forward
from concentration_risk.portfolio.models import Portfolio

logger = logging.getLogger(__name__)


def _predict(model: MlpModel, portfolio: Portfolio, ga1st: float) -> float:
    features = encode(portfolio, ga1st, model.encoding_meta)
    return forward(model, features) / model.encoding_meta.target_scale


def predict_ga(model: MlpModel, portfolio: Portfolio, engines: EngineContext) -> float:
    """
    Neural GA of a portfolio.

    The first-order analytic GA is computed with ``engines`` and fed to the
    network as its last feature.

    Args:
        model: Trained network
        portfolio: Portfolio of the model's kind
        engines: Parameters for the analytic feature

    Returns:
        float: GA prediction as a fraction of total exposure

    Raises:
        KindMismatchError: If the portfolio kind differs from the model kind
    """
    if portfolio.model_kind != model.model_kind:
        raise KindMismatchError(f"A {model.model_kind} model cannot price a {portfolio.model_kind} portfolio")
    return _predict(model, portfolio, engines.ga_analytic(portfolio))


def ga_neural(model: MlpModel, portfolio: Portfolio, engines: EngineContext) -> GaResult:
    """Analytic and neural GA of a portfolio in one result."""
    if portfolio.model_kind != model.model_kind:
        raise KindMismatchError(f"A {model.model_kind} model cannot price a {portfolio.model_kind} portfolio")
    ga1st = engines.ga_analytic(portfolio)
    prediction = _predict(model, portfolio, ga1st)
    logger.debug(f"Neural GA {prediction:.6g}, first-order GA {ga1st:.6g}")
    return GaResult(portfolio.model_kind, analytic=ga1st, neural=prediction,
                    diagnostics={'portfolio_sha256': portfolio.digest()})
