"""
Neural network surrogate of the granularity adjustment.
"""
from concentration_risk.neural.encoding import (EncodingMeta, decode_actuarial, decode_mtm, encode,
                                                encode_actuarial, encode_mtm)
from concentration_risk.neural.inference import ga_neural, predict_ga
from concentration_risk.neural.mlp import MlpModel, forward
from concentration_risk.neural.optim import Adam
from concentration_risk.neural.persistence import load_model, save_model
from concentration_risk.neural.training import TrainConfig, fit, generate_labels, train

__all__ = [
    'Adam', 'EncodingMeta', 'MlpModel', 'TrainConfig', 'decode_actuarial', 'decode_mtm', 'encode',
    'encode_actuarial', 'encode_mtm', 'fit', 'forward', 'ga_neural', 'generate_labels', 'load_model',
    'predict_ga', 'save_model', 'train',
]
