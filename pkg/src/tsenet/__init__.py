"""Unsupervised feature learning from movies with a temporal-smoothing minus log-det entropy loss."""

from .network import ActivationTrace, LayerSpec, NetworkParams, backward, forward, init_params
from .numerics import covariance, cholesky, logdet_spd, pca_fit, spd_inverse
from .objective import (
    ObjectiveConfig,
    ObjectiveValue,
    entropy_value_and_adjoints,
    ts_value_and_adjoints,
    tse_step_gradient,
    tse_value,
)
from .optimizer import AdamState, adam_step

__version__ = "0.1.0"
