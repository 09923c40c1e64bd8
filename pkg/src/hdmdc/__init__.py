"""Hankel-DMD with control and its Monte Carlo ensemble, plus a synthetic
moored-vessel campaign for testing them."""

__version__ = "0.1.0"

from .ensemble import EnsemblePrediction, PriorSpec, band, fit_predict_ensemble, sample_priors
from .errors import ConfigError, DataError, HdmdcError, NumericalError
from .estimator import HdmdcModel, HyperParams, fit, predict, predict_many
from .hankel import EmbeddingDims, build_embedding
from .metrics import anrmse, eps_t, nammae
from .timeseries import Standardizer, TimeSeries, load_csv, save_csv

__all__ = [
    "ConfigError", "DataError", "EmbeddingDims", "EnsemblePrediction", "HdmdcError", "HdmdcModel",
    "HyperParams", "NumericalError", "PriorSpec", "Standardizer", "TimeSeries", "anrmse", "band",
    "build_embedding", "eps_t", "fit", "fit_predict_ensemble", "load_csv", "nammae", "predict",
    "predict_many", "sample_priors", "save_csv",
]
