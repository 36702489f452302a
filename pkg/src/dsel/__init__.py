"""Differential CSI feedback over doubly-selective MIMO channels.

Library layout:

- :mod:`dsel.corrstats`: temporal/spectral correlation coefficients.
- :mod:`dsel.chansim`: AR1 channel field generation and statistics.
- :mod:`dsel.predictor`: the 2-D MMSE predictor and differential loop.
- :mod:`dsel.ratecalc`: minimal feedback rates and their inversion.
- :mod:`dsel.quantizer`: generalized Lloyd vector quantization.
- :mod:`dsel.linkcap`: water-filling and ergodic capacity.
- :mod:`dsel.experiments` / :mod:`dsel.cli`: experiment runs and CSV
  output, with figures in :mod:`dsel.figures`.
"""

from .corrstats import (
    CorrelationParams,
    bessel_j0,
    separable_corr,
    spectral_corr,
    temporal_corr,
)
from .chansim import ChannelField, ar1_step, empirical_corr, gen_field
from .predictor import PredictorCoeffs, differential, predict, predictor_coeffs, reconstruct
from .ratecalc import (
    RateReport,
    gaussian_entropy_bits,
    quant_error_corr,
    rate_diff_1d,
    rate_diff_2d,
    rate_nondiff,
)
from .quantizer import Codebook, additive_error, distortion, quantize, train_codebook
from .linkcap import (
    PowerAllocation,
    SvdTriple,
    capacity_ergodic,
    capacity_instant,
    effective_noise,
    svd_decompose,
    waterfill,
)
from .experiments import CsvTable, ExperimentConfig, load_config, run_experiment

__version__ = "0.1.0"

__all__ = [
    "CorrelationParams",
    "bessel_j0",
    "temporal_corr",
    "spectral_corr",
    "separable_corr",
    "ChannelField",
    "ar1_step",
    "gen_field",
    "empirical_corr",
    "PredictorCoeffs",
    "predictor_coeffs",
    "predict",
    "differential",
    "reconstruct",
    "RateReport",
    "gaussian_entropy_bits",
    "rate_nondiff",
    "rate_diff_2d",
    "rate_diff_1d",
    "quant_error_corr",
    "Codebook",
    "train_codebook",
    "quantize",
    "distortion",
    "additive_error",
    "SvdTriple",
    "PowerAllocation",
    "svd_decompose",
    "waterfill",
    "effective_noise",
    "capacity_instant",
    "capacity_ergodic",
    "ExperimentConfig",
    "CsvTable",
    "load_config",
    "run_experiment",
    "__version__",
]
