"""Link-level massive MIMO-OFDM simulator with online complex-valued
neural-network receivers performing joint channel estimation and
space-time decoding."""

__version__ = "0.1.0"

from .channel import TdlProfile, builtin_profile, discretize_profile, init_channel, load_profile
from .config import ConfigError, ExperimentConfig, parse_config, parse_config_string
from .cvnn import (ARCHITECTURES, Hyperparameters, NetworkConfig, NetworkState,
                   complexity, default_hyperparameters, forward, gradient_check,
                   init_network, train_step)
from .harness import RunResult, ber_curve, convergence_frame, run_experiment, smooth_mse
from .modem import noise_variance, qam_demap, qam_map
from .numerics import Rng, fft, sample_cgauss
from .ofdm import build_frame, ofdm_demodulate, ofdm_modulate
from .stc import qostbc_encode, quasi_orthogonality_defect

__all__ = [
    "__version__",
    "ARCHITECTURES", "ConfigError", "ExperimentConfig", "Hyperparameters",
    "NetworkConfig", "NetworkState", "Rng", "RunResult", "TdlProfile",
    "ber_curve", "builtin_profile", "complexity", "convergence_frame",
    "default_hyperparameters", "discretize_profile", "fft", "forward",
    "gradient_check", "init_channel", "init_network", "load_profile",
    "noise_variance", "ofdm_demodulate", "ofdm_modulate", "build_frame",
    "parse_config", "parse_config_string", "qam_demap", "qam_map",
    "qostbc_encode", "quasi_orthogonality_defect", "run_experiment",
    "sample_cgauss", "smooth_mse", "train_step",
]
