"""
cogmap-lab

Predictive VAE and VAE/GAN models trained on a first-person maze walk, with
analyses of the latent space as a cognitive map and of its closed-loop
dynamics.
"""

__version__ = "1.0.0"

from .config import ConfigurationManager  # noqa: E402
from .models import (  # noqa: E402
    CogMapError,
    ConfigurationError,
    ExperimentConfig,
    ExperimentReport,
    GridCell,
    StageResult,
    StageStatus,
    Variant,
)

__all__ = [
    "ConfigurationManager",
    "ExperimentConfig",
    "ExperimentReport",
    "GridCell",
    "StageResult",
    "StageStatus",
    "Variant",
    "CogMapError",
    "ConfigurationError",
]
