"""
Configuration data models for cognitive-map experiments.
"""

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import List

from .exceptions import ConfigurationError

SUPPORTED_SIZES = (16, 32, 64)
LAP_FRAMES = 240


class Variant(Enum):
    """Model variants; the value doubles as the checkpoint/CSV label."""
    VAE = "VAE"
    VAEGAN_PIXEL = "VAEGAN_pixel"
    VAEGAN_LAYER = "VAEGAN_layer"

    @property
    def code(self) -> int:
        return list(Variant).index(self)

    @property
    def has_critic(self) -> bool:
        return self is not Variant.VAE

    @classmethod
    def from_code(cls, code: int) -> "Variant":
        members = list(cls)
        if not 0 <= code < len(members):
            raise ConfigurationError(f"Unknown variant code {code}", error_code="BAD_VARIANT",
                                     context={"code": code})
        return members[code]

    @classmethod
    def parse(cls, name: str) -> "Variant":
        """Case-insensitive lookup accepting ``vae``, ``vaegan_pixel``, ``vaegan-layer`` and so on."""
        key = str(name).strip().lower().replace("-", "_")
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ConfigurationError(
            f"Unknown variant '{name}'. Supported: {', '.join(v.value for v in cls)}",
            error_code="BAD_VARIANT",
            context={"variant": name},
        )


@dataclass(frozen=True)
class GridCell:
    """One training condition of the experiment grid."""

    variant: Variant
    tau: int
    zdim: int
    seed: int
    alpha: float = 1.0

    @property
    def slug(self) -> str:
        """Directory name ``<variant>_tau<τ>_z<d_z>_seed<k>``."""
        return f"{self.variant.value}_tau{self.tau}_z{self.zdim}_seed{self.seed}"


@dataclass
class ExperimentConfig:
    """Configuration settings for dataset generation, training and analyses."""

    # Dataset
    dataset: str = "./data/maze.cgds"
    frames: int = 480
    size: int = 64
    dataset_seed: int = 1
    junction_probability: float = 0.5

    # Model grid
    variants: List[str] = field(default_factory=lambda: ["VAE", "VAEGAN_pixel"])
    taus: List[int] = field(default_factory=lambda: [0, 5, 30])
    zdims: List[int] = field(default_factory=lambda: [10])
    seeds: List[int] = field(default_factory=lambda: [1, 2, 3])
    alpha: float = 1.0
    penalty_weight: float = 10.0

    # Training schedule
    iters: int = 10000
    batch_size: int = 64
    critic_steps: int = 5
    learning_rate: float = 2e-4
    beta1: float = 0.0
    beta2: float = 0.9
    checkpoint_interval: int = 500
    log_interval: int = 100
    base_channels: int = 64
    gp_point: str = "generated"

    # Analyses
    analysis_window: float = 0.2
    pca_grid: int = 10
    variability_samples: int = 10
    bifurcation_window: int = 5
    run_pca_grid: bool = True
    run_variability: bool = True
    run_bifurcation: bool = True

    # Closed loop
    dream_iterations: int = 200
    start_stride: int = 5
    dump_start: int = 180
    dump_end: int = 200
    fixed_point_threshold: float = 1e-5
    cycle_threshold: float = 1e-8
    lyapunov_margin: float = 1e-3
    merge_undetermined: bool = False

    # Alpha sweep
    sweep_alphas: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
    sweep_tau: int = 5
    sweep_variant: str = "VAEGAN_pixel"

    # Output
    out: str = "./results"
    experiment: str = "cogmap"
    jobs: int = 1

    # Logging Configuration
    logging_level: str = "INFO"
    logging_file_path: str = "./logs/cogmap.log"

    def grid_cells(self) -> List[GridCell]:
        """Every (variant, τ, d_z, seed) condition, in a stable order."""
        cells = []
        for variant, tau, zdim, seed in itertools.product(
                self.variants, self.taus, self.zdims, self.seeds):
            parsed = Variant.parse(variant)
            alpha = 1.0 if parsed is Variant.VAEGAN_LAYER else self.alpha
            cells.append(GridCell(parsed, int(tau), int(zdim), int(seed), float(alpha)))
        return cells

    def sweep_cells(self) -> List[GridCell]:
        """One cell per (α, seed) for the GAN-weight sweep."""
        variant = Variant.parse(self.sweep_variant)
        return [
            GridCell(variant, int(self.sweep_tau), int(self.zdims[0]) if self.zdims else 10,
                     int(seed), float(alpha))
            for alpha in self.sweep_alphas for seed in self.seeds
        ]

    def validate(self) -> List[str]:
        """
        Validate configuration settings and return list of validation errors.

        Returns:
            List[str]: List of validation error messages. Empty if valid.
        """
        errors = []
        errors.extend(self._validate_dataset_settings())
        errors.extend(self._validate_grid_settings())
        errors.extend(self._validate_training_settings())
        errors.extend(self._validate_analysis_settings())
        errors.extend(self._validate_dream_settings())
        errors.extend(self._validate_output_settings())
        errors.extend(self._validate_logging_settings())
        return errors

    def _validate_dataset_settings(self) -> List[str]:
        errors = []
        if not self.dataset:
            errors.append("Dataset path is required")
        if self.size not in SUPPORTED_SIZES:
            errors.append(f"Frame size must be one of: {', '.join(map(str, SUPPORTED_SIZES))}")
        if self.frames < LAP_FRAMES:
            errors.append(f"Frame count must cover at least one lap ({LAP_FRAMES} frames)")
        if not 0.0 <= self.junction_probability <= 1.0:
            errors.append("Junction probability must be between 0 and 1")
        return errors

    def _validate_grid_settings(self) -> List[str]:
        errors = []
        if not (self.variants and self.taus and self.zdims and self.seeds):
            errors.append("Model grid must not be empty (variants, taus, zdims and seeds)")
        for name in list(self.variants) + [self.sweep_variant]:
            try:
                Variant.parse(name)
            except ConfigurationError as e:
                errors.append(e.message)
        if any(int(tau) < 0 for tau in self.taus) or self.sweep_tau < 0:
            errors.append("Prediction offsets (tau) must be non-negative")
        if any(int(tau) >= self.frames for tau in self.taus):
            errors.append("Prediction offsets (tau) must be smaller than the frame count")
        if any(int(z) < 1 for z in self.zdims):
            errors.append("Latent dimensions (zdims) must be positive")
        if self.alpha < 0 or any(a < 0 for a in self.sweep_alphas):
            errors.append("GAN weight alpha must be non-negative")
        if self.penalty_weight < 0:
            errors.append("Penalty weight must be non-negative")
        return errors

    def _validate_training_settings(self) -> List[str]:
        errors = []
        for name in ("iters", "batch_size", "critic_steps", "checkpoint_interval",
                     "log_interval", "base_channels"):
            if int(getattr(self, name)) < 1:
                errors.append(f"{name} must be positive")
        if self.learning_rate <= 0:
            errors.append("learning_rate must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            errors.append("Adam betas must lie in [0, 1)")
        if self.gp_point not in ("generated", "interpolate"):
            errors.append("gp_point must be 'generated' or 'interpolate'")
        return errors

    def _validate_analysis_settings(self) -> List[str]:
        errors = []
        if not 0.0 < self.analysis_window <= 1.0:
            errors.append("analysis_window must be a fraction in (0, 1]")
        if self.pca_grid < 1:
            errors.append("pca_grid must be positive")
        if self.variability_samples < 2:
            errors.append("variability_samples must be at least 2")
        if self.bifurcation_window < 0:
            errors.append("bifurcation_window must be non-negative")
        return errors

    def _validate_dream_settings(self) -> List[str]:
        errors = []
        if self.dream_iterations < 200:
            errors.append("dream_iterations must be at least 200 (classification tail window)")
        if self.start_stride < 1:
            errors.append("start_stride must be positive")
        if not 0 <= self.dump_start <= self.dump_end <= self.dream_iterations:
            errors.append("Rollout dump range must satisfy 0 <= dump_start <= dump_end <= dream_iterations")
        if self.fixed_point_threshold <= 0 or self.cycle_threshold <= 0:
            errors.append("Classifier thresholds must be positive")
        if self.lyapunov_margin < 0:
            errors.append("lyapunov_margin must be non-negative")
        return errors

    def _validate_output_settings(self) -> List[str]:
        errors = []
        if not self.out:
            errors.append("Output directory is required")
        if not self.experiment:
            errors.append("Experiment name is required")
        if self.jobs < 1:
            errors.append("jobs must be positive")
        return errors

    def _validate_logging_settings(self) -> List[str]:
        errors = []
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if self.logging_level not in valid_levels:
            errors.append(f"Logging level must be one of: {', '.join(valid_levels)}")
        if not self.logging_file_path:
            errors.append("Logging file path is required")
        return errors
