"""
Configuration management for cognitive-map experiments.
"""

import dataclasses
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from ..models.config import ExperimentConfig
from ..models.exceptions import ConfigurationError

logger = logging.getLogger(__name__)

OUT_ENV = "COGMAP_OUT"

# section -> {file key: ExperimentConfig field}
SECTIONS: Dict[str, Dict[str, str]] = {
    'dataset': {
        'path': 'dataset', 'frames': 'frames', 'size': 'size', 'seed': 'dataset_seed',
        'junction_probability': 'junction_probability',
    },
    'grid': {
        'variants': 'variants', 'taus': 'taus', 'zdims': 'zdims', 'seeds': 'seeds',
        'alpha': 'alpha', 'penalty_weight': 'penalty_weight',
    },
    'train': {
        'iters': 'iters', 'batch_size': 'batch_size', 'critic_steps': 'critic_steps',
        'learning_rate': 'learning_rate', 'beta1': 'beta1', 'beta2': 'beta2',
        'checkpoint_interval': 'checkpoint_interval', 'log_interval': 'log_interval',
        'base_channels': 'base_channels', 'gp_point': 'gp_point',
    },
    'analysis': {
        'window': 'analysis_window', 'pca_grid': 'pca_grid',
        'variability_samples': 'variability_samples', 'bifurcation_window': 'bifurcation_window',
        'run_pca_grid': 'run_pca_grid', 'run_variability': 'run_variability',
        'run_bifurcation': 'run_bifurcation',
    },
    'dream': {
        'iterations': 'dream_iterations', 'start_stride': 'start_stride',
        'dump_start': 'dump_start', 'dump_end': 'dump_end',
        'fixed_point_threshold': 'fixed_point_threshold', 'cycle_threshold': 'cycle_threshold',
        'lyapunov_margin': 'lyapunov_margin', 'merge_undetermined': 'merge_undetermined',
    },
    'sweep': {'alphas': 'sweep_alphas', 'tau': 'sweep_tau', 'variant': 'sweep_variant'},
    'output': {'out': 'out', 'experiment': 'experiment', 'jobs': 'jobs'},
    'logging': {'level': 'logging_level', 'file_path': 'logging_file_path'},
}

FIELD_NAMES = {f.name for f in dataclasses.fields(ExperimentConfig)}


class ConfigurationManager:
    """Loads, overrides and validates experiment configuration."""

    def __init__(self) -> None:
        self._config: Optional[ExperimentConfig] = None

    def load_config(self, config_path: str) -> ExperimentConfig:
        """
        Load configuration from YAML or JSON file.

        Args:
            config_path: Path to configuration file

        Returns:
            ExperimentConfig: Loaded and validated configuration

        Raises:
            ConfigurationError: If configuration is invalid or cannot be loaded
        """
        config_file = Path(config_path)
        if not config_file.exists():
            raise ConfigurationError(f"Configuration file not found: {config_path}",
                                     error_code="NOT_FOUND", context={"path": str(config_path)})
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                if config_file.suffix.lower() in ['.yaml', '.yml']:
                    config_data = yaml.safe_load(f) or {}
                elif config_file.suffix.lower() == '.json':
                    config_data = json.load(f)
                else:
                    raise ConfigurationError(
                        f"Unsupported configuration file format: {config_file.suffix}. "
                        "Supported formats: .yaml, .yml, .json",
                        error_code="BAD_FORMAT",
                    )
        except yaml.YAMLError as e:
            raise ConfigurationError(f"YAML parsing error: {str(e)}", error_code="PARSE_ERROR")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"JSON parsing error: {str(e)}", error_code="PARSE_ERROR")

        if not isinstance(config_data, dict):
            raise ConfigurationError("Configuration root must be a mapping",
                                     error_code="BAD_STRUCTURE", context={"path": str(config_path)})
        try:
            config = ExperimentConfig(**self._flatten_config(config_data))
        except TypeError as e:
            raise ConfigurationError(f"Configuration structure error: {str(e)}",
                                     error_code="BAD_STRUCTURE")
        self._config = self.validate_config(self.apply_environment(config))
        logger.debug("Loaded configuration", extra={'context': {'path': str(config_file)}})
        return self._config

    def _flatten_config(self, config_data: Dict[str, Any]) -> Dict[str, Any]:
        """
        Flatten nested configuration sections to ExperimentConfig fields.

        Raises:
            ConfigurationError: For unknown sections or keys
        """
        flat_config: Dict[str, Any] = {}
        unknown = []
        for section, values in config_data.items():
            keys = SECTIONS.get(section)
            if keys is None:
                unknown.append(section)
                continue
            for key, value in (values or {}).items():
                if key not in keys:
                    unknown.append(f"{section}.{key}")
                elif value is not None:
                    flat_config[keys[key]] = value
        if unknown:
            raise ConfigurationError(
                f"Unknown configuration keys: {', '.join(unknown)}",
                error_code="UNKNOWN_KEYS", context={"keys": unknown})
        return flat_config

    def validate_config(self, config: ExperimentConfig) -> ExperimentConfig:
        """
        Raises:
            ConfigurationError: Listing every validation problem
        """
        validation_errors = config.validate()
        if validation_errors:
            raise ConfigurationError(
                "Configuration validation failed:\n"
                + "\n".join(f"- {error}" for error in validation_errors),
                error_code="INVALID", context={"errors": validation_errors},
            )
        return config

    @staticmethod
    def apply_environment(config: ExperimentConfig) -> ExperimentConfig:
        """``COGMAP_OUT`` replaces the output root of a file or default configuration."""
        out = os.environ.get(OUT_ENV)
        if out:
            return dataclasses.replace(config, out=out)
        return config

    def apply_overrides(self, config: ExperimentConfig,
                        overrides: Mapping[str, Any]) -> ExperimentConfig:
        """
        Command-line values replace configuration values; None means "not given".

        Raises:
            ConfigurationError: For names that are not configuration fields, or
                when the result fails validation
        """
        given = {k: v for k, v in overrides.items() if v is not None}
        unknown = sorted(set(given) - FIELD_NAMES)
        if unknown:
            raise ConfigurationError(f"Unknown configuration fields: {', '.join(unknown)}",
                                     error_code="UNKNOWN_KEYS", context={"keys": unknown})
        self._config = self.validate_config(dataclasses.replace(config, **given))
        return self._config

    def resolve(self, config_path: Optional[str] = None,
                overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
        """File (or defaults), then ``COGMAP_OUT``, then command-line overrides."""
        if config_path:
            config = self.load_config(config_path)
        else:
            config = self.apply_environment(ExperimentConfig())
        return self.apply_overrides(config, overrides or {})

    def create_sample_config(self, output_path: str) -> None:
        """
        Create a sample configuration file holding every default.

        Args:
            output_path: Path where to create the sample configuration
        """
        defaults = ExperimentConfig()
        sample_config = {
            section: {key: getattr(defaults, field) for key, field in keys.items()}
            for section, keys in SECTIONS.items()
        }
        output_file = Path(output_path)
        output_file.parent.mkdir(parents=True, exist_ok=True)
        with open(output_file, 'w', encoding='utf-8') as f:
            f.write("# cogmap experiment configuration; command-line flags override these values\n")
            yaml.safe_dump(sample_config, f, default_flow_style=False, indent=2, sort_keys=False)

    @property
    def config(self) -> Optional[ExperimentConfig]:
        """Get the currently loaded configuration."""
        return self._config
