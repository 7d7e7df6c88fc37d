#!/usr/bin/env python3
"""
Experiment configuration manager
Loads a flat JSON configuration, merges command-line overrides and
validates everything before an experiment starts.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from errors import ConfigError
from greedy_algorithms import GradientMode, RunConfig
from multilinear import SampleConfig

logger = logging.getLogger(__name__)

OBJECTIVES = ('facility_rbf', 'facility_rating', 'modular', 'coverage')


class SyntheticSpec(BaseModel):
    """
    Gaussian blob instance with one partition per cluster count

    assignment 'random' shuffles the rows so every agent's local set is a
    random sample across clusters; 'clustered' keeps each cluster contiguous.
    """
    model_config = ConfigDict(extra='forbid')

    clusters: int = Field(6, ge=1)
    points_per_cluster: int = Field(30, ge=1)
    dim: int = Field(1, ge=1)
    cluster_spread: float = Field(2.0, ge=0.0)
    inter_cluster_distance: float = Field(1.0, gt=0.0)
    assignment: Literal['random', 'clustered'] = 'random'
    seed: int = Field(0, ge=0, lt=2 ** 64)


class ExperimentConfig(BaseModel):
    """Single-experiment configuration"""
    model_config = ConfigDict(extra='forbid')

    objective: Literal['facility_rbf', 'facility_rating', 'modular', 'coverage'] = 'facility_rbf'
    data_path: Optional[str] = None
    synthetic: Optional[SyntheticSpec] = None
    partition_sizes: Optional[List[int]] = None
    partition_count: Optional[int] = Field(None, ge=1)
    budgets: Optional[List[int]] = None
    algorithm: Literal['sg', 'cg', 'atcg', 'atcg_general'] = 'atcg'
    T: int = Field(100, ge=1)
    tau: float = Field(0.5, gt=0.0, le=1.0)
    K: int = Field(100, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    gradient_mode: Literal['exact', 'monte_carlo'] = 'monte_carlo'
    sigma: Optional[float] = Field(None, gt=0.0)
    weights: Optional[List[float]] = None
    coverage_sets: Optional[List[List[int]]] = None
    item_weights: Optional[List[float]] = None
    output_dir: str = 'results'
    workers: int = Field(1, ge=1)
    log_level: Literal['DEBUG', 'INFO', 'WARNING', 'ERROR'] = 'INFO'
    log_file: Optional[str] = None
    curvature_cap: int = Field(256, ge=0)
    taus: Optional[List[float]] = None
    embedding_dim_bytes: int = Field(8, ge=1)

    @model_validator(mode='after')
    def check_consistency(self) -> 'ExperimentConfig':
        if self.objective == 'facility_rbf':
            if self.sigma is None:
                raise ValueError("facility_rbf needs the RBF bandwidth 'sigma'")
            if (self.data_path is None) == (self.synthetic is None):
                raise ValueError("facility_rbf needs exactly one of 'data_path' and 'synthetic'")
        elif self.objective == 'facility_rating':
            if self.data_path is None:
                raise ValueError("facility_rating needs 'data_path' (user,item,rating CSV)")
        elif self.objective == 'modular':
            if not self.weights:
                raise ValueError("modular needs 'weights'")
            if any(w < 0 for w in self.weights):
                raise ValueError("modular weights must be nonnegative")
        elif self.objective == 'coverage':
            if not self.coverage_sets and self.data_path is None:
                raise ValueError("coverage needs 'coverage_sets' or 'data_path' (element,item CSV)")
            if self.item_weights is not None and any(w < 0 for w in self.item_weights):
                raise ValueError("item_weights must be nonnegative")

        if self.synthetic is not None and self.objective != 'facility_rbf':
            raise ValueError("'synthetic' only applies to facility_rbf")
        if self.data_path is not None and not Path(self.data_path).exists():
            raise ValueError(f"data file not found: {self.data_path}")
        if self.partition_sizes is not None:
            if not self.partition_sizes or any(s < 1 for s in self.partition_sizes):
                raise ValueError("partition_sizes must be a nonempty list of sizes >= 1")
            if self.partition_count is not None and self.partition_count != len(self.partition_sizes):
                raise ValueError("partition_count disagrees with partition_sizes")

        expected = self.expected_partitions()
        if self.budgets is not None:
            if any(k < 1 for k in self.budgets):
                raise ValueError("budgets must all be >= 1")
            if expected is not None and len(self.budgets) != expected:
                raise ValueError(f"expected {expected} budgets, got {len(self.budgets)}")
        if self.taus is not None and any(not 0.0 < tau <= 1.0 for tau in self.taus):
            raise ValueError("every sweep tau must lie in (0, 1]")
        return self

    def expected_partitions(self) -> Optional[int]:
        """Partition count implied by the configuration, when known before loading data"""
        if self.partition_sizes is not None:
            return len(self.partition_sizes)
        if self.partition_count is not None:
            return self.partition_count
        if self.synthetic is not None:
            return self.synthetic.clusters
        return None

    def run_config(self, record_snapshots: bool = False) -> RunConfig:
        """RunConfig for the algorithm layer"""
        return RunConfig(
            T=self.T,
            tau=self.tau,
            sample=SampleConfig(K=self.K, seed=self.seed),
            gradient_mode=GradientMode(self.gradient_mode),
            workers=self.workers,
            record_snapshots=record_snapshots,
        )


def validation_messages(error: ValidationError) -> List[str]:
    """Flatten a pydantic ValidationError into readable messages"""
    messages = []
    for detail in error.errors():
        location = '.'.join(str(part) for part in detail.get('loc', ()))
        message = detail.get('msg', 'invalid value')
        messages.append(f"{location}: {message}" if location else message)
    return messages


class ExperimentConfigManager:
    """
    Configuration manager: JSON file plus command-line overrides

    Relative data paths in the file are resolved against the file's directory.
    """

    def __init__(self, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration manager

        Args:
            config_path: Path to a flat JSON configuration
            overrides: Values taken from command-line flags (None entries are ignored)
        """
        self.config_path = Path(config_path) if config_path else None
        self.settings: Dict[str, Any] = {}

        if self.config_path is not None:
            self.load_config()
        for key, value in (overrides or {}).items():
            if value is not None:
                self.settings[key] = value

        errors = self.validate_config()
        if errors:
            raise ConfigError(errors)
        self.config = ExperimentConfig.model_validate(self.settings)
        logger.info(f"Experiment configuration ready: objective={self.config.objective}, "
                    f"algorithm={self.config.algorithm}")

    def load_config(self) -> Dict[str, Any]:
        """
        Load configuration from file

        Returns:
            The settings read from the file
        """
        if not self.config_path.exists():
            raise ConfigError([f"configuration file not found: {self.config_path}"])
        try:
            with open(self.config_path, 'r') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError([f"{self.config_path}: invalid JSON ({e})"])
        if not isinstance(data, dict):
            raise ConfigError([f"{self.config_path}: configuration must be a JSON object"])

        for key in ('data_path', 'output_dir', 'log_file'):
            value = data.get(key)
            if isinstance(value, str) and not Path(value).is_absolute():
                data[key] = str(self.config_path.parent / value)

        self.settings.update(data)
        logger.info(f"Configuration loaded from {self.config_path}")
        return data

    def validate_config(self) -> List[str]:
        """
        Validate the merged settings

        Returns:
            List of validation errors (empty if no errors)
        """
        try:
            ExperimentConfig.model_validate(self.settings)
        except ValidationError as e:
            return validation_messages(e)
        return []

    def export_config(self) -> Dict[str, Any]:
        """
        Export the validated configuration

        Returns:
            Configuration dictionary without unset optional fields
        """
        return self.config.model_dump(mode='json', exclude_none=True)

    def save_config(self, path: str) -> Path:
        """Write the validated configuration as JSON"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.export_config(), f, indent=2)
        logger.info(f"Configuration saved to {path}")
        return path
