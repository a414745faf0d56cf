# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Engine Configuration

Engine settings come from a JSON file; ``WG_THETA_A`` and ``WG_THETA_B``
override the routing thresholds.
"""

from typing import (NamedTuple, Optional)

import logging
import os

from eljef.core import fops

from eljef.workflow.lib.backend import (BackendKind, GeneratorBackend, MockBackend, MockSeedTable, RemoteBackend)
from eljef.workflow.lib.corpus import (default_registry, default_seed_table)
from eljef.workflow.lib.embedding import (EmbeddingConfig, Provider)
from eljef.workflow.lib.errors import ConfigError
from eljef.workflow.lib.execution import ToolRegistry
from eljef.workflow.lib.routing import (PRESETS, RoutingConfig)
from eljef.workflow.lib.workload import WorkloadConfig

LOGGER = logging.getLogger(__name__)

ENV_THETA_A = 'WG_THETA_A'
ENV_THETA_B = 'WG_THETA_B'


class GeneratorConfig(NamedTuple):
    """Generator backend settings.

    Attributes:
        kind (BackendKind): DeterministicMock or RemoteHTTP
        endpoint (str): URL for RemoteHTTP
        timeout (float): request timeout in seconds
        seed (int): mock seed
        seed_table (str): mock seed table file, None for the built in corpus
    """
    kind: BackendKind = BackendKind.DETERMINISTIC_MOCK
    endpoint: Optional[str] = None
    timeout: float = 30.0
    seed: int = 0
    seed_table: Optional[str] = None

    def checked(self) -> 'GeneratorConfig':
        """Returns self after checking that RemoteHTTP has an endpoint.

        Raises:
            ConfigError: RemoteHTTP without endpoint
        """
        if self.kind is BackendKind.REMOTE_HTTP and not self.endpoint:
            raise ConfigError("RemoteHTTP generator requires an endpoint")
        return self


class EngineConfig(NamedTuple):
    """Everything needed to assemble the engine.

    Attributes:
        embedding (EmbeddingConfig): embedding settings
        routing (RoutingConfig): routing thresholds
        generator (GeneratorConfig): generator backend settings
        registry (str): tool registry file, None for the built in catalogue
        store (str): default store directory
    """
    embedding: EmbeddingConfig = EmbeddingConfig()
    routing: RoutingConfig = RoutingConfig()
    generator: GeneratorConfig = GeneratorConfig()
    registry: Optional[str] = None
    store: Optional[str] = None


def _env_float(name: str, current: float) -> float:
    value = os.environ.get(name)
    if value is None or value == '':
        return current
    try:
        return float(value)
    except ValueError as err:
        raise ConfigError(f"{name} must be a decimal number, got {value}") from err


def _routing(data: dict) -> RoutingConfig:
    preset = data.get('preset', 'default')
    if preset not in PRESETS:
        raise ConfigError(f"unknown routing preset: {preset}")
    base = PRESETS[preset]
    return RoutingConfig(float(data.get('theta_a', base.theta_a)), float(data.get('theta_b', base.theta_b)),
                         int(data.get('max_iters', base.max_iters)))


def _relative(base_dir: str, path: Optional[str]) -> Optional[str]:
    if not path:
        return None
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def engine_config_from_json(data: dict, base_dir: str = '.') -> EngineConfig:
    """Builds a checked engine config from its dictionary form.

    Relative file paths are resolved against ``base_dir``. Missing sections
    take their defaults.

    Raises:
        ConfigError: invalid value
    """
    try:
        embedding_data = data.get('embedding', {})
        embedding = EmbeddingConfig(int(embedding_data.get('dimension', 256)),
                                    Provider(embedding_data.get('provider', Provider.DETERMINISTIC_HASH.value)),
                                    embedding_data.get('remote_endpoint'),
                                    float(embedding_data.get('timeout', 10.0)))

        routing = _routing(data.get('routing', {}))
        routing = routing._replace(theta_a=_env_float(ENV_THETA_A, routing.theta_a),
                                   theta_b=_env_float(ENV_THETA_B, routing.theta_b))

        generator_data = data.get('generator', {})
        generator = GeneratorConfig(BackendKind(generator_data.get('kind', BackendKind.DETERMINISTIC_MOCK.value)),
                                    generator_data.get('endpoint'), float(generator_data.get('timeout', 30.0)),
                                    int(generator_data.get('seed', 0)),
                                    _relative(base_dir, generator_data.get('seed_table')))
    except (AttributeError, TypeError, ValueError) as err:
        raise ConfigError(f"invalid engine config: {err}") from err

    return EngineConfig(embedding.checked(), routing.checked(), generator.checked(),
                        _relative(base_dir, data.get('registry')), _relative(base_dir, data.get('store')))


def load_engine_config(path: Optional[str] = None) -> EngineConfig:
    """Reads an engine config file; no path, or a missing file, yields the defaults.

    Raises:
        ConfigError: invalid value
    """
    data = {}
    base_dir = '.'
    if path:
        base_dir = os.path.dirname(os.path.abspath(path))
        data = fops.file_read_convert(path, fops.JSON, default=True) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"engine config {path} is not a JSON object")
        LOGGER.debug("engine config read from %s", path)

    return engine_config_from_json(data, base_dir)


def load_workload_config(path: str) -> WorkloadConfig:
    """Reads a workload config file.

    Raises:
        ConfigError: missing file or invalid value
    """
    if not os.path.isfile(path):
        raise ConfigError(f"workload config not found: {path}")

    data = fops.file_read_convert(path, fops.JSON, default=True)
    if not isinstance(data, dict):
        raise ConfigError(f"workload config {path} is not a JSON object")

    return WorkloadConfig.from_json(data)


def build_backend(cfg: GeneratorConfig) -> GeneratorBackend:
    """Generator backend for a config."""
    if cfg.kind is BackendKind.REMOTE_HTTP:
        return RemoteBackend(cfg.endpoint, cfg.timeout)

    table = default_seed_table()
    if cfg.seed_table:
        table = MockSeedTable.from_json(fops.file_read_convert(cfg.seed_table, fops.JSON))
    return MockBackend(table, cfg.seed)


def build_registry(path: Optional[str] = None) -> ToolRegistry:
    """Registry read from a definition file, or the built in catalogue."""
    if path:
        return ToolRegistry.load(path)
    return default_registry()
