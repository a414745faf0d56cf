# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Common CLI Engine Functionality"""
import logging
import os

from eljef.core.dictobj import DictObj
from eljef.workflow.lib.config import (build_backend, build_registry, load_engine_config)
from eljef.workflow.lib.errors import WorkflowError
from eljef.workflow.lib.execution import ExecutionEnv
from eljef.workflow.lib.cli import exit_with_error
from eljef.workflow.lib.store import ExperienceStore

LOGGER = logging.getLogger()

REGISTRY_FILE = 'registry.json'
"""REGISTRY_FILE: registry written into a store by ej-wg-init, used when the config names none"""


def open_engine(config_path: str, store_dir: str = None, seed: int = 0) -> DictObj:
    """Assembles the engine from a config file, exiting the CLI program on error.

    Args:
        config_path: engine config file, None for the defaults
        store_dir: store directory, overrides the config's store
        seed: execution environment seed

    Returns:
        DictObj with the following set.
        config: the EngineConfig
        store: the opened ExperienceStore, None when no store was given
        env: ExecutionEnv over the configured registry, else the store's registry.json
        backend: the configured generator backend
    """
    ret = DictObj({'config': None, 'store': None, 'env': None, 'backend': None})

    try:
        ret.config = load_engine_config(config_path)
        store_dir = store_dir or ret.config.store
        if store_dir:
            ret.store = ExperienceStore(store_dir, ret.config.embedding)
        registry = ret.config.registry
        if not registry and ret.store is not None and os.path.isfile(os.path.join(ret.store.path, REGISTRY_FILE)):
            registry = os.path.join(ret.store.path, REGISTRY_FILE)
        ret.env = ExecutionEnv(build_registry(registry), seed)
        ret.backend = build_backend(ret.config.generator)
    except WorkflowError as err:
        exit_with_error(str(err))

    LOGGER.debug("engine ready: generator %s, %d tool(s)", ret.config.generator.kind.value, len(ret.env.registry))

    return ret
