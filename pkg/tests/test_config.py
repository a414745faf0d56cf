# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Engine configuration and CLI helper tests"""

import json
import os

import pytest

from eljef.workflow.lib import cli
from eljef.workflow.lib.backend import (BackendKind, MockBackend, RemoteBackend)
from eljef.workflow.lib.config import (ENV_THETA_A, ENV_THETA_B, EngineConfig, GeneratorConfig, build_backend,
                                       build_registry, engine_config_from_json, load_engine_config,
                                       load_workload_config)
from eljef.workflow.lib.corpus import default_registry
from eljef.workflow.lib.errors import ConfigError
from eljef.workflow.lib.routing import RoutingConfig


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Keeps threshold overrides from leaking in from the caller's shell."""
    for name in (ENV_THETA_A, ENV_THETA_B, 'WG_STORE', 'WG_SEED'):
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    assert load_engine_config() == EngineConfig()
    assert engine_config_from_json({}).routing == RoutingConfig(0.9, 0.6, 3)


def test_preset_and_overrides():
    cfg = engine_config_from_json({'routing': {'preset': 'strict', 'max_iters': 5}})
    assert cfg.routing == RoutingConfig(0.99, 0.6, 5)

    with pytest.raises(ConfigError):
        engine_config_from_json({'routing': {'preset': 'loose'}})


def test_environment_overrides_the_file(monkeypatch):
    monkeypatch.setenv(ENV_THETA_A, '0.95')
    monkeypatch.setenv(ENV_THETA_B, '0.5')

    cfg = engine_config_from_json({'routing': {'theta_a': 0.8, 'theta_b': 0.7}})

    assert (cfg.routing.theta_a, cfg.routing.theta_b) == (0.95, 0.5)


@pytest.mark.parametrize('value', ['high', '0.95'])
def test_bad_environment_threshold(monkeypatch, value):
    monkeypatch.setenv(ENV_THETA_B, value)
    with pytest.raises(ConfigError):
        engine_config_from_json({})


@pytest.mark.parametrize('data', [
    {'generator': {'kind': 'RemoteHTTP'}},
    {'generator': {'kind': 'Oracle'}},
    {'embedding': {'dimension': 0}},
    {'embedding': {'provider': 'Remote'}},
    {'embedding': {'provider': 'Oracle'}},
    {'routing': {'max_iters': 'twice'}},
])
def test_bad_engine_config(data):
    with pytest.raises(ConfigError):
        engine_config_from_json(data)


def test_paths_are_relative_to_the_config_file(tmp_path):
    path = tmp_path / 'engine.json'
    path.write_text(json.dumps({'registry': 'tools.json', 'store': '/var/lib/wg',
                                'generator': {'seed_table': 'seeds.json', 'seed': 4}}))

    cfg = load_engine_config(str(path))

    assert cfg.registry == os.path.join(str(tmp_path), 'tools.json')
    assert cfg.store == '/var/lib/wg'
    assert cfg.generator.seed_table == os.path.join(str(tmp_path), 'seeds.json')
    assert cfg.generator.seed == 4


def test_engine_config_must_be_an_object(tmp_path):
    path = tmp_path / 'engine.json'
    path.write_text('[1, 2]')
    with pytest.raises(ConfigError):
        load_engine_config(str(path))


def test_workload_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_workload_config(str(tmp_path / 'missing.json'))

    path = tmp_path / 'workload.json'
    path.write_text(json.dumps({'seed': 3, 'n_queries': 12, 'n_families': 3}))
    cfg = load_workload_config(str(path))

    assert (cfg.seed, cfg.n_queries, cfg.n_families) == (3, 12, 3)


def test_build_backend():
    mock = build_backend(GeneratorConfig(seed=7))
    assert isinstance(mock, MockBackend)
    assert mock.seed == 7

    remote = build_backend(GeneratorConfig(BackendKind.REMOTE_HTTP, 'http://localhost:9/generate', 2.0).checked())
    assert isinstance(remote, RemoteBackend)
    assert remote.timeout == 2.0


def test_build_registry(tmp_path):
    assert len(build_registry()) == len(default_registry())

    path = str(tmp_path / 'tools.json')
    default_registry().save(path)
    assert [spec.tool_id for spec in build_registry(path).tools()] == \
        [spec.tool_id for spec in default_registry().tools()]


def test_env_default(monkeypatch):
    assert cli.env_default('store') == {'default': None, 'required': True}
    assert cli.env_default('store', 'wg') == {'default': 'wg', 'required': False}

    monkeypatch.setenv('WG_SEED', '12')
    assert cli.env_default('seed', 0, int) == {'default': 12, 'required': False}

    monkeypatch.setenv('WG_SEED', 'twelve')
    with pytest.raises(SystemExit):
        cli.env_default('seed', 0, int)


def test_check_store_dir(tmp_path):
    assert cli.check_store_dir(str(tmp_path)) == str(tmp_path)
    assert cli.check_store_dir(str(tmp_path / 'new'), must_exist=False) == str(tmp_path / 'new')

    with pytest.raises(SystemExit):
        cli.check_store_dir(str(tmp_path / 'missing'))

    (tmp_path / 'file').write_text('x')
    with pytest.raises(SystemExit):
        cli.check_store_dir(str(tmp_path / 'file'))
