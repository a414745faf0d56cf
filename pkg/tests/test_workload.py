# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Workload generation tests"""

import pytest

from eljef.workflow.lib.corpus import (FAMILIES, NOVEL_INTENTS)
from eljef.workflow.lib.embedding import (EmbeddingConfig, cosine_similarity, embed)
from eljef.workflow.lib.errors import ConfigError
from eljef.workflow.lib.model import Tier
from eljef.workflow.lib.routing import RoutingConfig
from eljef.workflow.lib.workload import (WorkloadConfig, base_queries, default_workload, generate_workload)

CFG = EmbeddingConfig()
ROUTING = RoutingConfig()


def test_single_family_all_high_is_one_repeated_query():
    queries = generate_workload(WorkloadConfig(7, 20, (1.0, 0.0, 0.0), 1))

    assert len({query.text for query in queries}) == 1
    assert {query.tier_hint for query in queries} == {Tier.HIGH}
    assert [query.query_id for query in queries] == [f"q{index:04d}" for index in range(1, 21)]


def test_default_workload_tiers_hit_their_bands():
    cfg = default_workload()
    queries = generate_workload(cfg)
    bases = [embed(text, CFG) for text in base_queries(cfg)]

    counts = {tier: sum(1 for query in queries if query.tier_hint is tier) for tier in Tier}
    assert counts == {Tier.HIGH: 60, Tier.MEDIUM: 30, Tier.NOVEL: 10}

    base_texts = set(base_queries(cfg))
    for query in queries:
        scores = [cosine_similarity(embed(query.text, CFG), base) for base in bases]
        if query.tier_hint is Tier.HIGH:
            assert query.text in base_texts
        elif query.tier_hint is Tier.MEDIUM:
            assert any(ROUTING.theta_b < score <= ROUTING.theta_a for score in scores)
        else:
            assert max(scores) < ROUTING.theta_b


def test_novel_queries_do_not_repeat_until_the_pool_runs_out():
    queries = generate_workload(WorkloadConfig(3, 20, (0.0, 0.4, 0.6), 8))
    novel = [query.text for query in queries if query.tier_hint is Tier.NOVEL]

    assert len(novel) == 12
    assert len(set(novel)) == len(NOVEL_INTENTS)


def test_generation_is_deterministic_per_seed():
    cfg = default_workload()
    assert generate_workload(cfg) == generate_workload(cfg)
    assert generate_workload(cfg) != generate_workload(cfg._replace(seed=43))


@pytest.mark.parametrize('cfg', [
    WorkloadConfig(tier_mix=(0.5, 0.3, 0.1)),
    WorkloadConfig(tier_mix=(1.2, -0.1, -0.1)),
    WorkloadConfig(n_families=0),
    WorkloadConfig(n_families=len(FAMILIES) + 1),
    WorkloadConfig(n_queries=4, n_families=8),
])
def test_bad_workload_config(cfg):
    with pytest.raises(ConfigError):
        generate_workload(cfg)


def test_config_from_json():
    cfg = WorkloadConfig.from_json({'seed': 5, 'n_queries': 40, 'n_families': 4, 'faults': 'default',
                                    'tier_mix': {'high': 0.5, 'medium': 0.25, 'novel': 0.25}})

    assert cfg.tier_counts() == {Tier.HIGH: 20, Tier.MEDIUM: 10, Tier.NOVEL: 10}
    assert [fault.tool_id for fault in cfg.faults] == ['fetch_records', 'auth_session', 'export_report',
                                                       'send_notice']
    assert WorkloadConfig.from_json(cfg.to_json()) == cfg

    with pytest.raises(ConfigError):
        WorkloadConfig.from_json({'n_queries': 'many'})
