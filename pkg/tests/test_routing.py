# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Routing and fallback tests"""

import pytest
from hypothesis import (given, settings)
from hypothesis import strategies as st

from conftest import (EMBEDDING, make_trajectory)
from eljef.workflow.lib.corpus import FAULTS
from eljef.workflow.lib.embedding import (cosine_similarity, embed)
from eljef.workflow.lib.errors import (ConfigError, UnknownTrajectory)
from eljef.workflow.lib.model import (ZERO_LEDGER, Outcome, Query, RootCause, structural_hash, template_id_for)
from eljef.workflow.lib.routing import (PRESETS, ExecutionReport, Route, RoutingConfig, Verdict,
                                        execute_with_fallback, record_feedback, route, route_histogram,
                                        select_route)
from eljef.workflow.lib.store import USER_REJECTED_TAG
from eljef.workflow.lib.workload import (WorkloadConfig, generate_workload)

AUDIT = 'audit sales ledger for region EU covering sku AB123 this quarter'
AUDIT_MEDIUM = 'audit sales ledger for region US covering sku CD456 this quarter'
NOTICE = 'notify team T101 about stock levels for sku AB123 today'
NOVEL = 'rotate api credentials before the nightly sync'

RANK = {Route.C_INITIALIZE: 0, Route.B_REWRITE: 1, Route.A_DIRECT_REUSE: 2}

thresholds = st.tuples(st.floats(0.01, 0.98), st.floats(0.01, 0.98)).map(sorted).filter(
    lambda pair: pair[0] < pair[1]).map(lambda pair: RoutingConfig(pair[1], pair[0]))


def _configs():
    return [RoutingConfig(0.5 + index * 0.025, 0.05 + index * 0.02) for index in range(20)]


def test_route_partition_on_a_grid():
    scores = [index / 9999 for index in range(10000)]
    for cfg in _configs():
        cfg.checked()
        previous = Route.C_INITIALIZE
        for score in scores:
            chosen = select_route(score, cfg)
            assert (chosen is Route.A_DIRECT_REUSE) == (score > cfg.theta_a)
            assert (chosen is Route.C_INITIALIZE) == (score <= cfg.theta_b)
            assert RANK[chosen] >= RANK[previous]
            previous = chosen


@settings(max_examples=200)
@given(thresholds, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_route_is_monotone_in_the_score(cfg, left, right):
    low, high = sorted((left, right))
    assert RANK[select_route(low, cfg)] <= RANK[select_route(high, cfg)]


def test_thresholds_exactly_on_the_boundary():
    cfg = RoutingConfig()
    assert select_route(0.9, cfg) is Route.B_REWRITE
    assert select_route(0.6, cfg) is Route.C_INITIALIZE


@pytest.mark.parametrize('theta_a, theta_b, max_iters', [(0.6, 0.9, 3), (0.9, 0.0, 3), (1.1, 0.6, 3),
                                                         (0.9, 0.6, 0)])
def test_bad_config_is_rejected(theta_a, theta_b, max_iters):
    with pytest.raises(ConfigError):
        RoutingConfig(theta_a, theta_b, max_iters).checked()


def test_presets():
    assert PRESETS['default'] == RoutingConfig()
    assert PRESETS['strict'].theta_a == 0.99


def test_empty_store_routes_to_planning(store):
    decision = route(Query(AUDIT, 'q1'), store)
    assert decision.route is Route.C_INITIALIZE
    assert decision.best_match is None


def test_unclustered_success_is_still_found(store):
    steps = (('fetch_records', {'source': 'erp', 'region': 'EU', 'page_size': 100}),)
    trajectory = make_trajectory('t1', AUDIT, steps)
    store.put_trajectory(trajectory)

    decision = route(Query(AUDIT, 'q1'), store)

    assert decision.route is Route.A_DIRECT_REUSE
    assert decision.best_match[0] == template_id_for(structural_hash(trajectory))


def test_three_tiers_end_to_end(store, backend, faulted_env):
    first = execute_with_fallback(Query(AUDIT, 'q1'), store, backend, faulted_env)
    assert first.succeeded
    assert first.final_route is Route.C_INITIALIZE
    assert first.executions == 2

    repeat = execute_with_fallback(Query(AUDIT, 'q2'), store, backend, faulted_env)
    assert repeat.final_route is Route.A_DIRECT_REUSE
    assert repeat.succeeded
    assert repeat.ledger == ZERO_LEDGER
    assert repeat.final_trajectory.trajectory_id == 'q1-c2'
    assert store.get_trajectory('q1-c2').metadata.usage_count == 1

    medium = execute_with_fallback(Query(AUDIT_MEDIUM, 'q3'), store, backend, faulted_env)
    assert medium.final_route is Route.B_REWRITE
    assert medium.succeeded
    assert medium.ledger.generator_calls == 2
    assert medium.final_trajectory.node('n2').params['region'] == 'US'
    assert medium.final_trajectory.node('n1').params['scope'] == 'read'

    novel = execute_with_fallback(Query(NOVEL, 'q4'), store, backend, faulted_env)
    assert novel.trail[0][0].route is Route.C_INITIALIZE
    assert novel.succeeded

    histogram = route_histogram([first, repeat, medium, novel])
    assert histogram == {'A_DirectReuse': 1, 'B_Rewrite': 1, 'C_Initialize': 2}


def test_failed_reuse_degrades_to_rewrite_then_planning(store, backend, env):
    first = execute_with_fallback(Query(NOTICE, 'q1'), store, backend, env)
    assert first.succeeded

    tool_id, profile = FAULTS[RootCause.MISSING_LOGIC]
    env.registry.inject_fault(tool_id, profile)
    report = execute_with_fallback(Query(NOTICE, 'q2'), store, backend, env)

    assert [decision.route for decision, _ in report.trail] == [Route.A_DIRECT_REUSE, Route.B_REWRITE,
                                                               Route.C_INITIALIZE]
    assert [outcome for _, outcome in report.trail] == [Outcome.FAILURE, Outcome.FAILURE, Outcome.SUCCESS]
    assert report.trail[2][0].degraded_from == (Route.A_DIRECT_REUSE, Route.B_REWRITE)
    assert report.succeeded
    assert report.executions == 5
    assert report.final_trajectory.node('n3').params['template'] == 'standard'
    assert not store.get_trajectory('q1-c1').succeeded


def test_feedback(store, backend, env):
    execute_with_fallback(Query(AUDIT, 'q1'), store, backend, env)
    report = execute_with_fallback(Query(AUDIT, 'q2'), store, backend, env)
    assert report.final_route is Route.A_DIRECT_REUSE

    ok = record_feedback(report, Verdict.USER_OK, store)
    assert ok.metadata.usage_count == 2

    rejected = record_feedback(report, Verdict.USER_ERROR, store)
    assert rejected.has_tag(USER_REJECTED_TAG)
    assert not rejected.succeeded
    assert record_feedback(report, Verdict.USER_ERROR, store).metadata.version_id == rejected.metadata.version_id

    decision = route(Query(AUDIT, 'q3'), store)
    assert decision.route is Route.B_REWRITE
    assert decision.degraded_from == (Route.A_DIRECT_REUSE,)


def test_feedback_needs_a_stored_trajectory(store):
    report = ExecutionReport(Query(AUDIT, 'q1'), (), None, ZERO_LEDGER, False, 0, 0)
    with pytest.raises(UnknownTrajectory):
        record_feedback(report, Verdict.USER_OK, store)


def test_route_scores_the_template_centroid(store):
    steps = (('lookup_rate', {'currency': 'EUR'}),)
    store.put_trajectory(make_trajectory('t1', 'audit sales ledger quarterly', steps))
    store.put_trajectory(make_trajectory('t2', 'rotate api credentials nightly', steps, executed_at=2))
    template = store.cluster_templates()[0]
    assert template.member_ids == ('t1', 't2')

    query = Query('audit sales ledger quarterly', 'q1')
    expected = cosine_similarity(embed(query.text, EMBEDDING), template.trigger_centroid)
    decision = route(query, store)

    assert expected < RoutingConfig().theta_a
    assert decision.best_match == (template.template_id, pytest.approx(expected))
    assert decision.route is Route.B_REWRITE
    assert decision.degraded_from == ()


def test_direct_reuse_runs_the_highest_priority_member(store, backend, env):
    steps = (('lookup_rate', {'currency': 'EUR'}),)
    low = make_trajectory('t1', 'rates for region EU today', steps, executed_at=5)
    high = make_trajectory('t2', 'rates for region EU today', steps, executed_at=1)
    store.put_trajectory(low)
    store.put_trajectory(high._replace(metadata=high.metadata._replace(priority=3)))
    store.cluster_templates()

    report = execute_with_fallback(Query('rates for region EU today', 'q1'), store, backend, env)

    assert report.final_route is Route.A_DIRECT_REUSE
    assert report.final_trajectory.trajectory_id == 't2'
    assert store.get_trajectory('t2').metadata.usage_count == 1


@pytest.mark.parametrize('env_name', ['env', 'faulted_env'])
def test_high_repeats_reuse_without_tokens(request, store, backend, env_name):
    exec_env = request.getfixturevalue(env_name)
    queries = generate_workload(WorkloadConfig(5, 40, (1.0, 0.0, 0.0), 8, ()))
    served = set()

    for query in queries:
        report = execute_with_fallback(query, store, backend, exec_env)
        assert report.succeeded
        if query.text in served:
            assert report.final_route is Route.A_DIRECT_REUSE
            assert report.ledger.generator_calls == 0
            assert report.ledger == ZERO_LEDGER
        served.add(query.text)

    assert len(served) == 8
