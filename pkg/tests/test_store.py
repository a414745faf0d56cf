# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Experience store tests"""

import os
import random

import pytest

from conftest import (EMBEDDING, make_trajectory)
from eljef.workflow.lib.embedding import (EmbeddingConfig, cosine_similarity, embed)
from eljef.workflow.lib.errors import (DimensionMismatch, EmptyStore, InvalidExperience, InvalidTrajectory,
                                       UnknownTemplate, UnknownTrajectory)
from eljef.workflow.lib.extraction import (ExecutionLog, StepError, StepRecord, extract_node_experiences)
from eljef.workflow.lib.model import (NodeExperience, Outcome, Query, ReuseClass, RootCause, Violation,
                                      fingerprint_error, is_slot_marker, structural_hash)
from eljef.workflow.lib.store import (EXPERIENCES_FILE, MANIFEST_FILE, TEMPLATES_FILE, TRAJECTORIES_FILE,
                                      ExperienceStore)

REGIONS = ('EU', 'US', 'UK', 'JP', 'BR', 'DE', 'FR', 'AU')
WORDS = ('audit', 'ledger', 'region', 'export', 'stock', 'rates', 'EU', 'JP')
SHAPES = (
    ('audit ledger for region {0}', (('fetch_records', {'source': 'erp', 'region': '{0}', 'page_size': 100}),
                                     ('aggregate', {'metric': 'units', 'group_by': 'month'}))),
    ('chart orders for region {0}', (('fetch_records', {'source': 'crm', 'region': '{0}', 'page_size': 100}),
                                     ('render_chart', {'kind': 'bar', 'campaign': 'promo01'}))),
    ('export stock for region {0}', (('fetch_records', {'source': 'warehouse', 'region': '{0}', 'page_size': 100}),
                                     ('export_table', {'format': 'csv', 'target': 'drive'}))),
    ('notify staff about region {0}', (('fetch_records', {'source': 'erp', 'region': '{0}', 'page_size': 50}),
                                       ('send_notice', {'channel': 'email', 'team': 'T101'}))),
    ('rates for region {0} today', (('lookup_rate', {'currency': 'EUR'}),
                                    ('fetch_records', {'source': 'erp', 'region': '{0}', 'page_size': 100}))),
)


def _shape_trajectory(index: int, shape: int, region: str, outcome: Outcome = Outcome.SUCCESS):
    text, steps = SHAPES[shape]
    filled = tuple((tool_id, {name: value.format(region) if isinstance(value, str) else value
                              for name, value in params.items()}) for tool_id, params in steps)
    variable = tuple(position for position, (tool_id, _) in enumerate(steps) if tool_id == 'fetch_records')
    return make_trajectory(f"t{index:03d}", text.format(region), filled, outcome, index + 1, variable)


def _failure_log(query_id: str, text: str, executed_at: int) -> ExecutionLog:
    step = StepRecord('n1', 'fetch_records', {'page_size': 500}, None,
                      StepError('422', f"invalid param page_size {executed_at}"), 1)
    return ExecutionLog(Query(text, query_id), (step,), Outcome.FAILURE, {}, executed_at)


def _fill(store: ExperienceStore) -> None:
    for index in range(60):
        outcome = Outcome.FAILURE if index % 7 == 0 else Outcome.SUCCESS
        trajectory = _shape_trajectory(index, index % len(SHAPES), REGIONS[index % len(REGIONS)], outcome)
        store.put_experiences(extract_node_experiences(trajectory, None, [], index))
        store.put_experiences(extract_node_experiences(None, trajectory, [_failure_log(
            trajectory.trajectory_id, trajectory.trigger.text, index)], index))
        store.put_trajectory(trajectory)
    store.cluster_templates()


def test_fresh_store_writes_manifest_and_empty_files(tmp_path):
    path = tmp_path / 'store'
    ExperienceStore(str(path), EMBEDDING)

    for name in (MANIFEST_FILE, TRAJECTORIES_FILE, EXPERIENCES_FILE, TEMPLATES_FILE):
        assert (path / name).exists()
    assert (path / TRAJECTORIES_FILE).read_text() == ''


def test_reopen_restores_byte_identical_files(tmp_path):
    path = str(tmp_path / 'store')
    store = ExperienceStore(path, EMBEDDING)
    _fill(store)

    assert len(store) >= 50
    assert len(store.experiences()) >= 30
    assert len(store.templates()) >= 5

    contents = {name: open(os.path.join(path, name), encoding='utf-8').read()
                for name in (TRAJECTORIES_FILE, EXPERIENCES_FILE, TEMPLATES_FILE)}
    reopened = ExperienceStore(path, EMBEDDING)

    for name, text in contents.items():
        assert reopened.serialize(name) == text
    assert reopened.digest() == store.digest()
    assert reopened.templates() == store.templates()
    assert reopened.index_problems() == []


def test_reopen_with_another_dimension_fails(tmp_path):
    path = str(tmp_path / 'store')
    ExperienceStore(path, EMBEDDING)

    with pytest.raises(DimensionMismatch):
        ExperienceStore(path, EmbeddingConfig(64))


def test_put_rejects_invalid_trajectories(store):
    trajectory = _shape_trajectory(0, 0, 'EU')

    with pytest.raises(InvalidTrajectory) as err:
        store.put_trajectory(trajectory._replace(nodes=()))
    assert Violation.NODES_EMPTY in err.value.violations

    dangling = trajectory.nodes[0]._replace(experience_refs=('exp-missing',))
    with pytest.raises(InvalidTrajectory) as err:
        store.put_trajectory(trajectory._replace(nodes=(dangling,) + trajectory.nodes[1:]))
    assert Violation.UNRESOLVED_EXPERIENCE_REF in err.value.violations

    with pytest.raises(DimensionMismatch):
        store.put_trajectory(trajectory._replace(trigger_embedding=embed('x', EmbeddingConfig(64))))


def test_revisions_bump_the_version(store):
    trajectory = _shape_trajectory(0, 0, 'EU')
    store.put_trajectory(trajectory)
    store.put_trajectory(trajectory)

    assert store.get_trajectory('t000').metadata.version_id == 2
    revised = store.revise_outcome('t000', Outcome.FAILURE, 'user_rejected')
    assert revised.metadata.version_id == 3
    assert revised.has_tag('user_rejected')
    assert not revised.succeeded


def test_unknown_ids_raise(store):
    with pytest.raises(UnknownTrajectory):
        store.get_trajectory('nope')
    with pytest.raises(UnknownTemplate):
        store.get_template('nope')
    with pytest.raises(EmptyStore):
        store.find_nearest(embed('audit', EMBEDDING), 1)


def _random_text(rng: random.Random) -> str:
    return ' '.join(rng.sample(WORDS, rng.randint(1, 3)))


def _random_trajectory(rng: random.Random, index: int):
    trajectory = make_trajectory(f"r{index:04d}", _random_text(rng), (('lookup_rate', {'currency': 'EUR'}),),
                                 executed_at=rng.randint(1, 20))
    return trajectory._replace(metadata=trajectory.metadata._replace(priority=rng.randrange(4)))


def test_find_nearest_matches_a_full_sort(store):
    rng = random.Random(7)
    for _ in range(100):
        for _ in range(10):
            store.put_trajectory(_random_trajectory(rng, len(store)))
        vector = embed(_random_text(rng), EMBEDDING)
        k = rng.randint(1, 25)

        oracle = sorted(store.trajectories(), key=lambda t: (-cosine_similarity(vector, t.trigger_embedding),
                                                             -t.metadata.priority, -t.metadata.executed_at,
                                                             t.trajectory_id))
        found = store.find_nearest(vector, k)

        assert [ident for ident, _ in found] == [t.trajectory_id for t in oracle[:k]]
        assert [score for _, score in found] == [cosine_similarity(vector, t.trigger_embedding) for t in oracle[:k]]

    assert len(store) == 1000


def test_find_nearest_filters_by_outcome(store):
    store.put_trajectory(_shape_trajectory(0, 0, 'EU', Outcome.FAILURE))
    store.put_trajectory(_shape_trajectory(1, 1, 'EU'))

    found = store.find_nearest(embed('audit ledger for region EU', EMBEDDING), 2, Outcome.SUCCESS)
    assert [ident for ident, _ in found] == ['t001']


def test_cluster_templates_builds_slots_and_is_idempotent(store):
    for index, region in enumerate(('EU', 'US', 'UK')):
        store.put_trajectory(_shape_trajectory(index, 0, region))

    first = store.cluster_templates()
    second = store.cluster_templates()

    assert first == second
    assert len(first) == 1
    template = first[0]
    assert template.member_ids == ('t000', 't001', 't002')
    assert template.reuse_class is ReuseClass.REWRITE_REUSE
    fetch = template.skeleton[0]
    assert fetch.is_variable
    assert is_slot_marker(fetch.params['region'])
    assert fetch.params['source'] == 'erp'
    assert template.skeleton[1] == store.get_trajectory('t002').nodes[1]
    assert store.template_of('t001') == template.template_id


def test_cluster_templates_is_idempotent_on_random_corpora():
    rng = random.Random(11)
    for _ in range(50):
        corpus = [_shape_trajectory(index, rng.randrange(len(SHAPES)), rng.choice(REGIONS),
                                    rng.choice((Outcome.SUCCESS, Outcome.SUCCESS, Outcome.FAILURE)))
                  for index in range(rng.randint(1, 30))]
        forward = ExperienceStore(None, EMBEDDING)
        backward = ExperienceStore(None, EMBEDDING)
        for trajectory in corpus:
            forward.put_trajectory(trajectory)
        for trajectory in reversed(corpus):
            backward.put_trajectory(trajectory)

        first = forward.cluster_templates()

        assert forward.cluster_templates() == first
        assert backward.cluster_templates() == first
        assert len(first) == len({structural_hash(t) for t in corpus if t.succeeded})
        assert sorted(member for template in first for member in template.member_ids) == \
            sorted(t.trajectory_id for t in corpus if t.succeeded)


def test_canonical_trajectory(store):
    for index, region in enumerate(('EU', 'US', 'UK')):
        trajectory = _shape_trajectory(index, 0, region)
        if index == 1:
            trajectory = trajectory._replace(metadata=trajectory.metadata._replace(priority=2))
        store.put_trajectory(trajectory)
    template_id = store.cluster_templates()[0].template_id

    assert store.canonical_trajectory(template_id).trajectory_id == 't001'

    store.revise_outcome('t001', Outcome.FAILURE, 'user_rejected')
    assert store.canonical_trajectory(template_id).trajectory_id == 't002'

    store.record_usage('t000', 2)
    assert store.canonical_trajectory(template_id).trajectory_id == 't000'

    with pytest.raises(UnknownTemplate):
        store.canonical_trajectory('nope')


def test_cluster_templates_leaves_failures_out(store):
    store.put_trajectory(_shape_trajectory(0, 0, 'EU', Outcome.FAILURE))
    assert store.cluster_templates() == []


def test_merge_similar_tags_members_and_moves_usage(store):
    store.put_trajectory(_shape_trajectory(0, 0, 'EU'))
    store.put_trajectory(_shape_trajectory(1, 0, 'EU'))
    store.put_trajectory(_shape_trajectory(2, 1, 'EU'))
    store.record_usage('t000', 3)

    report = store.merge_similar(0.99)

    assert len(report.groups) == 1
    assert report.groups[0].canonical_id == 't001'
    assert report.groups[0].member_ids == ('t000', 't001')
    assert report.tagged == 1
    assert store.get_trajectory('t000').has_tag('merged:t001')
    assert store.get_trajectory('t001').metadata.usage_count == 3
    assert len(store) == 3
    assert store.merge_similar(0.99).tagged == 0


def test_merge_rejects_a_bad_floor(store):
    with pytest.raises(ValueError):
        store.merge_similar(0.0)


def test_boost_priority_follows_usage(store):
    store.put_trajectory(_shape_trajectory(0, 0, 'EU'))
    template = store.cluster_templates()[0]
    store.record_usage('t000', 4)

    assert store.boost_priority(template.template_id) == 4
    assert store.get_template(template.template_id).priority == 4
    assert store.cluster_templates()[0].priority == 4


def test_experience_polarity_is_checked(store):
    fingerprint = fingerprint_error('fetch_records', '422', 'invalid param')
    with pytest.raises(InvalidExperience):
        store.put_experiences([NodeExperience('e1', None, RootCause.OTHER, 'a:b', None, None, '', Outcome.FAILURE)])
    with pytest.raises(InvalidExperience):
        store.put_experiences([NodeExperience('e2', fingerprint, RootCause.OTHER, 'a:b', None, None, '',
                                              Outcome.SUCCESS)])


def test_lookup_puts_failures_first(store):
    trajectory = _shape_trajectory(0, 0, 'EU')
    store.put_experiences(extract_node_experiences(trajectory, None, [], 1))
    failures = extract_node_experiences(None, trajectory, [_failure_log('t000', trajectory.trigger.text, 2)], 2)
    store.put_experiences(failures)

    found = store.lookup_experiences('audit:ledger')
    assert found[0].polarity is Outcome.FAILURE
    assert {experience.polarity for experience in found[1:]} == {Outcome.SUCCESS}
    assert store.lookup_experiences(failures[0].fingerprint) == failures
    assert store.schema_for('fetch_records', 'audit:ledger').example_template['region'] == 'EU'
