# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Data model tests"""

from hypothesis import (given, settings)
from hypothesis import strategies as st

from conftest import make_trajectory
from eljef.workflow.lib.model import (ZERO_LEDGER, EmbeddingVector, Metadata, Pattern, TokenLedger, Trajectory,
                                      Violation, WorkflowNode, canonical_json, fingerprint_error, fnv1a_64,
                                      is_slot_marker, normalize_message, slot_marker, structural_hash, sum_ledgers,
                                      validate)

STEPS = (('fetch_records', {'source': 'erp', 'region': 'EU', 'page_size': 100}),
         ('filter_rows', {'sku': 'AB123'}),
         ('aggregate', {'metric': 'units', 'group_by': 'month'}))

ledgers = st.builds(TokenLedger, st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.integers(0, 1000))


def test_fnv1a_64_known_values():
    assert fnv1a_64(b'') == 0xcbf29ce484222325
    assert fnv1a_64(b'a') == 0xaf63dc4c8601ec8c
    assert fnv1a_64(b'foobar') == 0x85944171f73967e8


def test_canonical_json_sorted_and_compact():
    assert canonical_json({'b': 1, 'a': [1, 2], 'c': {'z': None, 'y': 'x'}}) == \
        '{"a":[1,2],"b":1,"c":{"y":"x","z":null}}'


@settings(max_examples=100)
@given(ledgers, ledgers, ledgers)
def test_ledger_addition_is_a_commutative_monoid(a, b, c):
    assert a.add(b) == b.add(a)
    assert a.add(b).add(c) == a.add(b.add(c))
    assert a.add(ZERO_LEDGER) == a
    assert a.add(b).total_tokens == a.total_tokens + b.total_tokens


@settings(max_examples=50)
@given(st.lists(ledgers, max_size=20))
def test_sum_ledgers_matches_componentwise_sum(items):
    total = sum_ledgers(items)
    assert total.prompt_tokens == sum(item.prompt_tokens for item in items)
    assert total.completion_tokens == sum(item.completion_tokens for item in items)
    assert total.generator_calls == sum(item.generator_calls for item in items)


def test_slot_markers():
    assert slot_marker('region') == '{{slot:region}}'
    assert is_slot_marker('{{slot:region}}')
    assert not is_slot_marker('{region}')
    assert not is_slot_marker(5)


def test_structural_hash_ignores_variable_values():
    first = make_trajectory('t1', 'audit sales for region EU', STEPS, variable=(0, 1))
    steps = (('fetch_records', {'source': 'erp', 'region': 'US', 'page_size': 100}),
             ('filter_rows', {'sku': 'CD456'}),
             STEPS[2])
    second = make_trajectory('t2', 'audit sales for region US', steps, variable=(0, 1))

    assert structural_hash(first) == structural_hash(second)


def test_structural_hash_sees_fixed_values_and_tools():
    base = make_trajectory('t1', 'audit sales', STEPS)
    changed_value = make_trajectory('t2', 'audit sales', STEPS[:2] + (('aggregate', {'metric': 'units',
                                                                                      'group_by': 'week'}),))
    changed_tool = make_trajectory('t3', 'audit sales', STEPS[:2] + (('export_table', {'metric': 'units',
                                                                                        'group_by': 'month'}),))

    assert structural_hash(base) != structural_hash(changed_value)
    assert structural_hash(base) != structural_hash(changed_tool)


def test_structural_hash_ignores_node_ids():
    base = make_trajectory('t1', 'audit sales', STEPS)
    renamed = tuple(node._replace(node_id=f"x{index}", depends_on=(f"x{index - 1}",) if index else ())
                    for index, node in enumerate(base.nodes))

    assert structural_hash(base) == structural_hash(base._replace(nodes=renamed))


def test_validate_accepts_a_valid_trajectory():
    assert validate(make_trajectory('t1', 'audit sales', STEPS)) == []


def test_validate_reports_each_violation():
    base = make_trajectory('t1', 'audit sales', STEPS)
    nodes = base.nodes

    assert Violation.NODES_EMPTY in validate(base._replace(nodes=()))
    assert Violation.EMPTY_TRIGGER in validate(base._replace(trigger=base.trigger._replace(text='  ')))
    assert Violation.DUPLICATE_NODE_ID in validate(base._replace(nodes=(nodes[0], nodes[0]._replace(
        depends_on=('n1',)))))
    assert Violation.UNKNOWN_DEPENDENCY in validate(base._replace(
        nodes=(nodes[0], nodes[1]._replace(depends_on=('n9',))), pattern=Pattern.PARALLEL))
    assert Violation.FORWARD_DEPENDENCY in validate(base._replace(
        nodes=(nodes[0]._replace(depends_on=('n2',)), nodes[1]._replace(depends_on=())), pattern=Pattern.PARALLEL))
    assert Violation.SEQUENTIAL_CHAIN_BROKEN in validate(base._replace(
        nodes=(nodes[0], nodes[1]._replace(depends_on=()))))
    assert Violation.EMBEDDING_NOT_NORMALIZED in validate(base._replace(
        trigger_embedding=EmbeddingVector((2.0,) + (0.0,) * 255)))
    assert Violation.INVALID_VERSION in validate(base._replace(metadata=base.metadata._replace(version_id=0)))
    assert Violation.NEGATIVE_COUNTER in validate(base._replace(metadata=base.metadata._replace(usage_count=-1)))


def test_validate_accepts_the_zero_embedding_and_parallel_fan_out():
    nodes = (WorkflowNode('a', 'fetch_records', {}), WorkflowNode('b', 'filter_rows', {}, depends_on=('a',)),
             WorkflowNode('c', 'aggregate', {}, depends_on=('a',)))
    trajectory = make_trajectory('t1', 'audit sales', STEPS)._replace(
        nodes=nodes, pattern=Pattern.PARALLEL, trigger_embedding=EmbeddingVector((0.0,) * 256))

    assert validate(trajectory) == []


def test_fingerprint_normalizes_case_whitespace_and_digits():
    left = fingerprint_error('fetch_records', '422', 'Invalid  param page_size 500')
    right = fingerprint_error('fetch_records', '422', 'invalid param\tpage_size 1000')
    other = fingerprint_error('fetch_records', '400', 'invalid param page_size 500')

    assert normalize_message('Invalid  param\n500') == 'invalid param #'
    assert left == right
    assert left != other


def test_trajectory_survives_its_json_form():
    trajectory = make_trajectory('t1', 'audit sales for region EU', STEPS, variable=(0,))
    trajectory = trajectory._replace(context={'rollback_note': 'supersedes t0'},
                                     metadata=Metadata(4, trajectory.metadata.outcome, 2, ('merged:t9',), 3, 1))

    assert Trajectory.from_json(trajectory.to_json()) == trajectory
