# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Trajectory and experience extraction tests"""

import pytest
from hypothesis import (given, settings)
from hypothesis import strategies as st

from conftest import (EMBEDDING, make_trajectory)
from eljef.workflow.lib.corpus import FAULTS
from eljef.workflow.lib.errors import (BothAbsent, EmptyLog, EmptySamples)
from eljef.workflow.lib.extraction import (ExecutionLog, StepError, StepRecord, classify_experience,
                                           classify_root_cause, extract_node_experiences,
                                           extract_workflow_trajectory, generalize_value,
                                           induce_parameter_schema, infer_pattern, intent_key)
from eljef.workflow.lib.model import (Outcome, Pattern, Query, ReuseClass, RootCause, TrajectoryTemplate,
                                      structural_hash)

TEXT = 'export inventory table for region EU with sku AB123 details'


def _step(node_id, tool_id, params, depends_on=(), error=None, skipped=False):
    return StepRecord(node_id, tool_id, params, None if error else 'ok', error, 1, depends_on, skipped)


def _log(steps, outcome=Outcome.SUCCESS, text=TEXT, executed_at=3):
    return ExecutionLog(Query(text, 'q1'), tuple(steps), outcome, {'source': 'sim'}, executed_at, 'q1@3')


def test_intent_key_and_generalize_value():
    assert intent_key('Export  Inventory table for EU') == 'export:inventory'
    assert generalize_value('AB-123') == 'aa-###'


@pytest.mark.parametrize('cause', list(FAULTS))
def test_every_fault_classifies_to_its_own_cause(cause):
    _, profile = FAULTS[cause]
    assert classify_root_cause(profile.error_code, profile.message) is cause


def test_root_cause_rules_apply_in_order():
    assert classify_root_cause('500', 'Parameter region rejected') is RootCause.WRONG_PARAMETER
    assert classify_root_cause('500', 'access denied') is RootCause.INSUFFICIENT_PERMISSION
    assert classify_root_cause('500', 'report template not found') is RootCause.TOOL_MISMATCH
    assert classify_root_cause('500', 'branch unimplemented') is RootCause.MISSING_LOGIC
    assert classify_root_cause('500', 'disk full') is RootCause.OTHER
    assert classify_root_cause('401', 'missing step') is RootCause.INSUFFICIENT_PERMISSION


def test_infer_pattern():
    chain = [_step('n1', 'a', {}), _step('n2', 'b', {}, ('n1',))]
    fan = [_step('n1', 'a', {}), _step('n2', 'b', {}, ('n1',)), _step('n3', 'c', {}, ('n1',))]
    branch = chain + [_step('n3', 'c', {}, ('n2',), skipped=True)]
    fan_in = [_step('n1', 'a', {}), _step('n2', 'b', {}), _step('n3', 'c', {}, ('n1', 'n2'))]

    assert infer_pattern(chain) is Pattern.SEQUENTIAL
    assert infer_pattern(fan) is Pattern.PARALLEL
    assert infer_pattern(fan_in) is Pattern.PARALLEL
    assert infer_pattern(branch) is Pattern.CONDITIONAL_BRANCH


def test_extract_workflow_trajectory_marks_bound_nodes():
    log = _log([_step('n1', 'fetch_records', {'source': 'erp', 'region': 'EU', 'page_size': 100}),
                _step('n2', 'filter_rows', {'sku': 'AB123'}, ('n1',)),
                _step('n3', 'export_table', {'format': 'xlsx', 'target': 'archive'}, ('n2',))])

    trajectory = extract_workflow_trajectory(log, EMBEDDING)

    assert trajectory.trajectory_id == 'q1-log3'
    assert [node.is_variable for node in trajectory.nodes] == [True, True, False]
    assert trajectory.pattern is Pattern.SEQUENTIAL
    assert trajectory.metadata.executed_at == 3
    assert trajectory.context == {'source': 'sim'}


def test_extract_workflow_trajectory_rejects_an_empty_log():
    with pytest.raises(EmptyLog):
        extract_workflow_trajectory(_log([]), EMBEDDING)


def test_failure_log_yields_failure_experiences():
    _, profile = FAULTS[RootCause.TOOL_MISMATCH]
    log = _log([_step('n1', 'export_report', {'format': 'pdf', 'target': 'drive'},
                      error=StepError(profile.error_code, profile.message))], Outcome.FAILURE)
    failure = make_trajectory('f1', TEXT, (('export_report', {'format': 'pdf', 'target': 'drive'}),),
                              Outcome.FAILURE)

    experiences = extract_node_experiences(None, failure, [log], 3)

    assert len(experiences) == 1
    lesson = experiences[0]
    assert lesson.polarity is Outcome.FAILURE
    assert lesson.root_cause is RootCause.TOOL_MISMATCH
    assert lesson.fingerprint.tool_id == 'export_report'
    assert lesson.intent_key == 'export:inventory'
    assert lesson.avoidance_note.startswith('pick a tool')
    assert lesson.experience_id.startswith('exp-')


def test_success_against_failure_yields_the_differences():
    steps = (('fetch_records', {'source': 'erp', 'region': 'EU', 'page_size': 500}),
             ('filter_rows', {'sku': 'AB123'}),
             ('export_report', {'format': 'xlsx', 'target': 'archive'}))
    fixed = (('fetch_records', {'source': 'erp', 'region': 'EU', 'page_size': 100}),
             steps[1],
             ('export_table', {'format': 'xlsx', 'target': 'archive'}))
    failure = make_trajectory('f1', TEXT, steps, Outcome.FAILURE)
    success = make_trajectory('s1', TEXT, fixed)

    found = {lesson.best_tool: lesson for lesson in extract_node_experiences(success, failure, [], 4)}

    assert set(found) == {'fetch_records', 'export_table'}
    assert found['export_table'].tool_id == 'export_report'
    assert found['export_table'].avoidance_note == 'use export_table instead of export_report'
    assert found['fetch_records'].schema.example_template['page_size'] == 100


def test_success_alone_yields_one_lesson_per_node():
    success = make_trajectory('s1', TEXT, (('fetch_records', {'source': 'erp', 'region': 'EU', 'page_size': 100}),
                                           ('filter_rows', {'sku': 'AB123'})))
    assert len(extract_node_experiences(success, None, [], 1)) == 2


def test_both_absent_is_an_error():
    with pytest.raises(BothAbsent):
        extract_node_experiences(None, None, [])


def test_induce_parameter_schema():
    schema = induce_parameter_schema([{'sku': 'AB123', 'page_size': 100, 'team': 'T101'},
                                      {'sku': 'CD456', 'page_size': 250},
                                      {'sku': 'EF789', 'page_size': 50, 'team': 'core'}])

    assert schema.required_fields == ('page_size', 'sku')
    assert schema.optional_fields == ('team',)
    assert schema.value_ranges == {'page_size': (50, 250)}
    assert schema.format_constraints == {'sku': 'aa###'}
    assert schema.example_template == {'sku': 'AB123', 'page_size': 100, 'team': 'T101'}

    with pytest.raises(EmptySamples):
        induce_parameter_schema([])


def test_classify_experience():
    fixed = make_trajectory('t1', 'weekly digest', (('aggregate', {'metric': 'units', 'group_by': 'week'}),))
    same = make_trajectory('t2', 'weekly digest', (('aggregate', {'metric': 'units', 'group_by': 'week'}),))
    other = make_trajectory('t3', 'monthly sales digest', (('aggregate', {'metric': 'units', 'group_by': 'week'}),))
    variable = make_trajectory('t4', 'weekly digest', (('aggregate', {'metric': 'units', 'group_by': 'week'}),),
                               variable=(0,))

    def _template(members):
        return TrajectoryTemplate('x', structural_hash(members[0]), members[0].nodes,
                                  tuple(m.trajectory_id for m in members), members[0].trigger_embedding,
                                  ReuseClass.REWRITE_REUSE)

    assert classify_experience(_template([fixed, same]), [fixed.trigger_embedding, same.trigger_embedding]) \
        is ReuseClass.DIRECT_REUSE
    assert classify_experience(_template([fixed, other]), [fixed.trigger_embedding, other.trigger_embedding]) \
        is ReuseClass.REWRITE_REUSE
    assert classify_experience(_template([variable]), [variable.trigger_embedding]) is ReuseClass.REWRITE_REUSE


samples = st.lists(st.fixed_dictionaries({'page_size': st.integers(1, 1000),
                                          'sku': st.from_regex(r'[A-Z]{2}[0-9]{3}', fullmatch=True)},
                                         optional={'team': st.sampled_from(['T101', 'T202', 'core'])}),
                   min_size=1, max_size=8)


@settings(max_examples=100)
@given(samples.flatmap(lambda items: st.tuples(st.just(items), st.permutations(items))))
def test_schema_ignores_sample_order(pair):
    original, shuffled = pair
    first = induce_parameter_schema(original)
    second = induce_parameter_schema(shuffled)

    assert first.required_fields == second.required_fields
    assert first.optional_fields == second.optional_fields
    assert first.value_ranges == second.value_ranges


@settings(max_examples=300)
@given(st.sampled_from(['200', '400', '401', '403', '404', '422', '500', '501', 'E42', '']), st.text(max_size=40))
def test_root_cause_is_total_and_deterministic(code, message):
    cause = classify_root_cause(code, message)
    assert isinstance(cause, RootCause)
    assert classify_root_cause(code, message) is cause


@settings(max_examples=50)
@given(st.lists(st.sampled_from([('filter_rows', {'sku': 'AB123'}), ('lookup_rate', {'currency': 'EUR'}),
                                 ('aggregate', {'metric': 'units', 'group_by': 'week'})]), min_size=1, max_size=4))
def test_success_alone_never_yields_failures(steps):
    success = make_trajectory('s1', TEXT, tuple(steps))
    log = _log([_step(node.node_id, node.tool_id, node.params, node.depends_on) for node in success.nodes])

    lessons = extract_node_experiences(success, None, [log], 1)

    assert lessons
    assert all(lesson.polarity is Outcome.SUCCESS for lesson in lessons)
