# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Experience Extraction

Turns execution logs into trajectories and node level experiences, and
classifies how templates may be reused.
"""

from typing import (Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple)

import logging

from eljef.workflow.lib.embedding import (EmbeddingConfig, cosine_similarity, embed, tokenize)
from eljef.workflow.lib.errors import (BothAbsent, EmptyLog, EmptySamples)
from eljef.workflow.lib.model import (NodeExperience, Outcome, ParameterSchema, Pattern, Query,
                                      ReuseClass, RootCause, Trajectory, TrajectoryTemplate, WorkflowNode, Metadata,
                                      canonical_json, fingerprint_error, fnv1a_64)

LOGGER = logging.getLogger(__name__)

SKIPPED_OUTPUT = 'skipped'
"""Output recorded for a step skipped by its condition."""

_AVOIDANCE_PHRASES = {
    RootCause.WRONG_PARAMETER: 'check parameter values against the tool schema before calling',
    RootCause.INSUFFICIENT_PERMISSION: 'request the least privileged scope that still covers the call',
    RootCause.TOOL_MISMATCH: 'pick a tool whose capability matches the step',
    RootCause.MISSING_LOGIC: 'add the missing preparatory field or step before this call',
    RootCause.OTHER: 'inspect the tool output and retry with adjusted inputs',
}

_SUCCESS_NOTE = 'reuse {tool} with these parameters'
_MAPPING_NOTE = 'use {best} instead of {tool}'


class StepError(NamedTuple):
    """Error returned by a tool call.

    Attributes:
        code (str): return code
        message (str): error text
    """
    code: str
    message: str


class StepRecord(NamedTuple):
    """One executed (or skipped) node.

    Attributes:
        node_id (str): node that ran
        tool_id (str): tool that was called
        params (dict): parameters passed
        output (str): tool output, None on error
        error (StepError): error record, None on success
        duration_units (int): simulated duration
        depends_on (tuple): node ids the step depended on
        skipped (bool): step was skipped by a recorded condition
    """
    node_id: str
    tool_id: str
    params: Dict[str, Any]
    output: Optional[str] = None
    error: Optional[StepError] = None
    duration_units: int = 0
    depends_on: Tuple[str, ...] = ()
    skipped: bool = False

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'depends_on': list(self.depends_on),
            'duration_units': self.duration_units,
            'error': {'code': self.error.code, 'message': self.error.message} if self.error else None,
            'node_id': self.node_id,
            'output': self.output,
            'params': dict(self.params),
            'skipped': self.skipped,
            'tool_id': self.tool_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> 'StepRecord':
        """Builds a step from its canonical dictionary form."""
        error = StepError(str(data['error']['code']), data['error']['message']) if data.get('error') else None
        return cls(data['node_id'], data['tool_id'], dict(data.get('params', {})), data.get('output'), error,
                   int(data.get('duration_units', 0)), tuple(data.get('depends_on', ())),
                   bool(data.get('skipped', False)))


class ExecutionLog(NamedTuple):
    """Record of one trajectory execution.

    Attributes:
        query (Query): query the trajectory answers
        steps (tuple): StepRecords in execution order
        outcome (Outcome): Failure iff a step has an error
        context (dict): execution context strings
        executed_at (int): logical tick of the execution
        log_id (str): identifier of the execution
    """
    query: Query
    steps: Tuple[StepRecord, ...]
    outcome: Outcome
    context: Dict[str, str]
    executed_at: int = 0
    log_id: str = ''

    def failed_step(self) -> Optional[StepRecord]:
        """First step carrying an error, or None."""
        for step in self.steps:
            if step.error:
                return step
        return None

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'context': dict(self.context),
            'executed_at': self.executed_at,
            'log_id': self.log_id,
            'outcome': self.outcome.value,
            'query': self.query.to_json(),
            'steps': [step.to_json() for step in self.steps],
        }

    @classmethod
    def from_json(cls, data: dict) -> 'ExecutionLog':
        """Builds a log from its canonical dictionary form."""
        return cls(Query.from_json(data['query']), tuple(StepRecord.from_json(step) for step in data['steps']),
                   Outcome(data['outcome']), dict(data.get('context', {})), int(data.get('executed_at', 0)),
                   data.get('log_id', ''))


def intent_key(text: str) -> str:
    """Lowercase first two tokens of a query joined by ``:``."""
    return ':'.join(tokenize(text)[:2])


def generalize_value(value: str) -> str:
    """Generalizes a string to a format pattern, digits to ``#`` and letters to ``a``."""
    return ''.join('#' if char.isdigit() else 'a' if char.isalpha() else char for char in value)


def is_number(value: Any) -> bool:
    """True for int and float values, False for booleans."""
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def classify_root_cause(code: str, message: str) -> RootCause:
    """Maps an error to its root cause category, first matching rule wins.

    ======================================================  ======================
    rule                                                    category
    ======================================================  ======================
    code 400/422 or message mentions "param"                WrongParameter
    code 401/403 or message mentions permission/denied      InsufficientPermission
    code 404 or message mentions "no such tool"/not found   ToolMismatch
    message mentions "unimplemented"/"missing step"         MissingLogic
    anything else                                           Other
    ======================================================  ======================
    """
    code = str(code).strip()
    text = (message or '').lower()

    if code in ('400', '422') or 'param' in text:
        return RootCause.WRONG_PARAMETER
    if code in ('401', '403') or 'permission' in text or 'denied' in text:
        return RootCause.INSUFFICIENT_PERMISSION
    if code == '404' or 'no such tool' in text or 'not found' in text:
        return RootCause.TOOL_MISMATCH
    if 'unimplemented' in text or 'missing step' in text:
        return RootCause.MISSING_LOGIC

    return RootCause.OTHER


def avoidance_phrase(root_cause: RootCause) -> str:
    """Fixed guidance phrase for a root cause."""
    return _AVOIDANCE_PHRASES[root_cause]


def infer_pattern(steps: Sequence[StepRecord]) -> Pattern:
    """Infers the execution pattern of a sequence of steps.

    Any skipped step makes a ConditionalBranch. A strict chain, each step
    depending only on the one before it, is Sequential. Every other
    dependency shape, fan-out and fan-in included, falls back to Parallel.
    """
    if any(step.skipped for step in steps):
        return Pattern.CONDITIONAL_BRANCH

    for index, step in enumerate(steps):
        expected = () if index == 0 else (steps[index - 1].node_id,)
        if tuple(step.depends_on) != expected:
            return Pattern.PARALLEL

    return Pattern.SEQUENTIAL


def mark_variable_nodes(nodes: Iterable[WorkflowNode], text: str) -> Tuple[WorkflowNode, ...]:
    """Marks nodes whose string parameters are bound to entities in the query.

    A node is variable when any string parameter value consists only of
    tokens that also appear in the query.
    """
    query_tokens = set(tokenize(text))
    marked = []
    for node in nodes:
        bound = any(_value_bound(value, query_tokens) for value in node.params.values())
        marked.append(node._replace(is_variable=node.is_variable or bound))

    return tuple(marked)


def _value_bound(value: Any, query_tokens: set) -> bool:
    if not isinstance(value, str):
        return False
    tokens = tokenize(value)
    return bool(tokens) and all(token in query_tokens for token in tokens)


def bound_params(node: WorkflowNode, text: str) -> List[str]:
    """Names of a node's parameters whose values are bound to the query text."""
    query_tokens = set(tokenize(text))
    return sorted(name for name, value in node.params.items() if _value_bound(value, query_tokens))


def record_outcome(trajectory: Trajectory, log: ExecutionLog, context: Dict[str, str] = None) -> Trajectory:
    """Returns the trajectory with outcome, tick and context taken from its execution log.

    Args:
        trajectory: the trajectory that was executed
        log: its execution log
        context: extra context strings to merge
    """
    merged = dict(trajectory.context)
    merged.update(log.context)
    merged.update(context or {})
    metadata = trajectory.metadata._replace(executed_at=log.executed_at, outcome=log.outcome)
    return trajectory._replace(context=merged, metadata=metadata)


def extract_workflow_trajectory(log: ExecutionLog, cfg: EmbeddingConfig, trajectory_id: str = None) -> Trajectory:
    """Builds a trajectory from an execution log.

    Args:
        log: log to convert
        cfg: embedding settings for the trigger
        trajectory_id: id for the new trajectory, defaults to ``<query id>-log<tick>``

    Returns:
        One node per step, preserving order and dependencies.

    Raises:
        EmptyLog: log has no steps
    """
    if not log.steps:
        raise EmptyLog(f"execution log {log.log_id or log.query.query_id} has no steps")

    nodes = tuple(WorkflowNode(step.node_id, step.tool_id, dict(step.params), depends_on=tuple(step.depends_on))
                  for step in log.steps)
    nodes = mark_variable_nodes(nodes, log.query.text)

    return Trajectory(trajectory_id or f"{log.query.query_id}-log{log.executed_at}", log.query,
                      embed(log.query.text, cfg), nodes, infer_pattern(log.steps), dict(log.context),
                      Metadata(log.executed_at, log.outcome))


def experience_digest(experience: NodeExperience) -> str:
    """Content digest of an experience, ignoring its id and tick."""
    data = experience.to_json()
    del data['experience_id']
    del data['recorded_at']
    return f"exp-{fnv1a_64(canonical_json(data).encode('utf-8')):016x}"


def _finish(experience: NodeExperience) -> NodeExperience:
    return experience._replace(experience_id=experience_digest(experience))


def _failure_experience(step: StepRecord, intent: str, recorded_at: int) -> NodeExperience:
    cause = classify_root_cause(step.error.code, step.error.message)
    note = f"{avoidance_phrase(cause)}; {step.tool_id} returned {step.error.code}: {step.error.message}"
    return _finish(NodeExperience('', fingerprint_error(step.tool_id, step.error.code, step.error.message), cause,
                                  intent, None, None, note, Outcome.FAILURE, step.tool_id, recorded_at))


def _success_experience(node: WorkflowNode, intent: str, tool_id: str, recorded_at: int) -> NodeExperience:
    if tool_id != node.tool_id:
        note = _MAPPING_NOTE.format(best=node.tool_id, tool=tool_id)
    else:
        note = _SUCCESS_NOTE.format(tool=node.tool_id)
    schema = induce_parameter_schema([node.params]) if node.params else None
    return _finish(NodeExperience('', None, RootCause.OTHER, intent, node.tool_id, schema, note, Outcome.SUCCESS,
                                  tool_id, recorded_at))


def extract_node_experiences(success: Optional[Trajectory], failure: Optional[Trajectory],
                             logs: Iterable[ExecutionLog], recorded_at: int = 0) -> List[NodeExperience]:
    """Extracts node level lessons by comparing a success with a failure.

    Every errored step in ``logs`` yields a Failure experience. A success on
    its own yields one Success experience per node. A success paired with a
    failure yields Success experiences only where the two differ at the same
    position: a different tool (a tool mapping) or different parameters (a
    parameter fix).

    Args:
        success: successful trajectory, or None
        failure: failed trajectory, or None
        logs: execution logs of the trajectories
        recorded_at: logical tick to stamp on the experiences

    Returns:
        Experiences with duplicate content collapsed.

    Raises:
        BothAbsent: success and failure are both None
    """
    if success is None and failure is None:
        raise BothAbsent("need a success or a failure trajectory")

    found = []
    for log in logs:
        intent = intent_key(log.query.text)
        for step in log.steps:
            if step.error:
                found.append(_failure_experience(step, intent, recorded_at))

    if success is not None:
        intent = intent_key(success.trigger.text)
        for index, node in enumerate(success.nodes):
            if failure is None:
                found.append(_success_experience(node, intent, node.tool_id, recorded_at))
                continue
            failed = failure.nodes[index] if index < len(failure.nodes) else None
            if failed is None or failed.tool_id != node.tool_id:
                found.append(_success_experience(node, intent, failed.tool_id if failed else node.tool_id,
                                                 recorded_at))
            elif failed.params != node.params:
                found.append(_success_experience(node, intent, node.tool_id, recorded_at))

    unique = {}
    for experience in found:
        unique.setdefault(experience.experience_id, experience)

    LOGGER.debug("extracted %d experience(s)", len(unique))
    return list(unique.values())


def induce_parameter_schema(samples: Sequence[Dict[str, Any]]) -> ParameterSchema:
    """Induces a parameter schema from successful parameter maps of one tool.

    Args:
        samples: parameter maps

    Returns:
        required fields present in every sample, ranges for numeric fields,
        a format pattern for string fields whose samples all share one, and
        the first sample as example.

    Raises:
        EmptySamples: no samples given
    """
    if not samples:
        raise EmptySamples("schema induction needs at least one sample")

    names = set()
    for sample in samples:
        names.update(sample)
    required = sorted(name for name in names if all(name in sample for sample in samples))
    optional = sorted(names - set(required))

    ranges = {}
    formats = {}
    for name in sorted(names):
        values = [sample[name] for sample in samples if name in sample]
        if all(is_number(value) for value in values):
            ranges[name] = (min(values), max(values))
        elif all(isinstance(value, str) for value in values):
            patterns = {generalize_value(value) for value in values}
            if len(patterns) == 1:
                formats[name] = patterns.pop()

    return ParameterSchema(tuple(required), tuple(optional), formats, ranges, dict(samples[0]))


def classify_experience(template: TrajectoryTemplate, triggers: Sequence, theta_a: float = 0.9) -> ReuseClass:
    """Classifies a template as direct reuse or rewrite reuse.

    Args:
        template: template to classify
        triggers: member trigger EmbeddingVectors, or a store holding the members
        theta_a: direct reuse similarity threshold

    Returns:
        DirectReuse when the skeleton has no variable nodes and every pair of
        member triggers reaches theta_a, otherwise RewriteReuse.
    """
    if hasattr(triggers, 'get_trajectory'):
        triggers = [triggers.get_trajectory(member).trigger_embedding for member in template.member_ids]

    if template.variable_nodes():
        return ReuseClass.REWRITE_REUSE

    lowest = 1.0
    for index, left in enumerate(triggers):
        for right in triggers[index + 1:]:
            lowest = min(lowest, cosine_similarity(left, right))

    return ReuseClass.DIRECT_REUSE if lowest >= theta_a else ReuseClass.REWRITE_REUSE

