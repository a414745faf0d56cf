# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Experience Injected Workflow Generation

Prompt assembly, variable node rewriting, planning from scratch and the
generate, execute, learn loop.
"""

from typing import (Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple)

import json
import logging

from eljef.workflow.lib.backend import (SECTION_AVOIDANCE, SECTION_CATALOG, SECTION_CONTRACT, SECTION_SUCCESS,
                                        SECTION_TASK, GeneratorBackend, GeneratorRequest, Purpose)
from eljef.workflow.lib.embedding import (EmbeddingConfig, embed)
from eljef.workflow.lib.errors import (ExhaustedIterations, GenerationError, NotVariableNode, SchemaViolation,
                                       UnknownToolInPlan, UnparsablePlan)
from eljef.workflow.lib.execution import (ExecutionEnv, ToolRegistry)
from eljef.workflow.lib.extraction import (ExecutionLog, extract_node_experiences, generalize_value, intent_key,
                                           is_number, mark_variable_nodes, record_outcome)
from eljef.workflow.lib.model import (ZERO_LEDGER, Metadata, NodeExperience, Outcome, ParameterSchema, Pattern,
                                      Query, TokenLedger, Trajectory, TrajectoryTemplate, Violation, WorkflowNode,
                                      is_slot_marker, validate)
from eljef.workflow.lib.store import ExperienceStore

LOGGER = logging.getLogger(__name__)

ADHOC_TEMPLATE = 'adhoc'
"""Template id used in slots of nodes that belong to no stored template."""

DEFAULT_MAX_ITERS = 3

NODE_AVOIDANCE_CAP = 3
PLAN_AVOIDANCE_CAP = 8
SUCCESS_CAP = 3


class GenerationResult(NamedTuple):
    """Outcome of iterative_generate.

    Attributes:
        trajectory (Trajectory): stored successful trajectory
        log (ExecutionLog): its execution log
        ledger (TokenLedger): tokens over every attempt
        wall_steps (int): executed steps over every attempt
        executions (int): number of executions
    """
    trajectory: Trajectory
    log: ExecutionLog
    ledger: TokenLedger
    wall_steps: int
    executions: int


def _recent_first(experiences: Iterable[NodeExperience], polarity: Outcome) -> List[NodeExperience]:
    unique = {}
    for experience in experiences:
        if experience.polarity is polarity:
            unique.setdefault(experience.experience_id, experience)
    return sorted(unique.values(), key=lambda e: (-e.recorded_at, e.experience_id))


def _avoidance_line(experience: NodeExperience) -> str:
    fingerprint = experience.fingerprint
    return f"- [{fingerprint.tool_id}/{fingerprint.error_code}] {experience.avoidance_note}"


def _contract_schema(tool_id: str, intent: str, successes: Sequence[NodeExperience]) -> Optional[ParameterSchema]:
    usable = [experience for experience in successes if experience.best_tool == tool_id and experience.schema]
    for experience in usable:
        if experience.intent_key == intent:
            return experience.schema
    return usable[0].schema if usable else None


def _schema_lines(schema: ParameterSchema) -> List[str]:
    lines = []
    if schema.required_fields:
        lines.append(f"required: {', '.join(schema.required_fields)}")
    if schema.format_constraints:
        lines.append('formats: ' + ', '.join(f"{name}={pattern}"
                                             for name, pattern in sorted(schema.format_constraints.items())))
    return lines


def assemble_prompt(node: WorkflowNode, experiences: Sequence[NodeExperience], query: Query,
                    template_id: str = ADHOC_TEMPLATE) -> GeneratorRequest:
    """Builds the rewrite request for one variable node.

    Sections, in order: task, node contract, success paradigms (most recent
    first, at most 3) and failure avoidance (at most 3). Empty experience
    sections are left out.

    Args:
        node: variable node to fill
        experiences: node experiences to inject
        query: query being served
        template_id: template the node belongs to

    Returns:
        RewriteNode GeneratorRequest

    Raises:
        NotVariableNode: node is fixed
    """
    if not node.is_variable:
        raise NotVariableNode(f"node {node.node_id} is not variable")

    intent = intent_key(query.text)
    successes = _recent_first(experiences, Outcome.SUCCESS)
    failures = _recent_first(experiences, Outcome.FAILURE)
    schema = _contract_schema(node.tool_id, intent, successes)
    slots = node.slot_names()

    contract = [f"tool: {node.tool_id}", f"slots: {', '.join(slots) if slots else 'none'}"]
    if schema:
        contract.extend(_schema_lines(schema))

    sections = [(SECTION_TASK, query.text), (SECTION_CONTRACT, '\n'.join(contract))]
    if successes:
        sections.append((SECTION_SUCCESS, '\n'.join(f"- {e.intent_key}: {e.avoidance_note}"
                                                    for e in successes[:SUCCESS_CAP])))
    if failures:
        sections.append((SECTION_AVOIDANCE, '\n'.join(_avoidance_line(e) for e in failures[:NODE_AVOIDANCE_CAP])))

    return GeneratorRequest(Purpose.REWRITE_NODE, tuple(sections), schema, (template_id, node.node_id), tuple(slots),
                            node.tool_id)


def assemble_plan_prompt(query: Query, tools: ToolRegistry,
                         experiences: Sequence[NodeExperience] = ()) -> GeneratorRequest:
    """Builds the full plan request.

    Sections, in order: task, tool catalog, success paradigms (at most 3) and
    failure avoidance (distinct fingerprints, at most 8).
    """
    catalog = []
    for spec in tools.tools():
        fields = ', '.join(spec.param_schema.required_fields) or 'nothing'
        line = f"- {spec.tool_id}: {spec.description or spec.tool_id} (requires {fields}"
        if spec.param_schema.optional_fields:
            line += f"; optional {', '.join(spec.param_schema.optional_fields)}"
        catalog.append(line + ')')

    successes = _recent_first(experiences, Outcome.SUCCESS)
    seen = set()
    failures = []
    for experience in _recent_first(experiences, Outcome.FAILURE):
        if experience.fingerprint not in seen:
            seen.add(experience.fingerprint)
            failures.append(experience)

    sections = [(SECTION_TASK, query.text), (SECTION_CATALOG, '\n'.join(catalog))]
    if successes:
        sections.append((SECTION_SUCCESS, '\n'.join(f"- {e.intent_key} uses {e.best_tool}"
                                                    for e in successes[:SUCCESS_CAP])))
    if failures:
        sections.append((SECTION_AVOIDANCE, '\n'.join(_avoidance_line(e) for e in failures[:PLAN_AVOIDANCE_CAP])))

    return GeneratorRequest(Purpose.FULL_PLAN, tuple(sections))


def node_experiences(store: ExperienceStore, node: WorkflowNode, query: Query) -> List[NodeExperience]:
    """Experiences relevant to rewriting one node.

    Success lessons whose best tool is the node's tool and failure lessons
    about the node's tool, from both the tool and the intent indexes.
    """
    found = store.experiences_for_tool(node.tool_id) + store.lookup_experiences(intent_key(query.text))
    relevant = []
    for experience in found:
        if experience.polarity is Outcome.SUCCESS and experience.best_tool == node.tool_id:
            relevant.append(experience)
        elif experience.polarity is Outcome.FAILURE and experience.fingerprint.tool_id == node.tool_id:
            relevant.append(experience)
    return relevant


def plan_experiences(store: ExperienceStore, query: Query) -> List[NodeExperience]:
    """Experiences injected into a full plan: the intent's successes plus the latest distinct failures."""
    successes = [experience for experience in store.lookup_experiences(intent_key(query.text))
                 if experience.polarity is Outcome.SUCCESS]
    return successes + store.failure_experiences(PLAN_AVOIDANCE_CAP)


def _payload_problems(data: Dict[str, Any], request: GeneratorRequest) -> List[str]:
    problems = []
    schema = request.constraints
    for name in request.slot_params:
        if name not in data:
            problems.append(f"{name}: no value generated")
            continue
        value = data[name]
        if schema is None:
            continue
        if name in schema.format_constraints:
            if not isinstance(value, str) or generalize_value(value) != schema.format_constraints[name]:
                problems.append(f"{name}: expected format {schema.format_constraints[name]}")
        if name in schema.value_ranges:
            low, high = schema.value_ranges[name]
            if not is_number(value) or not low <= value <= high:
                problems.append(f"{name}: outside range [{low}, {high}]")
    return problems


def _merge_payload(node: WorkflowNode, payload: str, request: GeneratorRequest) -> Tuple[Dict[str, Any], List[str]]:
    try:
        data = json.loads(payload)
    except ValueError:
        data = None
    if not isinstance(data, dict):
        return dict(node.params), ['payload: not a JSON object']

    params = dict(node.params)
    for name, value in data.items():
        if name in params:
            params[name] = value

    problems = _payload_problems(data, request)
    if request.constraints:
        problems.extend(f"{name}: required field missing" for name in request.constraints.required_fields
                        if name not in params)
    problems.extend(f"{name}: slot left unfilled" for name, value in sorted(params.items()) if is_slot_marker(value))
    return params, problems


def _with_problems(request: GeneratorRequest, problems: List[str]) -> GeneratorRequest:
    lines = '\n'.join(f"- [schema/{problem.split(':', 1)[0]}] {problem}" for problem in problems)
    sections = []
    appended = False
    for label, text in request.prompt_sections:
        if label == SECTION_AVOIDANCE:
            text = f"{text}\n{lines}"
            appended = True
        sections.append((label, text))
    if not appended:
        sections.append((SECTION_AVOIDANCE, lines))
    return request._replace(prompt_sections=tuple(sections))


def _fill_node(node: WorkflowNode, request: GeneratorRequest,
               backend: GeneratorBackend) -> Tuple[Dict[str, Any], TokenLedger]:
    ledger = ZERO_LEDGER
    problems = []
    for ask in range(2):
        if ask:
            LOGGER.debug("re-asking for node %s: %s", node.node_id, '; '.join(problems))
            request = _with_problems(request, problems)
        response = backend.generate(request)
        ledger = ledger.add(response.ledger)
        params, problems = _merge_payload(node, response.payload, request)
        if not problems:
            return params, ledger

    error = SchemaViolation(node.node_id, problems)
    error.ledger = ledger
    raise error


def _new_trajectory(trajectory_id: str, query: Query, cfg: EmbeddingConfig, nodes: Tuple[WorkflowNode, ...],
                    pattern: Pattern, context: Dict[str, str]) -> Trajectory:
    return Trajectory(trajectory_id, query, embed(query.text, cfg), nodes, pattern, context,
                      Metadata(0, Outcome.FAILURE))


def rewrite_trajectory(template: TrajectoryTemplate, query: Query, backend: GeneratorBackend, store: ExperienceStore,
                       trajectory_id: str = None) -> Tuple[Trajectory, TokenLedger]:
    """Fills a template's variable nodes for a new query.

    Fixed nodes are copied verbatim and each variable node costs exactly one
    generator call, plus one re-ask when the answer breaks the node schema.

    Args:
        template: template to rewrite
        query: query being served
        backend: generator
        store: experience source
        trajectory_id: id of the new trajectory, defaults to ``<query id>-b1``

    Returns:
        (trajectory, ledger) where the trajectory keeps the template's structural hash

    Raises:
        GeneratorFailure: the backend failed
        SchemaViolation: a node answer broke its schema twice
    """
    ledger = ZERO_LEDGER
    nodes = []
    for node in template.skeleton:
        if not node.is_variable:
            nodes.append(node)
            continue
        request = assemble_prompt(node, node_experiences(store, node, query), query, template.template_id)
        try:
            params, used = _fill_node(node, request, backend)
        except GenerationError as err:
            err.ledger = ledger.add(err.ledger or ZERO_LEDGER)
            raise
        ledger = ledger.add(used)
        nodes.append(node._replace(params=params, generated_by_model=True))

    context = {'generated_by': 'rewrite', 'template_id': template.template_id}
    trajectory = _new_trajectory(trajectory_id or f"{query.query_id}-b1", query, store.embedding_cfg, tuple(nodes),
                                 template.pattern, context)
    LOGGER.debug("rewrote template %s for %s with %d call(s)", template.template_id, query.query_id,
                 ledger.generator_calls)
    return trajectory, ledger


def _parse_plan(payload: str, tools: ToolRegistry) -> Tuple[Pattern, Tuple[WorkflowNode, ...]]:
    try:
        data = json.loads(payload)
    except ValueError as err:
        raise UnparsablePlan(f"plan is not JSON: {err}") from err
    if not isinstance(data, dict) or not isinstance(data.get('nodes'), list) or not data['nodes']:
        raise UnparsablePlan("plan must be an object with a non-empty nodes list")

    try:
        pattern = Pattern(data.get('pattern', Pattern.SEQUENTIAL.value))
    except ValueError as err:
        raise UnparsablePlan(f"unknown plan pattern: {data.get('pattern')}") from err

    nodes = []
    for item in data['nodes']:
        if not isinstance(item, dict) or not isinstance(item.get('node_id'), str) \
                or not isinstance(item.get('tool_id'), str) or not isinstance(item.get('params', {}), dict):
            raise UnparsablePlan(f"malformed plan node: {item}")
        if item['tool_id'] not in tools:
            raise UnknownToolInPlan(item['tool_id'])
        nodes.append(WorkflowNode(item['node_id'], item['tool_id'], dict(item.get('params', {})),
                                  generated_by_model=True, depends_on=tuple(item.get('depends_on', ()))))

    return pattern, tuple(nodes)


def plan_from_scratch(query: Query, backend: GeneratorBackend, tools: ToolRegistry,
                      experiences: Sequence[NodeExperience] = (), embedding_cfg: EmbeddingConfig = EmbeddingConfig(),
                      trajectory_id: str = None) -> Tuple[Trajectory, TokenLedger]:
    """Plans a whole trajectory with a single generator call.

    Args:
        query: query being served
        backend: generator
        tools: registered tools the plan may use
        experiences: node experiences to inject
        embedding_cfg: embedding settings for the trigger
        trajectory_id: id of the new trajectory, defaults to ``<query id>-c1``

    Returns:
        (trajectory, ledger), every node marked generated_by_model

    Raises:
        GeneratorFailure: the backend failed
        UnparsablePlan: the payload is not a valid plan
        UnknownToolInPlan: the plan names an unregistered tool
    """
    if len(tools) == 0:
        raise ValueError("cannot plan against an empty tool registry")

    request = assemble_plan_prompt(query, tools, experiences)
    response = backend.generate(request)
    try:
        pattern, nodes = _parse_plan(response.payload, tools)
        trajectory = _new_trajectory(trajectory_id or f"{query.query_id}-c1", query, embedding_cfg,
                                     mark_variable_nodes(nodes, query.text), pattern, {'generated_by': 'plan'})
        violations = [v for v in validate(trajectory) if v is not Violation.EMBEDDING_NOT_NORMALIZED]
        if violations:
            raise UnparsablePlan(f"plan breaks trajectory rules: {', '.join(v.value for v in violations)}")
    except GenerationError as err:
        err.ledger = response.ledger
        raise

    return trajectory, response.ledger


def _link_failures(trajectory: Trajectory, log: ExecutionLog, experiences: List[NodeExperience]) -> Trajectory:
    failed = log.failed_step()
    if failed is None:
        return trajectory
    refs = tuple(experience.experience_id for experience in experiences
                 if experience.fingerprint and experience.fingerprint.tool_id == failed.tool_id)
    nodes = tuple(node._replace(experience_refs=tuple(dict.fromkeys(node.experience_refs + refs)))
                  if node.node_id == failed.node_id else node for node in trajectory.nodes)
    return trajectory._replace(nodes=nodes)


def iterative_generate(query: Query, template: Optional[TrajectoryTemplate], backend: GeneratorBackend,
                       store: ExperienceStore, env: ExecutionEnv, max_iters: int = DEFAULT_MAX_ITERS,
                       theta_a: float = 0.9) -> GenerationResult:
    """Generates, executes and learns until a trajectory succeeds.

    Rewrites the template when one is given, otherwise plans from scratch.
    Every failed attempt is stored with its failure experiences before the
    next attempt. A rewrite is retried only when the failing node is
    variable. The first success is stored with its experiences and the
    templates are re-clustered.

    Args:
        query: query being served
        template: template to rewrite, None to plan from scratch
        backend: generator
        store: experience store
        env: execution environment
        max_iters: attempt bound, at least 1
        theta_a: direct reuse threshold used when re-clustering

    Returns:
        GenerationResult of the first success

    Raises:
        ExhaustedIterations: no attempt succeeded
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")

    mode = 'b' if template is not None else 'c'
    ledger = ZERO_LEDGER
    wall_steps = 0
    executions = 0
    last_failure = None
    last_log = None

    for attempt in range(1, max_iters + 1):
        trajectory_id = f"{query.query_id}-{mode}{attempt}"
        try:
            if template is not None:
                trajectory, used = rewrite_trajectory(template, query, backend, store, trajectory_id)
            else:
                trajectory, used = plan_from_scratch(query, backend, env.registry, plan_experiences(store, query),
                                                     store.embedding_cfg, trajectory_id)
        except GenerationError as err:
            LOGGER.warning("%s: generation failed: %s", trajectory_id, err)
            ledger = ledger.add(err.ledger or ZERO_LEDGER)
            break

        ledger = ledger.add(used)
        log = env.execute(trajectory)
        executions += 1
        wall_steps += len(log.steps)
        context = {'rollback_note': f"supersedes {last_failure.trajectory_id}"} if last_failure else {}
        executed = record_outcome(trajectory, log, context)

        if log.outcome is Outcome.SUCCESS:
            store.put_experiences(extract_node_experiences(executed, last_failure, [log], log.executed_at))
            store.put_trajectory(executed)
            store.cluster_templates(theta_a)
            if template is not None:
                store.record_template_outcome(template.template_id, True)
            LOGGER.debug("%s succeeded after %d attempt(s)", trajectory_id, attempt)
            return GenerationResult(store.get_trajectory(executed.trajectory_id), log, ledger, wall_steps, executions)

        experiences = extract_node_experiences(None, executed, [log], log.executed_at)
        store.put_experiences(experiences)
        executed = _link_failures(executed, log, experiences)
        store.put_trajectory(executed)
        last_failure = store.get_trajectory(executed.trajectory_id)
        last_log = log

        if template is not None:
            store.record_template_outcome(template.template_id, False)
            failed = template_node(template, log.failed_step().node_id)
            if failed is None or not failed.is_variable:
                LOGGER.debug("%s failed on fixed node, rewriting cannot repair it", trajectory_id)
                break

    raise ExhaustedIterations(last_log, last_failure, ledger, wall_steps, executions)


def template_node(template: TrajectoryTemplate, node_id: str) -> Optional[WorkflowNode]:
    """Skeleton node with the given id, or None."""
    for node in template.skeleton:
        if node.node_id == node_id:
            return node
    return None
