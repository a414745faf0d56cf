# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Shared Workflow Domain Types

Every record here is an immutable value object. Maps held inside a record are
never mutated after construction; functions that change a record build a new
one with ``_replace``.
"""

from enum import Enum
from typing import (Any, Dict, Iterable, List, NamedTuple, Optional, Tuple)

import json
import math
import re

CANONICAL_SEPARATORS = (',', ':')
"""Separators used for every byte-reproducible JSON line."""

SLOT_MARKER = '{{{{slot:{0}}}}}'
"""Format string for a template slot marker."""

_FNV_OFFSET = 0xcbf29ce484222325
_FNV_PRIME = 0x100000001b3
_MASK64 = 0xffffffffffffffff

_DIGIT_RUNS = re.compile(r'\d+')
_SLOT_RE = re.compile(r'^\{\{slot:([^}]+)\}\}$')
_WHITESPACE_RUNS = re.compile(r'\s+')


class Outcome(Enum):
    """Execution outcome"""
    SUCCESS = 'Success'
    FAILURE = 'Failure'


class Pattern(Enum):
    """Execution pattern of a trajectory"""
    SEQUENTIAL = 'Sequential'
    CONDITIONAL_BRANCH = 'ConditionalBranch'
    PARALLEL = 'Parallel'


class RootCause(Enum):
    """Root cause category of a failed step"""
    WRONG_PARAMETER = 'WrongParameter'
    INSUFFICIENT_PERMISSION = 'InsufficientPermission'
    TOOL_MISMATCH = 'ToolMismatch'
    MISSING_LOGIC = 'MissingLogic'
    OTHER = 'Other'


class ReuseClass(Enum):
    """How a template may be reused"""
    DIRECT_REUSE = 'DirectReuse'
    REWRITE_REUSE = 'RewriteReuse'


class Tier(Enum):
    """Similarity tier annotation set by the workload generator"""
    HIGH = 'High'
    MEDIUM = 'Medium'
    NOVEL = 'Novel'


class Violation(Enum):
    """Trajectory invariant violations reported by validate()"""
    NODES_EMPTY = 'NodesEmpty'
    EMPTY_TRIGGER = 'EmptyTrigger'
    DUPLICATE_NODE_ID = 'DuplicateNodeId'
    UNKNOWN_DEPENDENCY = 'UnknownDependency'
    FORWARD_DEPENDENCY = 'ForwardDependency'
    SEQUENTIAL_CHAIN_BROKEN = 'SequentialChainBroken'
    EMBEDDING_NOT_NORMALIZED = 'EmbeddingNotNormalized'
    INVALID_VERSION = 'InvalidVersion'
    NEGATIVE_COUNTER = 'NegativeCounter'
    UNRESOLVED_EXPERIENCE_REF = 'UnresolvedExperienceRef'


def _enum_or_none(enum_type, value):
    return enum_type(value) if value is not None else None


def _value_of(value):
    return value.value if isinstance(value, Enum) else value


class Query(NamedTuple):
    """A natural language user query.

    Attributes:
        text (str): query text
        query_id (str): unique identifier, serialized as ``id``
        tier_hint (Tier): harness annotation, never read by the engine
    """
    text: str
    query_id: str
    tier_hint: Optional[Tier] = None

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'id': self.query_id, 'text': self.text, 'tier_hint': _value_of(self.tier_hint)}

    @classmethod
    def from_json(cls, data: dict) -> 'Query':
        """Builds a Query from its canonical dictionary form."""
        return cls(data['text'], data['id'], _enum_or_none(Tier, data.get('tier_hint')))


class EmbeddingVector(NamedTuple):
    """Fixed length query embedding.

    Attributes:
        values (tuple): vector components
    """
    values: Tuple[float, ...]

    @property
    def dimension(self) -> int:
        """Number of components."""
        return len(self.values)

    def norm(self) -> float:
        """L2 norm of the vector."""
        return math.sqrt(math.fsum(v * v for v in self.values))

    def is_zero(self) -> bool:
        """True for the designated zero vector."""
        return not any(self.values)

    def to_json(self) -> list:
        """Returns the canonical list form."""
        return list(self.values)

    @classmethod
    def from_json(cls, data: list) -> 'EmbeddingVector':
        """Builds a vector from its canonical list form."""
        return cls(tuple(float(v) for v in data))


class WorkflowNode(NamedTuple):
    """Smallest reusable unit of a workflow.

    Attributes:
        node_id (str): identifier unique within the trajectory
        tool_id (str): identifier into the tool registry
        params (dict): parameter name to scalar value
        is_variable (bool): node content changes across similar queries
        generated_by_model (bool): node was produced by the generator
        experience_refs (tuple): NodeExperience ids linked to this node
        depends_on (tuple): node ids this node depends on
    """
    node_id: str
    tool_id: str
    params: Dict[str, Any]
    is_variable: bool = False
    generated_by_model: bool = False
    experience_refs: Tuple[str, ...] = ()
    depends_on: Tuple[str, ...] = ()

    def slot_names(self) -> List[str]:
        """Names of params that currently hold slot markers, sorted."""
        return sorted(name for name, value in self.params.items() if is_slot_marker(value))

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'depends_on': list(self.depends_on),
            'experience_refs': list(self.experience_refs),
            'generated_by_model': self.generated_by_model,
            'is_variable': self.is_variable,
            'node_id': self.node_id,
            'params': dict(self.params),
            'tool_id': self.tool_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> 'WorkflowNode':
        """Builds a node from its canonical dictionary form."""
        return cls(data['node_id'], data['tool_id'], dict(data.get('params', {})),
                   bool(data.get('is_variable', False)), bool(data.get('generated_by_model', False)),
                   tuple(data.get('experience_refs', ())), tuple(data.get('depends_on', ())))


class Metadata(NamedTuple):
    """Trajectory bookkeeping.

    Attributes:
        executed_at (int): logical execution tick
        outcome (Outcome): Success or Failure
        version_id (int): revision number, starts at 1
        compatibility_tags (tuple): free form tags such as ``merged:<id>``
        usage_count (int): number of recorded reuses
        priority (int): retrieval priority
    """
    executed_at: int
    outcome: Outcome
    version_id: int = 1
    compatibility_tags: Tuple[str, ...] = ()
    usage_count: int = 0
    priority: int = 0

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'compatibility_tags': list(self.compatibility_tags),
            'executed_at': self.executed_at,
            'outcome': self.outcome.value,
            'priority': self.priority,
            'usage_count': self.usage_count,
            'version_id': self.version_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> 'Metadata':
        """Builds metadata from its canonical dictionary form."""
        return cls(int(data['executed_at']), Outcome(data['outcome']), int(data.get('version_id', 1)),
                   tuple(data.get('compatibility_tags', ())), int(data.get('usage_count', 0)),
                   int(data.get('priority', 0)))


class Trajectory(NamedTuple):
    """A complete executable record of one workflow run.

    Attributes:
        trajectory_id (str): identifier
        trigger (Query): the query that produced the run
        trigger_embedding (EmbeddingVector): retrieval index of the trigger
        nodes (tuple): ordered WorkflowNodes
        pattern (Pattern): execution pattern
        context (dict): environment strings such as data source or ``rollback_note``
        metadata (Metadata): outcome and bookkeeping
    """
    trajectory_id: str
    trigger: Query
    trigger_embedding: EmbeddingVector
    nodes: Tuple[WorkflowNode, ...]
    pattern: Pattern
    context: Dict[str, str]
    metadata: Metadata

    @property
    def succeeded(self) -> bool:
        """True when the recorded outcome is Success."""
        return self.metadata.outcome is Outcome.SUCCESS

    def has_tag(self, tag: str) -> bool:
        """True when the compatibility tag is present."""
        return tag in self.metadata.compatibility_tags

    def node(self, node_id: str) -> Optional[WorkflowNode]:
        """Returns the node with the given id, or None."""
        for node in self.nodes:
            if node.node_id == node_id:
                return node
        return None

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'context': dict(self.context),
            'metadata': self.metadata.to_json(),
            'nodes': [node.to_json() for node in self.nodes],
            'pattern': self.pattern.value,
            'trajectory_id': self.trajectory_id,
            'trigger': self.trigger.to_json(),
            'trigger_embedding': self.trigger_embedding.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> 'Trajectory':
        """Builds a trajectory from its canonical dictionary form."""
        return cls(data['trajectory_id'], Query.from_json(data['trigger']),
                   EmbeddingVector.from_json(data['trigger_embedding']),
                   tuple(WorkflowNode.from_json(node) for node in data['nodes']), Pattern(data['pattern']),
                   dict(data.get('context', {})), Metadata.from_json(data['metadata']))


class ErrorFingerprint(NamedTuple):
    """Canonical identity of a failure.

    Attributes:
        tool_id (str): tool that failed
        error_code (str): return code of the call
        message_digest (int): 64-bit digest of the normalized message
    """
    tool_id: str
    error_code: str
    message_digest: int

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'error_code': self.error_code, 'message_digest': self.message_digest, 'tool_id': self.tool_id}

    @classmethod
    def from_json(cls, data: dict) -> 'ErrorFingerprint':
        """Builds a fingerprint from its canonical dictionary form."""
        return cls(data['tool_id'], str(data['error_code']), int(data['message_digest']))


class ParameterSchema(NamedTuple):
    """Parameter contract for a tool call.

    Attributes:
        required_fields (tuple): names present in every sample
        optional_fields (tuple): names present in some samples only
        format_constraints (dict): name to generalized pattern, ``#`` digit and ``a`` letter
        value_ranges (dict): name to (min, max)
        example_template (dict): name to example value
    """
    required_fields: Tuple[str, ...] = ()
    optional_fields: Tuple[str, ...] = ()
    format_constraints: Dict[str, str] = {}
    value_ranges: Dict[str, Tuple[Any, Any]] = {}
    example_template: Dict[str, Any] = {}

    def known_fields(self) -> set:
        """Every field the schema mentions as required or optional."""
        return set(self.required_fields) | set(self.optional_fields)

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'example_template': dict(self.example_template),
            'format_constraints': dict(self.format_constraints),
            'optional_fields': list(self.optional_fields),
            'required_fields': list(self.required_fields),
            'value_ranges': {name: list(bounds) for name, bounds in self.value_ranges.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> 'ParameterSchema':
        """Builds a schema from its canonical dictionary form."""
        return cls(tuple(data.get('required_fields', ())), tuple(data.get('optional_fields', ())),
                   dict(data.get('format_constraints', {})),
                   {name: tuple(bounds) for name, bounds in data.get('value_ranges', {}).items()},
                   dict(data.get('example_template', {})))


class NodeExperience(NamedTuple):
    """Structured lesson attached to a single workflow step.

    Attributes:
        experience_id (str): content digest of the lesson
        fingerprint (ErrorFingerprint): failure identity, Failure polarity only
        root_cause (RootCause): classified cause
        intent_key (str): trigger derived intent
        best_tool (str): tool that worked for the intent
        schema (ParameterSchema): parameters that worked
        avoidance_note (str): guidance injected into prompts
        polarity (Outcome): Success or Failure
        tool_id (str): tool the lesson is about
        recorded_at (int): logical tick the lesson was last seen
    """
    experience_id: str
    fingerprint: Optional[ErrorFingerprint]
    root_cause: RootCause
    intent_key: str
    best_tool: Optional[str]
    schema: Optional[ParameterSchema]
    avoidance_note: str
    polarity: Outcome
    tool_id: str = ''
    recorded_at: int = 0

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'avoidance_note': self.avoidance_note,
            'best_tool': self.best_tool,
            'experience_id': self.experience_id,
            'fingerprint': self.fingerprint.to_json() if self.fingerprint else None,
            'intent_key': self.intent_key,
            'polarity': self.polarity.value,
            'recorded_at': self.recorded_at,
            'root_cause': self.root_cause.value,
            'schema': self.schema.to_json() if self.schema else None,
            'tool_id': self.tool_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> 'NodeExperience':
        """Builds an experience from its canonical dictionary form."""
        fingerprint = ErrorFingerprint.from_json(data['fingerprint']) if data.get('fingerprint') else None
        schema = ParameterSchema.from_json(data['schema']) if data.get('schema') else None
        return cls(data['experience_id'], fingerprint, RootCause(data['root_cause']), data['intent_key'],
                   data.get('best_tool'), schema, data.get('avoidance_note', ''), Outcome(data['polarity']),
                   data.get('tool_id', ''), int(data.get('recorded_at', 0)))


class TrajectoryTemplate(NamedTuple):
    """Merged skeleton of structurally identical trajectories.

    Attributes:
        template_id (str): hex form of structural_hash
        structural_hash (int): shared hash of all members
        skeleton (tuple): WorkflowNodes, variable nodes hold slot markers
        member_ids (tuple): sorted member trajectory ids
        trigger_centroid (EmbeddingVector): normalized mean of member triggers
        reuse_class (ReuseClass): DirectReuse or RewriteReuse
        priority (int): usage derived priority
        pattern (Pattern): execution pattern shared by the members
        success_count (int): successful reuses of this template
        failure_count (int): failed reuses of this template
    """
    template_id: str
    structural_hash: int
    skeleton: Tuple[WorkflowNode, ...]
    member_ids: Tuple[str, ...]
    trigger_centroid: EmbeddingVector
    reuse_class: ReuseClass
    priority: int = 0
    pattern: Pattern = Pattern.SEQUENTIAL
    success_count: int = 0
    failure_count: int = 0

    def variable_nodes(self) -> List[WorkflowNode]:
        """Skeleton nodes that are rewritten per query."""
        return [node for node in self.skeleton if node.is_variable]

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'failure_count': self.failure_count,
            'member_ids': list(self.member_ids),
            'pattern': self.pattern.value,
            'priority': self.priority,
            'reuse_class': self.reuse_class.value,
            'skeleton': [node.to_json() for node in self.skeleton],
            'structural_hash': self.structural_hash,
            'success_count': self.success_count,
            'template_id': self.template_id,
            'trigger_centroid': self.trigger_centroid.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> 'TrajectoryTemplate':
        """Builds a template from its canonical dictionary form."""
        return cls(data['template_id'], int(data['structural_hash']),
                   tuple(WorkflowNode.from_json(node) for node in data['skeleton']), tuple(data['member_ids']),
                   EmbeddingVector.from_json(data['trigger_centroid']), ReuseClass(data['reuse_class']),
                   int(data.get('priority', 0)), Pattern(data.get('pattern', Pattern.SEQUENTIAL.value)),
                   int(data.get('success_count', 0)), int(data.get('failure_count', 0)))


class TokenLedger(NamedTuple):
    """Token and call accounting for generator use.

    Attributes:
        prompt_tokens (int): tokens sent to the generator
        completion_tokens (int): tokens received from the generator
        generator_calls (int): number of generator calls
    """
    prompt_tokens: int = 0
    completion_tokens: int = 0
    generator_calls: int = 0

    @property
    def total_tokens(self) -> int:
        """Prompt plus completion tokens."""
        return self.prompt_tokens + self.completion_tokens

    def add(self, other: 'TokenLedger') -> 'TokenLedger':
        """Componentwise sum of two ledgers."""
        return TokenLedger(self.prompt_tokens + other.prompt_tokens,
                           self.completion_tokens + other.completion_tokens,
                           self.generator_calls + other.generator_calls)

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'completion_tokens': self.completion_tokens, 'generator_calls': self.generator_calls,
                'prompt_tokens': self.prompt_tokens}

    @classmethod
    def from_json(cls, data: dict) -> 'TokenLedger':
        """Builds a ledger from its canonical dictionary form."""
        return cls(int(data['prompt_tokens']), int(data['completion_tokens']), int(data['generator_calls']))


ZERO_LEDGER = TokenLedger()
"""The additive identity ledger."""


def canonical_json(data: Any) -> str:
    """Serializes data with sorted keys and no insignificant whitespace.

    Args:
        data: JSON compatible data

    Returns:
        A single line JSON string
    """
    return json.dumps(data, sort_keys=True, separators=CANONICAL_SEPARATORS, ensure_ascii=False)


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash.

    Args:
        data: bytes to hash

    Returns:
        Unsigned 64-bit hash value
    """
    value = _FNV_OFFSET
    for byte in data:
        value ^= byte
        value = (value * _FNV_PRIME) & _MASK64

    return value


def sum_ledgers(ledgers: Iterable[TokenLedger]) -> TokenLedger:
    """Sums any number of ledgers."""
    total = ZERO_LEDGER
    for ledger in ledgers:
        total = total.add(ledger)

    return total


def slot_marker(name: str) -> str:
    """Returns the slot marker for a parameter name."""
    return SLOT_MARKER.format(name)


def is_slot_marker(value: Any) -> bool:
    """True when value is a slot marker string."""
    return isinstance(value, str) and _SLOT_RE.match(value) is not None


def normalize_message(message: str) -> str:
    """Normalizes an error message for fingerprinting.

    Lowercases, collapses whitespace runs to one space and replaces digit runs with ``#``.
    """
    collapsed = _WHITESPACE_RUNS.sub(' ', message.lower()).strip()
    return _DIGIT_RUNS.sub('#', collapsed)


def fingerprint_error(tool_id: str, error_code: str, message: str) -> ErrorFingerprint:
    """Builds the fingerprint of a failed call.

    Args:
        tool_id: tool that failed
        error_code: return code of the call
        message: raw error message

    Returns:
        Filled ErrorFingerprint
    """
    return ErrorFingerprint(tool_id, str(error_code), fnv1a_64(normalize_message(message).encode('utf-8')))


def structural_hash(trajectory: Trajectory) -> int:
    """64-bit hash of a trajectory's shape and fixed content.

    The hashed form is ``[pattern, [tool_id, names, values, dependency positions] ...]``.
    Variable nodes contribute their sorted parameter names but not their values.

    Args:
        trajectory: trajectory to hash

    Returns:
        Unsigned 64-bit hash value
    """
    return _nodes_hash(trajectory.pattern, trajectory.nodes)


def _nodes_hash(pattern: Pattern, nodes: Tuple[WorkflowNode, ...]) -> int:
    positions = {node.node_id: index for index, node in enumerate(nodes)}
    shape = [pattern.value]
    for node in nodes:
        names = sorted(node.params)
        values = None if node.is_variable else [node.params[name] for name in names]
        deps = sorted(positions.get(dep, -1) for dep in node.depends_on)
        shape.append([node.tool_id, names, values, deps])

    return fnv1a_64(canonical_json(shape).encode('utf-8'))


def skeleton_hash(template: TrajectoryTemplate) -> int:
    """Structural hash recomputed from a template skeleton."""
    return _nodes_hash(template.pattern, template.skeleton)


def template_id_for(hash_value: int) -> str:
    """Template id form of a structural hash."""
    return f"{hash_value:016x}"


def validate(trajectory: Trajectory) -> List[Violation]:
    """Checks a trajectory against the type invariants.

    Args:
        trajectory: trajectory to check

    Returns:
        Every violation found, in a stable order. Empty when valid.
    """
    found = []

    def _add(violation: Violation) -> None:
        if violation not in found:
            found.append(violation)

    if not trajectory.trigger.text or not trajectory.trigger.text.strip():
        _add(Violation.EMPTY_TRIGGER)
    if not trajectory.nodes:
        _add(Violation.NODES_EMPTY)

    seen = {}
    all_ids = {node.node_id for node in trajectory.nodes}
    for index, node in enumerate(trajectory.nodes):
        if node.node_id in seen:
            _add(Violation.DUPLICATE_NODE_ID)
        for dep in node.depends_on:
            if dep not in all_ids:
                _add(Violation.UNKNOWN_DEPENDENCY)
            elif dep not in seen:
                _add(Violation.FORWARD_DEPENDENCY)
        seen.setdefault(node.node_id, index)

    if trajectory.pattern is Pattern.SEQUENTIAL:
        for index, node in enumerate(trajectory.nodes):
            expected = () if index == 0 else (trajectory.nodes[index - 1].node_id,)
            if tuple(node.depends_on) != expected:
                _add(Violation.SEQUENTIAL_CHAIN_BROKEN)

    embedding = trajectory.trigger_embedding
    if not embedding.is_zero() and abs(embedding.norm() - 1.0) > 1e-9:
        _add(Violation.EMBEDDING_NOT_NORMALIZED)

    meta = trajectory.metadata
    if meta.version_id < 1:
        _add(Violation.INVALID_VERSION)
    if meta.usage_count < 0 or meta.priority < 0:
        _add(Violation.NEGATIVE_COUNTER)

    return found
