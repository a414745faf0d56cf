# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Simulated Tool Execution

Tool registry, declarative fault injection and deterministic execution of
trajectories. Tool behaviors are named builtins; no registry file can run
arbitrary code.
"""

from enum import Enum
from typing import (Any, Dict, Iterable, List, NamedTuple, Optional, Tuple)

import json
import logging
import os

from eljef.core import fops
from eljef.workflow.lib.errors import (ConfigError, DuplicateTool, UnknownTool)
from eljef.workflow.lib.extraction import (SKIPPED_OUTPUT, ExecutionLog, StepError, StepRecord, generalize_value,
                                           is_number)
from eljef.workflow.lib.model import (Outcome, ParameterSchema, RootCause, Trajectory, canonical_json, fnv1a_64)

LOGGER = logging.getLogger(__name__)

CONDITION_PARAM = 'skip_when'
"""Reserved parameter holding a ``<node_id>=<output>`` skip condition."""

FAULT_CODES = {
    RootCause.WRONG_PARAMETER: '422',
    RootCause.INSUFFICIENT_PERMISSION: '403',
    RootCause.TOOL_MISMATCH: '404',
    RootCause.MISSING_LOGIC: '501',
}
"""Error code returned for each fault mode."""

_SCHEMA_ERROR_CODE = '400'
_BUILTINS = ('echo', 'concat', 'sum', 'lookup_table')


class TriggerKind(Enum):
    """Fault trigger kinds"""
    FIELD_EQUALS = 'field_equals'
    FIELD_MISSING = 'field_missing'
    CALL_COUNT = 'call_count'
    ALWAYS = 'always'


class FaultTrigger(NamedTuple):
    """Declarative predicate deciding when a fault fires.

    Attributes:
        kind (TriggerKind): predicate kind
        field (str): parameter name for field predicates
        value (Any): value compared by FIELD_EQUALS
        count (int): CALL_COUNT fires on calls 1..count
    """
    kind: TriggerKind
    field: Optional[str] = None
    value: Any = None
    count: int = 0

    def fires(self, params: Dict[str, Any], call_number: int) -> bool:
        """True when the fault applies to this call."""
        if self.kind is TriggerKind.ALWAYS:
            return True
        if self.kind is TriggerKind.FIELD_EQUALS:
            return self.field in params and params[self.field] == self.value
        if self.kind is TriggerKind.FIELD_MISSING:
            return self.field not in params
        return call_number <= self.count

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'count': self.count, 'field': self.field, 'kind': self.kind.value, 'value': self.value}

    @classmethod
    def from_json(cls, data: dict) -> 'FaultTrigger':
        """Builds a trigger from its canonical dictionary form."""
        return cls(TriggerKind(data['kind']), data.get('field'), data.get('value'), int(data.get('count', 0)))


class FaultProfile(NamedTuple):
    """Injected failure of a tool.

    Attributes:
        mode (RootCause): one of the four fault modes
        trigger (FaultTrigger): when the fault fires
        error_code (str): code returned, set from the mode
        message (str): error text returned
    """
    mode: RootCause
    trigger: FaultTrigger
    error_code: str
    message: str

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'error_code': self.error_code, 'message': self.message, 'mode': self.mode.value,
                'trigger': self.trigger.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> 'FaultProfile':
        """Builds a profile from its canonical dictionary form."""
        return fault_profile(RootCause(data['mode']), FaultTrigger.from_json(data['trigger']), data['message'])


class Behavior(NamedTuple):
    """Named builtin tool behavior.

    Attributes:
        name (str): ``echo``, ``concat``, ``sum`` or ``lookup_table:<file>``
        args (dict): builtin arguments
    """
    name: str
    args: Dict[str, Any] = {}


class ToolSpec(NamedTuple):
    """A registered tool.

    Attributes:
        tool_id (str): unique tool id
        param_schema (ParameterSchema): parameters the tool accepts
        behavior (Behavior): output function
        fault_profile (FaultProfile): injected fault, if any
        description (str): one line description shown in the tool catalog
    """
    tool_id: str
    param_schema: ParameterSchema
    behavior: Behavior
    fault_profile: Optional[FaultProfile] = None
    description: str = ''

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'behavior': {'args': dict(self.behavior.args), 'name': self.behavior.name},
            'description': self.description,
            'fault_profile': self.fault_profile.to_json() if self.fault_profile else None,
            'param_schema': self.param_schema.to_json(),
            'tool_id': self.tool_id,
        }

    @classmethod
    def from_json(cls, data: dict) -> 'ToolSpec':
        """Builds a tool spec from its canonical dictionary form."""
        behavior = data.get('behavior', {})
        profile = FaultProfile.from_json(data['fault_profile']) if data.get('fault_profile') else None
        return cls(data['tool_id'], ParameterSchema.from_json(data.get('param_schema', {})),
                   Behavior(behavior.get('name', 'echo'), dict(behavior.get('args', {}))), profile,
                   data.get('description', ''))


def fault_profile(mode: RootCause, trigger: FaultTrigger, message: str) -> FaultProfile:
    """Builds a fault profile, taking the error code from the mode.

    Raises:
        ConfigError: mode is not one of the four fault modes
    """
    if mode not in FAULT_CODES:
        raise ConfigError(f"{mode.value} is not a fault mode")

    return FaultProfile(mode, trigger, FAULT_CODES[mode], message)


class ToolRegistry:
    """Registered tools plus per-tool call counters and a logical clock.

    Args:
        base_dir: directory ``lookup_table`` files are resolved against
    """

    def __init__(self, base_dir: str = '.') -> None:
        self.base_dir = base_dir
        self.clock = 0
        self._calls = {}
        self._tables = {}
        self._tools = {}

    def __contains__(self, tool_id: str) -> bool:
        return tool_id in self._tools

    def __len__(self) -> int:
        return len(self._tools)

    def register_tool(self, spec: ToolSpec) -> None:
        """Registers a tool.

        Raises:
            DuplicateTool: tool id already registered
            ConfigError: behavior is not a known builtin
        """
        if spec.tool_id in self._tools:
            raise DuplicateTool(f"tool already registered: {spec.tool_id}")
        if spec.behavior.name.split(':', 1)[0] not in _BUILTINS:
            raise ConfigError(f"unknown tool behavior: {spec.behavior.name}")

        self._tools[spec.tool_id] = spec
        self._calls[spec.tool_id] = 0

    def get(self, tool_id: str) -> ToolSpec:
        """Returns a registered tool.

        Raises:
            UnknownTool: tool not registered
        """
        if tool_id not in self._tools:
            raise UnknownTool(f"unknown tool: {tool_id}")
        return self._tools[tool_id]

    def tools(self) -> List[ToolSpec]:
        """Registered tools in registration order."""
        return list(self._tools.values())

    def inject_fault(self, tool_id: str, profile: FaultProfile) -> None:
        """Attaches a fault profile to a tool and resets its call counter."""
        self._tools[tool_id] = self.get(tool_id)._replace(fault_profile=profile)
        self._calls[tool_id] = 0
        LOGGER.debug("fault %s injected into %s", profile.mode.value, tool_id)

    def clear_fault(self, tool_id: str) -> None:
        """Removes a tool's fault profile and resets its call counter."""
        self._tools[tool_id] = self.get(tool_id)._replace(fault_profile=None)
        self._calls[tool_id] = 0

    def count_call(self, tool_id: str) -> int:
        """Counts one call of a tool and returns its 1-based call number."""
        self._calls[tool_id] += 1
        return self._calls[tool_id]

    def tick(self) -> int:
        """Advances and returns the logical clock."""
        self.clock += 1
        return self.clock

    def clone(self) -> 'ToolRegistry':
        """Independent copy including call counters and clock."""
        copy = ToolRegistry(self.base_dir)
        copy.clock = self.clock
        copy._calls = dict(self._calls)
        copy._tables = dict(self._tables)
        copy._tools = dict(self._tools)
        return copy

    def lookup_table(self, file_name: str) -> Dict[str, Any]:
        """Loads and caches a lookup table file relative to base_dir."""
        if file_name not in self._tables:
            path = os.path.join(self.base_dir, file_name)
            self._tables[file_name] = fops.file_read_convert(path, fops.JSON, default=True) or {}
        return self._tables[file_name]

    def to_json(self) -> list:
        """Registry definition as a list of tool specs."""
        return [spec.to_json() for spec in self._tools.values()]

    def save(self, path: str) -> None:
        """Writes the registry definition file."""
        fops.file_write_convert(path, fops.JSON, self.to_json())

    @classmethod
    def from_json(cls, data: Iterable[dict], base_dir: str = '.') -> 'ToolRegistry':
        """Builds a registry from a list of tool spec dictionaries."""
        registry = cls(base_dir)
        for item in data:
            registry.register_tool(ToolSpec.from_json(item))
        return registry

    @classmethod
    def load(cls, path: str) -> 'ToolRegistry':
        """Reads a registry definition file."""
        data = fops.file_read_convert(path, fops.JSON)
        return cls.from_json(data, os.path.dirname(os.path.abspath(path)))


class ExecutionEnv(NamedTuple):
    """Where trajectories run.

    Attributes:
        registry (ToolRegistry): tools, faults and clock
        seed (int): seed for simulated durations
    """
    registry: ToolRegistry
    seed: int = 0

    def execute(self, trajectory: Trajectory) -> ExecutionLog:
        """Executes a trajectory in this environment."""
        return execute_trajectory(trajectory, self.registry, self.seed)


def register_tool(registry: ToolRegistry, spec: ToolSpec) -> None:
    """Registers a tool, see ToolRegistry.register_tool."""
    registry.register_tool(spec)


def inject_fault(registry: ToolRegistry, tool_id: str, profile: FaultProfile) -> None:
    """Injects a fault, see ToolRegistry.inject_fault."""
    registry.inject_fault(tool_id, profile)


def clear_fault(registry: ToolRegistry, tool_id: str) -> None:
    """Clears a fault, see ToolRegistry.clear_fault."""
    registry.clear_fault(tool_id)


def check_params(schema: ParameterSchema, params: Dict[str, Any]) -> Optional[str]:
    """Checks params against a tool schema.

    Returns:
        None when valid, otherwise a ``invalid param <name>: <reason>`` message
    """
    for name in schema.required_fields:
        if name not in params:
            return f"invalid param {name}: missing required field"

    for name, value in sorted(params.items()):
        if name in schema.format_constraints and isinstance(value, str):
            if generalize_value(value) != schema.format_constraints[name]:
                return f"invalid param {name}: expected format {schema.format_constraints[name]}"
        if name in schema.value_ranges:
            low, high = schema.value_ranges[name]
            if not is_number(value) or value < low or value > high:
                return f"invalid param {name}: outside range [{low}, {high}]"

    return None


def _duration(seed: int, node_id: str) -> int:
    return fnv1a_64(f"{seed}:{node_id}".encode('utf-8')) % 5 + 1


def _run_behavior(registry: ToolRegistry, spec: ToolSpec, params: Dict[str, Any]) -> str:
    name, _, table = spec.behavior.name.partition(':')
    args = spec.behavior.args

    if name == 'concat':
        separator = args.get('separator', ' ')
        return separator.join(str(params[key]) for key in sorted(params))
    if name == 'sum':
        return str(sum(value for value in params.values() if is_number(value)))
    if name == 'lookup_table':
        entries = registry.lookup_table(table)
        key = str(params.get(args.get('key', ''), ''))
        return json.dumps(entries.get(key, args.get('default')), sort_keys=True)

    return f"{spec.tool_id}{canonical_json(dict(params))}"


def _condition_met(condition: Any, outputs: Dict[str, str]) -> bool:
    if not isinstance(condition, str) or '=' not in condition:
        return False
    node_id, expected = condition.split('=', 1)
    return outputs.get(node_id) == expected


def execute_trajectory(trajectory: Trajectory, registry: ToolRegistry, seed: int) -> ExecutionLog:
    """Executes a trajectory's nodes in dependency order.

    Each node is checked against its tool schema, then against the tool's
    fault profile, then the tool behavior runs. A failed node halts every
    node that depends on it, directly or not. A node whose ``skip_when``
    condition holds is recorded as skipped.

    Args:
        trajectory: trajectory to run, nodes already in topological order
        registry: tools to run against, call counters and clock are advanced
        seed: seed for simulated durations

    Returns:
        ExecutionLog, Failure iff any step errored

    Raises:
        UnknownTool: a node names an unregistered tool
    """
    for node in trajectory.nodes:
        if node.tool_id not in registry:
            raise UnknownTool(f"node {node.node_id} uses unknown tool {node.tool_id}")

    executed_at = registry.tick()
    blocked = set()
    outputs = {}
    steps = []

    for node in trajectory.nodes:
        if any(dep in blocked for dep in node.depends_on):
            blocked.add(node.node_id)
            continue

        duration = _duration(seed, node.node_id)
        if _condition_met(node.params.get(CONDITION_PARAM), outputs):
            outputs[node.node_id] = SKIPPED_OUTPUT
            steps.append(StepRecord(node.node_id, node.tool_id, dict(node.params), SKIPPED_OUTPUT, None, 0,
                                    tuple(node.depends_on), True))
            continue

        spec = registry.get(node.tool_id)
        params = {name: value for name, value in node.params.items() if name != CONDITION_PARAM}
        call_number = registry.count_call(node.tool_id)

        error = None
        problem = check_params(spec.param_schema, params)
        if problem:
            error = StepError(_SCHEMA_ERROR_CODE, problem)
        elif spec.fault_profile and spec.fault_profile.trigger.fires(params, call_number):
            error = StepError(spec.fault_profile.error_code, spec.fault_profile.message)

        if error:
            LOGGER.debug("%s/%s failed with %s", node.node_id, node.tool_id, error.code)
            blocked.add(node.node_id)
            steps.append(StepRecord(node.node_id, node.tool_id, dict(node.params), None, error, duration,
                                    tuple(node.depends_on)))
            continue

        outputs[node.node_id] = _run_behavior(registry, spec, params)
        steps.append(StepRecord(node.node_id, node.tool_id, dict(node.params), outputs[node.node_id], None, duration,
                                tuple(node.depends_on)))

    outcome = Outcome.FAILURE if blocked else Outcome.SUCCESS
    return ExecutionLog(trajectory.trigger, tuple(steps), outcome, dict(trajectory.context), executed_at,
                        f"{trajectory.trajectory_id}@{executed_at}")


def write_logs(path: str, logs: Iterable[ExecutionLog]) -> None:
    """Writes execution logs as JSON lines."""
    with open(path, 'w', encoding='utf-8') as log_file:
        for log in logs:
            log_file.write(canonical_json(log.to_json()) + '\n')


def read_logs(path: str) -> List[ExecutionLog]:
    """Reads execution logs written by write_logs."""
    logs = []
    with open(path, 'r', encoding='utf-8') as log_file:
        for line in log_file:
            if line.strip():
                logs.append(ExecutionLog.from_json(json.loads(line)))
    return logs


def call_tool(registry: ToolRegistry, tool_id: str, params: Dict[str, Any]) -> Tuple[str, Optional[str]]:
    """Runs a single tool call outside any trajectory.

    Returns:
        (output, error message); exactly one is None
    """
    spec = registry.get(tool_id)
    problem = check_params(spec.param_schema, params)
    if problem:
        return None, problem
    return _run_behavior(registry, spec, params), None
