# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Generator Backends

The request and response types shared by every backend, a deterministic mock
driven by a seed table, and a remote HTTP adapter.
"""

from abc import (ABC, abstractmethod)
from enum import Enum
from typing import (Any, Dict, List, NamedTuple, Optional, Tuple)

import json
import logging
import random
import re

import requests

from eljef.workflow.lib.errors import GeneratorFailure
from eljef.workflow.lib.extraction import intent_key
from eljef.workflow.lib.model import (ParameterSchema, TokenLedger)

LOGGER = logging.getLogger(__name__)

SECTION_AVOIDANCE = 'failure avoidance'
SECTION_CATALOG = 'tool catalog'
SECTION_CONTRACT = 'node contract'
SECTION_SUCCESS = 'success paradigms'
SECTION_TASK = 'task'

_PLACEHOLDER_RE = re.compile(r'^\{([A-Za-z_][A-Za-z0-9_]*)\}$')
_TAG_RE = re.compile(r'\[([^/\]\s]+)/([^\]\s]+)\]')


class Purpose(Enum):
    """What a generator call is for"""
    REWRITE_NODE = 'RewriteNode'
    FULL_PLAN = 'FullPlan'


class BackendKind(Enum):
    """Generator backend kinds"""
    DETERMINISTIC_MOCK = 'DeterministicMock'
    REMOTE_HTTP = 'RemoteHTTP'


class GeneratorRequest(NamedTuple):
    """One generator call.

    Attributes:
        purpose (Purpose): RewriteNode or FullPlan
        prompt_sections (tuple): ordered (label, text) pairs
        constraints (ParameterSchema): schema the answer must respect
        slot (tuple): (template_id, node_id) being rewritten
        slot_params (tuple): parameter names the answer must fill
        tool_id (str): tool of the node being rewritten
    """
    purpose: Purpose
    prompt_sections: Tuple[Tuple[str, str], ...]
    constraints: Optional[ParameterSchema] = None
    slot: Optional[Tuple[str, str]] = None
    slot_params: Tuple[str, ...] = ()
    tool_id: Optional[str] = None

    def section(self, label: str) -> str:
        """Text of a section, empty when absent."""
        for name, text in self.prompt_sections:
            if name == label:
                return text
        return ''

    def prompt_text(self) -> str:
        """Prompt as sent over the wire, sections joined by blank lines."""
        return '\n\n'.join(f"## {label}\n{text}" for label, text in self.prompt_sections)


class GeneratorResponse(NamedTuple):
    """Answer from a generator call.

    Attributes:
        payload (str): JSON object of node params, or a JSON plan
        ledger (TokenLedger): accounting for this single call
    """
    payload: str
    ledger: TokenLedger


def count_tokens(text: str) -> int:
    """Number of maximal runs of non-whitespace characters."""
    return len(text.split())


def payload_json(data: Any) -> str:
    """Serializes a payload with readable separators and sorted keys."""
    return json.dumps(data, sort_keys=True)


def avoidance_tags(text: str) -> List[Tuple[str, str]]:
    """``[tool/code]`` tags found in a failure avoidance section."""
    return _TAG_RE.findall(text)


class GeneratorBackend(ABC):
    """Something that answers GeneratorRequests."""

    kind = None

    @abstractmethod
    def generate(self, request: GeneratorRequest) -> GeneratorResponse:
        """Answers one request.

        Raises:
            GeneratorFailure: no usable answer
        """


class AvoidanceRule(NamedTuple):
    """How the mock reacts to a failure avoidance tag.

    Attributes:
        tool_id (str): tool named in the tag
        error_code (str): code named in the tag
        action (str): ``set_param`` or ``swap_tool``
        field (str): parameter set by ``set_param``
        value (Any): value set by ``set_param``
        replacement (str): tool swapped in by ``swap_tool``
    """
    tool_id: str
    error_code: str
    action: str
    field: Optional[str] = None
    value: Any = None
    replacement: Optional[str] = None

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'action': self.action, 'error_code': self.error_code, 'field': self.field,
                'replacement': self.replacement, 'tool_id': self.tool_id, 'value': self.value}

    @classmethod
    def from_json(cls, data: dict) -> 'AvoidanceRule':
        """Builds a rule from its canonical dictionary form."""
        return cls(data['tool_id'], str(data['error_code']), data['action'], data.get('field'), data.get('value'),
                   data.get('replacement'))


class PlanSeed(NamedTuple):
    """Seeded plan for one intent.

    Node params may hold ``{name}`` placeholders, filled from the query.

    Attributes:
        pattern (str): execution pattern value
        nodes (tuple): node dictionaries with node_id, tool_id, params and depends_on
        defaults (dict): placeholder values used when the query has none
    """
    pattern: str
    nodes: Tuple[Dict[str, Any], ...]
    defaults: Dict[str, Any] = {}

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'defaults': dict(self.defaults), 'nodes': [dict(node) for node in self.nodes],
                'pattern': self.pattern}

    @classmethod
    def from_json(cls, data: dict) -> 'PlanSeed':
        """Builds a seed from its canonical dictionary form."""
        return cls(data['pattern'], tuple(dict(node) for node in data['nodes']), dict(data.get('defaults', {})))


class MockSeedTable(NamedTuple):
    """What the deterministic mock answers.

    Attributes:
        plans (dict): intent_key to PlanSeed
        slots (dict): (template_id, node_id) to seeded param values
        rules (tuple): AvoidanceRules applied when their tag is in the prompt
    """
    plans: Dict[str, PlanSeed] = {}
    slots: Dict[Tuple[str, str], Dict[str, Any]] = {}
    rules: Tuple[AvoidanceRule, ...] = ()

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'plans': {key: seed.to_json() for key, seed in self.plans.items()},
            'rules': [rule.to_json() for rule in self.rules],
            'slots': [{'node_id': node, 'template_id': template, 'values': dict(values)}
                      for (template, node), values in sorted(self.slots.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> 'MockSeedTable':
        """Builds a seed table from its canonical dictionary form."""
        return cls({key: PlanSeed.from_json(seed) for key, seed in data.get('plans', {}).items()},
                   {(item['template_id'], item['node_id']): dict(item['values']) for item in data.get('slots', [])},
                   tuple(AvoidanceRule.from_json(rule) for rule in data.get('rules', [])))


def query_value(text: str, name: str) -> Optional[str]:
    """Token that follows a parameter name in the query, original case kept."""
    words = [word.strip('.,;:!?"\'()') for word in text.split()]
    for index, word in enumerate(words[:-1]):
        if word.lower() == name.lower() and words[index + 1]:
            return words[index + 1]
    return None


class MockBackend(GeneratorBackend):
    """Deterministic generator driven by a seed table.

    A full plan comes from the seeded plan of the query's intent; an unknown
    intent gets a one node plan over a catalog tool drawn from the backend
    seed and the intent key. A node rewrite uses seeded slot values, else the
    value following the parameter name in the query, else the schema example.
    Avoidance rules whose ``[tool/code]`` tag appears in the failure avoidance
    section are applied to the answer.

    Args:
        table: seed table
        seed: picks the tool for intents the table does not know
    """

    kind = BackendKind.DETERMINISTIC_MOCK

    def __init__(self, table: MockSeedTable, seed: int = 0) -> None:
        self.table = table
        self.seed = seed

    def _active_rules(self, request: GeneratorRequest) -> List[AvoidanceRule]:
        tags = set(avoidance_tags(request.section(SECTION_AVOIDANCE)))
        return [rule for rule in self.table.rules if (rule.tool_id, rule.error_code) in tags]

    def generate(self, request: GeneratorRequest) -> GeneratorResponse:
        """Answers a request from the seed table."""
        task = request.section(SECTION_TASK)
        rules = self._active_rules(request)

        if request.purpose is Purpose.FULL_PLAN:
            payload = payload_json(self._plan(task, request, rules))
        else:
            payload = payload_json(self._rewrite(task, request, rules))

        ledger = TokenLedger(count_tokens(request.prompt_text()), count_tokens(payload), 1)
        LOGGER.debug("mock %s answered with %d completion token(s)", request.purpose.value, ledger.completion_tokens)
        return GeneratorResponse(payload, ledger)

    def _fill(self, value: Any, task: str, defaults: Dict[str, Any]) -> Any:
        if not isinstance(value, str):
            return value
        match = _PLACEHOLDER_RE.match(value)
        if not match:
            return value
        name = match.group(1)
        found = query_value(task, name)
        return found if found is not None else defaults.get(name, '')

    def _plan(self, task: str, request: GeneratorRequest, rules: List[AvoidanceRule]) -> dict:
        seed = self.table.plans.get(intent_key(task))
        if seed is None:
            catalog = request.section(SECTION_CATALOG).splitlines()
            tools = [line.lstrip('- ').split(':', 1)[0].strip() for line in catalog if line.strip()]
            chosen = random.Random(f"{self.seed}:{intent_key(task)}").choice(tools) if tools else 'echo'
            seed = PlanSeed('Sequential', ({'node_id': 'n1', 'tool_id': chosen, 'params': {}, 'depends_on': []},))

        nodes = []
        for spec in seed.nodes:
            params = {name: self._fill(value, task, seed.defaults) for name, value in spec.get('params', {}).items()}
            tool_id = spec['tool_id']
            for rule in rules:
                if rule.tool_id != tool_id:
                    continue
                if rule.action == 'swap_tool' and rule.replacement:
                    tool_id = rule.replacement
                elif rule.action == 'set_param' and rule.field:
                    params[rule.field] = rule.value
            nodes.append({'depends_on': list(spec.get('depends_on', [])), 'node_id': spec['node_id'],
                          'params': params, 'tool_id': tool_id})

        return {'nodes': nodes, 'pattern': seed.pattern}

    def _rewrite(self, task: str, request: GeneratorRequest, rules: List[AvoidanceRule]) -> dict:
        seeded = self.table.slots.get(tuple(request.slot)) if request.slot else None
        example = request.constraints.example_template if request.constraints else {}
        values = {}
        for name in request.slot_params:
            if seeded and name in seeded:
                values[name] = seeded[name]
                continue
            found = query_value(task, name)
            if found is not None:
                values[name] = found
            elif name in example:
                values[name] = example[name]

        for rule in rules:
            if rule.tool_id == request.tool_id and rule.action == 'set_param' and rule.field:
                values[rule.field] = rule.value

        return values


class RemoteBackend(GeneratorBackend):
    """Generator reached over HTTP.

    Sends ``{"purpose", "prompt"}`` and expects ``{"payload", "prompt_tokens",
    "completion_tokens"}``; missing token counts are computed locally.

    Args:
        endpoint: URL to POST to
        timeout: request timeout in seconds
    """

    kind = BackendKind.REMOTE_HTTP

    def __init__(self, endpoint: str, timeout: float = 30.0) -> None:
        self.endpoint = endpoint
        self.timeout = timeout

    def generate(self, request: GeneratorRequest) -> GeneratorResponse:
        """Posts the request and parses the answer."""
        node_id = request.slot[1] if request.slot else None
        prompt = request.prompt_text()
        try:
            response = requests.post(self.endpoint, json={'purpose': request.purpose.value, 'prompt': prompt},
                                     timeout=self.timeout)
            response.raise_for_status()
            data = response.json()
            payload = data['payload']
        except (requests.RequestException, KeyError, TypeError, ValueError) as err:
            raise GeneratorFailure(node_id, f"remote generator failed: {err}") from err

        if not isinstance(payload, str):
            payload = payload_json(payload)

        prompt_tokens = data.get('prompt_tokens')
        completion_tokens = data.get('completion_tokens')
        ledger = TokenLedger(int(prompt_tokens) if prompt_tokens is not None else count_tokens(prompt),
                             int(completion_tokens) if completion_tokens is not None else count_tokens(payload), 1)
        return GeneratorResponse(payload, ledger)
