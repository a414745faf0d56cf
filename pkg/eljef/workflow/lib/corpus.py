# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Built In Tool Corpus

Tool catalogue, intent families, novel intents, entity pools and the four
default fault profiles the benchmark workload is built from.
"""

from typing import (Any, Dict, List, NamedTuple, Tuple)

import logging

from eljef.workflow.lib.backend import (AvoidanceRule, MockSeedTable, PlanSeed)
from eljef.workflow.lib.execution import (Behavior, FaultProfile, FaultTrigger, ToolRegistry, ToolSpec,
                                          TriggerKind, fault_profile)
from eljef.workflow.lib.extraction import intent_key
from eljef.workflow.lib.model import (ParameterSchema, Pattern, RootCause)

LOGGER = logging.getLogger(__name__)

FIXED_REGION = 'GL'
"""Region value used by plan steps that are not bound to the query."""


class ToolDef(NamedTuple):
    """Catalogue entry.

    Attributes:
        tool_id (str): tool id
        description (str): one line description
        required (tuple): required parameter names
        optional (tuple): optional parameter names
        ranges (dict): numeric parameter bounds
    """
    tool_id: str
    description: str
    required: Tuple[str, ...]
    optional: Tuple[str, ...] = ()
    ranges: Dict[str, Tuple[int, int]] = {}

    def spec(self) -> ToolSpec:
        """ToolSpec for this entry, echo behavior and no fault."""
        return ToolSpec(self.tool_id, ParameterSchema(self.required, self.optional, {}, dict(self.ranges)),
                        Behavior('echo'), None, self.description)


class Family(NamedTuple):
    """Intent family: a query shape plus its seeded plan.

    ``text`` and step params may hold ``{region}``, ``{sku}``, ``{team}``,
    ``{currency}`` and ``{campaign}`` placeholders.

    Attributes:
        text (str): query text shape
        steps (tuple): (tool_id, params) pairs run as a chain
    """
    text: str
    steps: Tuple[Tuple[str, Dict[str, Any]], ...]

    def entities(self) -> List[str]:
        """Placeholder names in the query text, in order."""
        return [word[1:-1] for word in self.text.split() if word.startswith('{') and word.endswith('}')]


TOOLS = (
    ToolDef('auth_session', 'open an authenticated session', ('scope',)),
    ToolDef('fetch_records', 'fetch records from a data source', ('source', 'region', 'page_size'),
            ranges={'page_size': (1, 1000)}),
    ToolDef('filter_rows', 'keep rows matching a product code', ('sku',)),
    ToolDef('aggregate', 'aggregate a metric by a grouping key', ('metric', 'group_by')),
    ToolDef('join_tables', 'join two tables on their shared key', ('left', 'right')),
    ToolDef('render_chart', 'render a chart for a campaign', ('kind', 'campaign')),
    ToolDef('export_report', 'export a formatted report document', ('format', 'target')),
    ToolDef('export_table', 'export a raw data table', ('format', 'target')),
    ToolDef('send_notice', 'send a notice to a team channel', ('channel', 'team'), ('template',)),
    ToolDef('lookup_rate', 'look up an exchange rate', ('currency',)),
)
"""Default tool catalogue, in registration order."""

FAULTS = {
    RootCause.WRONG_PARAMETER: ('fetch_records', fault_profile(
        RootCause.WRONG_PARAMETER, FaultTrigger(TriggerKind.FIELD_EQUALS, 'page_size', 500),
        'invalid param page_size above limit')),
    RootCause.INSUFFICIENT_PERMISSION: ('auth_session', fault_profile(
        RootCause.INSUFFICIENT_PERMISSION, FaultTrigger(TriggerKind.FIELD_EQUALS, 'scope', 'admin'),
        'permission denied for scope admin')),
    RootCause.TOOL_MISMATCH: ('export_report', fault_profile(
        RootCause.TOOL_MISMATCH, FaultTrigger(TriggerKind.ALWAYS), 'no such tool capability for export')),
    RootCause.MISSING_LOGIC: ('send_notice', fault_profile(
        RootCause.MISSING_LOGIC, FaultTrigger(TriggerKind.FIELD_MISSING, 'template'),
        'missing step: render template before notice')),
}
"""The four default faults, one per root cause, as (tool_id, profile)."""

RULES = (
    AvoidanceRule('fetch_records', '422', 'set_param', 'page_size', 100),
    AvoidanceRule('auth_session', '403', 'set_param', 'scope', 'read'),
    AvoidanceRule('export_report', '404', 'swap_tool', replacement='export_table'),
    AvoidanceRule('send_notice', '501', 'set_param', 'template', 'standard'),
)
"""How the mock generator reacts to each default fault appearing in a prompt."""

FAMILIES = (
    Family('audit sales ledger for region {region} covering sku {sku} this quarter', (
        ('auth_session', {'scope': 'admin'}),
        ('fetch_records', {'source': 'erp', 'region': '{region}', 'page_size': 100}),
        ('filter_rows', {'sku': '{sku}'}),
        ('aggregate', {'metric': 'units', 'group_by': 'month'}))),
    Family('build sales chart for campaign {campaign} in region {region} from recent orders', (
        ('fetch_records', {'source': 'crm', 'region': '{region}', 'page_size': 500}),
        ('aggregate', {'metric': 'revenue', 'group_by': 'week'}),
        ('render_chart', {'kind': 'bar', 'campaign': '{campaign}'}),
        ('export_report', {'format': 'pdf', 'target': 'drive'}))),
    Family('reconcile exchange rates for currency {currency} against region {region} invoices', (
        ('lookup_rate', {'currency': '{currency}'}),
        ('fetch_records', {'source': 'erp', 'region': '{region}', 'page_size': 100}),
        ('join_tables', {'left': 'fx', 'right': 'billing'}),
        ('aggregate', {'metric': 'margin', 'group_by': 'store'}))),
    Family('notify team {team} about stock levels for sku {sku} today', (
        ('fetch_records', {'source': 'warehouse', 'region': FIXED_REGION, 'page_size': 100}),
        ('filter_rows', {'sku': '{sku}'}),
        ('send_notice', {'channel': 'slack', 'team': '{team}'}))),
    Family('publish quarterly chart for campaign {campaign} and share with team {team}', (
        ('auth_session', {'scope': 'admin'}),
        ('fetch_records', {'source': 'crm', 'region': FIXED_REGION, 'page_size': 100}),
        ('render_chart', {'kind': 'line', 'campaign': '{campaign}'}),
        ('send_notice', {'channel': 'email', 'team': '{team}', 'template': 'standard'}))),
    Family('export inventory table for region {region} with sku {sku} details', (
        ('fetch_records', {'source': 'warehouse', 'region': '{region}', 'page_size': 500}),
        ('filter_rows', {'sku': '{sku}'}),
        ('export_report', {'format': 'xlsx', 'target': 'archive'}))),
    Family('convert order totals into currency {currency} for region {region} branches', (
        ('fetch_records', {'source': 'erp', 'region': '{region}', 'page_size': 100}),
        ('lookup_rate', {'currency': '{currency}'}),
        ('aggregate', {'metric': 'revenue', 'group_by': 'store'}),
        ('export_table', {'format': 'pdf', 'target': 'inbox'}))),
    Family('escalate pricing gaps for sku {sku} to team {team} after review', (
        ('auth_session', {'scope': 'admin'}),
        ('fetch_records', {'source': 'crm', 'region': FIXED_REGION, 'page_size': 100}),
        ('filter_rows', {'sku': '{sku}'}),
        ('send_notice', {'channel': 'email', 'team': '{team}'}))),
)
"""Base intent families, most with one or two default faults on their path."""

NOVEL_INTENTS = (
    Family('rotate api credentials before the nightly sync', (
        ('auth_session', {'scope': 'admin'}),
        ('send_notice', {'channel': 'email', 'team': 'T900', 'template': 'standard'}))),
    Family('summarize churn drivers across loyalty members', (
        ('fetch_records', {'source': 'crm', 'region': FIXED_REGION, 'page_size': 100}),
        ('aggregate', {'metric': 'attrition', 'group_by': 'segment'}))),
    Family('forecast demand spikes ahead of holiday season', (
        ('fetch_records', {'source': 'warehouse', 'region': FIXED_REGION, 'page_size': 500}),
        ('aggregate', {'metric': 'volume', 'group_by': 'week'}))),
    Family('merge supplier catalogs into one master list', (
        ('join_tables', {'left': 'suppliers', 'right': 'golden'}),)),
    Family('archive stale tickets older than ninety days', (
        ('fetch_records', {'source': 'helpdesk', 'region': FIXED_REGION, 'page_size': 100}),
        ('export_report', {'format': 'csv', 'target': 'vault'}))),
    Family('draft weekly digest about shipping delays', (
        ('fetch_records', {'source': 'logistics', 'region': FIXED_REGION, 'page_size': 100}),
        ('send_notice', {'channel': 'email', 'team': 'T900'}))),
    Family('compare margin trends between two fiscal years', (
        ('fetch_records', {'source': 'erp', 'region': FIXED_REGION, 'page_size': 100}),
        ('aggregate', {'metric': 'profit', 'group_by': 'year'}))),
    Family('flag duplicate invoices in accounts payable', (
        ('fetch_records', {'source': 'billing', 'region': FIXED_REGION, 'page_size': 100}),
        ('filter_rows', {'sku': 'ZZ000'}))),
    Family('plot website traffic by referral channel', (
        ('fetch_records', {'source': 'analytics', 'region': FIXED_REGION, 'page_size': 100}),
        ('render_chart', {'kind': 'line', 'campaign': 'promo00'}))),
    Family('calculate tax exposure on cross border trades', (
        ('lookup_rate', {'currency': 'EUR'}),
        ('aggregate', {'metric': 'tax', 'group_by': 'country'}))),
    Family('review vendor contracts expiring next month', (
        ('auth_session', {'scope': 'admin'}),
        ('fetch_records', {'source': 'legal', 'region': FIXED_REGION, 'page_size': 100}))),
    Family('estimate refund liability from open returns', (
        ('fetch_records', {'source': 'erp', 'region': FIXED_REGION, 'page_size': 100}),
        ('aggregate', {'metric': 'refunds', 'group_by': 'store'}))),
)
"""Intents with no family, used for the Novel tier."""

ENTITY_POOLS = {
    'campaign': ('promo01', 'promo02', 'promo03', 'promo04', 'promo05', 'promo06', 'promo07', 'promo08', 'promo09'),
    'currency': ('USD', 'EUR', 'GBP', 'JPY', 'BRL', 'AUD', 'CHF', 'CAD'),
    'region': ('EU', 'US', 'UK', 'JP', 'BR', 'DE', 'FR', 'AU'),
    'sku': ('AB123', 'CD456', 'EF789', 'GH234', 'JK567', 'LM890', 'NP345', 'QR678'),
    'team': ('T101', 'T202', 'T303', 'T404', 'T505', 'T606', 'T707', 'T808'),
}
"""Values entity placeholders are drawn from. Every value of a pool shares one format."""


def base_entities(index: int, family: Family) -> Dict[str, str]:
    """Entity values of a family's base query."""
    return {name: ENTITY_POOLS[name][index % len(ENTITY_POOLS[name])] for name in family.entities()}


def render(text: str, entities: Dict[str, str]) -> str:
    """Fills ``{name}`` placeholders of a query shape."""
    return text.format(**entities)


def plan_seed(family: Family) -> PlanSeed:
    """Seeded chain plan of a family, placeholders left for the mock to fill."""
    nodes = []
    for index, (tool_id, params) in enumerate(family.steps, 1):
        nodes.append({'depends_on': [f"n{index - 1}"] if index > 1 else [], 'node_id': f"n{index}",
                      'params': dict(params), 'tool_id': tool_id})
    return PlanSeed(Pattern.SEQUENTIAL.value, tuple(nodes))


def default_registry(base_dir: str = '.') -> ToolRegistry:
    """Registry holding the default catalogue, no faults injected."""
    registry = ToolRegistry(base_dir)
    for tool in TOOLS:
        registry.register_tool(tool.spec())
    return registry


def default_faults() -> List[Tuple[str, FaultProfile]]:
    """The four default faults as (tool_id, profile), in root cause order."""
    return [FAULTS[cause] for cause in (RootCause.WRONG_PARAMETER, RootCause.INSUFFICIENT_PERMISSION,
                                        RootCause.TOOL_MISMATCH, RootCause.MISSING_LOGIC)]


def default_seed_table() -> MockSeedTable:
    """Mock seed table answering every family and novel intent."""
    plans = {}
    for family in FAMILIES + NOVEL_INTENTS:
        key = intent_key(family.text)
        if key in plans:
            LOGGER.warning("intent %s seeded twice, keeping the first plan", key)
            continue
        plans[key] = plan_seed(family)

    return MockSeedTable(plans, {}, RULES)
