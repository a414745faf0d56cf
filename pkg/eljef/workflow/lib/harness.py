# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Benchmark Harness

Runs the workflow engine and three baselines over a workload and compares
their token use and success rates.
"""

from enum import Enum
from typing import (Callable, Dict, List, NamedTuple, Optional, Sequence)

import logging
import os

from eljef.core import fops

from eljef.workflow.lib.backend import GeneratorBackend
from eljef.workflow.lib.embedding import (cosine_similarity, embed)
from eljef.workflow.lib.errors import (GenerationError, MissingBaseline)
from eljef.workflow.lib.execution import ExecutionEnv
from eljef.workflow.lib.extraction import (extract_node_experiences, intent_key, record_outcome)
from eljef.workflow.lib.generation import plan_from_scratch
from eljef.workflow.lib.model import (ZERO_LEDGER, NodeExperience, Outcome, Query, Tier, TokenLedger, Trajectory,
                                      structural_hash)
from eljef.workflow.lib.routing import (RoutingConfig, execute_with_fallback, route_histogram)
from eljef.workflow.lib.store import ExperienceStore
from eljef.workflow.lib.workload import FaultSpec

LOGGER = logging.getLogger(__name__)

REPORT_TABLE_SUFFIX = '.txt'


class Strategy(Enum):
    """Strategies the harness can run"""
    WORKFLOW_GEN = 'WorkflowGen'
    REAL_TIME_PLANNING = 'RealTimePlanning'
    STATIC_SINGLE_TRAJECTORY = 'StaticSingleTrajectory'
    BASIC_ICL = 'BasicICL'


class AcceptanceThresholds(NamedTuple):
    """Thresholds a comparison must meet.

    Attributes:
        reduction_vs_realtime (float): minimum token reduction vs RealTimePlanning, in percent
        reduction_vs_static (float): minimum token reduction vs StaticSingleTrajectory, in percent
        medium_gain_vs_icl (float): minimum Medium tier success gain vs BasicICL, in percentage points
    """
    reduction_vs_realtime: float = 40.0
    reduction_vs_static: float = 15.0
    medium_gain_vs_icl: float = 20.0


class StrategyMetrics(NamedTuple):
    """What one strategy run measured.

    Attributes:
        strategy (Strategy): strategy run
        total_ledger (TokenLedger): tokens over every query
        success_rate (float): fraction of queries that ended in Success
        success_rate_medium_tier (float): the same over Medium tier queries
        mean_wall_steps (float): executed steps per query
        route_histogram (dict): final route counts, WorkflowGen only
        n_queries (int): queries served
        successes (int): queries that ended in Success
        error_avoidance_rate (float): fraction of queries whose first execution succeeded
        store_digest (str): SHA-256 over the strategy's store files
    """
    strategy: Strategy
    total_ledger: TokenLedger
    success_rate: float
    success_rate_medium_tier: float
    mean_wall_steps: float
    route_histogram: Optional[Dict[str, int]]
    n_queries: int = 0
    successes: int = 0
    error_avoidance_rate: float = 0.0
    store_digest: str = ''

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'error_avoidance_rate': self.error_avoidance_rate,
            'mean_wall_steps': self.mean_wall_steps,
            'n_queries': self.n_queries,
            'route_histogram': dict(sorted(self.route_histogram.items())) if self.route_histogram is not None
            else None,
            'store_digest': self.store_digest,
            'strategy': self.strategy.value,
            'success_rate': self.success_rate,
            'success_rate_medium_tier': self.success_rate_medium_tier,
            'successes': self.successes,
            'total_ledger': self.total_ledger.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> 'StrategyMetrics':
        """Builds metrics from their canonical dictionary form."""
        return cls(Strategy(data['strategy']), TokenLedger.from_json(data['total_ledger']),
                   float(data['success_rate']), float(data['success_rate_medium_tier']),
                   float(data['mean_wall_steps']), data.get('route_histogram'), int(data.get('n_queries', 0)),
                   int(data.get('successes', 0)), float(data.get('error_avoidance_rate', 0.0)),
                   data.get('store_digest', ''))


class _Served(NamedTuple):
    ledger: TokenLedger
    succeeded: bool
    wall_steps: int
    first_ok: bool
    trajectory: Optional[Trajectory] = None


def _plan_and_execute(query: Query, backend: GeneratorBackend, env: ExecutionEnv, store: ExperienceStore,
                      experiences: Sequence[NodeExperience], feedback: bool, max_iters: int) -> _Served:
    """Plans from scratch until an execution succeeds.

    With ``feedback`` a retry also sees the failures of this query's earlier
    attempts; nothing read from the store is added.
    """
    ledger = ZERO_LEDGER
    wall_steps = 0
    first_ok = False
    learned = []
    last_failure = None

    for attempt in range(1, max_iters + 1):
        injected = list(experiences) + (learned if feedback else [])
        try:
            trajectory, used = plan_from_scratch(query, backend, env.registry, injected, store.embedding_cfg,
                                                 f"{query.query_id}-c{attempt}")
        except GenerationError as err:
            LOGGER.warning("%s: planning failed: %s", query.query_id, err)
            ledger = ledger.add(err.ledger or ZERO_LEDGER)
            break

        ledger = ledger.add(used)
        log = env.execute(trajectory)
        wall_steps += len(log.steps)
        executed = record_outcome(trajectory, log)
        if log.outcome is Outcome.SUCCESS:
            first_ok = attempt == 1
            store.put_experiences(extract_node_experiences(executed, last_failure, [log], log.executed_at))
            store.put_trajectory(executed)
            return _Served(ledger, True, wall_steps, first_ok, store.get_trajectory(executed.trajectory_id))

        failures = extract_node_experiences(None, executed, [log], log.executed_at)
        store.put_experiences(failures)
        store.put_trajectory(executed)
        learned.extend(failures)
        last_failure = executed

    return _Served(ledger, False, wall_steps, first_ok)


def _success_experiences(store: ExperienceStore, query: Query) -> List[NodeExperience]:
    return [experience for experience in store.lookup_experiences(intent_key(query.text))
            if experience.polarity is Outcome.SUCCESS]


class _StaticReuse:
    """First success of each structure, frozen and reused verbatim."""

    def __init__(self) -> None:
        self.frozen = []

    def match(self, query: Query, store: ExperienceStore, theta_a: float) -> Optional[Trajectory]:
        vector = embed(query.text, store.embedding_cfg)
        best = None
        best_score = theta_a
        for trajectory in self.frozen:
            score = cosine_similarity(vector, trajectory.trigger_embedding)
            if score > best_score:
                best, best_score = trajectory, score
        return best

    def freeze(self, trajectory: Trajectory) -> None:
        hash_value = structural_hash(trajectory)
        if all(structural_hash(frozen) != hash_value for frozen in self.frozen):
            self.frozen.append(trajectory)


def _serve_static(static: _StaticReuse, query: Query, backend: GeneratorBackend, env: ExecutionEnv,
                  store: ExperienceStore, cfg: RoutingConfig) -> _Served:
    frozen = static.match(query, store, cfg.theta_a)
    if frozen is not None:
        log = env.execute(frozen)
        ok = log.outcome is Outcome.SUCCESS
        return _Served(ZERO_LEDGER, ok, len(log.steps), ok, frozen)

    served = _plan_and_execute(query, backend, env, store, (), True, cfg.max_iters)
    if served.succeeded:
        static.freeze(served.trajectory)
    return served


def _serve_workflow_gen(query: Query, backend: GeneratorBackend, env: ExecutionEnv, store: ExperienceStore,
                        cfg: RoutingConfig, reports: list) -> _Served:
    report = execute_with_fallback(query, store, backend, env, cfg)
    reports.append(report)
    first_ok = report.succeeded and report.executions == 1
    return _Served(report.ledger, report.succeeded, report.wall_steps, first_ok, report.final_trajectory)


def _ratio(count: int, total: int) -> float:
    return count / total if total else 0.0


def run_strategy(strategy: Strategy, workload: Sequence[Query], env: ExecutionEnv, backend: GeneratorBackend,
                 store: ExperienceStore, routing_cfg: RoutingConfig = RoutingConfig(),
                 faults: Sequence[FaultSpec] = ()) -> StrategyMetrics:
    """Serves every query of a workload with one strategy.

    The environment's registry is cloned, so runs do not share call counters
    or clock. A fault is injected right before the query at its activation
    step. The store should be fresh; nothing else is shared between runs.

    Args:
        strategy: strategy to run
        workload: queries in serving order
        env: execution environment
        backend: generator
        store: store owned by this run
        routing_cfg: thresholds and retry bound
        faults: faults to inject

    Returns:
        StrategyMetrics
    """
    routing_cfg.checked()
    env = ExecutionEnv(env.registry.clone(), env.seed)
    LOGGER.info("running %s over %d queries", strategy.value, len(workload))

    static = _StaticReuse()
    reports = []
    served = []
    for index, query in enumerate(workload):
        for fault in faults:
            if fault.activation_step == index:
                env.registry.inject_fault(fault.tool_id, fault.profile)

        if strategy is Strategy.WORKFLOW_GEN:
            result = _serve_workflow_gen(query, backend, env, store, routing_cfg, reports)
        elif strategy is Strategy.STATIC_SINGLE_TRAJECTORY:
            result = _serve_static(static, query, backend, env, store, routing_cfg)
        elif strategy is Strategy.BASIC_ICL:
            result = _plan_and_execute(query, backend, env, store, _success_experiences(store, query), False,
                                       routing_cfg.max_iters)
        else:
            result = _plan_and_execute(query, backend, env, store, (), True, routing_cfg.max_iters)
        served.append((query, result))

    total = ZERO_LEDGER
    for _, result in served:
        total = total.add(result.ledger)
    successes = sum(1 for _, result in served if result.succeeded)
    medium = [result for query, result in served if query.tier_hint is Tier.MEDIUM]

    metrics = StrategyMetrics(
        strategy, total, _ratio(successes, len(served)),
        _ratio(sum(1 for result in medium if result.succeeded), len(medium)),
        _ratio(sum(result.wall_steps for _, result in served), len(served)),
        route_histogram(reports) if strategy is Strategy.WORKFLOW_GEN else None,
        len(served), successes, _ratio(sum(1 for _, result in served if result.first_ok), len(served)),
        store.digest())
    LOGGER.info("%s: %d/%d succeeded, %d tokens", strategy.value, successes, len(served), total.total_tokens)
    return metrics


def token_reduction(workflow_gen: TokenLedger, baseline: TokenLedger) -> float:
    """Percent of the baseline's total tokens saved, 0 when the baseline spent none."""
    base = baseline.total_tokens
    if base == 0:
        return 0.0
    return (base - workflow_gen.total_tokens) * 100 / base


def _by_strategy(metrics: Sequence[StrategyMetrics]) -> Dict[Strategy, StrategyMetrics]:
    found = {}
    for item in metrics:
        found[item.strategy] = item
    if len(found) < 2:
        raise MissingBaseline("a comparison needs at least two strategies")
    for needed in (Strategy.WORKFLOW_GEN, Strategy.REAL_TIME_PLANNING):
        if needed not in found:
            raise MissingBaseline(f"a comparison needs {needed.value}")
    return found


def _check(value: float, threshold: float) -> dict:
    return {'passed': value >= threshold, 'threshold': threshold, 'value': value}


def build_report(metrics: Sequence[StrategyMetrics],
                 thresholds: AcceptanceThresholds = AcceptanceThresholds()) -> dict:
    """Comparison of WorkflowGen against every baseline present.

    Raises:
        MissingBaseline: WorkflowGen or RealTimePlanning is absent
    """
    found = _by_strategy(metrics)
    engine = found[Strategy.WORKFLOW_GEN]
    baselines = [strategy for strategy in Strategy if strategy in found and strategy is not Strategy.WORKFLOW_GEN]

    reductions = {}
    deltas = {}
    medium_deltas = {}
    for strategy in baselines:
        baseline = found[strategy]
        reductions[strategy.value] = token_reduction(engine.total_ledger, baseline.total_ledger)
        deltas[strategy.value] = (engine.success_rate - baseline.success_rate) * 100
        medium_deltas[strategy.value] = (engine.success_rate_medium_tier - baseline.success_rate_medium_tier) * 100

    acceptance = {'reduction_vs_realtime': _check(reductions[Strategy.REAL_TIME_PLANNING.value],
                                                  thresholds.reduction_vs_realtime)}
    if Strategy.STATIC_SINGLE_TRAJECTORY in found:
        acceptance['reduction_vs_static'] = _check(reductions[Strategy.STATIC_SINGLE_TRAJECTORY.value],
                                                   thresholds.reduction_vs_static)
    if Strategy.BASIC_ICL in found:
        acceptance['medium_gain_vs_icl'] = _check(medium_deltas[Strategy.BASIC_ICL.value],
                                                  thresholds.medium_gain_vs_icl)

    return {
        'acceptance': acceptance,
        'accepted': all(check['passed'] for check in acceptance.values()),
        'medium_success_delta_pp': medium_deltas,
        'route_histogram': engine.to_json()['route_histogram'],
        'strategies': {strategy.value: found[strategy].to_json() for strategy in Strategy if strategy in found},
        'success_delta_pp': deltas,
        'token_reduction_pct': reductions,
    }


def report_table(report: dict) -> str:
    """Plain text rendering of a comparison report."""
    lines = [f"{'strategy':<24} {'tokens':>8} {'calls':>6} {'success':>8} {'medium':>8} {'steps':>7}"]
    for name, metrics in report['strategies'].items():
        ledger = metrics['total_ledger']
        lines.append(f"{name:<24} {ledger['prompt_tokens'] + ledger['completion_tokens']:>8} "
                     f"{ledger['generator_calls']:>6} {metrics['success_rate']:>8.3f} "
                     f"{metrics['success_rate_medium_tier']:>8.3f} {metrics['mean_wall_steps']:>7.2f}")

    lines.append('')
    for name, value in report['token_reduction_pct'].items():
        lines.append(f"token reduction vs {name}: {value:.1f}% "
                     f"(success {report['success_delta_pp'][name]:+.1f}pp, "
                     f"medium {report['medium_success_delta_pp'][name]:+.1f}pp)")

    if report['route_histogram']:
        lines.append('routes: ' + ', '.join(f"{name}={count}" for name, count in report['route_histogram'].items()))

    lines.append('')
    for name, check in report['acceptance'].items():
        lines.append(f"{name}: {check['value']:.1f} >= {check['threshold']:.1f} "
                     f"{'PASS' if check['passed'] else 'FAIL'}")
    lines.append(f"accepted: {'yes' if report['accepted'] else 'no'}")
    return '\n'.join(lines) + '\n'


def compare_and_report(metrics: Sequence[StrategyMetrics], out_path: str,
                       thresholds: AcceptanceThresholds = AcceptanceThresholds()) -> dict:
    """Writes the comparison as JSON to ``out_path`` and as a table to ``out_path.txt``.

    Returns:
        The report; ``report['accepted']`` tells whether every threshold held

    Raises:
        MissingBaseline: WorkflowGen or RealTimePlanning is absent
    """
    report = build_report(metrics, thresholds)
    directory = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(directory, exist_ok=True)

    fops.file_write_convert(out_path, fops.JSON, report)
    fops.file_write(out_path + REPORT_TABLE_SUFFIX, report_table(report))

    LOGGER.info("report written to %s", out_path)
    return report


def run_benchmark(workload: Sequence[Query], env: ExecutionEnv, backend_factory: Callable[[], GeneratorBackend],
                  store_factory: Callable[[Strategy], ExperienceStore], routing_cfg: RoutingConfig = RoutingConfig(),
                  faults: Sequence[FaultSpec] = (),
                  strategies: Sequence[Strategy] = tuple(Strategy)) -> List[StrategyMetrics]:
    """Runs strategies one after another, each with a fresh backend and store.

    Args:
        workload: queries in serving order
        env: execution environment, cloned per run
        backend_factory: builds a generator per run
        store_factory: builds the fresh store of a strategy
        routing_cfg: thresholds and retry bound
        faults: faults to inject
        strategies: strategies to run, in order

    Returns:
        StrategyMetrics per strategy, in run order
    """
    return [run_strategy(strategy, workload, env, backend_factory(), store_factory(strategy), routing_cfg, faults)
            for strategy in strategies]
