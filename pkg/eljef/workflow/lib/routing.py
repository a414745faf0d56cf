# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Three Tier Adaptive Routing

Direct reuse (A), variable node rewriting (B) and planning from scratch (C),
chosen by trigger similarity and degraded strictly forward on failure.
"""

from enum import Enum
from typing import (List, NamedTuple, Optional, Tuple)

import logging

from eljef.workflow.lib.backend import GeneratorBackend
from eljef.workflow.lib.embedding import embed
from eljef.workflow.lib.errors import (ConfigError, EmptyStore, ExhaustedIterations, UnknownTrajectory)
from eljef.workflow.lib.execution import ExecutionEnv
from eljef.workflow.lib.extraction import (extract_node_experiences, record_outcome)
from eljef.workflow.lib.generation import (DEFAULT_MAX_ITERS, iterative_generate)
from eljef.workflow.lib.model import (ZERO_LEDGER, Outcome, Query, ReuseClass, TokenLedger, Trajectory,
                                      TrajectoryTemplate, structural_hash, template_id_for)
from eljef.workflow.lib.store import (USER_REJECTED_TAG, ExperienceStore, skeleton_node)

LOGGER = logging.getLogger(__name__)


class Route(Enum):
    """Routing tiers"""
    A_DIRECT_REUSE = 'A_DirectReuse'
    B_REWRITE = 'B_Rewrite'
    C_INITIALIZE = 'C_Initialize'


class Verdict(Enum):
    """User feedback verdicts"""
    USER_OK = 'UserOk'
    USER_ERROR = 'UserError'


class RoutingConfig(NamedTuple):
    """Routing thresholds.

    Attributes:
        theta_a (float): direct reuse threshold, scores above it route A
        theta_b (float): rewrite threshold, scores above it route B
        max_iters (int): attempt bound of iterative generation
    """
    theta_a: float = 0.9
    theta_b: float = 0.6
    max_iters: int = DEFAULT_MAX_ITERS

    def checked(self) -> 'RoutingConfig':
        """Returns self after checking ``0 < theta_b < theta_a <= 1`` and ``max_iters >= 1``.

        Raises:
            ConfigError: invariant broken
        """
        if not 0 < self.theta_b < self.theta_a <= 1:
            raise ConfigError(f"routing thresholds must satisfy 0 < theta_b < theta_a <= 1, "
                              f"got theta_a={self.theta_a} theta_b={self.theta_b}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        return self


PRESETS = {
    'default': RoutingConfig(0.9, 0.6, DEFAULT_MAX_ITERS),
    'strict': RoutingConfig(0.99, 0.6, DEFAULT_MAX_ITERS),
}
"""Named routing configurations."""


class RouteDecision(NamedTuple):
    """Route chosen for a query.

    Attributes:
        route (Route): chosen tier
        best_match (tuple): (template_id, score) of the best match, None on an empty store
        degraded_from (tuple): tiers already passed over
    """
    route: Route
    best_match: Optional[Tuple[str, float]] = None
    degraded_from: Tuple[Route, ...] = ()

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        match = {'score': self.best_match[1], 'template_id': self.best_match[0]} if self.best_match else None
        return {'best_match': match, 'degraded_from': [route.value for route in self.degraded_from],
                'route': self.route.value}


class ExecutionReport(NamedTuple):
    """Everything that happened while serving one query.

    Attributes:
        query (Query): query served
        trail (tuple): (RouteDecision, Outcome) per attempted tier
        final_trajectory (Trajectory): last trajectory executed, None if nothing ran
        ledger (TokenLedger): tokens over every attempt
        succeeded (bool): final outcome was Success
        wall_steps (int): executed steps over every attempt
        executions (int): number of executions
    """
    query: Query
    trail: Tuple[Tuple[RouteDecision, Outcome], ...]
    final_trajectory: Optional[Trajectory]
    ledger: TokenLedger
    succeeded: bool
    wall_steps: int
    executions: int

    @property
    def final_route(self) -> Route:
        """Tier of the last attempt."""
        return self.trail[-1][0].route

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'executions': self.executions,
            'final_trajectory_id': self.final_trajectory.trajectory_id if self.final_trajectory else None,
            'ledger': self.ledger.to_json(),
            'query': self.query.to_json(),
            'succeeded': self.succeeded,
            'trail': [{'decision': decision.to_json(), 'outcome': outcome.value} for decision, outcome in self.trail],
            'wall_steps': self.wall_steps,
        }


class _Match(NamedTuple):
    template: Optional[TrajectoryTemplate]
    score: float
    member: Optional[Trajectory]


def select_route(score: float, cfg: RoutingConfig) -> Route:
    """Tier for a similarity score: above theta_a is A, above theta_b is B, else C."""
    if score > cfg.theta_a:
        return Route.A_DIRECT_REUSE
    if score > cfg.theta_b:
        return Route.B_REWRITE
    return Route.C_INITIALIZE


def _adhoc_template(store: ExperienceStore, trajectory: Trajectory) -> TrajectoryTemplate:
    hash_value = structural_hash(trajectory)
    skeleton = tuple(skeleton_node(trajectory, index, [trajectory]) for index in range(len(trajectory.nodes)))
    reuse = ReuseClass.REWRITE_REUSE if any(node.is_variable for node in skeleton) else ReuseClass.DIRECT_REUSE
    return TrajectoryTemplate(template_id_for(hash_value), hash_value, skeleton, (trajectory.trajectory_id,),
                              trajectory.trigger_embedding, reuse, trajectory.metadata.priority, trajectory.pattern)


def _eligible(trajectory: Trajectory) -> bool:
    return trajectory.succeeded and not trajectory.has_tag(USER_REJECTED_TAG)


def _find_match(query: Query, store: ExperienceStore) -> _Match:
    vector = embed(query.text, store.embedding_cfg)
    ranked = store.rank_templates(vector)
    if not ranked:
        try:
            nearest = store.find_nearest(vector, 1, Outcome.SUCCESS)
        except EmptyStore:
            return _Match(None, 0.0, None)
        trajectory = store.get_trajectory(nearest[0][0])
        member = trajectory if _eligible(trajectory) else None
        return _Match(_adhoc_template(store, trajectory), nearest[0][1], member)

    template_id, score = ranked[0]
    return _Match(store.get_template(template_id), score, store.canonical_trajectory(template_id))


def _initial_decision(match: _Match, cfg: RoutingConfig) -> RouteDecision:
    if match.template is None:
        return RouteDecision(Route.C_INITIALIZE)

    best = (match.template.template_id, match.score)
    route = select_route(match.score, cfg)
    if route is Route.A_DIRECT_REUSE and match.member is None:
        return RouteDecision(Route.B_REWRITE, best, (Route.A_DIRECT_REUSE,))
    return RouteDecision(route, best)


def route(query: Query, store: ExperienceStore, cfg: RoutingConfig = RoutingConfig()) -> RouteDecision:
    """Chooses the initial tier for a query.

    The score is the best template trigger centroid cosine; with no
    templates the nearest Success trajectory's trigger is used. A match
    above theta_a whose template has no reusable canonical member goes to
    B, with A recorded as passed over.

    Args:
        query: query to route
        store: experience store
        cfg: routing thresholds

    Returns:
        RouteDecision
    """
    decision = _initial_decision(_find_match(query, store), cfg)
    LOGGER.debug("%s routed to %s", query.query_id, decision.route.value)
    return decision


def _direct_reuse(match: _Match, store: ExperienceStore, env: ExecutionEnv):
    member = match.member
    log = env.execute(member)
    template_id = match.template.template_id
    if log.outcome is Outcome.SUCCESS:
        store.record_usage(member.trajectory_id)
        store.put_experiences(extract_node_experiences(member, None, [log], log.executed_at))
        store.record_template_outcome(template_id, True)
        if template_id in {template.template_id for template in store.templates()}:
            store.boost_priority(template_id)
        return store.get_trajectory(member.trajectory_id), log

    store.put_experiences(extract_node_experiences(None, record_outcome(member, log), [log], log.executed_at))
    store.record_template_outcome(template_id, False)
    revised = store.revise_outcome(member.trajectory_id, Outcome.FAILURE)
    LOGGER.warning("direct reuse of %s failed, degrading", member.trajectory_id)
    return revised, log


def execute_with_fallback(query: Query, store: ExperienceStore, backend: GeneratorBackend, env: ExecutionEnv,
                          cfg: RoutingConfig = RoutingConfig()) -> ExecutionReport:
    """Serves a query, degrading A to B to C on failure.

    Route A executes the template's canonical member with no generator call.
    Route B rewrites the template's variable nodes. Route C plans from
    scratch. Tiers the initial decision passed over are not attempted.

    Args:
        query: query to serve
        store: experience store
        backend: generator
        env: execution environment
        cfg: routing thresholds

    Returns:
        ExecutionReport; failures are recorded in it, never raised
    """
    match = _find_match(query, store)
    decision = _initial_decision(match, cfg)
    LOGGER.info("%s: initial route %s (score %.3f)", query.query_id, decision.route.value, match.score)

    trail = []
    ledger = ZERO_LEDGER
    wall_steps = 0
    executions = 0
    final = None
    passed = decision.degraded_from

    if decision.route is Route.A_DIRECT_REUSE:
        final, log = _direct_reuse(match, store, env)
        wall_steps += len(log.steps)
        executions += 1
        trail.append((decision, log.outcome))
        if log.outcome is Outcome.SUCCESS:
            return ExecutionReport(query, tuple(trail), final, ledger, True, wall_steps, executions)
        passed = passed + (Route.A_DIRECT_REUSE,)

    if decision.route is not Route.C_INITIALIZE and match.template is not None:
        tier_b = RouteDecision(Route.B_REWRITE, decision.best_match, passed)
        try:
            result = iterative_generate(query, match.template, backend, store, env, cfg.max_iters, cfg.theta_a)
        except ExhaustedIterations as err:
            ledger = ledger.add(err.ledger)
            wall_steps += err.wall_steps
            executions += err.executions
            final = err.trajectory or final
            trail.append((tier_b, Outcome.FAILURE))
            passed = passed + (Route.B_REWRITE,)
            LOGGER.info("%s: rewrite failed, degrading to planning", query.query_id)
        else:
            trail.append((tier_b, Outcome.SUCCESS))
            return ExecutionReport(query, tuple(trail), result.trajectory, ledger.add(result.ledger), True,
                                   wall_steps + result.wall_steps, executions + result.executions)

    tier_c = RouteDecision(Route.C_INITIALIZE, decision.best_match, passed)
    try:
        result = iterative_generate(query, None, backend, store, env, cfg.max_iters, cfg.theta_a)
    except ExhaustedIterations as err:
        trail.append((tier_c, Outcome.FAILURE))
        LOGGER.warning("%s: planning exhausted %d attempt(s)", query.query_id, err.executions)
        return ExecutionReport(query, tuple(trail), err.trajectory or final, ledger.add(err.ledger), False,
                               wall_steps + err.wall_steps, executions + err.executions)

    trail.append((tier_c, Outcome.SUCCESS))
    return ExecutionReport(query, tuple(trail), result.trajectory, ledger.add(result.ledger), True,
                           wall_steps + result.wall_steps, executions + result.executions)


def record_feedback(report: ExecutionReport, verdict: Verdict, store: ExperienceStore) -> Trajectory:
    """Applies explicit user feedback to the report's final trajectory.

    UserOk adds one use. UserError revises the outcome to Failure and tags the
    trajectory ``user_rejected`` so an identical query skips direct reuse; a
    second UserError changes nothing.

    Returns:
        The stored trajectory after the update

    Raises:
        UnknownTrajectory: the final trajectory is not stored
    """
    trajectory = report.final_trajectory
    if trajectory is None or not store.has_trajectory(trajectory.trajectory_id):
        raise UnknownTrajectory(f"report for {report.query.query_id} has no stored final trajectory")

    if verdict is Verdict.USER_OK:
        store.record_usage(trajectory.trajectory_id)
        return store.get_trajectory(trajectory.trajectory_id)

    stored = store.get_trajectory(trajectory.trajectory_id)
    if stored.has_tag(USER_REJECTED_TAG):
        LOGGER.warning("%s already rejected", trajectory.trajectory_id)
        return stored

    return store.revise_outcome(trajectory.trajectory_id, Outcome.FAILURE, USER_REJECTED_TAG)


def route_histogram(reports: List[ExecutionReport]) -> dict:
    """Count of final routes over reports, every route present."""
    counts = {route_value.value: 0 for route_value in Route}
    for report in reports:
        counts[report.final_route.value] += 1
    return counts
