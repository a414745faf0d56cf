# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Benchmark Workload Generation"""

from typing import (Dict, List, NamedTuple, Tuple)

import logging
import random

from eljef.workflow.lib.corpus import (ENTITY_POOLS, FAMILIES, NOVEL_INTENTS, Family, base_entities, default_faults,
                                       render)
from eljef.workflow.lib.embedding import (EmbeddingConfig, cosine_similarity, embed)
from eljef.workflow.lib.errors import (CalibrationFailure, ConfigError)
from eljef.workflow.lib.execution import FaultProfile
from eljef.workflow.lib.model import (EmbeddingVector, Query, Tier)
from eljef.workflow.lib.routing import RoutingConfig

LOGGER = logging.getLogger(__name__)

MAX_RESAMPLES = 100
_MIX_TOLERANCE = 1e-9


class FaultSpec(NamedTuple):
    """A fault injected into a tool once a run reaches a query index.

    Attributes:
        tool_id (str): tool to fault
        profile (FaultProfile): fault to inject
        activation_step (int): 0-based query index the fault becomes active at
    """
    tool_id: str
    profile: FaultProfile
    activation_step: int = 0

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {'activation_step': self.activation_step, 'profile': self.profile.to_json(), 'tool_id': self.tool_id}

    @classmethod
    def from_json(cls, data: dict) -> 'FaultSpec':
        """Builds a fault spec from its canonical dictionary form."""
        return cls(data['tool_id'], FaultProfile.from_json(data['profile']), int(data.get('activation_step', 0)))


class WorkloadConfig(NamedTuple):
    """Benchmark workload definition.

    Attributes:
        seed (int): seed for sampling and shuffling
        n_queries (int): number of queries
        tier_mix (tuple): (high, medium, novel) fractions summing to 1
        n_families (int): number of distinct base intents
        faults (tuple): FaultSpecs active during runs
    """
    seed: int = 42
    n_queries: int = 100
    tier_mix: Tuple[float, float, float] = (0.6, 0.3, 0.1)
    n_families: int = 8
    faults: Tuple[FaultSpec, ...] = ()

    def checked(self) -> 'WorkloadConfig':
        """Returns self after checking the mix and the counts.

        Raises:
            ConfigError: invalid value
        """
        if len(self.tier_mix) != 3 or any(share < 0 for share in self.tier_mix):
            raise ConfigError(f"tier_mix needs three non-negative fractions, got {self.tier_mix}")
        if abs(sum(self.tier_mix) - 1.0) > _MIX_TOLERANCE:
            raise ConfigError(f"tier_mix must sum to 1.0, got {sum(self.tier_mix)}")
        if not 1 <= self.n_families <= len(FAMILIES):
            raise ConfigError(f"n_families must be between 1 and {len(FAMILIES)}, got {self.n_families}")
        if self.n_queries < self.n_families:
            raise ConfigError(f"n_queries ({self.n_queries}) must be >= n_families ({self.n_families})")
        if any(fault.activation_step < 0 for fault in self.faults):
            raise ConfigError("fault activation steps must be >= 0")
        return self

    def tier_counts(self) -> Dict[Tier, int]:
        """Exact query count per tier, rounding spilling into the Novel tier."""
        high = int(round(self.n_queries * self.tier_mix[0]))
        medium = min(int(round(self.n_queries * self.tier_mix[1])), self.n_queries - high)
        return {Tier.HIGH: high, Tier.MEDIUM: medium, Tier.NOVEL: self.n_queries - high - medium}

    def to_json(self) -> dict:
        """Returns the canonical dictionary form."""
        return {
            'faults': [fault.to_json() for fault in self.faults],
            'n_families': self.n_families,
            'n_queries': self.n_queries,
            'seed': self.seed,
            'tier_mix': {'high': self.tier_mix[0], 'medium': self.tier_mix[1], 'novel': self.tier_mix[2]},
        }

    @classmethod
    def from_json(cls, data: dict) -> 'WorkloadConfig':
        """Builds a checked config from its dictionary form.

        ``faults`` may be the string ``default`` for the four built in faults
        active from the first query.
        """
        mix = data.get('tier_mix', {})
        if isinstance(mix, dict):
            mix = (mix.get('high', 0.0), mix.get('medium', 0.0), mix.get('novel', 0.0))
        faults = data.get('faults', ())
        if faults == 'default':
            faults = tuple(FaultSpec(tool_id, profile) for tool_id, profile in default_faults())
        else:
            faults = tuple(FaultSpec.from_json(fault) for fault in faults)
        try:
            return cls(int(data.get('seed', 42)), int(data.get('n_queries', 100)), tuple(float(x) for x in mix),
                       int(data.get('n_families', 8)), faults).checked()
        except (TypeError, ValueError) as err:
            raise ConfigError(f"invalid workload config: {err}") from err


def default_workload() -> WorkloadConfig:
    """Seed 42, 100 queries, mix 0.6/0.3/0.1, 8 families, the four default faults from the start."""
    return WorkloadConfig(42, 100, (0.6, 0.3, 0.1), 8,
                          tuple(FaultSpec(tool_id, profile) for tool_id, profile in default_faults()))


def _medium_text(rng: random.Random, family: Family, entities: Dict[str, str], base: EmbeddingVector,
                 embedding_cfg: EmbeddingConfig, routing_cfg: RoutingConfig) -> str:
    for _ in range(MAX_RESAMPLES):
        swapped = {name: rng.choice([value for value in ENTITY_POOLS[name] if value != entities[name]])
                   for name in family.entities()}
        text = render(family.text, swapped)
        score = cosine_similarity(embed(text, embedding_cfg), base)
        if routing_cfg.theta_b < score <= routing_cfg.theta_a:
            return text
        LOGGER.debug("medium candidate scored %.3f, resampling", score)

    raise CalibrationFailure(f"no medium query within ({routing_cfg.theta_b}, {routing_cfg.theta_a}] "
                             f"for '{family.text}' after {MAX_RESAMPLES} resamples")


def _novel_texts(rng: random.Random, count: int, bases: List[EmbeddingVector], embedding_cfg: EmbeddingConfig,
                 routing_cfg: RoutingConfig) -> List[str]:
    usable = []
    for intent in NOVEL_INTENTS:
        vector = embed(intent.text, embedding_cfg)
        if all(cosine_similarity(vector, base) < routing_cfg.theta_b for base in bases):
            usable.append(intent.text)
    if count and not usable:
        raise CalibrationFailure(f"no novel intent stays below {routing_cfg.theta_b} against every base query")

    texts = []
    pool = []
    while len(texts) < count:
        if not pool:
            pool = list(usable)
            rng.shuffle(pool)
        texts.append(pool.pop())

    return texts


def generate_workload(cfg: WorkloadConfig, embedding_cfg: EmbeddingConfig = EmbeddingConfig(),
                      routing_cfg: RoutingConfig = RoutingConfig()) -> List[Query]:
    """Builds the query list of a workload.

    High queries repeat a family's base query verbatim, families taken in
    turn. Medium queries swap every entity of a base for other values and
    are kept only when their similarity to the base falls in (theta_b,
    theta_a]. Novel queries come from intents with no family, sampled
    without replacement until the pool is exhausted, then from a reshuffled
    pool, each below theta_b against every base. The list is
    shuffled and numbered ``q0001`` onward.

    Args:
        cfg: workload definition
        embedding_cfg: embedding used for calibration
        routing_cfg: thresholds the tiers are calibrated against

    Returns:
        Queries carrying their tier hint

    Raises:
        ConfigError: invalid cfg
        CalibrationFailure: a tier band could not be hit in 100 resamples
    """
    cfg.checked()
    rng = random.Random(cfg.seed)
    counts = cfg.tier_counts()

    families = FAMILIES[:cfg.n_families]
    entities = [base_entities(index, family) for index, family in enumerate(families)]
    bases = [render(family.text, values) for family, values in zip(families, entities)]
    vectors = [embed(text, embedding_cfg) for text in bases]

    items = [(bases[index % len(bases)], Tier.HIGH) for index in range(counts[Tier.HIGH])]
    for index in range(counts[Tier.MEDIUM]):
        family = index % len(families)
        items.append((_medium_text(rng, families[family], entities[family], vectors[family], embedding_cfg,
                                   routing_cfg), Tier.MEDIUM))
    items.extend((text, Tier.NOVEL) for text in _novel_texts(rng, counts[Tier.NOVEL], vectors, embedding_cfg,
                                                              routing_cfg))

    rng.shuffle(items)
    LOGGER.info("generated %d queries (%d high, %d medium, %d novel)", len(items), counts[Tier.HIGH],
                counts[Tier.MEDIUM], counts[Tier.NOVEL])
    return [Query(text, f"q{index:04d}", tier) for index, (text, tier) in enumerate(items, 1)]


def base_queries(cfg: WorkloadConfig) -> List[str]:
    """Base query text of each family in the workload."""
    return [render(family.text, base_entities(index, family))
            for index, family in enumerate(FAMILIES[:cfg.n_families])]
