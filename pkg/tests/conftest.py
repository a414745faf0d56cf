# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Shared test fixtures"""

from typing import (Any, Dict, Sequence, Tuple)

import pytest

from eljef.workflow.lib.backend import MockBackend
from eljef.workflow.lib.corpus import (default_faults, default_registry, default_seed_table)
from eljef.workflow.lib.embedding import (EmbeddingConfig, embed)
from eljef.workflow.lib.execution import ExecutionEnv
from eljef.workflow.lib.model import (Metadata, Outcome, Pattern, Query, Trajectory, WorkflowNode)
from eljef.workflow.lib.store import ExperienceStore

EMBEDDING = EmbeddingConfig()


def chain_nodes(steps: Sequence[Tuple[str, Dict[str, Any]]], variable: Sequence[int] = ()) -> Tuple[WorkflowNode, ...]:
    """Sequential nodes n1..nk; indexes in ``variable`` are marked variable."""
    nodes = []
    for index, (tool_id, params) in enumerate(steps, 1):
        nodes.append(WorkflowNode(f"n{index}", tool_id, dict(params), (index - 1) in variable,
                                  depends_on=(f"n{index - 1}",) if index > 1 else ()))
    return tuple(nodes)


def make_trajectory(trajectory_id: str, text: str, steps: Sequence[Tuple[str, Dict[str, Any]]],
                    outcome: Outcome = Outcome.SUCCESS, executed_at: int = 1, variable: Sequence[int] = (),
                    cfg: EmbeddingConfig = EMBEDDING) -> Trajectory:
    """A valid sequential trajectory."""
    return Trajectory(trajectory_id, Query(text, trajectory_id), embed(text, cfg), chain_nodes(steps, variable),
                      Pattern.SEQUENTIAL, {}, Metadata(executed_at, outcome))


@pytest.fixture
def registry():
    """Default tool catalogue without faults."""
    return default_registry()


@pytest.fixture
def faulted_registry():
    """Default tool catalogue with the four default faults injected."""
    tools = default_registry()
    for tool_id, profile in default_faults():
        tools.inject_fault(tool_id, profile)
    return tools


@pytest.fixture
def env(registry):
    """Execution environment over the clean catalogue."""
    return ExecutionEnv(registry, 0)


@pytest.fixture
def faulted_env(faulted_registry):
    """Execution environment over the faulted catalogue."""
    return ExecutionEnv(faulted_registry, 0)


@pytest.fixture
def backend():
    """Deterministic mock generator over the built in seed table."""
    return MockBackend(default_seed_table())


@pytest.fixture
def store():
    """In-memory experience store."""
    return ExperienceStore(None, EMBEDDING)


@pytest.fixture
def disk_store(tmp_path):
    """Experience store persisted under a temporary directory."""
    return ExperienceStore(str(tmp_path / 'store'), EMBEDDING)
