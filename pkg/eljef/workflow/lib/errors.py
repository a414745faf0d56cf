# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Workflow Engine Errors"""


class WorkflowError(Exception):
    """Base class for every error raised by the workflow engine."""


class ConfigError(WorkflowError):
    """Invalid engine, routing, embedding or workload configuration."""


class InvalidTrajectory(WorkflowError):
    """A trajectory failed validation.

    Args:
        violations: list of Violation values found by validate()
    """

    def __init__(self, violations: list) -> None:
        self.violations = list(violations)
        names = ', '.join(str(getattr(v, 'value', v)) for v in self.violations)
        super().__init__(f"invalid trajectory: {names}")


class InvalidExperience(WorkflowError):
    """A node experience breaks its polarity invariant."""


class StorageFailure(WorkflowError):
    """The experience store could not be read or written."""


class EmptyStore(WorkflowError):
    """A retrieval was made against a store with nothing to search."""


class UnknownTemplate(WorkflowError):
    """The requested template id is not in the store."""


class UnknownTrajectory(WorkflowError):
    """The requested trajectory id is not in the store."""


class EmptyText(WorkflowError):
    """Text to embed is empty after trimming."""


class RemoteUnavailable(WorkflowError):
    """The remote embedding endpoint failed or returned garbage."""


class DimensionMismatch(WorkflowError):
    """Two vectors, or a vector and a store, disagree on dimension."""


class EmptyLog(WorkflowError):
    """An execution log holds no steps."""


class BothAbsent(WorkflowError):
    """Experience extraction was given neither a success nor a failure."""


class EmptySamples(WorkflowError):
    """Schema induction was given no samples."""


class NotVariableNode(WorkflowError):
    """A rewrite prompt was requested for a fixed node."""


class GenerationError(WorkflowError):
    """Base class for errors raised while producing a trajectory.

    Attributes:
        ledger: TokenLedger spent before the error, None when nothing was spent
    """
    ledger = None


class GeneratorFailure(GenerationError):
    """The generator backend failed to produce a usable payload.

    Args:
        node_id: node being generated, None for a full plan
        reason: text describing the failure
    """

    def __init__(self, node_id: str = None, reason: str = '') -> None:
        self.node_id = node_id
        target = f"node {node_id}" if node_id else "plan"
        super().__init__(f"generator failed for {target}: {reason}" if reason else f"generator failed for {target}")


class SchemaViolation(GeneratorFailure):
    """Generated node parameters broke the node's parameter schema.

    Args:
        node_id: node whose payload was rejected
        problems: list of problem strings
    """

    def __init__(self, node_id: str, problems: list) -> None:
        self.problems = list(problems)
        super().__init__(node_id, '; '.join(self.problems))


class UnparsablePlan(GenerationError):
    """A full plan payload could not be turned into a trajectory."""


class UnknownToolInPlan(GenerationError):
    """A full plan referenced a tool that is not registered.

    Args:
        tool_id: the unregistered tool id
    """

    def __init__(self, tool_id: str) -> None:
        self.tool_id = tool_id
        super().__init__(f"plan references unknown tool: {tool_id}")


class ExhaustedIterations(WorkflowError):
    """Iterative generation ran out of attempts without a success.

    Args:
        last_log: ExecutionLog of the final attempt
        trajectory: trajectory of the final attempt
        ledger: TokenLedger summed over every attempt
        wall_steps: number of executed steps over every attempt
        executions: number of executions performed
    """

    def __init__(self, last_log, trajectory, ledger, wall_steps: int = 0, executions: int = 0) -> None:
        self.last_log = last_log
        self.trajectory = trajectory
        self.ledger = ledger
        self.wall_steps = wall_steps
        self.executions = executions
        super().__init__(f"no successful execution after {executions} attempt(s)")


class DuplicateTool(WorkflowError):
    """A tool id was registered twice."""


class UnknownTool(WorkflowError):
    """A node or registry call named a tool that is not registered."""


class CalibrationFailure(WorkflowError):
    """The workload generator could not hit a similarity band."""


class MissingBaseline(WorkflowError):
    """A comparison was requested without the strategies it needs."""
