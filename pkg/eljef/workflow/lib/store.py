# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Experience Store

Trajectories, node experiences and templates kept in memory and persisted
as one JSON object per line. Retrieval is an exact scan.
"""

from contextlib import contextmanager
from typing import (Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union)

import hashlib
import json
import logging
import os
import tempfile
import threading

from eljef.core import fops
from eljef.workflow.lib.embedding import (EmbeddingConfig, centroid, cosine_similarity, tokenize)
from eljef.workflow.lib.errors import (DimensionMismatch, EmptyStore, InvalidExperience, InvalidTrajectory,
                                       StorageFailure, UnknownTemplate, UnknownTrajectory)
from eljef.workflow.lib.extraction import classify_experience
from eljef.workflow.lib.model import (EmbeddingVector, ErrorFingerprint, NodeExperience, Outcome, ParameterSchema,
                                      Trajectory, TrajectoryTemplate, Violation, WorkflowNode, canonical_json,
                                      slot_marker, structural_hash, template_id_for, validate)

LOGGER = logging.getLogger(__name__)

EXPERIENCES_FILE = 'experiences.jsonl'
MANIFEST_FILE = 'manifest.json'
TEMPLATES_FILE = 'templates.jsonl'
TRAJECTORIES_FILE = 'trajectories.jsonl'

MERGED_TAG = 'merged:{0}'
"""Compatibility tag format for merged trajectories."""

SCHEMA_VERSION = 1
"""On-disk layout version written to the manifest."""

USER_REJECTED_TAG = 'user_rejected'
"""Compatibility tag set by negative user feedback."""

_MERGE_TOLERANCE = 1e-9


class MergeGroup(NamedTuple):
    """One group found by merge_similar.

    Attributes:
        canonical_id (str): most recent Success member, None when the group has no success
        member_ids (tuple): sorted member ids, canonical included
    """
    canonical_id: Optional[str]
    member_ids: Tuple[str, ...]


class MergeReport(NamedTuple):
    """Result of merge_similar.

    Attributes:
        groups (tuple): MergeGroups holding two or more members
        tagged (int): number of trajectories newly tagged
    """
    groups: Tuple[MergeGroup, ...]
    tagged: int


class _ReadWriteLock:
    """Many readers or one writer."""

    def __init__(self) -> None:
        self._cond = threading.Condition(threading.Lock())
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self) -> Iterator[None]:
        """Shared access."""
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        """Exclusive access."""
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


def _recency_key(experience: NodeExperience) -> tuple:
    return -experience.recorded_at, experience.experience_id


def _avoidance_first(experience: NodeExperience) -> tuple:
    return (0 if experience.polarity is Outcome.FAILURE else 1,) + _recency_key(experience)


class ExperienceStore:
    """Repository of trajectories, node experiences and templates.

    Mutating calls are atomic with respect to readers and are written to disk
    before they return. A store opened with ``path=None`` lives in memory only.

    Args:
        path: store directory, None for an in-memory store
        embedding_cfg: embedding settings, the dimension is pinned in the manifest

    Raises:
        DimensionMismatch: the manifest records a different embedding dimension
        StorageFailure: the store files cannot be read
    """

    def __init__(self, path: Optional[str], embedding_cfg: EmbeddingConfig = EmbeddingConfig()) -> None:
        self.path = path
        self.embedding_cfg = embedding_cfg.checked()
        self._lock = _ReadWriteLock()
        self._trajectories = {}
        self._experiences = {}
        self._templates = {}
        self._lines = {TRAJECTORIES_FILE: {}, EXPERIENCES_FILE: {}, TEMPLATES_FILE: {}}
        self._by_fingerprint = {}
        self._by_intent = {}
        self._by_tool = {}
        self._member_template = {}

        if path:
            self._open()

    def __len__(self) -> int:
        with self._lock.read():
            return len(self._trajectories)

    @property
    def dimension(self) -> int:
        """Embedding dimension of every stored vector."""
        return self.embedding_cfg.dimension

    # persistence

    def manifest(self) -> dict:
        """Manifest contents."""
        return {'embedding_dimension': self.dimension, 'schema_version': SCHEMA_VERSION}

    def _open(self) -> None:
        manifest_path = os.path.join(self.path, MANIFEST_FILE)
        if not os.path.exists(manifest_path):
            try:
                os.makedirs(self.path, exist_ok=True)
                fops.file_write_convert(manifest_path, fops.JSON, self.manifest())
            except OSError as err:
                raise StorageFailure(f"cannot create store at {self.path}: {err}") from err
            for name in self._lines:
                self._write_file(name)
            LOGGER.info("created experience store %s", self.path)
            return

        manifest = fops.file_read_convert(manifest_path, fops.JSON, default=True) or {}
        if int(manifest.get('embedding_dimension', -1)) != self.dimension:
            raise DimensionMismatch(f"store {self.path} has embedding dimension "
                                    f"{manifest.get('embedding_dimension')}, configured {self.dimension}")

        try:
            for data in self._read_file(TRAJECTORIES_FILE):
                self._set_trajectory(Trajectory.from_json(data))
            for data in self._read_file(EXPERIENCES_FILE):
                self._set_experience(NodeExperience.from_json(data))
            for data in self._read_file(TEMPLATES_FILE):
                self._set_template(TrajectoryTemplate.from_json(data))
        except (KeyError, TypeError, ValueError) as err:
            raise StorageFailure(f"corrupt store {self.path}: {err}") from err

        LOGGER.info("opened experience store %s: %d trajectories, %d experiences, %d templates", self.path,
                    len(self._trajectories), len(self._experiences), len(self._templates))

    def _read_file(self, name: str) -> Iterator[dict]:
        path = os.path.join(self.path, name)
        if not os.path.exists(path):
            return
        try:
            with open(path, 'r', encoding='utf-8') as data_file:
                lines = data_file.readlines()
        except OSError as err:
            raise StorageFailure(f"cannot read {path}: {err}") from err
        for line in lines:
            if line.strip():
                yield json.loads(line)

    def serialize(self, name: str) -> str:
        """Serialized contents of one store file, records sorted by id."""
        lines = self._lines[name]
        return ''.join(lines[key] + '\n' for key in sorted(lines))

    def _write_file(self, name: str) -> None:
        if not self.path:
            return
        target = os.path.join(self.path, name)
        try:
            handle, temp_path = tempfile.mkstemp(dir=self.path, prefix=f".{name}.")
            with os.fdopen(handle, 'w', encoding='utf-8') as data_file:
                data_file.write(self.serialize(name))
            os.replace(temp_path, target)
        except OSError as err:
            raise StorageFailure(f"cannot write {target}: {err}") from err

    def digest(self) -> str:
        """SHA-256 over the manifest and every store file."""
        sha = hashlib.sha256()
        with self._lock.read():
            sha.update(canonical_json(self.manifest()).encode('utf-8'))
            for name in (TRAJECTORIES_FILE, EXPERIENCES_FILE, TEMPLATES_FILE):
                sha.update(name.encode('utf-8'))
                sha.update(self.serialize(name).encode('utf-8'))
        return sha.hexdigest()

    # internal setters, callers hold the write lock

    def _set_trajectory(self, trajectory: Trajectory) -> None:
        self._trajectories[trajectory.trajectory_id] = trajectory
        self._lines[TRAJECTORIES_FILE][trajectory.trajectory_id] = canonical_json(trajectory.to_json())

    def _set_experience(self, experience: NodeExperience) -> None:
        self._experiences[experience.experience_id] = experience
        self._lines[EXPERIENCES_FILE][experience.experience_id] = canonical_json(experience.to_json())
        if experience.fingerprint:
            _index_add(self._by_fingerprint, experience.fingerprint, experience.experience_id)
        _index_add(self._by_intent, experience.intent_key, experience.experience_id)
        _index_add(self._by_tool, experience.tool_id, experience.experience_id)
        if experience.best_tool:
            _index_add(self._by_tool, experience.best_tool, experience.experience_id)

    def _set_template(self, template: TrajectoryTemplate) -> None:
        self._templates[template.template_id] = template
        self._lines[TEMPLATES_FILE][template.template_id] = canonical_json(template.to_json())
        for member in template.member_ids:
            self._member_template[member] = template.template_id

    def _replace_templates(self, templates: Iterable[TrajectoryTemplate]) -> None:
        self._templates = {}
        self._lines[TEMPLATES_FILE] = {}
        self._member_template = {}
        for template in templates:
            self._set_template(template)

    def _update_metadata(self, trajectory_id: str, **changes) -> Trajectory:
        trajectory = self._get_trajectory(trajectory_id)
        updated = trajectory._replace(metadata=trajectory.metadata._replace(**changes))
        self._set_trajectory(updated)
        return updated

    # trajectories

    def put_trajectory(self, trajectory: Trajectory) -> str:
        """Stores a trajectory, or a new revision of an existing one.

        Args:
            trajectory: trajectory to store

        Returns:
            The trajectory id. A revision gets ``version_id`` one above the stored one.

        Raises:
            InvalidTrajectory: validation failed or an experience ref does not resolve
            DimensionMismatch: trigger embedding has the wrong dimension
            StorageFailure: the store file could not be written
        """
        violations = validate(trajectory)
        with self._lock.write():
            for node in trajectory.nodes:
                if any(ref not in self._experiences for ref in node.experience_refs):
                    violations.append(Violation.UNRESOLVED_EXPERIENCE_REF)
                    break
            if violations:
                raise InvalidTrajectory(violations)
            if trajectory.trigger_embedding.dimension != self.dimension:
                raise DimensionMismatch(f"trigger embedding has dimension {trajectory.trigger_embedding.dimension}, "
                                        f"store uses {self.dimension}")

            previous = self._trajectories.get(trajectory.trajectory_id)
            version = previous.metadata.version_id + 1 if previous else 1
            stored = trajectory._replace(metadata=trajectory.metadata._replace(version_id=version))
            self._set_trajectory(stored)
            self._write_file(TRAJECTORIES_FILE)

        LOGGER.debug("stored trajectory %s version %d (%s)", stored.trajectory_id, version,
                     stored.metadata.outcome.value)
        return stored.trajectory_id

    def _get_trajectory(self, trajectory_id: str) -> Trajectory:
        if trajectory_id not in self._trajectories:
            raise UnknownTrajectory(f"unknown trajectory: {trajectory_id}")
        return self._trajectories[trajectory_id]

    def get_trajectory(self, trajectory_id: str) -> Trajectory:
        """Returns a stored trajectory.

        Raises:
            UnknownTrajectory: id not stored
        """
        with self._lock.read():
            return self._get_trajectory(trajectory_id)

    def has_trajectory(self, trajectory_id: str) -> bool:
        """True when the id is stored."""
        with self._lock.read():
            return trajectory_id in self._trajectories

    def trajectories(self) -> List[Trajectory]:
        """Every stored trajectory, sorted by id."""
        with self._lock.read():
            return [self._trajectories[key] for key in sorted(self._trajectories)]

    def successful_trajectories(self) -> List[Trajectory]:
        """Stored Success trajectories, sorted by id."""
        return [trajectory for trajectory in self.trajectories() if trajectory.succeeded]

    def revise_outcome(self, trajectory_id: str, outcome: Outcome, tag: str = None) -> Trajectory:
        """Stores a revision of a trajectory with a new outcome and an optional tag.

        Raises:
            UnknownTrajectory: id not stored
        """
        current = self.get_trajectory(trajectory_id)
        tags = current.metadata.compatibility_tags
        if tag and tag not in tags:
            tags = tags + (tag,)
        self.put_trajectory(current._replace(metadata=current.metadata._replace(outcome=outcome,
                                                                                compatibility_tags=tags)))
        return self.get_trajectory(trajectory_id)

    def record_usage(self, trajectory_id: str, count: int = 1) -> int:
        """Adds to a trajectory's usage count without a new revision.

        Returns:
            The new usage count

        Raises:
            UnknownTrajectory: id not stored
        """
        with self._lock.write():
            current = self._get_trajectory(trajectory_id)
            updated = self._update_metadata(trajectory_id, usage_count=current.metadata.usage_count + count)
            self._write_file(TRAJECTORIES_FILE)
        return updated.metadata.usage_count

    def _priority_of(self, trajectory: Trajectory) -> int:
        template_id = self._member_template.get(trajectory.trajectory_id)
        template_priority = self._templates[template_id].priority if template_id in self._templates else 0
        return max(trajectory.metadata.priority, template_priority)

    def find_nearest(self, query: EmbeddingVector, k: int, outcome: Outcome = None) -> List[Tuple[str, float]]:
        """Exact nearest neighbours by trigger cosine similarity.

        Ties are broken by higher priority, then more recent execution, then id.

        Args:
            query: query embedding
            k: number of results, at least 1
            outcome: only consider trajectories with this outcome

        Returns:
            Up to k (trajectory_id, score) pairs, best first

        Raises:
            EmptyStore: nothing to search
            DimensionMismatch: query has the wrong dimension
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")

        with self._lock.read():
            candidates = [trajectory for trajectory in self._trajectories.values()
                          if outcome is None or trajectory.metadata.outcome is outcome]
            if not candidates:
                raise EmptyStore("no trajectories to search")
            scored = []
            for trajectory in candidates:
                score = cosine_similarity(query, trajectory.trigger_embedding)
                scored.append(((-score, -self._priority_of(trajectory), -trajectory.metadata.executed_at,
                                trajectory.trajectory_id), score))

        scored.sort(key=lambda item: item[0])
        return [(key[3], score) for key, score in scored[:k]]

    # experiences

    def put_experiences(self, experiences: Iterable[NodeExperience]) -> List[str]:
        """Stores node experiences, refreshing the tick of known ones.

        Returns:
            The stored experience ids

        Raises:
            InvalidExperience: a polarity invariant is broken
        """
        experiences = list(experiences)
        for experience in experiences:
            if experience.polarity is Outcome.FAILURE and experience.fingerprint is None:
                raise InvalidExperience(f"failure experience {experience.experience_id} has no fingerprint")
            if experience.polarity is Outcome.SUCCESS and not experience.best_tool and experience.schema is None:
                raise InvalidExperience(f"success experience {experience.experience_id} has no tool or schema")

        if not experiences:
            return []

        with self._lock.write():
            for experience in experiences:
                known = self._experiences.get(experience.experience_id)
                if known and known.recorded_at >= experience.recorded_at:
                    continue
                self._set_experience(experience)
            self._write_file(EXPERIENCES_FILE)

        return [experience.experience_id for experience in experiences]

    def get_experience(self, experience_id: str) -> NodeExperience:
        """Returns a stored experience.

        Raises:
            KeyError: id not stored
        """
        with self._lock.read():
            return self._experiences[experience_id]

    def experiences(self) -> List[NodeExperience]:
        """Every stored experience, sorted by id."""
        with self._lock.read():
            return [self._experiences[key] for key in sorted(self._experiences)]

    def lookup_experiences(self, key: Union[ErrorFingerprint, str]) -> List[NodeExperience]:
        """Exact match on the fingerprint index or the intent_key index.

        Failure experiences come before Success ones, most recent first within each.
        """
        with self._lock.read():
            index = self._by_fingerprint if isinstance(key, ErrorFingerprint) else self._by_intent
            found = [self._experiences[ident] for ident in index.get(key, ())]
        return sorted(found, key=_avoidance_first)

    def experiences_for_tool(self, tool_id: str) -> List[NodeExperience]:
        """Experiences about a tool, either as the failing tool or the best tool."""
        with self._lock.read():
            found = [self._experiences[ident] for ident in self._by_tool.get(tool_id, ())]
        return sorted(found, key=_avoidance_first)

    def failure_experiences(self, limit: int = None) -> List[NodeExperience]:
        """Failure experiences with distinct fingerprints, most recent first."""
        with self._lock.read():
            latest = {}
            for experience in self._experiences.values():
                if experience.polarity is not Outcome.FAILURE:
                    continue
                known = latest.get(experience.fingerprint)
                if known is None or _recency_key(experience) < _recency_key(known):
                    latest[experience.fingerprint] = experience
        ordered = sorted(latest.values(), key=_recency_key)
        return ordered[:limit] if limit is not None else ordered

    def schema_for(self, tool_id: str, intent: str = None) -> Optional[ParameterSchema]:
        """Latest Success schema for a tool, preferring the given intent."""
        candidates = [experience for experience in self.experiences_for_tool(tool_id)
                      if experience.polarity is Outcome.SUCCESS and experience.best_tool == tool_id
                      and experience.schema is not None]
        for experience in candidates:
            if experience.intent_key == intent:
                return experience.schema
        return candidates[0].schema if candidates else None

    # templates

    def get_template(self, template_id: str) -> TrajectoryTemplate:
        """Returns a stored template.

        Raises:
            UnknownTemplate: id not stored
        """
        with self._lock.read():
            if template_id not in self._templates:
                raise UnknownTemplate(f"unknown template: {template_id}")
            return self._templates[template_id]

    def templates(self) -> List[TrajectoryTemplate]:
        """Every stored template, sorted by id."""
        with self._lock.read():
            return [self._templates[key] for key in sorted(self._templates)]

    def template_of(self, trajectory_id: str) -> Optional[str]:
        """Id of the template a trajectory belongs to, if any."""
        with self._lock.read():
            return self._member_template.get(trajectory_id)

    def rank_templates(self, query: EmbeddingVector) -> List[Tuple[str, float]]:
        """Scores every template's trigger centroid against a query embedding.

        Returns:
            (template_id, score) pairs, best first, ties by priority then id
        """
        with self._lock.read():
            scored = [((-cosine_similarity(query, template.trigger_centroid), -template.priority,
                        template.template_id), template) for template in self._templates.values()]

        scored.sort(key=lambda item: item[0])
        return [(key[2], -key[0]) for key, _ in scored]

    def canonical_trajectory(self, template_id: str) -> Optional[Trajectory]:
        """The member direct reuse executes.

        Only Success members without the ``user_rejected`` tag qualify. The
        highest priority wins, then usage count, then the most recent, then id.

        Raises:
            UnknownTemplate: id not stored
        """
        with self._lock.read():
            if template_id not in self._templates:
                raise UnknownTemplate(f"unknown template: {template_id}")
            members = [self._trajectories[member] for member in self._templates[template_id].member_ids
                       if member in self._trajectories]

        eligible = [member for member in members if member.succeeded and not member.has_tag(USER_REJECTED_TAG)]
        if not eligible:
            return None
        return max(eligible, key=lambda t: (t.metadata.priority, t.metadata.usage_count, t.metadata.executed_at,
                                            t.trajectory_id))

    def merge_similar(self, similarity_floor: float) -> MergeReport:
        """Groups structurally identical trajectories with similar triggers.

        Members other than the canonical gain the tag ``merged:<canonical>`` and
        hand their usage count to the canonical. Nothing is deleted.

        Args:
            similarity_floor: minimum trigger cosine, in (0, 1]

        Returns:
            MergeReport listing every group of two or more
        """
        if not 0 < similarity_floor <= 1:
            raise ValueError(f"similarity_floor must be in (0, 1], got {similarity_floor}")

        with self._lock.write():
            ordered = [self._trajectories[key] for key in sorted(self._trajectories)]
            hashes = [structural_hash(trajectory) for trajectory in ordered]
            parents = list(range(len(ordered)))

            def _find(index: int) -> int:
                while parents[index] != index:
                    parents[index] = parents[parents[index]]
                    index = parents[index]
                return index

            for left, first in enumerate(ordered):
                for right in range(left + 1, len(ordered)):
                    if hashes[left] != hashes[right]:
                        continue
                    score = cosine_similarity(first.trigger_embedding, ordered[right].trigger_embedding)
                    if score >= similarity_floor - _MERGE_TOLERANCE:
                        parents[_find(right)] = _find(left)

            clusters = {}
            for index, trajectory in enumerate(ordered):
                clusters.setdefault(_find(index), []).append(trajectory)

            groups = []
            tagged = 0
            for members in clusters.values():
                if len(members) < 2:
                    continue
                successes = [member for member in members if member.succeeded]
                canonical = max(successes, key=lambda t: (t.metadata.executed_at, t.trajectory_id)) \
                    if successes else None
                groups.append(MergeGroup(canonical.trajectory_id if canonical else None,
                                         tuple(sorted(member.trajectory_id for member in members))))
                if canonical is None:
                    continue
                tag = MERGED_TAG.format(canonical.trajectory_id)
                moved = 0
                for member in members:
                    if member.trajectory_id == canonical.trajectory_id:
                        continue
                    tags = member.metadata.compatibility_tags
                    if tag not in tags:
                        tags = tags + (tag,)
                        tagged += 1
                    moved += member.metadata.usage_count
                    self._update_metadata(member.trajectory_id, compatibility_tags=tags, usage_count=0)
                if moved:
                    self._update_metadata(canonical.trajectory_id,
                                          usage_count=canonical.metadata.usage_count + moved)

            self._write_file(TRAJECTORIES_FILE)

        groups.sort(key=lambda group: group.member_ids)
        LOGGER.info("merge found %d group(s), tagged %d trajectory(ies)", len(groups), tagged)
        return MergeReport(tuple(groups), tagged)

    def cluster_templates(self, theta_a: float = 0.9) -> List[TrajectoryTemplate]:
        """Rebuilds one template per distinct structural hash of Success trajectories.

        Slot parameters of a variable node are those whose values differ
        across members or are bound to a member's trigger text. Priority and
        reuse tallies of an existing template are carried over.

        Args:
            theta_a: direct reuse threshold used to classify each template

        Returns:
            Templates sorted by id
        """
        with self._lock.write():
            groups = {}
            for key in sorted(self._trajectories):
                trajectory = self._trajectories[key]
                if trajectory.succeeded:
                    groups.setdefault(structural_hash(trajectory), []).append(trajectory)

            templates = []
            for hash_value, members in groups.items():
                template_id = template_id_for(hash_value)
                previous = self._templates.get(template_id)
                canonical = max(members, key=lambda t: (t.metadata.executed_at, t.trajectory_id))
                skeleton = tuple(skeleton_node(canonical, index, members) for index in range(len(canonical.nodes)))
                usage = sum(member.metadata.usage_count for member in members)
                template = TrajectoryTemplate(
                    template_id, hash_value, skeleton, tuple(member.trajectory_id for member in members),
                    centroid((member.trigger_embedding for member in members), self.dimension), None,
                    max(usage, previous.priority if previous else 0), canonical.pattern,
                    previous.success_count if previous else 0, previous.failure_count if previous else 0)
                reuse = classify_experience(template, [member.trigger_embedding for member in members], theta_a)
                templates.append(template._replace(reuse_class=reuse))

            templates.sort(key=lambda template: template.template_id)
            self._replace_templates(templates)
            self._write_file(TEMPLATES_FILE)

        LOGGER.debug("clustered %d template(s)", len(templates))
        return templates

    def boost_priority(self, template_id: str) -> int:
        """Raises a template's priority to the sum of its members' usage counts.

        Returns:
            The new priority, never lower than the old one

        Raises:
            UnknownTemplate: id not stored
        """
        with self._lock.write():
            if template_id not in self._templates:
                raise UnknownTemplate(f"unknown template: {template_id}")
            template = self._templates[template_id]
            usage = sum(self._trajectories[member].metadata.usage_count for member in template.member_ids
                        if member in self._trajectories)
            priority = max(template.priority, usage)
            self._set_template(template._replace(priority=priority))
            self._write_file(TEMPLATES_FILE)

        return priority

    def record_template_outcome(self, template_id: str, succeeded: bool) -> None:
        """Adds one reuse result to a template's tallies, ignoring unknown templates."""
        with self._lock.write():
            template = self._templates.get(template_id)
            if template is None:
                return
            if succeeded:
                template = template._replace(success_count=template.success_count + 1)
            else:
                template = template._replace(failure_count=template.failure_count + 1)
            self._set_template(template)
            self._write_file(TEMPLATES_FILE)

    def index_problems(self) -> List[str]:
        """Describes every secondary index entry or reference that does not resolve."""
        problems = []
        with self._lock.read():
            for name, index in (('fingerprint', self._by_fingerprint), ('intent', self._by_intent),
                                ('tool', self._by_tool)):
                for key, idents in index.items():
                    problems.extend(f"{name} index {key}: {ident}" for ident in idents
                                    if ident not in self._experiences)
            for template in self._templates.values():
                problems.extend(f"template {template.template_id}: {member}" for member in template.member_ids
                                if member not in self._trajectories)
            for trajectory in self._trajectories.values():
                for node in trajectory.nodes:
                    problems.extend(f"trajectory {trajectory.trajectory_id}: {ref}" for ref in node.experience_refs
                                    if ref not in self._experiences)
        return problems


def _index_add(index: Dict, key, ident: str) -> None:
    entries = index.setdefault(key, [])
    if ident not in entries:
        entries.append(ident)


def skeleton_node(canonical: Trajectory, index: int, members: List[Trajectory]) -> WorkflowNode:
    node = canonical.nodes[index]
    if not node.is_variable:
        return node

    slots = set()
    for name in node.params:
        values = [member.nodes[index].params.get(name) for member in members]
        if any(value != values[0] for value in values):
            slots.add(name)
            continue
        for member in members:
            value = member.nodes[index].params.get(name)
            tokens = tokenize(value) if isinstance(value, str) else []
            if tokens and set(tokens) <= set(tokenize(member.trigger.text)):
                slots.add(name)
                break

    params = {name: slot_marker(name) if name in slots else value for name, value in node.params.items()}
    return node._replace(params=params, experience_refs=())
