# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Query Embedding and Similarity"""

from enum import Enum
from typing import (Iterable, List, NamedTuple, Optional)

import logging
import re

import numpy
import requests

from eljef.workflow.lib.errors import (ConfigError, DimensionMismatch, EmptyText, RemoteUnavailable)
from eljef.workflow.lib.model import (EmbeddingVector, fnv1a_64)

LOGGER = logging.getLogger(__name__)

DEFAULT_DIMENSION = 256
"""Default embedding dimension."""

_MIN_DIMENSION = 8
_TOKEN_RE = re.compile(r'[^\W_]+')


class Provider(Enum):
    """Embedding providers"""
    DETERMINISTIC_HASH = 'DeterministicHash'
    REMOTE = 'Remote'


class EmbeddingConfig(NamedTuple):
    """Embedding settings.

    Attributes:
        dimension (int): vector length, at least 8
        provider (Provider): DeterministicHash or Remote
        remote_endpoint (str): URL of the remote provider
        timeout (float): remote request timeout in seconds
    """
    dimension: int = DEFAULT_DIMENSION
    provider: Provider = Provider.DETERMINISTIC_HASH
    remote_endpoint: Optional[str] = None
    timeout: float = 10.0

    def checked(self) -> 'EmbeddingConfig':
        """Returns self after checking the invariants.

        Raises:
            ConfigError: dimension below 8, or Remote without an endpoint
        """
        if self.dimension < _MIN_DIMENSION:
            raise ConfigError(f"embedding dimension must be >= {_MIN_DIMENSION}, got {self.dimension}")
        if self.provider is Provider.REMOTE and not self.remote_endpoint:
            raise ConfigError("Remote embedding provider requires remote_endpoint")

        return self


def tokenize(text: str) -> List[str]:
    """Lowercases text and splits it into word tokens."""
    return _TOKEN_RE.findall(text.lower())


def token_bucket(token: str, dimension: int) -> int:
    """Returns the bucket a token is counted in."""
    return fnv1a_64(token.encode('utf-8')) % dimension


def zero_vector(dimension: int) -> EmbeddingVector:
    """The designated zero vector."""
    return EmbeddingVector((0.0,) * dimension)


def _from_array(values: numpy.ndarray) -> EmbeddingVector:
    norm = float(numpy.linalg.norm(values))
    if norm == 0.0:
        return zero_vector(len(values))

    return EmbeddingVector(tuple(float(v) for v in values / norm))


def _embed_remote(text: str, cfg: EmbeddingConfig) -> EmbeddingVector:
    try:
        response = requests.post(cfg.remote_endpoint, json={'text': text}, timeout=cfg.timeout)
        response.raise_for_status()
        values = response.json()['values']
    except (requests.RequestException, KeyError, TypeError, ValueError) as err:
        raise RemoteUnavailable(f"remote embedding failed: {err}") from err

    if len(values) != cfg.dimension:
        raise RemoteUnavailable(f"remote embedding returned {len(values)} values, expected {cfg.dimension}")

    return _from_array(numpy.asarray(values, dtype=float))


def embed(text: str, cfg: EmbeddingConfig) -> EmbeddingVector:
    """Embeds text as a unit vector.

    The DeterministicHash provider counts tokens into ``dimension`` buckets
    chosen by FNV-1a and L2 normalizes the counts. Text with no word tokens
    embeds to the zero vector.

    Args:
        text: text to embed
        cfg: embedding settings

    Returns:
        EmbeddingVector of length ``cfg.dimension``

    Raises:
        EmptyText: text is empty after trimming
        RemoteUnavailable: the remote provider failed
    """
    if not text or not text.strip():
        raise EmptyText("cannot embed empty text")
    if cfg.provider is Provider.REMOTE:
        return _embed_remote(text, cfg)

    counts = numpy.zeros(cfg.dimension, dtype=float)
    for token in tokenize(text):
        counts[token_bucket(token, cfg.dimension)] += 1.0

    return _from_array(counts)


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity of two vectors.

    Returns 0.0 when either vector is the zero vector.

    Raises:
        DimensionMismatch: vectors differ in length
    """
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"vector dimensions differ: {a.dimension} != {b.dimension}")

    left = numpy.asarray(a.values, dtype=float)
    right = numpy.asarray(b.values, dtype=float)
    norms = float(numpy.linalg.norm(left)) * float(numpy.linalg.norm(right))
    if norms == 0.0:
        return 0.0

    score = float(numpy.dot(left, right)) / norms
    return max(-1.0, min(1.0, score))


def centroid(vectors: Iterable[EmbeddingVector], dimension: int) -> EmbeddingVector:
    """Normalized mean of vectors, the zero vector when there is nothing to average."""
    rows = [vector.values for vector in vectors]
    if not rows:
        return zero_vector(dimension)

    return _from_array(numpy.mean(numpy.asarray(rows, dtype=float), axis=0))
