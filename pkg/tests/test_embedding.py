# -*- coding: UTF-8 -*-
# SPDX-License-Identifier: 0BSD

"""Embedding tests"""

import math

import pytest
from hypothesis import (given, settings)
from hypothesis import strategies as st

from eljef.workflow.lib.embedding import (EmbeddingConfig, Provider, centroid, cosine_similarity, embed,
                                          token_bucket, tokenize)
from eljef.workflow.lib.errors import (ConfigError, DimensionMismatch, EmptyText)
from eljef.workflow.lib.model import EmbeddingVector

CFG = EmbeddingConfig()

words = st.text(alphabet='abcdefghij ', min_size=1, max_size=40).filter(lambda text: text.strip())


def test_token_buckets():
    assert token_bucket('aaa', 256) == 162
    assert token_bucket('bbb', 256) == 165


def test_two_token_text_splits_evenly():
    vector = embed('aaa bbb', CFG)
    expected = 1 / math.sqrt(2)

    assert vector.dimension == 256
    assert vector.values[162] == pytest.approx(expected)
    assert vector.values[165] == pytest.approx(expected)
    assert sum(1 for value in vector.values if value) == 2


def test_tokenize_lowercases_and_drops_punctuation():
    assert tokenize('Audit SKU AB123, region_EU!') == ['audit', 'sku', 'ab123', 'region', 'eu']


def test_embed_is_deterministic_and_case_blind():
    assert embed('Export Inventory Table', CFG) == embed('export inventory table', CFG)


def test_embed_rejects_empty_text():
    with pytest.raises(EmptyText):
        embed('   ', CFG)


def test_text_without_word_tokens_is_the_zero_vector():
    vector = embed('!!! ---', CFG)
    assert vector.is_zero()
    assert cosine_similarity(vector, embed('aaa', CFG)) == 0.0


@settings(max_examples=100)
@given(words, words)
def test_cosine_is_symmetric_and_bounded(left, right):
    a = embed(left, CFG)
    b = embed(right, CFG)

    assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a))
    assert -1.0 <= cosine_similarity(a, b) <= 1.0
    assert cosine_similarity(a, a) == pytest.approx(1.0)


def _naive_cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    norms = math.sqrt(sum(x * x for x in a.values)) * math.sqrt(sum(y * y for y in b.values))
    if norms == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a.values, b.values)) / norms


components = st.lists(st.integers(-100, 100).map(lambda value: value / 10), min_size=16, max_size=16)


@settings(max_examples=200, deadline=None)
@given(words, words, components, components)
def test_cosine_matches_a_naive_sum(left, right, raw_left, raw_right):
    pairs = [(embed(left, CFG), embed(right, CFG)),
             (EmbeddingVector(tuple(raw_left)), EmbeddingVector(tuple(raw_right)))]

    for a, b in pairs:
        assert abs(cosine_similarity(a, b) - _naive_cosine(a, b)) <= 1e-9


def test_cosine_rejects_mismatched_dimensions():
    with pytest.raises(DimensionMismatch):
        cosine_similarity(embed('aaa', CFG), embed('aaa', EmbeddingConfig(64)))


def test_centroid_is_normalized_and_empty_is_zero():
    mean = centroid([embed('aaa', CFG), embed('bbb', CFG)], 256)

    assert mean.norm() == pytest.approx(1.0)
    assert centroid([], 256) == EmbeddingVector((0.0,) * 256)


def test_config_checks():
    with pytest.raises(ConfigError):
        EmbeddingConfig(4).checked()
    with pytest.raises(ConfigError):
        EmbeddingConfig(provider=Provider.REMOTE).checked()
    assert EmbeddingConfig(8).checked().dimension == 8
