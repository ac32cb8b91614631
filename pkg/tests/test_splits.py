"""Dataset splitting: sizes, determinism, partition validation."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kagnn.splits import SplitSpec, load_split, random_split


def test_default_ratio_sizes_use_floor():
    split = random_split(10, seed=0)
    assert split.sizes() == (8, 1, 1)
    split = random_split(23, seed=0)
    assert split.sizes() == (18, 2, 3)  # floors, remainder to test


def test_split_is_a_partition():
    split = random_split(57, seed=4)
    combined = sorted(split.train + split.valid + split.test)
    assert combined == list(range(57))


def test_same_seed_reproduces_exactly():
    a = random_split(40, seed=9)
    b = random_split(40, seed=9)
    assert (a.train, a.valid, a.test) == (b.train, b.valid, b.test)
    c = random_split(40, seed=10)
    assert a.train != c.train


def test_split_is_shuffled_not_contiguous():
    split = random_split(100, seed=1)
    assert split.train != list(range(80))


def test_provenance_recorded():
    assert random_split(10, seed=3).provenance == "random-seeded"
    assert random_split(10, seed=3).seed == 3


def test_custom_ratios():
    split = random_split(20, ratios=(0.5, 0.25, 0.25), seed=0)
    assert split.sizes() == (10, 5, 5)


@pytest.mark.parametrize("bad", [(0.8, 0.1, 0.05), (0.5, 0.5, 0.5),
                                 (1.0, 0.0, 0.0)])
def test_bad_ratios_rejected(bad):
    with pytest.raises(ValueError):
        random_split(30, ratios=bad, seed=0)


def test_tiny_datasets_rejected():
    with pytest.raises(ValueError):
        random_split(2, seed=0)


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 300), st.integers(0, 2 ** 31 - 1))
def test_partition_property(n, seed):
    split = random_split(n, seed=seed)
    split.validate(n)
    tr, va, te = split.sizes()
    assert tr + va + te == n
    assert tr == int(0.8 * n) and va == int(0.1 * n)


class TestValidate:
    def test_duplicate_index_rejected(self):
        spec = SplitSpec(train=[0, 1], valid=[1], test=[2],
                         provenance="manual", seed=None)
        with pytest.raises(ValueError, match="duplicate"):
            spec.validate(3)

    def test_missing_index_rejected(self):
        spec = SplitSpec(train=[0], valid=[1], test=[],
                         provenance="manual", seed=None)
        with pytest.raises(ValueError):
            spec.validate(3)

    def test_out_of_range_rejected(self):
        spec = SplitSpec(train=[0, 5], valid=[1], test=[2],
                         provenance="manual", seed=None)
        with pytest.raises(ValueError):
            spec.validate(4)


class TestFileRoundTrip:
    def test_load_split(self, tmp_path):
        original = random_split(12, seed=7)
        path = tmp_path / "split.json"
        path.write_text(json.dumps(original.to_json_dict()))
        loaded = load_split(path, 12)
        assert loaded.train == original.train
        assert loaded.valid == original.valid
        assert loaded.test == original.test
        assert loaded.provenance.startswith("external-file")

    def test_load_rejects_non_partition(self, tmp_path):
        path = tmp_path / "split.json"
        path.write_text(json.dumps({"train": [0, 1], "valid": [1],
                                    "test": [2]}))
        with pytest.raises(ValueError):
            load_split(path, 3)

    def test_numpy_indices_serializable(self):
        split = random_split(10, seed=0)
        text = json.dumps(split.to_json_dict())
        doc = json.loads(text)
        assert sorted(doc["train"] + doc["valid"] + doc["test"]) == list(range(10))
