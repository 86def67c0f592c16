import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projdebias.attribute_data import (
    AttributeClass,
    LabeledPointSet,
    build_bias_dataset,
    seed_direction,
    split,
)
from projdebias.embeddings import EmbeddingSpace
from projdebias.errors import DataError

from conftest import make_space


def three_cluster_space(n_per=60, d=10, seed=0):
    """Clusters at +4e0, -4e0 and +4e1 (orthogonal), with true labels."""
    rng = np.random.default_rng(seed)
    centers = {"p": 4 * np.eye(d)[0], "m": -4 * np.eye(d)[0], "o": 4 * np.eye(d)[1]}
    rows, vocab, truth = [], [], {}
    for lab, c in centers.items():
        for i in range(n_per):
            vocab.append(f"{lab}{i}")
            rows.append(c + 0.5 * rng.standard_normal(d))
            truth[vocab[-1]] = lab
    return EmbeddingSpace(tuple(vocab), np.array(rows)), truth


def test_seed_direction_subtraction():
    space = make_space({"pos": [2, 1], "neg": [1, 1]})
    np.testing.assert_array_equal(seed_direction(space, "pos", "neg"), [1, 0])


def test_seed_direction_same_token_is_zero(caplog):
    space = make_space({"pos": [2, 1], "neg": [1, 1]})
    np.testing.assert_array_equal(seed_direction(space, "pos", "pos"), [0, 0])
    assert "zero" in caplog.text


def test_seed_direction_is_row_difference():
    space, _ = three_cluster_space()
    np.testing.assert_array_equal(seed_direction(space, "p0", "m0"), space.vector("p0") - space.vector("m0"))


def test_dataset_recovers_clusters():
    space, truth = three_cluster_space()
    e0 = np.eye(space.dim)[0]
    ds = build_bias_dataset(space, e0, -e0, k=60, neutral_k=60, neutral_threshold=0.3)
    hits = total = 0
    for cls, want in zip(ds.classes, ("p", "m", "o")):
        toks = [space.vocab[i] for i in cls.indices]
        hits += sum(truth[t] == want for t in toks)
        total += len(toks)
    assert hits / total >= 0.99


def test_k_zero_gives_empty_classes():
    space, _ = three_cluster_space()
    e0 = np.eye(space.dim)[0]
    ds = build_bias_dataset(space, e0, -e0, k=0, neutral_k=0)
    assert [len(c.indices) for c in ds.classes[:2]] == [0, 0]


def test_threshold_one_admits_every_unlabeled_token():
    space, _ = three_cluster_space(n_per=20)
    e0 = np.eye(space.dim)[0]
    ds = build_bias_dataset(space, e0, -e0, k=20, neutral_k=20, neutral_threshold=1.0)
    assert len(ds.classes[2].indices) == 20
    assert len(ds.labeled_indices()) == 60


def test_dataset_is_deterministic():
    space, _ = three_cluster_space()
    e0 = np.eye(space.dim)[0]
    a = build_bias_dataset(space, e0, -e0, k=30, neutral_k=30, rng_seed=7)
    b = build_bias_dataset(space, e0, -e0, k=30, neutral_k=30, rng_seed=7)
    assert a == b


def test_overlapping_top_k_stays_disjoint():
    rng = np.random.default_rng(3)
    space = EmbeddingSpace(tuple(f"t{i}" for i in range(80)), rng.standard_normal((80, 4)))
    d = rng.standard_normal(4)
    # two nearly identical directions: the raw top-k lists overlap heavily
    ds = build_bias_dataset(space, d, d + 0.01, k=25, neutral_k=0)
    plus, minus = (set(c.indices) for c in ds.classes[:2])
    assert len(plus) == len(minus) == 25
    assert not plus & minus


def test_overlapping_classes_rejected():
    with pytest.raises(DataError):
        LabeledPointSet("s", [AttributeClass("a", (0, 1)), AttributeClass("b", (1, 2))])


def labeled(n_classes_sizes):
    classes, start = [], 0
    for j, size in enumerate(n_classes_sizes):
        classes.append(AttributeClass(f"c{j}", tuple(range(start, start + size))))
        start += size
    return LabeledPointSet("s", classes)


def test_split_totals_300():
    ds = split(labeled([100, 100, 100]), (0.65, 0.10, 0.25), rng_seed=0)
    totals = {"train": 0, "dev": 0, "test": 0}
    for counts in ds.split_counts().values():
        for s, n in counts.items():
            totals[s] += n
        assert abs(counts["train"] - 65) < 1 + 1e-9
        assert abs(counts["dev"] - 10) < 1 + 1e-9
        assert abs(counts["test"] - 25) < 1 + 1e-9
    assert totals == {"train": 195, "dev": 30, "test": 75}


def test_split_deterministic():
    a = split(labeled([40, 37]), rng_seed=5)
    b = split(labeled([40, 37]), rng_seed=5)
    assert a.splits == b.splits


def test_split_fraction_sum_checked():
    with pytest.raises(DataError):
        split(labeled([10, 10]), (0.6, 0.1, 0.2))


def test_dataset_json_round_trip(tmp_path):
    space, _ = three_cluster_space(n_per=10)
    e0 = np.eye(space.dim)[0]
    ds = split(build_bias_dataset(space, e0, -e0, k=10, neutral_k=5), rng_seed=1)
    ds.save(tmp_path / "ds.json", space)
    assert LabeledPointSet.load(tmp_path / "ds.json", space) == ds


@settings(max_examples=60)
@given(
    st.lists(st.integers(0, 60), min_size=1, max_size=5),
    st.tuples(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20)).filter(lambda t: sum(t) > 0),
    st.integers(0, 1000),
)
def test_split_properties(sizes, weights, seed):
    fr = np.array(weights, dtype=float) / sum(weights)
    ds = split(labeled(sizes), fr, rng_seed=seed)
    # every labeled index in exactly one split
    assert set(ds.splits) == set(ds.labeled_indices().tolist())
    total = sum(sizes)
    totals = {s: sum(1 for v in ds.splits.values() if v == s) for s in ("train", "dev", "test")}
    for s, f in zip(("train", "dev", "test"), fr):
        assert abs(totals[s] - f * total) < 1
    for (label, counts), size in zip(ds.split_counts().items(), sizes):
        for s, f in zip(("train", "dev", "test"), fr):
            assert abs(counts[s] - f * size) < 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 15), st.integers(0, 15))
def test_classes_always_disjoint(seed, k, neutral_k):
    rng = np.random.default_rng(seed)
    space = EmbeddingSpace(tuple(f"t{i}" for i in range(50)), rng.standard_normal((50, 3)))
    d = rng.standard_normal(3)
    ds = build_bias_dataset(space, d, rng.standard_normal(3), k=k, neutral_k=neutral_k, neutral_threshold=1.0, rng_seed=seed)
    seen = [i for c in ds.classes for i in c.indices]
    assert len(seen) == len(set(seen))
    assert len(ds.classes[0].indices) == len(ds.classes[1].indices) == k
