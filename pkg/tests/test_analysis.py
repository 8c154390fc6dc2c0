import numpy as np
import pytest

from embalign import (
    CompatibilityMatrix,
    agglomerative_cluster,
    asymmetry_stats,
    build_compatibility_matrix,
    symmetrize,
    training_size_sweep,
)
from embalign.errors import ArgumentError, ConsistencyError, ProtocolError


# --- brute-force agglomeration oracle -------------------------------------

def naive_agglomerate(dist, linkage):
    """Plain list-based agglomeration; returns merges as (id, id, height)."""
    m = dist.shape[0]
    clusters = {i: [i] for i in range(m)}
    next_id = m
    merges = []

    def cluster_dist(a, b):
        vals = [dist[i, j] for i in clusters[a] for j in clusters[b]]
        if linkage == "average":
            return sum(vals) / len(vals)
        return min(vals) if linkage == "single" else max(vals)

    while len(clusters) > 1:
        keys = sorted(clusters)
        best = None
        for x in range(len(keys)):
            for y in range(x + 1, len(keys)):
                d = cluster_dist(keys[x], keys[y])
                if best is None or d < best[0]:
                    best = (d, keys[x], keys[y])
        d, a, b = best
        merges.append((a, b, d))
        clusters[next_id] = clusters.pop(a) + clusters.pop(b)
        next_id += 1
    return merges


def cm_from(rank1, names=None):
    rank1 = np.asarray(rank1, dtype=np.float64)
    names = names or [f"m{i}" for i in range(rank1.shape[0])]
    return CompatibilityMatrix(names, rank1)


# --- symmetrize -----------------------------------------------------------

def test_symmetrize_average():
    s = symmetrize(cm_from([[100.0, 80.0], [60.0, 100.0]]))
    assert s[0, 1] == 70.0 and s[1, 0] == 70.0


def test_symmetrize_symmetric_unchanged():
    mat = np.array([[100.0, 42.0], [42.0, 100.0]])
    assert np.array_equal(symmetrize(cm_from(mat)), mat)


def test_symmetrize_output_symmetric():
    rng = np.random.default_rng(0)
    mat = rng.uniform(0, 100, (5, 5))
    s = symmetrize(cm_from(mat))
    assert np.abs(s - s.T).max() <= 1e-12


def test_symmetrize_idempotent():
    rng = np.random.default_rng(1)
    mat = rng.uniform(0, 100, (4, 4))
    s1 = symmetrize(cm_from(mat))
    s2 = symmetrize(cm_from(s1))
    assert np.allclose(s1, s2)


def test_symmetrize_missing_raises():
    mat = np.array([[100.0, np.nan], [60.0, 100.0]])
    with pytest.raises(ProtocolError):
        symmetrize(cm_from(mat))


# --- clustering -----------------------------------------------------------

def two_group_similarity(m_per_group=2, within=95.0, across=10.0):
    m = 2 * m_per_group
    s = np.full((m, m), across)
    s[:m_per_group, :m_per_group] = within
    s[m_per_group:, m_per_group:] = within
    np.fill_diagonal(s, 100.0)
    return s


def test_two_tight_groups_merge_within_first():
    s = two_group_similarity()
    groups = [frozenset({0, 1}), frozenset({2, 3})]
    for linkage in ("average", "single", "complete"):
        dend = agglomerative_cluster(s, linkage)
        for a, b, _ in dend.merges[:2]:
            assert dend.leaves_of(a) | dend.leaves_of(b) in groups
        oracle = naive_agglomerate(100.0 - s, linkage)
        for a, b, _ in oracle[:2]:
            assert frozenset({a, b}) in groups


def test_cluster_matches_naive_heights():
    rng = np.random.default_rng(3)
    base = rng.uniform(0, 100, (5, 5))
    s = (base + base.T) / 2
    np.fill_diagonal(s, 100.0)
    for linkage in ("average", "single", "complete"):
        dend = agglomerative_cluster(s, linkage)
        oracle = naive_agglomerate(100.0 - s, linkage)
        assert len(dend.merges) == 4
        got = sorted(h for _, _, h in dend.merges)
        want = sorted(h for _, _, h in oracle)
        assert np.allclose(got, want, atol=1e-9)


def test_cluster_two_models():
    s = np.array([[100.0, 64.0], [64.0, 100.0]])
    dend = agglomerative_cluster(s, "average")
    assert len(dend.merges) == 1
    assert dend.merges[0][2] == pytest.approx(36.0)


def test_cluster_degenerate_equal_similarities():
    s = np.full((4, 4), 50.0)
    np.fill_diagonal(s, 100.0)
    dend = agglomerative_cluster(s, "single")
    heights = [h for _, _, h in dend.merges]
    assert np.allclose(heights, 50.0)


def test_cluster_heights_nondecreasing():
    rng = np.random.default_rng(4)
    base = rng.uniform(0, 100, (7, 7))
    s = (base + base.T) / 2
    np.fill_diagonal(s, 100.0)
    for linkage in ("average", "complete"):
        heights = [h for _, _, h in agglomerative_cluster(s, linkage).merges]
        assert heights == sorted(heights)


def test_cluster_rejects_asymmetric():
    s = np.array([[100.0, 10.0], [20.0, 100.0]])
    with pytest.raises(ConsistencyError):
        agglomerative_cluster(s, "average")


def test_newick_output():
    s = two_group_similarity()
    dend = agglomerative_cluster(s, "average", model_names=["a", "b", "c", "d"])
    text = dend.to_newick()
    assert text.endswith(";")
    for name in "abcd":
        assert name in text


# --- asymmetry ------------------------------------------------------------

def test_asymmetry_symmetric_matrix():
    mat = np.array([[100.0, 70.0], [70.0, 100.0]])
    stats = asymmetry_stats(cm_from(mat))
    assert stats["mean_deviation"] == 0.0
    for entry in stats["per_model"].values():
        assert entry["incoming_mean"] == entry["outgoing_mean"]


def test_asymmetry_hand_case():
    mat = np.array([[100.0, 90.0], [50.0, 100.0]])
    stats = asymmetry_stats(cm_from(mat, ["m0", "m1"]))
    assert stats["mean_deviation"] == 40.0
    assert stats["per_model"]["m0"]["incoming_mean"] == 50.0
    assert stats["per_model"]["m0"]["outgoing_mean"] == 90.0
    assert stats["per_model"]["m1"]["incoming_mean"] == 90.0
    assert stats["per_model"]["m1"]["outgoing_mean"] == 50.0


def test_asymmetry_permutation_equivariance():
    rng = np.random.default_rng(5)
    mat = rng.uniform(0, 100, (4, 4))
    names = ["a", "b", "c", "d"]
    stats = asymmetry_stats(cm_from(mat, names))
    perm = [2, 0, 3, 1]
    permuted = mat[np.ix_(perm, perm)]
    stats_p = asymmetry_stats(cm_from(permuted, [names[i] for i in perm]))
    assert stats["mean_deviation"] == pytest.approx(stats_p["mean_deviation"])
    for name in names:
        assert stats["per_model"][name]["incoming_mean"] == pytest.approx(
            stats_p["per_model"][name]["incoming_mean"]
        )


def test_asymmetry_single_model():
    with pytest.raises(ArgumentError):
        asymmetry_stats(cm_from([[100.0]]))


# --- compatibility matrix and sweep (protocol level) ----------------------

def test_compatibility_matrix_synthetic(small_views):
    v0, v1 = small_views
    cm = build_compatibility_matrix([v0, v1], seeds=(0,), fraction=0.7)
    assert cm.rank1.shape == (2, 2)
    assert np.diag(cm.rank1).min() >= 99.0
    assert np.nanmin(cm.rank1) >= 0.0


def test_compatibility_matrix_single_model(small_views):
    v0, _ = small_views
    cm = build_compatibility_matrix([v0], seeds=(0,))
    assert cm.rank1.shape == (1, 1)


def test_sweep_shape_and_determinism(small_views):
    v0, v1 = small_views
    kwargs = dict(seeds=(0, 1), methods=("procrustes", "linear"))
    t1 = training_size_sweep(v0, v1, [0.5, 1.0], **kwargs)
    t2 = training_size_sweep(v0, v1, [0.5, 1.0], **kwargs)
    assert len(t1["summary"]) == 4
    assert t1 == t2


def test_sweep_rejects_unsorted_fractions(small_views):
    v0, v1 = small_views
    with pytest.raises(ArgumentError):
        training_size_sweep(v0, v1, [0.9, 0.1], seeds=(0,))


def test_sweep_rejects_empty_pool(small_views):
    v0, v1 = small_views
    with pytest.raises(ArgumentError):
        training_size_sweep(v0, v1, [0.001], seeds=(0,))
