import numpy as np
import pytest
import scipy.linalg

from embalign import (
    AlignmentMap,
    fit_linear,
    fit_procrustes,
    fit_ridge,
    load_map,
    save_map,
    training_residual,
    transform,
)
from embalign.align import DEFAULT_RIDGE_ALPHA
from embalign.errors import ConsistencyError, DataError
from embalign.prep import PrepStats

from conftest import random_orthogonal


def make_stats(big_d, mu=None):
    mu = np.zeros(big_d) if mu is None else mu
    return PrepStats(mu, mu, big_d, big_d, big_d, 1)


def test_procrustes_self_alignment():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((50, 8))
    w = fit_procrustes(x, x)
    assert np.linalg.norm(x @ w - x) <= 1e-8


def test_procrustes_90_degree_rotation():
    x = np.eye(2)
    y = np.array([[0.0, 1.0], [-1.0, 0.0]])
    w = fit_procrustes(x, y)
    assert np.allclose(w, y, atol=1e-12)


def test_procrustes_recovers_planted_rotation():
    rng = np.random.default_rng(42)
    q = random_orthogonal(32, rng)
    z = rng.standard_normal((500, 32))
    w = fit_procrustes(z, z @ q)
    assert np.linalg.norm(z @ w - z @ q) <= 1e-8


def test_procrustes_orthogonality():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n, d = rng.integers(5, 200), rng.integers(4, 64)
        w = fit_procrustes(rng.standard_normal((n, d)), rng.standard_normal((n, d)))
        assert np.linalg.norm(w.T @ w - np.eye(d)) <= 1e-8


def test_procrustes_rejects_nonfinite():
    with pytest.raises(DataError):
        fit_procrustes(np.array([[np.inf, 0.0]]), np.ones((1, 2)))


def test_linear_scaling_case():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((100, 6))
    w = fit_linear(x, 2.0 * x)
    assert np.linalg.norm(x @ w - 2.0 * x) <= 1e-8


def test_linear_matches_lstsq_min_norm_oracle():
    # rank-deficient via zero-padded columns; compare to LAPACK gelsd
    rng = np.random.default_rng(2)
    x = np.zeros((40, 10))
    x[:, :7] = rng.standard_normal((40, 7))
    y = rng.standard_normal((40, 10))
    w = fit_linear(x, y)
    oracle, *_ = scipy.linalg.lstsq(x, y, lapack_driver="gelsd")
    assert np.allclose(w, oracle, atol=1e-10)
    # min-norm solution has zero rows for dead columns
    assert np.abs(w[7:]).max() == 0.0


def test_linear_recovers_rotation():
    rng = np.random.default_rng(3)
    q = random_orthogonal(32, rng)
    z = rng.standard_normal((500, 32))
    w = fit_linear(z, z @ q)
    assert np.linalg.norm(z @ w - z @ q) <= 1e-8


def test_ridge_1d_closed_form():
    w = fit_ridge(np.array([[1.0], [1.0]]), np.array([[1.0], [1.0]]), 0.1)
    assert abs(w[0, 0] - 2.0 / 2.1) < 1e-12


def test_ridge_approaches_linear():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((200, 12))  # well conditioned
    y = rng.standard_normal((200, 12))
    w_ridge = fit_ridge(x, y, 1e-10)
    w_linear = fit_linear(x, y)
    assert np.linalg.norm(w_ridge - w_linear) <= 1e-6


def test_ridge_shrinkage_limit():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((50, 6))
    y = rng.standard_normal((50, 6))
    w = fit_ridge(x, y, 1e9)
    assert np.linalg.norm(w) <= 1e-6 * np.linalg.norm(x.T @ y)


def test_ridge_shrinkage_monotone():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((80, 10))
    y = rng.standard_normal((80, 10))
    norms = [np.linalg.norm(fit_ridge(x, y, a)) for a in (1e-4, 1e-2, 1.0, 100.0)]
    assert norms == sorted(norms, reverse=True)


def test_residual_ordering():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((60, 9))
    y = rng.standard_normal((60, 9))
    stats = make_stats(9)
    res = {}
    for method, w in [
        ("procrustes", fit_procrustes(x, y)),
        ("linear", fit_linear(x, y)),
        ("ridge", fit_ridge(x, y, DEFAULT_RIDGE_ALPHA)),
    ]:
        alpha = DEFAULT_RIDGE_ALPHA if method == "ridge" else 0.0
        amap = AlignmentMap(w, stats, method, alpha=alpha)
        res[method] = training_residual(amap, x, y)
    assert res["linear"] <= res["procrustes"] + 1e-9
    assert res["linear"] <= res["ridge"] + 1e-9


def test_linear_first_order_stationarity():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((30, 5))
    y = rng.standard_normal((30, 5))
    w = fit_linear(x, y)
    base = np.linalg.norm(x @ w - y)
    for _ in range(10):
        direction = rng.standard_normal(w.shape)
        direction /= np.linalg.norm(direction)
        perturbed = np.linalg.norm(x @ (w + 1e-4 * direction) - y)
        assert perturbed >= base - 1e-10


def test_self_fit_residual_zero():
    rng = np.random.default_rng(10)
    x = rng.standard_normal((20, 4))
    amap = AlignmentMap(fit_linear(x, x), make_stats(4), "linear")
    assert training_residual(amap, x, x) <= 1e-8


def test_fit_determinism():
    rng = np.random.default_rng(11)
    x = rng.standard_normal((40, 8))
    y = rng.standard_normal((40, 8))
    for fn in (fit_procrustes, fit_linear, lambda a, b: fit_ridge(a, b, 0.1)):
        assert np.array_equal(fn(x, y), fn(x, y))


def test_transform_identity_map():
    rows = np.random.default_rng(12).standard_normal((5, 4))
    amap = AlignmentMap(np.eye(4), make_stats(4), "procrustes")
    out = transform(rows, amap)
    expected = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    assert np.allclose(out, expected, atol=1e-12)


def test_transform_width_mismatch():
    amap = AlignmentMap(np.eye(4), make_stats(4), "procrustes")
    with pytest.raises(ConsistencyError):
        transform(np.ones((2, 3)), amap)


def test_alignment_map_rejects_nonorthogonal_procrustes():
    with pytest.raises(ConsistencyError):
        AlignmentMap(2.0 * np.eye(3), make_stats(3), "procrustes")


def test_map_file_round_trip(tmp_path):
    rng = np.random.default_rng(13)
    stats = PrepStats(rng.standard_normal(4), rng.standard_normal(6), 4, 6, 6, 33)
    amap = AlignmentMap(
        rng.standard_normal((6, 6)), stats, "ridge", alpha=0.1,
        source_model="a", target_model="b", seed=3,
    )
    path = str(tmp_path / "m.amap")
    save_map(amap, path)
    loaded = load_map(path)
    assert np.array_equal(loaded.w, amap.w)
    assert np.array_equal(loaded.stats.mu_x, stats.mu_x)
    assert np.array_equal(loaded.stats.mu_y, stats.mu_y)
    assert loaded.method == "ridge" and loaded.alpha == 0.1
    assert loaded.stats.n_train == 33 and loaded.seed == 3
