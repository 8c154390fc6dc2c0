"""Closed-set cross-model identification: cosine scoring, Rank-k, mAP, CMC.

The evaluation protocol per seed: split identities disjointly, fit the
preprocessing and the alignment map on training rows only, use aligned
test-source rows as queries against preprocessed test-target rows as the
gallery.  An unaligned baseline (unit-normalized, zero-padded, no
centering, no map) is computed on the same test rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import align
from .embedstore import EmbeddingSet, intersect_on_images
from .errors import ArgumentError, ConsistencyError, DegenerateRowError, ProtocolError
from .prep import apply_prep, fit_prep, l2_normalize
from .splits import DEFAULT_SEEDS, identity_disjoint_split

RANK_KS = (1, 5, 10)
CMC_MAX_RANK = 50


def score_matrix(queries: np.ndarray, gallery: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarities, queries x gallery."""
    q = np.asarray(queries, dtype=np.float64)
    g = np.asarray(gallery, dtype=np.float64)
    qn = np.linalg.norm(q, axis=1)
    gn = np.linalg.norm(g, axis=1)
    for norms in (qn, gn):
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DegenerateRowError(int(zero[0]))
    return (q / qn[:, None]) @ (g / gn[:, None]).T


def _check_labels(scores, q_labels, g_labels):
    scores = np.asarray(scores, dtype=np.float64)
    q_labels = np.asarray([str(l) for l in q_labels])
    g_labels = np.asarray([str(l) for l in g_labels])
    if scores.shape != (len(q_labels), len(g_labels)):
        raise ConsistencyError(
            f"scores shape {scores.shape} does not match "
            f"{len(q_labels)} queries x {len(g_labels)} gallery labels"
        )
    return scores, q_labels, g_labels


def _ranking(scores):
    # stable sort on negated scores: descending score, ties by ascending index
    return np.argsort(-scores, axis=1, kind="stable")


def rank_k_accuracy(scores, q_labels, g_labels, k: int) -> float:
    """Fraction of queries with a same-label gallery item in the top k."""
    scores, q_labels, g_labels = _check_labels(scores, q_labels, g_labels)
    if not 1 <= k <= len(g_labels):
        raise ArgumentError(f"k={k} outside [1, {len(g_labels)}]")
    order = _ranking(scores)
    top = g_labels[order[:, :k]]
    live = np.take_along_axis(scores, order[:, :k], axis=1) > -np.inf
    hits = ((top == q_labels[:, None]) & live).any(axis=1)
    return float(hits.mean())


def mean_average_precision(scores, q_labels, g_labels) -> float:
    """Standard retrieval mAP; all same-label gallery items are relevant.

    Entries scored -inf are treated as removed from the gallery (used by
    the exclude-self protocol variant).
    """
    scores, q_labels, g_labels = _check_labels(scores, q_labels, g_labels)
    order = _ranking(scores)
    aps = np.empty(len(q_labels))
    for i in range(len(q_labels)):
        live = scores[i, order[i]] > -np.inf
        rel = ((g_labels[order[i]] == q_labels[i]) & live).astype(np.float64)
        n_rel = rel.sum()
        if n_rel == 0:
            raise ProtocolError(f"query {i} has no relevant gallery items")
        ranks = np.arange(1, len(g_labels) + 1)
        aps[i] = float((np.cumsum(rel) / ranks * rel).sum() / n_rel)
    return float(aps.mean())


def first_hit_ranks(scores, q_labels, g_labels) -> np.ndarray:
    """1-based rank of the first same-label gallery item per query."""
    scores, q_labels, g_labels = _check_labels(scores, q_labels, g_labels)
    order = _ranking(scores)
    live = np.take_along_axis(scores, order, axis=1) > -np.inf
    hits = (g_labels[order] == q_labels[:, None]) & live
    if not hits.any(axis=1).all():
        raise ProtocolError("some query label never occurs in the gallery")
    return hits.argmax(axis=1) + 1


def cmc_curve(scores, q_labels, g_labels, max_rank: int = CMC_MAX_RANK):
    """Identification accuracy at ranks 1..max_rank (nondecreasing)."""
    scores, q_labels, g_labels = _check_labels(scores, q_labels, g_labels)
    if max_rank > len(g_labels):
        raise ArgumentError(f"max_rank {max_rank} exceeds gallery size {len(g_labels)}")
    ranks = first_hit_ranks(scores, q_labels, g_labels)
    return [float((ranks <= k).mean()) for k in range(1, max_rank + 1)]


@dataclass(frozen=True)
class SeedRetrieval:
    """Metrics of one seed's evaluation."""

    seed: int
    rank_k: dict
    map_score: float
    cmc: tuple
    n_queries: int
    n_gallery: int

    def to_dict(self):
        return {
            "seed": self.seed,
            "rank_k": {str(k): v for k, v in self.rank_k.items()},
            "map": self.map_score,
            "cmc": list(self.cmc),
            "n_queries": self.n_queries,
            "n_gallery": self.n_gallery,
        }


@dataclass(frozen=True)
class RetrievalReport:
    """Per-seed identification metrics plus mean/std summaries."""

    method: str
    fraction: float
    seeds: tuple
    per_seed: tuple  # SeedRetrieval, aligned
    per_seed_baseline: tuple  # SeedRetrieval, unaligned
    exclude_self: bool = False
    metadata: dict = field(default_factory=dict)

    @staticmethod
    def _summary(results):
        ks = sorted(set.intersection(*(set(r.rank_k) for r in results)))
        out = {"rank_k": {}, "map": {}, "cmc": {}}
        for k in ks:
            vals = np.array([r.rank_k[k] for r in results])
            out["rank_k"][str(k)] = {
                "mean": float(vals.mean()),
                "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
            }
        maps = np.array([r.map_score for r in results])
        out["map"] = {
            "mean": float(maps.mean()),
            "std": float(maps.std(ddof=1)) if len(maps) > 1 else 0.0,
        }
        # test-set size varies with the seed; aggregate over the common prefix
        minlen = min(len(r.cmc) for r in results)
        cmc = np.array([r.cmc[:minlen] for r in results])
        out["cmc"] = {
            "mean": cmc.mean(axis=0).tolist(),
            "std": (cmc.std(axis=0, ddof=1) if cmc.shape[0] > 1 else np.zeros(cmc.shape[1])).tolist(),
        }
        return out

    @property
    def summary(self):
        return self._summary(self.per_seed)

    @property
    def baseline_summary(self):
        return self._summary(self.per_seed_baseline)

    def to_dict(self):
        return {
            "method": self.method,
            "fraction": self.fraction,
            "seeds": list(self.seeds),
            "exclude_self": self.exclude_self,
            "metadata": self.metadata,
            "aligned": {
                "per_seed": [r.to_dict() for r in self.per_seed],
                "summary": self.summary,
            },
            "baseline": {
                "per_seed": [r.to_dict() for r in self.per_seed_baseline],
                "summary": self.baseline_summary,
            },
        }


def _metrics_from_scores(scores, q_labels, g_labels, max_rank, seed, exclude_self):
    scores = np.asarray(scores, dtype=np.float64)
    if exclude_self:
        if scores.shape[0] != scores.shape[1]:
            raise ConsistencyError("exclude_self requires query set == gallery set")
        scores = scores.copy()
        np.fill_diagonal(scores, -np.inf)
    rank_k = {
        k: rank_k_accuracy(scores, q_labels, g_labels, k)
        for k in RANK_KS
        if k <= len(g_labels)
    }
    return SeedRetrieval(
        seed=seed,
        rank_k=rank_k,
        map_score=mean_average_precision(scores, q_labels, g_labels),
        cmc=tuple(cmc_curve(scores, q_labels, g_labels, max_rank)),
        n_queries=len(q_labels),
        n_gallery=len(g_labels),
    )


def _fit_seed(norm_a, norm_b, labels, method, alpha, fraction, seed):
    """Split, fit prep + map on train rows; return (map, test row indices)."""
    split = identity_disjoint_split(labels, fraction, seed)
    tr = list(split.train_rows)
    stats = fit_prep(norm_a[tr], norm_b[tr])
    xp = apply_prep(norm_a[tr], stats, "source")
    yp = apply_prep(norm_b[tr], stats, "target")
    w = align.fit_map(xp, yp, method, alpha)
    amap = align.AlignmentMap(
        w=w,
        stats=stats,
        method=method,
        alpha=alpha if method == "ridge" else 0.0,
        seed=seed,
    )
    return amap, list(split.test_rows)


def _pad(rows, big_d):
    out = np.zeros((rows.shape[0], big_d), dtype=np.float64)
    out[:, : rows.shape[1]] = rows
    return out


def evaluate_identification(
    source: EmbeddingSet,
    target: EmbeddingSet,
    method: str = "procrustes",
    seeds=DEFAULT_SEEDS,
    fraction: float = 0.7,
    alpha: float = align.DEFAULT_RIDGE_ALPHA,
    exclude_self: bool = False,
    max_rank: int = CMC_MAX_RANK,
    jobs: int = 1,
) -> RetrievalReport:
    """Run the per-seed identification protocol and aggregate the metrics."""
    a, b = intersect_on_images(source, target)
    labels = list(a.labels)
    norm_a = l2_normalize(a.rows)
    norm_b = l2_normalize(b.rows)
    big_d = max(a.dim, b.dim)

    def run_seed(seed):
        amap, test = _fit_seed(norm_a, norm_b, labels, method, alpha, fraction, seed)
        test_labels = [labels[i] for i in test]
        queries = apply_prep(norm_a[test], amap.stats, "source") @ amap.w
        gallery = apply_prep(norm_b[test], amap.stats, "target")
        eff_rank = min(max_rank, len(test))
        aligned = _metrics_from_scores(
            score_matrix(queries, gallery), test_labels, test_labels, eff_rank,
            seed, exclude_self,
        )
        base = _metrics_from_scores(
            score_matrix(_pad(norm_a[test], big_d), _pad(norm_b[test], big_d)),
            test_labels, test_labels, eff_rank, seed, exclude_self,
        )
        return aligned, base

    results = _map_seeds(run_seed, seeds, jobs)
    return RetrievalReport(
        method=method,
        fraction=fraction,
        seeds=tuple(seeds),
        per_seed=tuple(r[0] for r in results),
        per_seed_baseline=tuple(r[1] for r in results),
        exclude_self=exclude_self,
        metadata={
            "source_model": source.model_name,
            "target_model": target.model_name,
            "dataset": source.dataset_name,
            "alpha": alpha if method == "ridge" else 0.0,
            "gallery_includes_self": not exclude_self,
        },
    )


def _map_seeds(fn, seeds, jobs):
    """Evaluate seeds, optionally in parallel; results kept in seed order."""
    seeds = list(seeds)
    if jobs <= 1 or len(seeds) <= 1:
        return [fn(s) for s in seeds]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, seeds))
