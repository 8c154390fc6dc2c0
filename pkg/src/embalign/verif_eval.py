"""Cross-model verification: pair scoring, ROC, AUC, EER, TMR@FMR.

Scoring is directional by default: the source member of each pair passes
through the alignment map, the target member stays in its own space.  A
symmetric mode averages the two directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import align
from .embedstore import EmbeddingSet, intersect_on_images
from .errors import ArgumentError, ConsistencyError, ProtocolError
from .ident_eval import _fit_seed, _map_seeds, _pad
from .prep import apply_prep, fit_prep, l2_normalize
from .splits import (
    DEFAULT_SEEDS,
    PairList,
    all_genuine_pairs,
    sample_impostor_pairs,
    sample_pairs_capped,
)

FMR_TARGETS = (0.01, 0.001)

#: fixed FMR grid used when vertically averaging ROC curves across seeds
ROC_GRID = np.logspace(-4, 0, 50)


def pair_scores(aligned_source: np.ndarray, target: np.ndarray, pairs: PairList):
    """Cosine similarity per pair: aligned source row i against target row j."""
    a = np.asarray(aligned_source, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    scores, labels = [], []
    n_a, n_t = a.shape[0], t.shape[0]
    for i, j, genuine in pairs.pairs:
        if not (0 <= i < n_a and 0 <= j < n_t):
            raise ConsistencyError(f"pair ({i}, {j}) out of range")
        u, v = a[i], t[j]
        denom = np.linalg.norm(u) * np.linalg.norm(v)
        scores.append(float(u @ v / denom))
        labels.append(bool(genuine))
    return scores, labels


def roc_curve(scores, labels):
    """(fmr, tmr) points swept over the distinct scores, high to low.

    Acceptance rule is score >= threshold; a +inf sentinel contributes the
    (0, 0) origin and the lowest score yields (1, 1).
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise ConsistencyError("scores and labels differ in length")
    n_gen = int(labels.sum())
    n_imp = int((~labels).sum())
    if n_gen == 0 or n_imp == 0:
        raise ProtocolError("need at least one genuine and one impostor score")
    order = np.argsort(-scores, kind="stable")
    sorted_labels = labels[order]
    sorted_scores = scores[order]
    tp = np.cumsum(sorted_labels)
    fp = np.cumsum(~sorted_labels)
    # keep only the last index of each distinct score (full batch accepted)
    distinct = np.flatnonzero(np.diff(sorted_scores, append=-np.inf))
    points = [(0.0, 0.0)]
    for idx in distinct:
        points.append((fp[idx] / n_imp, tp[idx] / n_gen))
    return points


def auc(roc) -> float:
    """Trapezoidal area under the ROC; equals the rank-sum statistic."""
    if len(roc) < 2:
        raise ArgumentError("need at least 2 ROC points")
    pts = sorted(roc)
    if pts[-1] != (1.0, 1.0):
        pts.append((1.0, 1.0))
    area = 0.0
    for (f1, t1), (f2, t2) in zip(pts, pts[1:]):
        area += (f2 - f1) * (t1 + t2) / 2.0
    return float(area)


def eer(roc) -> float:
    """Error rate where FMR equals FNMR, interpolated between ROC points."""
    if len(roc) < 2:
        raise ArgumentError("need at least 2 ROC points")
    pts = sorted(roc)
    # g = fmr - fnmr rises from -1 at (0,0) to +1 at (1,1)
    gs = [f - (1.0 - t) for f, t in pts]
    for k, g in enumerate(gs):
        if g == 0.0:
            return float(pts[k][0])
        if g > 0.0:
            (f1, t1), (f2, t2) = pts[k - 1], pts[k]
            g1, g2 = gs[k - 1], gs[k]
            s = -g1 / (g2 - g1)
            return float(f1 + s * (f2 - f1))
    return float(pts[-1][0])


def tmr_at_fmr(roc, fmr_target: float) -> float:
    """Largest TMR achievable at FMR <= target, with linear interpolation."""
    if not 0.0 < fmr_target < 1.0:
        raise ArgumentError(f"fmr_target must lie in (0, 1), got {fmr_target}")
    pts = sorted(roc)
    best = 0.0
    for k, (f, t) in enumerate(pts):
        if f <= fmr_target:
            best = max(best, t)
        elif k > 0:
            f1, t1 = pts[k - 1]
            if f1 <= fmr_target < f:
                best = max(best, t1 + (fmr_target - f1) / (f - f1) * (t - t1))
            break
    return float(best)


def roc_on_grid(roc, grid=ROC_GRID) -> np.ndarray:
    """TMR sampled at fixed FMR values (for cross-seed vertical averaging)."""
    return np.array([tmr_at_fmr(roc, min(f, 1.0 - 1e-12)) for f in grid])


@dataclass(frozen=True)
class SeedVerification:
    seed: int
    auc: float
    eer: float
    tmr_at_fmr: dict
    roc: tuple
    n_genuine: int
    n_impostor: int

    def to_dict(self):
        return {
            "seed": self.seed,
            "auc": self.auc,
            "eer": self.eer,
            "tmr_at_fmr": {str(k): v for k, v in self.tmr_at_fmr.items()},
            "n_genuine": self.n_genuine,
            "n_impostor": self.n_impostor,
        }


@dataclass(frozen=True)
class VerificationReport:
    method: str
    seeds: tuple
    per_seed: tuple
    per_seed_baseline: tuple
    protocol: str = "intra"
    fraction: float = 0.7
    symmetric_score: bool = False
    metadata: dict = field(default_factory=dict)

    @staticmethod
    def _summary(results):
        def ms(vals):
            vals = np.asarray(vals)
            return {
                "mean": float(vals.mean()),
                "std": float(vals.std(ddof=1)) if len(vals) > 1 else 0.0,
            }

        out = {
            "auc": ms([r.auc for r in results]),
            "eer": ms([r.eer for r in results]),
            "tmr_at_fmr": {
                str(t): ms([r.tmr_at_fmr[t] for r in results]) for t in FMR_TARGETS
            },
        }
        grid_tmr = np.array([roc_on_grid(r.roc) for r in results])
        out["roc_grid"] = {
            "fmr": ROC_GRID.tolist(),
            "tmr_mean": grid_tmr.mean(axis=0).tolist(),
            "tmr_std": (
                grid_tmr.std(axis=0, ddof=1)
                if grid_tmr.shape[0] > 1
                else np.zeros(grid_tmr.shape[1])
            ).tolist(),
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
            "protocol": self.protocol,
            "fraction": self.fraction,
            "seeds": list(self.seeds),
            "symmetric_score": self.symmetric_score,
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


def _score_pairs(queries, gallery, pairs, symmetric):
    scores, labels = pair_scores(queries, gallery, pairs)
    if symmetric:
        swapped = PairList(tuple((j, i, g) for i, j, g in pairs.pairs), pairs.seed)
        rev, _ = pair_scores(queries, gallery, swapped)
        scores = [(s + r) / 2.0 for s, r in zip(scores, rev)]
    return scores, labels


def _seed_metrics(scores, labels, seed):
    roc = roc_curve(scores, labels)
    return SeedVerification(
        seed=seed,
        auc=auc(roc),
        eer=eer(roc),
        tmr_at_fmr={t: tmr_at_fmr(roc, t) for t in FMR_TARGETS},
        roc=tuple(roc),
        n_genuine=sum(labels),
        n_impostor=len(labels) - sum(labels),
    )


def evaluate_verification(
    source: EmbeddingSet,
    target: EmbeddingSet,
    method: str = "procrustes",
    seeds=DEFAULT_SEEDS,
    fraction: float = 0.7,
    alpha: float = align.DEFAULT_RIDGE_ALPHA,
    pair_caps=None,
    train_source: EmbeddingSet | None = None,
    train_target: EmbeddingSet | None = None,
    symmetric_score: bool = False,
    jobs: int = 1,
) -> VerificationReport:
    """Per-seed verification protocol with 1:1 genuine/impostor balance.

    Intra protocol (default): fit on the train side of an identity-disjoint
    split, build all genuine pairs over test identities plus an equal
    impostor sample.  Cross protocol (train_source/train_target given): fit
    on all rows of the training pair, sample capped pairs from the full
    evaluation sets.
    """
    a, b = intersect_on_images(source, target)
    labels = list(a.labels)
    norm_a = l2_normalize(a.rows)
    norm_b = l2_normalize(b.rows)
    big_d = max(a.dim, b.dim)
    cross = train_source is not None
    if cross:
        if train_target is None:
            raise ArgumentError("cross protocol needs both training sets")
        ta, tb = intersect_on_images(train_source, train_target)
        tr_a, tr_b = l2_normalize(ta.rows), l2_normalize(tb.rows)
        if pair_caps is None:
            pair_caps = (10000, 10000)

    def run_seed(seed):
        if cross:
            stats = fit_prep(tr_a, tr_b)
            xp = apply_prep(tr_a, stats, "source")
            yp = apply_prep(tr_b, stats, "target")
            w = align.fit_map(xp, yp, method, alpha)
            amap = align.AlignmentMap(
                w=w, stats=stats, method=method,
                alpha=alpha if method == "ridge" else 0.0, seed=seed,
            )
            eval_rows = list(range(len(labels)))
            pairs = sample_pairs_capped(labels, pair_caps[0], pair_caps[1], seed)
        else:
            amap, eval_rows = _fit_seed(
                norm_a, norm_b, labels, method, alpha, fraction, seed
            )
            test_labels = [labels[i] for i in eval_rows]
            genuine = all_genuine_pairs(test_labels)
            impostor = sample_impostor_pairs(test_labels, len(genuine.pairs), seed)
            pairs = PairList(tuple(sorted(genuine.pairs + impostor.pairs)), seed)

        # pair indices refer to positions within eval_rows
        queries = apply_prep(norm_a[eval_rows], amap.stats, "source") @ amap.w
        gallery = apply_prep(norm_b[eval_rows], amap.stats, "target")
        aligned = _seed_metrics(*_score_pairs(queries, gallery, pairs, symmetric_score), seed)
        base = _seed_metrics(
            *_score_pairs(
                _pad(norm_a[eval_rows], big_d), _pad(norm_b[eval_rows], big_d),
                pairs, symmetric_score,
            ),
            seed,
        )
        return aligned, base

    results = _map_seeds(run_seed, seeds, jobs)
    return VerificationReport(
        method=method,
        seeds=tuple(seeds),
        per_seed=tuple(r[0] for r in results),
        per_seed_baseline=tuple(r[1] for r in results),
        protocol="cross" if cross else "intra",
        fraction=fraction,
        symmetric_score=symmetric_score,
        metadata={
            "source_model": source.model_name,
            "target_model": target.model_name,
            "dataset": source.dataset_name,
            "alpha": alpha if method == "ridge" else 0.0,
            "scoring_direction": "symmetric" if symmetric_score else "source_to_target",
            "pair_caps": list(pair_caps) if pair_caps else None,
        },
    )
