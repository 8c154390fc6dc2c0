"""Preprocessing: unit normalization, train-statistic centering, zero padding.

Pipeline order is fixed: normalize rows, fit column means on the training
rows only, subtract those means, append trailing zero columns up to the
common width D = max(d_a, d_b).  Test rows are centered with the training
means so no test information leaks into the fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DataError, DegenerateRowError


@dataclass(frozen=True)
class PrepStats:
    """Training means and padding target for one (source, target) model pair."""

    mu_x: np.ndarray
    mu_y: np.ndarray
    d_a: int
    d_b: int
    big_d: int
    n_train: int

    def __post_init__(self):
        mu_x = np.asarray(self.mu_x, dtype=np.float64)
        mu_y = np.asarray(self.mu_y, dtype=np.float64)
        object.__setattr__(self, "mu_x", mu_x)
        object.__setattr__(self, "mu_y", mu_y)
        if mu_x.shape != (self.d_a,) or mu_y.shape != (self.d_b,):
            raise ConsistencyError("mean vector lengths disagree with dimensions")
        if self.big_d != max(self.d_a, self.d_b):
            raise ConsistencyError("padding dimension must equal max(d_a, d_b)")
        if not (np.all(np.isfinite(mu_x)) and np.all(np.isfinite(mu_y))):
            raise DataError("non-finite training means")


def l2_normalize(rows: np.ndarray) -> np.ndarray:
    """Scale each row to unit Euclidean norm (float64 output)."""
    rows = np.asarray(rows, dtype=np.float64)
    norms = np.linalg.norm(rows, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateRowError(int(zero[0]))
    return rows / norms[:, None]


def fit_prep(x_train: np.ndarray, y_train: np.ndarray) -> PrepStats:
    """Compute columnwise training means; inputs must already be unit rows."""
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    if x_train.shape[0] != y_train.shape[0]:
        raise ConsistencyError(
            f"row counts differ: {x_train.shape[0]} vs {y_train.shape[0]}"
        )
    if x_train.shape[0] < 1:
        raise ConsistencyError("need at least one training row")
    d_a, d_b = x_train.shape[1], y_train.shape[1]
    return PrepStats(
        mu_x=x_train.mean(axis=0),
        mu_y=y_train.mean(axis=0),
        d_a=d_a,
        d_b=d_b,
        big_d=max(d_a, d_b),
        n_train=x_train.shape[0],
    )


def apply_prep(rows: np.ndarray, stats: PrepStats, side: str) -> np.ndarray:
    """Center by the training mean and zero-pad to width D.

    ``side`` selects which mean applies: "source" uses mu_x, "target" mu_y.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if side == "source":
        mu, d = stats.mu_x, stats.d_a
    elif side == "target":
        mu, d = stats.mu_y, stats.d_b
    else:
        raise ConsistencyError(f"side must be 'source' or 'target', got {side!r}")
    if rows.ndim != 2 or rows.shape[1] != d:
        raise ConsistencyError(
            f"{side} rows have width {rows.shape[1] if rows.ndim == 2 else '?'}, "
            f"stats expect {d}"
        )
    out = np.zeros((rows.shape[0], stats.big_d), dtype=np.float64)
    out[:, :d] = rows - mu
    return out
