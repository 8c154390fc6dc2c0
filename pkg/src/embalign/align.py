"""Linear alignment maps between preprocessed embedding spaces.

Three fitters of increasing capacity:

* orthogonal (Procrustes): W = U V^T from the SVD of X^T Y,
* unconstrained least squares via the SVD pseudo-inverse (min-norm), and
* ridge, the damped normal-equation solution (X^T X + alpha I)^-1 X^T Y.

All solver arithmetic is float64.  Reflections are allowed in the
orthogonal fit (no determinant correction).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConsistencyError, DataError, FormatError, IoError, NumericalError
from .prep import PrepStats, apply_prep, l2_normalize

#: relative cutoff below which singular values are treated as zero in the
#: pseudo-inverse (zero-padded columns make X^T X singular by construction)
PINV_RTOL = 1e-10

METHODS = ("procrustes", "linear", "ridge")
DEFAULT_RIDGE_ALPHA = 0.1

_MAP_FORMAT_VERSION = 1


def _check_train(x_tr: np.ndarray, y_tr: np.ndarray):
    x_tr = np.asarray(x_tr, dtype=np.float64)
    y_tr = np.asarray(y_tr, dtype=np.float64)
    if x_tr.ndim != 2 or y_tr.ndim != 2:
        raise ConsistencyError("training inputs must be 2-D")
    if x_tr.shape != y_tr.shape:
        raise ConsistencyError(f"shape mismatch: {x_tr.shape} vs {y_tr.shape}")
    if not (np.all(np.isfinite(x_tr)) and np.all(np.isfinite(y_tr))):
        raise DataError("non-finite training data")
    return x_tr, y_tr


def fit_procrustes(x_tr: np.ndarray, y_tr: np.ndarray) -> np.ndarray:
    """Best orthogonal map minimizing ||x_tr W - y_tr||_F."""
    x_tr, y_tr = _check_train(x_tr, y_tr)
    m = x_tr.T @ y_tr
    try:
        u, _, vt = np.linalg.svd(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    return u @ vt


def fit_linear(x_tr: np.ndarray, y_tr: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares map pinv(x_tr) @ y_tr."""
    x_tr, y_tr = _check_train(x_tr, y_tr)
    try:
        u, s, vt = np.linalg.svd(x_tr, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed: {exc}") from exc
    cutoff = PINV_RTOL * (s[0] if s.size else 0.0)
    s_inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return vt.T @ (s_inv[:, None] * (u.T @ y_tr))


def fit_ridge(x_tr: np.ndarray, y_tr: np.ndarray, alpha: float) -> np.ndarray:
    """Damped least-squares map (x^T x + alpha I)^-1 x^T y, alpha > 0."""
    if not alpha > 0:
        raise ConsistencyError("ridge alpha must be positive")
    x_tr, y_tr = _check_train(x_tr, y_tr)
    d = x_tr.shape[1]
    gram = x_tr.T @ x_tr + alpha * np.eye(d)
    try:
        return scipy.linalg.solve(gram, x_tr.T @ y_tr, assume_a="pos")
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"SPD solve failed: {exc}") from exc


def fit_map(x_tr: np.ndarray, y_tr: np.ndarray, method: str, alpha: float = DEFAULT_RIDGE_ALPHA):
    """Dispatch to one of the three fitters."""
    if method == "procrustes":
        return fit_procrustes(x_tr, y_tr)
    if method == "linear":
        return fit_linear(x_tr, y_tr)
    if method == "ridge":
        return fit_ridge(x_tr, y_tr, alpha)
    raise ConsistencyError(f"unknown method {method!r}")


@dataclass(frozen=True)
class AlignmentMap:
    """A fitted D x D map together with its preprocessing statistics."""

    w: np.ndarray
    stats: PrepStats
    method: str
    source_model: str = ""
    target_model: str = ""
    alpha: float = 0.0
    seed: int = 0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        object.__setattr__(self, "w", w)
        if w.shape != (self.stats.big_d, self.stats.big_d):
            raise ConsistencyError(f"map shape {w.shape} != D={self.stats.big_d}")
        if not np.all(np.isfinite(w)):
            raise DataError("non-finite map entries")
        if self.method not in METHODS:
            raise ConsistencyError(f"unknown method {self.method!r}")
        if self.method == "procrustes":
            dev = np.linalg.norm(w.T @ w - np.eye(w.shape[0]))
            if dev > 1e-8:
                raise ConsistencyError(f"orthogonality violated: ||W^T W - I|| = {dev:g}")
        if self.method != "ridge" and self.alpha != 0.0:
            raise ConsistencyError("alpha must be 0 unless method is ridge")


def transform(rows: np.ndarray, amap: AlignmentMap) -> np.ndarray:
    """Normalize, preprocess with the source-side stats, and apply the map."""
    prepped = apply_prep(l2_normalize(rows), amap.stats, "source")
    return prepped @ amap.w


def training_residual(amap: AlignmentMap, x_tr: np.ndarray, y_tr: np.ndarray) -> float:
    """Frobenius residual ||x_tr W - y_tr||_F on preprocessed training data."""
    x_tr, y_tr = _check_train(x_tr, y_tr)
    if x_tr.shape[1] != amap.stats.big_d:
        raise ConsistencyError("training data width does not match the map")
    return float(np.linalg.norm(x_tr @ amap.w - y_tr))


def save_map(amap: AlignmentMap, path: str) -> None:
    """Write map file: one JSON header line, then float64 LE blocks."""
    mu_x = np.ascontiguousarray(amap.stats.mu_x, dtype="<f8").tobytes()
    mu_y = np.ascontiguousarray(amap.stats.mu_y, dtype="<f8").tobytes()
    w = np.ascontiguousarray(amap.w, dtype="<f8").tobytes()
    header = {
        "format_version": _MAP_FORMAT_VERSION,
        "method": amap.method,
        "alpha": amap.alpha,
        "d_a": amap.stats.d_a,
        "d_b": amap.stats.d_b,
        "D": amap.stats.big_d,
        "n_train": amap.stats.n_train,
        "source_model": amap.source_model,
        "target_model": amap.target_model,
        "seed": amap.seed,
    }
    header_bytes = None
    # offsets count from the start of the file, so the header references
    # itself; iterate until the header length stabilizes
    offsets = {"mu_x": 0, "mu_y": 0, "w": 0}
    for _ in range(8):
        header.update(
            offset_mu_x=offsets["mu_x"], offset_mu_y=offsets["mu_y"], offset_w=offsets["w"]
        )
        header_bytes = (json.dumps(header, sort_keys=True) + "\n").encode("utf-8")
        new = {
            "mu_x": len(header_bytes),
            "mu_y": len(header_bytes) + len(mu_x),
            "w": len(header_bytes) + len(mu_x) + len(mu_y),
        }
        if new == offsets:
            break
        offsets = new
    try:
        tmp = path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(header_bytes)
            f.write(mu_x)
            f.write(mu_y)
            f.write(w)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(str(exc)) from exc


def load_map(path: str) -> AlignmentMap:
    """Inverse of :func:`save_map`."""
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    newline = blob.find(b"\n")
    if newline < 0:
        raise FormatError(f"{path}: missing header line")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad header: {exc}") from exc
    if header.get("format_version") != _MAP_FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format_version")
    d_a, d_b, big_d = header["d_a"], header["d_b"], header["D"]

    def block(offset, count):
        end = offset + 8 * count
        if end > len(blob):
            raise FormatError(f"{path}: truncated data block")
        return np.frombuffer(blob, dtype="<f8", count=count, offset=offset)

    stats = PrepStats(
        mu_x=block(header["offset_mu_x"], d_a),
        mu_y=block(header["offset_mu_y"], d_b),
        d_a=d_a,
        d_b=d_b,
        big_d=big_d,
        n_train=header["n_train"],
    )
    w = block(header["offset_w"], big_d * big_d).reshape(big_d, big_d)
    return AlignmentMap(
        w=w,
        stats=stats,
        method=header["method"],
        alpha=header["alpha"],
        source_model=header["source_model"],
        target_model=header["target_model"],
        seed=header["seed"],
    )
