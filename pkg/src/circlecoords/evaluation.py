"""Coordinate quality measures: KSG mutual information, aligned RMSE, winding."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import digamma

from .alignment import circle_distance
from .circular import TWO_PI, CircularCoordinate
from .errors import EmptyDomainError

TIE_JITTER = 1e-12


@dataclass(frozen=True)
class MIEstimate:
    value: float
    k_neighbors: int
    sample_count: int
    normalized: float
    tie_jitter: float = TIE_JITTER

    @property
    def maximum(self) -> float:
        return ksg_upper_bound(self.sample_count, self.k_neighbors)


def ksg_upper_bound(n: int, k: int) -> float:
    return float(digamma(n) - digamma(k) - 1.0 / k)


def euclidean_metric(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 1:
        a, b = a[:, None], b[:, None]
    return cdist(a, b)


def circular_metric(a, b):
    return circle_distance(np.asarray(a, dtype=float)[:, None], np.asarray(b, dtype=float)[None, :])


_METRICS = {"euclidean": euclidean_metric, "circular": circular_metric}


def _resolve(metric):
    if callable(metric):
        return metric
    try:
        return _METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; use one of {sorted(_METRICS)} or a callable") from None


def _tie_jitter(n: int) -> np.ndarray:
    """Symmetric index-keyed offsets in [0, TIE_JITTER), zero on the diagonal."""
    i = np.arange(n, dtype=np.uint64)
    lo = np.minimum(i[:, None], i[None, :])
    hi = np.maximum(i[:, None], i[None, :])
    with np.errstate(over="ignore"):
        h = (lo * np.uint64(0x9E3779B97F4A7C15)) ^ (hi * np.uint64(0xC2B2AE3D27D4EB4F))
        h ^= h >> np.uint64(31)
        h *= np.uint64(0xBF58476D1CE4E5B9)
        h ^= h >> np.uint64(29)
    jitter = (h >> np.uint64(11)).astype(np.float64) / float(1 << 53) * TIE_JITTER
    np.fill_diagonal(jitter, 0.0)
    return jitter


def ksg_mi(xs, ys, k: int = 3, metric_x="euclidean", metric_y="euclidean") -> MIEstimate:
    """Kraskov-Stoegbauer-Grassberger estimate (the rectangle variant).

    For each sample the k nearest neighbours are taken under the max of the
    two marginal metrics; n_x (n_y) counts other samples within the largest
    x- (y-) distance among those neighbours.  Distances get the same
    deterministic, symmetric jitter on both sides to break ties.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = xs.shape[0]
    if ys.shape[0] != n:
        raise ValueError("samples differ in length")
    if n < k + 1:
        raise ValueError(f"need more than k={k} samples, got {n}")
    jitter = _tie_jitter(n)
    dx = _resolve(metric_x)(xs, xs) + jitter
    dy = _resolve(metric_y)(ys, ys) + jitter
    joint = np.maximum(dx, dy)
    np.fill_diagonal(joint, np.inf)
    nbrs = np.argpartition(joint, k - 1, axis=1)[:, :k]
    rows = np.arange(n)[:, None]
    half_x = dx[rows, nbrs].max(axis=1)
    half_y = dy[rows, nbrs].max(axis=1)
    np.fill_diagonal(dx, np.inf)
    np.fill_diagonal(dy, np.inf)
    nx = np.count_nonzero(dx <= half_x[:, None], axis=1)
    ny = np.count_nonzero(dy <= half_y[:, None], axis=1)
    upper = ksg_upper_bound(n, k)
    # written as upper minus a sum of non-negative gaps so that n_x = n_y = k
    # reproduces the bound exactly
    gap = np.mean((digamma(nx) - digamma(k)) + (digamma(ny) - digamma(k)))
    value = float(upper - gap)
    return MIEstimate(value=value, k_neighbors=k, sample_count=n, normalized=value / upper)


def _frechet_rotation(residuals: np.ndarray) -> tuple[float, float]:
    """Rotation c minimizing sum d(r_i - c, 0)^2 over the circle, and that minimum.

    The minimizer is the arithmetic mean of some cyclic unwrapping of the
    sorted residuals; all n candidates are scored exactly.
    """
    a = np.sort(np.mod(residuals, TWO_PI))
    n = a.size
    candidates = (a.sum() + TWO_PI * np.arange(n)) / n
    best_c, best = 0.0, np.inf
    for start in range(0, n, 512):
        c = candidates[start:start + 512]
        d = circle_distance(a[None, :], c[:, None])
        cost = np.sum(d * d, axis=1)
        j = int(np.argmin(cost))
        if cost[j] < best:
            best, best_c = float(cost[j]), float(c[j])
    return best_c, best


def circular_rmse_aligned(coord, truth) -> float:
    """min over O(2) of the root-mean-square arc distance to ``truth``."""
    theta = np.asarray(coord.angles if isinstance(coord, CircularCoordinate) else coord, dtype=float)
    ref = np.asarray(truth.angles if isinstance(truth, CircularCoordinate) else truth, dtype=float)
    if theta.shape != ref.shape:
        raise ValueError("coordinate and truth cover different domains")
    if theta.size == 0:
        raise EmptyDomainError("empty domain")
    best = min(_frechet_rotation(ref - s * theta)[1] for s in (1.0, -1.0))
    return float(np.sqrt(best / theta.size))


def winding_number(coord, path) -> int:
    """Signed number of turns of the coordinate along a closed index path."""
    theta = np.asarray(coord.angles if isinstance(coord, CircularCoordinate) else coord, dtype=float)
    path = np.asarray(path, dtype=np.int64)
    if path.size < 2 or path[0] != path[-1]:
        raise ValueError("path must be closed (first index equal to last)")
    steps = np.diff(theta[path])
    principal = np.mod(steps + np.pi, TWO_PI) - np.pi
    return int(np.rint(principal.sum() / TWO_PI))


def closed_order(values) -> np.ndarray:
    """Indices sorted by ``values`` with the first index appended (a closed path)."""
    order = np.argsort(np.asarray(values), kind="stable")
    return np.append(order, order[0])


@dataclass
class EvaluationRecord:
    mi: float
    mi_max: float
    mi_norm: float
    k: int
    n: int
    rmse_aligned: float | None = None
    winding: int | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def evaluate(coord: CircularCoordinate, reference, reference_metric="euclidean", k: int = 3,
             truth=None) -> EvaluationRecord:
    """MI of the coordinate against ``reference``; RMSE and winding when truth is known."""
    mi = ksg_mi(reference, coord.angles, k=k, metric_x=reference_metric, metric_y="circular")
    rec = EvaluationRecord(mi=mi.value, mi_max=mi.maximum, mi_norm=mi.normalized, k=k, n=mi.sample_count)
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        rec.rmse_aligned = circular_rmse_aligned(coord.angles, truth)
        rec.winding = winding_number(coord.angles, closed_order(truth))
    return rec
