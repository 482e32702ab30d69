"""Density estimation and density-equalizing rejection sampling.

The estimator is the unnormalized ball count: for each point, the number
of points (itself included) within a closed Euclidean ball.  Acceptance
probabilities are inversely proportional to it, so that the accepted
points are approximately uniform with respect to the volume of the
underlying space.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import ZeroVarianceError

log = logging.getLogger(__name__)

MIN_SUBSAMPLE_SIZE = 4
# brute-force pairwise counting below this size, k-d tree above
_BRUTE_FORCE_LIMIT = 4000


def as_cloud(points) -> np.ndarray:
    """Validate and return a point cloud as a float (n, N) array."""
    cloud = np.asarray(points, dtype=float)
    if cloud.ndim == 1:
        cloud = cloud[:, None]
    if cloud.ndim != 2 or cloud.shape[0] == 0 or cloud.shape[1] == 0:
        raise ValueError(f"point cloud must be a non-empty (n, N) array, got shape {cloud.shape}")
    if not np.all(np.isfinite(cloud)):
        raise ValueError("point cloud contains non-finite coordinates")
    return cloud


@dataclass(frozen=True)
class DensityField:
    values: np.ndarray
    bandwidth: float


@dataclass(frozen=True)
class AcceptanceField:
    probabilities: np.ndarray
    floor_constant: float

    @property
    def expected_size(self) -> float:
        return float(self.probabilities.sum())


@dataclass
class SubsampleSet:
    subsamples: list[np.ndarray]
    seed: int
    flagged: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.subsamples)

    def sizes(self) -> np.ndarray:
        return np.array([len(s) for s in self.subsamples])

    def pooled(self) -> np.ndarray:
        """Concatenation of all subsamples (a multiset of indices)."""
        if not self.subsamples:
            return np.empty(0, dtype=np.int64)
        return np.concatenate(self.subsamples)

    def to_json(self) -> str:
        return json.dumps([s.tolist() for s in self.subsamples])


def scott_bandwidth(cloud, intrinsic_dim: int) -> float:
    """Multivariate Scott's rule ``sigma * n ** (-1 / (d + 4))``.

    ``sigma**2`` is the geometric mean of the positive eigenvalues of the
    sample covariance; ``d`` is the intrinsic dimension of the data.
    """
    cloud = as_cloud(cloud)
    if intrinsic_dim < 1:
        raise ValueError("intrinsic_dim must be a positive integer")
    n = cloud.shape[0]
    if n < 2:
        raise ZeroVarianceError("Scott's rule needs at least two points")
    cov = np.atleast_2d(np.cov(cloud, rowvar=False))
    eig = np.linalg.eigvalsh(cov)
    top = eig.max(initial=0.0)
    positive = eig[eig > max(top, 0.0) * 1e-12]
    if top <= 0.0 or positive.size == 0:
        raise ZeroVarianceError("sample covariance vanishes (all points identical)")
    sigma = np.sqrt(np.exp(np.mean(np.log(positive))))
    return float(sigma * n ** (-1.0 / (intrinsic_dim + 4)))


def estimate_density(cloud, bandwidth: float) -> DensityField:
    cloud = as_cloud(cloud)
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    n = cloud.shape[0]
    if n <= _BRUTE_FORCE_LIMIT:
        counts = np.zeros(n, dtype=np.int64)
        # row blocks keep the distance matrix small
        for start in range(0, n, 1024):
            block = cdist(cloud[start:start + 1024], cloud)
            counts[start:start + 1024] = np.count_nonzero(block <= bandwidth, axis=1)
    else:
        tree = cKDTree(cloud)
        counts = np.asarray(tree.query_ball_point(cloud, bandwidth, return_length=True), dtype=np.int64)
    return DensityField(values=counts.astype(float), bandwidth=float(bandwidth))


def make_acceptance(density: DensityField, target_size: float) -> AcceptanceField:
    rho = np.asarray(density.values, dtype=float)
    if target_size <= 0 or target_size > rho.size:
        raise ValueError(f"target_size must lie in (0, {rho.size}], got {target_size}")
    m = min(rho.min(), target_size / np.sum(1.0 / rho))
    if m < target_size / np.sum(1.0 / rho):
        log.info("target size %.1f infeasible, expected size capped at %.1f",
                 target_size, m * np.sum(1.0 / rho))
    probs = np.clip(m / rho, 0.0, 1.0)
    return AcceptanceField(probabilities=probs, floor_constant=float(m))


def _uniform_stream(seed: int, index: int, size: int) -> np.ndarray:
    # Philox is counter-based: draw z of stream (seed, index) is fixed no
    # matter which other streams were consumed before.
    bitgen = np.random.Philox(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(index)]))
    return np.random.Generator(bitgen).random(size)


def rejection_sample(cloud, acceptance: AcceptanceField, k: int, seed: int) -> SubsampleSet:
    cloud = as_cloud(cloud)
    probs = np.asarray(acceptance.probabilities)
    if probs.shape[0] != cloud.shape[0]:
        raise ValueError("acceptance field does not match the point cloud")
    if k < 1:
        raise ValueError("k must be positive")
    subs, flagged = [], []
    for i in range(k):
        tau = _uniform_stream(seed, i, probs.shape[0])
        # tau in [0, 1): accept iff tau < pi, so pi = 0 never accepts
        idx = np.flatnonzero(tau < probs)
        subs.append(idx)
        if idx.size < MIN_SUBSAMPLE_SIZE:
            flagged.append(i)
    if flagged:
        log.warning("%d of %d subsamples have fewer than %d points", len(flagged), k, MIN_SUBSAMPLE_SIZE)
    return SubsampleSet(subsamples=subs, seed=int(seed), flagged=flagged)
