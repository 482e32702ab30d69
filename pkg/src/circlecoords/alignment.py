"""Procrustes alignment and averaging of circle-valued configurations.

A planar O(2) generalized Procrustes solution (each configuration as n
unit vectors) seeds a hill climb on the arc-length loss

    L(g, Theta) = (1/k) sum_i sum_j d(g_i . Phi_i(j), Theta(j))^2.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .circular import TWO_PI, CircularCoordinate, wrap

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class O2Element:
    reflect: bool = False
    rotation: float = 0.0

    def apply(self, angles):
        angles = np.asarray(angles, dtype=float)
        return wrap(self.rotation - angles) if self.reflect else wrap(self.rotation + angles)

    def rotated(self, delta: float) -> "O2Element":
        return O2Element(self.reflect, float(wrap(self.rotation + delta)))

    @classmethod
    def from_matrix(cls, r: np.ndarray) -> "O2Element":
        # row-vector convention: (cos t, sin t) @ r
        return cls(reflect=bool(np.linalg.det(r) < 0),
                   rotation=float(wrap(np.arctan2(r[0, 1], r[0, 0]))))

    def matrix(self) -> np.ndarray:
        c, s = np.cos(self.rotation), np.sin(self.rotation)
        if self.reflect:
            return np.array([[c, s], [s, -c]])
        return np.array([[c, s], [-s, c]])


@dataclass
class AlignmentResult:
    transforms: list[O2Element]
    centroid: np.ndarray
    loss_trace: list[float]
    converged: bool
    iterations: int = 0
    planar_loss: float = float("nan")
    fallback_points: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    @property
    def loss(self) -> float:
        return self.loss_trace[-1]

    def to_json(self) -> str:
        return json.dumps({
            "transforms": [{"reflect": g.reflect, "rotation": g.rotation} for g in self.transforms],
            "final_loss": self.loss,
            "iterations": self.iterations,
            "converged": self.converged,
            "loss_trace": self.loss_trace,
        }, indent=2)


def circle_distance(a, b):
    """Arc-length distance on R / 2 pi Z, in [0, pi]."""
    d = np.mod(np.abs(np.asarray(a) - np.asarray(b)), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def _signed_residual(x):
    # representative of x in [-pi, pi)
    return np.mod(x + np.pi, TWO_PI) - np.pi


def _as_configs(configs) -> np.ndarray:
    arr = np.asarray(configs, dtype=float)
    if arr.ndim != 2:
        raise ValueError("configurations must form a (k, n) array of angles")
    return arr


def _transformed(transforms, configs) -> np.ndarray:
    sign = np.array([-1.0 if g.reflect else 1.0 for g in transforms])
    rot = np.array([g.rotation for g in transforms])
    return rot[:, None] + sign[:, None] * configs


def circle_loss(transforms, centroid, configs) -> float:
    configs = _as_configs(configs)
    centroid = np.asarray(centroid, dtype=float)
    if len(transforms) != configs.shape[0]:
        raise ValueError(f"{len(transforms)} transforms for {configs.shape[0]} configurations")
    if centroid.shape != (configs.shape[1],):
        raise ValueError("centroid length differs from the configurations")
    d = circle_distance(_transformed(transforms, configs), centroid[None, :])
    return float(np.sum(d * d) / configs.shape[0])


def _orthogonal_fit(z: np.ndarray, target: np.ndarray) -> np.ndarray:
    """argmin over O(2) of ||z @ r - target|| via the 2x2 SVD of z^T target."""
    u, _, vt = np.linalg.svd(z.T @ target)
    return u @ vt


def procrustes_o2_seed(configs, tol: float = 1e-10, max_sweeps: int = 500):
    """Generalized orthogonal Procrustes in the plane, centroid projected to the circle.

    Returns (transforms, centroid_angles, planar_loss, fallback_indices).
    """
    configs = _as_configs(configs)
    k, n = configs.shape
    if k < 2:
        raise ValueError("need at least two configurations")
    z = np.stack([np.column_stack([np.cos(c), np.sin(c)]) for c in configs])
    rots = np.tile(np.eye(2), (k, 1, 1))
    y = z.copy()
    total = y.sum(axis=0)

    def planar_loss():
        mean = total / k
        return float(np.sum((y - mean) ** 2) / k)

    prev = planar_loss()
    for _ in range(max_sweeps):
        for i in range(k):
            others = (total - y[i]) / (k - 1)
            rots[i] = _orthogonal_fit(z[i], others)
            new = z[i] @ rots[i]
            total += new - y[i]
            y[i] = new
        total = y.sum(axis=0)  # guard against drift from incremental updates
        loss = planar_loss()
        if abs(prev - loss) < tol:
            prev = loss
            break
        prev = loss

    mean = total / k
    norm = np.hypot(mean[:, 0], mean[:, 1])
    fallback = np.flatnonzero(norm < 1e-8)
    if fallback.size:
        log.warning("%d planar centroid points at the origin, using configuration 1", fallback.size)
        mean[fallback] = y[0, fallback]
    centroid = wrap(np.arctan2(mean[:, 1], mean[:, 0]))
    transforms = [O2Element.from_matrix(r) for r in rots]
    return transforms, centroid, prev, fallback


def hill_climb(transforms, centroid, configs, rate0: float = 0.1, tol: float = 1e-8,
               max_iter: int = 1000, schedule=None) -> AlignmentResult:
    """Coordinate-wise descent on the circle loss with a shrinking step.

    Iteration t uses the step ``schedule(t)`` (default rate0 / (1 + t)).
    Each transform, then each centroid point, takes whichever of +step,
    -step or no rotation gives the smallest loss; ties keep no rotation.
    Reflections stay as given.  Because the loss is a sum of independent
    terms per configuration (for fixed centroid) and per point (for fixed
    transforms), the sequential sweeps are evaluated in vectorized form.

    An iteration that moves nothing is not accepted and does not stop the
    search (a smaller step may still help); the climb stops when an
    accepted iteration lowers the loss by less than ``tol``, or after
    ``max_iter`` iterations.
    """
    configs = _as_configs(configs)
    k, n = configs.shape
    if schedule is None:
        def schedule(t):
            return rate0 / (1.0 + t)
    sign = np.array([-1.0 if g.reflect else 1.0 for g in transforms])
    rot = np.array([g.rotation for g in transforms], dtype=float)
    theta = np.asarray(centroid, dtype=float).copy()
    base = sign[:, None] * configs

    def residual():
        return _signed_residual(rot[:, None] + base - theta[None, :])

    loss = circle_loss(transforms, theta, configs)
    trace = [loss]
    converged = False
    t = 0
    for t in range(max_iter):
        eta = schedule(t)
        r = residual()
        # transforms: rotating g_i by s shifts row i of the residual by +s
        row_now = np.sum(r * r, axis=1)
        row_plus = np.sum(_signed_residual(r + eta) ** 2, axis=1)
        row_minus = np.sum(_signed_residual(r - eta) ** 2, axis=1)
        step = np.where((row_plus < row_now) & (row_plus <= row_minus), eta,
                        np.where(row_minus < row_now, -eta, 0.0))
        new_rot = wrap(rot + step)
        r = _signed_residual(r + step[:, None])
        # centroid: moving Theta(j) by s shifts column j by -s
        col_now = np.sum(r * r, axis=0)
        col_plus = np.sum(_signed_residual(r - eta) ** 2, axis=0)
        col_minus = np.sum(_signed_residual(r + eta) ** 2, axis=0)
        move = np.where((col_plus < col_now) & (col_plus <= col_minus), eta,
                        np.where(col_minus < col_now, -eta, 0.0))
        if not step.any() and not move.any():
            continue
        new_theta = wrap(theta + move)
        new_loss = circle_loss([O2Element(bool(s < 0), float(a)) for s, a in zip(sign, new_rot)],
                               new_theta, configs)
        if new_loss > loss:
            # only reachable through rounding; keep the trace monotone
            continue
        rot, theta = new_rot, new_theta
        decrease = loss - new_loss
        loss = new_loss
        trace.append(loss)
        if decrease < tol:
            converged = True
            break
    theta[theta >= TWO_PI] = 0.0
    final = [O2Element(bool(s < 0), float(a)) for s, a in zip(sign, rot)]
    return AlignmentResult(transforms=final, centroid=theta, loss_trace=trace,
                           converged=converged, iterations=t + 1 if max_iter else 0)


def align_and_average(configs, rate0: float = 0.1, tol: float = 1e-8, max_iter: int = 1000,
                      schedule=None):
    """Seed with planar Procrustes, refine by hill climbing, return the centroid.

    Returns (CircularCoordinate over range(n), AlignmentResult).
    """
    configs = _as_configs(configs)
    if configs.shape[0] < 2:
        raise ValueError("need at least two configurations")
    transforms, centroid, planar, fallback = procrustes_o2_seed(configs)
    result = hill_climb(transforms, centroid, configs, rate0=rate0, tol=tol,
                        max_iter=max_iter, schedule=schedule)
    result.planar_loss = planar
    result.fallback_points = fallback
    n = configs.shape[1]
    flags = {"centroid_fallback": np.isin(np.arange(n), fallback)}
    return CircularCoordinate(angles=result.centroid, domain=np.arange(n), flags=flags), result
