"""Harmonic smoothing of integer cocycles and circle-valued coordinates."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import cg
from scipy.spatial.distance import cdist

from .density import as_cloud
from .errors import EmptyDomainError, SolverFailure
from .persistence import IntegerCocycle

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
SOLVER_RTOL = 1e-9
DEGENERATE_NORM = 1e-8


@dataclass
class HarmonicRepresentative:
    potential: np.ndarray  # f, one value per vertex
    edges: np.ndarray  # (E, 2) graph edges, u < v
    smoothed: np.ndarray  # alpha + delta f, one value per edge
    energy: float
    isolated: np.ndarray  # bool mask of vertices without edges
    residual: float = 0.0


@dataclass
class CircularCoordinate:
    angles: np.ndarray  # in [0, 2 pi)
    domain: np.ndarray  # strictly increasing indices into the parent cloud
    flags: dict = field(default_factory=dict)  # name -> bool mask over the domain

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        self.domain = np.asarray(self.domain, dtype=np.int64)
        if self.angles.shape != self.domain.shape:
            raise ValueError("angles and domain lengths differ")

    def __len__(self):
        return self.angles.size

    def flag_strings(self) -> list[str]:
        out = []
        for i in range(self.angles.size):
            out.append("|".join(name for name, mask in sorted(self.flags.items()) if mask[i]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["point_index", "angle_radians", "flags"])
        for idx, ang, fl in zip(self.domain, self.angles, self.flag_strings()):
            w.writerow([int(idx), repr(float(ang)), fl])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CircularCoordinate":
        rows = list(csv.DictReader(io.StringIO(text)))
        domain = np.array([int(r["point_index"]) for r in rows], dtype=np.int64)
        angles = np.array([float(r["angle_radians"]) for r in rows])
        names = sorted({n for r in rows for n in (r.get("flags") or "").split("|") if n})
        flags = {n: np.array([n in (r.get("flags") or "").split("|") for r in rows]) for n in names}
        return cls(angles=angles, domain=domain, flags=flags)


def wrap(angles):
    return np.mod(angles, TWO_PI)


def incidence_matrix(edges: np.ndarray, vertex_count: int) -> sps.csr_matrix:
    """Coboundary delta: C^0 -> C^1, (delta f)(u, v) = f(v) - f(u)."""
    m = edges.shape[0]
    rows = np.repeat(np.arange(m), 2)
    cols = edges[:, [0, 1]].ravel()
    data = np.tile([-1.0, 1.0], m)
    return sps.csr_matrix((data, (rows, cols)), shape=(m, vertex_count))


def harmonic_smooth(cocycle: IntegerCocycle, graph_edges=None, vertex_count: int | None = None,
                    rtol: float = SOLVER_RTOL) -> HarmonicRepresentative:
    """Least-squares potential f minimizing sum_e (alpha(e) + f(v) - f(u))^2.

    Solved by conjugate gradients on the graph Laplacian from a zero start,
    which stays orthogonal to the constants and so returns the minimum-norm
    solution on every connected component.
    """
    edges = np.asarray(cocycle.edges if graph_edges is None else graph_edges, dtype=np.int64)
    if vertex_count is None:
        vertex_count = int(edges.max()) + 1 if edges.size else 0
    alpha = np.zeros(edges.shape[0])
    if graph_edges is None:
        alpha[:] = cocycle.values
    else:
        lookup = {(int(u), int(v)): i for i, (u, v) in enumerate(edges)}
        for (u, v), val in zip(cocycle.edges, cocycle.values):
            if val == 0:
                continue
            if (int(u), int(v)) not in lookup:
                raise ValueError(f"cocycle edge ({u}, {v}) is not in the graph")
            alpha[lookup[int(u), int(v)]] = val

    isolated = np.ones(vertex_count, dtype=bool)
    isolated[edges.ravel()] = False
    delta = incidence_matrix(edges, vertex_count)
    lap = (delta.T @ delta).tocsr()
    rhs = -(delta.T @ alpha)
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        f = np.zeros(vertex_count)
        residual = 0.0
    else:
        maxiter = max(10 * vertex_count, 1)
        f, info = cg(lap, rhs, x0=np.zeros(vertex_count), rtol=rtol, atol=0.0, maxiter=maxiter)
        residual = float(np.linalg.norm(lap @ f - rhs) / bnorm)
        if info != 0 and residual > rtol:
            raise SolverFailure(f"conjugate gradients stopped after {maxiter} iterations with "
                                f"relative residual {residual:.3e}", residual=residual)
    smoothed = alpha + delta @ f
    return HarmonicRepresentative(potential=f, edges=edges, smoothed=smoothed,
                                  energy=float(smoothed @ smoothed), isolated=isolated,
                                  residual=residual)


def to_circle(rep: HarmonicRepresentative, domain=None) -> CircularCoordinate:
    n = rep.potential.size
    domain = np.arange(n) if domain is None else np.asarray(domain, dtype=np.int64)
    angles = wrap(TWO_PI * rep.potential)
    angles[rep.isolated] = 0.0
    # mod can return exactly 2 pi for tiny negative inputs
    angles[angles >= TWO_PI] = 0.0
    return CircularCoordinate(angles=angles, domain=domain, flags={"isolated": rep.isolated.copy()})


def extend_coordinate(coord: CircularCoordinate, cloud, kernel_rate: float) -> CircularCoordinate:
    """Extend a subsample coordinate to every point by a Gaussian-weighted circular mean."""
    cloud = as_cloud(cloud)
    if len(coord) == 0:
        raise EmptyDomainError("cannot extend a coordinate with an empty domain")
    if not kernel_rate > 0:
        raise ValueError("kernel_rate must be positive")
    n = cloud.shape[0]
    sub = cloud[coord.domain]
    unit = np.column_stack([np.cos(coord.angles), np.sin(coord.angles)])
    angles = np.empty(n)
    degenerate = np.zeros(n, dtype=bool)
    for start in range(0, n, 2048):
        sq = cdist(cloud[start:start + 2048], sub, "sqeuclidean")
        with np.errstate(under="ignore"):
            resultant = np.exp(-kernel_rate * sq) @ unit
        norm = np.hypot(resultant[:, 0], resultant[:, 1])
        block = np.arctan2(resultant[:, 1], resultant[:, 0])
        bad = norm < DEGENERATE_NORM
        if bad.any():
            block[bad] = coord.angles[np.argmin(sq[bad], axis=1)]
        angles[start:start + 2048] = block
        degenerate[start:start + 2048] = bad
    angles = wrap(angles)
    angles[angles >= TWO_PI] = 0.0
    angles[coord.domain] = coord.angles
    degenerate[coord.domain] = False
    return CircularCoordinate(angles=angles, domain=np.arange(n), flags={"degenerate": degenerate})
