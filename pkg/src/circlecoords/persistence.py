"""Vietoris-Rips filtrations and degree-one persistent cohomology.

The filtration is explicit up to dimension two: edges and triangles are
materialized and sorted by (filtration value, lexicographic vertices).
Cohomology is computed by reducing the coboundary matrix with columns in
decreasing filtration order, which yields a cocycle representative for
every bar as a by-product.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

from . import _kernels
from .density import as_cloud
from .errors import FiltrationTooLarge, LiftFailure, NoLoopDetected

log = logging.getLogger(__name__)

DEFAULT_PRIMES = (47, 53, 59)
DEFAULT_TRIANGLE_CAP = 3_000_000


@dataclass
class RipsFiltration:
    vertex_count: int
    edges: np.ndarray  # (E, 2), u < v
    edge_values: np.ndarray
    triangles: np.ndarray  # (T, 3), u < v < w
    triangle_values: np.ndarray
    triangle_edges: np.ndarray  # (T, 3) edge ids of (vw, uw, uv)
    max_scale: float
    _csr: tuple | None = field(default=None, repr=False)

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def coboundary(self):
        if self._csr is None:
            self._csr = _kernels.coboundary_csr(self.n_edges, self.triangle_edges)
        return self._csr

    def edges_at(self, scale: float) -> np.ndarray:
        """Ids of the edges present at ``scale`` (a prefix of the edge order)."""
        return np.arange(np.searchsorted(self.edge_values, scale, side="right"))

    def triangles_at(self, scale: float) -> np.ndarray:
        return np.arange(np.searchsorted(self.triangle_values, scale, side="right"))


@dataclass
class PersistenceBar:
    birth: float
    death: float  # math.inf for classes alive at max_scale
    rep_edges: np.ndarray  # edge ids into the filtration
    rep_values: np.ndarray  # coefficients in [0, prime)
    prime: int
    birth_edge: int = -1
    death_triangle: int = -1

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def finite(self) -> bool:
        return math.isfinite(self.death)

    def as_dict(self) -> dict:
        return {
            "dim": 1,
            "birth": self.birth,
            "death": self.death if self.finite else None,
            "persistence": self.persistence if self.finite else None,
        }


@dataclass
class IntegerCocycle:
    edge_ids: np.ndarray  # every edge present at the scale, in filtration order
    edges: np.ndarray
    values: np.ndarray  # int64
    scale: float
    prime: int


@dataclass
class BarSelection:
    bar: PersistenceBar
    warnings: list[str]
    median_knn: float


def pairwise_distances(cloud) -> np.ndarray:
    cloud = as_cloud(cloud)
    if cloud.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(cloud))


def enclosing_radius(dist: np.ndarray) -> float:
    """Smallest scale at which some vertex is adjacent to all others.

    Beyond it the Rips complex is a cone, so no degree-one class survives.
    """
    if dist.shape[0] < 2:
        return 0.0
    return float(dist.max(axis=1).min())


def build_rips(cloud=None, max_scale: float = math.inf, *, dist=None,
               triangle_cap: int = DEFAULT_TRIANGLE_CAP) -> RipsFiltration:
    """Vietoris-Rips filtration up to ``max_scale``, capped at dimension two.

    Either a point cloud or a precomputed distance matrix ``dist`` is used.
    Raises FiltrationTooLarge before allocating more than ``triangle_cap``
    triangles.
    """
    if not max_scale > 0:
        raise ValueError("max_scale must be positive")
    if dist is None:
        dist = pairwise_distances(cloud)
    dist = np.ascontiguousarray(dist, dtype=float)
    n = dist.shape[0]
    scale = float(max_scale)

    iu, iv = np.triu_indices(n, 1)
    d = dist[iu, iv]
    keep = d <= scale
    iu, iv, d = iu[keep], iv[keep], d[keep]
    # triu order is lexicographic, so a stable sort breaks value ties by (u, v)
    order = np.argsort(d, kind="stable")
    edges = np.column_stack([iu[order], iv[order]]).astype(np.int64)
    edge_values = d[order]

    n_tri = _kernels.count_triangles(dist, scale)
    if n_tri > triangle_cap:
        raise FiltrationTooLarge(
            f"{n_tri} triangles at max_scale={scale:.4g} exceed the cap of {triangle_cap}; "
            "choose a smaller max_scale")

    edge_index = np.full((n, n), -1, dtype=np.int64)
    edge_index[edges[:, 0], edges[:, 1]] = np.arange(edges.shape[0])
    tris, tri_edges, tri_values = _kernels.enumerate_triangles(dist, scale, edge_index, n_tri)
    order = np.argsort(tri_values, kind="stable")
    return RipsFiltration(
        vertex_count=n,
        edges=edges,
        edge_values=edge_values,
        triangles=tris[order],
        triangle_values=tri_values[order],
        triangle_edges=tri_edges[order],
        max_scale=scale,
    )


def triangle_count(dist: np.ndarray, scale: float) -> int:
    return int(_kernels.count_triangles(np.ascontiguousarray(dist, dtype=float), float(scale)))


def auto_max_scale(dist: np.ndarray, triangle_cap: int = DEFAULT_TRIANGLE_CAP,
                   cap: float | None = None) -> float:
    """Enclosing radius, shrunk to the largest edge length whose complex fits the cap."""
    top = enclosing_radius(dist)
    if cap is not None:
        top = min(top, cap)
    if top <= 0:
        return top
    if triangle_count(dist, top) <= triangle_cap:
        return top
    n = dist.shape[0]
    lengths = np.unique(dist[np.triu_indices(n, 1)])
    lengths = lengths[lengths <= top]
    lo, hi = 0, lengths.size - 1  # invariant: lengths[lo] fits, lengths[hi] does not
    if triangle_count(dist, lengths[lo]) > triangle_cap:
        return float(lengths[lo])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if triangle_count(dist, lengths[mid]) <= triangle_cap:
            lo = mid
        else:
            hi = mid
    log.info("max_scale shrunk from %.4g to %.4g to respect the triangle cap", top, lengths[lo])
    return float(lengths[lo])


def persistent_cohomology_h1(filtration: RipsFiltration, prime: int = 47) -> list[PersistenceBar]:
    """All degree-one bars with positive persistence, longest first."""
    if prime < 2 or any(prime % q == 0 for q in range(2, int(math.isqrt(prime)) + 1)):
        raise ValueError(f"{prime} is not prime")
    f = filtration
    if f.n_edges == 0:
        return []
    ptr, cof, sign = f.coboundary()
    cleared = _kernels.spanning_forest_mask(f.vertex_count, f.edges)
    pair, v_start, v_len, v_idx, v_val = _kernels.reduce_coboundary(
        f.n_edges, f.n_triangles, ptr, cof, sign, cleared, prime)

    bars = []
    for e in np.flatnonzero(pair != -2):
        birth = float(f.edge_values[e])
        t = int(pair[e])
        death = float(f.triangle_values[t]) if t >= 0 else math.inf
        if not death > birth:
            continue
        sl = slice(v_start[e], v_start[e] + v_len[e])
        bars.append(PersistenceBar(birth=birth, death=death, rep_edges=v_idx[sl].copy(),
                                   rep_values=v_val[sl].copy(), prime=int(prime),
                                   birth_edge=int(e), death_triangle=t))
    bars.sort(key=lambda b: (-b.persistence, b.birth))
    return bars


def median_knn_distance(cloud, k: int = 3) -> float:
    cloud = as_cloud(cloud)
    if cloud.shape[0] <= k:
        return 0.0
    dist, _ = cKDTree(cloud).query(cloud, k=k + 1)
    return float(np.median(dist[:, k]))


def _effective_persistence(bar: PersistenceBar, max_scale: float | None) -> float:
    if bar.finite or max_scale is None:
        return bar.persistence
    return max_scale - bar.birth


def select_bar(bars, cloud, *, small_factor: float = 2.0, multiplicity_fraction: float = 0.5,
               max_scale: float | None = None, median_knn: float | None = None) -> BarSelection:
    """Pick the longest bar and report smallness / multiplicity diagnostics."""
    bars = sorted(bars, key=lambda b: (-b.persistence, b.birth))
    if not bars:
        raise NoLoopDetected(
            "no degree-one class found: loops are too small to reflect actual geometry, "
            "or the data is not circular")
    if median_knn is None:
        median_knn = median_knn_distance(cloud, 3)
    best = bars[0]
    warnings = []
    reach = best.death if best.finite else (max_scale if max_scale is not None else math.inf)
    if reach <= small_factor * median_knn:
        warnings.append(
            f"small bar: death {reach:.4g} is not substantially larger than the median "
            f"3rd-neighbor distance {median_knn:.4g}")
    if len(bars) > 1:
        first = _effective_persistence(best, max_scale)
        second = _effective_persistence(bars[1], max_scale)
        if second >= multiplicity_fraction * first:
            warnings.append(
                f"multiple long bars: second persistence {second:.4g} vs longest {first:.4g}; "
                "there may be several independent circular coordinates")
    for w in warnings:
        log.warning(w)
    return BarSelection(bar=best, warnings=warnings, median_knn=median_knn)


def choose_scale(bar: PersistenceBar, t: float = 0.5, max_scale: float | None = None) -> float:
    if not 0 < t < 1:
        raise ValueError("scale fraction t must lie in (0, 1)")
    if bar.finite:
        return bar.birth + t * (bar.death - bar.birth)
    if max_scale is None:
        raise ValueError("infinite bar needs the filtration's max_scale")
    return float(max_scale)


def coboundary_on_triangles(filtration: RipsFiltration, edge_values: np.ndarray,
                            scale: float) -> np.ndarray:
    """(delta alpha)(u,v,w) = alpha(vw) - alpha(uw) + alpha(uv) on triangles alive at ``scale``."""
    te = filtration.triangle_edges[filtration.triangles_at(scale)]
    return edge_values[te[:, 0]] - edge_values[te[:, 1]] + edge_values[te[:, 2]]


def _dense_cochain(filtration: RipsFiltration, bar: PersistenceBar) -> np.ndarray:
    values = np.zeros(filtration.n_edges, dtype=np.int64)
    values[bar.rep_edges] = bar.rep_values
    return values


def symmetric_lift(values, prime: int) -> np.ndarray:
    """Integer representatives of Z/p classes in (-p/2, p/2]."""
    v = np.mod(np.asarray(values, dtype=np.int64), prime)
    return np.where(v > prime / 2, v - prime, v)


def _try_lift(filtration, bar, scale):
    live = filtration.edges_at(scale)
    lifted = np.zeros(filtration.n_edges, dtype=np.int64)
    dense = _dense_cochain(filtration, bar)
    lifted[live] = symmetric_lift(dense[live], bar.prime)
    bad = np.flatnonzero(coboundary_on_triangles(filtration, lifted, scale) != 0)
    cocycle = IntegerCocycle(edge_ids=live, edges=filtration.edges[live], values=lifted[live],
                             scale=float(scale), prime=bar.prime)
    return cocycle, bad


def _matching_bar(bars, target: PersistenceBar):
    for b in bars:
        if b.birth == target.birth and b.death == target.death:
            return b
    return bars[0] if bars else None


def lift_cocycle(bar: PersistenceBar, filtration: RipsFiltration, scale: float,
                 primes=DEFAULT_PRIMES) -> IntegerCocycle:
    """Lift a mod-p representative to an integer cocycle at ``scale``.

    If the symmetric lift violates the integer cocycle condition, the
    cohomology is recomputed with each later prime in ``primes`` and the
    bar with the same endpoints is lifted instead.
    """
    if not bar.birth <= scale < bar.death:
        raise ValueError(f"scale {scale} outside the bar [{bar.birth}, {bar.death})")
    cocycle, bad = _try_lift(filtration, bar, scale)
    if bad.size == 0:
        return cocycle
    tried = [bar.prime]
    later = [p for p in primes if p not in tried]
    if bar.prime in primes:
        later = list(primes)[list(primes).index(bar.prime) + 1:]
    for p in later:
        log.info("integer lift failed mod %d on %d triangles, retrying with %d", tried[-1], bad.size, p)
        candidate = _matching_bar(persistent_cohomology_h1(filtration, p), bar)
        tried.append(p)
        if candidate is None or not candidate.birth <= scale < candidate.death:
            continue
        cocycle, bad = _try_lift(filtration, candidate, scale)
        if bad.size == 0:
            return cocycle
    offending = [tuple(int(x) for x in filtration.triangles[i]) for i in bad]
    raise LiftFailure(f"no integer lift with primes {tried}; offending triangles {offending[:10]}",
                      triangles=offending)


def barcode_json(bars) -> str:
    return json.dumps([b.as_dict() for b in bars], indent=2)


def cocycle_json(cocycle: IntegerCocycle) -> str:
    nz = np.flatnonzero(cocycle.values)
    return json.dumps({
        "scale": cocycle.scale,
        "prime": cocycle.prime,
        "edges": [[int(cocycle.edges[i, 0]), int(cocycle.edges[i, 1]), int(cocycle.values[i])] for i in nz],
    })
