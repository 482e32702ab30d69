import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circlecoords.circular import (
    TWO_PI, CircularCoordinate, HarmonicRepresentative, extend_coordinate, harmonic_smooth, incidence_matrix,
    to_circle,
)
from circlecoords.errors import EmptyDomainError, SolverFailure
from circlecoords.persistence import IntegerCocycle

import oracles


def cocycle(edges, values, scale=1.0):
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return IntegerCocycle(edge_ids=np.arange(len(edges)), edges=edges,
                          values=np.asarray(values, dtype=np.int64), scale=scale, prime=47)


def cycle_edges(n):
    return [(min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n)]


@pytest.mark.parametrize("n", [3, 10, 100])
def test_cycle_spreads_unit_cocycle(n):
    values = np.zeros(n, dtype=np.int64)
    values[0] = 1
    rep = harmonic_smooth(cocycle(cycle_edges(n), values))
    # orientation: edge (0, n-1) runs against the cycle direction
    signs = np.array([1.0 if (i + 1) % n > i else -1.0 for i in range(n)])
    assert np.allclose(rep.smoothed * signs * signs[0], 1.0 / n, atol=1e-9)
    assert rep.energy == pytest.approx(1.0 / n, abs=1e-9)


def test_tree_kills_cocycle():
    edges = [(0, 1), (1, 2), (1, 3), (3, 4)]
    rep = harmonic_smooth(cocycle(edges, [3, -2, 5, 1]))
    assert np.allclose(rep.smoothed, 0.0, atol=1e-9)
    assert rep.energy == pytest.approx(0.0, abs=1e-12)


def test_square_with_chord_matches_dense_solve():
    edges = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]
    values = [1, 0, 0, 0, 0]
    rep = harmonic_smooth(cocycle(edges, values))
    f, smoothed = oracles.harmonic_dense(edges, values, 4)
    assert np.allclose(rep.smoothed, smoothed, atol=1e-9)
    assert np.allclose(rep.potential, f, atol=1e-9)  # both minimum-norm


def test_graph_edges_superset_of_cocycle():
    coc = cocycle([(0, 1)], [1])
    rep = harmonic_smooth(coc, graph_edges=np.array(cycle_edges(4)), vertex_count=4)
    assert np.isclose(abs(rep.smoothed).sum(), 1.0)
    with pytest.raises(ValueError):
        harmonic_smooth(cocycle([(0, 5)], [1]), graph_edges=np.array(cycle_edges(4)), vertex_count=6)


def test_solver_failure_reports_residual():
    values = np.zeros(100, dtype=np.int64)
    values[0] = 1
    with pytest.raises(SolverFailure) as info:
        harmonic_smooth(cocycle(cycle_edges(100), values), rtol=1e-300)
    assert info.value.residual >= 0


def random_graph(data, max_n=9):
    n = data.draw(st.integers(2, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = data.draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=len(pairs), unique=True))
    values = data.draw(st.lists(st.integers(-3, 3), min_size=len(chosen), max_size=len(chosen)))
    return n, sorted(chosen), values


@given(st.data())
def test_energy_optimal_and_invariants(data):
    n, edges, values = random_graph(data)
    rep = harmonic_smooth(cocycle(edges, values), vertex_count=n)
    e = np.asarray(edges)
    assert np.allclose(rep.smoothed, np.asarray(values) + rep.potential[e[:, 1]] - rep.potential[e[:, 0]])
    assert rep.energy == pytest.approx(float(rep.smoothed @ rep.smoothed))
    _, dense = oracles.harmonic_dense(edges, values, n)
    assert rep.energy == pytest.approx(float(dense @ dense), abs=1e-8)
    rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
    delta = incidence_matrix(e, n)
    for _ in range(5):
        step = rng.standard_normal(n)
        step *= 1e-3 / np.linalg.norm(step)
        moved = np.asarray(values) + delta @ (rep.potential + step)
        assert moved @ moved >= rep.energy - 1e-9


@given(st.data(), st.floats(-3, 3))
def test_gauge_shift(data, c):
    n, edges, values = random_graph(data)
    rep = harmonic_smooth(cocycle(edges, values), vertex_count=n)
    shifted = HarmonicRepresentative(potential=rep.potential + c, edges=rep.edges, smoothed=rep.smoothed,
                                     energy=rep.energy, isolated=rep.isolated)
    a = to_circle(rep).angles
    b = to_circle(shifted).angles
    live = ~rep.isolated
    diff = np.mod(b[live] - a[live] - TWO_PI * c, TWO_PI)
    assert np.all(np.minimum(diff, TWO_PI - diff) < 1e-9)


@given(st.integers(3, 40), st.integers(0, 39))
def test_winding_preserved_on_cycle(n, k):
    values = np.zeros(n, dtype=np.int64)
    values[k % n] = 1
    edges = cycle_edges(n)
    rep = harmonic_smooth(cocycle(edges, values))
    signs = np.array([1.0 if (i + 1) % n > i else -1.0 for i in range(n)])
    around = lambda a: float(np.sum(np.asarray(a) * signs))
    assert around(rep.smoothed) == pytest.approx(around(values), abs=1e-9)


def test_to_circle_examples():
    def rep(potential, isolated=None):
        potential = np.asarray(potential, dtype=float)
        iso = np.zeros(potential.size, bool) if isolated is None else np.asarray(isolated)
        return HarmonicRepresentative(potential, np.empty((0, 2), int), np.empty(0), 0.0, iso)

    assert np.allclose(to_circle(rep([0, 0.25, 0.5, 0.75])).angles, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert np.allclose(to_circle(rep([1.25])).angles, [np.pi / 2])
    c = to_circle(rep([0.3, 0.1], isolated=[False, True]))
    assert c.angles[1] == 0.0 and c.flags["isolated"].tolist() == [False, True]
    assert to_circle(rep([-1e-18])).angles[0] < TWO_PI


def test_isolated_vertex_from_solver():
    rep = harmonic_smooth(cocycle([(0, 1)], [1]), vertex_count=3)
    c = to_circle(rep)
    assert c.flags["isolated"].tolist() == [False, False, True]
    assert c.angles[2] == 0.0


def test_extend_examples():
    cloud = np.array([[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, 5.0]])
    coord = CircularCoordinate(angles=[0.0, np.pi], domain=[1, 2])
    out = extend_coordinate(coord, cloud, 1.0)
    assert out.angles[1] == 0.0 and out.angles[2] == np.pi
    # point 0 is equidistant from angles 0 and pi: zero resultant
    assert out.flags["degenerate"][0] and out.angles[0] == 0.0
    same = extend_coordinate(CircularCoordinate(angles=[1.0, 1.0], domain=[1, 2]), cloud, 1.0)
    assert np.allclose(same.angles, 1.0)
    quarter = extend_coordinate(CircularCoordinate(angles=[0.0, np.pi / 2], domain=[1, 2]), cloud, 1.0)
    assert quarter.angles[0] == pytest.approx(np.pi / 4)
    assert quarter.angles[3] == pytest.approx(np.pi / 4)


def test_extend_empty_domain():
    with pytest.raises(EmptyDomainError):
        extend_coordinate(CircularCoordinate(angles=[], domain=[]), np.zeros((3, 2)), 1.0)


def test_extend_locality():
    rng = np.random.default_rng(0)
    cloud = np.vstack([rng.random((30, 2)), [[100.0, 100.0], [100.0, 100.0]]])
    dom = np.array([0, 3, 7, 11, 30])
    ang = rng.random(5) * TWO_PI
    a = extend_coordinate(CircularCoordinate(ang, dom), cloud, 10.0)
    b = extend_coordinate(CircularCoordinate(np.append(ang, ang[-1]), np.append(dom, 31)), cloud, 10.0)
    assert np.allclose(a.angles[:30], b.angles[:30], atol=1e-12)


@given(st.lists(st.floats(0, 6.28), min_size=1, max_size=20))
def test_coordinate_csv_roundtrip(angles):
    flags = {"degenerate": np.arange(len(angles)) % 2 == 0, "isolated": np.arange(len(angles)) % 3 == 0}
    c = CircularCoordinate(angles=angles, domain=np.arange(len(angles)) * 2, flags=flags)
    back = CircularCoordinate.from_csv(c.to_csv())
    assert np.array_equal(back.angles, c.angles) and np.array_equal(back.domain, c.domain)
    for name, mask in flags.items():
        if mask.any():
            assert np.array_equal(back.flags[name], mask)
    assert c.to_csv().splitlines()[0] == "point_index,angle_radians,flags"
