import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.spatial.distance import pdist
from scipy.stats import chisquare

from circlecoords.circular import TWO_PI
from circlecoords.data import (
    TimeSeries, delay_embed, detrend, ellipse_arc_fraction, gen_limit_cycle_series, gen_unbalanced_circle,
    gen_unbalanced_ellipse, pca_reduce, sample_von_mises,
)


def angle_bins(theta, bins=12):
    return np.bincount((np.asarray(theta) / TWO_PI * bins).astype(int).clip(0, bins - 1), minlength=bins)


def test_circle_radius_zero_sd():
    s = gen_unbalanced_circle(n=200, radius_sd=0.0, radius_mean=2.0, seed=1)
    assert np.allclose(np.linalg.norm(s.cloud, axis=1), 2.0, atol=1e-12)
    assert np.all((s.true_parameter >= 0) & (s.true_parameter < TWO_PI))


def test_zero_dispersion_is_uniform():
    passed = sum(chisquare(angle_bins(gen_unbalanced_circle(dispersion=0.0, seed=s).true_parameter)).pvalue >= 0.01
                 for s in range(100))
    assert passed >= 95


def test_default_mode_at_zero():
    h = angle_bins(gen_unbalanced_circle(seed=0).true_parameter)
    assert np.argmax(h) in (0, 11)
    assert h[0] + h[11] > 3 * (h[5] + h[6])


def test_von_mises_moments():
    rng = np.random.default_rng(0)
    th = sample_von_mises(rng, 0.0, 1.3, 200_000)
    from scipy.special import i0, i1
    # mean resultant length of a von Mises law is I1(k) / I0(k)
    assert np.mean(np.cos(th)) == pytest.approx(i1(1.3) / i0(1.3), abs=5e-3)
    assert abs(np.mean(np.sin(th))) < 5e-3


def test_generators_deterministic():
    a = gen_unbalanced_circle(seed=7)
    b = gen_unbalanced_circle(seed=7)
    assert np.array_equal(a.cloud, b.cloud) and np.array_equal(a.true_parameter, b.true_parameter)
    e1 = gen_unbalanced_ellipse(n=50, seed=7)
    e2 = gen_unbalanced_ellipse(n=50, seed=7)
    assert np.array_equal(e1.cloud, e2.cloud)


def test_ellipse_dilation_one_is_circle():
    a = gen_unbalanced_circle(seed=3)
    b = gen_unbalanced_ellipse(dilation=1.0, seed=3)
    assert np.array_equal(a.cloud, b.cloud) and np.array_equal(a.true_parameter, b.true_parameter)


def test_ellipse_points_on_curve():
    s = gen_unbalanced_ellipse(n=100, radius_sd=0.0, dilation=1.6, seed=2)
    x, y = s.cloud.T
    assert np.allclose((x / 1.6) ** 2 + y ** 2, 1.0, atol=1e-12)


def test_ellipse_quarter_arc():
    # by symmetry the point at pi/2 sits a quarter of the way round
    assert ellipse_arc_fraction([np.pi / 2], 1.6)[0] == pytest.approx(np.pi / 2, abs=1e-9)
    speed = lambda t: np.hypot(1.6 * np.sin(t), np.cos(t))
    part = quad(speed, 0, 0.4, epsabs=1e-12)[0] / quad(speed, 0, TWO_PI, epsabs=1e-12)[0]
    assert ellipse_arc_fraction([0.4], 1.6)[0] == pytest.approx(TWO_PI * part, abs=1e-9)


def test_ellipse_fraction_monotone():
    t = np.linspace(0, TWO_PI, 50, endpoint=False)
    f = ellipse_arc_fraction(t, 1.6)
    assert np.all(np.diff(f) > 0) and f[0] == 0.0 and f[-1] < TWO_PI


def test_detrend_constant_column():
    ts = TimeSeries(np.column_stack([np.full(50, 3.0), np.arange(50.0)]))
    out = detrend(ts, 10)
    assert np.all(out.samples[:, 0] == 0.0)


def test_detrend_full_window_ramp():
    ramp = np.arange(40.0)
    out = detrend(TimeSeries(ramp), 40).samples[:, 0]
    assert np.allclose(out, (ramp - ramp.mean()) / ramp.std(), atol=1e-12)


def test_detrend_removes_drift():
    t = np.arange(2000.0)
    drift = 5.0 * t / t[-1]
    x = np.sin(TWO_PI * t / 40) + drift
    out = detrend(TimeSeries(x), 80).samples[:, 0]
    # compare the slow component before and after via long block means
    slow_in = np.ptp(x.reshape(20, 100).mean(axis=1))
    slow_out = np.ptp(out.reshape(20, 100).mean(axis=1))
    assert slow_out * 10 <= slow_in


def test_detrend_window_bounds():
    with pytest.raises(ValueError):
        detrend(TimeSeries(np.zeros(5)), 6)


def test_delay_embed_shapes():
    x = np.random.default_rng(0).random((960, 2))
    assert np.array_equal(delay_embed(TimeSeries(x), 0, 5), x)
    assert delay_embed(TimeSeries(x), 1, 1).shape == (959, 4)
    out = delay_embed(TimeSeries(x), 4, 20)
    assert out.shape == (880, 10)
    # consecutive rows overlap in N * d coordinates after a tau shift
    assert np.array_equal(out[0, 2:], out[20, :-2])
    with pytest.raises(ValueError):
        delay_embed(TimeSeries(x[:80]), 4, 20)


def test_pca_full_dim_preserves_distances():
    x = np.random.default_rng(1).random((40, 4))
    p = pca_reduce(x, 4)
    assert np.allclose(pdist(p.points), pdist(x), atol=1e-9)
    assert not p.padded


def test_pca_planar_in_5d():
    rng = np.random.default_rng(2)
    plane = rng.random((30, 2))
    basis = np.linalg.qr(rng.standard_normal((5, 5)))[0][:, :2]
    x = plane @ basis.T + 3.0
    p = pca_reduce(x, 2)
    assert np.allclose(pdist(p.points), pdist(plane), atol=1e-9)
    padded = pca_reduce(x, 4)
    assert padded.padded and padded.rank == 2 and np.all(padded.points[:, 2:] == 0)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_pca_diagonal_covariance(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((60, 6)) @ rng.standard_normal((6, 6))
    p = pca_reduce(x, 5)
    cov = np.cov(p.points, rowvar=False)
    assert np.allclose(cov - np.diag(np.diag(cov)), 0, atol=1e-9 * max(1, np.abs(cov).max()))
    assert np.all(np.diff(np.diag(cov)) <= 1e-9)
    assert np.allclose(np.diag(cov), p.explained_variance, rtol=1e-9)
    # sign convention
    rows = np.arange(5)
    assert np.all(p.components[rows, np.argmax(np.abs(p.components), axis=1)] > 0)


def test_pca_on_embedded_series_matches_eigendecomposition():
    ts, _ = gen_limit_cycle_series(seed=0)
    cloud = delay_embed(detrend(ts, 120), 4, 20)
    p = pca_reduce(cloud, 5)
    eig = np.sort(np.linalg.eigvalsh(np.cov(cloud, rowvar=False)))[::-1][:5]
    assert np.allclose(p.explained_variance, eig, rtol=1e-9)
    ratios = p.explained_variance / p.explained_variance.sum()
    assert np.all(np.diff(ratios) <= 0)


def test_limit_cycle_series():
    ts, phase = gen_limit_cycle_series(T=960, seed=3)
    assert ts.samples.shape == (960, 2) and ts.channels == ["AVA", "AVB"] and ts.rate == 4.0
    assert phase.shape == (960,) and np.all((phase >= 0) & (phase < TWO_PI))


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries(np.zeros((1, 2)))
    with pytest.raises(ValueError):
        TimeSeries(np.array([0.0, np.inf]))
