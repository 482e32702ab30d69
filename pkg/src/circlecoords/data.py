"""Synthetic benchmark clouds and time-series preprocessing."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .circular import TWO_PI, wrap
from .density import as_cloud

STD_FLOOR = 1e-8


@dataclass
class SyntheticSample:
    cloud: np.ndarray
    true_parameter: np.ndarray
    generator_params: dict
    seed: int


@dataclass
class TimeSeries:
    samples: np.ndarray  # (T, N), rows are frames
    rate: float = 1.0
    channels: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim == 1:
            self.samples = self.samples[:, None]
        if self.samples.shape[0] < 2:
            raise ValueError("a time series needs at least two frames")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("time series contains non-finite values")
        if not self.rate > 0:
            raise ValueError("rate must be positive")


@dataclass
class PCAProjection:
    points: np.ndarray
    explained_variance: np.ndarray
    components: np.ndarray
    rank: int
    padded: bool


def sample_von_mises(rng: np.random.Generator, mu: float, kappa: float, size: int) -> np.ndarray:
    """Best-Fisher rejection sampler; angles in [0, 2 pi)."""
    if kappa < 0:
        raise ValueError("dispersion must be non-negative")
    if kappa < 1e-8:
        return wrap(mu + rng.uniform(-np.pi, np.pi, size))
    tau = 1.0 + np.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - np.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    out = np.empty(size)
    filled = 0
    while filled < size:
        m = max(2 * (size - filled), 16)
        u1, u2, u3 = rng.random(m), rng.random(m), rng.random(m)
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = (c * (2.0 - c) - u2 > 0) | (np.log(c / u2) + 1.0 - c >= 0)
        theta = np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1.0, 1.0))
        take = min(theta.size, size - filled)
        out[filled:filled + take] = theta[:take]
        filled += take
    return wrap(mu + out)


def gen_unbalanced_circle(n: int = 1000, dispersion: float = 1.3, radius_mean: float = 1.0,
                          radius_sd: float = 0.1, seed: int = 0) -> SyntheticSample:
    if n < 1 or radius_sd < 0:
        raise ValueError("need n >= 1 and radius_sd >= 0")
    rng = np.random.default_rng(seed)
    theta = sample_von_mises(rng, 0.0, dispersion, n)
    radius = rng.normal(radius_mean, radius_sd, n) if radius_sd > 0 else np.full(n, float(radius_mean))
    cloud = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    params = dict(n=n, dispersion=dispersion, radius_mean=radius_mean, radius_sd=radius_sd)
    return SyntheticSample(cloud=cloud, true_parameter=theta, generator_params=params, seed=seed)


def ellipse_arc_fraction(theta, dilation: float) -> np.ndarray:
    """Arc length of (dilation cos t, sin t) from t = 0 to theta, scaled to [0, 2 pi)."""
    def speed(t):
        return np.hypot(dilation * np.sin(t), np.cos(t))

    def arc(t):
        return quad(speed, 0.0, t, epsabs=1e-10, epsrel=1e-10, limit=200)[0]

    perimeter = arc(TWO_PI)
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.array([arc(t) for t in wrap(theta)]) * (TWO_PI / perimeter)
    return np.where(out >= TWO_PI, 0.0, out)


def gen_unbalanced_ellipse(n: int = 1000, dispersion: float = 1.3, radius_mean: float = 1.0,
                           radius_sd: float = 0.1, dilation: float = 1.6, seed: int = 0) -> SyntheticSample:
    if not dilation > 0:
        raise ValueError("dilation must be positive")
    base = gen_unbalanced_circle(n, dispersion, radius_mean, radius_sd, seed)
    cloud = base.cloud * np.array([dilation, 1.0])
    truth = base.true_parameter if dilation == 1.0 else ellipse_arc_fraction(base.true_parameter, dilation)
    params = dict(base.generator_params, dilation=dilation)
    return SyntheticSample(cloud=cloud, true_parameter=truth, generator_params=params, seed=seed)


def gen_limit_cycle_series(T: int = 960, rate: float = 4.0, period: float = 80.0, skew: float = 0.6,
                           noise: float = 0.1, drift: float = 1.0, seed: int = 0):
    """Two noisy sinusoids sharing a phase that advances unevenly, plus slow drift.

    Returns (TimeSeries, true_phase).  ``skew`` in [0, 1) sets how much the
    phase speed varies over a cycle; the slow part of the cycle is sampled
    more densely, which is what the density correction targets.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(T, dtype=float)
    omega = TWO_PI / period
    start = rng.uniform(0, TWO_PI)
    phase = omega * t - skew * np.sin(omega * t) + start
    trend = drift * np.column_stack([t / T, np.sin(np.pi * t / T)])
    signal = np.column_stack([np.cos(phase), np.sin(phase)])
    samples = signal + trend + noise * rng.standard_normal((T, 2))
    return TimeSeries(samples=samples, rate=rate, channels=["AVA", "AVB"]), wrap(phase)


def detrend(ts: TimeSeries, window: int = 120) -> TimeSeries:
    """Remove a moving mean and divide by a moving standard deviation, per column.

    Every frame uses a window of exactly ``window`` frames, centred where
    possible and slid inwards at the ends of the recording (no padding).
    """
    x = ts.samples
    T = x.shape[0]
    if not 1 <= window <= T:
        raise ValueError(f"window must lie in [1, {T}]")
    start = np.clip(np.arange(T) - window // 2, 0, T - window)
    stop = start + window
    centred = x - x.mean(axis=0)
    c1 = np.vstack([np.zeros((1, x.shape[1])), np.cumsum(centred, axis=0)])
    c2 = np.vstack([np.zeros((1, x.shape[1])), np.cumsum(centred * centred, axis=0)])
    mean = (c1[stop] - c1[start]) / window
    var = (c2[stop] - c2[start]) / window - mean * mean
    std = np.maximum(np.sqrt(np.maximum(var, 0.0)), STD_FLOOR)
    out = (centred - mean) / std
    return TimeSeries(samples=out, rate=ts.rate, channels=list(ts.channels))


def delay_embed(ts, d: int = 4, tau: int = 20) -> np.ndarray:
    """Rows (f(t), f(t + tau), ..., f(t + d tau)) for t = 0 .. T - d tau - 1."""
    x = ts.samples if isinstance(ts, TimeSeries) else np.atleast_2d(np.asarray(ts, dtype=float))
    T = x.shape[0]
    if d < 0 or tau < 1:
        raise ValueError("need d >= 0 and tau >= 1")
    if T <= d * tau:
        raise ValueError(f"series of length {T} too short for d={d}, tau={tau}")
    m = T - d * tau
    return np.hstack([x[j * tau:j * tau + m] for j in range(d + 1)])


def pca_reduce(cloud, out_dim: int = 5) -> PCAProjection:
    cloud = as_cloud(cloud)
    n, dim = cloud.shape
    if not 1 <= out_dim <= dim:
        raise ValueError(f"out_dim must lie in [1, {dim}]")
    centred = cloud - cloud.mean(axis=0)
    _, s, vt = np.linalg.svd(centred, full_matrices=False)
    tol = s.max(initial=0.0) * max(n, dim) * np.finfo(float).eps
    rank = int(np.count_nonzero(s > tol))
    # sign convention: largest-magnitude loading of each direction is positive
    pivots = np.argmax(np.abs(vt), axis=1)
    vt = vt * np.sign(vt[np.arange(vt.shape[0]), pivots])[:, None]
    keep = min(out_dim, rank)
    points = np.zeros((n, out_dim))
    points[:, :keep] = centred @ vt[:keep].T
    variance = np.zeros(out_dim)
    variance[:keep] = s[:keep] ** 2 / max(n - 1, 1)
    components = np.zeros((out_dim, dim))
    components[:keep] = vt[:keep]
    return PCAProjection(points=points, explained_variance=variance, components=components,
                         rank=rank, padded=out_dim > rank)
