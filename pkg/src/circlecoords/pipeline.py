"""End-to-end runs: single-shot and subsample-ensemble coordinates, MI comparison, timing."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import io as cio
from .alignment import AlignmentResult, align_and_average
from .circular import CircularCoordinate, HarmonicRepresentative, extend_coordinate, harmonic_smooth, to_circle
from .config import PersistenceConfig, PipelineConfig
from .data import delay_embed, detrend, gen_limit_cycle_series, gen_unbalanced_circle, gen_unbalanced_ellipse, pca_reduce
from .density import AcceptanceField, SubsampleSet, as_cloud, estimate_density, make_acceptance, rejection_sample, scott_bandwidth
from .errors import CircleCoordsError, DegenerateEnsemble, NoLoopDetected
from .evaluation import EvaluationRecord, closed_order, evaluate, winding_number
from .persistence import (BarSelection, IntegerCocycle, PersistenceBar, auto_max_scale, build_rips, choose_scale,
                          enclosing_radius, lift_cocycle, median_knn_distance, pairwise_distances,
                          persistent_cohomology_h1, select_bar)

log = logging.getLogger(__name__)


@dataclass
class LoadedInput:
    cloud: np.ndarray
    truth: np.ndarray | None
    description: str
    phase: np.ndarray | None = None  # known phase per point, used only to order the winding path


@dataclass
class CoordinateRun:
    coordinate: CircularCoordinate
    bars: list[PersistenceBar]
    selection: BarSelection
    scale: float
    max_scale: float
    cocycle: IntegerCocycle
    harmonic: HarmonicRepresentative

    @property
    def warnings(self) -> list[str]:
        return list(self.selection.warnings)


@dataclass
class EnsembleRun:
    coordinate: CircularCoordinate
    alignment: AlignmentResult
    subsamples: SubsampleSet
    acceptance: AcceptanceField
    bandwidth: float
    kernel_rate: float
    runs: list[CoordinateRun | None]
    extended: np.ndarray  # (survivors, n) angles
    warnings: list[str] = field(default_factory=list)


def load_input(cfg: PipelineConfig, seed: int | None = None) -> LoadedInput:
    inp = cfg.input
    seed = cfg.seed if seed is None else seed
    if inp.generator == "circle":
        s = gen_unbalanced_circle(inp.n, inp.dispersion, inp.radius_mean, inp.radius_sd, seed)
        return LoadedInput(s.cloud, s.true_parameter, f"unbalanced circle seed={seed}")
    if inp.generator == "ellipse":
        s = gen_unbalanced_ellipse(inp.n, inp.dispersion, inp.radius_mean, inp.radius_sd, inp.dilation, seed)
        return LoadedInput(s.cloud, s.true_parameter, f"unbalanced ellipse seed={seed}")
    if inp.generator == "limit_cycle":
        ts, phase = gen_limit_cycle_series(inp.frames, inp.rate, inp.period, inp.skew, inp.noise, seed=seed)
        cloud = preprocess_series(ts, cfg)
        return LoadedInput(cloud, None, f"limit-cycle series seed={seed}", phase=phase[:cloud.shape[0]])
    if inp.kind == "timeseries":
        ts = cio.read_time_series(inp.csv)
        return LoadedInput(preprocess_series(ts, cfg), None, f"time series {inp.csv}")
    cloud, truth = cio.read_point_cloud(inp.csv, truth_column=inp.truth_column)
    return LoadedInput(cloud, truth, f"point cloud {inp.csv}")


def preprocess_series(ts, cfg: PipelineConfig) -> np.ndarray:
    inp = cfg.input
    if inp.detrend_window:
        ts = detrend(ts, min(inp.detrend_window, ts.samples.shape[0]))
    cloud = delay_embed(ts, inp.delay_dim, inp.delay_lag)
    if inp.pca_dim and inp.pca_dim < cloud.shape[1]:
        cloud = pca_reduce(cloud, inp.pca_dim).points
    return cloud


def resolve_max_scale(dist: np.ndarray, pcfg: PersistenceConfig) -> float:
    if isinstance(pcfg.max_scale, (int, float)) and not isinstance(pcfg.max_scale, bool):
        return float(pcfg.max_scale)
    if pcfg.max_scale == "enclosing":
        top = enclosing_radius(dist)
        return min(top, pcfg.max_scale_cap) if pcfg.max_scale_cap is not None else top
    return auto_max_scale(dist, pcfg.triangle_cap, pcfg.max_scale_cap)


def single_coordinate(cloud, pcfg: PersistenceConfig | None = None) -> CoordinateRun:
    """Rips filtration, longest degree-one bar, integer lift, harmonic smoothing."""
    pcfg = pcfg or PersistenceConfig()
    n = len(cloud)
    if n < 3:
        raise NoLoopDetected(f"{n} points cannot carry a loop")
    cloud = as_cloud(cloud)
    dist = pairwise_distances(cloud)
    max_scale = resolve_max_scale(dist, pcfg)
    if not max_scale > 0:
        raise NoLoopDetected("all points coincide")
    filt = build_rips(max_scale=max_scale, dist=dist, triangle_cap=pcfg.triangle_cap)
    bars = persistent_cohomology_h1(filt, pcfg.primes[0])
    selection = select_bar(bars, cloud, small_factor=pcfg.small_factor,
                           multiplicity_fraction=pcfg.multiplicity_fraction, max_scale=filt.max_scale,
                           median_knn=median_knn_distance(cloud, 3) if bars else None)
    scale = choose_scale(selection.bar, pcfg.scale_fraction, filt.max_scale)
    cocycle = lift_cocycle(selection.bar, filt, scale, pcfg.primes)
    rep = harmonic_smooth(cocycle, vertex_count=n)
    return CoordinateRun(coordinate=to_circle(rep), bars=bars, selection=selection, scale=scale,
                         max_scale=filt.max_scale, cocycle=cocycle, harmonic=rep)


def _subsample_task(args):
    i, points, pcfg = args
    try:
        return i, single_coordinate(points, pcfg), None
    except CircleCoordsError as exc:
        return i, None, f"subsample {i} ({points.shape[0]} points): {type(exc).__name__}: {exc}"


def corrected_coordinate(cloud, cfg: PipelineConfig | None = None, seed: int | None = None) -> EnsembleRun:
    """Density-equalized subsamples, per-subsample coordinates, extension, alignment."""
    cfg = cfg or PipelineConfig()
    seed = cfg.seed if seed is None else seed
    cloud = as_cloud(cloud)
    n, ambient = cloud.shape
    s = cfg.sampling
    bandwidth = s.bandwidth or scott_bandwidth(cloud, s.intrinsic_dim or ambient)
    density = estimate_density(cloud, bandwidth)
    acceptance = make_acceptance(density, min(s.target_size, n))
    subs = rejection_sample(cloud, acceptance, s.n_subsamples, seed)

    tasks = [(i, cloud[idx], cfg.persistence) for i, idx in enumerate(subs.subsamples)]
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_subsample_task, tasks))
    else:
        outcomes = [_subsample_task(t) for t in tasks]
    outcomes.sort(key=lambda o: o[0])

    runs = [run for _, run, _ in outcomes]
    diagnostics = [msg for _, _, msg in outcomes if msg]
    for msg in diagnostics:
        log.warning("dropped %s", msg)
    survivors = [i for i, run in enumerate(runs) if run is not None]
    if len(survivors) < 2:
        raise DegenerateEnsemble(f"only {len(survivors)} of {len(runs)} subsamples produced a coordinate",
                                 diagnostics=diagnostics)

    rate = cfg.alignment.kernel_rate or 1.0 / bandwidth ** 2
    extended = []
    for i in survivors:
        local = runs[i].coordinate
        coord = CircularCoordinate(angles=local.angles, domain=subs.subsamples[i])
        extended.append(extend_coordinate(coord, cloud, rate).angles)
    extended = np.vstack(extended)
    a = cfg.alignment
    coordinate, result = align_and_average(extended, rate0=a.rate0, tol=a.tol, max_iter=a.max_iter)
    warnings = [f"dropped {msg}" for msg in diagnostics]
    if acceptance.expected_size < s.target_size - 1e-9:
        warnings.append(f"target subsample size {s.target_size} infeasible; expected size "
                        f"{acceptance.expected_size:.1f}")
    return EnsembleRun(coordinate=coordinate, alignment=result, subsamples=subs, acceptance=acceptance,
                       bandwidth=bandwidth, kernel_rate=rate, runs=runs, extended=extended, warnings=warnings)


# ---------------------------------------------------------------- reports

@dataclass
class RunReport:
    mode: str
    coordinates_path: str
    barcode_path: str
    report_path: str
    evaluation: dict | None
    wall_time: float
    warnings: list[str]
    config: dict

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def score(coord: CircularCoordinate, data: LoadedInput, k: int) -> tuple[EvaluationRecord, str]:
    """MI against the true angle when known, else against the ambient cloud."""
    if data.truth is not None:
        return evaluate(coord, data.truth, reference_metric="circular", k=k, truth=data.truth), "truth"
    rec = evaluate(coord, data.cloud, reference_metric="euclidean", k=k)
    if data.phase is not None:
        rec.winding = winding_number(coord, closed_order(data.phase))
    return rec, "ambient"


def _evaluation(coord: CircularCoordinate, data: LoadedInput, cfg: PipelineConfig) -> dict:
    rec, reference = score(coord, data, cfg.evaluation.ks[0])
    return dict(asdict(rec), reference=reference)


def _write_report(mode, coord, barcode_rows, data, cfg, wall, warnings, tag="") -> RunReport:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    coords_path = out / f"coordinates_{mode}{tag}.csv"
    barcode_path = out / f"barcode_{mode}{tag}.json"
    report_path = out / f"report_{mode}{tag}.json"
    coords_path.write_text(coord.to_csv())
    barcode_path.write_text(json.dumps(barcode_rows, indent=2))
    report = RunReport(mode=mode, coordinates_path=str(coords_path), barcode_path=str(barcode_path),
                       report_path=str(report_path), evaluation=_evaluation(coord, data, cfg),
                       wall_time=wall, warnings=list(warnings), config=cfg.to_dict())
    report_path.write_text(report.to_json())
    return report


def run_uncorrected(cfg: PipelineConfig, data: LoadedInput | None = None) -> RunReport:
    cfg.validate()
    data = data or load_input(cfg)
    start = time.perf_counter()
    run = single_coordinate(data.cloud, cfg.persistence)
    wall = time.perf_counter() - start
    bars = [b.as_dict() for b in run.bars]
    return _write_report("uncorrected", run.coordinate, bars, data, cfg, wall, run.warnings)


def run_corrected(cfg: PipelineConfig, data: LoadedInput | None = None) -> RunReport:
    cfg.validate()
    data = data or load_input(cfg)
    start = time.perf_counter()
    ens = corrected_coordinate(data.cloud, cfg)
    wall = time.perf_counter() - start
    bars = [dict(b.as_dict(), subsample=i) for i, run in enumerate(ens.runs) if run for b in run.bars]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "subsamples.json").write_text(ens.subsamples.to_json())
    (out / "alignment.json").write_text(ens.alignment.to_json())
    warnings = ens.warnings + [w for run in ens.runs if run for w in run.warnings]
    return _write_report("corrected", ens.coordinate, bars, data, cfg, wall, warnings)


# ---------------------------------------------------------------- experiments

@dataclass
class BenchResult:
    times: dict  # mode -> list of seconds
    identical_outputs: dict  # mode -> bool

    def summary(self) -> list[dict]:
        return [{"mode": m, "min": min(t), "median": statistics.median(t), "repeats": len(t)}
                for m, t in self.times.items()]

    @property
    def ratio(self) -> float:
        """min corrected time / min uncorrected time."""
        return min(self.times["corrected"]) / min(self.times["uncorrected"])

    def to_csv(self) -> str:
        lines = ["mode,repeat,seconds"]
        for m, ts in self.times.items():
            lines += [f"{m},{i},{t:.6f}" for i, t in enumerate(ts)]
        return "\n".join(lines) + "\n"


def _digest(angles) -> str:
    return hashlib.sha256(np.ascontiguousarray(angles, dtype=float).tobytes()).hexdigest()


def bench(cfg: PipelineConfig, repeats: int = 20, data: LoadedInput | None = None) -> BenchResult:
    """Wall time of both modes on identical input, ``repeats`` times each."""
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    cfg.validate()
    data = data or load_input(cfg)
    times = {"uncorrected": [], "corrected": []}
    digests = {"uncorrected": set(), "corrected": set()}
    for _ in range(repeats):
        start = time.perf_counter()
        coord = single_coordinate(data.cloud, cfg.persistence).coordinate
        times["uncorrected"].append(time.perf_counter() - start)
        digests["uncorrected"].add(_digest(coord.angles))
        start = time.perf_counter()
        coord = corrected_coordinate(data.cloud, cfg).coordinate
        times["corrected"].append(time.perf_counter() - start)
        digests["corrected"].add(_digest(coord.angles))
    return BenchResult(times=times, identical_outputs={m: len(d) == 1 for m, d in digests.items()})


@dataclass
class ReplicateRecord:
    seed: int
    mi_uncorrected: float = math.nan
    mi_corrected: float = math.nan
    rmse_uncorrected: float | None = None
    rmse_corrected: float | None = None
    winding_uncorrected: int | None = None
    winding_corrected: int | None = None
    error: str | None = None


@dataclass
class MIComparison:
    records: list[ReplicateRecord]
    k: int
    reference: str
    mean_uncorrected: float
    mean_corrected: float
    t_statistic: float
    p_value: float

    def to_csv(self) -> str:
        names = list(asdict(self.records[0]).keys())
        lines = [",".join(names)]
        for r in self.records:
            lines.append(",".join("" if v is None else str(v) for v in asdict(r).values()))
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "records"}
        d["replicates"] = len(self.records)
        return d


def replicate(cfg: PipelineConfig, seed: int, k: int | None = None) -> ReplicateRecord:
    """Both coordinates for one seed, scored against truth (or the ambient cloud)."""
    k = k or cfg.evaluation.ks[0]
    data = load_input(cfg, seed)
    rec = ReplicateRecord(seed=seed)
    try:
        unc = single_coordinate(data.cloud, cfg.persistence).coordinate
        cor = corrected_coordinate(data.cloud, cfg, seed=seed).coordinate
    except CircleCoordsError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    for name, coord in (("uncorrected", unc), ("corrected", cor)):
        ev, _ = score(coord, data, k)
        setattr(rec, f"mi_{name}", ev.mi_norm)
        setattr(rec, f"rmse_{name}", ev.rmse_aligned)
        setattr(rec, f"winding_{name}", ev.winding)
    return rec


def paired_one_sided_t(corrected, uncorrected) -> tuple[float, float]:
    """t statistic and p-value for mean(corrected - uncorrected) > 0."""
    c = np.asarray(corrected, dtype=float)
    u = np.asarray(uncorrected, dtype=float)
    if c.size < 2:
        raise ValueError("the paired t-test needs at least two replicates")
    diff = c - u
    if np.all(diff == diff[0]):
        # zero spread: the statistic is undefined; report no evidence unless every pair improved
        return (math.inf, 0.0) if diff[0] > 0 else (math.nan, 1.0)
    res = stats.ttest_rel(c, u, alternative="greater")
    return float(res.statistic), float(res.pvalue)


def mi_compare(cfg: PipelineConfig, replicates: int | None = None, records=None) -> MIComparison:
    replicates = replicates or cfg.evaluation.replicates
    if replicates < 2:
        raise ValueError("mi_compare needs at least two replicates")
    k = cfg.evaluation.ks[0]
    if records is None:
        records = [replicate(cfg, cfg.seed + r, k) for r in range(replicates)]
    ok = [r for r in records if r.error is None]
    if len(ok) < 2:
        raise DegenerateEnsemble("fewer than two replicates completed",
                                 diagnostics=[r.error for r in records if r.error])
    c = [r.mi_corrected for r in ok]
    u = [r.mi_uncorrected for r in ok]
    t, p = paired_one_sided_t(c, u)
    reference = "truth" if cfg.input.generator in ("circle", "ellipse") or cfg.input.truth_column else "ambient"
    return MIComparison(records=list(records), k=k, reference=reference, mean_uncorrected=float(np.mean(u)),
                        mean_corrected=float(np.mean(c)), t_statistic=t, p_value=p)
