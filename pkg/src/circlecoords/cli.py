"""Command-line entry point: synth, coords, coords-corrected, eval-mi, bench."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as cio
from .config import PipelineConfig
from .data import gen_limit_cycle_series, gen_unbalanced_circle, gen_unbalanced_ellipse
from .errors import CircleCoordsError, DegenerateEnsemble
from .pipeline import bench, mi_compare, run_corrected, run_uncorrected

log = logging.getLogger("circlecoords")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if args.config else PipelineConfig()
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.out is not None:
        overrides.append(f"output_dir={args.out}")
    return cfg.override(overrides) if overrides else cfg.validate()


def _synth(cfg: PipelineConfig, args) -> dict:
    inp = cfg.input
    out = Path(cfg.output_dir)
    if inp.generator == "limit_cycle":
        ts, phase = gen_limit_cycle_series(inp.frames, inp.rate, inp.period, inp.skew, inp.noise, seed=cfg.seed)
        lines = [",".join(ts.channels)] + [",".join(repr(float(v)) for v in row) for row in ts.samples]
        series = cio.write_text(out / "series.csv", "\n".join(lines) + "\n")
        truth = cio.write_text(out / "true_phase.csv",
                               "true_phase\n" + "".join(f"{float(p)!r}\n" for p in phase))
        return {"series": str(series), "true_phase": str(truth)}
    if inp.generator == "ellipse":
        sample = gen_unbalanced_ellipse(inp.n, inp.dispersion, inp.radius_mean, inp.radius_sd, inp.dilation,
                                        cfg.seed)
    elif inp.generator == "circle":
        sample = gen_unbalanced_circle(inp.n, inp.dispersion, inp.radius_mean, inp.radius_sd, cfg.seed)
    else:
        raise CircleCoordsError("synth needs input.generator to be set")
    path = cio.write_text(out / f"{inp.generator}.csv", cio.synthetic_csv(sample))
    return {"cloud": str(path)}


def _eval_mi(cfg: PipelineConfig, args) -> dict:
    result = mi_compare(cfg, args.replicates)
    table = cio.write_text(Path(cfg.output_dir) / "mi_compare.csv", result.to_csv())
    summary = dict(result.summary(), table=str(table))
    cio.write_text(Path(cfg.output_dir) / "mi_compare.json", json.dumps(summary, indent=2))
    return summary


def _bench(cfg: PipelineConfig, args) -> dict:
    result = bench(cfg, args.repeats)
    table = cio.write_text(Path(cfg.output_dir) / "timing.csv", result.to_csv())
    return {"summary": result.summary(), "ratio_of_minima": result.ratio,
            "identical_outputs": result.identical_outputs, "table": str(table)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circlecoords", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)
    verbs = {
        "synth": "write a synthetic benchmark to CSV",
        "coords": "single-shot coordinate on the full cloud",
        "coords-corrected": "density-corrected ensemble coordinate",
        "eval-mi": "normalized MI of both modes over seeded replicates",
        "bench": "wall time of both modes",
    }
    for name, text in verbs.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key, e.g. sampling.n_subsamples=20")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        if name == "eval-mi":
            p.add_argument("--replicates", type=int)
        if name == "bench":
            p.add_argument("--repeats", type=int, default=20)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if args.verb == "synth":
            result = _synth(cfg, args)
        elif args.verb == "coords":
            result = json.loads(run_uncorrected(cfg).to_json())
        elif args.verb == "coords-corrected":
            result = json.loads(run_corrected(cfg).to_json())
        elif args.verb == "eval-mi":
            result = _eval_mi(cfg, args)
        else:
            result = _bench(cfg, args)
    except DegenerateEnsemble as exc:
        print(f"error: {exc}", file=sys.stderr)
        for line in exc.diagnostics:
            print(f"  {line}", file=sys.stderr)
        return exc.exit_code
    except CircleCoordsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(result, indent=2, default=_json_default))
    return 0


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(type(obj).__name__)


if __name__ == "__main__":
    sys.exit(main())
