"""Uncorrected vs corrected coordinates on unbalanced circles or ellipses.

    python3 scripts/unbalanced_circle.py --replicates 20 --generator ellipse
"""

import argparse
import json

import numpy as np

from circlecoords.config import PipelineConfig
from circlecoords.pipeline import mi_compare


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--generator", choices=["circle", "ellipse"], default="circle")
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--out", default="out/unbalanced")
    args = ap.parse_args()
    cfg = PipelineConfig.from_dict({"input": {"generator": args.generator}, "output_dir": args.out})
    res = mi_compare(cfg, replicates=args.replicates)
    ok = [r for r in res.records if r.error is None]
    better = sum(r.rmse_corrected < r.rmse_uncorrected for r in ok)
    print(res.to_csv())
    print(json.dumps({**res.summary(), "rmse_corrected_lower": better,
                      "median_rmse_uncorrected": float(np.median([r.rmse_uncorrected for r in ok])),
                      "median_rmse_corrected": float(np.median([r.rmse_corrected for r in ok]))}, indent=2))


if __name__ == "__main__":
    main()
