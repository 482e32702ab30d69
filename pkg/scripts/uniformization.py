"""Chi-square uniformity of subsample angles, per subsample and pooled."""

import argparse

import numpy as np
from scipy.stats import chisquare

from circlecoords.circular import TWO_PI
from circlecoords.data import gen_unbalanced_circle
from circlecoords.density import estimate_density, make_acceptance, rejection_sample, scott_bandwidth


def angle_counts(theta, bins=12):
    return np.bincount((theta / TWO_PI * bins).astype(int).clip(0, bins - 1), minlength=bins)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--alpha", type=float, default=0.01)
    args = ap.parse_args()
    pooled_ok = raw_rejected = 0
    single_rates = []
    for seed in range(args.seeds):
        s = gen_unbalanced_circle(seed=seed)
        acc = make_acceptance(estimate_density(s.cloud, scott_bandwidth(s.cloud, 2)), 50)
        subs = rejection_sample(s.cloud, acc, 30, seed)
        pooled_ok += chisquare(angle_counts(s.true_parameter[subs.pooled()])).pvalue >= args.alpha
        raw_rejected += chisquare(angle_counts(s.true_parameter)).pvalue < args.alpha
        single_rates.append(np.mean([chisquare(angle_counts(s.true_parameter[i])).pvalue >= args.alpha
                                     for i in subs.subsamples]))
    print(f"pooled uniform: {pooled_ok}/{args.seeds}")
    print(f"raw cloud rejected: {raw_rejected}/{args.seeds}")
    print(f"single subsamples uniform: {np.mean(single_rates):.3f}")


if __name__ == "__main__":
    main()
