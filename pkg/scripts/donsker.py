"""Scalar product (1 + lam v_n) with lam = 1/sqrt(n): log|X_n| against N(-1/2, 1)."""
import argparse

import numpy as np
import scipy.stats

from artifact.models import BlockSpectrum, NoiseModel
from artifact.product import run_product


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args(argv)

    sp = BlockSpectrum(np.zeros((0, 0)), np.eye(1), np.zeros((0, 0)))
    traj = run_product(sp, NoiseModel.real_gaussian(1), 1 / np.sqrt(args.n), args.n,
                       seed=np.arange(args.replicas) + args.seed, retain=2)
    logx = np.log(np.abs(traj.final_X[:, 0, 0]))
    ks = scipy.stats.kstest(logx, "norm", args=(-0.5, 1.0)).statistic
    print(f"mean {logx.mean():.4f}  var {logx.var(ddof=1):.4f}  ks {ks:.4f}")


if __name__ == "__main__":
    main()
