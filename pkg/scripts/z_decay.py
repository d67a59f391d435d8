"""Decay of ||Z_n|| for a d = (1, 1, 1) block model: transient rate and noise floor."""
import argparse

import numpy as np

from artifact.models import BlockSpectrum, NoiseModel
from artifact.product import run_product


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gamma", type=float, default=0.3)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--replicas", type=int, default=200)
    args = p.parse_args(argv)

    g = args.gamma
    sp = BlockSpectrum(np.array([[np.exp(-g)]]), np.array([[np.exp(1j)]]), np.array([[np.exp(-g)]]))
    X0 = np.eye(3)
    X0[:2, 2] = 1.0
    traj = run_product(sp, NoiseModel.complex_gaussian(3), args.lam, args.steps, X0,
                       seed=np.arange(args.replicas) + 1, retain=2, record_znorm=True)
    m = traj.znorm.mean(axis=1)
    floor = np.median(traj.znorm[args.steps // 10:])
    idx = np.flatnonzero(m[:201] > 3 * floor)
    rate = -np.polyfit(idx, np.log(m[idx]), 1)[0]
    print(f"transient rate {rate:.4f} (gamma = {g}, gamma/2 = {g / 2})")
    print(f"floor {floor:.4g}  lam^0.75 = {args.lam ** 0.75:.4g}  late max {traj.znorm[200:].max():.4g}")
    for n in (0, 5, 10, 20, 40, 80, 200, 1000):
        if n <= args.steps:
            print(f"n={n:>5}  mean ||Z|| {m[n]:.4e}")


if __name__ == "__main__":
    main()
