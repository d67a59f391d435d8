"""Largest principal angle to the stable flag under noise, as a function of lambda."""
import argparse

import numpy as np

from artifact.models import NoiseModel
from artifact.product import FlagSpectrum, flag_angles, propagate_flag


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--values", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--lams", type=float, nargs="+", default=[0.0, 0.001, 0.003, 0.01, 0.03])
    args = p.parse_args(argv)

    sp = FlagSpectrum.diagonal(args.values)
    d = sp.dim
    noise = NoiseModel.real_gaussian(d)
    for lam in args.lams:
        a = np.array([flag_angles(propagate_flag(sp, noise, lam, np.triu(np.ones((d, d))), args.steps,
                                                 seed=s).F).max() for s in range(args.seeds)])
        ratio = a.mean() / lam if lam else float("nan")
        print(f"lam={lam:<7g} median {np.median(a):.3e}  max {a.max():.3e}  mean/lam {ratio:.3f}")


if __name__ == "__main__":
    main()
