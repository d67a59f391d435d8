"""Three routes to the eigenvalue lattice of a single elliptic channel without noise.

The strip at zero coupling, the zeros of the limit boundary determinant and the
discretized first-order operator all give points at sqrt(3) pi k.
"""
import numpy as np

from artifact.models import StripModel, decompose_channels
from artifact.spectra import operator_oracle, sde_eigenvalue_process, strip_eigenvalues


def main():
    ch = decompose_channels(StripModel(np.array([[0.0]]), E=1.0))
    s = np.sqrt(3) * np.pi
    strip = strip_eigenvalues(ch.strip, 0.0, 2000, 30.0, seed=0)
    sde = sde_eigenvalue_process(ch, 0.0, [1.0], np.linspace(-20, 20, 801), dt=1e-3)
    op = operator_oracle(ch, 0.0, [1.0], 2000, window=(-20, 20))
    print(f"target spacing {s:.6f}")
    print(f"strip     mean spacing {np.diff(strip.points).mean():.6f}")
    print(f"sde       zeros / spacing {np.round(sde.points / s, 8)}")
    print(f"operator  eigenvalues / spacing {np.round(op / s, 5)}")


if __name__ == "__main__":
    main()
