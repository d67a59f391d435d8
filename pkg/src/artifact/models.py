"""Model objects: block spectra, i.i.d. noise, Anderson strips and band-edge models.

Conventions
-----------
A noiseless matrix is stored in block form ``diag(Gamma0, U, inv(Gamma2))``
with ``Gamma0`` and ``Gamma2`` strict contractions and ``U`` unitary.  Noise
matrices are linear combinations ``sum_m xi_m B_m`` of a fixed complex basis
with i.i.d. real unit-variance coefficients, which covers every Gaussian law
and the usual diagonal-potential models while keeping second moments exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Optional

import numpy as np

from .errors import NoEllipticChannel, ParabolicChannel, ValidationError

DISTRIBUTIONS = ("gaussian", "rademacher", "uniform")
_BLOCK = 256


def _as_square(M, name):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.size == 0:
        return np.zeros((0, 0), dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {M.shape}")
    return M


def spectral_radius(M):
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def opnorm(M):
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def draw_coefficients(rng, distribution, size):
    """Real i.i.d. draws with mean 0 and variance 1."""
    if distribution == "gaussian":
        return rng.standard_normal(size)
    if distribution == "rademacher":
        return 2.0 * rng.integers(0, 2, size=size) - 1.0
    if distribution == "uniform":
        return rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), size=size)
    raise ValidationError(f"unknown distribution {distribution!r}")


# ---------------------------------------------------------------------------
# block spectra


@dataclass(frozen=True)
class BlockSpectrum:
    """Noiseless matrix ``T0 = diag(Gamma0, U, inv(Gamma2))``."""

    Gamma0: np.ndarray
    U: np.ndarray
    Gamma2: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        G0 = _as_square(self.Gamma0, "Gamma0")
        U = _as_square(self.U, "U")
        G2 = _as_square(self.Gamma2, "Gamma2")
        object.__setattr__(self, "Gamma0", G0)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "Gamma2", G2)
        if spectral_radius(G0) >= 1 - self.tol or spectral_radius(G2) >= 1 - self.tol:
            raise ValidationError("Gamma0 and Gamma2 must have spectral radius < 1")
        if U.size and np.linalg.norm(U.conj().T @ U - np.eye(len(U))) > self.tol:
            raise ValidationError("U is not unitary")
        if G2.size and np.linalg.cond(G2) > 1e12:
            raise ValidationError("Gamma2 must be invertible")
        if not self.gamma > 0:
            raise ValidationError(
                "operator norms of Gamma0, Gamma2 must be < 1; change basis to "
                "shrink Jordan off-diagonals before building the spectrum"
            )

    @property
    def d0(self):
        return self.Gamma0.shape[0]

    @property
    def d1(self):
        return self.U.shape[0]

    @property
    def d2(self):
        return self.Gamma2.shape[0]

    @property
    def dim(self):
        return self.d0 + self.d1 + self.d2

    @property
    def gamma(self):
        """Largest rate with ||Gamma0||, ||Gamma2|| <= exp(-gamma)."""
        norm = max(opnorm(self.Gamma0), opnorm(self.Gamma2))
        if norm == 0.0:
            return np.inf
        return -np.log(norm)

    @cached_property
    def frame(self):
        """Eigen-decomposition ``U = P diag(exp(i phi)) P*`` used for exact powers."""
        if self.d1 == 0:
            return np.zeros(0), np.zeros((0, 0), dtype=complex)
        if np.allclose(self.U, np.diag(np.diag(self.U)), atol=0):
            return np.angle(np.diag(self.U)), np.eye(self.d1, dtype=complex)
        w, P = np.linalg.eig(self.U)
        # U is normal; orthonormalize eigenvectors within degenerate groups
        P, _ = np.linalg.qr(P)
        w = np.diag(P.conj().T @ self.U @ P)
        return np.angle(w), P

    def T0(self):
        d0, d1, d2 = self.d0, self.d1, self.d2
        T = np.zeros((self.dim, self.dim), dtype=complex)
        T[:d0, :d0] = self.Gamma0
        T[d0:d0 + d1, d0:d0 + d1] = self.U
        if d2:
            T[d0 + d1:, d0 + d1:] = np.linalg.inv(self.Gamma2)
        return T

    def S(self):
        """Noiseless step ``diag(Gamma0, 1)`` in the rotating frame."""
        p = self.d0 + self.d1
        S = np.eye(p, dtype=complex)
        S[:self.d0, :self.d0] = self.Gamma0
        return S


# ---------------------------------------------------------------------------
# noise


@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. matrices ``V = sum_m xi_m basis[m]`` plus a deterministic ``W``.

    Samples are a pure function of ``(seed, n)``: index ``n >= 1`` lives in a
    block of ``block`` consecutive draws generated from ``(seed, block index)``.
    """

    basis: np.ndarray
    W: Optional[np.ndarray] = None
    distribution: str = "gaussian"
    clip_bound: Optional[float] = None
    block: int = _BLOCK

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex)
        if B.ndim != 3 or B.shape[1] != B.shape[2]:
            raise ValidationError("basis must have shape (m, d, d)")
        object.__setattr__(self, "basis", B)
        d = B.shape[1]
        W = np.zeros((d, d), complex) if self.W is None else np.asarray(self.W, dtype=complex)
        if W.shape != (d, d):
            raise ValidationError("W must be d x d")
        object.__setattr__(self, "W", W)
        if self.distribution not in DISTRIBUTIONS:
            raise ValidationError(f"unknown distribution {self.distribution!r}")
        if self.clip_bound is not None and not self.clip_bound > 0:
            raise ValidationError("clip_bound must be positive")

    @property
    def dim(self):
        return self.basis.shape[1]

    # constructors
    @classmethod
    def real_gaussian(cls, d, scale=1.0, W=None, **kw):
        """Independent real N(0, scale^2) entries."""
        basis = np.zeros((d * d, d, d), dtype=complex)
        for k in range(d * d):
            basis[k, k // d, k % d] = scale
        return cls(basis, W=W, **kw)

    @classmethod
    def complex_gaussian(cls, d, scale=1.0, W=None, **kw):
        """Independent circular complex entries with E|V_ij|^2 = scale^2."""
        re = cls.real_gaussian(d, scale / np.sqrt(2)).basis
        return cls(np.concatenate([re, 1j * re]), W=W, **kw)

    @classmethod
    def from_moments(cls, M2, M2c, W=None, **kw):
        """Gaussian noise with prescribed second-moment tensors."""
        from .sdelimit import ComplexGaussianSpec

        d = M2.shape[0]
        spec = ComplexGaussianSpec.from_tensors(M2, M2c)
        m = d * d
        L = spec.chol
        basis = (L[:m] + 1j * L[m:]).T.reshape(-1, d, d)
        return cls(basis, W=W, **kw)

    # moments
    @cached_property
    def M2(self):
        """``M2[i,j,k,l] = E(V_ij V_kl)``."""
        B = self.basis
        return np.einsum("mij,mkl->ijkl", B, B)

    @cached_property
    def M2c(self):
        """``M2c[i,j,k,l] = E(conj(V_ij) V_kl)``."""
        B = self.basis
        return np.einsum("mij,mkl->ijkl", B.conj(), B)

    # sampling
    def sample_block(self, seed, b):
        rng = np.random.default_rng([int(seed) & (2**64 - 1), int(b)])
        xi = draw_coefficients(rng, self.distribution, (self.block, len(self.basis)))
        return np.tensordot(xi, self.basis, axes=(1, 0))

    def samples(self, seed, start, count):
        """Draws with indices ``start, ..., start + count - 1`` (``start >= 1``)."""
        if start < 1:
            raise ValueError("noise indices start at 1")
        out = np.empty((count, self.dim, self.dim), dtype=complex)
        first = (start - 1) // self.block
        last = (start + count - 2) // self.block
        pos = 0
        for b in range(first, last + 1):
            blk = self.sample_block(seed, b)
            lo = max(start - 1 - b * self.block, 0)
            hi = min(start - 1 + count - b * self.block, self.block)
            out[pos:pos + hi - lo] = blk[lo:hi]
            pos += hi - lo
        return out

    def sample(self, seed, n):
        return self.samples(seed, n, 1)[0]

    def check_moments(self, seed=0, n_samples=100_000):
        """Empirical moment diagnostics, as z-scores against the declared tensors."""
        V = self.samples(seed, 1, n_samples).reshape(n_samples, -1)
        sd = V.std(axis=0)
        mean_ratio = np.abs(V.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
        out = {"mean_over_sd": float(mean_ratio.max())}
        for name, lhs, target in (
            ("M2", V, self.M2),
            ("M2c", V.conj(), self.M2c),
        ):
            prod = lhs[:, :, None] * V[:, None, :]
            est = prod.mean(axis=0)
            se = prod.std(axis=0) / np.sqrt(n_samples)
            t = target.reshape(est.shape)
            z = np.abs(est - t) / np.maximum(se, 1e-300)
            z[(se == 0) & (np.abs(est - t) < 1e-12)] = 0.0
            out[name + "_max_z"] = float(z.max())
        d2 = self.dim**2
        out["M2c_min_eig"] = float(np.linalg.eigvalsh(self.M2c.reshape(d2, d2)).min())
        return out


# ---------------------------------------------------------------------------
# strips


def zd_basis(d):
    """Orthogonal sine basis diagonalizing the path adjacency matrix Z_d."""
    j = np.arange(1, d + 1)
    return np.sqrt(2.0 / (d + 1)) * np.sin(np.pi * np.outer(j, j) / (d + 1))


def zd_eigenvalues(d, r=1.0):
    j = np.arange(1, d + 1)
    return 2.0 * r * np.cos(np.pi * j / (d + 1))


@dataclass(frozen=True)
class StripModel:
    """Block-tridiagonal strip Hamiltonian ``psi_{k+1} + psi_{k-1} + (A + lam V_k) psi_k``."""

    A: np.ndarray
    E: float = 0.0
    potential: str = "gaussian"
    variance: float = 1.0
    r: Optional[float] = None
    eig: Optional[tuple] = field(default=None, repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        if A.shape[0] != A.shape[1]:
            raise ValidationError("A must be square")
        if np.linalg.norm(A - A.conj().T) > 1e-12:
            raise ValidationError("A must be Hermitian")
        if not np.iscomplexobj(A) or np.allclose(A.imag, 0):
            A = A.real.astype(float)
        object.__setattr__(self, "A", A)
        if self.potential not in DISTRIBUTIONS:
            raise ValidationError(f"unknown potential {self.potential!r}")
        if not self.variance > 0:
            raise ValidationError("potential variance must be positive")

    @classmethod
    def zd(cls, d, r=1.0, E=0.0, potential="gaussian"):
        """Strip with ``A = r Z_d``, Z_d the adjacency matrix of a path."""
        A = r * (np.eye(d, k=1) + np.eye(d, k=-1))
        return cls(A, E=E, potential=potential, r=r, eig=(zd_eigenvalues(d, r), zd_basis(d)))

    @property
    def d(self):
        return self.A.shape[0]

    def eigensystem(self):
        """Eigenvalues ``a`` and eigenvector columns ``O`` with ``A = O diag(a) O*``."""
        if self.eig is not None:
            return self.eig
        if np.count_nonzero(self.A - np.diag(np.diag(self.A))) == 0:
            return np.diag(self.A).real.copy(), np.eye(self.d)
        return np.linalg.eigh(self.A)

    def sample_potential(self, seed, n):
        """Diagonal entries of ``V_1..V_n`` as an ``(n, d)`` real array."""
        rng = np.random.default_rng([int(seed) & (2**64 - 1), 0x5712])
        return np.sqrt(self.variance) * draw_coefficients(rng, self.potential, (n, self.d))


def build_transfer(strip, E, lam, v):
    """Transfer matrix ``[[E - A - lam v, -I], [I, 0]]``; ``v`` diagonal entries or matrix."""
    d = strip.d
    v = np.asarray(v, dtype=float)
    V = np.diag(v) if v.ndim == 1 else v
    T = np.zeros((2 * d, 2 * d), dtype=complex)
    T[:d, :d] = E * np.eye(d) - strip.A - lam * V
    T[:d, d:] = -np.eye(d)
    T[d:, :d] = np.eye(d)
    return T


def symplectic_form(d):
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = np.eye(d)
    J[d:, :d] = -np.eye(d)
    return J


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class ChannelData:
    strip: StripModel
    E: float
    d_h: int
    d_e: int
    a: np.ndarray
    O: np.ndarray
    order: np.ndarray
    gamma_list: np.ndarray
    z_list: np.ndarray
    Qmat: np.ndarray
    Qinv: np.ndarray
    Qdrift: np.ndarray
    chaotic: bool
    chaos_witness: Optional[tuple]

    @property
    def d(self):
        return self.d_h + self.d_e

    @property
    def Gamma(self):
        return np.diag(self.gamma_list).astype(complex)

    @property
    def Z(self):
        return np.diag(self.z_list)

    @property
    def U(self):
        return np.diag(np.concatenate([self.z_list.conj(), self.z_list]))

    @property
    def S_Gamma(self):
        g = self.gamma_list
        return np.diag(1.0 / (1.0 / g - g)) if len(g) else np.zeros((0, 0))

    @property
    def S_Z(self):
        z = self.z_list
        return np.diag(1.0 / (z.conj() - z))

    @property
    def Smat(self):
        s = 1.0 / (self.z_list.conj() - self.z_list)
        return np.diag(np.concatenate([s, s]))

    @property
    def q(self):
        """Scalar drift when ``Qdrift`` is a multiple of the identity, else None."""
        Q = self.Qdrift
        q0 = Q[0, 0].real if len(Q) else 0.0
        if np.allclose(Q, q0 * np.eye(len(Q)), atol=1e-12):
            return float(q0)
        return None

    def T_star(self):
        """Noiseless transfer matrix in the channel basis."""
        d = self.d
        T = np.zeros((2 * d, 2 * d), dtype=complex)
        T[:d, :d] = np.diag(self.E - self.a)
        T[:d, d:] = -np.eye(d)
        T[d:, :d] = np.eye(d)
        return T

    def diagonal(self):
        g = self.gamma_list
        z = self.z_list
        with np.errstate(divide="ignore"):
            return np.concatenate([g, z.conj(), z, 1.0 / g]).astype(complex)

    def rotate_potential(self, v):
        """Diagonal site potential ``v`` expressed in the sorted channel basis."""
        O = self.O
        return O.conj().T @ (np.asarray(v)[:, None] * O)

    def spectrum(self):
        """Block form ``(Gamma, diag(conj Z, Z), Gamma)`` of the conjugated transfer matrix."""
        return BlockSpectrum(self.Gamma, self.U, self.Gamma)

    def site_blocks(self):
        """``P_m = O* e_m e_m^T O`` for every site ``m`` (shape ``(d, d, d)``)."""
        O = self.O
        return np.einsum("mi,mj->mij", O.conj(), O)


def _hyperbolic_root(c):
    big = 0.5 * (c + np.sign(c) * np.sqrt(c * c - 4.0))
    return 1.0 / big


def _elliptic_root(c):
    return complex(0.5 * c, np.sqrt(1.0 - 0.25 * c * c))


def _qmat(g, z):
    dh, de = len(g), len(z)
    d = dh + de
    h1, e1, e2, h2 = (slice(0, dh), slice(dh, d), slice(d, d + de), slice(d + de, 2 * d))
    rh, re_, rh2, re2 = (slice(0, dh), slice(dh, d), slice(d, d + dh), slice(d + dh, 2 * d))
    G, Gi = np.diag(g), np.diag(1.0 / g) if dh else np.zeros((0, 0))
    Z = np.diag(z)
    Q = np.zeros((2 * d, 2 * d), dtype=complex)
    Q[rh, h1] = G
    Q[rh, h2] = Gi
    Q[re_, e1] = Z.conj()
    Q[re_, e2] = Z
    Q[rh2, h1] = np.eye(dh)
    Q[rh2, h2] = np.eye(dh)
    Q[re2, e1] = np.eye(de)
    Q[re2, e2] = np.eye(de)
    # closed-form inverse: scaling diag(-S_G, S_Z, S_Z, -S_G) times a sign pattern
    K = np.zeros((2 * d, 2 * d), dtype=complex)
    K[h1, rh] = np.eye(dh)
    K[h1, rh2] = -Gi
    K[e1, re_] = np.eye(de)
    K[e1, re2] = -Z
    K[e2, re_] = -np.eye(de)
    K[e2, re2] = Z.conj()
    K[h2, rh] = -np.eye(dh)
    K[h2, rh2] = G
    sg = 1.0 / (1.0 / g - g) if dh else np.zeros(0)
    sz = 1.0 / (z.conj() - z)
    scale = np.concatenate([-sg, sz, sz, -sg])
    return Q, scale[:, None] * K


def selector(w, tol=1e-9):
    """1 where the unit-modulus number ``w`` equals 1 within ``tol``, else 0."""
    return (np.abs(np.asarray(w) - 1.0) <= tol).astype(float)


def decompose_channels(strip, E=None, tol=1e-8, require_elliptic=True):
    """Split the noiseless transfer matrix at energy ``E`` into channels."""
    E = strip.E if E is None else float(E)
    a, O = strip.eigensystem()
    c = E - np.asarray(a, dtype=float)
    if np.any(np.abs(np.abs(c) - 2.0) <= tol):
        j = int(np.argmin(np.abs(np.abs(c) - 2.0)))
        raise ParabolicChannel(f"|E - a_{j + 1}| = {abs(c[j]):.3g} is within {tol:g} of 2")
    hyper = np.abs(c) > 2.0
    order = np.concatenate([np.flatnonzero(hyper), np.flatnonzero(~hyper)])
    d_h = int(hyper.sum())
    d_e = strip.d - d_h
    if d_e == 0 and require_elliptic:
        raise NoEllipticChannel(f"no elliptic channel at E = {E}")
    a_s, O_s = np.asarray(a, float)[order], np.asarray(O)[:, order]
    g = np.array([_hyperbolic_root(x) for x in c[order][:d_h]], dtype=float)
    z = np.array([_elliptic_root(x) for x in c[order][d_h:]], dtype=complex)
    Q, Qi = _qmat(g, z)

    # E(V_he* S_G V_he) for a diagonal potential, then the average of z M conj(z)
    if d_h and d_e:
        w = np.abs(O_s[:, :d_h]) ** 2 @ (1.0 / (1.0 / g - g))
        Oe = O_s[:, d_h:]
        M = strip.variance * (Oe.conj().T * w) @ Oe
        Qd = M * selector(z[:, None] * z.conj()[None, :])
    else:
        Qd = np.zeros((d_e, d_e), dtype=complex)
    chaotic, witness = is_chaotic(z) if d_e else (True, None)
    return ChannelData(
        strip=strip, E=E, d_h=d_h, d_e=d_e, a=a_s, O=O_s, order=order,
        gamma_list=g, z_list=z, Qmat=Q, Qinv=Qi, Qdrift=Qd,
        chaotic=chaotic, chaos_witness=witness,
    )


def conjugated_transfer(channel, eps, sigma, lam, v):
    """``Qinv T Q`` for the transfer matrix at energy ``E + lam^2 eps`` with potential ``sigma v``."""
    d = channel.d
    Vr = channel.rotate_potential(np.asarray(v, dtype=float))
    T = channel.T_star().copy()
    T[:d, :d] += lam**2 * eps * np.eye(d) - lam * sigma * Vr
    return channel.Qinv @ T @ channel.Qmat


def conjugated_parts(channel):
    """Per-site noise matrices ``Qinv diag(-P_m, 0) Q`` and the energy direction ``Qinv diag(I, 0) Q``."""
    d = channel.d
    P = channel.site_blocks()
    Qm, Qi = channel.Qmat, channel.Qinv
    V = -np.einsum("ab,mbc,cd->mad", Qi[:, :d], P, Qm[:d, :])
    W = Qi[:, :d] @ Qm[:d, :]
    return V, W


def channel_noise(channel, eps, sigma, clip_bound=None):
    """Noise model of the conjugated dynamics: ``Y = sigma V + eps W``."""
    V, W = conjugated_parts(channel)
    s = sigma * np.sqrt(channel.strip.variance)
    return NoiseModel(s * V, W=eps * W, distribution=channel.strip.potential, clip_bound=clip_bound)


def is_chaotic(z_list, tol=1e-9):
    """Exhaustive check of the quadruple relations among unit-modulus phases.

    Returns ``(True, None)`` or ``(False, (i, j, k, l, relation))``.
    """
    z = np.asarray(z_list, dtype=complex)
    if np.any(np.abs(np.abs(z) - 1.0) > 1e-12):
        raise ValidationError("phases must have unit modulus")
    n = len(z)
    if n == 0:
        return True, None
    zi, zj, zk, zl = np.ix_(z, z, z, z)
    idx = np.indices((n,) * 4)
    same_pair = ((idx[0] == idx[2]) & (idx[1] == idx[3])) | ((idx[0] == idx[3]) & (idx[1] == idx[2]))
    checks = (
        ("z_i z_j z_k z_l", np.abs(zi * zj * zk * zl - 1) <= tol),
        ("conj(z_i) z_j z_k z_l", np.abs(zi.conj() * zj * zk * zl - 1) <= tol),
        ("conj(z_i z_j) z_k z_l", (np.abs((zi * zj).conj() * zk * zl - 1) <= tol) & ~same_pair),
    )
    for name, hit in checks:
        if hit.any():
            i, j, k, l = (int(x) for x in np.argwhere(hit)[0])
            return False, (i, j, k, l, name)
    return True, None


def build_goe_channel(d, E, r=1.0, potential="gaussian", tol=1e-8):
    """Channel data of the ``r Z_d`` strip, the model whose limit has GOE statistics."""
    if d < 2:
        raise ValidationError("the GOE channel needs d >= 2")
    return decompose_channels(StripModel.zd(d, r=r, E=E, potential=potential), tol=tol)


def goe_q(channel):
    """Closed form of the scalar drift for the sine basis: mean of (1/g - g)^-1 over d+1."""
    g = channel.gamma_list
    return float(np.sum(1.0 / (1.0 / g - g)) / (channel.strip.d + 1)) if len(g) else 0.0


# ---------------------------------------------------------------------------
# band edge


def _exact_inverse(M):
    n = len(M)
    A = [[Fraction(int(x)) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next(r for r in range(col, n) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        p = A[col][col]
        A[col] = [x / p for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    inv = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            x = A[i][n + j]
            if x.denominator != 1:
                raise ValidationError("inverse is not integral")
            inv[i, j] = int(x)
    return inv


def _int_matmul(A, B):
    return np.array(
        [[sum(A[i, k] * B[k, j] for k in range(A.shape[1])) for j in range(B.shape[1])]
         for i in range(A.shape[0])],
        dtype=object,
    )


def jordan_alpha(d1):
    """Scaling exponent of a Jordan block of size ``d1``."""
    return Fraction(2, 2 * d1 - 1)


@dataclass(frozen=True)
class BandEdgeModel:
    d: int
    T: np.ndarray
    S: np.ndarray
    M: np.ndarray
    Minv: np.ndarray

    @property
    def alpha(self):
        return Fraction(2, 4 * self.d - 1)

    @property
    def alpha_jordan(self):
        return jordan_alpha(2 * self.d)

    @property
    def MSM(self):
        return _int_matmul(_int_matmul(self.Minv, self.S), self.M)

    @property
    def MTM(self):
        return _int_matmul(_int_matmul(self.Minv, self.T), self.M)


def build_band_edge(d):
    """Integer matrices of the order-``2d`` band edge and their Pascal conjugation."""
    if d < 1:
        raise ValidationError("d must be >= 1")
    n = 2 * d
    T = np.zeros((n, n), dtype=object)
    T[:] = 0
    for k in range(1, n + 1):
        T[0, k - 1] = (-1) ** (k + 1) * comb(n, n - k)
    for j in range(1, n):
        T[j, j - 1] = 1
    S = np.zeros((n, n), dtype=object)
    S[:] = 0
    S[0, d - 1] = 1
    M = np.zeros((n, n), dtype=object)
    M[:] = 0
    for j in range(1, n + 1):
        for k in range(1, n + 2 - j):
            M[j - 1, k - 1] = comb(n - j, k - 1)
    return BandEdgeModel(d=d, T=T, S=S, M=M, Minv=_exact_inverse(M))


def pascal_inverse_closed_form(d, sign_shift=0):
    """Signed-binomial candidate ``(-1)^(j+k+shift) C(j-1, 2d-k)`` for ``inv(M)`` (diagnostic)."""
    n = 2 * d
    out = np.zeros((n, n), dtype=object)
    out[:] = 0
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            if j + k >= n + 1:
                out[j - 1, k - 1] = (-1) ** (j + k + sign_shift) * comb(j - 1, n - k)
    return out
