"""Schur-complement process of a random matrix product in the rotating frame.

The product ``T_n ... T_1 X0`` of ``T = T0 + lam V + lam^2 W`` is tracked
through the pair ``(X, Z)``: with ``A, B, C, D`` the blocks of
``R^{-n} T_n ... T_1 X0`` split at ``d0 + d1``, ``X = A - B D^-1 C`` and
``Z = B D^-1``.  The pair is a Markov chain that never overflows even though
``D`` grows like ``inv(Gamma2)^n``.

All array routines accept a leading batch axis so that replicas, energies or
grid points advance together.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import RankCollapse, RankDeficient, SingularPivot, SingularStart
from .models import BlockSpectrum, channel_noise, conjugated_parts

COND_MAX = 1e12


def _cond(M):
    """Batched 2-norm condition numbers; 1x1 blocks are perfectly conditioned unless zero."""
    if M.shape[-1] == 0:
        return np.ones(M.shape[:-2])
    if M.shape[-1] == 1:
        a = np.abs(M[..., 0, 0])
        return np.where(a > 0, 1.0, np.inf)
    s = np.linalg.svd(M, compute_uv=False)
    with np.errstate(divide="ignore"):
        return s[..., 0] / s[..., -1]


def schur(full, d2):
    """Schur complement ``X = A - B D^-1 C`` and companion ``Z = B D^-1``.

    ``full`` may carry leading batch axes.  ``d2 = 0`` returns ``(full, empty)``.
    """
    full = np.asarray(full, dtype=complex)
    d = full.shape[-1]
    p = d - d2
    if d2 == 0:
        return full.copy(), np.zeros(full.shape[:-2] + (d, 0), dtype=complex)
    A, B = full[..., :p, :p], full[..., :p, p:]
    C, D = full[..., p:, :p], full[..., p:, p:]
    cond = _cond(D)
    if np.any(~(cond < COND_MAX)):
        raise SingularPivot(f"lower-right block has condition number {np.max(cond):.3g}")
    Z = np.swapaxes(np.linalg.solve(np.swapaxes(D, -1, -2), np.swapaxes(B, -1, -2)), -1, -2)
    return A - Z @ C, Z


# ---------------------------------------------------------------------------
# rotating frame


class Frame:
    """Exact powers of ``R = diag(1_{d0}, U)`` and of ``diag(R, 1_{d2})``."""

    def __init__(self, spectrum):
        self.d0, self.d1, self.d2 = spectrum.d0, spectrum.d1, spectrum.d2
        self.phi, self.P = spectrum.frame
        self.diagonal = bool(np.array_equal(self.P, np.eye(self.d1)))

    def phases(self, n):
        """``exp(i n phi)`` with the angle reduced before exponentiation."""
        return np.exp(1j * np.fmod(n * self.phi, 2 * np.pi))

    def full_diag(self, n, with_d2=True):
        out = np.ones(self.d0 + self.d1 + (self.d2 if with_d2 else 0), dtype=complex)
        out[self.d0:self.d0 + self.d1] = self.phases(n)
        return out

    def apply_left(self, n, M):
        """``R^n M`` for ``M`` with ``d0 + d1`` rows."""
        out = np.array(M, dtype=complex, copy=True)
        mid = slice(self.d0, self.d0 + self.d1)
        ph = self.phases(n)
        if self.diagonal:
            out[..., mid, :] *= ph[:, None]
        else:
            out[..., mid, :] = self.P @ (ph[:, None] * (self.P.conj().T @ out[..., mid, :]))
        return out

    def conjugate_step(self, n, T):
        """``RR^{-n} T RR^{n-1}`` with ``RR = diag(1, U, 1)``."""
        if self.diagonal:
            left = self.full_diag(n).conj()
            right = self.full_diag(n - 1)
            return left[:, None] * T * right[None, :]
        Rm = np.diag(self.full_diag(-n)).astype(complex)
        Rp = np.diag(self.full_diag(n - 1)).astype(complex)
        mid = slice(self.d0, self.d0 + self.d1)
        L = np.eye(len(Rm), dtype=complex)
        L[mid, mid] = self.P @ Rm[mid, mid] @ self.P.conj().T
        Rr = np.eye(len(Rp), dtype=complex)
        Rr[mid, mid] = self.P @ Rp[mid, mid] @ self.P.conj().T
        return L @ T @ Rr


def advance(X, Z, Trot, p):
    """One update of the pair from a rotated step matrix ``Trot`` (batched).

    Returns ``X', Z'`` and the pivot ``T^C Z + T^D``.
    """
    TA, TB = Trot[..., :p, :p], Trot[..., :p, p:]
    TC, TD = Trot[..., p:, :p], Trot[..., p:, p:]
    if Trot.shape[-1] == p:
        return TA @ X, Z, TD
    piv = TC @ Z + TD
    num = TA @ Z + TB
    Zn = np.swapaxes(np.linalg.solve(np.swapaxes(piv, -1, -2), np.swapaxes(num, -1, -2)), -1, -2)
    Xn = TA @ X - Zn @ (TC @ X)
    return Xn, Zn, piv


# ---------------------------------------------------------------------------
# state and stepping


@dataclass
class ProductState:
    n: int
    X: np.ndarray
    Z: np.ndarray
    frame_phases: np.ndarray
    diagnostics: dict = field(default_factory=lambda: {"znorm_max": 0.0, "cond_max": 1.0})


def init_state(X0_full, spectrum):
    X0_full = np.asarray(X0_full, dtype=complex)
    try:
        X, Z = schur(X0_full, spectrum.d2)
    except SingularPivot as exc:
        raise SingularStart(str(exc)) from None
    return ProductState(0, X, Z, Frame(spectrum).phases(0), {"znorm_max": _znorm(Z), "cond_max": 1.0})


def _znorm(Z):
    if Z.shape[-1] == 0:
        return np.zeros(Z.shape[:-2]) if Z.ndim > 2 else 0.0
    if Z.shape[-1] == 1:
        return np.linalg.norm(Z[..., 0], axis=-1)
    return np.linalg.norm(Z, 2, axis=(-2, -1))


def clip_noise(Y, lam, clip_bound, s=0.75):
    """Zero the noise samples with ``||Y|| >= clip_bound lam^(s-1)``."""
    if clip_bound is None or lam == 0:
        return Y
    nrm = np.linalg.norm(Y, 2, axis=(-2, -1))
    return np.where((nrm >= clip_bound * lam ** (s - 1))[..., None, None], 0.0, Y)


def step(state, spectrum, noise, lam, seed, n=None, s=0.75):
    """Advance the pair by one factor ``T_n = T0 + lam (V_n + lam W)``."""
    n = state.n + 1 if n is None else int(n)
    Y = noise.sample(seed, n) + lam * noise.W
    Y = clip_noise(Y, lam, noise.clip_bound, s)
    frame = Frame(spectrum)
    Trot = frame.conjugate_step(n, spectrum.T0() + lam * Y)
    X, Z, piv = advance(state.X, state.Z, Trot, spectrum.d0 + spectrum.d1)
    cond = float(_cond(piv)) if spectrum.d2 else 1.0
    if not cond < COND_MAX:
        raise SingularPivot(f"pivot condition {cond:.3g} at step {n}", step=n)
    diag = dict(state.diagnostics)
    diag["znorm_max"] = max(diag.get("znorm_max", 0.0), float(_znorm(Z)))
    diag["cond_max"] = max(diag.get("cond_max", 1.0), cond)
    return ProductState(n, X, Z, frame.phases(n), diag)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """Retained snapshots of a (possibly batched) run.

    ``X`` has shape ``(K, R, p, p)`` and ``Z`` shape ``(K, R, p, d2)`` for ``R``
    replicas; ``znorm`` is the per-step ``||Z_n||`` when recorded.
    """

    steps: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    seeds: np.ndarray
    znorm: Optional[np.ndarray] = None
    cond_max: Optional[np.ndarray] = None

    def state(self, k, replica=0):
        return ProductState(int(self.steps[k]), self.X[k, replica], self.Z[k, replica], None)

    @property
    def final_X(self):
        return self.X[-1]

    def to_rows(self, replica=0):
        """Rows for CSV export: step, X_r_c and Z_r_c re/im pairs, znorm, cond."""
        p = self.X.shape[-1]
        d2 = self.Z.shape[-1]
        header = ["step"]
        header += [f"X_{r}_{c}_{part}" for r in range(p) for c in range(p) for part in ("re", "im")]
        header += [f"Z_{r}_{c}_{part}" for r in range(p) for c in range(d2) for part in ("re", "im")]
        header += ["znorm", "cond"]
        rows = []
        for k, n in enumerate(self.steps):
            x = self.X[k, replica].ravel()
            z = self.Z[k, replica].ravel()
            row = [int(n)]
            row += [v for c in x for v in (c.real, c.imag)]
            row += [v for c in z for v in (c.real, c.imag)]
            row.append(float(_znorm(self.Z[k, replica])))
            row.append(float(self.cond_max[replica]) if self.cond_max is not None else 1.0)
            rows.append(row)
        return header, rows


def retained_steps(steps, retain):
    if retain is None or retain >= steps + 1:
        return np.arange(steps + 1)
    return np.unique(np.round(np.linspace(0, steps, max(retain, 2))).astype(int))


def run_product(spectrum, noise, lam, steps, X0_full=None, seed=0, retain=1000,
                record_znorm=False, s=0.75):
    """Run the pair recursion for ``steps`` factors.

    ``seed`` may be a sequence, in which case all replicas advance together
    and the result carries one trajectory per seed.
    """
    seeds = np.atleast_1d(np.asarray(seed, dtype=np.uint64))
    R = len(seeds)
    d = spectrum.dim
    p = spectrum.d0 + spectrum.d1
    X0_full = np.eye(d, dtype=complex) if X0_full is None else np.asarray(X0_full, dtype=complex)
    try:
        X, Z = schur(np.broadcast_to(X0_full, (R, d, d)), spectrum.d2)
    except SingularPivot as exc:
        raise SingularStart(str(exc)) from None
    keep = retained_steps(steps, retain)
    Xs = np.empty((len(keep), R, p, p), dtype=complex)
    Zs = np.empty((len(keep), R, p, spectrum.d2), dtype=complex)
    znorm = np.empty((steps + 1, R)) if record_znorm else None
    cond_max = np.ones(R)
    slot = 0
    if keep[0] == 0:
        Xs[0], Zs[0] = X, Z
        slot = 1
    if record_znorm:
        znorm[0] = _znorm(Z)

    frame = Frame(spectrum)
    T0 = spectrum.T0()
    lamW = lam * noise.W
    B = noise.block
    n = 0
    while n < steps:
        b = n // B
        count = min(B - n % B, steps - n)
        V = np.stack([noise.sample_block(int(sd), b)[n % B:n % B + count] for sd in seeds], axis=1)
        for i in range(count):
            n += 1
            Y = clip_noise(V[i] + lamW, lam, noise.clip_bound, s)
            Trot = frame.conjugate_step(n, T0 + lam * Y)
            X, Z, piv = advance(X, Z, Trot, p)
            if spectrum.d2:
                c = _cond(piv)
                bad = ~(c < COND_MAX)
                if bad.any():
                    raise SingularPivot(f"pivot condition {np.max(c):.3g} at step {n}",
                                        step=n, replicas=np.flatnonzero(bad).tolist())
                np.maximum(cond_max, c, out=cond_max)
            if record_znorm:
                znorm[n] = _znorm(Z)
            if slot < len(keep) and keep[slot] == n:
                Xs[slot], Zs[slot] = X, Z
                slot += 1
    return Trajectory(keep, Xs, Zs, seeds, znorm, cond_max)


# ---------------------------------------------------------------------------
# reduced transfer matrix of a strip


def default_start(channel):
    """``X0 = [[1, 0, -1], [0, 1, 0], [0, 0, 1]]`` in blocks ``(d_h, 2 d_e, d_h)``."""
    dh, de = channel.d_h, channel.d_e
    X0 = np.eye(2 * (dh + de), dtype=complex)
    X0[:dh, dh + 2 * de:] = -np.eye(dh)
    return X0


def conjugated_steps(channel, eps, sigma, lam, potentials):
    """Conjugated transfer matrices for a stack of diagonal potentials ``(..., n, d)``."""
    V, W = conjugated_parts(channel)
    base = np.diag(channel.diagonal()) + lam**2 * eps * W
    return base + lam * sigma * np.tensordot(potentials, V, axes=(-1, 0))


def reduced_transfer(channel, lam, eps, sigma, steps, X0_full=None, seed=0, potentials=None):
    """``(P* [T_[1,n] X0]^-1 P)^-1`` for the conjugated strip transfer matrices.

    The potential realization is ``channel.strip.sample_potential(seed, steps)``
    unless ``potentials`` is given.
    """
    spectrum = channel.spectrum()
    X0 = default_start(channel) if X0_full is None else np.asarray(X0_full, dtype=complex)
    if potentials is None:
        potentials = channel.strip.sample_potential(seed, steps)
    try:
        X, Z = schur(X0, spectrum.d2)
    except SingularPivot as exc:
        raise SingularStart(str(exc)) from None
    frame = Frame(spectrum)
    p = spectrum.d0 + spectrum.d1
    Ts = conjugated_steps(channel, eps, sigma, lam, potentials)
    for n in range(1, steps + 1):
        X, Z, piv = advance(X, Z, frame.conjugate_step(n, Ts[n - 1]), p)
        if spectrum.d2 and not _cond(piv) < COND_MAX:
            raise SingularPivot(f"pivot condition at step {n}", step=n)
    return frame.apply_left(steps, X)


# ---------------------------------------------------------------------------
# flags


@dataclass(frozen=True)
class FlagSpectrum:
    """``T0 = diag(c_1 U_1, ..., c_k U_k)`` with increasing magnitudes ``c``."""

    c: tuple
    blocks: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=complex)) for b in self.blocks)
        if len(c) != len(blocks) or any(b <= a for a, b in zip(c, c[1:])) or min(c) <= 0:
            raise ValueError("magnitudes must be positive and strictly increasing")
        for b in blocks:
            if np.linalg.norm(b.conj().T @ b - np.eye(len(b))) > 1e-10:
                raise ValueError("magnitude blocks must be unitary")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def diagonal(cls, values):
        values = np.asarray(values)
        order = np.argsort(np.abs(values))
        if not np.array_equal(order, np.arange(len(values))):
            raise ValueError("entries must be ordered by increasing modulus")
        return cls(tuple(np.abs(values)), tuple(np.exp(1j * np.angle(v)) for v in values))

    @property
    def sizes(self):
        return [len(b) for b in self.blocks]

    @property
    def dim(self):
        return sum(self.sizes)

    def T0(self):
        return scipy.linalg.block_diag(*[c * b for c, b in zip(self.c, self.blocks)]).astype(complex)

    def Rhat(self):
        return scipy.linalg.block_diag(*self.blocks).astype(complex)


@dataclass
class FlagState:
    F: np.ndarray
    step: int
    column_norms: np.ndarray


def _ql(F):
    """``F = Q L`` with ``L`` lower triangular (via QR of the column-reversed matrix)."""
    Q, R = np.linalg.qr(F[:, ::-1])
    return Q[:, ::-1], R[::-1, ::-1]


def is_block_upper(F, sizes, tol=1e-12):
    edges = np.cumsum([0] + list(sizes))
    for i in range(len(sizes)):
        for j in range(i):
            if np.max(np.abs(F[edges[i]:edges[i + 1], edges[j]:edges[j + 1]]), initial=0) > tol:
                return False
    return True


def propagate_flag(spectrum, noise, lam, F0, steps, seed=0):
    """Apply ``Rhat^{-n} T_n ... T_1`` to a flag with QL renormalization each step.

    Only lower-triangular right factors are removed, so the flag class of the
    columns (span of the last ``p`` columns for every ``p``) is preserved.
    """
    F = np.array(F0, dtype=complex)
    d = spectrum.dim
    if np.linalg.matrix_rank(F) < d:
        raise RankCollapse("initial flag is singular")
    if not is_block_upper(F, spectrum.sizes):
        warnings.warn("initial flag is not block upper triangular; convergence to the stable flag is not guaranteed",
                      stacklevel=2)
    T0 = spectrum.T0()
    Rh = spectrum.Rhat()
    evals, P = np.linalg.eig(Rh)
    phi = np.angle(evals)
    Pinv = np.linalg.inv(P)

    def rpow(n):
        return (P * np.exp(1j * np.fmod(n * phi, 2 * np.pi))) @ Pinv

    norms = np.empty((steps, d))
    F, L = _ql(F)
    V = noise.samples(seed, 1, steps) if steps else np.zeros((0, d, d))
    for n in range(1, steps + 1):
        T = T0 + lam * V[n - 1] + lam**2 * noise.W
        F = rpow(-n) @ T @ rpow(n - 1) @ F
        F, L = _ql(F)
        diag = np.abs(np.diag(L))
        norms[n - 1] = diag
        if diag.min() < 1e-12 * diag.max():
            raise RankCollapse(f"flag collapsed at step {n}")
    return FlagState(F, steps, norms)


def principal_angles(subspace_basis, reference_basis):
    """Principal angles in ascending order between two column spans."""
    A = np.atleast_2d(np.asarray(subspace_basis, dtype=complex))
    B = np.atleast_2d(np.asarray(reference_basis, dtype=complex))
    if A.shape[0] != B.shape[0]:
        raise ValueError("bases must share the ambient dimension")
    for M in (A, B):
        s = np.linalg.svd(M, compute_uv=False)
        if M.shape[1] == 0 or s.min() <= 1e-12 * max(s.max(), 1e-300):
            raise RankDeficient("basis is not of full column rank")
    return np.sort(scipy.linalg.subspace_angles(A, B))


def flag_angles(F, dims=None):
    """Largest principal angle between ``span(last p columns)`` and ``span(e_{d-p+1..d})``."""
    F = np.asarray(F)
    d = F.shape[0]
    dims = range(1, d) if dims is None else dims
    I = np.eye(d)
    return np.array([principal_angles(F[:, d - p:], I[:, d - p:]).max() for p in dims])
