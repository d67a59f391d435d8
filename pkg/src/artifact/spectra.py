"""Eigenvalue point processes of strips and of the limit SDE, and gap statistics."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
import scipy.stats

from .errors import MissedRoot, NonRealSpectrum, SizeCap, TooFewPoints, ValidationError
from .models import conjugated_parts, decompose_channels
from .product import Frame, advance, default_start, schur
from .sdelimit import (anderson_drift, anderson_increments, anderson_noise, goe_limit_matrix,
                       ito_correction)

DENSE_CAP = 6000
BANDED_CAP = 50_000
DUP_TOL = 1e-10


@dataclass
class PointProcess:
    points: np.ndarray
    window: tuple
    normalization: float = 1.0
    provenance: str = ""
    seed: Optional[int] = None
    duplicates: int = field(init=False, default=0)

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float).ravel())
        lo, hi = self.window
        pts = pts[(pts > lo) & (pts < hi)]
        self.points = pts
        self.window = (float(lo), float(hi))
        self.duplicates = int(np.count_nonzero(np.diff(pts) < DUP_TOL))

    def __len__(self):
        return len(self.points)

    def count(self, lo, hi):
        return int(np.count_nonzero((self.points > lo) & (self.points < hi)))

    def raw(self, E=0.0):
        """Undo the rescaling: ``E + point / normalization``."""
        return E + self.points / self.normalization

    def to_rows(self):
        header = ["point", "window_lo", "window_hi", "normalization", "seed"]
        rows = [[float(p), self.window[0], self.window[1], self.normalization, self.seed]
                for p in self.points]
        return header, rows


@dataclass
class GapStatistics:
    gaps: np.ndarray
    ecdf: tuple
    ks_vs_reference: Optional[float] = None
    counts: dict = field(default_factory=dict)

    @classmethod
    def from_gaps(cls, gaps, reference=None, counts=None):
        g = np.asarray(gaps, dtype=float)
        ks = ks_distance(g, reference) if reference is not None else None
        return cls(g, ecdf(g), ks, dict(counts or {"gaps": int(len(g))}))

    def summary(self):
        q = np.quantile(self.gaps, [0.05, 0.25, 0.5, 0.75, 0.95]) if len(self.gaps) else [np.nan] * 5
        lines = [
            f"ks: {self.ks_vs_reference if self.ks_vs_reference is not None else 'n/a'}",
            f"n_gaps: {len(self.gaps)}",
            f"mean_gap: {float(np.mean(self.gaps)) if len(self.gaps) else float('nan'):.6g}",
        ]
        lines += [f"q{p:02d}: {v:.6g}" for p, v in zip((5, 25, 50, 75, 95), q)]
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# direct eigensolve


def strip_hamiltonian_band(strip, lam, potentials):
    """Lower band storage of ``H`` with diagonal blocks ``A + lam V_k`` and unit couplings."""
    n, d = potentials.shape
    A = strip.A
    dtype = complex if np.iscomplexobj(A) else float
    band = np.zeros((d + 1, n * d), dtype=dtype)
    for j in range(d):
        # j-th subdiagonal inside each block
        sub = np.diagonal(A, -j)
        band[j, :] = np.tile(np.concatenate([sub, np.zeros(j)]), n)
    band[0, :] = band[0, :] + lam * potentials.ravel()
    band[d, : (n - 1) * d] = 1.0
    return band


def strip_hamiltonian(strip, lam, potentials):
    """Dense ``H`` (for small checks)."""
    n, d = potentials.shape
    H = np.kron(np.eye(n), strip.A) + np.diag(lam * potentials.ravel())
    H = H + np.eye(n * d, k=d) + np.eye(n * d, k=-d)
    return H


def strip_eigenvalues(strip, lam, n, window_halfwidth, seed, E=None, method="banded", size_cap=None):
    """Eigenvalues of ``H`` with ``n (E_k - E)`` inside ``(-w, w)``, rescaled by ``n``."""
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    E = strip.E if E is None else float(E)
    cap = size_cap if size_cap is not None else (BANDED_CAP if method == "banded" else DENSE_CAP)
    if n * strip.d > cap:
        raise SizeCap(f"n*d = {n * strip.d} exceeds the cap {cap}")
    pot = strip.sample_potential(seed, n)
    w = float(window_halfwidth)
    lo, hi = E - w / n, E + w / n
    if method == "banded":
        band = strip_hamiltonian_band(strip, lam, pot)
        ev = scipy.linalg.eigvals_banded(band, lower=True, select="v", select_range=(lo, hi))
    elif method == "dense":
        ev = scipy.linalg.eigvalsh(strip_hamiltonian(strip, lam, pot), subset_by_value=(lo, hi))
    else:
        raise ValueError(f"unknown method {method!r}")
    return PointProcess(n * (ev - E), (-w, w), float(n), "strip_eigenvalues", seed)


def sturm_count(strip, lam, potentials, x):
    """Number of eigenvalues of ``H`` below each ``x`` by block LDL inertia."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n, d = potentials.shape
    A = strip.A
    count = np.zeros(len(x), dtype=int)
    prev = None
    I = np.eye(d)
    for k in range(n):
        D = A + lam * np.diag(potentials[k]) - x[:, None, None] * I
        if prev is not None:
            D = D - np.linalg.inv(prev)
        count += np.count_nonzero(np.linalg.eigvalsh(D) < 0, axis=-1)
        prev = D
    return count


# ---------------------------------------------------------------------------
# transfer determinant


class _BoundaryDeterminant:
    """``det(P1 T_[1,n](E + eps/n) P1*)`` through the stabilized Schur recursion."""

    def __init__(self, strip, lam, n, potentials, E):
        self.ch = decompose_channels(strip, E, require_elliptic=False)
        self.n, self.lam = n, lam
        ch = self.ch
        self.d, self.dh, self.de = ch.d, ch.d_h, ch.d_e
        self.spectrum = ch.spectrum()
        self.frame = Frame(self.spectrum)
        Vp, self.W = conjugated_parts(ch)
        self.base = np.diag(ch.diagonal())
        self.noise = lam * np.tensordot(potentials, Vp, axes=(-1, 0))
        d, dh, de = self.d, self.dh, self.de
        self.p = dh + 2 * de
        self.X0 = default_start(ch)
        Y0 = np.zeros((self.p, de))
        Y0[dh:dh + de] = np.eye(de)
        Y0[dh + de:] = -np.eye(de)
        self.Y0 = Y0
        Theta = np.zeros((2 * d, d), dtype=complex)
        Theta[:self.p, :de] = Y0
        Theta[self.p:, de:] = np.eye(dh)
        K = np.linalg.solve(self.X0, ch.Qinv[:, :d])
        Omega, *_ = np.linalg.lstsq(K, Theta, rcond=None)
        if np.linalg.norm(K @ Omega - Theta) > 1e-9 * max(1.0, np.linalg.norm(Theta)):
            raise ValidationError("boundary reduction is inconsistent")
        self.log_omega = np.linalg.slogdet(Omega)
        self.real = not np.iscomplexobj(strip.A) or np.allclose(np.asarray(strip.A).imag, 0)

    def __call__(self, eps):
        """Return ``(log|f|, phase)`` for a 1-d array of ``eps``."""
        eps = np.asarray(eps, dtype=float)
        m = len(eps)
        d2 = self.spectrum.d2
        X, Z = schur(np.broadcast_to(self.X0, (m,) + self.X0.shape), d2)
        logabs = np.zeros(m)
        phase = np.zeros(m)
        Weps = (eps / self.n)[:, None, None] * self.W
        for k in range(1, self.n + 1):
            T = self.base + Weps + self.noise[k - 1]
            X, Z, piv = advance(X, Z, self.frame.conjugate_step(k, T), self.p)
            if d2:
                s, la = np.linalg.slogdet(piv)
                logabs += la
                phase += np.angle(s)
        top = np.concatenate([X @ self.Y0, Z], axis=-1)
        top = self.frame.apply_left(self.n, top)
        full = np.zeros((m, 2 * self.d, self.d), dtype=complex)
        full[:, :self.p] = top
        full[:, self.p:, self.de:] = np.eye(self.dh)
        L = self.ch.Qmat[:self.d] @ full
        s, la = np.linalg.slogdet(L)
        so, lo = self.log_omega
        return logabs + la - lo, np.angle(np.exp(1j * (phase + np.angle(s) - np.angle(so))))

    def sign(self, eps):
        _, ph = self(eps)
        return np.sign(np.cos(ph))


def determinant_scan(strip, lam, n, eps_grid, seed, E=None, tol=1e-8, check_count=True,
                     potentials=None, chunk=4096):
    """Zeros of the boundary determinant in rescaled units ``eps = n (E' - E)``."""
    E = strip.E if E is None else float(E)
    eps_grid = np.sort(np.asarray(eps_grid, dtype=float).ravel())
    if len(eps_grid) == 0:
        return PointProcess(np.zeros(0), (0.0, 0.0), float(n), "determinant_scan", seed)
    window = (float(eps_grid[0]), float(eps_grid[-1]))
    pot = strip.sample_potential(seed, n) if potentials is None else np.asarray(potentials, float)
    f = _BoundaryDeterminant(strip, lam, n, pot, E)
    if not f.real:
        raise ValidationError("the sign scan needs a real strip")
    signs = np.concatenate([f.sign(eps_grid[i:i + chunk]) for i in range(0, len(eps_grid), chunk)])
    exact = eps_grid[signs == 0]
    idx = np.flatnonzero(signs[:-1] * signs[1:] < 0)
    a, b = eps_grid[idx].copy(), eps_grid[idx + 1].copy()
    sa = signs[idx].copy()
    while len(a) and np.max(b - a) > tol:
        mid = 0.5 * (a + b)
        sm = f.sign(mid)
        left = sm == sa
        a = np.where(left, mid, a)
        b = np.where(left, b, mid)
    roots = np.concatenate([0.5 * (a + b), exact])
    pp = PointProcess(roots, (window[0] - 1e-12, window[1] + 1e-12), float(n), "determinant_scan", seed)
    pp.window = window
    if check_count:
        lo, hi = E + window[0] / n, E + window[1] / n
        c = sturm_count(strip, lam, pot, [lo, hi])
        expected = int(c[1] - c[0])
        if expected != len(pp):
            warnings.warn(f"scan found {len(pp)} roots, inertia count is {expected}", MissedRoot)
    return pp


# ---------------------------------------------------------------------------
# limit SDE spectrum


def _shared_increments(channel, sigma, dt, rng_stream, n_paths=1, real_symmetric=False):
    steps = int(round(1.0 / dt))
    return anderson_increments(channel, sigma, steps, dt, rng_stream, n_paths, real_symmetric)


def coarsen(increments, factor):
    """Sum consecutive groups of ``factor`` increments (first axis)."""
    increments = np.asarray(increments)
    k = increments.shape[0]
    if k % factor:
        raise ValidationError("increment count is not a multiple of the coarsening factor")
    return increments.reshape((k // factor, factor) + increments.shape[1:]).sum(axis=1)


class _SDEDeterminant:
    """``det([conj Z*, Z*] L_1(eps) [I; -I])`` for one shared noise path."""

    def __init__(self, channel, sigma, Z_star, increments, dt):
        self.de = channel.d_e
        self.S = channel.Smat
        self.J = np.concatenate([np.ones(self.de), -np.ones(self.de)])
        self.base = anderson_drift(channel, 0.0, sigma)
        self.inc = increments
        self.dt = dt
        self.corr = ito_correction(channel, sigma) if sigma else np.zeros_like(self.base)
        zs = np.asarray(Z_star, dtype=complex)
        zs = np.diag(zs) if zs.ndim == 1 else zs
        self.left = np.concatenate([zs.conj(), zs], axis=1)
        self.right = np.concatenate([np.eye(self.de), -np.eye(self.de)], axis=0)
        self.steps = None

    def __call__(self, eps):
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        if self.steps is None:
            fixed = (self.base - 0.5 * self.corr) * self.dt + self.inc
            self.steps = _expm_batch(fixed)
        # symmetric splitting: exp(F + eps G dt) ~ exp(eps G dt/2) exp(F) exp(eps G dt/2)
        g = np.diag(self.S) * self.J * self.dt
        half = np.exp(0.5 * eps[:, None] * g)[:, :, None]
        L = half * np.eye(2 * self.de)
        for E in self.steps[:-1]:
            L = (half * half) * _mm(E, L)
        L = half * _mm(self.steps[-1], L)
        return np.linalg.det(self.left @ L @ self.right)


def _mm(A, B):
    """Batched product of small matrices; broadcasting beats matmul only for 2x2."""
    k = A.shape[-1]
    if k > 2:
        return A @ B
    out = A[..., :, 0, None] * B[..., None, 0, :]
    for j in range(1, k):
        out += A[..., :, j, None] * B[..., None, j, :]
    return out


def _expm_batch(M):
    """Batched matrix exponential by scaling and squaring of a Taylor polynomial."""
    if M.shape[-1] == 1:
        return np.exp(M)
    norm = float(np.max(np.abs(M).sum(axis=-2), initial=0.0))
    s = max(0, int(np.ceil(np.log2(norm / 0.1)))) if norm > 0.1 else 0
    theta = norm / 2.0**s
    # smallest degree with a truncation term below 1e-17
    degree, term = 1, theta
    while term > 1e-17 and degree < 20:
        degree += 1
        term *= theta / degree
    A = M / 2.0**s
    eye = np.eye(M.shape[-1])
    out = eye + A / degree
    for j in range(degree - 1, 0, -1):
        out = eye + _mm(A, out) / j
    for _ in range(s):
        out = _mm(out, out)
    return out


def _golden_min(fun, a, b, tol):
    """Vectorized golden-section minimization of ``fun`` on brackets ``[a, b]``."""
    g = (np.sqrt(5.0) - 1) / 2
    c = b - g * (b - a)
    d = a + g * (b - a)
    fc, fd = fun(c), fun(d)
    while np.max(b - a, initial=0) > tol:
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - g * (b - a)
        new_d = a + g * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        probe = np.where(left, c_next, d_next)
        fp = fun(probe)
        fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
        c, d = c_next, d_next
    return 0.5 * (a + b)


def sde_eigenvalue_process(channel, sigma, Z_star, eps_grid, dt, rng_stream=None, increments=None,
                           threshold=1e-6, tol=1e-9, chunk=1024):
    """Zeros in ``eps`` of the boundary determinant of the limit SDE, all grid points sharing one path."""
    if channel.d_e < 1:
        raise ValidationError("no elliptic channel")
    eps_grid = np.sort(np.asarray(eps_grid, dtype=float).ravel())
    window = (float(eps_grid[0]), float(eps_grid[-1])) if len(eps_grid) else (0.0, 0.0)
    seed = rng_stream if isinstance(rng_stream, (int, np.integer)) else None
    if len(eps_grid) < 3:
        return PointProcess(np.zeros(0), window, 1.0, "sde_eigenvalue_process", seed)
    if increments is None:
        if sigma:
            increments = _shared_increments(channel, sigma, dt, rng_stream)[:, 0]
        else:
            increments = np.zeros((int(round(1.0 / dt)), 2 * channel.d_e, 2 * channel.d_e), complex)
    increments = np.asarray(increments)
    if increments.ndim == 4:
        increments = increments[:, 0]
    steps = int(round(1.0 / dt))
    if len(increments) != steps:
        increments = coarsen(increments, len(increments) // steps)
    f = _SDEDeterminant(channel, sigma, Z_star, increments, dt)
    vals = np.concatenate([f(eps_grid[i:i + chunk]) for i in range(0, len(eps_grid), chunk)])
    m2 = np.abs(vals) ** 2
    med = np.median(m2)
    cand = np.flatnonzero((m2[1:-1] <= m2[:-2]) & (m2[1:-1] <= m2[2:])) + 1
    if len(cand) == 0:
        return PointProcess(np.zeros(0), window, 1.0, "sde_eigenvalue_process", seed)
    roots = _golden_min(lambda e: np.abs(f(e)), eps_grid[cand - 1], eps_grid[cand + 1], tol)
    keep = np.abs(f(roots)) ** 2 <= threshold * med
    roots = np.sort(roots[keep])
    # neighbouring brackets can converge to the same zero
    h = np.min(np.diff(eps_grid))
    roots = roots[np.concatenate([[True], np.diff(roots) > 0.5 * h])] if len(roots) else roots
    return PointProcess(roots, window, 1.0, "sde_eigenvalue_process", seed)


def _cn_system(channel, sigma, increments, h):
    de = channel.d_e
    k = 2 * de
    M = len(increments)
    S = np.diag(channel.Smat)
    Jd = np.concatenate([np.ones(de), -np.ones(de)])
    Kd = Jd / S
    Qt = np.kron(np.eye(2), channel.Qdrift)
    P = sigma**2 * Qt[None] - Kd[None, :, None] * np.asarray(increments) / h
    K = np.diag(Kd)
    left = -K / h + 0.5 * P
    right = K / h + 0.5 * P
    # block row j has blocks at columns j and j + 1
    data = np.empty((2 * M, k, k), dtype=complex)
    data[0::2] = left
    data[1::2] = right
    indices = np.empty(2 * M, dtype=int)
    indices[0::2] = np.arange(M)
    indices[1::2] = np.arange(1, M + 1)
    indptr = np.arange(0, 2 * M + 1, 2)
    n_unk = (M + 1) * k
    A = scipy.sparse.bsr_matrix((data, indices, indptr), shape=(M * k, n_unk)).tocsr()
    half = np.broadcast_to(0.5 * np.eye(k, dtype=complex), (2 * M, k, k)).copy()
    B = scipy.sparse.bsr_matrix((half, indices, indptr), shape=(M * k, n_unk)).tocsr()
    return A, B


def boundary_rows(channel, Z_star, n_unk):
    """``[I, I] psi(0) = 0`` and ``[conj Z*, Z*] psi(1) = 0`` as sparse rows."""
    de = channel.d_e
    k = 2 * de
    zs = np.asarray(Z_star, dtype=complex)
    zs = np.diag(zs) if zs.ndim == 1 else np.atleast_2d(zs)
    rows = scipy.sparse.lil_matrix((k, n_unk), dtype=complex)
    rows[:de, :de] = np.eye(de)
    rows[:de, de:k] = np.eye(de)
    rows[de:, n_unk - k:n_unk - de] = zs.conj()
    rows[de:, n_unk - de:] = zs
    return rows.tocsr()


def operator_oracle(channel, sigma, Z_star, mesh_size, rng_stream=None, window=(-20.0, 20.0),
                    increments=None, imag_tol=1e-6, return_vectors=False):
    """Eigenvalues in ``window`` of the discretized first-order operator with its boundary rows.

    ``increments`` are those of ``sigma S [[A, B], [-B*, -C]]`` on a grid whose
    size is a multiple of ``mesh_size``; they are summed down to the mesh.
    """
    if mesh_size < 100:
        raise ValidationError("mesh_size must be at least 100")
    k = 2 * channel.d_e
    h = 1.0 / mesh_size
    if increments is None:
        if sigma:
            increments = _shared_increments(channel, sigma, h, rng_stream)[:, 0]
        else:
            increments = np.zeros((mesh_size, k, k), dtype=complex)
    increments = np.asarray(increments)
    if increments.ndim == 4:
        increments = increments[:, 0]
    if len(increments) != mesh_size:
        increments = coarsen(increments, len(increments) // mesh_size)
    A, B = _cn_system(channel, sigma, increments, h)
    n_unk = A.shape[1]
    rows = boundary_rows(channel, Z_star, n_unk)
    A = scipy.sparse.vstack([A, rows]).tocsc()
    B = scipy.sparse.vstack([B, scipy.sparse.csr_matrix((k, n_unk), dtype=complex)]).tocsc()
    lo, hi = window
    centre = 0.5 * (lo + hi) + 0.0123 * (hi - lo)
    lu = scipy.sparse.linalg.splu(A - centre * B)
    op = scipy.sparse.linalg.LinearOperator(A.shape, matvec=lambda x: lu.solve(B @ x), dtype=complex)
    # mean density of eigenvalues is sum_j |s_j| / pi
    density = np.sum(np.abs(np.diag(channel.Smat))) / (2 * np.pi)
    want = int(min(n_unk - 2, 2 * density * (hi - lo) + 16))
    while True:
        mu, vec = scipy.sparse.linalg.eigs(op, k=want, which="LM")
        ev = centre + 1.0 / mu
        if np.min(np.abs(ev - centre)) < np.inf and (
                np.max(np.abs(ev - centre)) > max(hi - centre, centre - lo) or want >= n_unk - 2):
            break
        want = min(n_unk - 2, 2 * want)
    inside = (ev.real > lo) & (ev.real < hi)
    ev_in, vec_in = ev[inside], vec[:, inside]
    if ev_in.size and np.max(np.abs(ev_in.imag)) > imag_tol:
        raise NonRealSpectrum(f"imaginary part {np.max(np.abs(ev_in.imag)):.3g} exceeds {imag_tol:g}")
    order = np.argsort(ev_in.real)
    if return_vectors:
        return ev_in.real[order], vec_in[:, order], rows
    return ev_in.real[order]


# ---------------------------------------------------------------------------
# gaps


def central(points, fraction=0.5):
    """Middle ``fraction`` of a sorted sample, by index."""
    pts = np.sort(np.asarray(points, dtype=float))
    m = len(pts)
    cut = int(np.floor(m * (1 - fraction) / 2))
    return pts[cut:m - cut]


def raw_gaps(points, fraction=1.0):
    pts = central(points, fraction) if fraction < 1 else np.sort(np.asarray(points, float))
    return np.diff(pts)


def pooled_gaps(samples, fraction=0.5):
    """Central gaps of several samples, all divided by their pooled mean."""
    gaps = [raw_gaps(s, fraction) for s in samples]
    gaps = np.concatenate(gaps) if gaps else np.zeros(0)
    if len(gaps) == 0:
        raise TooFewPoints("no gaps in the pooled samples")
    return gaps / gaps.mean()


def ecdf(sample):
    x = np.sort(np.asarray(sample, dtype=float))
    return x, np.arange(1, len(x) + 1) / len(x)


def ks_distance(sample_a, sample_b):
    """Two-sample Kolmogorov-Smirnov statistic."""
    return float(scipy.stats.ks_2samp(sample_a, sample_b).statistic)


def gap_statistics(pp, reference=None, fraction=1.0):
    """Gaps of ``pp`` divided by their mean, with an optional KS comparison."""
    pts = pp.points if isinstance(pp, PointProcess) else np.asarray(pp, dtype=float)
    if len(pts) < 2:
        raise TooFewPoints("at least two points are needed for gaps")
    g = raw_gaps(pts, fraction)
    if len(g) == 0:
        raise TooFewPoints("no gaps in the central part")
    g = g / g.mean()
    ks = ks_distance(g, reference) if reference is not None else None
    counts = {"points": int(len(pts)), "gaps": int(len(g))}
    if isinstance(pp, PointProcess):
        counts["window"] = pp.window
    return GapStatistics(g, ecdf(g), ks, counts)


def goe_reference_gaps(d_e, d, n_samples, rng_stream=None, fraction=0.5, batch=10_000):
    """Central gaps of ``goe_limit_matrix`` spectra, normalized by the pooled mean gap."""
    if d_e < 2:
        raise ValidationError("d_e must be at least 2")
    rng = np.random.default_rng(rng_stream) if not isinstance(rng_stream, np.random.Generator) else rng_stream
    out = []
    done = 0
    while done < n_samples:
        b = min(batch, n_samples - done)
        ev = np.linalg.eigvalsh(goe_limit_matrix(d_e, d, rng, b))
        m = d_e
        cut = int(np.floor(m * (1 - fraction) / 2))
        sub = ev[:, cut:m - cut]
        if sub.shape[1] < 2:
            sub = ev
        out.append(np.diff(sub, axis=1).ravel())
        done += b
    g = np.concatenate(out)
    return g / g.mean()


def sde_increments(channel, dt, rng_stream, real_symmetric=False):
    """One shared path of unit-``sigma`` increments on ``[0, 1]`` at step ``dt``."""
    return _shared_increments(channel, 1.0, dt, rng_stream, 1, real_symmetric)[:, 0]


def noise_law(channel, real_symmetric=False):
    return anderson_noise(channel, real_symmetric)
