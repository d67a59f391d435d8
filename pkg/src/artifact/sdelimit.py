"""Limit SDE coefficients, correlated complex Brownian increments and integrators.

The limit of the rotated Schur complement solves ``dL = V L dt + dB L`` with
``E(B^T M B) = g(M) t`` and ``E(B* M B) = ghat(M) t``.  Linear maps on
matrices are stored as 4-tensors ``T[c, a, e, b] = f(E_ce)[a, b]``; with this
convention ``G[i, j, k, l] = E(B_ij B_kl) / t`` and
``Ghat[i, j, k, l] = E(conj(B_ij) B_kl) / t``.

Averages over the closure of ``{U^k}`` reduce to averages of characters
``exp(-i k theta)``; these are evaluated either exactly over a detected finite
order, by the ergodic mean over ``N`` powers, or by the exact selector
``chi(w) = [w == 1]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import InvalidCovariance, ValidationError
from .models import selector

PSD_FLOOR = 1e-9


def _rng(stream):
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.default_rng(stream)


# ---------------------------------------------------------------------------
# complex Gaussian vectors


@dataclass
class ComplexGaussianSpec:
    """Centered complex Gaussian vector with ``C = E(x x^H)`` and ``R = E(x x^T)``."""

    C: np.ndarray
    R: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=complex))
        R = np.atleast_2d(np.asarray(self.R, dtype=complex))
        m = C.shape[0]
        if C.shape != (m, m) or R.shape != (m, m):
            raise InvalidCovariance("C and R must be square of equal size")
        scale = max(1.0, float(np.abs(C).max(initial=0)), float(np.abs(R).max(initial=0)))
        if np.abs(C - C.conj().T).max(initial=0) > 1e-10 * scale:
            raise InvalidCovariance("covariance is not Hermitian")
        if np.abs(R - R.T).max(initial=0) > 1e-10 * scale:
            raise InvalidCovariance("pseudo-covariance is not symmetric")
        self.C = 0.5 * (C + C.conj().T)
        self.R = 0.5 * (R + R.T)
        if np.abs(self.C - self.R).max(initial=0) <= 1e-14 * scale:
            L = _psd_factor(self.C.real)
            self.chol = np.vstack([L, np.zeros_like(L)])
        else:
            self.chol = _psd_factor(self.real_embedding())

    @property
    def dim(self):
        return self.C.shape[0]

    @classmethod
    def from_tensors(cls, G, Ghat):
        """Law of ``vec(B)`` from the tensors ``E(B_ij B_kl)`` and ``E(conj(B_ij) B_kl)``."""
        m = G.shape[0] * G.shape[1]
        return cls(np.asarray(Ghat).reshape(m, m).conj(), np.asarray(G).reshape(m, m))

    def real_embedding(self):
        C, R = self.C, self.R
        top = np.hstack([0.5 * (C + R).real, 0.5 * (R - C).imag])
        bot = np.hstack([0.5 * (C + R).imag, 0.5 * (C - R).real])
        return np.vstack([top, bot])

    def sample(self, rng, size=(), dt=1.0):
        """Draws of shape ``size + (m,)`` scaled to covariance ``dt C``."""
        rng = _rng(rng)
        size = (size,) if np.isscalar(size) else tuple(size)
        k = self.chol.shape[1]
        xi = rng.standard_normal(size + (k,))
        y = np.sqrt(dt) * (xi @ self.chol.T)
        m = self.dim
        return y[..., :m] + 1j * y[..., m:]


def _psd_factor(S):
    S = 0.5 * (S + S.T)
    w, Q = np.linalg.eigh(S)
    if w.size and w.min() < -PSD_FLOOR * max(1.0, abs(w).max()):
        raise InvalidCovariance(f"covariance has eigenvalue {w.min():.3g} below the floor")
    keep = w > PSD_FLOOR * max(1.0, abs(w).max(initial=0)) * 1e-6
    return Q[:, keep] * np.sqrt(w[keep])


def sample_increment(spec, dt, rng_stream, size=()):
    """Matrix increment with ``E(D^T M D) = g(M) dt`` and ``E(D* M D) = ghat(M) dt``."""
    d = int(round(np.sqrt(spec.dim)))
    x = spec.sample(rng_stream, size, dt)
    return x.reshape(x.shape[:-1] + (d, d))


# ---------------------------------------------------------------------------
# linear maps on matrices


def tensor_apply(T, M):
    return np.einsum("caeb,...ce->...ab", T, M)


def map_to_tensor(f, rows, cols):
    """Probe a linear map on ``rows x cols`` matrices with unit matrices."""
    out = None
    for c in range(rows):
        for e in range(cols):
            E = np.zeros((rows, cols), dtype=complex)
            E[c, e] = 1.0
            img = np.asarray(f(E))
            if out is None:
                out = np.zeros((rows, img.shape[0], cols, img.shape[1]), dtype=complex)
            out[c, :, e, :] = img
    return out


# ---------------------------------------------------------------------------
# group averages


def unitary_frame(U):
    """Eigenphases and unitary eigenvectors of a normal matrix."""
    U = np.atleast_2d(np.asarray(U, dtype=complex))
    if np.linalg.norm(U.conj().T @ U - np.eye(len(U))) > 1e-10:
        raise ValidationError("U is not unitary")
    if np.count_nonzero(U - np.diag(np.diag(U))) == 0:
        return np.angle(np.diag(U)), np.eye(len(U), dtype=complex)
    T, P = scipy.linalg.schur(U, output="complex")
    return np.angle(np.diag(T)), P


def detect_order(phases, N, max_denominator=10_000, tol=1e-10):
    """Smallest common order ``m <= N`` with ``exp(i m phi) = 1``, else None."""
    m = 1
    for p in np.asarray(phases, dtype=float):
        frac = Fraction(float(p / (2 * np.pi)) % 1.0).limit_denominator(max_denominator)
        m = lcm(m, frac.denominator)
        if m > N:
            return None
    if np.max(np.abs(np.exp(1j * m * np.asarray(phases)) - 1.0), initial=0.0) > tol:
        return None
    return m


def haar_meta(phases, N=100_000, method="auto"):
    if method == "chi":
        return {"method": "chi", "tol": 1e-9}
    if method == "ergodic":
        return {"method": "ergodic", "N": int(N)}
    m = detect_order(phases, N)
    if m is not None:
        return {"method": "finite", "order": int(m)}
    return {"method": "ergodic", "N": int(N)}


def character_average(theta, meta):
    """Average of ``exp(-i k theta)`` over the group as described by ``meta``."""
    theta = np.asarray(theta, dtype=float)
    w = np.exp(-1j * theta)
    if meta["method"] == "chi":
        return selector(w, meta.get("tol", 1e-9)).astype(complex)
    N = meta["order"] if meta["method"] == "finite" else meta["N"]
    one = np.abs(1.0 - w) < 1e-13
    wN = np.exp(-1j * np.fmod(N * theta, 2 * np.pi))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        geo = w * (1.0 - wN) / (N * (1.0 - w))
    return np.where(one, 1.0 + 0j, geo)


def group_elements(U, ks):
    """Stack of ``U^{-k}`` for the integers ``ks``."""
    phi, P = unitary_frame(U)
    ph = np.exp(-1j * np.fmod(np.outer(ks, phi), 2 * np.pi))
    return np.einsum("ij,kj,lj->kil", P, ph, P.conj())


def _integrand(U, poly, aux):
    U = np.asarray(U, dtype=complex)
    Us = U.conj().T
    if poly == "drift":
        W = np.asarray(aux, dtype=complex)
        return lambda u: u @ W @ Us @ _h(u)
    if poly == "g":
        H, M = aux
        return lambda u: u.conj() @ U.conj() @ tensor_apply(H, np.swapaxes(u, -1, -2) @ M @ u) @ Us @ _h(u)
    if poly == "ghat":
        Hc, M = aux
        return lambda u: u @ U @ tensor_apply(Hc, _h(u) @ M @ u) @ Us @ _h(u)
    raise ValueError(f"unknown integrand {poly!r}")


def _h(u):
    return np.swapaxes(u.conj(), -1, -2)


def haar_average(U, poly, aux=None, N=100_000, chunk=4096, return_meta=False):
    """Average of ``p(u)`` over the closure of the powers of ``U``.

    ``poly`` is ``"drift"`` (``u W U* u*``, aux ``W``), ``"g"``
    (``conj(u U) h(u^T M u) U* u*``, aux ``(H, M)``), ``"ghat"``
    (``u U ghat(u* M u) U* u*``, aux ``(Hc, M)``) or a callable acting on a
    stack of group elements.  A detected finite order ``m <= N`` gives the
    exact mean over ``m`` elements, otherwise the ergodic mean over ``N``.
    """
    f = poly if callable(poly) else _integrand(U, poly, aux)
    phi, _ = unitary_frame(U)
    meta = haar_meta(phi, N)
    count = meta.get("order", meta.get("N"))
    total = None
    for start in range(1, count + 1, chunk):
        ks = np.arange(start, min(start + chunk, count + 1))
        val = np.asarray(f(group_elements(U, ks))).sum(axis=0)
        total = val if total is None else total + val
    out = total / count
    return (out, meta) if return_meta else out


# ---------------------------------------------------------------------------
# coefficients


@dataclass
class SDECoefficients:
    V: np.ndarray
    G: np.ndarray
    Ghat: np.ndarray
    haar_meta: dict = field(default_factory=dict)

    @property
    def d1(self):
        return self.V.shape[0]

    def g(self, M):
        return tensor_apply(self.G, M)

    def ghat(self, M):
        return tensor_apply(self.Ghat, M)

    def gaussian(self):
        return ComplexGaussianSpec.from_tensors(self.G, self.Ghat)

    def check(self, tol=1e-10):
        """Symmetry and positivity diagnostics; raises InvalidCovariance on failure."""
        m = self.d1**2
        Gm = self.G.reshape(m, m)
        Hm = self.Ghat.reshape(m, m)
        if np.abs(Gm - Gm.T).max(initial=0) > tol or np.abs(Hm - Hm.conj().T).max(initial=0) > tol:
            raise InvalidCovariance("covariance tensors lack their symmetries")
        if m and np.linalg.eigvalsh(0.5 * (Hm + Hm.conj().T)).min() < -PSD_FLOOR:
            raise InvalidCovariance("Ghat is not positive semidefinite")
        self.gaussian()
        return True

    def to_dict(self):
        def enc(a):
            a = np.asarray(a)
            return np.stack([a.real, a.imag], axis=-1).tolist()
        return {"d1": self.d1, "V": enc(self.V), "G": enc(self.G), "Ghat": enc(self.Ghat),
                "haar_meta": dict(self.haar_meta)}

    @classmethod
    def from_dict(cls, data):
        def dec(x):
            a = np.asarray(x, dtype=float)
            return a[..., 0] + 1j * a[..., 1]
        return cls(dec(data["V"]), dec(data["G"]), dec(data["Ghat"]), dict(data.get("haar_meta", {})))


def effective_drift(spectrum, noise):
    """``W11 - E(V12 Gamma2 V21)`` from the declared second moments."""
    d0, d1 = spectrum.d0, spectrum.d1
    I1 = slice(d0, d0 + d1)
    I2 = slice(d0 + d1, spectrum.dim)
    W = noise.W[I1, I1].copy()
    if spectrum.d2:
        W -= np.einsum("pq,apqb->ab", spectrum.Gamma2, noise.M2[I1, I2, I2, I1])
    return W


def _average_tensors(H, Hc, U1, U2, meta, scale=1.0):
    """``g`` and ``ghat`` tensors for the (possibly distinct) blocks ``U1``, ``U2``."""
    phi1, P1 = unitary_frame(U1)
    phi2, P2 = unitary_frame(U2)
    L1, L2 = np.exp(1j * phi1), np.exp(1j * phi2)
    n1, n2 = len(phi1), len(phi2)

    Ht = map_to_tensor(lambda N: P1.T @ tensor_apply(H, P1.conj() @ N @ P2.conj().T) @ P2, n1, n2)
    Hct = map_to_tensor(lambda N: P1.conj().T @ tensor_apply(Hc, P1 @ N @ P2.conj().T) @ P2, n1, n2)
    c, a, e, b = np.ix_(np.arange(n1), np.arange(n1), np.arange(n2), np.arange(n2))
    # u = U1^-k has diagonal exp(-i k phi1); v likewise for U2
    th_g = phi1[c] + phi2[e] - phi1[a] - phi2[b]
    th_gh = phi1[a] - phi1[c] + phi2[e] - phi2[b]
    Gt = Ht * np.conj(L1[a] * L2[b]) * character_average(th_g, meta) / scale
    Ght = Hct * L1[a] * np.conj(L2[b]) * character_average(th_gh, meta) / scale
    G = map_to_tensor(lambda M: P1.conj() @ tensor_apply(Gt, P1.T @ M @ P2) @ P2.conj().T, n1, n2)
    Gh = map_to_tensor(lambda M: P1 @ tensor_apply(Ght, P1.conj().T @ M @ P2) @ P2.conj().T, n1, n2)
    return G, Gh


def compute_coefficients(spectrum, noise, N=100_000, method="auto"):
    """Drift and covariance tensors of the limit SDE (moments only, no sampling).

    ``method``: ``"auto"`` (finite order if detected, else ergodic mean over
    ``N`` powers), ``"ergodic"`` or ``"chi"`` (exact selector).
    """
    d0, d1 = spectrum.d0, spectrum.d1
    I1 = slice(d0, d0 + d1)
    U = spectrum.U
    phi, P = unitary_frame(U)
    meta = haar_meta(phi, N, method)
    W = effective_drift(spectrum, noise)
    Wt = P.conj().T @ W @ P
    a, b = np.ix_(np.arange(d1), np.arange(d1))
    Vt = Wt * np.exp(-1j * phi)[b] * character_average(phi[a] - phi[b], meta)
    V = P @ Vt @ P.conj().T
    H = noise.M2[I1, I1, I1, I1]
    Hc = noise.M2c[I1, I1, I1, I1]
    G, Gh = _average_tensors(H, Hc, U, U, meta)
    coeffs = SDECoefficients(V, G, Gh, meta)
    coeffs.check(tol=1e-8)
    return coeffs


@dataclass(frozen=True)
class MagnitudeBlock:
    """Coordinates ``indices`` of an eigenspace of ``T0`` with ``T0 = c U`` there."""

    indices: tuple
    c: float
    U: np.ndarray


def cross_coefficients(block_c, block_cprime, noise, N=100_000, method="auto"):
    """Cross tensors ``G_cc'``, ``Ghat_cc'`` between two magnitude blocks."""
    I = np.asarray(block_c.indices)
    J = np.asarray(block_cprime.indices)
    H = noise.M2[np.ix_(I, I, J, J)]
    Hc = noise.M2c[np.ix_(I, I, J, J)]
    phi1, _ = unitary_frame(block_c.U)
    phi2, _ = unitary_frame(block_cprime.U)
    meta = haar_meta(np.concatenate([phi1, phi2]), N, method)
    return _average_tensors(H, Hc, block_c.U, block_cprime.U, meta, scale=block_c.c * block_cprime.c)


# ---------------------------------------------------------------------------
# paths


@dataclass
class SDEPath:
    times: np.ndarray
    values: np.ndarray
    dt: float
    seed: Optional[int] = None

    @property
    def final(self):
        return self.values[-1]

    def to_rows(self, path=0):
        vals = self.values[:, path]
        flat = vals.reshape(len(self.times), -1)
        header = ["t"] + [f"L_{i}_{part}" for i in range(flat.shape[1]) for part in ("re", "im")]
        rows = [[float(t)] + [v for c in row for v in (c.real, c.imag)] for t, row in zip(self.times, flat)]
        return header, rows


def _grid(t_final, dt):
    n = int(round(t_final / dt))
    if n < 1 or abs(n * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValidationError("t_final must be a positive multiple of dt")
    return n


def _keep(n, retain):
    if retain is None or retain >= n + 1:
        return np.arange(n + 1)
    return np.unique(np.round(np.linspace(0, n, max(retain, 2))).astype(int))


def integrate_linear(drift, increment, d, t_final, dt, n_paths, retain=None, x0=None, scheme="em",
                     seed=None):
    """Integrate ``dL = drift L dt + dN L`` from ``L_0 = I`` (or ``x0``).

    ``increment(k)`` returns the noise increments ``(n_paths, d, d)`` of step ``k``;
    ``drift`` is a ``(d, d)`` matrix or a stack matching ``n_paths``.
    ``scheme="expm"`` uses ``L <- expm(drift dt + dN - C dt/2) L`` with the
    Ito correction ``C = E(dN dN)/dt`` supplied through ``increment.correction``.
    """
    n = _grid(t_final, dt)
    keep = _keep(n, retain)
    L = np.broadcast_to(np.eye(d, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex),
                        (n_paths,) + ((d, d) if x0 is None else np.shape(x0))).copy()
    out = np.empty((len(keep),) + L.shape, dtype=complex)
    slot = 0
    if keep[0] == 0:
        out[0] = L
        slot = 1
    corr = getattr(increment, "correction", None)
    for k in range(1, n + 1):
        dN = increment(k)
        if scheme == "em":
            L = L + (drift * dt + dN) @ L
        elif scheme == "expm":
            gen = drift * dt + dN
            if corr is not None:
                gen = gen - 0.5 * corr * dt
            L = scipy.linalg.expm(gen) @ L
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        if slot < len(keep) and keep[slot] == k:
            out[slot] = L
            slot += 1
    return SDEPath(keep * dt, out, dt, seed)


def euler_maruyama(coeffs, t_final=1.0, dt=1e-3, rng_stream=None, n_paths=1, retain=None):
    """Euler-Maruyama for ``dL = V L dt + dB L``, ``L_0 = I``; values ``(K, n_paths, d1, d1)``."""
    rng = _rng(rng_stream)
    spec = coeffs.gaussian()
    d = coeffs.d1

    def inc(k):
        return sample_increment(spec, dt, rng, (n_paths,))

    return integrate_linear(coeffs.V, inc, d, t_final, dt, n_paths, retain,
                            seed=rng_stream if isinstance(rng_stream, int) else None)


def em_second_moment(V, G, Ghat, t_final, dt):
    """Exact ``E(L_t (x) conj(L_t))`` and ``E(L_t (x) L_t)`` of the Euler scheme for scalar ``d1 = 1``."""
    n = _grid(t_final, dt)
    v, g, gh = complex(np.ravel(V)[0]), complex(np.ravel(G)[0]), complex(np.ravel(Ghat)[0])
    m2 = ((1 + v * dt) ** 2 + g * dt) ** n
    m2c = (abs(1 + v * dt) ** 2 + gh.real * dt) ** n
    return m2, m2c


# ---------------------------------------------------------------------------
# Anderson strip SDE


def potential_moments(channel):
    """``E(Ve_ij Ve_kl)`` and ``E(conj(Ve_ij) Ve_kl)`` for the elliptic block of the rotated potential."""
    Oe = channel.O[:, channel.d_h:]
    s2 = channel.strip.variance
    EVV = s2 * np.einsum("mi,mj,mk,ml->ijkl", Oe.conj(), Oe, Oe.conj(), Oe)
    EcVV = s2 * np.einsum("mi,mj,mk,ml->ijkl", Oe, Oe.conj(), Oe.conj(), Oe)
    return EVV, EcVV


@dataclass
class AndersonNoise:
    """Joint Gaussian law of the increments of ``(A, B, C)``."""

    d_e: int
    spec: ComplexGaussianSpec
    real_symmetric: bool

    def sample(self, rng, size=(), dt=1.0):
        size = (size,) if np.isscalar(size) else tuple(size)
        x = self.spec.sample(rng, size, dt)
        n = self.d_e
        A, B, C = (x[..., i * n * n:(i + 1) * n * n].reshape(size + (n, n)) for i in range(3))
        A = 0.5 * (A + _h(A))
        C = 0.5 * (C + _h(C))
        if self.real_symmetric:
            C = A.conj()
            B = 0.5 * (B + np.swapaxes(B, -1, -2))
        return A, B, C


def anderson_noise(channel, real_symmetric=False, tol=1e-9):
    """Covariance of ``(A, B, C)`` assembled from the selector tables."""
    z = channel.z_list
    n = channel.d_e
    EVV, EcVV = potential_moments(channel)
    zi, zj, zk, zl = np.ix_(z, z, z, z)
    c = np.conj

    def chi(w):
        return selector(w, tol)

    PAA = EVV * chi(c(zi) * zj * c(zk) * zl)
    PAC = EVV * chi(zi * c(zj) * c(zk) * zl)
    PAB = EVV * chi(zi * c(zj) * zk * zl)
    PCB = EVV * chi(c(zi) * zj * zk * zl)
    PBB = EVV * chi(zi * zj * zk * zl)
    BcB = EcVV * chi(c(zi) * c(zj) * zk * zl)
    m = n * n

    def mat(T):
        return T.reshape(m, m)

    P = np.zeros((3 * m, 3 * m), dtype=complex)
    A_, B_, C_ = slice(0, m), slice(m, 2 * m), slice(2 * m, 3 * m)
    P[A_, A_] = mat(PAA)
    P[C_, C_] = mat(PAA)
    P[A_, C_] = mat(PAC)
    P[C_, A_] = mat(PAC).T
    P[A_, B_] = mat(PAB)
    P[B_, A_] = mat(PAB).T
    P[C_, B_] = mat(PCB)
    P[B_, C_] = mat(PCB).T
    P[B_, B_] = mat(PBB)

    # transpose permutation on vec indices, (i, j) -> (j, i)
    tr = np.arange(m).reshape(n, n).T.ravel()
    Cov = np.zeros_like(P)
    for cols in (A_, C_):
        Cov[:, cols] = P[:, cols][:, tr]
    Cov[B_, B_] = mat(BcB).conj()
    Cov[A_, B_] = P[A_, B_][tr].conj()
    Cov[C_, B_] = P[C_, B_][tr].conj()
    if real_symmetric and np.abs(channel.O.imag).max(initial=0) > 1e-14:
        raise ValidationError("real-symmetric reduction needs a real diagonalizer")
    return AndersonNoise(n, ComplexGaussianSpec(Cov, P), real_symmetric)


def anderson_drift(channel, eps, sigma):
    """``S diag(eps - sigma^2 Q, -eps + sigma^2 Q)``."""
    n = channel.d_e
    Q = channel.Qdrift
    D = np.zeros((2 * n, 2 * n), dtype=complex)
    D[:n, :n] = eps * np.eye(n) - sigma**2 * Q
    D[n:, n:] = -eps * np.eye(n) + sigma**2 * Q
    return channel.Smat @ D


def assemble_noise(channel, sigma, A, B, C):
    """``sigma S [[A, B], [-B*, -C]]`` for stacks of blocks."""
    top = np.concatenate([A, B], axis=-1)
    bot = np.concatenate([-_h(B), -C], axis=-1)
    s = np.diag(channel.Smat)
    return sigma * s[:, None] * np.concatenate([top, bot], axis=-2)


def anderson_increments(channel, sigma, n_steps, dt, rng_stream, n_paths=1, real_symmetric=False,
                        noise=None):
    """Increments ``(n_steps, n_paths, 2 d_e, 2 d_e)`` of ``sigma S [[A, B], [-B*, -C]]``."""
    rng = _rng(rng_stream)
    noise = anderson_noise(channel, real_symmetric) if noise is None else noise
    A, B, C = noise.sample(rng, (n_steps, n_paths), dt)
    return assemble_noise(channel, sigma, A, B, C)


def ito_correction(channel, sigma, real_symmetric=False, n_probe=None):
    """``E(dN dN)/dt`` of the assembled noise, computed from the covariance."""
    noise = anderson_noise(channel, real_symmetric)
    n = channel.d_e
    m = n * n
    R = noise.spec.R
    # E(X X) for X = S [[A, B], [-B*, -C]]: assemble from pseudo-covariances by linearity
    k = 2 * n
    basis = np.zeros((3 * m, k, k), dtype=complex)
    conjb = np.zeros((3 * m, k, k), dtype=complex)  # coefficients of conjugated variables
    for idx in range(m):
        i, j = divmod(idx, n)
        basis[idx, i, j] = 1.0                 # A_ij
        basis[m + idx, i, n + j] = 1.0         # B_ij
        conjb[m + idx, n + j, i] = -1.0        # -(B*)_ji = -conj(B_ij)
        basis[2 * m + idx, n + i, n + j] = -1.0  # -C_ij
    s = np.diag(channel.Smat)
    basis *= sigma * s[None, :, None]
    conjb *= sigma * s[None, :, None]
    Cov = noise.spec.C
    # E(x_a x_b), E(x_a conj x_b), E(conj x_a x_b), E(conj x_a conj x_b)
    EXX = (np.einsum("aij,bjk,ab->ik", basis, basis, R)
           + np.einsum("aij,bjk,ab->ik", basis, conjb, Cov)
           + np.einsum("aij,bjk,ab->ik", conjb, basis, Cov.conj())
           + np.einsum("aij,bjk,ab->ik", conjb, conjb, R.conj()))
    return EXX


def anderson_sde(channel, eps, sigma, t_final=1.0, dt=1e-3, rng_stream=None, real_symmetric=False,
                 n_paths=1, retain=None, increments=None, scheme="em"):
    """Integrate the strip limit SDE ``dL = S diag(eps - s^2 Q, -eps + s^2 Q) L dt + dN L``."""
    n_steps = _grid(t_final, dt)
    d = 2 * channel.d_e
    drift = anderson_drift(channel, eps, sigma)
    if increments is None:
        increments = anderson_increments(channel, sigma, n_steps, dt, rng_stream, n_paths, real_symmetric)
    increments = np.asarray(increments)

    def inc(k):
        return increments[k - 1]

    if scheme == "expm":
        inc.correction = ito_correction(channel, sigma, real_symmetric)
    return integrate_linear(drift, inc, d, t_final, dt, increments.shape[1], retain, scheme=scheme,
                            seed=rng_stream if isinstance(rng_stream, int) else None)


def goe_sde(channel, eps, sigma, t_final=1.0, dt=1e-3, rng_stream=None, n_paths=1, retain=None,
            increments=None, scheme="em"):
    """The strip SDE in the real-symmetric case (``C = conj(A)``, ``B^T = B``)."""
    return anderson_sde(channel, eps, sigma, t_final, dt, rng_stream, True, n_paths, retain,
                        increments, scheme)


def goe_limit_matrix(d_e, d, rng_stream=None, size=()):
    """``(d+1)^(-1/2) (K + b I)`` with ``Var K_ii = 5/4``, ``Var K_ij = 1``, ``b ~ N(0, 1)``."""
    rng = _rng(rng_stream)
    size = (size,) if np.isscalar(size) else tuple(size)
    X = rng.standard_normal(size + (d_e, d_e))
    K = np.triu(X, 1)
    K = K + np.swapaxes(K, -1, -2)
    diag = np.sqrt(1.25) * rng.standard_normal(size + (d_e,))
    b = rng.standard_normal(size)
    K = K + (diag + np.asarray(b)[..., None])[..., None] * np.eye(d_e)
    return K / np.sqrt(d + 1)


# ---------------------------------------------------------------------------
# band edge


def nilpotent(n):
    return np.eye(n, k=1)


def band_edge_sde(model, eps, t_final=1.0, dt=1e-3, rng_stream=None, x0=None, noise=True,
                  theta=0.0, n_paths=1, retain=None):
    """Companion system of ``x^(2d) = x B' + eps x`` by Euler-Maruyama.

    The increment enters row ``2d`` acting on the first coordinate; for
    ``theta != 0`` it is ``exp(-i theta) dB`` so that ``E(B_t^2) = exp(-2 i theta) t``.
    """
    rng = _rng(rng_stream)
    n = 2 * model.d
    drift = nilpotent(n).astype(complex)
    drift[n - 1, 0] += eps
    phase = np.exp(-1j * theta)

    def inc(k):
        out = np.zeros((n_paths, n, n), dtype=complex)
        if noise:
            out[:, n - 1, 0] = phase * np.sqrt(dt) * rng.standard_normal(n_paths)
        return out

    if x0 is not None:
        x0 = np.asarray(x0, dtype=complex).reshape(n, 1)
    return integrate_linear(drift, inc, n, t_final, dt, n_paths, retain, x0=x0,
                            seed=rng_stream if isinstance(rng_stream, int) else None)
