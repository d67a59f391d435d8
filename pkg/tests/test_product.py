import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.errors import RankDeficient, SingularPivot, SingularStart
from artifact.models import BlockSpectrum, NoiseModel, StripModel, decompose_channels
from artifact.product import (
    FlagSpectrum, Frame, _ql, conjugated_steps, default_start, flag_angles, init_state,
    principal_angles, propagate_flag, reduced_transfer, run_product, schur, step,
)


def cmat(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def spectrum(d0=1, d1=2, d2=1, seed=0):
    rng = np.random.default_rng(seed)
    G0 = np.diag(rng.uniform(0.2, 0.6, d0)) if d0 else np.zeros((0, 0))
    U = np.diag(np.exp(1j * rng.uniform(0, 2 * np.pi, d1))) if d1 else np.zeros((0, 0))
    G2 = np.diag(rng.uniform(0.2, 0.6, d2)) if d2 else np.zeros((0, 0))
    return BlockSpectrum(G0, U, G2)


def brute_pair(sp, noise, lam, steps, seed, X0=None):
    """Schur pair of RR^{-n} T_n ... T_1 X0 from the explicit product."""
    d = sp.dim
    full = np.eye(d, dtype=complex) if X0 is None else X0.astype(complex)
    T0 = sp.T0()
    for n in range(1, steps + 1):
        full = (T0 + lam * (noise.sample(seed, n) + lam * noise.W)) @ full
    RR = np.diag(Frame(sp).full_diag(-steps))
    return schur(RR @ full, sp.d2)


def test_schur_block_formula(rng):
    M = cmat(rng, 5, 5)
    X, Z = schur(M, 2)
    A, B, C, D = M[:3, :3], M[:3, 3:], M[3:, :3], M[3:, 3:]
    assert np.allclose(Z, B @ np.linalg.inv(D))
    assert np.allclose(X, A - B @ np.linalg.inv(D) @ C)
    assert np.allclose(np.linalg.inv(np.linalg.inv(M)[:3, :3]), X)


def test_schur_without_lower_block(rng):
    M = cmat(rng, 3, 3)
    X, Z = schur(M, 0)
    assert np.array_equal(X, M) and Z.shape == (3, 0)


def test_schur_singular_pivot():
    M = np.eye(3)
    M[2, 2] = 0.0
    with pytest.raises(SingularPivot):
        schur(M, 1)


@given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 3), d2=st.integers(1, 3))
def test_schur_invariant_under_lower_right_factors(seed, p, d2):
    rng = np.random.default_rng(seed)
    M = cmat(rng, p + d2, p + d2)
    K, L = cmat(rng, d2, p), cmat(rng, d2, d2)
    if np.linalg.cond(L) > 1e4 or np.linalg.cond(M[p:, p:]) > 1e4:
        return
    G = np.block([[np.eye(p), np.zeros((p, d2))], [K, L]])
    X, Z = schur(M, d2)
    X2, Z2 = schur(M @ G, d2)
    assert np.allclose(X, X2, atol=1e-8 * max(1, np.abs(X).max()))
    assert np.allclose(Z, Z2, atol=1e-8 * max(1, np.abs(Z).max()))


def test_frame_powers():
    sp = BlockSpectrum(np.zeros((0, 0)), np.diag(np.exp([0.3j, 1.1j])), np.zeros((0, 0)))
    f = Frame(sp)
    assert np.allclose(f.phases(7), np.exp(7j * np.array([0.3, 1.1])))
    # reduction keeps huge indices accurate
    assert np.allclose(f.phases(10**9), np.exp(1j * np.fmod(10**9 * np.array([0.3, 1.1]), 2 * np.pi)))


def test_frame_nondiagonal_unitary(rng):
    H = cmat(rng, 2, 2)
    U = scipy_expm(1j * (H + H.conj().T))
    sp = BlockSpectrum(np.array([[0.5]]), U, np.array([[0.3]]))
    f = Frame(sp)
    T = cmat(rng, 4, 4)
    RR = lambda n: np.block([[np.eye(1), np.zeros((1, 3))],
                             [np.zeros((2, 1)), np.linalg.matrix_power(U, n), np.zeros((2, 1))],
                             [np.zeros((1, 3)), np.eye(1)]])
    Uinv = np.linalg.inv(U)
    RRm = RR(1).copy()
    RRm[1:3, 1:3] = np.linalg.matrix_power(Uinv, 4)
    assert np.allclose(f.conjugate_step(4, T), RRm @ T @ RR(3), atol=1e-12)


def scipy_expm(A):
    import scipy.linalg
    return scipy.linalg.expm(A)


@pytest.mark.parametrize("dims", [(1, 2, 1), (2, 1, 0), (0, 2, 2), (1, 0, 1)])
def test_run_product_matches_explicit_product(dims):
    sp = spectrum(*dims, seed=sum(dims))
    d = sp.dim
    noise = NoiseModel.complex_gaussian(d, W=0.3 * np.eye(d))
    traj = run_product(sp, noise, 0.2, 12, seed=[4, 9], retain=None)
    for r, sd in enumerate([4, 9]):
        X, Z = brute_pair(sp, noise, 0.2, 12, sd)
        assert np.allclose(traj.X[-1, r], X, atol=1e-10)
        assert np.allclose(traj.Z[-1, r], Z, atol=1e-10)


def test_step_matches_run_product():
    sp = spectrum(1, 1, 1, seed=3)
    noise = NoiseModel.real_gaussian(3)
    st_ = init_state(np.eye(3), sp)
    for _ in range(30):
        st_ = step(st_, sp, noise, 0.1, seed=11)
    traj = run_product(sp, noise, 0.1, 30, seed=11, retain=2)
    assert np.allclose(st_.X, traj.X[-1, 0], atol=1e-12)
    assert np.allclose(st_.Z, traj.Z[-1, 0], atol=1e-12)


def test_batched_replicas_equal_single_runs():
    sp = spectrum(1, 2, 1, seed=1)
    noise = NoiseModel.complex_gaussian(4)
    many = run_product(sp, noise, 0.1, 300, seed=[1, 2, 3], retain=5)
    one = run_product(sp, noise, 0.1, 300, seed=2, retain=5)
    assert np.array_equal(many.X[:, 1], one.X[:, 0])


def test_singular_start():
    sp = spectrum(1, 1, 1)
    X0 = np.eye(3)
    X0[2, 2] = 0
    with pytest.raises(SingularStart):
        run_product(sp, NoiseModel.real_gaussian(3), 0.1, 3, X0_full=X0)


def test_unperturbed_pair_stays_fixed():
    sp = spectrum(1, 2, 1, seed=5)
    noise = NoiseModel.real_gaussian(4)
    traj = run_product(sp, noise, 0.0, 40, retain=None)
    # X_n = diag(Gamma0^n, 1) and Z stays zero
    assert np.allclose(traj.X[-1, 0], np.diag([sp.Gamma0[0, 0] ** 40, 1, 1]))
    assert np.abs(traj.Z).max() == 0


def test_reduced_transfer_matches_explicit_inverse():
    ch = decompose_channels(StripModel.zd(3, E=1.0))   # one hyperbolic and two elliptic channels
    assert ch.d_h == 1
    pots = ch.strip.sample_potential(2, 15)
    lam, eps, sigma = 0.3, 0.7, 1.0
    out = reduced_transfer(ch, lam, eps, sigma, 15, potentials=pots)
    full = default_start(ch).astype(complex)
    for T in conjugated_steps(ch, eps, sigma, lam, pots):
        full = T @ full
    p = ch.d_h + 2 * ch.d_e
    expected = np.linalg.inv(np.linalg.inv(full)[:p, :p])
    assert np.allclose(out, expected, atol=1e-9 * np.abs(expected).max())


# --- flags --------------------------------------------------------------


def test_ql_factorization(rng):
    F = cmat(rng, 4, 4)
    Q, L = _ql(F)
    assert np.allclose(Q @ L, F)
    assert np.allclose(np.triu(L, 1), 0)
    assert np.allclose(Q.conj().T @ Q, np.eye(4))


def test_flag_converges_without_noise():
    sp = FlagSpectrum.diagonal([1.0, 2.0])
    F0 = np.array([[1.0, 1.0], [0.0, 1.0]])
    st_ = propagate_flag(sp, NoiseModel.real_gaussian(2), 0.0, F0, 30)
    assert flag_angles(st_.F)[0] < 2.0**-29


@given(seed=st.integers(0, 1000), lam=st.floats(0, 0.3))
def test_flag_class_preserved(seed, lam):
    sp = FlagSpectrum((1.0, 1.5, 3.0), (np.eye(1), np.exp(0.4j) * np.eye(1), np.eye(1)))
    noise = NoiseModel.complex_gaussian(3)
    F0 = np.triu(np.random.default_rng(seed).standard_normal((3, 3))) + 2 * np.eye(3)
    n = 10
    out = propagate_flag(sp, noise, lam, F0, n, seed=seed)
    full = F0.astype(complex)
    for k in range(1, n + 1):
        full = (sp.T0() + lam * noise.sample(seed, k)) @ full
    Rn = np.diag(np.exp(-1j * n * np.angle(np.diag(sp.Rhat()))))
    full = Rn @ full
    for p in (1, 2):
        assert principal_angles(out.F[:, 3 - p:], full[:, 3 - p:]).max() < 1e-8


def test_principal_angles():
    I = np.eye(3)
    assert np.allclose(principal_angles(I[:, :2], I[:, [1, 0]]), 0)
    a = principal_angles(np.array([[1.0], [1.0], [0.0]]), I[:, :1])
    assert a[0] == pytest.approx(np.pi / 4)
    with pytest.raises(RankDeficient):
        principal_angles(np.array([[1.0, 2.0], [1.0, 2.0], [0, 0]]), I[:, :2])


def test_flag_spectrum_validation():
    with pytest.raises(ValueError):
        FlagSpectrum.diagonal([2.0, 1.0])
    with pytest.raises(ValueError):
        FlagSpectrum((1.0, 2.0), (np.eye(1), 2 * np.eye(1)))
