from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from artifact.errors import NoEllipticChannel, ParabolicChannel, ValidationError
from artifact.models import (
    BlockSpectrum, NoiseModel, StripModel, build_band_edge, build_goe_channel, build_transfer,
    channel_noise, conjugated_parts, conjugated_transfer, decompose_channels, is_chaotic,
    jordan_alpha, pascal_inverse_closed_form, symplectic_form, zd_basis,
)


def strip1(E, a=0.0):
    return StripModel(np.array([[a]]), E=E)


def admissible_energy(strip, E, margin=1e-3):
    a, _ = strip.eigensystem()
    return np.all(np.abs(np.abs(E - a) - 2) > margin)


# --- block spectra -------------------------------------------------------


def test_block_spectrum_rates():
    sp = BlockSpectrum(np.diag([0.5, 0.2]), np.eye(1), np.array([[0.25]]))
    assert (sp.d0, sp.d1, sp.d2) == (2, 1, 1)
    assert sp.gamma == pytest.approx(np.log(2))
    T0 = sp.T0()
    assert np.allclose(np.diag(T0), [0.5, 0.2, 1.0, 4.0])


@pytest.mark.parametrize("kw", [
    dict(Gamma0=np.array([[1.0]]), U=np.eye(1), Gamma2=np.zeros((0, 0))),
    dict(Gamma0=np.zeros((0, 0)), U=np.array([[1.0, 1.0], [0.0, 1.0]]), Gamma2=np.zeros((0, 0))),
    # spectral radius 0.5 but a large Jordan off-diagonal pushes the norm above 1
    dict(Gamma0=np.array([[0.5, 3.0], [0.0, 0.5]]), U=np.eye(1), Gamma2=np.zeros((0, 0))),
])
def test_block_spectrum_rejects(kw):
    with pytest.raises(ValidationError):
        BlockSpectrum(**kw)


# --- noise ----------------------------------------------------------------


def test_noise_is_pure_function_of_seed_and_index():
    nm = NoiseModel.real_gaussian(3)
    a = nm.samples(5, 250, 20)
    b = np.stack([nm.sample(5, n) for n in range(250, 270)])
    assert np.array_equal(a, b)
    assert not np.array_equal(nm.sample(5, 1), nm.sample(6, 1))


@pytest.mark.parametrize("maker,dist", [
    (NoiseModel.real_gaussian, "gaussian"),
    (NoiseModel.complex_gaussian, "gaussian"),
    (NoiseModel.real_gaussian, "rademacher"),
    (NoiseModel.complex_gaussian, "uniform"),
])
def test_noise_moments(maker, dist):
    nm = maker(2, distribution=dist)
    diag = nm.check_moments(seed=3, n_samples=100_000)
    assert diag["M2_max_z"] < 5 and diag["M2c_max_z"] < 5
    assert diag["M2c_min_eig"] >= -1e-10
    V = nm.samples(1, 1, 10_000).reshape(10_000, -1)
    assert np.all(np.abs(V.mean(0)) < 5 * V.std(0) / 100)


def test_noise_from_moments_round_trip(rng):
    X = rng.standard_normal((4, 3, 3)) + 1j * rng.standard_normal((4, 3, 3))
    ref = NoiseModel(X)
    nm = NoiseModel.from_moments(ref.M2, ref.M2c)
    assert np.allclose(nm.M2, ref.M2, atol=1e-12)
    assert np.allclose(nm.M2c, ref.M2c, atol=1e-12)


# --- strips and channels ---------------------------------------------------


def test_potential_moments():
    s = StripModel.zd(3, potential="uniform")
    v = s.sample_potential(9, 40_000).ravel()
    se = v.std() / np.sqrt(v.size)
    assert abs(v.mean()) < 5 * se
    # variance of the sample variance for uniform: (mu4 - 1)/N with mu4 = 9/5
    assert abs(v.var() - 1.0) < 5 * np.sqrt((1.8 - 1.0) / v.size)


def test_decompose_single_hyperbolic():
    ch = decompose_channels(strip1(2.5), require_elliptic=False)
    assert (ch.d_h, ch.d_e) == (1, 0)
    assert ch.gamma_list[0] == pytest.approx(0.5, abs=1e-15)


def test_decompose_two_elliptic():
    ch = decompose_channels(StripModel.zd(2, E=0.0))
    assert (ch.d_h, ch.d_e) == (0, 2)
    expected = {np.round(np.exp(2j * np.pi / 3), 12), np.round(np.exp(1j * np.pi / 3), 12)}
    assert set(np.round(ch.z_list, 12)) == expected


def test_parabolic_and_no_elliptic():
    with pytest.raises(ParabolicChannel):
        decompose_channels(strip1(2.0))
    with pytest.raises(NoEllipticChannel):
        decompose_channels(strip1(2.5))


@given(d=st.integers(1, 6), E=st.floats(-4.5, 4.5), r=st.floats(0.3, 1.5))
def test_channel_invariants(d, E, r):
    s = StripModel.zd(d, r=r, E=E)
    if not admissible_energy(s, E):
        return
    ch = decompose_channels(s, require_elliptic=False)
    c = E - ch.a
    g, z = ch.gamma_list, ch.z_list
    assert np.allclose(g + 1 / g, c[:ch.d_h], atol=1e-12)
    assert np.allclose(z + 1 / z, c[ch.d_h:], atol=1e-12)
    assert np.all(np.abs(g) < 1) and np.all(z.imag > 0)
    assert np.allclose(np.abs(z), 1, atol=1e-14)
    D = ch.Qinv @ ch.T_star() @ ch.Qmat
    assert np.linalg.norm(D - np.diag(ch.diagonal())) <= 1e-10
    assert np.linalg.norm(ch.Qmat @ ch.Qinv - np.eye(2 * d)) <= 1e-10


@given(d=st.integers(1, 5), E=st.floats(-4.0, 4.0), delta=st.floats(-1e-9, 1e-9))
def test_classification_stable_under_small_shifts(d, E, delta):
    s = StripModel.zd(d, E=E)
    if not admissible_energy(s, E, margin=1e-6):
        return
    a = decompose_channels(s, E, require_elliptic=False)
    b = decompose_channels(s, E + delta, require_elliptic=False)
    assert (a.d_h, a.d_e) == (b.d_h, b.d_e)
    assert np.array_equal(a.order, b.order)


def test_goe_channel_examples():
    ch = build_goe_channel(2, 0.0)
    assert ch.d_h == 0 and ch.q == 0.0
    ch = build_goe_channel(2, -1.5)
    assert np.allclose(ch.a, [1.0, -1.0])
    assert ch.gamma_list[0] == pytest.approx(-0.5)
    # the drift is computed from exact moments of the rotated potential
    assert ch.q == pytest.approx(-1.0 / 3.0, abs=1e-12)


@pytest.mark.parametrize("d", [2, 5, 20, 50])
def test_sine_basis_orthogonal(d):
    O = zd_basis(d)
    assert np.linalg.norm(O.T @ O - np.eye(d)) <= 1e-12


@pytest.mark.parametrize("d", range(2, 21))
def test_sine_basis_fourth_moments(d):
    O = zd_basis(d)
    P = O**2
    G = (d + 1) * P.T @ P
    i, j = np.indices((d, d))
    expected = 1 + 0.5 * (i == j) + 0.5 * (i + j == d - 1)
    assert np.allclose(G, expected, atol=1e-12)


# --- transfer matrices ------------------------------------------------------


def test_build_transfer_examples():
    assert np.array_equal(build_transfer(strip1(0.0), 0.0, 0.0, [0.0]), [[0, -1], [1, 0]])
    assert np.array_equal(build_transfer(strip1(2.0), 2.0, 1.0, [0.5]), [[1.5, -1], [1, 0]])


@given(d=st.integers(1, 5), E=st.floats(-4, 4), lam=st.floats(0, 2), seed=st.integers(0, 2**32))
def test_transfer_symplectic(d, E, lam, seed):
    s = StripModel.zd(d, E=E)
    v = np.random.default_rng(seed).standard_normal(d)
    T = build_transfer(s, E, lam, v)
    J = symplectic_form(d)
    assert np.allclose(T.conj().T @ J @ T, J, atol=1e-12)
    assert abs(np.linalg.det(T) - 1) < 1e-12 * max(1.0, np.abs(T).max() ** (2 * d))


def test_conjugated_transfer_at_zero_coupling():
    ch = decompose_channels(StripModel.zd(3, E=0.7))
    out = conjugated_transfer(ch, 1.3, 0.4, 0.0, np.ones(3))
    assert np.allclose(out, np.diag(ch.diagonal()), atol=1e-12)


@given(E=st.floats(-1.9, 1.9), lam=st.floats(0, 0.5), eps=st.floats(-3, 3), sigma=st.floats(0, 2),
       seed=st.integers(0, 2**32))
def test_conjugated_transfer_round_trip(E, lam, eps, sigma, seed):
    s = StripModel.zd(2, E=E)
    if not admissible_energy(s, E):
        return
    ch = decompose_channels(s)
    v = np.random.default_rng(seed).standard_normal(2)
    out = conjugated_transfer(ch, eps, sigma, lam, v)
    back = ch.Qmat @ out @ ch.Qinv
    # channel coordinates: psi -> O^T psi
    O = ch.O
    Ob = np.kron(np.eye(2), O)
    T = build_transfer(s, E + lam**2 * eps, lam * sigma, np.diag(v))
    assert np.allclose(Ob @ back @ Ob.T, T, atol=1e-10)


def test_conjugated_energy_direction():
    ch = decompose_channels(StripModel.zd(2, E=0.0))
    out = conjugated_transfer(ch, 1.0, 0.0, 0.1, np.zeros(2))
    Qi = np.linalg.inv(ch.Qmat)
    P1 = np.zeros((4, 4))
    P1[:2, :2] = np.eye(2)
    W = Qi @ P1 @ ch.Qmat
    assert np.allclose(out, np.diag(ch.diagonal()) + 0.01 * W, atol=1e-12)
    _, W2 = conjugated_parts(ch)
    assert np.allclose(W2, W, atol=1e-12)


def test_channel_noise_scaling():
    ch = decompose_channels(StripModel.zd(3, E=0.2))
    nm = channel_noise(ch, eps=0.5, sigma=2.0)
    V, W = conjugated_parts(ch)
    assert np.allclose(nm.basis, 2.0 * V)
    assert np.allclose(nm.W, 0.5 * W)


# --- chaoticity --------------------------------------------------------------


def test_chaotic_examples():
    ok, witness = is_chaotic([1j, 1j])
    assert not ok and witness[:4] == (0, 0, 0, 0)
    assert is_chaotic([np.exp(1j * np.pi / 4)]) == (True, None)
    assert is_chaotic([np.exp(1j), np.exp(1j * np.sqrt(2))])[0]


@given(phases=st.lists(st.floats(0.05, 3.1), min_size=1, max_size=4), seed=st.integers(0, 100))
def test_chaotic_permutation_invariant(phases, seed):
    z = np.exp(1j * np.array(phases))
    perm = np.random.default_rng(seed).permutation(len(z))
    assert is_chaotic(z)[0] == is_chaotic(z[perm])[0]


# --- band edge -----------------------------------------------------------------


def test_band_edge_d1():
    be = build_band_edge(1)
    assert be.T.tolist() == [[2, -1], [1, 0]]
    assert be.M.tolist() == [[1, 1], [1, 0]]
    assert be.MTM.tolist() == [[1, 1], [0, 1]]


@pytest.mark.parametrize("d", range(1, 9))
def test_band_edge_exact(d):
    be = build_band_edge(d)
    n = 2 * d
    J = np.eye(n, dtype=int) + np.eye(n, k=1, dtype=int)
    assert (be.MTM == J).all()
    from artifact.models import _int_matmul
    assert (_int_matmul(be.M, be.Minv) == np.eye(n, dtype=int)).all()
    msm = be.MSM
    expected_last = [comb(d, k - 1) if k <= d + 1 else 0 for k in range(1, n + 1)]
    assert list(msm[n - 1]) == expected_last
    assert not msm[: n - 1].any()
    assert be.alpha == Fraction(2, 4 * d - 1) == be.alpha_jordan


@pytest.mark.parametrize("d", range(1, 9))
def test_pascal_inverse_sign(d):
    be = build_band_edge(d)
    assert (pascal_inverse_closed_form(d, sign_shift=1) == be.Minv).all()
    assert (pascal_inverse_closed_form(d, sign_shift=0) == -be.Minv).all()


def test_jordan_alpha():
    assert jordan_alpha(1) == 2
    assert jordan_alpha(2) == Fraction(2, 3)
