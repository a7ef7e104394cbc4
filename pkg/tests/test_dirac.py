import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qflat.dirac import (
    SCHEMES,
    accel_applicable,
    continuum_dirac_bessel,
    continuum_dirac_fd,
    continuum_dirac_schwinger,
    dense_dirac_oracle,
    dirac_operator_matrix,
    dirac_symbol,
    doubling_count,
    kappa_rho,
    lattice_dirac_propagator,
    massless_symbol,
    momentum_inverse_analytic,
    momentum_inverse_direct,
    normalized_K,
    partner_matrix,
)
from qflat.lattice import GAMMA_E, LatticeError, make_lattice, momentum_symbol_q
from qflat.scalar import AdmissibilityError, site_index


def _momenta(p):
    return [np.array(k) * p.eta for k in itertools.product(p.indices, repeat=4)]


def _random_momentum(rng, p):
    return rng.choice(p.indices, size=4) * p.eta


def test_zero_momentum():
    p = make_lattice(2, 2)
    S = dirac_symbol(np.zeros(4), 1.7, p).matrix
    assert np.array_equal(S, 1.7 * np.eye(4))
    np.testing.assert_allclose(momentum_inverse_analytic(np.zeros(4), 1.7, p), np.eye(4) / 1.7, atol=1e-15)
    kr = kappa_rho(np.zeros(4), 1.7, p)
    assert kr.kappa == pytest.approx(1.7 ** 2) and kr.rho == 0.0


def test_symbol_is_forward_backward_difference_operator():
    p = make_lattice(1, 2)
    rng = np.random.default_rng(1)
    for _ in range(10):
        k = _random_momentum(rng, p)
        np.testing.assert_allclose(
            dirac_symbol(k, 0.7, p).matrix, massless_symbol("forward_backward", k, p, 0.7), atol=1e-14
        )


def test_partner_diagonalises():
    p = make_lattice(2, 2)
    rng = np.random.default_rng(2)
    for _ in range(50):
        k = _random_momentum(rng, p)
        kr = kappa_rho(k, 1.0, p)
        prod = dirac_symbol(k, 1.0, p).matrix @ partner_matrix(k, 1.0, p)
        z = np.zeros((2, 2))
        np.testing.assert_allclose(prod, np.block([[kr.K, z], [z, kr.Kbar]]), atol=1e-12)


def test_kappa_rho_structure():
    p = make_lattice(2, 3)
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = _random_momentum(rng, p)
        q = momentum_symbol_q(k, p)
        kr = kappa_rho(k, 1.3, p)
        assert kr.rho <= np.sum(np.abs(q[1:]) ** 2) / math.sqrt(2) + 1e-12
        np.testing.assert_allclose(kr.K, kr.kappa * np.eye(2) + 2j * kr.E, atol=1e-13)
        np.testing.assert_allclose(kr.K, kr.K.conj().T, atol=1e-13)
        np.testing.assert_allclose(np.sort(np.abs(np.linalg.eigvals(kr.E))), [kr.rho, kr.rho], atol=1e-12)
        np.testing.assert_allclose(np.linalg.eigvalsh(kr.K), [kr.kappa - 2 * kr.rho, kr.kappa + 2 * kr.rho],
                                   atol=1e-12)
        assert kr.kappa ** 2 + 4 * kr.rho ** 2 > 0


def test_normalized_K_singular_values():
    # K is Hermitian with eigenvalues kappa +- 2 rho, so the normalised matrix is unitary only when rho = 0
    p = make_lattice(2, 2)
    rng = np.random.default_rng(4)
    for _ in range(20):
        k = _random_momentum(rng, p)
        kr = kappa_rho(k, 1.0, p)
        sv = np.linalg.svd(normalized_K(k, 1.0, p), compute_uv=False)
        n = math.hypot(kr.kappa, 2 * kr.rho)
        np.testing.assert_allclose(np.sort(sv), sorted([abs(kr.kappa - 2 * kr.rho) / n, (kr.kappa + 2 * kr.rho) / n]),
                                   atol=1e-12)


@pytest.mark.parametrize("M,N", [(1, 1), (1, 2), (2, 1), (2, 2)])
def test_analytic_inverse_everywhere(M, N):
    p = make_lattice(M, N)
    for k in _momenta(p):
        inv = momentum_inverse_analytic(k, 1.0, p)
        assert np.max(np.abs(inv @ dirac_symbol(k, 1.0, p).matrix - np.eye(4))) < 1e-12
        assert np.max(np.abs(inv - momentum_inverse_direct(k, 1.0, p))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 5.0), st.lists(st.floats(-math.pi, math.pi), min_size=4, max_size=4))
def test_analytic_inverse_off_lattice_momenta(mt, theta):
    # the algebra holds for any momentum, not only dual-lattice points
    p = make_lattice(2, 1)
    k = np.array(theta) / p.delta
    inv = momentum_inverse_analytic(k, mt, p)
    S = dirac_symbol(k, mt, p).matrix
    scale = max(1.0, np.linalg.cond(S))
    assert np.max(np.abs(inv @ S - np.eye(4))) < 1e-13 * scale


def test_mass_checks():
    p = make_lattice(1, 1)
    with pytest.raises(AdmissibilityError):
        dirac_symbol(np.zeros(4), 0.0, p)
    with pytest.raises(AdmissibilityError):
        lattice_dirac_propagator(p, -1.0, (0, 0, 0, 0))


# --- position space ----------------------------------------------------------------


def test_propagator_methods_agree():
    p = make_lattice(2, 2)
    assert accel_applicable(p, 1.0)
    for x in [(0, 0, 0, 0), (1, 0, 0, 0), (-1, 2, 0, 1), (4, -3, 2, 1)]:
        d = lattice_dirac_propagator(p, 1.0, x, "direct")
        a = lattice_dirac_propagator(p, 1.0, x, "accel")
        n = lattice_dirac_propagator(p, 1.0, x, inverse="direct")
        scale = np.max(np.abs(d))
        assert np.max(np.abs(d - a)) < 1e-12 * scale
        assert np.max(np.abs(d - n)) < 1e-12 * scale


def test_accel_falls_back_for_large_mass():
    p = make_lattice(1, 1)
    assert not accel_applicable(p, 1.0)
    a = lattice_dirac_propagator(p, 1.0, (1, 0, 0, 0), "accel")
    d = lattice_dirac_propagator(p, 1.0, (1, 0, 0, 0), "direct")
    assert np.array_equal(a, d)


def test_dense_oracle_matches_momentum_sum():
    p = make_lattice(1, 1)
    dense = dense_dirac_oracle(p, 1.0)
    o = site_index((0, 0, 0, 0), p)
    for k in itertools.product(p.indices, repeat=4):
        i = site_index(k, p)
        blk = dense[4 * i:4 * i + 4, 4 * o:4 * o + 4]
        mom = lattice_dirac_propagator(p, 1.0, k)
        assert np.max(np.abs(blk - mom)) < 1e-10 * np.max(np.abs(mom))


def test_dense_operator_is_translation_invariant():
    p = make_lattice(1, 1)
    D = dirac_operator_matrix(p, 0.5)
    a = site_index((0, 0, 0, 0), p)
    b = site_index((1, 0, 1, 1), p)
    sh = site_index((1, 1, 0, 0), p)
    sh2 = site_index((0, 1, 1, 1), p)
    np.testing.assert_array_equal(D[4 * a:4 * a + 4, 4 * sh:4 * sh + 4], D[4 * b:4 * b + 4, 4 * sh2:4 * sh2 + 4])
    with pytest.raises(LatticeError):
        dirac_operator_matrix(make_lattice(2, 2), 1.0)


# --- continuum ---------------------------------------------------------------------


@pytest.mark.parametrize("x", [(1.0, 0.3, 0, 0), (0.5, -0.2, 0.4, 0.1), (-0.8, 0, 0, 0.6)])
def test_continuum_dirac_quadrature_vs_bessel(x):
    a = continuum_dirac_schwinger(1.0, x, "gl")
    b = continuum_dirac_schwinger(1.0, x, "quadpack")
    c = continuum_dirac_bessel(1.0, x)
    scale = np.max(np.abs(c))
    assert np.max(np.abs(a - b)) < 1e-8 * scale
    assert np.max(np.abs(a - c)) < 1e-12 * scale


def test_continuum_dirac_finite_difference():
    x = (1.0, 0.3, 0.0, 0.0)
    a = continuum_dirac_schwinger(1.0, x)
    fd = continuum_dirac_fd(1.0, x, h=1e-4)
    assert np.max(np.abs(a - fd)) < 1e-6


def test_continuum_dirac_complex_time_is_bessel_continuation():
    x = np.array([0.4 + 0.9j, 0.2, 0.0, -0.3])
    a = continuum_dirac_schwinger(1.2, x)
    b = continuum_dirac_bessel(1.2, x)
    assert np.max(np.abs(a - b)) < 1e-10 * np.max(np.abs(b))


def test_continuum_dirac_hermitian_and_parity():
    x = np.array([0.7, 0.2, -0.1, 0.3])
    a = continuum_dirac_bessel(1.0, x)
    np.testing.assert_allclose(a, a.conj().T, atol=1e-15)
    g0 = GAMMA_E[0]
    np.testing.assert_allclose(g0 @ a @ g0, continuum_dirac_bessel(1.0, x * [1, -1, -1, -1]), atol=1e-15)


def test_continuum_dirac_rejects_equal_time():
    with pytest.raises(AdmissibilityError):
        continuum_dirac_schwinger(1.0, (0.0, 1.0, 0, 0))


# --- doubling ----------------------------------------------------------------------


@pytest.mark.parametrize("M", [2, 4])
def test_central_scheme_has_sixteen_zero_modes(M):
    assert doubling_count("central", make_lattice(M, M)) == 16


def test_forward_backward_extra_zero_modes():
    # at p0 = 0 the block sigma.q has det -sum q_j^2, and q_j^2 = 4 sin^2(t/2) e^{-it}/delta^2
    # cancels between two axes at (t_i, t_j) = (pi/2, -pi/2): six momenta for even L
    p = make_lattice(2, 2)
    assert doubling_count("forward_backward", p) == 7
    k = np.array([0.0, math.pi / 2, -math.pi / 2, 0.0]) / p.delta
    S = massless_symbol("forward_backward", k, p)
    assert np.min(np.linalg.svd(S, compute_uv=False)) < 1e-12


def test_massive_symbol_has_no_zero_modes():
    assert doubling_count("forward_backward", make_lattice(2, 2), mt=0.5) == 0


def test_doubling_rejects():
    with pytest.raises(ValueError):
        doubling_count("wilson", make_lattice(1, 1))
    assert set(SCHEMES) == {"forward_backward", "central"}
