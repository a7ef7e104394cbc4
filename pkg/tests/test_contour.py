import numpy as np
import pytest

from qflat.contour import (
    ContourSpec,
    DiracComponent,
    DomainError,
    RhoPair,
    ScalarPair,
    TestFunction,
    contour_invariance_report,
    eval_two_point_functional,
    threshold_probe,
)
from qflat.dirac import continuum_dirac_bessel
from qflat.interacting import AnalyticityError, fundamental_length
from qflat.scalar import schwinger_bessel

CENTER = (0.3, 0.2, -0.1, 0.4)


def test_test_function_values():
    f = TestFunction(CENTER, 0.5, ((2.0, (1, 0, 0, 0)), (1.0, (0, 0, 0, 0))))
    z = np.array([0.1 - 0.2j, 0.3, 0.0, 1.0])
    g = np.exp(-np.sum((z - np.array(CENTER)) ** 2) / 0.25)
    assert f(z) == pytest.approx(g * (2 * z[0] + 1), rel=1e-14)
    assert f.K_max == 5.0
    assert TestFunction(CENTER, (1.0, 0.5, 2.0, 1.0)).K_max == 5.0
    with pytest.raises(ValueError):
        TestFunction(CENTER, 0.0)


def test_conjugate_reflection_pointwise():
    f = TestFunction((0.3 + 0.1j, 0.2, -0.1, 0.4), (0.7, 0.5, 0.5, 0.6), ((1 + 2j, (1, 0, 2, 0)), (0.5, (0, 1, 0, 0))))
    fs = f.conjugate_reflection()
    rng = np.random.default_rng(0)
    for _ in range(10):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert fs(z) == pytest.approx(np.conj(f(-np.conj(z))), rel=1e-13)


def test_decay_certificate_finite():
    assert 0 < TestFunction(CENTER, 0.5).decay_certificate() < np.inf


def test_contour_spec_and_domains():
    with pytest.raises(DomainError):
        ContourSpec(0.0)
    f = TestFunction(CENTER, 0.1)
    with pytest.raises(DomainError):
        eval_two_point_functional(ScalarPair(0.0), f, ContourSpec(2.0, nodes=4))
    k = ScalarPair(1.0)
    with pytest.raises(AnalyticityError):
        eval_two_point_functional(k, TestFunction(CENTER, 0.5), ContourSpec(k.ell, nodes=4))


def test_kernels_reduce_to_free_functions():
    zeta = 0.4 - 0.7j
    xv = np.array([[0.2, -0.1, 0.3]])
    D = schwinger_bessel(1.0, 1j * zeta, np.linalg.norm(xv))
    assert ScalarPair(0.0)(zeta, xv)[0] == pytest.approx(D, rel=1e-15)
    assert RhoPair(0.0)(zeta, xv)[0] == pytest.approx(1.0)
    assert RhoPair(1.0)(zeta, xv)[0] == pytest.approx((1 - 4 * D * D) ** -0.5, rel=1e-14)
    R = continuum_dirac_bessel(1.0, np.array([1j * zeta, *xv[0]]))
    for a, b in [(0, 0), (0, 2), (1, 3), (2, 1)]:
        assert DiracComponent(a, b)(zeta, xv)[0] == pytest.approx(R[a, b], rel=1e-13, abs=1e-15)
    with pytest.raises(ValueError):
        DiracComponent(4, 0)


@pytest.mark.parametrize("kernel", [ScalarPair(0.0), ScalarPair(1.0), RhoPair(1.0)])
def test_hermiticity_at_one_height(kernel):
    f = TestFunction(CENTER, 0.5, ((1.0 + 0.5j, (0, 1, 0, 0)), (0.3, (0, 0, 0, 0))))
    spec = ContourSpec(0.5, nodes=16)
    a = eval_two_point_functional(kernel, f, spec)
    b = eval_two_point_functional(kernel, f.conjugate_reflection(), spec)
    assert abs(np.conj(a) - b) < 1e-8 * abs(a)


def test_interacting_invariance_coarse():
    k = ScalarPair(1.0)
    e = k.ell
    rows, worst = contour_invariance_report(k, TestFunction(CENTER, 0.5), [2 * e, 3 * e], nodes=32)
    assert len(rows) == 2 and worst < 1e-3
    with pytest.raises(ValueError):
        contour_invariance_report(k, TestFunction(CENTER, 0.5), [])


def test_threshold_probe():
    l = 1.0
    ell = fundamental_length(l)
    (e2, v2), (eh, vh) = threshold_probe(l, 1.0, [2.0, 0.5])
    assert e2 == pytest.approx(2 * ell) and eh == pytest.approx(0.5 * ell)
    assert v2 < 1 / 16 + 1e-10
    assert vh > 1
    with pytest.raises(ValueError):
        threshold_probe(l, 1.0, [0.0])
