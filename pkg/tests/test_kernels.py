import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qflat import kernels
from qflat._accel import USE_NUMBA, pairwise_sum, pairwise_sum_1d, set_threads

needs_numba = pytest.mark.skipif(not USE_NUMBA, reason="numba backend disabled")

SEPARATIONS = [(0, 0, 0, 0), (1, 0, 0, 0), (2, -1, 0, 3), (-3, 4, 1, -2)]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=70))
def test_pairwise_sum_backends_agree(values):
    a = np.array(values)
    assert pairwise_sum(a) == pairwise_sum_1d(a.copy())
    assert pairwise_sum(a) == pytest.approx(np.sum(a), abs=1e-6 * (1 + np.sum(np.abs(a))))


def test_pairwise_sum_axis_and_empty():
    a = np.arange(12.0).reshape(3, 4)
    np.testing.assert_array_equal(pairwise_sum(a, axis=0), a.sum(axis=0))
    assert pairwise_sum(np.array([])) == 0


@needs_numba
@pytest.mark.parametrize("k", SEPARATIONS)
def test_scalar_backends_agree(k):
    L, d = 4, np.sqrt(np.pi) / 2
    for fn in (kernels.scalar_direct_sum, kernels.scalar_accel_sum):
        a = fn(L, d, 1.0, k, "numba")
        b = fn(L, d, 1.0, k, "numpy")
        assert abs(a - b) <= 1e-14 * abs(a)


@needs_numba
@pytest.mark.parametrize("k", SEPARATIONS)
def test_dirac_backends_agree(k):
    L, d = 4, np.sqrt(np.pi) / 2
    for fn, mt in ((kernels.dirac_direct_sum, 1.0), (kernels.dirac_accel_sum, 0.9)):
        a = fn(L, d, mt, k, "numba")
        b = fn(L, d, mt, k, "numpy")
        # unnormalised sums with cancellation: ulp differences in exp/asinh add up
        assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(a))


@needs_numba
def test_thread_count_does_not_change_results():
    L, d = 4, np.sqrt(np.pi) / 2
    k = (1, 2, -1, 0)
    out = []
    for n in (1, 2, 4):
        set_threads(n)
        out.append((kernels.scalar_direct_sum(L, d, 1.0, k), kernels.scalar_accel_sum(L, d, 1.0, k),
                    kernels.dirac_accel_sum(L, d, 0.9, k).tobytes()))
    set_threads(os.cpu_count())
    assert out[0] == out[1] == out[2]


def test_numpy_inverse_matches_compiled_inverse():
    rng = np.random.default_rng(0)
    q = rng.normal(size=(4, 5)) + 1j * rng.normal(size=(4, 5))
    got = kernels.dirac_inverse_numpy(*q, 0.8)
    for i in range(5):
        ref = np.empty((4, 4), dtype=complex)
        kernels._dirac_inverse_into(*q[:, i], 0.8, ref)
        np.testing.assert_allclose(got[i], ref, rtol=1e-13, atol=1e-15)


def test_g1_backends_agree():
    L, d = 3, np.sqrt(np.pi) / 3
    for B in (0.2, 1.0, 7.5):
        for a in range(L + 1):
            assert kernels._g1_real(B, a, L, d) == pytest.approx(kernels.g1_numpy(B, a, L, d), rel=1e-15)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.scalar_direct_sum(1, 1.0, 1.0, (0, 0, 0, 0), "fortran")


def test_env_flag_selects_numpy_path():
    code = "import qflat._accel as a; print(a.USE_NUMBA)"
    env = dict(os.environ, QFLAT_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
