"""Free neutral scalar field: lattice and continuum two-point functions."""
from dataclasses import dataclass
import cmath
import math

import numpy as np
from scipy import special

from . import kernels
from ._accel import pairwise_sum
from .lattice import DIM, LatticeError, LatticeParams, LatticeSite
from .quadrature import radial_gl, radial_quadpack

FOUR_PI2 = 4.0 * math.pi ** 2
REL_FLOOR = 1e-300
DENSE_SITE_LIMIT = 4096


class AdmissibilityError(ValueError):
    """Input outside the region where a formula is valid."""


@dataclass(frozen=True)
class RootPair:
    """Roots of ``z^2 - (2 + delta^2 B^2) z + 1``; ``|z_minus| < 1 < |z_plus|``."""

    z_plus: complex
    z_minus: complex


def _check_B(B):
    B = complex(B)
    if B == 0:
        raise AdmissibilityError("B = 0 is a pole of the one-dimensional sum")
    if abs(cmath.phase(B)) > math.pi / 4 + 1e-15:
        raise AdmissibilityError(f"|arg B| = {abs(cmath.phase(B)):.6g} exceeds pi/4")
    return B


def _log_z_plus(B, delta):
    return 2.0 * cmath.asinh(0.5 * delta * B)


def roots(B, params):
    B = _check_B(B)
    d = params.delta
    zp = 1.0 + 0.5 * d * d * B * B + 0.5 * d * B * cmath.sqrt(4.0 + d * d * B * B)
    return RootPair(zp, 1.0 / zp)


def _label(x, params):
    """Integer label of a lattice coordinate ``x = k delta``."""
    if isinstance(x, (int, np.integer)):
        k = int(x)
    else:
        k = int(round(float(x) / params.delta))
        if abs(k * params.delta - float(x)) > 1e-9 * params.delta:
            raise LatticeError(f"x = {x} is not a lattice coordinate")
    return k


def one_d_sum_closed(B, x, params):
    """Exact periodic sum ``eta * sum_p exp(ixp) / ((2 - 2cos p delta)/delta^2 + B^2)``.

    ``x`` is a lattice coordinate (float) or an integer label. The geometric
    series over the images ``k + 2Ln`` is summed in closed form.
    """
    B = _check_B(B)
    d = params.delta
    L = params.L
    a = abs(int(params.wrap(_label(x, params))))
    lam = _log_z_plus(B, d)
    num = cmath.exp(-a * lam) + cmath.exp(-(2 * L - a) * lam)
    den = B * cmath.sqrt(4.0 + d * d * B * B) * -np.expm1(-2 * L * lam)
    return 2.0 * math.pi * num / den


def one_d_sum_infinite(B, x, params):
    """Single-image limit ``2 pi delta z_+^{-|x|/delta} / (z_+ - z_-)``."""
    B = _check_B(B)
    d = params.delta
    k = abs(int(params.wrap(_label(x, params))))
    r = roots(B, params)
    return 2.0 * math.pi * d * r.z_plus ** (-k) / (r.z_plus - r.z_minus)


def one_d_sum_direct(B, x, params):
    """Brute-force dual-lattice sum, the reference for :func:`one_d_sum_closed`."""
    B = complex(B)
    k = _label(x, params)
    j = params.indices
    theta = np.pi * j / params.L
    s = np.sin(0.5 * theta)
    den = 4.0 * s * s / params.delta ** 2 + B * B
    ph = np.exp(1j * np.pi * ((j * k) % params.size) / params.L)
    return complex(pairwise_sum(ph / den)) * params.eta


def _site(x, params):
    if isinstance(x, LatticeSite):
        return x.j
    j = tuple(int(v) for v in x)
    if len(j) != DIM:
        raise LatticeError("a separation has 4 integer labels")
    return tuple(int(v) for v in params.wrap(np.array(j)))


def direct_term_count(params):
    return params.size ** DIM


def accel_term_count(params):
    return params.size ** (DIM - 1)


def lattice_propagator_direct(params, m, x, backend=None):
    """``(2pi)^-4 sum_p exp(ipx) [sum |q_mu|^2 + m^2]^-1 eta^4`` over all of the dual lattice."""
    _check_mass(m)
    k = _site(x, params)
    s = kernels.scalar_direct_sum(params.L, params.delta, m, k, backend)
    return s * params.eta ** 4 / (2 * math.pi) ** 4


def lattice_propagator_accel(params, m, x, backend=None):
    """Same value with the time-momentum sum done in closed form: ``(2L)^3`` terms."""
    _check_mass(m)
    k = _site(x, params)
    s = kernels.scalar_accel_sum(params.L, params.delta, m, k, backend)
    return s * params.eta ** 3 / (2 * math.pi) ** 4


def lattice_propagator(params, m, x, method="accel", backend=None):
    if method == "accel":
        return lattice_propagator_accel(params, m, x, backend)
    if method == "direct":
        return lattice_propagator_direct(params, m, x, backend)
    raise ValueError(f"unknown method {method!r}")


def _check_mass(m):
    if not m > 0:
        raise AdmissibilityError(f"mass must be positive, got {m!r}")


def site_index(j, params):
    """Row index of site labels ``j`` in the lexicographic site ordering."""
    n = np.asarray(j) + params.L - 1
    s = params.size
    return int(((n[0] * s + n[1]) * s + n[2]) * s + n[3])


def _check_dense(params, rows):
    if rows > DENSE_SITE_LIMIT:
        raise LatticeError(f"dense oracle limited to {DENSE_SITE_LIMIT} rows, got {rows}")


def operator_matrix(params, m):
    """Position-space matrix of ``-Laplacian + m^2`` with periodic wrap."""
    n = params.volume
    _check_dense(params, n)
    s = params.size
    grid = np.arange(n).reshape((s,) * DIM)
    mat = np.zeros((n, n))
    idx = np.arange(n)
    mat[idx, idx] = 2.0 * DIM / params.delta ** 2 + m * m
    for mu in range(DIM):
        for shift in (1, -1):
            nb = np.roll(grid, -shift, axis=mu).ravel()
            np.add.at(mat, (idx, nb), -1.0 / params.delta ** 2)
    return mat


def dense_operator_oracle(params, m):
    """Inverse of :func:`operator_matrix` scaled so ``entry(x, y) = S_m(x - y)``."""
    _check_mass(m)
    return np.linalg.inv(operator_matrix(params, m)) / params.delta ** 4


def continuum_schwinger(m, x, method="gl"):
    """Continuum two-point Schwinger function by radial quadrature (``x0 != 0``)."""
    x = np.asarray(x, dtype=float)
    if x[0] == 0.0:
        raise AdmissibilityError("continuum_schwinger needs x0 != 0")
    r = float(np.linalg.norm(x[1:]))
    return _radial(m, abs(x[0]), r, method).real


def _radial(m, tau, r, method):
    if method == "gl":
        v = radial_gl(tau, r, m)
    elif method == "quadpack":
        v = radial_quadpack(tau, r, m)
    else:
        raise ValueError(f"unknown quadrature method {method!r}")
    return v / FOUR_PI2


def wightman_minus(m, x0, eps, xvec, method="gl"):
    """``D^(-)(x0 - i eps, xvec)``: the Schwinger function at Euclidean time ``eps + i x0``."""
    if not eps > 0:
        raise AdmissibilityError("wightman_minus needs eps > 0")
    r = float(np.linalg.norm(np.asarray(xvec, dtype=float)))
    return _radial(m, complex(eps, x0), r, method)


def schwinger_bessel(m, tau, r):
    """Closed form ``m K_1(m s) / (4 pi^2 s)`` with ``s = sqrt(tau^2 + r^2)``.

    Vectorised; complex ``tau`` with positive real part gives the analytic
    continuation, so ``schwinger_bessel(m, eps + 1j*x0, r) = D^(-)(x0 - i eps, r)``.
    """
    tau = np.asarray(tau)
    r = np.asarray(r)
    if np.iscomplexobj(tau):
        s = np.sqrt(tau * tau + r * r + 0j)
    else:
        s = np.sqrt(tau * tau + r * r)
    return m * special.kv(1, m * s) / (FOUR_PI2 * s)


def wightman_bound(eps):
    """Global bound ``(2 pi eps)^-2`` on ``|D^(-)(x0 - i eps, xvec)|``."""
    return (2.0 * math.pi * eps) ** -2


def _s_zero_comparison(params, m, coef):
    """``(2pi)^-4 sum_p [coef |p|^2 + m^2]^-1 eta^4``."""
    p2 = params.momenta ** 2 * coef
    s = params.size
    rows = np.empty(s * s)
    inner = p2[:, None] + p2[None, :]
    for a in range(s):
        for b in range(s):
            rows[a * s + b] = pairwise_sum((1.0 / (inner + (p2[a] + p2[b] + m * m))).ravel())
    return float(pairwise_sum(rows)) * params.eta ** 4 / (2 * math.pi) ** 4


def s_zero_lower_bound(params, m):
    """Comparison sum with ``sum_mu 4|p|^2/pi^2 = 16|p|^2/pi^2``; a lower bound for ``S_m(0)``.

    Valid because ``(2 - 2cos p delta)/delta^2 <= p^2 < 16 p^2/pi^2``.
    """
    return _s_zero_comparison(params, m, 16.0 / math.pi ** 2)


def s_zero_upper_bound(params, m):
    """Comparison sum with ``4|p|^2/pi^2``; an upper bound since ``4 sin^2(x/2) >= 4x^2/pi^2`` on ``|x| <= pi``."""
    return _s_zero_comparison(params, m, 4.0 / math.pi ** 2)


def s_zero_trend(m, M_list, backend=None):
    """``[(M, S_m(0; M, N=M)), ...]`` for increasing ``M``."""
    out = []
    for M in M_list:
        p = LatticeParams(M, M)
        out.append((M, lattice_propagator_accel(p, m, (0, 0, 0, 0), backend).real))
    return out


def time_sum_term(params, A, x0_label):
    """``(2pi)^-4 eta sum_p0 exp(i p0 x0) / (|q0|^2 + A^2)`` for one spatial momentum."""
    return one_d_sum_closed(A, int(x0_label), params) / (2 * math.pi) ** 4


def tail_term_bound(params, x0):
    """Bound ``(2pi)^-3 2^{-2 M0 |x0| / pi} pi / (4 M0)`` with ``M0 = sqrt(M)``."""
    M0 = math.sqrt(params.M)
    return (2 * math.pi) ** -3 * 2.0 ** (-2 * M0 * abs(x0) / math.pi) * math.pi / (4 * M0)


@dataclass(frozen=True)
class PropagatorSample:
    x: tuple
    lattice_value: complex
    continuum_value: complex
    abs_error: float
    rel_error: float

    @classmethod
    def from_values(cls, x, lattice_value, continuum_value):
        err = abs(lattice_value - continuum_value)
        rel = err / max(abs(continuum_value), REL_FLOOR)
        return cls(tuple(float(v) for v in x), complex(lattice_value), complex(continuum_value), err, rel)
