"""Free Dirac field with the forward/backward lattice splitting.

Momentum-space symbol, in 2x2 blocks with ``a = i conj(q0) + mt`` and
``b = sigma.q``::

    S(p) = [[a, b], [-conj_b, conj(a)]],      conj_b = sigma.conj(q)

With the partner ``P = [[conj(a), -b], [conj_b, a]]`` one has
``S P = diag(K, Kbar)`` where ``K = a conj(a) + b conj_b = kappa + c.sigma``
is Hermitian and ``Kbar = kappa - c.sigma``; ``|c| = 2 rho``. Hence
``S^-1 = P diag(Kbar, K) / (kappa^2 - 4 rho^2)``.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import special

from . import kernels
from .lattice import (
    DIM,
    GAMMA_E,
    IDENTITY4,
    P_MINUS,
    P_PLUS,
    PAULI,
    LatticeError,
    LatticeSite,
    MomentumPoint,
    momentum_symbol_q,
)
from .quadrature import radial_gl, radial_quadpack
from .scalar import AdmissibilityError, FOUR_PI2, continuum_schwinger

DENSE_ROW_LIMIT = 4096
ZERO_MODE_THRESHOLD = 1e-8
# Spatial gamma blocks [[0, -sigma_j], [sigma_j, 0]] = -i gamma_j.
_SPATIAL_BLOCKS = np.array([-1j * GAMMA_E[j] for j in (1, 2, 3)])


@dataclass(frozen=True)
class DiracSymbol:
    matrix: np.ndarray
    mass: float
    at: object


@dataclass(frozen=True)
class KappaRho:
    kappa: float
    rho: float
    K: np.ndarray
    Kbar: np.ndarray
    D: np.ndarray
    E: np.ndarray


def _q(p, params):
    if isinstance(p, MomentumPoint):
        return momentum_symbol_q(p, params)
    p = np.asarray(p, dtype=float)
    if p.shape != (DIM,):
        raise LatticeError("a momentum has 4 components")
    return momentum_symbol_q(p, params)


def _sigma_dot(v):
    return np.einsum("j,jab->ab", np.asarray(v), PAULI[1:])


def _blocks(q, mt):
    a = 1j * np.conj(q[0]) + mt
    b = _sigma_dot(q[1:])
    bb = _sigma_dot(np.conj(q[1:]))
    return a, b, bb


def _check_mass(mt):
    if not mt > 0:
        raise AdmissibilityError(f"Dirac mass must be positive, got {mt!r}")


def dirac_symbol(p, mt, params):
    """The 4x4 momentum-space lattice Dirac operator at ``p``."""
    _check_mass(mt)
    a, b, bb = _blocks(_q(p, params), mt)
    I2 = PAULI[0]
    mat = np.block([[a * I2, b], [-bb, np.conj(a) * I2]])
    return DiracSymbol(mat, float(mt), p)


def partner_matrix(p, mt, params):
    """``P`` with ``S(p) P = diag(K, Kbar)``."""
    a, b, bb = _blocks(_q(p, params), mt)
    I2 = PAULI[0]
    return np.block([[np.conj(a) * I2, -b], [bb, a * I2]])


def kappa_rho(p, mt, params):
    """Decompose ``K = a conj(a) + b conj_b`` as ``kappa sigma0 + 2i E``."""
    q = _q(p, params)
    a, b, bb = _blocks(q, mt)
    K = (a * np.conj(a)) * PAULI[0] + b @ bb
    Kbar = bb @ b + (np.conj(a) * a) * PAULI[0]
    kappa = 0.5 * np.trace(K).real
    E = (K - kappa * PAULI[0]) / 2j
    rho = math.sqrt(
        (q[2] * np.conj(q[3])).imag ** 2
        + (q[3] * np.conj(q[1])).imag ** 2
        + (q[1] * np.conj(q[2])).imag ** 2
    )
    return KappaRho(float(kappa), rho, K, Kbar, kappa * PAULI[0], E)


def momentum_inverse_analytic(p, mt, params):
    """``P diag(Kbar, K) / (kappa^2 - 4 rho^2)``."""
    _check_mass(mt)
    kr = kappa_rho(p, mt, params)
    z = np.zeros((2, 2))
    diag = np.block([[kr.Kbar, z], [z, kr.K]])
    det = kr.kappa ** 2 - 4.0 * kr.rho ** 2
    return partner_matrix(p, mt, params) @ diag / det


def momentum_inverse_direct(p, mt, params):
    """Generic numerical inverse of the symbol (validation oracle)."""
    _check_mass(mt)
    return np.linalg.inv(dirac_symbol(p, mt, params).matrix)


def normalized_K(p, mt, params):
    """``(kappa^2 + 4 rho^2)^{-1/2} K``."""
    kr = kappa_rho(p, mt, params)
    return kr.K / math.sqrt(kr.kappa ** 2 + 4.0 * kr.rho ** 2)


def _site(x, params):
    if isinstance(x, LatticeSite):
        return x.j
    j = tuple(int(v) for v in x)
    if len(j) != DIM:
        raise LatticeError("a separation has 4 integer labels")
    return tuple(int(v) for v in params.wrap(np.array(j)))


def accel_applicable(params, mt):
    """The closed-form time sum needs ``mt * delta < 1``."""
    return mt * params.delta < 1.0


def _check_accel_roots(params, mt):
    # B_pm^2 = (A^2 +- 2 rho) / (1 - mt delta): kappa -+ 2 rho are the eigenvalues
    # of the positive matrix K, so both are real and positive and arg B_pm = 0.
    q = kernels.axis_tables(params.L, params.delta, (0, 0, 0, 0))[1]
    qa, qb, qc = np.meshgrid(q, q, q, indexing="ij")
    c = np.stack(
        [
            -2.0 * (qb * np.conj(qc)).imag,
            -2.0 * (qc * np.conj(qa)).imag,
            -2.0 * (qa * np.conj(qb)).imag,
        ]
    )
    A2 = mt * mt + abs(qa) ** 2 + abs(qb) ** 2 + abs(qc) ** 2
    Bm2 = (A2 - np.sqrt((c * c).sum(axis=0))) / (1.0 - mt * params.delta)
    if np.any(np.angle(np.sqrt(Bm2 + 0j)) > math.pi / 6) or np.any(Bm2 <= 0):
        raise AdmissibilityError("accelerated time sum outside |arg B| <= pi/6")


def lattice_dirac_propagator(params, mt, x, method="direct", inverse="analytic", backend=None):
    """``(2pi)^-4 sum_p exp(ipx) S(p)^-1 eta^4`` as a 4x4 matrix.

    ``method="accel"`` sums the time momentum in closed form and falls back to
    the direct sum when ``mt * delta >= 1``. ``inverse="direct"`` replaces the
    analytic per-momentum inverse by a generic numerical one.
    """
    _check_mass(mt)
    k = _site(x, params)
    norm = 1.0 / (2 * math.pi) ** 4
    if inverse == "direct":
        return _propagator_numeric_inverse(params, mt, k) * params.eta ** 4 * norm
    if inverse != "analytic":
        raise ValueError(f"unknown inverse {inverse!r}")
    if method == "accel" and accel_applicable(params, mt):
        _check_accel_roots(params, mt)
        s = kernels.dirac_accel_sum(params.L, params.delta, mt, k, backend)
        return s * params.eta ** 3 * norm
    if method not in ("direct", "accel"):
        raise ValueError(f"unknown method {method!r}")
    return kernels.dirac_direct_sum(params.L, params.delta, mt, k, backend) * params.eta ** 4 * norm


def _propagator_numeric_inverse(params, mt, k):
    from ._accel import pairwise_sum

    sq, q, ph = kernels.axis_tables(params.L, params.delta, k)
    n = params.size
    rows = np.empty((n * n, 4, 4), dtype=complex)
    g = GAMMA_E
    for n0 in range(n):
        for n1 in range(n):
            q2 = q[:, None]
            q3 = q[None, :]
            qs = np.broadcast_arrays(np.full((n, n), q[n0]), np.full((n, n), q[n1]), q2, q3)
            sym = mt * IDENTITY4 + sum(
                np.einsum("ij,ab->abij", g[mu] @ (P_PLUS * 1j), np.conj(qs[mu]))
                + np.einsum("ij,ab->abij", g[mu] @ (P_MINUS * 1j), qs[mu])
                for mu in range(DIM)
            )
            inv = np.linalg.inv(sym)
            phase = ((ph[0, n0] * ph[1, n1]) * ph[2][:, None]) * ph[3][None, :]
            rows[n0 * n + n1] = pairwise_sum((phase[..., None, None] * inv).reshape(n * n, 4, 4), axis=0)
    return pairwise_sum(rows, axis=0)


def dirac_operator_matrix(params, mt):
    """Position-space ``sum gamma_mu (P+ fwd_mu + P- bwd_mu) + mt`` with periodic wrap.

    Rows and columns are ``(site, spinor)`` with the site index major.
    """
    nsite = params.volume
    rows = 4 * nsite
    if rows > DENSE_ROW_LIMIT:
        raise LatticeError(f"dense Dirac oracle limited to {DENSE_ROW_LIMIT} rows, got {rows}")
    s = params.size
    grid = np.arange(nsite).reshape((s,) * DIM)
    d = params.delta
    mat = np.zeros((rows, rows), dtype=complex)
    idx = np.arange(nsite)
    diag_block = mt * IDENTITY4.copy()
    for mu in range(DIM):
        # fwd: (f(x+e) - f(x))/d on P+, bwd: (f(x) - f(x-e))/d on P-
        diag_block += GAMMA_E[mu] @ (-P_PLUS + P_MINUS) / d
    for i in idx:
        mat[4 * i:4 * i + 4, 4 * i:4 * i + 4] += diag_block
    for mu in range(DIM):
        up = np.roll(grid, -1, axis=mu).ravel()
        dn = np.roll(grid, 1, axis=mu).ravel()
        bp = GAMMA_E[mu] @ P_PLUS / d
        bm = -GAMMA_E[mu] @ P_MINUS / d
        for i in idx:
            mat[4 * i:4 * i + 4, 4 * up[i]:4 * up[i] + 4] += bp
            mat[4 * i:4 * i + 4, 4 * dn[i]:4 * dn[i] + 4] += bm
    return mat


def dense_dirac_oracle(params, mt):
    """Inverse operator matrix scaled so block ``(y1, y2)`` is ``R(y1 - y2)``."""
    _check_mass(mt)
    return np.linalg.inv(dirac_operator_matrix(params, mt)) / params.delta ** 4


def _euclid_time(t):
    """``(|t|, sign)`` continued to complex ``t`` by the sign of ``Re t``."""
    t = complex(t)
    if t.real == 0.0:
        raise AdmissibilityError("continuum Dirac function needs Re(x0) != 0")
    sgn = 1.0 if t.real > 0 else -1.0
    return sgn * t, sgn


def continuum_dirac_schwinger(mt, x, method="gl"):
    """Continuum Dirac Schwinger function ``{-gamma.d + mt} S_mt`` by radial quadrature.

    ``x[0]`` may be complex with nonzero real part, which gives the analytic
    continuation used for Wightman functions.
    """
    _check_mass(mt)
    x = np.asarray(x)
    tau, sgn = _euclid_time(x[0])
    xv = np.asarray(x[1:])
    if np.iscomplexobj(xv):
        if np.any(xv.imag != 0):
            raise AdmissibilityError("spatial separation must be real")
        xv = xv.real
    xv = xv.astype(float)
    r = float(np.linalg.norm(xv))
    quad = {"gl": radial_gl, "quadpack": radial_quadpack}[method]
    S = quad(tau, r, mt, "sinc", 2, True) / FOUR_PI2
    T = quad(tau, r, mt, "sinc", 2, False) / FOUR_PI2
    out = mt * S * IDENTITY4 + sgn * T * GAMMA_E[0]
    if r > 0.0:
        G = 1j * quad(tau, r, mt, "j1", 3, True) / FOUR_PI2
        for j in range(3):
            out = out + _SPATIAL_BLOCKS[j] * (G * xv[j] / r)
    return out


def continuum_dirac_bessel(mt, x):
    """Closed form ``mt S + mt^2 K_2(mt s) / (4 pi^2 s^2) * gamma.x`` (complex ``x0`` allowed)."""
    x = np.asarray(x, dtype=complex)
    s = np.sqrt(np.sum(x * x))
    if s.real <= 0.0:
        raise AdmissibilityError("Bessel form needs Re(s) > 0")
    S = mt * special.kv(1, mt * s) / (FOUR_PI2 * s)
    c = mt * mt * special.kv(2, mt * s) / (FOUR_PI2 * s * s)
    return mt * S * IDENTITY4 + c * np.einsum("m,mab->ab", x, GAMMA_E)


def continuum_dirac_fd(mt, x, h=1e-4, method="gl"):
    """``{-gamma.d + mt}`` applied to the scalar function by central differences."""
    x = np.asarray(x, dtype=float)
    out = mt * continuum_schwinger(mt, x, method) * IDENTITY4
    for mu in range(DIM):
        e = np.zeros(DIM)
        e[mu] = h
        d = (continuum_schwinger(mt, x + e, method) - continuum_schwinger(mt, x - e, method)) / (2 * h)
        out = out - GAMMA_E[mu] * d
    return out


SCHEMES = ("forward_backward", "central")


def massless_symbol(scheme, p, params, mt=0.0):
    """Symbol of ``sum gamma_mu nabla_mu + mt`` for a difference scheme.

    ``p`` has trailing axis 4; the result has shape ``p.shape[:-1] + (4, 4)``.
    """
    p = np.asarray(p, dtype=float)
    d = params.delta
    if scheme == "forward_backward":
        fwd = (np.exp(1j * p * d) - 1.0) / d
        bwd = (1.0 - np.exp(-1j * p * d)) / d
        gp = np.einsum("mij,jk->mik", GAMMA_E, P_PLUS)
        gm = np.einsum("mij,jk->mik", GAMMA_E, P_MINUS)
        out = np.einsum("...m,mij->...ij", fwd, gp) + np.einsum("...m,mij->...ij", bwd, gm)
    elif scheme == "central":
        out = np.einsum("...m,mij->...ij", 1j * np.sin(p * d) / d, GAMMA_E)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return out + mt * IDENTITY4


def doubling_count(scheme, params, mt=0.0):
    """Number of dual-lattice momenta where the symbol's smallest singular value vanishes.

    Zero modes are declared below ``1e-8 / delta``.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    if mt < 0:
        raise AdmissibilityError("mass must be nonnegative here")
    thr2 = (ZERO_MODE_THRESHOLD / params.delta) ** 2
    mom = params.momenta
    rest = np.stack(np.meshgrid(mom, mom, mom, indexing="ij"), axis=-1).reshape(-1, 3)
    count = 0
    for p0 in mom:
        ps = np.concatenate([np.full((rest.shape[0], 1), p0), rest], axis=1)
        S = massless_symbol(scheme, ps, params, mt)
        # sigma_min < t forces |det S| <= t |S|_F^3, so only those need the eigen-solve
        fro = np.sqrt(np.sum(np.abs(S) ** 2, axis=(-2, -1)))
        cand = np.abs(np.linalg.det(S)) <= math.sqrt(thr2) * fro ** 3
        if np.any(cand):
            Sc = S[cand]
            # smallest singular value squared = smallest eigenvalue of S^dagger S
            ev = np.linalg.eigvalsh(np.conj(np.swapaxes(Sc, -1, -2)) @ Sc)[:, 0]
            count += int(np.sum(ev < thr2))
    return count
