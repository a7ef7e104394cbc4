"""Hot momentum-sum kernels, compiled (numba) and vectorised (numpy).

Every kernel returns the *unnormalised* dual-lattice sum; the callers in
:mod:`qflat.scalar` and :mod:`qflat.dirac` attach the ``(2pi)^-4 eta^d``
factors. The reduction order is fixed: the two innermost momentum axes form a
row of ``(2L)^2`` terms that is pairwise-summed, and the row partials are then
pairwise-summed in lexicographic order of the outer axes. Parallel workers
only split the rows, so the result does not depend on the thread count.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit, pairwise_sum, pairwise_sum_1d, prange

TWO_PI = 2.0 * math.pi


def axis_tables(L, delta, k):
    """Per-axis tables shared by both backends.

    Returns ``sq[n] = |q(p_n)|^2``, ``q[n]`` (backward symbol) and
    ``ph[mu, n] = exp(i p_n x_mu)`` for the separation labels ``k``.
    Phases use exact integer arithmetic modulo ``2L``.
    """
    j = np.arange(-L + 1, L + 1)
    theta = np.pi * j / L
    s = np.sin(0.5 * theta)
    sq = 4.0 * s * s / (delta * delta)
    q = (1.0 - np.exp(-1j * theta)) / (1j * delta)
    ph = np.empty((4, 2 * L), dtype=complex)
    for mu in range(4):
        r = (j * int(k[mu])) % (2 * L)
        ph[mu] = np.exp(1j * np.pi * r / L)
    return sq, q, ph


# ---------------------------------------------------------------------------
# one-dimensional closed form on the periodic lattice


@njit
def _g1_real(B, a, L, delta):
    lam = 2.0 * math.asinh(0.5 * delta * B)
    num = math.exp(-a * lam) + math.exp(-(2 * L - a) * lam)
    return TWO_PI * num / (B * math.sqrt(4.0 + delta * delta * B * B) * -math.expm1(-2 * L * lam))


def g1_numpy(B, a, L, delta):
    """Vectorised twin of :func:`_g1_real` (real ``B > 0``, ``0 <= a <= L``)."""
    lam = 2.0 * np.arcsinh(0.5 * delta * B)
    num = np.exp(-a * lam) + np.exp(-(2 * L - a) * lam)
    return TWO_PI * num / (B * np.sqrt(4.0 + delta * delta * B * B) * -np.expm1(-2 * L * lam))


@njit
def _wrap_abs(k, L):
    w = (k + L - 1) % (2 * L) - L + 1
    return abs(w)


def _wrap_abs_np(k, L):
    return abs((k + L - 1) % (2 * L) - L + 1)


# ---------------------------------------------------------------------------
# scalar field


@njit(parallel=True)
def _scalar_direct_nb(L, m2, sq, ph):
    n = 2 * L
    partial = np.empty(n * n, dtype=np.complex128)
    for r in prange(n * n):
        n0 = r // n
        n1 = r % n
        buf = np.empty(n * n, dtype=np.complex128)
        p01 = ph[0, n0] * ph[1, n1]
        s01 = sq[n0] + sq[n1]
        for n2 in range(n):
            p012 = p01 * ph[2, n2]
            s012 = s01 + sq[n2]
            for n3 in range(n):
                w = 1.0 / (s012 + sq[n3] + m2)
                buf[n2 * n + n3] = (p012 * ph[3, n3]) * w
        partial[r] = pairwise_sum_1d(buf)
    return pairwise_sum_1d(partial)


def _scalar_direct_np(L, m2, sq, ph):
    n = 2 * L
    partial = np.empty(n * n, dtype=complex)
    for n0 in range(n):
        p01 = ph[0, n0] * ph[1]
        s01 = sq[n0] + sq
        p012 = p01[:, None] * ph[2][None, :]
        s012 = s01[:, None] + sq[None, :]
        w = 1.0 / (s012[:, :, None] + sq[None, None, :] + m2)
        terms = (p012[:, :, None] * ph[3][None, None, :]) * w
        partial[n0 * n:(n0 + 1) * n] = pairwise_sum(terms.reshape(n, n * n), axis=-1)
    return pairwise_sum(partial)


def scalar_direct_sum(L, delta, m, k, backend=None):
    """``sum_p exp(ipx) / (sum_mu |q_mu|^2 + m^2)`` over the 4D dual lattice."""
    sq, _, ph = axis_tables(L, delta, k)
    if _use_numba(backend):
        return complex(_scalar_direct_nb(L, m * m, sq, ph))
    return complex(_scalar_direct_np(L, m * m, sq, ph))


@njit(parallel=True)
def _scalar_accel_nb(L, delta, m2, a0, sq, ph):
    n = 2 * L
    partial = np.empty(n, dtype=np.complex128)
    for n1 in prange(n):
        buf = np.empty(n * n, dtype=np.complex128)
        for n2 in range(n):
            p12 = ph[1, n1] * ph[2, n2]
            s12 = sq[n1] + sq[n2]
            for n3 in range(n):
                B = math.sqrt(m2 + (s12 + sq[n3]))
                buf[n2 * n + n3] = (p12 * ph[3, n3]) * _g1_real(B, a0, L, delta)
        partial[n1] = pairwise_sum_1d(buf)
    return pairwise_sum_1d(partial)


def _scalar_accel_np(L, delta, m2, a0, sq, ph):
    n = 2 * L
    p12 = ph[1][:, None, None] * ph[2][None, :, None]
    s12 = sq[:, None, None] + sq[None, :, None]
    B = np.sqrt(m2 + (s12 + sq[None, None, :]))
    terms = (p12 * ph[3][None, None, :]) * g1_numpy(B, a0, L, delta)
    partial = pairwise_sum(terms.reshape(n, n * n), axis=-1)
    return pairwise_sum(partial)


def scalar_accel_sum(L, delta, m, k, backend=None):
    """Spatial dual sum with the time-momentum sum in closed form.

    Returns ``sum_pvec exp(i pvec.xvec) G(A(pvec), x0)`` where ``G`` already
    carries the factor ``eta`` of the time-momentum sum. The number of
    summed terms is ``(2L)^3``.
    """
    sq, _, ph = axis_tables(L, delta, k)
    a0 = _wrap_abs_np(int(k[0]), L)
    if _use_numba(backend):
        return complex(_scalar_accel_nb(L, delta, m * m, a0, sq, ph))
    return complex(_scalar_accel_np(L, delta, m * m, a0, sq, ph))


# ---------------------------------------------------------------------------
# Dirac field


@njit
def _mul2(a, b, out):
    out[0, 0] = a[0, 0] * b[0, 0] + a[0, 1] * b[1, 0]
    out[0, 1] = a[0, 0] * b[0, 1] + a[0, 1] * b[1, 1]
    out[1, 0] = a[1, 0] * b[0, 0] + a[1, 1] * b[1, 0]
    out[1, 1] = a[1, 0] * b[0, 1] + a[1, 1] * b[1, 1]


@njit
def _sigma_dot(v1, v2, v3, out):
    out[0, 0] = v3
    out[0, 1] = v1 - 1j * v2
    out[1, 0] = v1 + 1j * v2
    out[1, 1] = -v3


@njit
def _dirac_inverse_into(q0, q1, q2, q3, mt, out):
    """Symbol inverse ``P diag(Kbar, K) / (kappa^2 - 4 rho^2)`` into ``out``."""
    a = 1j * np.conj(q0) + mt
    abar = np.conj(a)
    c1 = -2.0 * (q2 * np.conj(q3)).imag
    c2 = -2.0 * (q3 * np.conj(q1)).imag
    c3 = -2.0 * (q1 * np.conj(q2)).imag
    kappa = (a * abar).real + (q1 * np.conj(q1)).real + (q2 * np.conj(q2)).real + (q3 * np.conj(q3)).real
    det = kappa * kappa - (c1 * c1 + c2 * c2 + c3 * c3)
    K = np.empty((2, 2), dtype=np.complex128)
    Kb = np.empty((2, 2), dtype=np.complex128)
    b = np.empty((2, 2), dtype=np.complex128)
    bb = np.empty((2, 2), dtype=np.complex128)
    t = np.empty((2, 2), dtype=np.complex128)
    _sigma_dot(c1, c2, c3, K)
    _sigma_dot(-c1, -c2, -c3, Kb)
    K[0, 0] += kappa
    K[1, 1] += kappa
    Kb[0, 0] += kappa
    Kb[1, 1] += kappa
    _sigma_dot(q1, q2, q3, b)
    _sigma_dot(np.conj(q1), np.conj(q2), np.conj(q3), bb)
    w = 1.0 / det
    for i in range(2):
        for j in range(2):
            out[i, j] = abar * Kb[i, j] * w
            out[2 + i, 2 + j] = a * K[i, j] * w
    _mul2(b, K, t)
    for i in range(2):
        for j in range(2):
            out[i, 2 + j] = -t[i, j] * w
    _mul2(bb, Kb, t)
    for i in range(2):
        for j in range(2):
            out[2 + i, j] = t[i, j] * w


@njit(parallel=True)
def _dirac_direct_nb(L, mt, q, ph):
    n = 2 * L
    partial = np.empty((n * n, 4, 4), dtype=np.complex128)
    for r in prange(n * n):
        n0 = r // n
        n1 = r % n
        buf = np.empty((16, n * n), dtype=np.complex128)
        inv = np.empty((4, 4), dtype=np.complex128)
        for n2 in range(n):
            for n3 in range(n):
                _dirac_inverse_into(q[n0], q[n1], q[n2], q[n3], mt, inv)
                phase = ((ph[0, n0] * ph[1, n1]) * ph[2, n2]) * ph[3, n3]
                for e in range(16):
                    buf[e, n2 * n + n3] = phase * inv[e // 4, e % 4]
        for e in range(16):
            partial[r, e // 4, e % 4] = pairwise_sum_1d(buf[e].copy())
    out = np.empty((4, 4), dtype=np.complex128)
    col = np.empty(n * n, dtype=np.complex128)
    for e in range(16):
        for r in range(n * n):
            col[r] = partial[r, e // 4, e % 4]
        out[e // 4, e % 4] = pairwise_sum_1d(col)
    return out


def dirac_inverse_numpy(q0, q1, q2, q3, mt):
    """Vectorised symbol inverse; ``q_mu`` broadcastable arrays -> (..., 4, 4)."""
    q0, q1, q2, q3 = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (q0, q1, q2, q3)))
    a = 1j * np.conj(q0) + mt
    abar = np.conj(a)
    c1 = -2.0 * (q2 * np.conj(q3)).imag
    c2 = -2.0 * (q3 * np.conj(q1)).imag
    c3 = -2.0 * (q1 * np.conj(q2)).imag
    kappa = (a * abar).real + (q1 * np.conj(q1)).real + (q2 * np.conj(q2)).real + (q3 * np.conj(q3)).real
    det = kappa * kappa - (c1 * c1 + c2 * c2 + c3 * c3)
    K = _sigma_dot_np(c1, c2, c3) + kappa[..., None, None] * np.eye(2)
    Kb = _sigma_dot_np(-c1, -c2, -c3) + kappa[..., None, None] * np.eye(2)
    b = _sigma_dot_np(q1, q2, q3)
    bb = _sigma_dot_np(np.conj(q1), np.conj(q2), np.conj(q3))
    w = (1.0 / det)[..., None, None]
    out = np.empty(q0.shape + (4, 4), dtype=complex)
    out[..., :2, :2] = abar[..., None, None] * Kb * w
    out[..., 2:, 2:] = a[..., None, None] * K * w
    out[..., :2, 2:] = -(b @ K) * w
    out[..., 2:, :2] = (bb @ Kb) * w
    return out


def _sigma_dot_np(v1, v2, v3):
    v1, v2, v3 = np.broadcast_arrays(v1, v2, v3)
    out = np.empty(v1.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = v3
    out[..., 0, 1] = v1 - 1j * v2
    out[..., 1, 0] = v1 + 1j * v2
    out[..., 1, 1] = -v3
    return out


def _dirac_direct_np(L, mt, q, ph):
    n = 2 * L
    partial = np.empty((n * n, 4, 4), dtype=complex)
    q2 = q[:, None]
    q3 = q[None, :]
    for n0 in range(n):
        for n1 in range(n):
            inv = dirac_inverse_numpy(q[n0], q[n1], q2, q3, mt)
            phase = ((ph[0, n0] * ph[1, n1]) * ph[2][:, None]) * ph[3][None, :]
            terms = phase[..., None, None] * inv
            partial[n0 * n + n1] = pairwise_sum(terms.reshape(n * n, 4, 4), axis=0)
    return pairwise_sum(partial, axis=0)


def dirac_direct_sum(L, delta, mt, k, backend=None):
    """``sum_p exp(ipx) S(p)^-1`` over the 4D dual lattice (4x4 complex)."""
    _, q, ph = axis_tables(L, delta, k)
    if _use_numba(backend):
        return _dirac_direct_nb(L, mt, q, ph)
    return _dirac_direct_np(L, mt, q, ph)


@njit
def _dirac_accel_block(q1, q2, q3, sq1, sq2, sq3, mt, delta, L, k0, out):
    cd = 1.0 / (1.0 - mt * delta)
    c1 = -2.0 * (q2 * np.conj(q3)).imag
    c2 = -2.0 * (q3 * np.conj(q1)).imag
    c3 = -2.0 * (q1 * np.conj(q2)).imag
    two_rho = math.sqrt(c1 * c1 + c2 * c2 + c3 * c3)
    A2 = mt * mt + ((sq1 + sq2) + sq3)
    Bp = math.sqrt((A2 + two_rho) * cd)
    Bm = math.sqrt((A2 - two_rho) * cd)
    gp0 = _g1_real(Bp, _wrap_abs(k0, L), L, delta)
    gpu = _g1_real(Bp, _wrap_abs(k0 + 1, L), L, delta)
    gpd = _g1_real(Bp, _wrap_abs(k0 - 1, L), L, delta)
    gm0 = _g1_real(Bm, _wrap_abs(k0, L), L, delta)
    gmu = _g1_real(Bm, _wrap_abs(k0 + 1, L), L, delta)
    gmd = _g1_real(Bm, _wrap_abs(k0 - 1, L), L, delta)
    base = mt - 1.0 / delta
    one_p = cd * gp0
    one_m = cd * gm0
    a_p = cd * (base * gp0 + gpu / delta)
    a_m = cd * (base * gm0 + gmu / delta)
    ab_p = cd * (base * gp0 + gpd / delta)
    ab_m = cd * (base * gm0 + gmd / delta)
    # spectral projectors of c.sigma; any split works when rho vanishes
    H = np.zeros((2, 2), dtype=np.complex128)
    if two_rho > 0.0:
        _sigma_dot(c1 / two_rho, c2 / two_rho, c3 / two_rho, H)
    Pp = np.empty((2, 2), dtype=np.complex128)
    Pm = np.empty((2, 2), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            e = 1.0 if i == j else 0.0
            Pp[i, j] = 0.5 * (e + H[i, j])
            Pm[i, j] = 0.5 * (e - H[i, j])
    b = np.empty((2, 2), dtype=np.complex128)
    bb = np.empty((2, 2), dtype=np.complex128)
    t = np.empty((2, 2), dtype=np.complex128)
    u = np.empty((2, 2), dtype=np.complex128)
    _sigma_dot(q1, q2, q3, b)
    _sigma_dot(np.conj(q1), np.conj(q2), np.conj(q3), bb)
    for i in range(2):
        for j in range(2):
            out[i, j] = ab_p * Pp[i, j] + ab_m * Pm[i, j]
            out[2 + i, 2 + j] = a_m * Pp[i, j] + a_p * Pm[i, j]
            t[i, j] = one_m * Pp[i, j] + one_p * Pm[i, j]
            u[i, j] = one_p * Pp[i, j] + one_m * Pm[i, j]
    tt = np.empty((2, 2), dtype=np.complex128)
    _mul2(b, t, tt)
    for i in range(2):
        for j in range(2):
            out[i, 2 + j] = -tt[i, j]
    _mul2(bb, u, tt)
    for i in range(2):
        for j in range(2):
            out[2 + i, j] = tt[i, j]


@njit(parallel=True)
def _dirac_accel_nb(L, delta, mt, k0, q, sq, ph):
    n = 2 * L
    partial = np.empty((n, 4, 4), dtype=np.complex128)
    for n1 in prange(n):
        buf = np.empty((16, n * n), dtype=np.complex128)
        blk = np.empty((4, 4), dtype=np.complex128)
        for n2 in range(n):
            for n3 in range(n):
                _dirac_accel_block(q[n1], q[n2], q[n3], sq[n1], sq[n2], sq[n3], mt, delta, L, k0, blk)
                phase = (ph[1, n1] * ph[2, n2]) * ph[3, n3]
                for e in range(16):
                    buf[e, n2 * n + n3] = phase * blk[e // 4, e % 4]
        for e in range(16):
            partial[n1, e // 4, e % 4] = pairwise_sum_1d(buf[e].copy())
    out = np.empty((4, 4), dtype=np.complex128)
    col = np.empty(n, dtype=np.complex128)
    for e in range(16):
        for r in range(n):
            col[r] = partial[r, e // 4, e % 4]
        out[e // 4, e % 4] = pairwise_sum_1d(col)
    return out


def dirac_accel_blocks_numpy(q1, q2, q3, sq1, sq2, sq3, mt, delta, L, k0):
    """Vectorised time-momentum-summed Dirac blocks, shape (..., 4, 4)."""
    q1, q2, q3, sq1, sq2, sq3 = np.broadcast_arrays(q1, q2, q3, sq1, sq2, sq3)
    cd = 1.0 / (1.0 - mt * delta)
    c1 = -2.0 * (q2 * np.conj(q3)).imag
    c2 = -2.0 * (q3 * np.conj(q1)).imag
    c3 = -2.0 * (q1 * np.conj(q2)).imag
    two_rho = np.sqrt(c1 * c1 + c2 * c2 + c3 * c3)
    A2 = mt * mt + ((sq1 + sq2) + sq3)
    Bp = np.sqrt((A2 + two_rho) * cd)
    Bm = np.sqrt((A2 - two_rho) * cd)
    a0, au, ad = (_wrap_abs_np(k0 + s, L) for s in (0, 1, -1))
    gp0, gpu, gpd = (g1_numpy(Bp, a, L, delta) for a in (a0, au, ad))
    gm0, gmu, gmd = (g1_numpy(Bm, a, L, delta) for a in (a0, au, ad))
    base = mt - 1.0 / delta
    one_p, one_m = cd * gp0, cd * gm0
    a_p = cd * (base * gp0 + gpu / delta)
    a_m = cd * (base * gm0 + gmu / delta)
    ab_p = cd * (base * gp0 + gpd / delta)
    ab_m = cd * (base * gm0 + gmd / delta)
    safe = np.where(two_rho > 0.0, two_rho, 1.0)
    H = _sigma_dot_np(c1 / safe, c2 / safe, c3 / safe)
    has = (two_rho > 0.0)[..., None, None]
    eye = np.eye(2)
    Pp = np.where(has, 0.5 * (eye + H), eye)
    Pm = np.where(has, 0.5 * (eye - H), 0.0)

    def mix(x, y):
        return x[..., None, None] * Pp + y[..., None, None] * Pm

    out = np.empty(q1.shape + (4, 4), dtype=complex)
    out[..., :2, :2] = mix(ab_p, ab_m)
    out[..., 2:, 2:] = mix(a_m, a_p)
    out[..., :2, 2:] = -(_sigma_dot_np(q1, q2, q3) @ mix(one_m, one_p))
    out[..., 2:, :2] = _sigma_dot_np(np.conj(q1), np.conj(q2), np.conj(q3)) @ mix(one_p, one_m)
    return out


def _dirac_accel_np(L, delta, mt, k0, q, sq, ph):
    n = 2 * L
    partial = np.empty((n, 4, 4), dtype=complex)
    for n1 in range(n):
        blk = dirac_accel_blocks_numpy(
            q[n1], q[:, None], q[None, :], sq[n1], sq[:, None], sq[None, :], mt, delta, L, k0
        )
        phase = (ph[1, n1] * ph[2][:, None]) * ph[3][None, :]
        terms = phase[..., None, None] * blk
        partial[n1] = pairwise_sum(terms.reshape(n * n, 4, 4), axis=0)
    return pairwise_sum(partial, axis=0)


def dirac_accel_sum(L, delta, mt, k, backend=None):
    """Spatial dual sum of the time-momentum-summed inverse symbol (4x4).

    Valid only for ``mt * delta < 1``; the caller checks this.
    """
    sq, q, ph = axis_tables(L, delta, k)
    if _use_numba(backend):
        return _dirac_accel_nb(L, delta, mt, int(k[0]), q, sq, ph)
    return _dirac_accel_np(L, delta, mt, int(k[0]), q, sq, ph)


def _use_numba(backend):
    if backend is None:
        return USE_NUMBA
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend == "numba" and USE_NUMBA
