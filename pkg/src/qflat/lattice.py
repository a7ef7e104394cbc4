"""Lattice geometry, dual lattice, difference-operator symbols and gamma matrices.

A lattice with parameters ``(M, N)`` has ``L = M*N``, spacing
``delta = sqrt(pi)/M`` and ``2L`` sites per axis at ``j*delta`` with
``j in (-L, L]``. The dual lattice has spacing ``eta = sqrt(pi)/N`` and the
same index range, so that ``delta*eta = pi/L``. Arrays over the lattice are
stored with axis index ``n = j + L - 1`` (lexicographic in ``(j0, j1, j2, j3)``).
"""
from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

DIM = 4


class LatticeError(ValueError):
    """Invalid lattice parameters or out-of-range lattice indices."""


@dataclass(frozen=True)
class LatticeParams:
    M: int
    N: int

    def __post_init__(self):
        for name in ("M", "N"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise LatticeError(f"{name} must be a positive integer, got {v!r}")

    @property
    def L(self):
        return self.M * self.N

    @property
    def delta(self):
        return math.sqrt(math.pi) / self.M

    @property
    def eta(self):
        return math.sqrt(math.pi) / self.N

    @property
    def size(self):
        """Number of sites per axis (``2L``)."""
        return 2 * self.L

    @property
    def volume(self):
        return self.size ** DIM

    @cached_property
    def indices(self):
        """Integer labels ``j = -L+1, ..., L`` of one axis, in storage order."""
        return np.arange(-self.L + 1, self.L + 1)

    @cached_property
    def momenta(self):
        """Dual-lattice momenta ``j*eta`` of one axis, in storage order."""
        return self.indices * self.eta

    @cached_property
    def coordinates(self):
        return self.indices * self.delta

    def wrap(self, j):
        """Map integer labels into ``(-L, L]`` (periodic identification)."""
        j = np.asarray(j)
        return (j + self.L - 1) % self.size - self.L + 1

    def check_index(self, j):
        j = np.asarray(j)
        if np.any(j <= -self.L) or np.any(j > self.L):
            raise LatticeError(f"lattice label out of range (-{self.L}, {self.L}]: {j}")
        return j

    def nearest_site(self, x):
        """Nearest lattice labels to the real 4-vector ``x`` (wrapped)."""
        x = np.asarray(x, dtype=float)
        return self.wrap(np.rint(x / self.delta).astype(np.int64))


def make_lattice(M, N):
    """Return :class:`LatticeParams` for positive integers ``M`` and ``N``."""
    return LatticeParams(M, N)


@dataclass(frozen=True)
class LatticeSite:
    """A site label ``j`` (4 integers) on a given lattice."""

    j: tuple
    params: LatticeParams

    def __post_init__(self):
        j = tuple(int(v) for v in self.j)
        if len(j) != DIM:
            raise LatticeError("a lattice site has 4 integer labels")
        self.params.check_index(j)
        object.__setattr__(self, "j", j)

    @property
    def x(self):
        return np.array(self.j, dtype=float) * self.params.delta

    def __add__(self, other):
        j = self.params.wrap(np.add(self.j, other.j))
        return LatticeSite(tuple(j), self.params)

    def __neg__(self):
        return LatticeSite(tuple(self.params.wrap(-np.array(self.j))), self.params)


@dataclass(frozen=True)
class MomentumPoint:
    """A dual-lattice momentum ``p = k*eta`` with integer labels ``k``."""

    k: tuple
    params: LatticeParams

    def __post_init__(self):
        k = tuple(int(v) for v in self.k)
        if len(k) != DIM:
            raise LatticeError("a momentum has 4 integer labels")
        self.params.check_index(k)
        object.__setattr__(self, "k", k)
        assert np.all(np.abs(self.p * self.params.delta) <= math.pi * (1 + 1e-15))

    @property
    def p(self):
        return np.array(self.k, dtype=float) * self.params.eta


def _as_momentum(p, params):
    if isinstance(p, MomentumPoint):
        return p.p
    return np.asarray(p, dtype=float)


def momentum_symbol_q(p, params):
    """Backward-difference symbols ``q_mu = (1 - exp(-i p_mu delta)) / (i delta)``.

    ``p`` is a :class:`MomentumPoint` or a real array with trailing axis 4.
    The forward difference has symbol ``i * conj(q_mu)``.
    """
    p = _as_momentum(p, params)
    d = params.delta
    return (1.0 - np.exp(-1j * p * d)) / (1j * d)


def symbol_sq(p, params):
    """``|q_mu|^2 = (2 - 2 cos p_mu delta) / delta^2``, computed stably."""
    p = _as_momentum(p, params)
    d = params.delta
    s = np.sin(0.5 * p * d)
    return 4.0 * s * s / (d * d)


# Pauli matrices sigma_0..sigma_3.
PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _build_gammas():
    z = np.zeros((2, 2), dtype=complex)
    g = np.empty((DIM, 4, 4), dtype=complex)
    g[0] = np.block([[PAULI[0], z], [z, -PAULI[0]]])
    for j in (1, 2, 3):
        g[j] = np.block([[z, -1j * PAULI[j]], [1j * PAULI[j], z]])
    g.setflags(write=False)
    return g


GAMMA_E = _build_gammas()
IDENTITY4 = np.eye(4, dtype=complex)
P_PLUS = 0.5 * (IDENTITY4 + GAMMA_E[0])
P_MINUS = 0.5 * (IDENTITY4 - GAMMA_E[0])


def gamma_euclidean(mu):
    """Euclidean gamma matrix ``gamma^E_mu`` (4x4 complex copy)."""
    if mu not in (0, 1, 2, 3):
        raise LatticeError(f"gamma index must be 0..3, got {mu!r}")
    return GAMMA_E[mu].copy()


def projectors():
    """Return ``(P_plus, P_minus)`` with ``P_pm = (1 +- gamma^E_0) / 2``."""
    return P_PLUS.copy(), P_MINUS.copy()


def _phases(params):
    n = np.arange(params.size)
    j0 = 1 - params.L
    pre = np.exp(-1j * np.pi * n * j0 / params.L)
    post = pre * np.exp(-1j * np.pi * j0 * j0 / params.L)
    return pre, post


def _signed_sum(field, params):
    """``sum_j exp(-i pi j.k / L) field[j]`` over all four axes, via FFT."""
    pre, post = _phases(params)
    out = np.asarray(field, dtype=complex)
    for axis in range(DIM):
        shape = [1] * DIM
        shape[axis] = -1
        out = np.fft.fft(out * pre.reshape(shape), axis=axis) * post.reshape(shape)
    return out


def _check_shape(field, params):
    expected = (params.size,) * DIM
    if np.shape(field) != expected:
        raise LatticeError(f"field shape {np.shape(field)} does not match lattice {expected}")


def lattice_fourier(field, params):
    """Lattice Fourier transform ``(2pi)^-2 sum_x exp(-ipx) field(x) delta^4``."""
    _check_shape(field, params)
    return _signed_sum(field, params) * (params.delta ** 4 / (2 * np.pi) ** 2)


def inverse_lattice_fourier(field_p, params):
    """Inverse transform ``(2pi)^-2 sum_p exp(ipx) field(p) eta^4``."""
    _check_shape(field_p, params)
    out = np.conj(_signed_sum(np.conj(np.asarray(field_p, dtype=complex)), params))
    return out * (params.eta ** 4 / (2 * np.pi) ** 2)
