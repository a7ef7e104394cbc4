"""Correlation functions of the interacting model.

Each insertion carries a sign ``r = -1`` (field ``psi``) or ``r = +1``
(field ``psibar``) and a point. The bosonic part of an n-point function is
``det(C)^{-1/2}`` (Euclidean) or ``det(A)^{-1/2}`` (complexified times) with

    c_jk = 2 exp(i (r_j + r_k) pi/4) l^2 S_m(y_j - y_k),   c_jj = 1,

and ``A`` built the same way from the Wightman function. The fermionic part
is the free Dirac Wick-pairing determinant.
"""
from dataclasses import dataclass
import cmath
import math

import numpy as np

from .dirac import continuum_dirac_bessel, continuum_dirac_schwinger, lattice_dirac_propagator
from .quadrature import radial_gl
from .scalar import FOUR_PI2, AdmissibilityError, continuum_schwinger, lattice_propagator_accel, schwinger_bessel


class AnalyticityError(AdmissibilityError):
    """``|P_n| = |det - 1| >= 1``: outside the region where the branch is fixed."""


class FieldSign:
    """Sign ``r`` of an insertion: ``-1`` for ``psi``, ``+1`` for ``psibar``."""

    _ALIASES = {"-": -1, "psi": -1, "+": 1, "psibar": 1}

    def __init__(self, value):
        if isinstance(value, FieldSign):
            value = value.r
        key = str(value).strip().lower()
        if isinstance(value, (int, np.integer)) and value in (-1, 1):
            self.r = int(value)
        elif key in self._ALIASES:
            self.r = self._ALIASES[key]
        else:
            raise ValueError(f"field sign must be one of +, -, psi, psibar; got {value!r}")

    @property
    def is_psi(self):
        return self.r < 0

    @property
    def phase(self):
        return cmath.exp(1j * self.r * math.pi / 4)

    def flipped(self):
        return FieldSign(-self.r)

    def __eq__(self, other):
        return isinstance(other, FieldSign) and other.r == self.r

    def __hash__(self):
        return hash(self.r)

    def __repr__(self):
        return "FieldSign('-')" if self.is_psi else "FieldSign('+')"


def as_signs(signs):
    return [FieldSign(s) for s in signs]


@dataclass(frozen=True)
class ModelParams:
    l: float
    m: float = 1.0
    mt: float = 1.0

    def __post_init__(self):
        if self.l < 0 or not self.m > 0 or not self.mt > 0:
            raise AdmissibilityError("need l >= 0 and positive masses")

    @property
    def ell(self):
        return fundamental_length(self.l)


def fundamental_length(l):
    """``l / (sqrt(2) pi)``: contour heights above it keep ``|4 l^4 D^2| < 1``."""
    if isinstance(l, ModelParams):
        l = l.l
    if l < 0:
        raise AdmissibilityError("l must be nonnegative")
    return l / (math.sqrt(2.0) * math.pi)


@dataclass(frozen=True)
class CorrelationMatrix:
    entries: np.ndarray
    kind: str

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def det(self):
        return complex(np.linalg.det(self.entries)) if self.n else 1.0 + 0j

    @property
    def P_n(self):
        return self.det - 1.0


def _gauss_legendre_box(half_widths, nodes, panels):
    """Composite Gauss-Legendre tensor rule on the box ``[-h_i, h_i]``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    axes = []
    for h in half_widths:
        edges = np.linspace(-h, h, panels + 1)
        a = edges[:-1, None]
        width = np.diff(edges)[:, None]
        axes.append(((a + 0.5 * width * (x + 1)).ravel(), (0.5 * width * w).ravel()))
    return axes


def _check_spd(Lam):
    Lam = np.asarray(Lam, dtype=float)
    n = Lam.shape[0]
    if Lam.shape != (n, n) or n < 1 or n > 4:
        raise ValueError("Lambda must be square with 1 <= n <= 4")
    try:
        np.linalg.cholesky(0.5 * (Lam + Lam.T))
    except np.linalg.LinAlgError as exc:
        raise ValueError("Lambda must be positive definite") from exc
    return Lam


def _tensor_integral(Lam, weight_fn, nodes=None, panels=None):
    """``(2pi)^{-n/2} sqrt(det Lam) int weight(x) exp(-x.Lam.x/2) dx`` on a tensor grid."""
    n = Lam.shape[0]
    nodes = nodes or 16
    panels = panels or {1: 16, 2: 12, 3: 6, 4: 3}[n]
    # marginal standard deviations set the box; 9 sigma leaves e^-40
    half = 9.0 * np.sqrt(np.diag(np.linalg.inv(Lam)))
    axes = _gauss_legendre_box(half, nodes, panels)
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    wts = np.ones_like(grids[0])
    for i, g in enumerate(np.meshgrid(*[a[1] for a in axes], indexing="ij")):
        wts = wts * g
    X = np.stack(grids, axis=-1)
    quad = np.einsum("...i,ij,...j->...", X, Lam, X)
    val = np.sum(wts * weight_fn(X) * np.exp(-0.5 * quad))
    return val * math.sqrt(np.linalg.det(Lam)) / (2 * math.pi) ** (n / 2)


def gaussian_identity_check_A(Lam, y, nodes=None, panels=None):
    """Fourier transform of a normalized Gaussian vs ``exp(-y.Lam^-1.y / 2)``."""
    Lam = _check_spd(Lam)
    y = np.asarray(y, dtype=float)
    lhs = _tensor_integral(Lam, lambda X: np.exp(1j * X @ y), nodes, panels)
    rhs = math.exp(-0.5 * y @ np.linalg.solve(Lam, y))
    return complex(lhs), rhs, abs(lhs - rhs)


def gaussian_identity_check_B(Lam, A_mat, nodes=None, panels=None):
    """Gaussian moment ``<x.A.x>`` vs ``Tr(A Lam^-1)``."""
    Lam = _check_spd(Lam)
    A_mat = np.asarray(A_mat, dtype=float)
    lhs = _tensor_integral(Lam, lambda X: np.einsum("...i,ij,...j->...", X, A_mat, X), nodes, panels)
    rhs = float(np.trace(A_mat @ np.linalg.inv(Lam)))
    return float(np.real(lhs)), rhs, abs(lhs - rhs)


def wick_two_point(l, S):
    """``(1 - 4 l^4 S^2)^{-1/2}`` on the principal branch, for ``|2 l^2 S| < 1``."""
    w = 2.0 * l * l * S
    if abs(w) >= 1.0:
        raise AnalyticityError(f"|2 l^2 S| = {abs(w):.6g} >= 1")
    return (1.0 - w * w) ** -0.5


def wick_two_point_quadrature(l, S, nodes=16):
    """``(2pi)^-1 int int exp(-t^2/2 - s^2/2 - 2 t s l^2 S) dt ds`` by composite Gauss-Legendre."""
    w = 2.0 * l * l * S
    if abs(w) >= 1.0:
        raise AnalyticityError(f"|2 l^2 S| = {abs(w):.6g} >= 1")
    # widest direction has variance 1/(1 - |w|); narrowest 1/(1 + |w|)
    half = 9.5 / math.sqrt(1.0 - abs(w))
    panels = int(math.ceil(2.0 * half / (1.5 / math.sqrt(1.0 + abs(w)))))
    (t, wt), = _gauss_legendre_box([half], nodes, panels)
    total = 0.0
    chunk = max(1, 2_000_000 // t.size)
    for i in range(0, t.size, chunk):
        tt = t[i:i + chunk, None]
        e = np.exp(-0.5 * tt * tt - 0.5 * t[None, :] ** 2 - w * tt * t[None, :])
        total += float(wt[i:i + chunk] @ e @ wt)
    return total / (2 * math.pi)


def _phase(si, sj):
    return cmath.exp(1j * (si.r + sj.r) * math.pi / 4)


def _build(values, signs, l, kind):
    n = len(signs)
    E = np.eye(n, dtype=complex)
    for j in range(n):
        for k in range(j + 1, n):
            E[j, k] = E[k, j] = 2.0 * _phase(signs[j], signs[k]) * l * l * values(j, k)
    return CorrelationMatrix(E, kind)


def build_C(points, signs, params, lattice=None):
    """Euclidean correlation matrix; ``lattice`` switches to the lattice function.

    With a lattice, ``points`` are integer site labels.
    """
    signs = as_signs(signs)
    pts = [np.asarray(p) for p in points]
    if len(pts) != len(signs):
        raise ValueError("points and signs differ in length")

    def value(j, k):
        d = pts[j] - pts[k]
        if lattice is not None:
            return lattice_propagator_accel(lattice, params.m, lattice.wrap(d.astype(int))).real
        if np.all(d == 0):
            raise AdmissibilityError(f"coincident points {j} and {k}")
        if d[0] == 0:
            return float(schwinger_bessel(params.m, 0.0, np.linalg.norm(d[1:])))
        return continuum_schwinger(params.m, d)

    if lattice is not None:
        for j in range(len(pts)):
            for k in range(j + 1, len(pts)):
                if np.all(pts[j] == pts[k]):
                    raise AdmissibilityError(f"coincident points {j} and {k}")
    return _build(value, signs, params.l, "C")


def euclidean_time(z0):
    """Euclidean time ``i z0`` of a complexified time, reflected into ``Re > 0``."""
    t = 1j * complex(z0)
    if t.real == 0.0:
        raise AdmissibilityError("zero imaginary time separation")
    return t if t.real > 0 else -t


def wightman_difference(m, z0, xvec, method="gl"):
    """``D^(-)(z0, xvec)`` for complex ``z0`` with ``Im z0 != 0`` (even continuation)."""
    t = euclidean_time(z0)
    r = float(np.linalg.norm(np.asarray(xvec, dtype=float)))
    if method == "bessel":
        return complex(schwinger_bessel(m, t, r))
    return radial_gl(t, r, m) / FOUR_PI2


def _complex_points(points):
    out = []
    for p in points:
        p = np.asarray(p, dtype=complex)
        if p.shape != (4,) or np.any(p[1:].imag != 0):
            raise ValueError("complex points are (x0 - i eps, x1, x2, x3) with real spatial part")
        out.append(p)
    return out


def build_A(points, signs, params, method="gl"):
    """Correlation matrix from the Wightman function at complexified points."""
    signs = as_signs(signs)
    pts = _complex_points(points)
    if len(pts) != len(signs):
        raise ValueError("points and signs differ in length")

    def value(j, k):
        d = pts[j] - pts[k]
        return wightman_difference(params.m, d[0], d[1:].real, method)

    return _build(value, signs, params.l, "A")


def det_inverse_sqrt(cor):
    """Principal ``det^{-1/2}``, guarded by ``|det - 1| < 1``."""
    E = cor.entries if isinstance(cor, CorrelationMatrix) else np.asarray(cor)
    det = complex(np.linalg.det(E)) if E.size else 1.0 + 0j
    if abs(det - 1.0) >= 1.0:
        raise AnalyticityError(f"|P_n| = {abs(det - 1.0):.6g} >= 1")
    return det ** -0.5


def pairing_sign(signs):
    """Parity of reordering the insertions into ``psi_1 psibar_1 psi_2 psibar_2 ...``."""
    psi = [i for i, s in enumerate(signs) if s.is_psi]
    bar = [i for i, s in enumerate(signs) if not s.is_psi]
    order = [v for pair in zip(psi, bar) for v in pair]
    perm = list(order)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign, psi, bar


def free_dirac_npoint(two_point, signs, spinor_indices):
    """Wick-pairing value ``sign * det[G(psi_a, psibar_b)]``.

    ``two_point(i, j)`` returns the 4x4 matrix ``<psi(i) psibar(j)>``.
    """
    signs = as_signs(signs)
    psi = [i for i, s in enumerate(signs) if s.is_psi]
    bar = [i for i, s in enumerate(signs) if not s.is_psi]
    if len(psi) != len(bar):
        return 0.0 + 0j
    if not psi:
        return 1.0 + 0j
    sign, psi, bar = pairing_sign(signs)
    G = np.empty((len(psi), len(bar)), dtype=complex)
    for a, i in enumerate(psi):
        for b, j in enumerate(bar):
            G[a, b] = two_point(i, j)[spinor_indices[i], spinor_indices[j]]
    return sign * complex(np.linalg.det(G))


def _check_indices(spinor_indices, n):
    if spinor_indices is None:
        return None
    idx = list(spinor_indices)
    if not idx:
        return None
    if len(idx) != n or any(i not in (0, 1, 2, 3) for i in idx):
        raise ValueError("one spinor index in 0..3 per insertion")
    return idx


def npoint_schwinger(points, signs, spinor_indices, params, lattice=None):
    """``det(C)^{-1/2}`` times the free Dirac Wick-pairing factor.

    An empty ``spinor_indices`` gives the bosonic factor alone.
    """
    signs = as_signs(signs)
    idx = _check_indices(spinor_indices, len(signs))
    bos = det_inverse_sqrt(build_C(points, signs, params, lattice))
    if idx is None:
        return bos
    pts = [np.asarray(p) for p in points]

    def two_point(i, j):
        d = pts[i] - pts[j]
        if lattice is not None:
            return lattice_dirac_propagator(lattice, params.mt, lattice.wrap(d.astype(int)), method="accel")
        return continuum_dirac_schwinger(params.mt, d)

    return bos * free_dirac_npoint(two_point, signs, idx)


def npoint_wightman(points, signs, spinor_indices, params, method="gl"):
    """``det(A)^{-1/2}`` times the free Dirac Wightman pairing factor.

    ``points`` are ``(x0 - i eps, x1, x2, x3)`` with distinct ``eps``; the Dirac
    two-point function is the Schwinger function at Euclidean time ``i z0``.
    """
    signs = as_signs(signs)
    pts = _complex_points(points)
    idx = _check_indices(spinor_indices, len(signs))
    bos = det_inverse_sqrt(build_A(pts, signs, params, method))
    if idx is None:
        return bos

    def two_point(i, j):
        d = pts[i] - pts[j]
        x = np.concatenate([[1j * d[0]], d[1:].real])
        if method == "bessel":
            return continuum_dirac_bessel(params.mt, x)
        return continuum_dirac_schwinger(params.mt, x)

    return bos * free_dirac_npoint(two_point, signs, idx)


def reversed_conjugate(points, signs):
    """Configuration whose Wightman value is the complex conjugate (scalar factor)."""
    pts = [np.conj(np.asarray(p, dtype=complex)) for p in reversed(points)]
    return pts, [s.flipped() for s in reversed(as_signs(signs))]


def analyticity_report(points, params, method="gl"):
    """Largest ``|4 l^4 D^2|`` over all pairs and the pair attaining it."""
    pts = _complex_points(points)
    worst = (0.0, None)
    for j in range(len(pts)):
        for k in range(j + 1, len(pts)):
            d = pts[j] - pts[k]
            D = wightman_difference(params.m, d[0], d[1:].real, method)
            v = abs(4 * params.l ** 4 * D * D)
            if v > worst[0]:
                worst = (v, (j, k))
    return worst

