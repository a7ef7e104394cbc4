"""Two-point functionals evaluated on a shifted real contour.

A kernel ``F(zeta, xvec)`` of the difference variable is analytic for
``Im zeta < 0`` (and, for interacting kernels, for ``-Im zeta > ell``). The
functional ``int F(x0 - i eps, xvec) f(x0 - i eps, xvec) d^4x`` is then
independent of ``eps`` by Cauchy's theorem; the routines here evaluate it by
a 4D Gauss-Legendre tensor rule and report how well that independence holds.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import special

from ._accel import pairwise_sum
from .interacting import AnalyticityError, fundamental_length
from .lattice import GAMMA_E, IDENTITY4
from .scalar import FOUR_PI2, AdmissibilityError, schwinger_bessel


class DomainError(AdmissibilityError):
    """Contour height outside the test function's tube."""


@dataclass(frozen=True)
class TestFunction:
    """``exp(-sum_mu (z_mu - c_mu)^2 / sigma_mu^2) * sum_k a_k prod_mu z_mu^{e_k,mu}``.

    Entire and decaying on every horizontal strip. ``sigma`` may be a scalar
    or one width per axis; ``K_max = 10 min(sigma)``.
    """

    __test__ = False  # not a pytest class

    center: tuple = (0.0, 0.0, 0.0, 0.0)
    sigma: object = 1.0
    poly: tuple = ((1.0, (0, 0, 0, 0)),)
    _sig: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sig = np.broadcast_to(np.asarray(self.sigma, dtype=float), (4,)).copy()
        if np.any(sig <= 0):
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "_sig", sig)
        object.__setattr__(self, "center", tuple(complex(c) for c in self.center))

    @property
    def widths(self):
        return self._sig

    @property
    def K_max(self):
        return 10.0 * float(self._sig.min())

    def axis_factor(self, mu, z):
        c = self.center[mu]
        return np.exp(-((z - c) ** 2) / self._sig[mu] ** 2)

    def poly_value(self, z0, x1, x2, x3):
        zs = (z0, x1, x2, x3)
        out = 0.0
        for coef, exps in self.poly:
            term = coef
            for zmu, e in zip(zs, exps):
                if e:
                    term = term * zmu ** e
            out = out + term
        return out

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        g = np.prod([self.axis_factor(mu, z[..., mu]) for mu in range(4)], axis=0)
        return g * self.poly_value(z[..., 0], z[..., 1], z[..., 2], z[..., 3])

    def conjugate_reflection(self):
        """``f*(z) = conj(f(-conj(z)))``, again a member of the family."""
        center = tuple(-np.conj(c) for c in self.center)
        poly = tuple((np.conj(a) * (-1) ** sum(e), tuple(e)) for a, e in self.poly)
        return TestFunction(center, tuple(self._sig), poly)

    def decay_certificate(self, samples=21):
        """Sampled ``sup |z^p f(z)|`` over ``|p| <= 2`` on the tube ``|Im z| <= K_max``."""
        best = 0.0
        ys = np.linspace(-self.K_max, self.K_max, 5)
        for mu in range(4):
            xs = self.center[mu].real + np.linspace(-8, 8, samples) * self._sig[mu]
            zz = xs[:, None] + 1j * ys[None, :]
            g = np.abs(self.axis_factor(mu, zz))
            best = max(best, float(np.max(g * (1 + np.abs(zz)) ** 2)))
        return best


@dataclass(frozen=True)
class ContourSpec:
    epsilon: float
    nodes: int = 64
    extent: float = 8.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("contour height must be positive")


def _euclid(zeta):
    return 1j * zeta


class ScalarPair:
    """``D (1 - 4 l^4 D^2)^{-1/2}``: reduces to the Wightman function at ``l = 0``."""

    def __init__(self, l, m=1.0):
        self.l = float(l)
        self.m = float(m)

    @property
    def ell(self):
        return fundamental_length(self.l)

    def wightman(self, zeta, r):
        return schwinger_bessel(self.m, _euclid(zeta), r)

    def det_factor(self, D):
        if self.l == 0.0:
            return np.ones_like(D)
        return (1.0 - 4.0 * self.l ** 4 * D * D) ** -0.5

    def __call__(self, zeta, xvec):
        D = self.wightman(zeta, np.linalg.norm(xvec, axis=-1))
        return D * self.det_factor(D)


class RhoPair(ScalarPair):
    """``(1 - 4 l^4 D^2)^{-1/2}``: the two-point function of the Wick exponential field."""

    def __call__(self, zeta, xvec):
        return self.det_factor(self.wightman(zeta, np.linalg.norm(xvec, axis=-1)))


class DiracComponent(ScalarPair):
    """Entry ``(alpha, beta)`` of the free Dirac Wightman function, times the det factor."""

    def __init__(self, alpha, beta, mt=1.0, l=0.0, m=1.0):
        super().__init__(l, m)
        if alpha not in range(4) or beta not in range(4):
            raise ValueError("spinor indices are 0..3")
        self.alpha, self.beta, self.mt = alpha, beta, float(mt)

    def __call__(self, zeta, xvec):
        t = _euclid(zeta)
        xvec = np.asarray(xvec, dtype=float)
        s = np.sqrt(t * t + np.sum(xvec * xvec, axis=-1) + 0j)
        S = self.mt * special.kv(1, self.mt * s) / (FOUR_PI2 * s)
        c = self.mt ** 2 * special.kv(2, self.mt * s) / (FOUR_PI2 * s * s)
        a, b = self.alpha, self.beta
        val = self.mt * S * IDENTITY4[a, b] + c * t * GAMMA_E[0][a, b]
        for j in (1, 2, 3):
            if GAMMA_E[j][a, b] != 0:
                val = val + c * xvec[..., j - 1] * GAMMA_E[j][a, b]
        if self.l == 0.0:
            return val
        return val * self.det_factor(self.wightman(zeta, np.linalg.norm(xvec, axis=-1)))


def _check(kernel, f, spec):
    if spec.epsilon > f.K_max:
        raise DomainError(f"epsilon {spec.epsilon} exceeds the tube K_max = {f.K_max}")
    if kernel.l > 0 and spec.epsilon <= kernel.ell:
        raise AnalyticityError(f"epsilon {spec.epsilon} <= fundamental length {kernel.ell:.6g}")


def _axis_rule(center, width, nodes, extent):
    x, w = np.polynomial.legendre.leggauss(nodes)
    half = extent * width
    return center + half * x, half * w


def eval_two_point_functional(kernel, f, spec):
    """``int F(x0 - i eps, xvec) f(x0 - i eps, xvec) d^4x`` by tensor Gauss-Legendre.

    Each axis is truncated to ``Re c_mu +- extent * sigma_mu``.
    """
    _check(kernel, f, spec)
    rules = [_axis_rule(f.center[mu].real, f.widths[mu], spec.nodes, spec.extent) for mu in range(4)]
    x1, x2, x3 = np.meshgrid(rules[1][0], rules[2][0], rules[3][0], indexing="ij")
    xvec = np.stack([x1, x2, x3], axis=-1)
    w_sp = rules[1][1][:, None, None] * rules[2][1][None, :, None] * rules[3][1][None, None, :]
    g_sp = f.axis_factor(1, x1) * f.axis_factor(2, x2) * f.axis_factor(3, x3)
    rows = np.empty(spec.nodes, dtype=complex)
    for i, (x0, w0) in enumerate(zip(*rules[0])):
        zeta = x0 - 1j * spec.epsilon
        vals = kernel(zeta, xvec) * g_sp * f.poly_value(zeta, x1, x2, x3)
        rows[i] = w0 * f.axis_factor(0, zeta) * pairwise_sum((vals * w_sp).ravel())
    return complex(pairwise_sum(rows))


@dataclass(frozen=True)
class InvarianceRow:
    epsilon: float
    value: complex
    deviation: float


def contour_invariance_report(kernel, f, eps_list, nodes=64, extent=8.0):
    """Values at each height and the relative deviation from their mean.

    Returns ``(rows, max_pairwise_relative_deviation)``.
    """
    eps_list = list(eps_list)
    if not eps_list:
        raise ValueError("need at least one contour height")
    vals = [eval_two_point_functional(kernel, f, ContourSpec(e, nodes, extent)) for e in eps_list]
    mean = sum(vals) / len(vals)
    scale = max(abs(mean), 1e-300)
    rows = [InvarianceRow(e, v, abs(v - mean) / scale) for e, v in zip(eps_list, vals)]
    worst = max((abs(a - b) / scale for a in vals for b in vals), default=0.0)
    return rows, worst


def threshold_probe(l, m, eps_fractions, x0_grid=None, r_grid=None):
    """For each ``eps = fraction * ell``, the grid max of ``|4 l^4 D(x0 - i eps, r)^2|``.

    The default grid contains ``x0 = 0, r = 0`` and the light cone ``|x0| = r``.
    """
    ell = fundamental_length(l)
    if x0_grid is None:
        x0_grid = np.concatenate([[0.0], np.geomspace(1e-3, 10.0, 60)])
        x0_grid = np.concatenate([-x0_grid[:0:-1], x0_grid])
    if r_grid is None:
        r_grid = np.concatenate([[0.0], np.geomspace(1e-3, 10.0, 60)])
    X0, R = np.meshgrid(np.asarray(x0_grid, float), np.asarray(r_grid, float), indexing="ij")
    out = []
    for frac in eps_fractions:
        if not frac > 0:
            raise ValueError("multipliers must be positive")
        eps = frac * ell
        D = schwinger_bessel(m, eps + 1j * X0, R)
        # the light cone |x0| = r is where |D| peaks for fixed x0
        Dc = schwinger_bessel(m, eps + 1j * X0, np.abs(X0))
        vmax = max(float(np.max(np.abs(4 * l ** 4 * D * D))), float(np.max(np.abs(4 * l ** 4 * Dc * Dc))))
        out.append((eps, vmax))
    return out
