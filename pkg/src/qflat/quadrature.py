"""Radial quadrature for rotation-invariant momentum integrals.

All continuum quantities reduce to one-dimensional integrals

    I(tau, r) = int_0^inf p^2 w(p r) e^{-omega tau} h(omega) dp,   omega = sqrt(p^2 + m^2)

with ``Re tau > 0``, a spherical weight ``w`` (``sinc`` or ``p j1``) and a
smooth ``h``. The primary rule is panel Gauss-Legendre: panel widths resolve
the half-period of the oscillating factors, the decay length, and the branch
points of ``omega`` at ``p = +-i m``. The cut-off is where ``omega Re(tau)``
reaches ``DECAY_EXPONENT``. A second, independent rule uses QUADPACK.
"""
import math
import warnings

import numpy as np
from scipy import integrate, special

DECAY_EXPONENT = 40.0
GL_NODES = 24
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)


def _pmax(tau, m):
    wmax = DECAY_EXPONENT / tau.real
    return math.sqrt(max(wmax * wmax - m * m, 0.0)) + 1.0


def panel_edges(tau, r, m):
    """Panel boundaries on ``[0, pmax]`` for the integrand family above."""
    tau = complex(tau)
    if tau.real <= 0.0:
        raise ValueError("radial integrals need Re(tau) > 0")
    hmax = 4.0 / tau.real
    if r > 0.0:
        hmax = min(hmax, math.pi / r)
    if tau.imag != 0.0:
        hmax = min(hmax, math.pi / abs(tau.imag))
    pmax = _pmax(tau, m)
    edges = [0.0]
    p = 0.0
    while p < pmax:
        p += min(hmax, 0.5 * (m + p))
        edges.append(p)
    return np.array(edges)


def gl_nodes(edges):
    """Flattened Gauss-Legendre nodes and weights over the given panels."""
    a = edges[:-1, None]
    h = np.diff(edges)[:, None]
    x = a + 0.5 * h * (_GL_X[None, :] + 1.0)
    w = 0.5 * h * _GL_W[None, :]
    return x.ravel(), w.ravel()


def spherical_weight(kind, p, r):
    """``sinc``: ``sin(pr)/(pr)``; ``j1``: ``j1(pr)``."""
    if kind == "sinc":
        return np.sinc(p * r / math.pi)
    if kind == "j1":
        return special.spherical_jn(1, p * r)
    raise ValueError(f"unknown weight {kind!r}")


def radial_gl(tau, r, m, kind="sinc", power=2, inv_omega=True):
    """Panel Gauss-Legendre value of ``int p^power w(pr) e^{-omega tau} / omega^s dp``.

    ``s = 1`` when ``inv_omega`` else ``0``.
    """
    tau = complex(tau)
    p, w = gl_nodes(panel_edges(tau, r, m))
    om = np.sqrt(p * p + m * m)
    f = p ** power * spherical_weight(kind, p, r) * np.exp(-om * tau)
    if inv_omega:
        f = f / om
    val = np.dot(w, f)
    return val if tau.imag != 0.0 else complex(val.real, 0.0)


def radial_quadpack(tau, r, m, kind="sinc", power=2, inv_omega=True):
    """Same integral by adaptive QUADPACK, using the sine weight where possible."""
    tau = complex(tau)
    if tau.real <= 0.0:
        raise ValueError("radial integrals need Re(tau) > 0")
    pmax = _pmax(tau, m)

    def base(p, part):
        om = math.sqrt(p * p + m * m)
        v = p ** power * np.exp(-om * tau)
        if inv_omega:
            v /= om
        return v.real if part == 0 else v.imag

    out = []
    with warnings.catch_warnings():
        # roundoff notices near the requested 1e-12 are expected and harmless
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for part in (0, 1):
            out.append(_quadpack_part(base, part, tau, r, kind, pmax))
    return complex(out[0], out[1])


def _quadpack_part(base, part, tau, r, kind, pmax):
    if part == 1 and tau.imag == 0.0:
        return 0.0
    if kind == "sinc" and r > 0.0:
        val, _ = integrate.quad(
            lambda p: base(p, part) / (p * r) if p > 0.0 else 0.0, 0.0, pmax,
            weight="sin", wvar=r, limit=4000, epsabs=0.0, epsrel=1e-12,
        )
    else:
        val, _ = integrate.quad(
            lambda p: base(p, part) * spherical_weight(kind, p, r), 0.0, pmax,
            limit=4000, epsabs=0.0, epsrel=1e-12,
        )
    return val
