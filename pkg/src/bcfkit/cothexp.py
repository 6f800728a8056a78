"""Finite pole expansions of the hyperbolic cotangent.

All expansions share the form::

    C(x) = 1/x + sum_l eta_l * (1/(x - xi_l) + 1/(x - conj(xi_l)))

with ``Im xi_l > 0``. The Matsubara expansion keeps the first ``L`` exact
poles ``i pi l``; the Pade expansion places ``L`` purely imaginary poles from
two tridiagonal eigenproblems and converges far faster. The zero-temperature
variant replaces coth by its sign (``coth(x) ~ 1`` for ``Re x > 0``) and has no
poles at all.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .tridiag import tridiagonal_eigvalsh


class Scheme(str, enum.Enum):
    MATSUBARA = "matsubara"
    PADE = "pade"
    ZERO = "zero"
    CROY_SAALMANN = "croy_saalmann"


POLE_DISTANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CothExpansion:
    """Pole/residue representation of coth(x).

    Attributes
    ----------
    scheme : Scheme
    xi : ndarray of complex, shape (L,)
        Poles in the upper half plane.
    eta : ndarray of float, shape (L,)
        Residues; each pole pair ``xi, conj(xi)`` carries the same residue.
    has_head : bool
        Whether the explicit ``1/x`` term is present.
    """

    scheme: Scheme
    xi: np.ndarray
    eta: np.ndarray
    has_head: bool = True

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex).reshape(-1)
        eta = np.asarray(self.eta, dtype=float).reshape(-1)
        if xi.shape != eta.shape:
            raise ValueError("xi and eta must have the same length")
        if np.any(xi.imag <= 0):
            raise ValueError("expansion poles must lie in the upper half plane")
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)

    @property
    def L(self):
        return self.xi.size

    def __call__(self, x):
        return eval_expansion(self, x)

    def frequency_poles(self, temperature_invcm):
        """Poles ``2 T xi_l`` and residues ``2 T eta_l`` of ``C(omega / 2T)`` in omega."""
        two_t = 2.0 * temperature_invcm
        return two_t * self.xi, two_t * self.eta


def matsubara(L):
    if L < 1:
        raise ValueError("Matsubara expansion needs L >= 1")
    ell = np.arange(1, L + 1)
    return CothExpansion(Scheme.MATSUBARA, 1j * np.pi * ell, np.ones(L))


def _pade_matrix_eigs(dim, shift):
    # zero diagonal, off-diagonals 1/sqrt((2j+shift)(2j+2+shift)), j = 1..dim-1
    j = np.arange(1, dim)
    off = 1.0 / np.sqrt((2 * j + shift) * (2 * (j + 1) + shift))
    ev = tridiagonal_eigvalsh(np.zeros(dim), off)
    tol = 1e-12 * max(1.0, np.max(np.abs(ev))) if ev.size else 0.0
    return np.sort(ev[ev > tol])[::-1]


def pade(L):
    """Pade expansion of coth with ``L`` pole pairs on the imaginary axis."""
    if L < 1:
        raise ValueError("Pade expansion needs L >= 1")
    lam = _pade_matrix_eigs(2 * L, 1)
    if lam.size != L:
        raise ArithmeticError("unexpected number of positive eigenvalues")
    # |xi| = 1/lam; xi^2 = -1/lam^2
    xi_abs = 1.0 / lam
    if L > 1:
        lam_t = _pade_matrix_eigs(2 * L - 1, 3)
        zeta = 1.0 / lam_t
    else:
        zeta = np.zeros(0)

    xi_sq = -(xi_abs**2)
    zeta_sq = zeta**2
    eta = np.empty(L)
    pref = 0.5 * L * (2 * L + 3)
    for j in range(L):
        num = zeta_sq + xi_sq[j]
        den = xi_sq[j] - np.delete(xi_sq, j)
        if L > 12:
            sign = np.prod(np.sign(num)) * np.prod(np.sign(den))
            logmag = np.sum(np.log(np.abs(num))) - np.sum(np.log(np.abs(den)))
            eta[j] = pref * sign * math.exp(logmag)
        else:
            eta[j] = pref * np.prod(num) / np.prod(den)
    return CothExpansion(Scheme.PADE, 1j * xi_abs, eta)


def zero_temperature():
    return CothExpansion(Scheme.ZERO, np.zeros(0, dtype=complex), np.zeros(0), has_head=False)


def expansion(scheme, L=0):
    """Build an expansion by scheme name."""
    scheme = Scheme(scheme)
    if scheme is Scheme.MATSUBARA:
        return matsubara(L)
    if scheme is Scheme.PADE:
        return pade(L)
    if scheme is Scheme.ZERO:
        return zero_temperature()
    raise NotImplementedError(
        "the Croy/Saalmann partial-fraction expansion is not supported "
        "(its poles require high-precision polynomial root finding)"
    )


def eval_expansion(c, x):
    """Evaluate ``C(x)`` for real or complex ``x``.

    For the zero-temperature scheme this is ``sign(Re x)``, i.e. 1 on the
    positive real axis.
    """
    x = np.asarray(x)
    if c.scheme is Scheme.ZERO:
        return np.sign(np.real(x)).astype(float)
    xc = x.astype(complex)
    if c.L:
        poles = np.concatenate([c.xi, c.xi.conj()])
        dist = np.min(np.abs(xc[..., None] - poles), axis=-1)
    else:
        dist = np.full(xc.shape, np.inf)
    if c.has_head:
        dist = np.minimum(dist, np.abs(xc))
    if np.any(dist <= POLE_DISTANCE):
        raise ValueError("argument too close to a pole of the coth expansion")
    out = 1.0 / xc if c.has_head else np.zeros_like(xc)
    for xi_l, eta_l in zip(c.xi, c.eta):
        out = out + eta_l * (1.0 / (xc - xi_l) + 1.0 / (xc - np.conj(xi_l)))
    if np.isrealobj(x):
        return out.real
    return out


def expansion_error(c, x_lo, x_hi, num=10_000):
    """Largest relative deviation from coth on a log grid over ``[x_lo, x_hi]``."""
    if not 0 < x_lo < x_hi:
        raise ValueError("need 0 < x_lo < x_hi")
    x = np.geomspace(x_lo, x_hi, num)
    exact = 1.0 / np.tanh(x)
    return float(np.max(np.abs(eval_expansion(c, x) - exact) / exact))
