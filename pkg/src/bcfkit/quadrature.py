"""Adaptive quadrature over the positive frequency axis.

Integrands are smooth with algebraic or exponential tails and sharp
Lorentzian-like features near pole real parts. The axis is split into panels
(log-spaced decades refined around each feature) up to a cutoff where the
spectral density has fallen below 1e-12 of its maximum; each panel goes to
QUADPACK, with the QAWO variant for cos/sin weights. An analytic power-law
tail correction covers the rest.
"""

import math
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError

_SCAN = np.geomspace(1e-6, 1e14, 4001)
CUTOFF_RATIO = 1e-12


def _scan(sd):
    with np.errstate(all="ignore"):
        vals = np.abs(np.nan_to_num(np.asarray(sd(_SCAN), dtype=float)))
    return vals


def frequency_support(sd):
    """Return ``(peak, cut)``: location of max |J| and the cutoff frequency."""
    vals = _scan(sd)
    imax = int(np.argmax(vals))
    above = np.nonzero(vals >= CUTOFF_RATIO * vals[imax])[0]
    icut = min(above[-1] + 1, _SCAN.size - 1)
    return float(_SCAN[imax]), float(_SCAN[icut])


def panel_edges(sd, per_decade=6, cut=None):
    peak, auto_cut = frequency_support(sd)
    cut = auto_cut if cut is None else cut
    feats = sd.features()
    lo_candidates = [peak] + [c for c, _ in feats] + [w for _, w in feats]
    lo = 1e-4 * min(lo_candidates)
    ndec = max(2, int(math.ceil(math.log10(cut / lo) * per_decade)))
    edges = set(np.geomspace(lo, cut, ndec).tolist())
    edges.add(0.0)
    for centre, width in feats:
        for k in (-8, -4, -2, -1, -0.5, 0, 0.5, 1, 2, 4, 8):
            x = centre + k * width
            if 0 < x < cut:
                edges.add(x)
    return np.array(sorted(edges))


def _quad(func, a, b, epsabs, epsrel, weight=None, wvar=None, limit=200):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if weight is None:
            res = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel,
                                 limit=limit, full_output=1)
        else:
            res = integrate.quad(func, a, b, weight=weight, wvar=wvar,
                                 epsabs=epsabs, epsrel=epsrel, limit=limit,
                                 full_output=1)
    return res[0], res[1]


def integrate_panels(func, edges, rtol=1e-10, atol=0.0, weight=None, wvar=None):
    """Sum QUADPACK integrals of ``func`` over consecutive panels.

    Raises ``QuadratureError`` when the accumulated error estimate exceeds the
    requested tolerance by more than an order of magnitude.
    """
    total = 0.0
    err = 0.0
    npan = len(edges) - 1
    panel_atol = atol / max(npan, 1)
    for a, b in zip(edges[:-1], edges[1:]):
        if weight is not None and wvar * (b - a) < 1.0:
            # few oscillations: plain Gauss-Kronrod on the weighted integrand
            trig = np.cos if weight == "cos" else np.sin
            val, e = _quad(lambda w: func(w) * trig(wvar * w), a, b, panel_atol, rtol)
        else:
            val, e = _quad(func, a, b, panel_atol, rtol, weight=weight, wvar=wvar)
        total += val
        err += e
    if not math.isfinite(total) or err > 10 * max(atol, rtol * abs(total)):
        raise QuadratureError(
            f"quadrature did not converge: value {total:.6g}, error estimate {err:.3g}",
            value=total, error=err,
        )
    return total, err


def magnitude(func, sd):
    """Rough scale of ``int |func|`` from the scan grid, for absolute tolerances."""
    peak, cut = frequency_support(sd)
    grid = _SCAN[(_SCAN > 1e-6 * peak) & (_SCAN <= cut)]
    with np.errstate(all="ignore"):
        vals = np.abs(np.nan_to_num(np.asarray(func(grid), dtype=float)))
    return float(np.trapezoid(vals, grid)) or 1.0


def integrate_sd(sd, func, power=0, rtol=1e-8):
    """``int_0^inf func(w) dw`` where ``func ~ J(w) w^power`` at large w."""
    edges = panel_edges(sd)
    scale = magnitude(func, sd)
    val, _ = integrate_panels(func, edges, rtol=rtol * 1e-2, atol=rtol * 1e-2 * scale)
    h = sd.high_exponent + power
    if math.isfinite(h):
        cut = edges[-1]
        if h >= -1:
            raise QuadratureError("integral diverges at large frequency")
        val += -float(func(cut)) * cut / (h + 1)
    return val
