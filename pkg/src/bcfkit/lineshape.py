"""Lineshape function ``g(t) = int_0^t dt' int_0^t' dt'' alpha(t'')``.

``LineshapeSeries.g`` stores the centred lineshape, i.e. without the
``-i E_lambda t`` drift, so that the zero-phonon line of the resulting
spectrum sits at zero frequency. ``full()`` restores the drift.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .quadrature import frequency_support, integrate_panels, magnitude, panel_edges
from .specdens import reorganization_energy
from .units import kelvin_to_invcm

E_LAMBDA_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class LineshapeSeries:
    """Sampled lineshape function.

    Attributes
    ----------
    t : ndarray
        Time grid (conjugate to cm^-1).
    g : ndarray of complex
        Centred lineshape, ``g(0) = 0``.
    E_lambda : float
        Reorganization energy removed from the imaginary part.
    source : {"analytic", "quadrature"}
    temperature : float
        Kelvin.
    dephasing_rate : float or None
        Long-time slope of ``Re g`` (zero for superohmic baths).
    g_inf : complex or None
        Long-time limit of ``g - dephasing_rate * t`` when it exists.
    """

    t: np.ndarray
    g: np.ndarray
    E_lambda: float
    source: str
    temperature: float
    dephasing_rate: float = None
    g_inf: complex = None

    def full(self):
        return self.g - 1j * self.E_lambda * self.t

    @property
    def dt(self):
        d = np.diff(self.t)
        if d.size == 0 or self.t[0] != 0 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ValueError("lineshape is not sampled on a uniform grid starting at t=0")
        return float(d[0])


def g_from_exponential(bcf, t, E_lambda=None):
    """Closed-form lineshape of an exponential correlation function.

    Each mode contributes ``p [(e^{iwt} - 1)/(iw)^2 - t/(iw)]``. The
    reorganization energy is taken from quadrature of the underlying model
    (when known) and must agree with the linear-in-t imaginary slope of the
    closed form to 1e-6 relative.
    """
    t = np.asarray(t, dtype=float)
    w = bcf.frequencies
    p = bcf.prefactors
    z = 1j * np.multiply.outer(t, w)
    full = (-np.expm1(z) / w**2 + 1j * np.multiply.outer(t, 1.0 / w)) @ p

    slope = 1j * np.sum(p / w)
    e_slope = -slope.imag
    if E_lambda is None and bcf.model is not None:
        E_lambda = reorganization_energy(bcf.model)
        if abs(E_lambda - e_slope) > E_LAMBDA_RTOL * abs(E_lambda):
            raise NumericalError(
                f"reorganization energy mismatch: quadrature {E_lambda:.10g}, "
                f"closed form {e_slope:.10g}"
            )
    elif E_lambda is None:
        E_lambda = e_slope
    g = full + 1j * E_lambda * t
    return LineshapeSeries(
        t, g, float(E_lambda), "analytic", bcf.temperature,
        dephasing_rate=float(slope.real), g_inf=complex(np.sum(p / w**2)),
    )


def _thermal(T):
    if T == 0:
        return lambda w: np.ones_like(w)
    return lambda w: 1.0 / np.tanh(w / (2 * T))


def _asymptotics(sd, T, rtol):
    """Dephasing rate and long-time offset of the centred lineshape."""
    weight = _thermal(T)
    c1 = sd.derivative_at_zero()
    rate = T * c1 if T > 0 else 0.0
    g_inf = None
    if sd.low_exponent >= 3:
        f = lambda w: sd(w) * weight(w) / w**2
        edges = panel_edges(sd)
        val, _ = integrate_panels(f, edges, rtol=rtol * 1e-2,
                                  atol=rtol * 1e-2 * magnitude(f, sd))
        g_inf = val / np.pi
    return rate, g_inf


def g_from_sd_quadrature(sd, temperature, t, method="auto", rtol=1e-8):
    """Centred lineshape of ``sd`` from its frequency integral.

    ``g(t) = (1/pi) int J coth(w/2T) (1 - cos wt)/w^2 dw
             + (i/pi) int J sin(wt)/w^2 dw``

    Parameters
    ----------
    method : {"auto", "adaptive", "fft"}
        "adaptive" runs oscillatory QUADPACK per time point. "fft" evaluates
        both Fourier integrals on a fine uniform frequency grid at once and
        needs a uniform time grid starting at 0; "auto" picks "fft" for
        uniform grids longer than 64 points.
    """
    t = np.asarray(t, dtype=float)
    T = kelvin_to_invcm(temperature)
    if method == "auto":
        uniform = (
            t.ndim == 1 and t.size > 64 and t[0] == 0
            and np.allclose(np.diff(t), t[1] - t[0], rtol=1e-9, atol=0)
        )
        method = "fft" if uniform else "adaptive"
    E = reorganization_energy(sd)
    rate, g_inf = _asymptotics(sd, T, rtol)
    if method == "adaptive":
        g = _g_adaptive(sd, T, t, rtol)
    elif method == "fft":
        g = _g_fft(sd, T, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    return LineshapeSeries(t, g, float(E), "quadrature", float(temperature),
                           dephasing_rate=float(rate), g_inf=g_inf)


def _g_adaptive(sd, T, t, rtol):
    weight = _thermal(T)
    edges = panel_edges(sd)
    f = lambda w: sd(w) * weight(w) / w**2
    h = lambda w: sd(w) / w**2
    # split 1 - cos only for superohmic integrands where int f converges
    out = np.empty(t.shape, dtype=complex)
    scale_f = magnitude(lambda w: sd(w) * weight(w), sd)
    for idx, tt in np.ndenumerate(t):
        if tt == 0:
            out[idx] = 0.0
            continue
        re_f = lambda w: f(w) * 2.0 * np.sin(0.5 * w * tt) ** 2
        atol = rtol * 1e-2 * scale_f * tt**2
        re, _ = integrate_panels(re_f, edges, rtol=rtol, atol=atol)
        im, _ = integrate_panels(h, edges, rtol=rtol, atol=atol, weight="sin", wvar=abs(tt))
        out[idx] = (re + 1j * math.copysign(1.0, tt) * im) / np.pi
    return out


FFT_MAX_FOLDS = 32
# frequency step at most this fraction of the narrowest feature (pole width,
# thermal strip 2 pi T); log-normal densities, which vary on ever smaller
# scales towards w = 0, need the small fraction
FFT_WIDTH_FRACTION = 1 / 64
FFT_MAX_BINS = 1 << 24


def _second_coefficient(sd, peak):
    """``J''(0+) / 2``, zero for odd analytic J up to rounding."""
    if sd.low_exponent > 1:
        return 0.0
    e = 1e-4 * peak
    j1, j2 = (float(v) for v in sd(np.array([e, 2 * e])))
    return (j2 - 2 * j1) / (2 * e**2)


def _g_fft(sd, T, t):
    """Trapezoid-rule Fourier integrals on a frequency grid of spacing dw.

    On the time grid ``t_k = k dt`` the trapezoid sum over ``w_j = j dw`` is
    periodic in ``j`` with period ``n_w``, so the frequency grid is folded
    onto ``n_w`` bins before a single FFT. For ohmic baths the ``c/w^2`` and
    ``d/w`` singular parts of ``J coth / w^2`` are removed and integrated
    analytically.
    """
    t = np.asarray(t, dtype=float)
    if t.size < 2 or t[0] != 0:
        raise ValueError("fft lineshape needs a uniform grid starting at 0")
    dt = t[1] - t[0]
    nt = t.size
    widths = [w for _, w in sd.features() if w > 0]
    if T > 0:
        widths.append(2 * math.pi * T)
    n_min = 4 * nt
    if widths:
        n_min = max(n_min, 2 * math.pi / (dt * FFT_WIDTH_FRACTION * min(widths)))
    n_w = 1 << int(math.ceil(math.log2(min(n_min, FFT_MAX_BINS))))
    dw = 2 * math.pi / (n_w * dt)
    weight = _thermal(T)
    c1 = sd.derivative_at_zero()
    peak, cut = frequency_support(sd)

    sing2 = 2 * T * c1 if T > 0 else 0.0
    sing1 = 0.0
    kappa = peak
    if c1 != 0.0:
        eps = 1e-5 * peak
        f_eps = float(sd(eps)) * float(weight(np.array(eps))) / eps**2
        sing1 = eps * (f_eps - sing2 / eps**2)

    # a kink of J at 0 (J''(0+) != 0) makes J sin(wt)/w^2 non-smooth as an
    # even function; its leading part c2 exp(-w/kappa) is integrated exactly
    c2 = _second_coefficient(sd, peak)

    def regular(w):
        Jw = np.asarray(sd(w), dtype=float)
        damp = np.exp(-w / kappa)
        f = Jw * weight(w) / w**2 - sing2 / w**2 - sing1 * damp / w
        return f, Jw / w**2 - c2 * damp

    n_fold = int(min(max(1, math.ceil(cut / (n_w * dw))), FFT_MAX_FOLDS))
    f_bins = np.zeros(n_w)
    h_bins = np.zeros(n_w)
    for k in range(n_fold):
        j0 = 1 if k == 0 else 0
        w = (k * n_w + np.arange(j0, n_w)) * dw
        f, h = regular(w)
        f_bins[j0:] += f
        h_bins[j0:] += h

    F = np.fft.ifft(f_bins)[:nt] * n_w * dw
    H = np.fft.ifft(h_bins)[:nt] * n_w * dw
    re = np.sum(f_bins) * dw - F.real
    re += sing2 * math.pi * t / 2 + sing1 * 0.5 * np.log1p((kappa * t) ** 2)

    # mass beyond the folded grid: cos(wt) averages out for every t >= dt
    w_top = n_fold * n_w * dw
    if cut > w_top:
        tail_f = lambda x: regular(x)[0]
        edges = np.geomspace(w_top, cut, max(3, int(6 * math.log10(cut / w_top))))
        tail, _ = integrate_panels(tail_f, edges, rtol=1e-10,
                                   atol=1e-14 * abs(np.sum(f_bins) * dw))
        re[1:] += tail
    # beyond the cutoff J is negligible but the subtracted c/w^2 is not
    re[1:] -= sing2 / max(cut, w_top)
    # half-weight node at w = 0 where J sin(wt)/w^2 -> J'(0) t
    im = H.imag + 0.5 * dw * c1 * t + c2 * kappa**2 * t / (1 + (kappa * t) ** 2)
    return (re + 1j * im) / np.pi
