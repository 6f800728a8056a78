"""Linear absorption spectra from lineshape functions.

The spectrum is the half-sided Fourier transform

    A(w) = (1/pi) Re int_0^inf exp(i w t) exp(-g(t) - gamma_add t) dt

of the centred lineshape, so the zero-phonon line sits at ``w = 0``. On a
uniform grid the trapezoid sum is evaluated for all frequencies at once with
an inverse FFT; the discrete area of the result is ``g``-independent up to
the two end bins and the spectrum is scaled to area ``2 pi``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnresolvedSpectrumError, ValidationError
from .specdens import FitSDModel, huang_rhys

TARGET_AREA = 2 * math.pi
DEFAULT_FFT_POINTS = 1 << 20
DEFAULT_PADDING = 4
DECAY_THRESHOLD = 1e-6
NEGATIVE_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sampled absorption spectrum.

    Attributes
    ----------
    omega : ndarray
        Uniform frequency grid in cm^-1, zero-phonon line at 0.
    values : ndarray
        Spectral density of absorption (without any delta-peak mass).
    delta_weight : float
        Weight of a delta-shaped zero-phonon line; it contributes
        ``2 pi * delta_weight`` to the area.
    normalization : float
        Factor that was applied to reach the target area ``2 pi``.
    metadata : dict
        Grid and broadening parameters (``dt``, ``n_points``, ``gamma_add``).
    """

    omega: np.ndarray
    values: np.ndarray
    delta_weight: float = 0.0
    normalization: float = 1.0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if omega.shape != values.shape or omega.ndim != 1:
            raise ValueError("omega and values must be 1-d arrays of equal length")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum values must be finite")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    @property
    def area(self):
        return float(np.trapezoid(self.values, self.omega)) + TARGET_AREA * self.delta_weight

    @property
    def has_negative_excursions(self):
        """True when the spectrum dips below ``-1e-3`` of its maximum."""
        top = np.max(self.values)
        return bool(np.min(self.values) < -NEGATIVE_THRESHOLD * top)

    def peak(self):
        """Position of the main maximum, refined by a parabola through 3 bins."""
        return _parabolic_peak(self.omega, self.values)

    def info(self):
        out = dict(self.metadata)
        out.update(area=self.area, delta_weight=self.delta_weight)
        return out


def default_time_step(sd):
    """``dt`` with Nyquist frequency ``8 * max(largest feature, 2000 cm^-1)``."""
    if isinstance(sd, FitSDModel):
        top = float(np.max(sd.poles.real))
    else:
        top = max((c for c, _ in sd.features()), default=0.0)
    return math.pi / (8 * max(top, 2000.0))


def default_time_grid(sd, n_points=DEFAULT_FFT_POINTS, padding=DEFAULT_PADDING, dt=None):
    """Uniform time grid for :func:`absorption` with room for zero padding."""
    dt = default_time_step(sd) if dt is None else dt
    return np.arange(n_points // padding) * dt


def _window(kind, t):
    if kind is None:
        return None
    x = t / t[-1]
    if kind == "hann":
        return np.cos(0.5 * np.pi * x) ** 2
    if kind == "gaussian":
        # exp(-12.5) ~ 4e-6 at the end of the record
        return np.exp(-0.5 * (5 * x) ** 2)
    raise ValidationError(f"unknown window {kind!r}")


def absorption(g, n_points=None, gamma_add=None, window=None, separate_zpl=False):
    """Absorption spectrum of a centred lineshape.

    Parameters
    ----------
    g : LineshapeSeries
        Sampled on a uniform grid starting at ``t = 0``.
    n_points : int, optional
        FFT length; defaults to ``max(2**20, len(g.t))``. Shorter records
        are zero padded.
    gamma_add : float, optional
        Artificial broadening (HWHM of a Lorentzian, cm^-1). Defaults to 1
        at zero temperature and 0 otherwise.
    window : {None, "hann", "gaussian"}
        Apodization applied when the signal has not decayed at the end of
        the record.
    separate_zpl : bool
        For baths without pure dephasing (``g`` tends to a constant
        ``g_inf``) remove the non-decaying ``exp(-g_inf)`` part and report
        it as ``delta_weight`` instead.

    Returns
    -------
    Spectrum

    Raises
    ------
    UnresolvedSpectrumError
        If the signal at the last time exceeds 1e-6 and no window is given.
    """
    dt = g.dt
    t = g.t
    if gamma_add is None:
        gamma_add = 1.0 if g.temperature == 0 else 0.0
    if gamma_add < 0:
        raise ValidationError("gamma_add must be non-negative")
    n_fft = max(n_points or DEFAULT_FFT_POINTS, t.size)

    signal = np.exp(-g.g - gamma_add * t)
    delta = 0.0
    if separate_zpl:
        if g.g_inf is None or g.dephasing_rate:
            raise ValidationError(
                "zero-phonon line separation needs a lineshape without pure dephasing"
            )
        zpl = np.exp(-g.g_inf)
        signal = signal - zpl * np.exp(-gamma_add * t)
        delta = float(zpl.real)

    win = _window(window, t)
    if win is None:
        if abs(signal[-1]) > DECAY_THRESHOLD:
            raise UnresolvedSpectrumError(
                f"signal has not decayed at t = {t[-1]:.4g} (|f| = {abs(signal[-1]):.3g}); "
                "extend the grid, add broadening or pass a window"
            )
    else:
        signal = signal * win

    buf = np.zeros(n_fft, dtype=complex)
    buf[: t.size] = signal
    # trapezoid: dt * (sum_k f_k e^{i w_j t_k} - f_0 / 2)
    half = dt * (np.fft.ifft(buf) * n_fft - 0.5 * signal[0])
    values = np.fft.fftshift(half.real) / np.pi
    omega = np.fft.fftshift(np.fft.fftfreq(n_fft, d=dt)) * 2 * np.pi

    # the periodic sum of the transform is Re f(0) = 1 - delta; the trapezoid
    # area differs only by the two end bins. Rescale so Spectrum.area is 2 pi.
    total = float(np.trapezoid(values, omega)) + delta
    norm = 1.0 / total if total else 1.0
    meta = {"dt": float(dt), "n_points": int(n_fft), "gamma_add": float(gamma_add),
            "window": window}
    return Spectrum(omega, values * TARGET_AREA * norm, delta * norm, TARGET_AREA * norm, meta)


def t0_weak_coupling_spectrum(sd, omega):
    """Zero-temperature, weak-coupling spectrum ``(1 - X) delta(w) + J/(pi w^2)``.

    The sideband is scaled by ``2 pi`` like every other spectrum here, so it
    reads ``2 J(w) / w^2`` on ``w > 0``.
    """
    X = huang_rhys(sd)
    if X >= 1:
        raise ValidationError(f"Huang-Rhys factor {X:.4g} >= 1: weak-coupling limit invalid")
    omega = np.asarray(omega, dtype=float)
    values = np.zeros_like(omega)
    pos = omega > 0
    values[pos] = TARGET_AREA * np.asarray(sd(omega[pos])) / (np.pi * omega[pos] ** 2)
    return Spectrum(omega, values, 1.0 - X, TARGET_AREA, {"X": X})


def _parabolic_peak(x, y):
    i = int(np.argmax(y))
    if 0 < i < y.size - 1:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        den = y0 - 2 * y1 + y2
        if den != 0:
            return float(x[i] + 0.5 * (y0 - y2) / den * (x[1] - x[0]))
    return float(x[i])


def compare_spectra(a, b):
    """Distances between two spectra on the grid of ``a``.

    ``b`` is linearly interpolated onto ``a.omega`` (zero outside its own
    grid). Both are divided by their areas before differencing, so ``l1``
    lies in [0, 2]; delta masses enter ``l1`` through their weight
    difference. ``peak_shift`` is ``peak(b) - peak(a)``.
    """
    bv = np.interp(a.omega, b.omega, b.values, left=0.0, right=0.0)
    area_a = a.area
    area_b = float(np.trapezoid(bv, a.omega)) + TARGET_AREA * b.delta_weight
    da = a.values / area_a
    db = bv / area_b
    l1 = float(np.trapezoid(np.abs(da - db), a.omega))
    l1 += abs(TARGET_AREA * (a.delta_weight / area_a - b.delta_weight / area_b))
    linf = float(np.max(np.abs(da - db)))
    shift = _parabolic_peak(a.omega, bv) - a.peak()
    return {"l1": l1, "linf": linf, "peak_shift": shift}
