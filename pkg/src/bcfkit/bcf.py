"""Bath correlation functions as finite sums of exponentials.

For a fit-family spectral density and a pole expansion of coth, the
correlation function

    alpha(t) = (1/pi) int_0^inf J(w) (coth(w/2T) cos(wt) - i sin(wt)) dw

is evaluated by residues. The imaginary part ``b(t)`` only sees the poles of
J; the real part ``a(t)`` sees the poles of J (weighted by the exact coth at
the pole) and the poles ``2T xi_l`` of the coth expansion, whose residue in
omega is ``2T eta_l``. ``a`` and ``b`` are assembled separately and combined
as ``alpha = a + i b``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import cothexp
from .cothexp import Scheme
from .errors import InvalidTemperatureError, PoleCollisionError, QuadratureError, ValidationError
from .parallel import ordered_map
from .quadrature import integrate_panels, integrate_sd, magnitude, panel_edges
from .specdens import FitSDModel
from .units import kelvin_to_invcm

POLE_EPS = 1e-6
COTH_POLE_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class ExponentialBCF:
    """``alpha(t) = sum_m p_m exp(i w_m t)`` for ``t >= 0``.

    ``a_coeffs`` and ``b_coeffs`` hold the contributions of each mode to the
    real part ``a(t)`` and imaginary part ``b(t)``; ``p_m = a_m + i b_m``.
    """

    frequencies: np.ndarray
    a_coeffs: np.ndarray
    b_coeffs: np.ndarray
    temperature: float
    scheme: str
    L: int
    model: FitSDModel = field(default=None)

    def __post_init__(self):
        for name in ("frequencies", "a_coeffs", "b_coeffs"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))
        if not (self.frequencies.shape == self.a_coeffs.shape == self.b_coeffs.shape):
            raise ValueError("mode arrays must have equal length")
        if np.any(self.frequencies.imag <= 0):
            raise ValueError("every mode must decay (Im w_m > 0)")

    @property
    def prefactors(self):
        return self.a_coeffs + 1j * self.b_coeffs

    @property
    def M(self):
        return self.frequencies.size

    def __len__(self):
        return self.M

    def _phases(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(1j * np.multiply.outer(t, self.frequencies))

    def components(self, t):
        """Unreduced sums ``sum a_m e^{i w_m t}`` and ``sum b_m e^{i w_m t}``.

        Both are real up to rounding; their imaginary parts measure closure
        of the conjugate pairs.
        """
        ph = self._phases(t)
        return ph @ self.a_coeffs, ph @ self.b_coeffs

    def __call__(self, t):
        return eval_exponential(self, t)

    def decay_bound(self, t):
        """``sum |p_m| exp(-min Im w_m t)``."""
        t = np.asarray(t, dtype=float)
        return np.sum(np.abs(self.prefactors)) * np.exp(-np.min(self.frequencies.imag) * t)

    def to_dict(self):
        return {
            "modes": [
                {
                    "p": [p.real, p.imag], "w": [w.real, w.imag],
                    "a": [a.real, a.imag], "b": [b.real, b.imag],
                }
                for p, w, a, b in zip(self.prefactors, self.frequencies,
                                      self.a_coeffs, self.b_coeffs)
            ],
            "T_kelvin": self.temperature,
            "scheme": str(Scheme(self.scheme).value),
            "L": self.L,
            "model": None if self.model is None else self.model.to_dict(),
            "model_hash": None if self.model is None else self.model.digest(),
        }

    @classmethod
    def from_dict(cls, data):
        w = np.array([complex(*m["w"]) for m in data["modes"]])
        if all("a" in m and "b" in m for m in data["modes"]):
            a = np.array([complex(*m["a"]) for m in data["modes"]])
            b = np.array([complex(*m["b"]) for m in data["modes"]])
        else:
            # without the split, attribute the whole prefactor to a(t)
            a = np.array([complex(*m["p"]) for m in data["modes"]])
            b = np.zeros_like(a)
        model = data.get("model")
        return cls(w, a, b, float(data["T_kelvin"]), data["scheme"], int(data["L"]),
                   None if model is None else FitSDModel.from_dict(model))


def _coth(z):
    return 1.0 / np.tanh(z)


def decompose(model, expansion, temperature):
    """Exponential decomposition of the correlation function of ``model``.

    Parameters
    ----------
    model : FitSDModel
    expansion : CothExpansion
        Pade or Matsubara expansion for ``T > 0``; the zero-temperature
        expansion approximates coth by 1 on the positive axis and may be used
        at any temperature.
    temperature : float
        Temperature in Kelvin.

    Returns
    -------
    ExponentialBCF
        ``2 * kappa_total + L`` modes.
    """
    if not isinstance(model, FitSDModel):
        raise ValidationError("decompose needs a FitSDModel")
    if temperature < 0 or not math.isfinite(temperature):
        raise InvalidTemperatureError(f"invalid temperature {temperature} K")
    zero = expansion.scheme is Scheme.ZERO
    T = kelvin_to_invcm(temperature)
    if not zero and temperature <= 0:
        raise InvalidTemperatureError(
            "finite-temperature expansions need T > 0; use the zero-temperature scheme"
        )
    if zero and temperature > 0:
        warnings.warn(
            "zero-temperature expansion (coth ~ 1) used at finite temperature",
            stacklevel=2,
        )

    sd_poles = model.poles
    if not zero:
        w_l, r_l = expansion.frequency_poles(T)
        eps = POLE_EPS * 2 * T * math.pi
        for q in sd_poles:
            for cand in (q, -q.conjugate()):
                if w_l.size and np.min(np.abs(w_l - cand)) < eps:
                    raise PoleCollisionError(
                        f"spectral density pole {cand} coincides with an expansion pole"
                    )
            # exact coth(q/2T) has poles at q/2T = i pi m
            z = q / (2 * T)
            m = round(z.imag / math.pi)
            if abs(z - 1j * math.pi * m) < COTH_POLE_EPS:
                raise PoleCollisionError(f"coth(w/2T) is singular at pole {q}")
        if 2 * math.pi * T < np.min(sd_poles.imag):
            warnings.warn(
                "first expansion pole lies below the pole widths of the spectral "
                "density; many expansion terms may be needed",
                stacklevel=2,
            )

    freqs, a_list, b_list = [], [], []
    n = model.n
    for term in model.terms:
        for q, R in zip(term.poles, term.residues()):
            b_plus = -term.prefactor * q ** (n - 1) * R
            c = 1.0 if zero else _coth(q / (2 * T))
            a_plus = -1j * b_plus * c
            freqs += [q, -q.conjugate()]
            a_list += [a_plus, np.conj(a_plus)]
            b_list += [b_plus, np.conj(b_plus)]
    if not zero:
        J_l = model.evaluate_complex(w_l)
        for w, r, Jw in zip(w_l, r_l, J_l):
            freqs.append(w)
            # purely imaginary w: J(w) imaginary, the coefficient is real
            a_list.append(1j * Jw * r)
            b_list.append(0.0)

    return ExponentialBCF(
        np.array(freqs), np.array(a_list), np.array(b_list),
        float(temperature), expansion.scheme.value, expansion.L, model,
    )


def eval_exponential(bcf, t):
    """``sum_m p_m exp(i w_m t)`` for ``t >= 0``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("negative times: use extend_negative_time")
    return bcf._phases(t) @ bcf.prefactors


def extend_negative_time(bcf, t):
    """``alpha(t)`` for any real t using ``alpha(-t) = conj(alpha(t))``.

    The sign bit decides, so ``-0.0`` maps to ``conj(alpha(0))``.
    """
    t = np.asarray(t, dtype=float)
    val = eval_exponential(bcf, np.abs(t))
    return np.where(np.signbit(t), np.conj(val), val)


def _thermal_weight(T):
    if T == 0:
        return lambda w: np.ones_like(w)
    return lambda w: _coth(w / (2 * T))


def exact_bcf(sd, temperature, t, rtol=1e-8):
    """Correlation function of ``sd`` by direct quadrature.

    Oscillatory panels use QUADPACK's QAWO; the absolute target is ``rtol``
    times ``|alpha(0)|``. At ``T = 0`` coth is replaced by 1. For spectral
    densities with a ``1/w`` tail ``alpha(0)`` is infinite and requesting
    ``t = 0`` raises ``QuadratureError``.
    """
    T = kelvin_to_invcm(temperature)
    if temperature < 0:
        raise InvalidTemperatureError(f"invalid temperature {temperature} K")
    weight = _thermal_weight(T)
    edges = panel_edges(sd)
    # coth grows like 2T/w; J coth stays finite at 0 since J ~ w^n, n >= 1
    re_f = lambda w: sd(w) * weight(w)
    im_f = lambda w: sd(w)
    # alpha(0) needs J to fall off faster than 1/w (Drude-Lorentz does not)
    if sd.high_exponent < -1:
        alpha0 = integrate_sd(sd, re_f, power=0, rtol=rtol)
        scale = abs(alpha0)
    else:
        alpha0 = None
        scale = magnitude(re_f, sd)
    atol = rtol * scale
    t = np.asarray(t, dtype=float)

    def point(tt):
        if tt == 0:
            if alpha0 is None:
                raise QuadratureError(
                    "alpha(0) diverges: J(w) decays no faster than 1/w", value=math.inf
                )
            return alpha0 / np.pi
        tau = abs(tt)
        re, _ = integrate_panels(re_f, edges, rtol=rtol, atol=atol, weight="cos", wvar=tau)
        im, _ = integrate_panels(im_f, edges, rtol=rtol, atol=atol, weight="sin", wvar=tau)
        val = (re - 1j * im) / np.pi
        return val if tt > 0 else np.conj(val)

    out = np.array(ordered_map(point, t.reshape(-1)), dtype=complex).reshape(t.shape)
    return out if t.ndim else complex(out)


def expansion_for(scheme, L):
    return cothexp.expansion(scheme, L)
