"""Spectral densities: the simple-pole fit family and analytic reference forms.

The fit family is::

    J(w) = w^(n-1) * sum_k p_k * (J_k(w) - J_k(-w)),
    J_k(w) = prod_j 1 / ((w - w_j)(w - conj(w_j)))

with odd ``n``, positive ``p_k`` and poles ``w_j = Omega_j + i gamma_j`` in
the open upper-right quadrant. All frequencies are in cm^-1.
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .special import expi_scaled

EVEN_N_MESSAGE = (
    "even low-frequency exponent n={n} is not supported: for even n the "
    "correlation function contains exponential-integral terms and has no "
    "finite sum-of-exponentials form"
)


@dataclass(frozen=True)
class PoleTerm:
    """One weighted pole product ``p * J_k``."""

    prefactor: float
    poles: tuple

    def __post_init__(self):
        poles = tuple(complex(q) for q in self.poles)
        if not poles:
            raise ValidationError("a pole term needs at least one pole")
        if not self.prefactor > 0 or not math.isfinite(self.prefactor):
            raise ValidationError(f"prefactor must be positive, got {self.prefactor}")
        for q in poles:
            if not (q.real > 0 and q.imag > 0):
                raise ValidationError(
                    f"pole {q} must lie in the open upper-right quadrant"
                )
        for i, qi in enumerate(poles):
            for qj in poles[i + 1:]:
                if abs(qi - qj) <= 1e-12 * max(abs(qi), abs(qj)):
                    raise ValidationError(f"poles must be distinct, got {qi} twice")
        object.__setattr__(self, "prefactor", float(self.prefactor))
        object.__setattr__(self, "poles", poles)

    @property
    def kappa(self):
        return len(self.poles)

    def product(self, w):
        """``J_k(w)`` for real or complex ``w``."""
        w = np.asarray(w)
        if np.isrealobj(w):
            out = np.ones(w.shape)
            for q in self.poles:
                out = out / ((w - q.real) ** 2 + q.imag**2)
            return out
        out = np.ones(w.shape, dtype=complex)
        for q in self.poles:
            out = out / ((w - q) * (w - q.conjugate()))
        return out

    def residues(self):
        """Residues of ``J_k`` at each of its upper-half-plane poles."""
        res = []
        for j, q in enumerate(self.poles):
            r = 1.0 / (q - q.conjugate())
            for i, q2 in enumerate(self.poles):
                if i != j:
                    r /= (q - q2) * (q - q2.conjugate())
            res.append(r)
        return np.array(res, dtype=complex)


@dataclass(frozen=True)
class FitSDModel:
    """Spectral density built from antisymmetrized pole products."""

    n: int
    terms: tuple

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n}")
        n = int(self.n)
        if n % 2 == 0:
            raise ValidationError(EVEN_N_MESSAGE.format(n=n))
        terms = tuple(self.terms)
        if not terms:
            raise ValidationError("model needs at least one pole term")
        for t in terms:
            if not isinstance(t, PoleTerm):
                raise ValidationError("terms must be PoleTerm instances")
            if n - 2 * t.kappa - 2 >= 0:
                raise ValidationError(
                    f"term with {t.kappa} poles does not decay for n={n}; "
                    f"need more than {(n - 2) // 2} poles"
                )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "terms", terms)

    # evaluation

    def __call__(self, w):
        return eval_fit_sd(self, w)

    def evaluate_complex(self, w):
        """J at complex frequencies (the analytic continuation of the fit family)."""
        w = np.asarray(w, dtype=complex)
        acc = np.zeros(w.shape, dtype=complex)
        for t in self.terms:
            acc = acc + t.prefactor * (t.product(w) - t.product(-w))
        return w ** (self.n - 1) * acc

    # structure

    @property
    def kappa_total(self):
        return sum(t.kappa for t in self.terms)

    @property
    def poles(self):
        return np.array([q for t in self.terms for q in t.poles], dtype=complex)

    def tail_exponents(self):
        return tail_exponents(self)

    @property
    def low_exponent(self):
        return self.n

    @property
    def high_exponent(self):
        return tail_exponents(self)[1]

    def features(self):
        """Characteristic frequencies (pole real parts and their widths)."""
        return [(q.real, q.imag) for q in self.poles]

    def scaled(self, c):
        return FitSDModel(
            self.n, tuple(PoleTerm(c * t.prefactor, t.poles) for t in self.terms)
        )

    def derivative_at_zero(self):
        if self.n > 1:
            return 0.0
        # d/dw prod 1/|w - q|^2 at 0 is prod(0) * sum 2 Re q / |q|^2
        total = 0.0
        for t in self.terms:
            q = np.asarray(t.poles)
            total += 2 * t.prefactor * float(t.product(0.0)) * float(np.sum(2 * q.real / np.abs(q) ** 2))
        return total

    # serialization

    def to_dict(self):
        return {
            "n": self.n,
            "terms": [
                {"p": t.prefactor, "poles": [[q.real, q.imag] for q in t.poles]}
                for t in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data):
        terms = tuple(
            PoleTerm(float(t["p"]), tuple(complex(a, b) for a, b in t["poles"]))
            for t in data["terms"]
        )
        return cls(int(data["n"]), terms)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def eval_fit_sd(model, w):
    """Evaluate the fit family at real frequencies.

    Uses real arithmetic only, so ``J(-w) == -J(w)`` holds bitwise.
    """
    w = np.asarray(w)
    if np.iscomplexobj(w):
        return model.evaluate_complex(w)
    w = w.astype(float)
    acc = np.zeros(w.shape)
    for t in model.terms:
        acc = acc + t.prefactor * (t.product(w) - t.product(-w))
    return w ** (model.n - 1) * acc


def tail_exponents(model):
    """Power laws ``(low, high)`` of J at small and large frequency."""
    kappa_min = min(t.kappa for t in model.terms)
    return model.n, model.n - 2 * kappa_min - 2


# Reference spectral densities.  Each evaluates on w > 0; DrudeLorentz,
# OhmicExp and DampedVibration are extended antisymmetrically to w <= 0.


def _positive(**params):
    for name, value in params.items():
        if not (value > 0 and math.isfinite(value)):
            raise ValidationError(f"{name} must be positive, got {value}")


def _antisymmetric(func, w):
    w = np.asarray(w, dtype=float)
    a = np.abs(w)
    safe = np.where(a > 0, a, 1.0)
    return np.where(a > 0, np.sign(w) * func(safe), 0.0)


class ReferenceSD:
    kind = None
    low_exponent = 1
    high_exponent = -math.inf

    def __call__(self, w):
        raise NotImplementedError

    def features(self):
        return []

    def derivative_at_zero(self):
        if self.low_exponent > 1:
            return 0.0
        scales = [f for f, _ in self.features()] or [1.0]
        eps = 1e-7 * min(scales)
        return float(self(eps)) / eps

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True)
class DrudeLorentz(ReferenceSD):
    """``J = 2 pi lam w gamma / (w^2 + gamma^2)``."""

    lam: float
    gamma: float
    kind = "drude_lorentz"
    high_exponent = -1

    def __post_init__(self):
        _positive(lam=self.lam, gamma=self.gamma)

    def __call__(self, w):
        return _antisymmetric(
            lambda x: 2 * np.pi * self.lam * x * self.gamma / (x**2 + self.gamma**2), w
        )

    def features(self):
        return [(self.gamma, self.gamma)]

    def derivative_at_zero(self):
        return 2 * np.pi * self.lam / self.gamma

    def scaled(self, c):
        return DrudeLorentz(c * self.lam, self.gamma)

    def to_dict(self):
        return {"kind": self.kind, "lambda": self.lam, "gamma": self.gamma}


@dataclass(frozen=True)
class OhmicExp(ReferenceSD):
    """``J = eta w exp(-w / cutoff)``."""

    eta: float
    cutoff: float
    kind = "ohmic_exp"

    def __post_init__(self):
        _positive(eta=self.eta, cutoff=self.cutoff)

    def __call__(self, w):
        return _antisymmetric(lambda x: self.eta * x * np.exp(-x / self.cutoff), w)

    def features(self):
        return [(self.cutoff, self.cutoff)]

    def derivative_at_zero(self):
        return self.eta

    def scaled(self, c):
        return OhmicExp(c * self.eta, self.cutoff)

    def to_dict(self):
        return {"kind": self.kind, "eta": self.eta, "Lambda": self.cutoff}


@dataclass(frozen=True)
class LogNormal(ReferenceSD):
    """``J = pi S w / (sqrt(2 pi) sigma) * exp(-ln(w/omega_c)^2 / (2 sigma^2))``."""

    S: float
    sigma: float
    omega_c: float
    kind = "log_normal"
    low_exponent = math.inf

    def __post_init__(self):
        _positive(S=self.S, sigma=self.sigma, omega_c=self.omega_c)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        if np.any(w <= 0):
            raise ValueError("log-normal spectral density is defined for w > 0 only")
        u = np.log(w / self.omega_c)
        return (
            np.pi * self.S * w / (math.sqrt(2 * math.pi) * self.sigma)
            * np.exp(-(u**2) / (2 * self.sigma**2))
        )

    def features(self):
        # peak of J sits at omega_c * exp(sigma^2)
        peak = self.omega_c * math.exp(self.sigma**2)
        return [(self.omega_c, self.omega_c), (peak, peak)]

    def scaled(self, c):
        return LogNormal(c * self.S, self.sigma, self.omega_c)

    def to_dict(self):
        return {"kind": self.kind, "S": self.S, "sigma": self.sigma, "omega_c": self.omega_c}


@dataclass(frozen=True)
class DampedVibration(ReferenceSD):
    """Vibrational mode of frequency ``Omega`` and Huang-Rhys factor ``X``
    damped by an ohmic bath ``eta w exp(-w/cutoff)``::

        J = X w^2 J_ohm / ((w - g(w))^2 + J_ohm^2)
        g(w) = Omega - eta cutoff / pi + J_ohm Ei(w / cutoff) / pi
    """

    eta: float
    cutoff: float
    Omega: float
    X: float
    kind = "damped_vibration"
    low_exponent = 3

    def __post_init__(self):
        _positive(eta=self.eta, cutoff=self.cutoff, Omega=self.Omega, X=self.X)

    def _positive_branch(self, w):
        x = w / self.cutoff
        j_ohm = self.eta * w * np.exp(-x)
        # J_ohm * Ei(x) = eta * w * exp(-x) Ei(x)
        shift = self.Omega - self.eta * self.cutoff / np.pi + self.eta * w * expi_scaled(x) / np.pi
        return self.X * w**2 * j_ohm / ((w - shift) ** 2 + j_ohm**2)

    def __call__(self, w):
        return _antisymmetric(self._positive_branch, w)

    def features(self):
        width = max(self.eta * self.Omega * math.exp(-self.Omega / self.cutoff), 1e-3)
        return [(self.Omega, width), (self.cutoff, self.cutoff)]

    def scaled(self, c):
        return DampedVibration(self.eta, self.cutoff, self.Omega, c * self.X)

    def to_dict(self):
        return {
            "kind": self.kind, "eta": self.eta, "Lambda": self.cutoff,
            "Omega": self.Omega, "X": self.X,
        }


@dataclass(frozen=True)
class SumSD(ReferenceSD):
    parts: tuple
    kind = "sum"

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValidationError("sum spectral density needs at least one part")
        object.__setattr__(self, "parts", parts)

    def __call__(self, w):
        return sum(p(w) for p in self.parts)

    @property
    def low_exponent(self):
        return min(p.low_exponent for p in self.parts)

    @property
    def high_exponent(self):
        return max(p.high_exponent for p in self.parts)

    def features(self):
        return [f for p in self.parts for f in p.features()]

    def derivative_at_zero(self):
        return sum(p.derivative_at_zero() for p in self.parts)

    def scaled(self, c):
        return SumSD(tuple(p.scaled(c) for p in self.parts))

    def to_dict(self):
        return {"kind": self.kind, "parts": [p.to_dict() for p in self.parts]}


def reference_from_dict(data):
    kind = data.get("kind")
    if kind == "drude_lorentz":
        return DrudeLorentz(float(data["lambda"]), float(data["gamma"]))
    if kind == "ohmic_exp":
        return OhmicExp(float(data["eta"]), float(data["Lambda"]))
    if kind == "log_normal":
        return LogNormal(float(data["S"]), float(data["sigma"]), float(data["omega_c"]))
    if kind == "damped_vibration":
        return DampedVibration(
            float(data["eta"]), float(data["Lambda"]), float(data["Omega"]), float(data["X"])
        )
    if kind == "sum":
        return SumSD(tuple(reference_from_dict(p) for p in data["parts"]))
    raise ValidationError(f"unknown reference spectral density kind {kind!r}")


def eval_reference_sd(sd, w):
    return sd(w)


def sd_from_dict(data):
    """Parse either a fit model (has ``n``) or a reference SD (has ``kind``)."""
    if "kind" in data:
        return reference_from_dict(data)
    return FitSDModel.from_dict(data)


# Integral characteristics


def reorganization_energy(sd, rtol=1e-8):
    """``E_lambda = (1/pi) int_0^inf J(w)/w dw`` in cm^-1."""
    from .quadrature import integrate_sd

    val = integrate_sd(sd, lambda w: sd(w) / w, power=-1, rtol=rtol)
    return val / np.pi


def huang_rhys(sd, rtol=1e-8):
    """Total Huang-Rhys factor ``X = (1/pi) int_0^inf J(w)/w^2 dw``."""
    from .quadrature import integrate_sd

    if sd.low_exponent < 3:
        raise ValidationError(
            "Huang-Rhys factor diverges for spectral densities that are "
            "linear at small frequency (n=1)"
        )
    val = integrate_sd(sd, lambda w: sd(w) / w**2, power=-2, rtol=rtol)
    return val / np.pi
