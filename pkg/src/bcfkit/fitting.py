"""Least-squares fits of the pole-product family to a target spectral density.

Parameters are optimized in log space (``log p``, ``log Omega``, ``log gamma``)
so every iterate is a valid model. The objective combines the misfit in
``J(w)`` and in ``j(w) = J(w)/w^2``; each block is divided by the largest
target value of its quantity so that the two weights are comparable.
"""

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import AAA
from scipy.optimize import nnls
from scipy.signal import find_peaks, peak_widths
from scipy.special import expit

from .errors import ValidationError
from .lm import levenberg_marquardt
from .parallel import ordered_map
from .quadrature import frequency_support
from .specdens import EVEN_N_MESSAGE, FitSDModel, PoleTerm

# pole real and imaginary parts stay within this factor of the grid span
POLE_RANGE = 10.0


@dataclass(frozen=True)
class GridSpec:
    omega_min: float
    omega_max: float
    count: int = 400
    spacing: str = "log"

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ValidationError("grid needs 0 < omega_min < omega_max")
        if self.count < 3:
            raise ValidationError("grid needs at least 3 points")
        if self.spacing not in ("log", "linear"):
            raise ValidationError(f"unknown grid spacing {self.spacing!r}")

    def points(self):
        if self.spacing == "log":
            return np.geomspace(self.omega_min, self.omega_max, self.count)
        return np.linspace(self.omega_min, self.omega_max, self.count)


@dataclass(frozen=True)
class FitConfig:
    """Fit settings.

    ``weight_J`` and ``weight_Jw2`` default to equal weights for ``n >= 3``
    and to a J-only objective for ``n = 1``. ``grid=None`` selects 400
    log-spaced points over ``[w_peak/100, 20 w_peak]``.
    """

    n: int
    poles_per_term: tuple
    weight_J: float = None
    weight_Jw2: float = None
    grid: GridSpec = None
    multistarts: int = 8
    seed: int = 0
    max_iter: int = 500
    tol: float = 1e-10

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n must be a positive integer, got {self.n}")
        if self.n % 2 == 0:
            raise ValidationError(EVEN_N_MESSAGE.format(n=self.n))
        ppt = tuple(int(k) for k in self.poles_per_term)
        if not ppt or min(ppt) < 1:
            raise ValidationError("every term needs at least one pole")
        for k in ppt:
            if self.n - 2 * k - 2 >= 0:
                raise ValidationError(
                    f"a term with {k} poles does not decay for n={self.n}"
                )
        object.__setattr__(self, "poles_per_term", ppt)
        wj, wj2 = self.weight_J, self.weight_Jw2
        if wj is None and wj2 is None:
            wj, wj2 = (1.0, 0.0) if self.n == 1 else (1.0, 1.0)
        wj = 0.0 if wj is None else float(wj)
        wj2 = 0.0 if wj2 is None else float(wj2)
        if wj < 0 or wj2 < 0 or wj + wj2 == 0:
            raise ValidationError("weights must be non-negative and not both zero")
        if wj2 > 0 and self.n < 3:
            raise ValidationError("a J/w^2 weight needs n >= 3 (J/w^2 diverges at 0 for n = 1)")
        object.__setattr__(self, "weight_J", wj)
        object.__setattr__(self, "weight_Jw2", wj2)
        if self.multistarts < 1 or self.max_iter < 1 or self.tol <= 0:
            raise ValidationError("multistarts and max_iter must be positive, tol > 0")
        if isinstance(self.grid, dict):
            object.__setattr__(self, "grid", GridSpec(**self.grid))

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        if data.get("grid") is not None:
            data["grid"] = GridSpec(**data["grid"])
        data["poles_per_term"] = tuple(data["poles_per_term"])
        return cls(**data)


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of :func:`fit_sd`.

    ``residual_J`` and ``residual_Jw2`` are relative L2 errors on the fit
    grid, ``|f - t| / |t|``.
    """

    model: FitSDModel
    residual_J: float
    residual_Jw2: float
    iterations: int
    converged: bool
    cost: float = math.nan
    history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "residual_J": self.residual_J,
            "residual_Jw2": self.residual_Jw2,
            "iterations": self.iterations,
            "converged": self.converged,
            "cost": self.cost,
        }


class _Layout:
    """Maps the flat parameter vector to terms and poles.

    Prefactors enter as ``log p``. Pole real and imaginary parts enter as
    ``u`` with ``log v = lo + (hi - lo) * sigmoid(u)``, which keeps them inside
    ``[exp(lo), exp(hi)]`` and stops poles from collapsing onto the axes.
    """

    def __init__(self, n, poles_per_term, bounds):
        self.n = n
        self.ppt = tuple(poles_per_term)
        self.size = sum(1 + 2 * k for k in self.ppt)
        self.lo, self.hi = (math.log(b) for b in bounds)

    def _to_u(self, v):
        s = (math.log(v) - self.lo) / (self.hi - self.lo)
        s = min(max(s, 1e-9), 1 - 1e-9)
        return math.log(s / (1 - s))

    def _from_u(self, u):
        s = expit(u)
        v = np.exp(self.lo + (self.hi - self.lo) * s)
        # d v / d u
        return v, v * (self.hi - self.lo) * s * (1 - s)

    def pack(self, model):
        x = []
        for t in model.terms:
            x.append(math.log(t.prefactor))
            for q in t.poles:
                x += [self._to_u(q.real), self._to_u(q.imag)]
        return np.array(x)

    def unpack(self, x):
        out, i = [], 0
        for k in self.ppt:
            # a term switched off by the optimizer keeps a tiny positive weight
            p = float(np.exp(np.clip(x[i], -700.0, 700.0)))
            Om, dOm = self._from_u(x[i + 1: i + 1 + 2 * k: 2])
            ga, dga = self._from_u(x[i + 2: i + 2 + 2 * k: 2])
            out.append((p, Om, ga, dOm, dga))
            i += 1 + 2 * k
        return out

    def model(self, x):
        terms = tuple(
            PoleTerm(p, tuple(complex(o, g) for o, g in zip(Om, ga)))
            for p, Om, ga, _, _ in self.unpack(x)
        )
        return FitSDModel(self.n, terms)

    def evaluate(self, x, w):
        """``J(w)`` and ``dJ/dx`` for real ``w`` (real arithmetic throughout)."""
        wn = w ** (self.n - 1)
        J = np.zeros_like(w)
        jac = np.empty((w.size, self.size))
        col = 0
        for p, Om, ga, dOm, dga in self.unpack(x):
            dp = (w[:, None] - Om) ** 2 + ga**2
            dm = (w[:, None] + Om) ** 2 + ga**2
            Pp = 1.0 / np.prod(dp, axis=1)
            Pm = 1.0 / np.prod(dm, axis=1)
            term = p * wn * (Pp - Pm)
            J += term
            jac[:, col] = term
            # derivative of log(1/d) with respect to Omega and gamma, per factor
            dOm_p = 2 * (w[:, None] - Om) / dp
            dOm_m = -2 * (w[:, None] + Om) / dm
            dga_p = -2 * ga / dp
            dga_m = -2 * ga / dm
            pw = p * wn
            k = len(Om)
            jac[:, col + 1: col + 1 + 2 * k: 2] = (
                pw[:, None] * (Pp[:, None] * dOm_p - Pm[:, None] * dOm_m) * dOm
            )
            jac[:, col + 2: col + 2 + 2 * k: 2] = (
                pw[:, None] * (Pp[:, None] * dga_p - Pm[:, None] * dga_m) * dga
            )
            col += 1 + 2 * k
        return J, jac


def sample_target(target, cfg):
    """Fit grid and target values ``(w, J)`` for ``target`` under ``cfg``."""
    if isinstance(target, tuple) and len(target) == 2:
        w, J = (np.asarray(a, dtype=float) for a in target)
        if cfg.grid is not None:
            grid = cfg.grid.points()
            if np.any(w <= 0) or np.any(J <= 0):
                raise ValidationError("tabulated target must be positive")
            # power laws are straight lines in log-log coordinates
            J = np.exp(np.interp(np.log(grid), np.log(w), np.log(J)))
            w = grid
    else:
        if cfg.grid is not None:
            w = cfg.grid.points()
        else:
            peak, _ = frequency_support(target)
            w = np.geomspace(peak / 100, 20 * peak, 400)
        J = np.asarray(target(w), dtype=float)
    if w.size < 3:
        raise ValidationError("need at least 3 target samples")
    if np.any(w <= 0) or np.any(J <= 0) or not np.all(np.isfinite(J)):
        raise ValidationError("target must be positive and finite on the fit grid")
    return w, J


def _residual_fn(layout, w, J_t, cfg):
    sJ = math.sqrt(cfg.weight_J) / np.max(J_t)
    jt = J_t / w**2
    sj = math.sqrt(cfg.weight_Jw2) / np.max(jt)

    def fun(x):
        with np.errstate(all="ignore"):
            J, _ = layout.evaluate(x, w)
            return np.concatenate([sJ * (J - J_t), sj * (J - J_t) / w**2])

    def jac(x):
        _, d = layout.evaluate(x, w)
        return np.vstack([sJ * d, sj * d / w[:, None] ** 2])

    return fun, jac


def _rational_poles(w, J, n, count):
    """Upper-right poles of a AAA rational approximant of ``J / w^(n-1)``.

    Inside the family ``J / w^(n-1)`` is rational with poles ``+-q, +-q*``,
    so a degree ``4 * count`` approximant recovers them; for other targets
    the poles are a reasonable start. Sorted by residue magnitude.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            r = AAA(w, J / w ** (n - 1), max_terms=4 * count + 1)
            poles, res = r.poles(), r.residues()
        except (ValueError, np.linalg.LinAlgError):
            return np.empty(0, dtype=complex)
    keep = (poles.real > 0) & (poles.imag > 0) & np.isfinite(poles)
    keep &= (np.abs(poles) >= w[0] / POLE_RANGE) & (np.abs(poles) <= w[-1] * POLE_RANGE)
    poles, res = poles[keep], res[keep]
    return poles[np.argsort(-np.abs(res))][:count]


def multistart_init(w, J, cfg):
    """Initial models for the multistart search.

    The first starts take their poles from a AAA rational approximation of
    ``J / w^(n-1)``, which is exact for targets inside the family; there is
    one such start for each distinct way of assigning the poles to terms
    (at most 24). The next one, when the target has peaks with prominence
    above 1% of its maximum, puts the pole real parts at the detected peaks,
    largest first, with imaginary parts equal to the half width at half
    maximum. Poles these rules leave unset, and the random starts that fill
    the list up to ``cfg.multistarts``, are drawn log-uniformly over the
    grid span.

    Prefactors solve the non-negative linear least-squares problem of the
    fit objective for the given poles. When that yields nothing usable,
    equal prefactors match the target at its global maximum.
    """
    w = np.asarray(w, dtype=float)
    J = np.asarray(J, dtype=float)
    if w.size < 3:
        raise ValidationError("need at least 3 target samples")
    rng = np.random.default_rng(cfg.seed)
    n_poles = sum(cfg.poles_per_term)
    lo, hi = math.log(w[0]), math.log(w[-1])
    idx = np.arange(w.size, dtype=float)

    peaks, _ = find_peaks(J, prominence=0.01 * np.max(J))
    starts = []
    rational = _rational_poles(w, J, cfg.n, n_poles)
    if rational.size:
        Om = np.exp(rng.uniform(lo, hi, n_poles))
        ga = np.exp(rng.uniform(lo, hi, n_poles))
        Om[: rational.size] = rational.real
        ga[: rational.size] = rational.imag
        for order in _groupings(cfg.poles_per_term):
            starts.append((Om[order], ga[order]))
    if peaks.size:
        order = peaks[np.argsort(J[peaks])[::-1]]
        widths = peak_widths(J, order, rel_height=0.5)
        centres = list(w[order])
        hwhm = [
            0.5 * (np.interp(r, idx, w) - np.interp(l, idx, w))
            for l, r in zip(widths[2], widths[3])
        ]
        Om = np.exp(rng.uniform(lo, hi, n_poles))
        ga = np.exp(rng.uniform(lo, hi, n_poles))
        m = min(len(centres), n_poles)
        Om[:m] = centres[:m]
        ga[:m] = np.maximum(hwhm[:m], 1e-3 * w[0])
        starts.append((Om, ga))
    while len(starts) < cfg.multistarts:
        starts.append((np.exp(rng.uniform(lo, hi, n_poles)),
                       np.exp(rng.uniform(lo, hi, n_poles))))

    imax = int(np.argmax(J))
    sJ = math.sqrt(cfg.weight_J) / np.max(J)
    sj = math.sqrt(cfg.weight_Jw2) / np.max(J / w**2)
    models = []
    for Om, ga in starts:
        # keep the poles of each term distinct
        if np.unique(Om + 1j * ga).size < n_poles:
            Om = Om * (1 + 1e-3 * np.arange(n_poles))
        poles = [complex(o, g) for o, g in zip(Om, ga)]
        groups, i = [], 0
        for k in cfg.poles_per_term:
            groups.append(tuple(poles[i:i + k]))
            i += k
        B = np.column_stack([FitSDModel(cfg.n, (PoleTerm(1.0, q),))(w) for q in groups])
        # prefactors from non-negative least squares on the fit objective
        A = np.vstack([sJ * B, sj * B / w[:, None] ** 2])
        rhs = np.concatenate([sJ * J, sj * J / w**2])
        with np.errstate(all="ignore"):
            col = np.max(np.abs(A), axis=0)
            try:
                p = nnls(A / col, rhs)[0] / col
            except (RuntimeError, ValueError):
                p = np.zeros(len(groups))
        if not (np.all(np.isfinite(p)) and np.any(p > 0)):
            # fall back to matching the global maximum with equal prefactors
            J1 = float(np.sum(B[imax]))
            scale = J[imax] / J1 if J1 > 0 else 1.0
            p = np.full(len(groups), scale if scale > 0 and math.isfinite(scale) else 1.0)
        # terms the linear fit switched off restart small but positive
        p = np.where(p > 0, p, 1e-6 * np.max(p))
        models.append(FitSDModel(cfg.n, tuple(PoleTerm(float(c), q) for c, q in zip(p, groups))))
    return models


MAX_GROUPINGS = 24


def _groupings(poles_per_term):
    """Distinct ways to split pole slots among terms, as index orders.

    Terms with the same number of poles are interchangeable, so groupings
    that differ only by swapping such terms are listed once.
    """
    n = sum(poles_per_term)
    seen, out = set(), []
    for perm in itertools.permutations(range(n)):
        groups, i = [], 0
        for k in poles_per_term:
            groups.append((k, tuple(sorted(perm[i:i + k]))))
            i += k
        key = tuple(sorted(groups))
        if key in seen:
            continue
        seen.add(key)
        out.append(np.array(perm))
        if len(out) >= MAX_GROUPINGS:
            break
    return out


def _relative_l2(f, t):
    return float(np.linalg.norm(f - t) / np.linalg.norm(t))


def fit_sd(target, cfg):
    """Fit the pole-product family to ``target``.

    Parameters
    ----------
    target : ReferenceSD or tuple of arrays
        A callable spectral density or tabulated ``(w, J)`` samples.
    cfg : FitConfig

    Returns
    -------
    FitResult
        The start with the lowest final cost; ties (within 1e-12 relative)
        go to fewer iterations, then to the smallest largest prefactor.
        ``converged`` is false when no start met the tolerance.
    """
    w, J_t = sample_target(target, cfg)
    layout = _Layout(cfg.n, cfg.poles_per_term,
                     (w[0] / POLE_RANGE, w[-1] * POLE_RANGE))
    fun, jac = _residual_fn(layout, w, J_t, cfg)

    def run(start):
        res = levenberg_marquardt(fun, jac, layout.pack(start), cfg.max_iter, cfg.tol)
        if not math.isfinite(res.cost):
            return None
        try:
            return res, layout.model(res.x)
        except ValidationError:
            return None  # two poles of a term merged

    results = [r for r in ordered_map(run, multistart_init(w, J_t, cfg)) if r is not None]
    if not results:
        raise ValidationError("no multistart produced a valid model")

    best_cost = min(r.cost for r, _ in results)
    tied = [(r, m) for r, m in results if r.cost <= best_cost * (1 + 1e-12) + 1e-300]
    tied.sort(key=lambda rm: (rm[0].iterations, max(t.prefactor for t in rm[1].terms)))
    res, model = tied[0]
    J_fit = model(w)
    return FitResult(
        model,
        _relative_l2(J_fit, J_t),
        _relative_l2(J_fit / w**2, J_t / w**2),
        res.iterations,
        res.converged,
        res.cost,
        res.history,
    )
