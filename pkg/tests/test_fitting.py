import json
import math

import numpy as np
import pytest

from bcfkit import (
    DampedVibration,
    FitConfig,
    FitSDModel,
    GridSpec,
    LogNormal,
    PoleTerm,
    fit_sd,
    multistart_init,
)
from bcfkit.errors import ValidationError
from bcfkit.fitting import POLE_RANGE, _Layout, sample_target

from conftest import random_model


def damped_target():
    return DampedVibration(0.3, 100.0, 180.0, 0.03)


def test_analytic_jacobian_matches_finite_differences():
    layout = _Layout(5, (3, 2), (0.1, 1e4))
    m = FitSDModel(5, (PoleTerm(1e4, (183 + 9j, 60 + 150j, 2 + 11j)),
                       PoleTerm(30.0, (300 + 40j, 500 + 80j))))
    x = layout.pack(m)
    w = np.geomspace(1, 2000, 200)
    J, jac = layout.evaluate(x, w)
    assert np.allclose(J, m(w), rtol=1e-12)
    h = 1e-6
    fd = np.empty_like(jac)
    for i in range(x.size):
        dx = np.zeros_like(x)
        dx[i] = h
        fd[:, i] = (layout.evaluate(x + dx, w)[0] - layout.evaluate(x - dx, w)[0]) / (2 * h)
    scale = np.max(np.abs(jac), axis=0)
    assert np.all(np.max(np.abs(fd - jac), axis=0) <= 1e-5 * scale)


def test_pack_unpack_roundtrip():
    layout = _Layout(3, (2,), (0.1, 1e4))
    m = FitSDModel(3, (PoleTerm(77.0, (50 + 5j, 200 + 30j)),))
    again = layout.model(layout.pack(m))
    assert again.terms[0].prefactor == pytest.approx(77.0, rel=1e-12)
    assert np.allclose(again.poles, m.poles, rtol=1e-10)


def test_recovers_model_from_its_own_family():
    truth = FitSDModel(3, (PoleTerm(2e3, (120 + 15j, 40 + 60j)),))
    cfg = FitConfig(3, (2,), grid=GridSpec(1.0, 2000.0), seed=1)
    res = fit_sd(truth, cfg)
    assert res.residual_J <= 1e-8
    assert res.residual_Jw2 <= 1e-8
    assert res.converged


def test_damped_vibration_fit_finds_mode():
    res = fit_sd(damped_target(), FitConfig(5, (3,)))
    assert min(abs(q - (183 + 9.17j)) / abs(183 + 9.17j) for q in res.model.poles) <= 0.1
    w = np.linspace(1, 1000, 2000)
    err = np.linalg.norm(res.model(w) - damped_target()(w)) / np.linalg.norm(damped_target()(w))
    assert err <= 0.05
    assert all(b <= a for a, b in zip(res.history, res.history[1:]))


def test_fit_is_deterministic():
    cfg = FitConfig(3, (2,), multistarts=3, seed=4)
    a = fit_sd(LogNormal(0.3, 0.7, 38.0), cfg)
    b = fit_sd(LogNormal(0.3, 0.7, 38.0), cfg)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_superohmic_fit_keeps_low_frequency_law():
    res = fit_sd(LogNormal(0.3, 0.7, 38.0), FitConfig(5, (3,), multistarts=4))
    w = np.array([1e-4, 2e-4])
    slope = math.log(res.model(w[1]) / res.model(w[0])) / math.log(2)
    assert slope == pytest.approx(5, abs=1e-6)


def test_tabulated_target():
    sd = damped_target()
    # fine enough to resolve the 9 cm^-1 wide peak by interpolation
    w = np.geomspace(1, 4000, 8000)
    cfg = FitConfig(5, (3,), grid=GridSpec(1.8, 3600.0), multistarts=2)
    gw, gJ = sample_target((w, sd(w)), cfg)
    assert np.allclose(gJ, sd(gw), rtol=2e-4)
    with pytest.raises(ValidationError):
        sample_target((w, -sd(w)), FitConfig(5, (3,)))


def test_peak_start():
    sd = damped_target()
    w = np.geomspace(1.8, 3600, 400)
    starts = multistart_init(w, sd(w), FitConfig(5, (3,), multistarts=5))
    assert len(starts) == 5
    near = [q for m in starts for q in m.poles if abs(q.real - 180) < 3.6 and q.imag < 30]
    assert near
    for m in starts:
        assert all(t.prefactor > 0 for t in m.terms)


def test_rational_start_is_exact_inside_family():
    truth = FitSDModel(3, (PoleTerm(2e3, (120 + 15j, 40 + 60j)),))
    w = np.geomspace(1, 2000, 300)
    first = multistart_init(w, truth(w), FitConfig(3, (2,), multistarts=1))[0]
    assert np.allclose(first(w), truth(w), rtol=1e-6)


def test_monotone_target_uses_random_starts_only():
    w = np.geomspace(1, 1000, 200)
    J = w / (1 + w)
    a = multistart_init(w, J, FitConfig(1, (1,), multistarts=3, seed=9))
    b = multistart_init(w, J, FitConfig(1, (1,), multistarts=3, seed=9))
    assert [m.to_dict() for m in a] == [m.to_dict() for m in b]
    for m in a:
        for q in m.poles:
            assert w[0] <= q.real <= w[-1] * (1 + 1e-2) and w[0] <= q.imag <= w[-1]


def test_poles_stay_in_box():
    res = fit_sd(LogNormal(0.3, 0.7, 38.0), FitConfig(1, (1,) * 3, multistarts=2))
    lo, hi = res.model.poles.real.min(), res.model.poles.real.max()
    peak = 38.0 * math.exp(0.49)
    assert lo >= peak / 100 / POLE_RANGE * (1 - 1e-9)
    assert hi <= 20 * peak * POLE_RANGE * (1 + 1e-9)


@pytest.mark.parametrize("kwargs, match", [
    (dict(n=2, poles_per_term=(2,)), "exponential-integral"),
    (dict(n=5, poles_per_term=(1,)), "decay"),
    (dict(n=1, poles_per_term=(1,), weight_Jw2=1.0), "n >= 3"),
    (dict(n=3, poles_per_term=(2,), weight_J=0.0, weight_Jw2=0.0), "weights"),
    (dict(n=3, poles_per_term=(0,)), "at least one pole"),
    (dict(n=3, poles_per_term=(2,), multistarts=0), "positive"),
])
def test_config_validation(kwargs, match):
    with pytest.raises(ValidationError, match=match):
        FitConfig(**kwargs)


def test_default_weights_and_from_dict():
    assert (FitConfig(1, (1,)).weight_J, FitConfig(1, (1,)).weight_Jw2) == (1.0, 0.0)
    assert (FitConfig(3, (2,)).weight_J, FitConfig(3, (2,)).weight_Jw2) == (1.0, 1.0)
    cfg = FitConfig.from_dict({"n": 3, "poles_per_term": [2], "grid": {"omega_min": 1, "omega_max": 10}})
    assert cfg.grid == GridSpec(1, 10)
    with pytest.raises(ValidationError):
        GridSpec(10, 1)


def _well_separated(model, ratio=0.3):
    q = model.poles
    return all(abs(a - b) > ratio * max(abs(a), abs(b))
               for i, a in enumerate(q) for b in q[i + 1:])


def test_recovers_random_models():
    rng = np.random.default_rng(123)
    done = 0
    while done < 6:
        truth = random_model(rng)
        if not _well_separated(truth):
            continue
        cfg = FitConfig(truth.n, tuple(len(t.poles) for t in truth.terms),
                        grid=GridSpec(1.0, 3000.0))
        res = fit_sd(truth, cfg)
        assert res.residual_J <= 1e-8, truth
        done += 1
