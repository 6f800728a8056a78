import numpy as np
import pytest
from scipy.integrate import cumulative_trapezoid

from bcfkit import (
    ExponentialBCF,
    LogNormal,
    OhmicExp,
    decompose,
    g_from_exponential,
    g_from_sd_quadrature,
    pade,
    reorganization_energy,
    zero_temperature,
)
from bcfkit.errors import NumericalError
from bcfkit.lineshape import LineshapeSeries

from conftest import table_model


def test_analytic_g_starts_at_zero():
    ls = g_from_exponential(decompose(table_model(), pade(2), 77.0), np.linspace(0, 1, 11))
    assert ls.g[0] == 0
    assert ls.source == "analytic"


def test_analytic_g_is_double_integral_of_alpha():
    bcf = decompose(table_model(), pade(3), 300.0)
    t = np.linspace(0, 0.2, 20001)
    a = bcf(t)
    inner = cumulative_trapezoid(a, t, initial=0)
    outer = cumulative_trapezoid(inner, t, initial=0)
    ls = g_from_exponential(bcf, t)
    assert np.max(np.abs(ls.full() - outer)) <= 1e-6 * np.max(np.abs(outer))


def test_single_mode_closed_form():
    w, p = 50 + 5j, 2.0 + 0.5j
    bcf = ExponentialBCF([w], [p], [0.0], 0.0, "zero", 0)
    t = np.array([0.0, 0.01, 0.1, 1.0])
    ls = g_from_exponential(bcf, t)
    expected = p * ((np.exp(1j * w * t) - 1) / (1j * w) ** 2 - t / (1j * w))
    assert np.allclose(ls.full(), expected, rtol=1e-13, atol=1e-15)


def test_second_difference_reproduces_alpha():
    bcf = decompose(table_model(), pade(2), 77.0)
    t0 = 0.05
    errs = []
    for h in (4e-4, 2e-4, 1e-4):
        ls = g_from_exponential(bcf, np.array([t0 - h, t0, t0 + h]))
        d2 = (ls.full()[0] - 2 * ls.full()[1] + ls.full()[2]) / h**2
        errs.append(abs(d2 - bcf(t0)))
    assert errs[0] / errs[1] == pytest.approx(4, abs=0.5)
    assert errs[1] / errs[2] == pytest.approx(4, abs=0.5)


def test_reorganization_energy_mismatch_detected():
    good = decompose(table_model(), pade(2), 77.0)
    bad = ExponentialBCF(good.frequencies, 1.1 * good.a_coeffs, 1.1 * good.b_coeffs,
                         good.temperature, good.scheme, good.L, good.model)
    with pytest.raises(NumericalError, match="reorganization"):
        g_from_exponential(bad, np.linspace(0, 1, 5))


def test_analytic_matches_quadrature_at_77K():
    model = table_model()
    t = np.arange(2048) * 2e-4
    ana = g_from_exponential(decompose(model, pade(8), 77.0), t)
    num = g_from_sd_quadrature(model, 77.0, t)
    assert np.max(np.abs(ana.g - num.g)) <= 1e-3 * np.max(np.abs(num.g))
    assert ana.E_lambda == pytest.approx(num.E_lambda, rel=1e-6)
    assert ana.g_inf == pytest.approx(num.g_inf, rel=1e-4)


def test_fft_matches_adaptive():
    sd = LogNormal(0.3, 0.7, 38.0)
    t = np.arange(256) * 5e-4
    fft = g_from_sd_quadrature(sd, 77.0, t, method="fft")
    ada = g_from_sd_quadrature(sd, 77.0, t[::32], method="adaptive")
    assert np.max(np.abs(fft.g[::32] - ada.g)) <= 1e-8 * np.max(np.abs(ada.g))


def test_ohmic_fft_matches_adaptive():
    sd = OhmicExp(0.3, 100.0)
    t = np.arange(256) * 1e-3
    fft = g_from_sd_quadrature(sd, 0.0, t, method="fft")
    ada = g_from_sd_quadrature(sd, 0.0, t[::64], method="adaptive")
    assert np.max(np.abs(fft.g[::64] - ada.g)) <= 1e-6 * np.max(np.abs(ada.g))
    assert fft.dephasing_rate == 0.0


def test_ohmic_dephasing_rate():
    ls = g_from_sd_quadrature(OhmicExp(0.3, 100.0), 300.0, np.array([0.0, 0.1]))
    # T * J'(0) with T in cm^-1
    assert ls.dephasing_rate == pytest.approx(0.6950348 * 300 * 0.3, rel=1e-12)
    assert ls.g_inf is None


def test_log_normal_zero_temperature_limit():
    sd = LogNormal(0.3, 0.7, 38.0)
    t = np.arange(4096) * 2e-3
    ls = g_from_sd_quadrature(sd, 0.0, t)
    assert ls.g_inf.real == pytest.approx(0.3, rel=1e-8)
    assert ls.g[-1].real == pytest.approx(0.3, abs=1e-3)


def test_lineshape_is_linear_in_coupling():
    sd = LogNormal(0.3, 0.7, 38.0)
    t = np.arange(128) * 1e-3
    a = g_from_sd_quadrature(sd, 77.0, t).g
    b = g_from_sd_quadrature(sd.scaled(2.5), 77.0, t).g
    assert np.allclose(b, 2.5 * a, rtol=1e-10, atol=1e-14)
    bcf = decompose(table_model(), pade(2), 77.0)
    g1 = g_from_exponential(bcf, t).g
    g2 = g_from_exponential(decompose(table_model().scaled(2.5), pade(2), 77.0), t).g
    assert np.allclose(g2, 2.5 * g1, rtol=1e-12, atol=1e-14)


def test_zero_scheme_reorganization_energy():
    model = table_model()
    ls = g_from_exponential(decompose(model, zero_temperature(), 0.0), np.array([0.0, 1.0]))
    assert ls.E_lambda == pytest.approx(reorganization_energy(model), rel=1e-12)


def test_nonuniform_grid_has_no_dt():
    ls = LineshapeSeries(np.array([0.0, 1.0, 3.0]), np.zeros(3, complex), 0.0, "analytic", 0.0)
    with pytest.raises(ValueError):
        ls.dt
