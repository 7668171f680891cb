import math
import warnings

import mpmath
import numpy as np
import pytest
from scipy import integrate as sci

from spheretx import KindError, ReceiverKind, peak_time, point_concentration, point_source_cir, uca_cir
from spheretx.analytic import erf, erfc

from conftest import make_spec

P, A = ReceiverKind.PASSIVE, ReceiverKind.ABSORBING
mpmath.mp.dps = 40


def test_erf_basics():
    assert erf(0.0) == 0.0
    assert erf(40.0) == 1.0
    assert erf(-0.3) == -erf(0.3)


def test_erf_one_against_gaussian_integral():
    val, _ = sci.quad(lambda y: 2 / math.sqrt(math.pi) * math.exp(-y * y), 0, 1, epsabs=0, epsrel=1e-13)
    assert erf(1.0) == pytest.approx(val, abs=1e-15)
    assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-15)


@pytest.mark.parametrize("x", [-3.0, -0.5, 1e-8, 0.1, 0.7, 1.0, 2.5, 4.0, 6.0])
def test_erf_absolute_accuracy(x):
    assert abs(erf(x) - float(mpmath.erf(x))) < 1e-12


@pytest.mark.parametrize("x", [0.5, 3.0, 8.0, 15.0, 26.0])
def test_erfc_relative_accuracy_in_tail(x):
    exact = float(mpmath.erfc(x))
    assert erfc(x) == pytest.approx(exact, rel=1e-12)
    assert erfc(x) > 0


def test_tangent_1d_absorbing_is_immediate():
    s = make_spec("1D", d=1e-6, r_tx=0.0)
    assert point_source_cir(s, A, [1e-9, 1.0, 1e3]) == pytest.approx(1000.0)


def test_3d_absorbing_asymptote(spec3):
    tp = peak_time(spec3, A)
    assert point_source_cir(spec3, A, 1e12 * tp) == pytest.approx(500.0, rel=1e-5)


def test_1d_absorbing_asymptote(spec1):
    tp = peak_time(spec1, A)
    assert point_source_cir(spec1, A, 1e12 * tp) == pytest.approx(1000.0, rel=1e-5)


def _eq8_mp(d, r, D, t, n):
    d, r, D, t = (mpmath.mpf(v) for v in (d, r, D, t))
    a = mpmath.erf((r - d) / (2 * mpmath.sqrt(D * t))) + mpmath.erf((r + d) / (2 * mpmath.sqrt(D * t)))
    b = mpmath.sqrt(D * t / mpmath.pi) / d * (
        mpmath.exp(-(d + r) ** 2 / (4 * D * t)) - mpmath.exp(-(d - r) ** 2 / (4 * D * t)))
    return float(n * (a / 2 + b))


def test_3d_passive_reference_value(spec3):
    t = 6.67e-4
    got = point_source_cir(spec3, P, t)
    assert got == pytest.approx(_eq8_mp(2e-6, 1e-6, 1e-9, t, 1000), rel=1e-12)
    assert got == pytest.approx(38.5, rel=0.02)


@pytest.mark.parametrize("d", [2e-6, 5e-6, 20e-6])
@pytest.mark.parametrize("ratio", [0.01, 0.3, 1.0, 4.0, 100.0])
def test_passive_1d_equals_concentration_integral(d, ratio):
    s = make_spec("1D", d=d, r_tx=0.0)
    t = ratio * peak_time(s, P)
    val, _ = sci.quad(lambda x: float(point_concentration(s, t, x)), d - 1e-6, d + 1e-6,
                      epsabs=0, epsrel=1e-13, limit=200)
    assert point_source_cir(s, P, t) == pytest.approx(val, rel=1e-9)


@pytest.mark.parametrize("d", [2e-6, 5e-6])
@pytest.mark.parametrize("ratio", [0.1, 1.0, 10.0])
def test_passive_3d_equals_concentration_integral(d, ratio):
    s = make_spec("3D", d=d, r_tx=0.0)
    t = ratio * peak_time(s, P)
    r = s.r_rx

    # receiver-centered spherical shells; source on the axis at distance d
    def shell(rho):
        f = lambda mu: float(point_concentration(s, t, math.sqrt(max(d * d + rho * rho - 2 * d * rho * mu, 0.0))))
        v, _ = sci.quad(f, -1, 1, epsabs=0, epsrel=1e-13, limit=200)
        return 2 * math.pi * rho * rho * v

    val, _ = sci.quad(shell, 0, r, epsabs=0, epsrel=1e-12, limit=200)
    assert point_source_cir(s, P, t) == pytest.approx(val, rel=1e-9)


def test_concentration_at_source():
    s1 = make_spec("1D", r_tx=0.0)
    s3 = make_spec("3D", r_tx=0.0)
    t = 1e-3
    assert point_concentration(s1, t, 0.0) == pytest.approx(1000 / math.sqrt(4 * math.pi * 1e-9 * t), rel=1e-14)
    assert point_concentration(s3, t, 0.0) == pytest.approx(1000 / (4 * math.pi * 1e-9 * t) ** 1.5, rel=1e-14)


def test_concentration_line_integral_is_n(spec1):
    # 50 standard deviations each side
    val, _ = sci.quad(lambda x: float(point_concentration(spec1, 1e-3, x)), -1e-4, 1e-4,
                      points=[0.0], epsabs=0, epsrel=1e-12, limit=200)
    assert val == pytest.approx(1000.0, rel=1e-10)


def test_uca_1d_reference(spec1):
    assert uca_cir(spec1, 2e-3) == pytest.approx(241.9, rel=1e-3)


def test_uca_rejects_absorbing(spec3):
    with pytest.raises(KindError):
        uca_cir(spec3, 1e-3, A)


def test_uca_matches_exact_far_away():
    ratios = []
    for d in (2e-6, 2e-5, 2e-4):
        s = make_spec("3D", d=d, r_tx=0.0)
        t = peak_time(s, P)
        ratios.append(uca_cir(s, t) / point_source_cir(s, P, t))
    err = [abs(x - 1) for x in ratios]
    assert err[0] > err[1] > err[2] and err[2] < 1e-4


def test_uca_decays(spec3):
    assert uca_cir(spec3, 1e6) < 1e-10


@pytest.mark.parametrize("dim,kind,expected", [
    ("1D", P, 2.0e-3), ("3D", P, 6.667e-4), ("3D", A, 1.667e-4), ("1D", A, 1.667e-4),
])
def test_peak_times(dim, kind, expected):
    assert peak_time(make_spec(dim), kind) == pytest.approx(expected, rel=1e-3)


@pytest.mark.parametrize("dim", ["1D", "3D"])
def test_uca_argmax_matches_peak_time(dim):
    s = make_spec(dim)
    tp = peak_time(s, P)
    t = np.geomspace(tp / 10, tp * 10, 4001)
    k = int(np.argmax(uca_cir(s, t)))
    assert abs(math.log(t[k] / tp)) <= math.log(t[1] / t[0])


@pytest.mark.parametrize("dim", ["1D", "3D"])
def test_absorbing_rate_argmax_matches_peak_time(dim):
    s = make_spec(dim)
    tp = peak_time(s, A)
    t = np.geomspace(tp / 10, tp * 10, 4001)
    rate = np.gradient(point_source_cir(s, A, t), t)
    k = int(np.argmax(rate))
    assert abs(math.log(t[k] / tp)) <= 2 * math.log(t[1] / t[0])


@pytest.mark.parametrize("dim", ["1D", "3D"])
def test_absorbing_monotone(dim):
    s = make_spec(dim)
    tp = peak_time(s, A)
    v = point_source_cir(s, A, np.geomspace(tp / 100, tp * 100, 400))
    assert np.all(np.diff(v) >= 0)


@pytest.mark.parametrize("dim", ["1D", "3D"])
@pytest.mark.parametrize("kind", [P, A])
def test_time_zero_and_underflow(dim, kind):
    s = make_spec(dim)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        v = point_source_cir(s, kind, np.array([0.0, 1e-300, 1e-12]))
    assert np.array_equal(v, [0.0, 0.0, 0.0])
    assert uca_cir(make_spec(dim), 0.0) == 0.0
