import math

import mpmath
import numpy as np
import pytest

from qscatter.core import (
    ComplexEnvelope,
    DriveSpec,
    GridMismatchError,
    RateSet,
    TimeGrid,
    angular_to_mhz,
    envelope_subtract,
    exp_difference_quotient,
    expm1_ratio,
    fit_complex_scale,
    mhz_to_angular,
    quadratures,
    zero_envelope,
)
from qscatter.quantum import emitter_envelope, quantum_closed_form


def test_mhz_to_angular_values():
    assert mhz_to_angular(0) == 0
    assert mhz_to_angular(1.0) == pytest.approx(6.283185307179586, rel=1e-15)
    expected = float(2 * mpmath.pi * mpmath.mpf("1.86"))
    assert mhz_to_angular(1.86) == pytest.approx(expected, rel=1e-14)
    assert str(mhz_to_angular(1.86)).startswith("11.686")


@pytest.mark.parametrize("x", [1e-9, 0.09, 1.86, 1234.5, -3.0])
def test_unit_round_trip(x):
    assert angular_to_mhz(mhz_to_angular(x)) == pytest.approx(x, rel=1e-12)


def test_rateset_defaults_and_validation():
    r = RateSet(2.0, 4.0)
    assert (r.gamma2_e, r.gamma2_p) == (1.0, 2.0)
    assert r.radiative_limited
    assert r.omega_star == pytest.approx(math.sqrt(8))
    assert not RateSet(2.0, 4.0, gamma2_e=1.5).radiative_limited
    with pytest.raises(ValueError, match="positive"):
        RateSet(0.0, 1.0)
    with pytest.raises(ValueError, match="gamma2_p"):
        RateSet(1.0, 1.0, gamma2_p=0.4)
    r = RateSet.from_mhz(1.86, 1.85)
    assert r.gamma_e == mhz_to_angular(1.86)


def test_drive_spec_validation():
    with pytest.raises(ValueError):
        DriveSpec(omega0=-1.0)
    with pytest.raises(ValueError):
        DriveSpec(scale=0)


def test_time_grid():
    g = TimeGrid(2.0, 5)
    assert g.values[0] == 0.0
    assert list(g.values) == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert g.step == 0.5 and len(g) == 5
    with pytest.raises(ValueError):
        TimeGrid(1.0, 1)
    with pytest.raises(ValueError):
        TimeGrid(-1.0, 10)


def test_envelope_invariants():
    g = TimeGrid(1.0, 3)
    with pytest.raises(GridMismatchError):
        ComplexEnvelope(g, [1, 2])
    with pytest.raises(ValueError):
        ComplexEnvelope(g, [1, np.nan, 2])
    v = ComplexEnvelope(g, [1, 2, 3])
    with pytest.raises(ValueError):
        v.samples[0] = 5


def test_envelope_subtract_examples():
    g = TimeGrid(1.0, 4)
    a = ComplexEnvelope(g, np.exp(1j * g.values))
    assert np.all(envelope_subtract(a, a).samples == 0)
    assert np.array_equal(envelope_subtract(a, zero_envelope(g)).samples, a.samples)
    c = envelope_subtract(ComplexEnvelope(g, np.full(4, 2 + 0j)), ComplexEnvelope(g, np.full(4, 1 + 1j)))
    assert np.all(c.samples == 1 - 1j)
    with pytest.raises(GridMismatchError):
        envelope_subtract(a, zero_envelope(TimeGrid(1.0, 5)))


def test_subtracting_emitter_leaves_scattered_part(fig5_rates):
    g = TimeGrid(10.0, 501)
    total = quantum_closed_form(fig5_rates, DriveSpec(), g)
    scattered = quantum_closed_form(fig5_rates, DriveSpec(), g, scattered_only=True)
    diff = envelope_subtract(total, emitter_envelope(fig5_rates, g))
    assert np.max(np.abs(diff.samples - scattered.samples)) < 1e-15 * total.peak() * 10


def test_quadratures():
    g = TimeGrid(1.0, 11)
    f = np.sin(3 * g.values)
    re, im = quadratures(ComplexEnvelope(g, f))
    assert np.all(im == 0)
    re, im = quadratures(ComplexEnvelope(g, 1j * f))
    assert np.all(re == 0) and np.array_equal(im, f)
    v = ComplexEnvelope(g, f + 2j * np.cos(g.values))
    re, im = quadratures(v)
    assert np.array_equal(re + 1j * im, v.samples)


def test_resonant_scattered_field_has_zero_quadrature(fig5_rates):
    g = TimeGrid(20.0, 401)
    _, im = quadratures(quantum_closed_form(fig5_rates, DriveSpec(), g, scattered_only=True))
    assert np.all(im == 0)


@pytest.mark.parametrize("x", [0, 1e-12, -3e-5, 2e-4 + 5e-4j, 9e-4, 1.1e-3, 0.5, -7.0, 3 + 4j, 40.0])
def test_expm1_ratio_matches_high_precision(x):
    mpmath.mp.dps = 40
    z = mpmath.mpc(x)
    ref = complex(mpmath.expm1(z) / z) if x != 0 else 1.0
    assert abs(expm1_ratio(x) - ref) <= 1e-15 * abs(ref)


def test_exp_difference_quotient_near_degenerate():
    mpmath.mp.dps = 50
    t = np.array([0.0, 0.3, 2.0, 7.5])
    for a, b in [(-1.0, -1.0), (-1.0, -1.0 + 1e-10), (-0.2, -3.0 + 2j), (-2.0 + 1e-8j, -2.0)]:
        got = exp_difference_quotient(a, b, t)
        for ti, gi in zip(t, got):
            if a == b:
                ref = ti * mpmath.exp(mpmath.mpc(b) * ti)
            else:
                ref = (mpmath.exp(mpmath.mpc(a) * ti) - mpmath.exp(mpmath.mpc(b) * ti)) / (
                    mpmath.mpc(a) - mpmath.mpc(b))
            assert abs(gi - complex(ref)) <= 1e-14 * max(1.0, abs(complex(ref)))


def test_exp_difference_quotient_long_times():
    t = np.array([0.0, 10.0, 500.0, 5000.0])
    got = exp_difference_quotient(-0.01, -3.0, t)
    ref = (np.exp(-0.01 * t) - np.exp(-3.0 * t)) / 2.99
    assert np.all(np.isfinite(got))
    assert np.allclose(got, ref, rtol=1e-13, atol=0)
    assert np.array_equal(got, exp_difference_quotient(-3.0, -0.01, t))


def test_fit_complex_scale_recovers_factor():
    g = TimeGrid(1.0, 50)
    ref = np.exp(-g.values) * (1 + 0.3j * g.values)
    c, resid = fit_complex_scale(ref, ref / (0.7 - 2j))
    assert c == pytest.approx(0.7 - 2j, rel=1e-13)
    assert resid < 1e-14
