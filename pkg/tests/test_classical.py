import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qscatter.classical import (
    GROUND,
    BlochState,
    bloch_rhs,
    evolve_bloch,
    first_order_field,
    resonant_bloch_batch,
    second_order_ode_residual,
    series_correction,
    series_sum,
    series_term_field,
    third_order_field,
)
from qscatter.core import (
    DegenerateParameterError,
    DriveSpec,
    RateSet,
    ResolutionError,
    TimeGrid,
    mhz_to_angular,
)
from qscatter.quantum import quantum_closed_form


def window_grid(rates, n=2001, factor=10):
    return TimeGrid(factor / min(rates.gamma_e, rates.gamma_p), n)


def rel_sup(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def test_bloch_rhs_examples():
    r = RateSet(1.0, 3.0)
    assert bloch_rhs(GROUND, 0.7, r, DriveSpec()) == BlochState(0, 0, 0)
    assert bloch_rhs(BlochState(0, 0, 0), 0.0, r, DriveSpec(omega0=2.0)).z == -3.0
    d = bloch_rhs(BlochState(0.1, 0.2, -0.5), 0.0, r, DriveSpec(omega0=2.0, detuning=0.5))
    assert d.x == pytest.approx(-0.5 * 0.2 - 1.5 * 0.1)
    assert d.y == pytest.approx(0.5 * 0.1 + 2.0 * 0.5 - 1.5 * 0.2)
    assert d.z == pytest.approx(-3.0 * 0.5 + 2.0 * 0.2)


def test_undriven_probe_stays_dark(fig5_rates):
    traj = evolve_bloch(fig5_rates, DriveSpec(), TimeGrid(5.0, 101))
    assert np.all(traj.field.samples == 0)
    assert np.all(traj.z == -1)


def test_resonant_drive_keeps_x_zero(fig5_rates, fig5_omega):
    traj = evolve_bloch(fig5_rates, DriveSpec(omega0=fig5_omega), TimeGrid(5.0, 101))
    assert np.all(traj.x == 0)
    assert np.all(traj.field.imag == 0)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0, 20), st.floats(-3, 3))
def test_bloch_norm_bound(f_e, f_p, f_om, f_d):
    r = RateSet.from_mhz(f_e, f_p)
    traj = evolve_bloch(r, DriveSpec(omega0=mhz_to_angular(f_om), detuning=mhz_to_angular(f_d)),
                        TimeGrid(3 / min(r.gamma_e, r.gamma_p), 301))
    assert np.all(traj.norm() <= 1 + 1e-9)
    assert np.all(traj.z >= -1 - 1e-9)


def test_weak_drive_is_first_order(fig5_rates):
    g = window_grid(fig5_rates)
    drive = DriveSpec(omega0=mhz_to_angular(0.1))
    err = rel_sup(evolve_bloch(fig5_rates, drive, g).field.samples,
                  first_order_field(fig5_rates, drive, g).samples)
    # leading correction is cubic, so the relative error scales as omega0**2 / (gamma_e gamma_p)
    assert err < drive.omega0**2 / (fig5_rates.gamma_e * fig5_rates.gamma_p)
    assert err == pytest.approx(0.0110, abs=5e-4)


def test_weak_drive_limit_converges(fig5_rates):
    g = window_grid(fig5_rates, 801)
    errs = []
    for om in (0.1, 0.01, 0.001):
        d = DriveSpec(omega0=om)
        errs.append(rel_sup(evolve_bloch(fig5_rates, d, g).field.samples / om,
                            first_order_field(fig5_rates, d, g).samples / om))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-5


def test_strong_drive_rabi_oscillations(fig5_rates):
    g = TimeGrid(3.0, 6001)
    v = evolve_bloch(fig5_rates, DriveSpec(omega0=mhz_to_angular(10.0)), g).field.real
    crossings = np.sum(np.sign(v[1:-1]) * np.sign(v[2:]) < 0)
    assert crossings >= 2


def test_first_order_examples(fig5_rates):
    g = window_grid(fig5_rates)
    d = DriveSpec(omega0=1.3)
    v = first_order_field(fig5_rates, d, g).samples
    assert v[0] == 0
    assert np.array_equal(first_order_field(fig5_rates, DriveSpec(omega0=2.6), g).samples, 2 * v)
    with pytest.raises(ValueError):
        first_order_field(fig5_rates, DriveSpec(omega0=1, detuning=1), g)


def test_first_order_at_omega_star_equals_quantum(fig5_rates):
    g = window_grid(fig5_rates)
    cl = first_order_field(fig5_rates, DriveSpec(omega0=fig5_rates.omega_star), g).samples
    q = quantum_closed_form(fig5_rates, DriveSpec(), g, scattered_only=True).samples
    assert rel_sup(cl, q) < 1e-12


def test_first_order_equal_rates_limit():
    G = 2.0
    g = TimeGrid(10.0, 201)
    v = first_order_field(RateSet(G, G), DriveSpec(omega0=1.0), g).samples
    t = g.values
    assert np.max(np.abs(v + math.sqrt(G / 2) * t / 2 * np.exp(-G * t / 2))) < 1e-15


def test_third_order_examples(fig5_rates, fig5_omega):
    g = window_grid(fig5_rates)
    d = DriveSpec(omega0=fig5_omega)
    v = third_order_field(fig5_rates, d, g).samples
    assert abs(v[0]) < 1e-13 * np.max(np.abs(v))
    v2 = third_order_field(fig5_rates, DriveSpec(omega0=2 * fig5_omega), g).samples
    assert np.max(np.abs(v2 - 8 * v)) <= 1e-14 * np.max(np.abs(v2))
    series = series_term_field(3, fig5_rates, d, g).samples
    assert np.max(np.abs(v - series)) < 1e-9


@pytest.mark.parametrize("ratio", [1.0, 1 / 3])
def test_third_order_degenerate_rates(ratio):
    with pytest.raises(DegenerateParameterError):
        third_order_field(RateSet(ratio, 1.0), DriveSpec(omega0=1.0), TimeGrid(1.0, 5))


def test_third_order_requires_radiative_limit():
    with pytest.raises(ValueError):
        third_order_field(RateSet(0.2, 1.0, gamma2_p=0.7), DriveSpec(omega0=1.0), TimeGrid(1.0, 5))


def test_series_corrections_structure(fig5_rates):
    for n in range(1, 8):
        c = series_correction(n, fig5_rates)
        assert c.order == n
        assert c.sigma_y(0.0) == 0 and c.sigma_z(0.0) == 0
        if n % 2:
            assert len(c.sigma_y) > 0 and len(c.sigma_z) == 0
        else:
            assert len(c.sigma_y) == 0 and len(c.sigma_z) > 0
    with pytest.raises(ValueError):
        series_correction(0, fig5_rates)


def test_series_orders(fig5_rates, fig5_omega):
    g = window_grid(fig5_rates)
    d = DriveSpec(omega0=fig5_omega)
    assert np.allclose(series_sum(1, fig5_rates, d, g).samples,
                       series_term_field(1, fig5_rates, d, g).samples, rtol=1e-15, atol=0)
    assert rel_sup(series_sum(1, fig5_rates, d, g).samples,
                   first_order_field(fig5_rates, d, g).samples) < 1e-13
    for n in (2, 4):
        assert np.all(series_term_field(n, fig5_rates, d, g).samples == 0)
    assert np.max(np.abs(series_term_field(5, fig5_rates, d, g).samples)) > 0


def test_series_converges_to_bloch(fig5_rates, fig5_omega):
    g = window_grid(fig5_rates)
    d = DriveSpec(omega0=fig5_omega)
    ode = evolve_bloch(fig5_rates, d, g).field.samples
    errs = [rel_sup(series_sum(n, fig5_rates, d, g).samples, ode) for n in (1, 3, 5, 7)]
    assert errs == sorted(errs, reverse=True)
    assert errs[-1] < 1e-4


def test_series_improves_with_order_for_moderate_drive(fig5_rates):
    g = window_grid(fig5_rates, 1001)
    d = DriveSpec(omega0=0.5 * fig5_rates.omega_star)
    ode = evolve_bloch(fig5_rates, d, g).field.samples
    errs = [rel_sup(series_sum(n, fig5_rates, d, g).samples, ode) for n in range(1, 10, 2)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_series_uses_dephasing_rates():
    r = RateSet(0.4, 1.0, gamma2_e=0.35, gamma2_p=0.8)
    g = window_grid(r)
    d = DriveSpec(omega0=0.2)
    ode = evolve_bloch(r, d, g).field.samples
    assert rel_sup(series_sum(7, r, d, g).samples, ode) < 1e-6


def test_batch_matches_single_solves(fig5_rates):
    oms = np.array([0.1, 1.0, 3.0])
    t_max = 10 / fig5_rates.gamma_e
    y, z = resonant_bloch_batch(fig5_rates.gamma_e, fig5_rates.gamma_p, oms, t_max, 401)
    for k, om in enumerate(oms):
        traj = evolve_bloch(fig5_rates, DriveSpec(omega0=om), TimeGrid(t_max, 401))
        assert np.max(np.abs(y[k] - traj.y)) < 1e-8
        assert np.max(np.abs(z[k] - traj.z)) < 1e-8


def test_drive_sign_flip_is_exact_antisymmetry(fig5_rates):
    y_pos, z_pos = resonant_bloch_batch(fig5_rates.gamma_e, fig5_rates.gamma_p, 1.7, 20.0, 301)
    y_neg, z_neg = resonant_bloch_batch(fig5_rates.gamma_e, fig5_rates.gamma_p, -1.7, 20.0, 301)
    assert np.array_equal(y_neg, -y_pos)
    assert np.array_equal(z_neg, z_pos)


def test_second_order_residual_on_bloch_trajectory(fig5_rates, fig5_omega):
    g = window_grid(fig5_rates, 40001)
    d = DriveSpec(omega0=fig5_omega)
    traj = evolve_bloch(fig5_rates, d, g)
    assert second_order_ode_residual(traj.y, fig5_rates, d, g, normalize=True) < 1e-4


def test_second_order_residual_trivial_and_perturbed(fig5_rates, fig5_omega):
    g = window_grid(fig5_rates, 4001)
    assert second_order_ode_residual(np.zeros(4001), fig5_rates, DriveSpec(), g) == 0
    d = DriveSpec(omega0=fig5_omega)
    y = evolve_bloch(fig5_rates, d, g).y
    base = second_order_ode_residual(y, fig5_rates, d, g)
    bumped = second_order_ode_residual(y + 1e-3, fig5_rates, d, g)
    t = g.values[2:-2]
    ge, gp = fig5_rates.gamma_e, fig5_rates.gamma_p
    shift = (gp * (ge + 2 * gp) * np.exp(ge * t / 2) + 4 * fig5_omega**2 * np.exp(-ge * t / 2)) * 1e-3
    assert bumped == pytest.approx(np.max(shift), rel=0.05 + base / np.max(shift))


def test_second_order_residual_rejects_coarse_grid(fig5_rates, fig5_omega):
    g = window_grid(fig5_rates, 201)
    with pytest.raises(ResolutionError):
        second_order_ode_residual(np.zeros(201), fig5_rates, DriveSpec(omega0=fig5_omega), g)
    g = window_grid(fig5_rates, 1001)
    second_order_ode_residual(np.zeros(1001), fig5_rates, DriveSpec(omega0=fig5_omega), g)
