"""Scattering of an exponentially decaying coherent pulse on the Probe.

The Probe obeys the driven, damped Bloch equations with Rabi amplitude
``Omega(t) = omega0 * exp(-gamma2_e t)``::

    dx/dt = -Delta y - gamma2_p x
    dy/dt =  Delta x - Omega(t) z - gamma2_p y
    dz/dt = -gamma_p (1 + z) + Omega(t) y

Field convention: the reported classical envelope is
``scale * sqrt(gamma_p / 2) * (-y - i x) / 2``. At resonance it is real and
its sign agrees with the closed-form single-photon field, so the
first-order term with ``omega0 = sqrt(gamma_e gamma_p)`` coincides with it.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import (
    ComplexEnvelope,
    DegenerateParameterError,
    ResolutionError,
    StiffnessError,
    exp_difference_quotient,
)
from .exp_poly import ExpPoly


@dataclass(frozen=True)
class BlochState:
    x: float
    y: float
    z: float

    def norm(self):
        return math.sqrt(self.x**2 + self.y**2 + self.z**2)


GROUND = BlochState(0.0, 0.0, -1.0)


@dataclass(frozen=True, eq=False)
class BlochTrajectory:
    grid: object
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    field: ComplexEnvelope

    def norm(self):
        return np.sqrt(self.x**2 + self.y**2 + self.z**2)


@dataclass(frozen=True)
class SeriesCorrection:
    """Order-``n`` coefficients of the expansion in powers of ``omega0``.

    ``<s_y> = exp(-gamma2_p t) * sum_n omega0**n * sigma_y[n]`` and
    ``<s_z> = -1 + sum_n omega0**n * sigma_z[n]``.
    """

    order: int
    sigma_y: ExpPoly
    sigma_z: ExpPoly


def _require_resonant(drive, what):
    if drive.detuning != 0:
        raise ValueError(f"{what} is only defined at zero detuning")


def bloch_rhs(state, t, rates, drive):
    om = drive.omega0 * math.exp(-rates.gamma2_e * t)
    d, g2 = drive.detuning, rates.gamma2_p
    return BlochState(
        -d * state.y - g2 * state.x,
        d * state.x - om * state.z - g2 * state.y,
        -rates.gamma_p * (1 + state.z) + om * state.y,
    )


def classical_field(x, y, rates, scale=1.0):
    return scale * math.sqrt(rates.gamma_p / 2) * (-np.asarray(y) - 1j * np.asarray(x)) / 2


def evolve_bloch(rates, drive, grid, rtol=1e-10, atol=1e-12):
    """Integrate the Bloch equations from the ground state.

    The excited population ``w = 1 + z`` is integrated instead of ``z`` so
    the small-drive regime keeps full relative precision.
    """
    om0, d = drive.omega0, drive.detuning
    g2e, g2p, gp = rates.gamma2_e, rates.gamma2_p, rates.gamma_p
    exp = math.exp

    def rhs(t, u):
        x, y, w = u
        om = om0 * exp(-g2e * t)
        return [-d * y - g2p * x, d * x - om * (w - 1.0) - g2p * y, -gp * w + om * y]

    t = grid.values
    sol = solve_ivp(rhs, (0.0, t[-1]), [0.0, 0.0, 0.0], method="DOP853",
                    t_eval=t, rtol=rtol, atol=atol)
    if not sol.success:
        raise StiffnessError(f"Bloch integration failed: {sol.message}")
    x, y, w = sol.y
    field = ComplexEnvelope(grid, classical_field(x, y, rates, drive.scale))
    return BlochTrajectory(grid, x, y, w - 1.0, field)


def resonant_bloch_batch(gamma_e, gamma_p, omega0, t_max, n_points,
                         gamma2_e=None, gamma2_p=None, rtol=1e-10, atol=1e-12):
    """Resonant Bloch solutions for many parameter sets in one integration.

    All arguments broadcast to a common shape ``(K,)``. Member ``k`` is
    sampled on ``linspace(0, t_max[k], n_points)``; internally every member is
    integrated in the scaled time ``s = t / t_max[k]`` on ``[0, 1]``.
    Returns ``(y, z)`` arrays of shape ``(K, n_points)``.
    """
    ge, gp, om, tm = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float))
                                           for v in (gamma_e, gamma_p, omega0, t_max)))
    g2e = ge / 2 if gamma2_e is None else np.broadcast_to(np.asarray(gamma2_e, float), ge.shape)
    g2p = gp / 2 if gamma2_p is None else np.broadcast_to(np.asarray(gamma2_p, float), ge.shape)
    k = ge.size

    def rhs(s, u):
        y, w = u[:k], u[k:]
        t = s * tm
        o = om * np.exp(-g2e * t)
        return np.concatenate([tm * (-o * (w - 1.0) - g2p * y), tm * (-gp * w + o * y)])

    s = np.linspace(0.0, 1.0, n_points)
    sol = solve_ivp(rhs, (0.0, 1.0), np.zeros(2 * k), method="DOP853", t_eval=s,
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise StiffnessError(f"batched Bloch integration failed: {sol.message}")
    return sol.y[:k], sol.y[k:] - 1.0


def first_order_field(rates, drive, grid):
    """Term linear in ``omega0`` of the resonant classical field."""
    _require_resonant(drive, "first_order_field")
    t = grid.values
    pref = math.sqrt(rates.gamma_p / 2) * drive.omega0
    v = -0.5 * pref * exp_difference_quotient(-rates.gamma2_e, -rates.gamma2_p, t)
    return ComplexEnvelope(grid, drive.scale * v)


def third_order_field(rates, drive, grid):
    """Closed-form cubic term of the resonant classical field.

    Four exponentials with rates ``gamma_p/2``, ``gamma_e + gamma_p/2``,
    ``gamma_e/2 + gamma_p`` and ``3 gamma_e/2``. Poles at ``gamma_e = gamma_p``
    and ``3 gamma_e = gamma_p``; use :func:`series_sum` there.
    """
    _require_resonant(drive, "third_order_field")
    if not rates.radiative_limited:
        raise ValueError("third_order_field assumes radiative-limited dephasing")
    g, G = rates.gamma_e, rates.gamma_p
    floor = 1e-9 * (g + G)
    if min(abs(g - G), abs(3 * g - G), g) < floor:
        raise DegenerateParameterError(
            f"third-order closed form is singular at gamma_e={g}, gamma_p={G}")
    t = grid.values
    den = g * (g - G) ** 2 * (3 * g - G) * (g + G)
    bracket = (-(g - G) ** 2 * np.exp(-G * t / 2)
               + (-3 * g**2 - 2 * g * G + G**2) * np.exp(-(g + G / 2) * t)
               + g * (3 * g - G) * np.exp(-(g / 2 + G) * t)
               + g * (g + G) * np.exp(-1.5 * g * t))
    v = -math.sqrt(G / 2) * 2 * drive.omega0**3 * bracket / den
    return ComplexEnvelope(grid, drive.scale * v)


@functools.lru_cache(maxsize=256)
def _corrections(rates, n):
    if n == 0:
        return (SeriesCorrection(0, ExpPoly(), ExpPoly.constant(-1.0)),)
    prev_all = _corrections(rates, n - 1)
    prev = prev_all[-1]
    g2e, g2p, gp = rates.gamma2_e, rates.gamma2_p, rates.gamma_p
    sy = (prev.sigma_z.mul_exp(g2p - g2e) * -1).integrate()
    sz = prev.sigma_y.mul_exp(gp - g2e - g2p).integrate().mul_exp(-gp)
    return prev_all + (SeriesCorrection(n, sy, sz),)


def series_correction(n, rates):
    """Exact order-``n`` correction (``n >= 1``), zero at ``t = 0``."""
    if n < 1:
        raise ValueError(f"order must be >= 1, got {n}")
    return _corrections(rates, n)[n]


def series_term_field(n, rates, drive, grid):
    """Field contribution of order ``n`` alone."""
    _require_resonant(drive, "series_term_field")
    c = series_correction(n, rates)
    y = c.sigma_y.mul_exp(-rates.gamma2_p)(grid.values) * drive.omega0**n
    return ComplexEnvelope(grid, drive.scale * classical_field(0.0, y.real, rates))


def series_sum(N, rates, drive, grid):
    """Partial sum of the field expansion through order ``N``."""
    _require_resonant(drive, "series_sum")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    terms = _corrections(rates, N)[1:]
    ysum = ExpPoly()
    for c in terms:
        ysum = ysum + c.sigma_y * drive.omega0**c.order
    y = ysum.mul_exp(-rates.gamma2_p)(grid.values)
    return ComplexEnvelope(grid, drive.scale * classical_field(0.0, y.real, rates))


def second_order_ode_residual(y_traj, rates, drive, grid, normalize=False):
    """Max residual of the second-order equation satisfied by ``<s_y>``.

    Eliminating ``z`` from the resonant Bloch equations gives, for
    ``u = -<s_y>`` and drive decay ``d = gamma2_e``::

        e^{d t} (u'' + (gamma2_p + d + gamma_p) u' + gamma2_p (d + gamma_p) u)
            + gamma_p omega0 + omega0**2 e^{-d t} u = 0

    (scaled by 4 in the radiative-limited case this is the familiar form with
    ``4 gamma_p omega0``). Derivatives are central finite differences, so the
    grid must resolve the fastest rate. With ``normalize`` the residual is
    divided by the largest individual term magnitude.
    """
    _require_resonant(drive, "second_order_ode_residual")
    y = np.asarray(y_traj, dtype=float)
    if y.shape != (grid.n_points,):
        raise ValueError(f"trajectory has shape {y.shape}, grid has {grid.n_points} points")
    h = grid.step
    fastest = max(rates.gamma_e, rates.gamma_p, drive.omega0)
    slowest = min(rates.gamma_e, rates.gamma_p)
    if h * fastest > 0.2 or h * slowest > 0.01:
        raise ResolutionError(
            f"grid step {h:.3g} too coarse for rates up to {fastest:.3g} rad/us")
    t = grid.values
    u = -y
    du = np.gradient(u, h, edge_order=2)
    d2u = np.gradient(du, h, edge_order=2)
    d, g2, gp, om = rates.gamma2_e, rates.gamma2_p, rates.gamma_p, drive.omega0
    e = np.exp(d * t)
    terms = np.array([
        4 * e * d2u,
        4 * e * (g2 + d + gp) * du,
        4 * e * g2 * (d + gp) * u,
        np.full_like(t, 4 * gp * om),
        4 * om**2 * u / e,
    ])
    # one-sided second differences at the ends are only first-order accurate
    res = np.abs(terms.sum(axis=0))[2:-2]
    worst = float(res.max())
    if normalize:
        scale = float(np.abs(terms).max())
        return worst / scale if scale else worst
    return worst
