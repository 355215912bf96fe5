"""Scattering of the Emitter's vacuum/one-photon superposition on the Probe.

Two routes are provided: the time-local amplitude equations obtained after
eliminating the waveguide continuum, and the closed-form detected field.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import ComplexEnvelope, DriveSpec, StiffnessError, exp_difference_quotient

INV_SQRT2 = 1 / math.sqrt(2)


@dataclass(frozen=True)
class SinglePhotonAmplitudes:
    zeta: complex
    alpha1: complex
    alpha2: complex

    @classmethod
    def initial(cls):
        """Equal superposition on the Emitter, Probe in its ground state."""
        return cls(INV_SQRT2, INV_SQRT2, 0j)

    def as_array(self):
        return np.array([self.zeta, self.alpha1, self.alpha2], dtype=complex)


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    grid: object
    zeta: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray

    def __getitem__(self, i):
        return SinglePhotonAmplitudes(complex(self.zeta[i]), complex(self.alpha1[i]),
                                      complex(self.alpha2[i]))

    def excited_population(self):
        return np.abs(self.alpha1) ** 2 + np.abs(self.alpha2) ** 2


def emitter_envelope(rates, grid):
    """Field radiated by the Emitter alone, ``sqrt(gamma_e) exp(-gamma2_e t) / 2``."""
    t = grid.values
    return ComplexEnvelope(grid, math.sqrt(rates.gamma_e) * np.exp(-rates.gamma2_e * t) / 2)


def amplitude_rhs(state, t, rates, delta):
    """Time derivative of the single-excitation amplitudes.

    The Probe is driven by the Emitter amplitude through the exchange
    coupling ``sqrt(gamma_p gamma_e / 2) / 2``; ``zeta`` is conserved.
    """
    coupling = 0.5 * math.sqrt(rates.gamma_p * rates.gamma_e / 2)
    d_alpha1 = -rates.gamma_e / 2 * state.alpha1
    d_alpha2 = (-rates.gamma_p / 2 * state.alpha2
                - coupling * np.exp(-1j * delta * t) * state.alpha1)
    return SinglePhotonAmplitudes(0j, complex(d_alpha1), complex(d_alpha2))


def solve_amplitudes(rates, delta, grid, rtol=1e-10, atol=1e-13):
    """Integrate the amplitude equations from the prepared superposition."""
    g_e, g_p = rates.gamma_e, rates.gamma_p
    coupling = 0.5 * math.sqrt(g_p * g_e / 2)

    def rhs(t, u):
        return np.array([
            0j,
            -g_e / 2 * u[1],
            -g_p / 2 * u[2] - coupling * np.exp(-1j * delta * t) * u[1],
        ])

    t = grid.values
    sol = solve_ivp(rhs, (0.0, t[-1]), SinglePhotonAmplitudes.initial().as_array(),
                    method="DOP853", t_eval=t, rtol=rtol, atol=atol)
    if not sol.success:
        raise StiffnessError(f"amplitude integration failed: {sol.message}")
    zeta, a1, a2 = sol.y
    return AmplitudeTrajectory(grid, zeta, a1, a2)


def amplitude_field(traj, rates, delta, scale=1.0, scattered_only=False):
    """Detected field built from the amplitude trajectory.

    Uses the lowering-operator expectations ``conj(zeta) * alpha`` with the
    Probe term demodulated at the Emitter carrier. The overall constant of
    this route differs from :func:`quantum_closed_form` by a fixed factor,
    which is why route comparisons fit one complex scale.
    """
    t = traj.grid.values
    zc = np.conj(traj.zeta)
    probe = math.sqrt(rates.gamma_p / 2) * zc * traj.alpha2 * np.exp(1j * delta * t)
    field = probe if scattered_only else probe + math.sqrt(rates.gamma_e) * zc * traj.alpha1
    return ComplexEnvelope(traj.grid, scale * field)


def scattered_closed_form(rates, delta, t):
    # sqrt(Gp/2) sqrt(Ge Gp) (e^{-g2e t} - e^{(-g2p + i delta) t}) / (2(g2e - g2p) + 2 i delta)
    a = -rates.gamma2_e
    b = -rates.gamma2_p + 1j * delta
    pref = math.sqrt(rates.gamma_p / 2) * math.sqrt(rates.gamma_e * rates.gamma_p)
    return -0.5 * pref * exp_difference_quotient(a, b, t)


def quantum_closed_form(rates, drive, grid, scattered_only=False):
    """Closed-form detected field for the single-photon superposition input.

    ``drive.omega0`` is ignored; ``drive.detuning`` and ``drive.scale`` are
    used. The equal-rate resonant case is evaluated through its analytic
    limit rather than a 0/0 quotient.
    """
    t = grid.values
    field = scattered_closed_form(rates, drive.detuning, t)
    if not scattered_only:
        field = field + math.sqrt(rates.gamma_e) * np.exp(-rates.gamma2_e * t) / 2
    return ComplexEnvelope(grid, drive.scale * field)


def detuning_sweep(rates, deltas, grid, scale=1.0):
    """Total detected field (incoming pulse included) for each detuning."""
    deltas = list(deltas)
    if not deltas:
        raise ValueError("deltas must be nonempty")
    return [quantum_closed_form(rates, DriveSpec(detuning=d, scale=scale), grid) for d in deltas]
