"""Cascaded Emitter -> Probe master equation on the 4-dimensional product space.

Basis ordering is ``|emitter, probe>`` in ``{gg, ge, eg, ee}``. The frame
rotates at the Emitter carrier, so in every resonant-Emitter scenario
``delta_e = 0`` and ``delta_p = -Delta``.

The dissipator uses the single collapse operator
``C = sqrt(gamma_e) s-_e + sqrt(gamma_p) s-_p`` together with the exchange
Hamiltonian ``(i sqrt(gamma_e gamma_p) / 2)(s+_e s-_p - s+_p s-_e)``, which is
the standard trace-preserving cascaded form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import ComplexEnvelope, IntegrationDriftError, StiffnessError

_SM = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e| with g=0, e=1
_SZ = np.diag([-1.0, 1.0]).astype(complex)
_I2 = np.eye(2, dtype=complex)

SM_E = np.kron(_SM, _I2)
SM_P = np.kron(_I2, _SM)
SZ_E = np.kron(_SZ, _I2)
SZ_P = np.kron(_I2, _SZ)
N_E = SM_E.conj().T @ SM_E
N_P = SM_P.conj().T @ SM_P

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class DensityMatrix4:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"density matrix must be 4x4, got {m.shape}")
        problems = density_violations(m)
        if problems:
            raise ValueError("invalid density matrix: " + "; ".join(problems))
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @classmethod
    def ground(cls):
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = 1
        return cls(m)

    @classmethod
    def superposition_emitter(cls):
        """Emitter in (|g> + |e>)/sqrt(2), Probe in |g>."""
        psi = np.kron(np.array([1, 1], dtype=complex) / math.sqrt(2), np.array([1, 0], dtype=complex))
        return cls(np.outer(psi, psi.conj()))


def density_violations(rho, herm_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, pos_tol=POSITIVITY_TOL):
    """List the density-matrix invariants that ``rho`` (or a stack) breaks."""
    rho = np.asarray(rho)
    out = []
    herm = np.max(np.abs(rho - np.swapaxes(rho.conj(), -1, -2)))
    if herm > herm_tol:
        out.append(f"hermiticity error {herm:.3g}")
    tr = np.max(np.abs(np.trace(rho, axis1=-2, axis2=-1) - 1))
    if tr > trace_tol:
        out.append(f"trace error {tr:.3g}")
    hpart = (rho + np.swapaxes(rho.conj(), -1, -2)) / 2
    lam = np.min(np.linalg.eigvalsh(hpart))
    if lam < -pos_tol:
        out.append(f"minimum eigenvalue {lam:.3g}")
    return out


@dataclass(frozen=True, eq=False)
class CascadeLiouvillian:
    hamiltonian: np.ndarray
    collapse: np.ndarray

    def apply(self, rho):
        """Generator action ``-i[H, rho] + D[C] rho``."""
        h, c = self.hamiltonian, self.collapse
        cd = c.conj().T
        cdc = cd @ c
        return -1j * (h @ rho - rho @ h) + c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)

    def superoperator(self):
        """16x16 matrix acting on row-major ``rho.ravel()``."""
        h, c = self.hamiltonian, self.collapse
        eye = np.eye(4)
        cdc = c.conj().T @ c
        # vec(A rho B) = kron(A, B.T) vec(rho) for row-major vec
        return (-1j * (np.kron(h, eye) - np.kron(eye, h.T))
                + np.kron(c, c.conj())
                - 0.5 * (np.kron(cdc, eye) + np.kron(eye, cdc.T)))


def build_cascade(rates, delta_e=0.0, delta_p=0.0):
    ge, gp = rates.gamma_e, rates.gamma_p
    exchange = 0.5j * math.sqrt(ge * gp) * (SM_E.conj().T @ SM_P - SM_P.conj().T @ SM_E)
    h = delta_e / 2 * SZ_E + delta_p / 2 * SZ_P + exchange
    c = math.sqrt(ge) * SM_E + math.sqrt(gp) * SM_P
    return CascadeLiouvillian(h, c)


@dataclass(frozen=True, eq=False)
class RhoTrajectory:
    grid: object
    rho: np.ndarray  # shape (n_points, 4, 4)

    def expect(self, op):
        return np.einsum("tij,ji->t", self.rho, op)

    def purity(self):
        return np.einsum("tij,tji->t", self.rho, self.rho).real


def evolve_rho(liouvillian, rho0, grid, rtol=1e-10, atol=1e-12, check=True):
    """Integrate the master equation and sample ``rho`` on ``grid``.

    With ``check`` set, every sample is verified against the density-matrix
    invariants and :class:`IntegrationDriftError` is raised on violation.
    """
    if isinstance(rho0, DensityMatrix4):
        rho0 = rho0.entries
    sup = liouvillian.superoperator()
    t = grid.values
    # long steps are accurate at the nodes, but the dense-output interpolant
    # between them is not; cap the step at twice the fastest generator timescale
    radius = np.max(np.abs(np.linalg.eigvals(sup)))
    max_step = 2.0 / radius if radius > 0 else np.inf
    sol = solve_ivp(lambda _t, v: sup @ v, (0.0, t[-1]), np.asarray(rho0, dtype=complex).ravel(),
                    method="DOP853", t_eval=t, rtol=rtol, atol=atol, max_step=max_step)
    if not sol.success:
        raise StiffnessError(f"master-equation integration failed: {sol.message}")
    rho = sol.y.T.reshape(-1, 4, 4)
    if check:
        problems = density_violations(rho)
        if problems:
            raise IntegrationDriftError("density matrix drifted: " + "; ".join(problems))
    return RhoTrajectory(grid, rho)


def vq_from_master(traj, rates, scale=1.0, scattered_only=False):
    """Detected field ``sqrt(gamma_e)<s-_e> + sqrt(gamma_p / 2)<s-_p>``."""
    field = math.sqrt(rates.gamma_p / 2) * traj.expect(SM_P)
    if not scattered_only:
        field = field + math.sqrt(rates.gamma_e) * traj.expect(SM_E)
    return ComplexEnvelope(traj.grid, scale * field)


def solve_cascade(rates, delta, grid, **kwargs):
    """Standard scenario: superposition Emitter, Probe detuned by ``delta``."""
    liou = build_cascade(rates, 0.0, -delta)
    return evolve_rho(liou, DensityMatrix4.superposition_emitter(), grid, **kwargs)
