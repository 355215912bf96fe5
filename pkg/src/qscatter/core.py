"""Shared domain types, unit conversions and envelope arithmetic.

Internal units are angular rates in rad/us and times in us. Values quoted
as ``f = omega / 2 pi`` in MHz are converted at the boundary with
:func:`mhz_to_angular`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi


class QScatterError(Exception):
    """Base class for errors raised by this package."""

    category = "internal"


class GridMismatchError(QScatterError, ValueError):
    category = "shape"


class StiffnessError(QScatterError, RuntimeError):
    category = "stiffness"


class IntegrationDriftError(QScatterError, RuntimeError):
    category = "integration-drift"


class DegenerateParameterError(QScatterError, ValueError):
    category = "degenerate-parameters"


class ResolutionError(QScatterError, ValueError):
    category = "resolution"


class OptimizationError(QScatterError, RuntimeError):
    """Raised when the objective is not unimodal on the search bracket.

    ``profile`` holds the sampled ``(omega, epsilon)`` pairs that were
    inspected before giving up.
    """

    category = "optimization"

    def __init__(self, message, profile=()):
        super().__init__(message)
        self.profile = list(profile)


def mhz_to_angular(f_mhz):
    """Convert a frequency in MHz to an angular rate in rad/us."""
    return TWO_PI * f_mhz


def angular_to_mhz(omega):
    return omega / TWO_PI


@dataclass(frozen=True)
class RateSet:
    """Radiative and dephasing rates of the Emitter and the Probe (rad/us).

    The dephasing rates default to the radiative limit ``gamma / 2``.
    """

    gamma_e: float
    gamma_p: float
    gamma2_e: float | None = None
    gamma2_p: float | None = None

    def __post_init__(self):
        if not (self.gamma_e > 0 and self.gamma_p > 0):
            raise ValueError(
                f"radiative rates must be positive, got gamma_e={self.gamma_e}, "
                f"gamma_p={self.gamma_p}")
        if self.gamma2_e is None:
            object.__setattr__(self, "gamma2_e", self.gamma_e / 2)
        if self.gamma2_p is None:
            object.__setattr__(self, "gamma2_p", self.gamma_p / 2)
        # small slack so that gamma/2 computed elsewhere is accepted
        slack = 1e-12
        if self.gamma2_e < self.gamma_e / 2 * (1 - slack):
            raise ValueError(f"gamma2_e={self.gamma2_e} is below gamma_e/2")
        if self.gamma2_p < self.gamma_p / 2 * (1 - slack):
            raise ValueError(f"gamma2_p={self.gamma2_p} is below gamma_p/2")

    @classmethod
    def from_mhz(cls, gamma_e_mhz, gamma_p_mhz, gamma2_e_mhz=None, gamma2_p_mhz=None):
        conv = lambda f: None if f is None else mhz_to_angular(f)
        return cls(conv(gamma_e_mhz), conv(gamma_p_mhz), conv(gamma2_e_mhz), conv(gamma2_p_mhz))

    @property
    def radiative_limited(self):
        return self.gamma2_e == self.gamma_e / 2 and self.gamma2_p == self.gamma_p / 2

    @property
    def omega_star(self):
        """First-order effective classical amplitude ``sqrt(gamma_e * gamma_p)``."""
        return math.sqrt(self.gamma_e * self.gamma_p)


@dataclass(frozen=True)
class DriveSpec:
    """Classical drive: Rabi amplitude, detuning and a complex global factor."""

    omega0: float = 0.0
    detuning: float = 0.0
    scale: complex = 1.0

    def __post_init__(self):
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0}")
        if abs(self.scale) == 0:
            raise ValueError("scale must be nonzero")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform samples ``t_i = i * t_max / (n_points - 1)`` starting at 0."""

    t_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise ValueError(f"t_max must be positive and finite, got {self.t_max}")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def values(self):
        return np.linspace(0.0, self.t_max, self.n_points)

    @property
    def step(self):
        return self.t_max / (self.n_points - 1)

    def __len__(self):
        return self.n_points


@dataclass(frozen=True, eq=False)
class ComplexEnvelope:
    """Complex time series sampled on a :class:`TimeGrid`."""

    grid: TimeGrid
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex)
        if s.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"expected {self.grid.n_points} samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("envelope samples must be finite")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def t(self):
        return self.grid.values

    @property
    def real(self):
        return self.samples.real

    @property
    def imag(self):
        return self.samples.imag

    def __add__(self, other):
        _check_same_grid(self, other)
        return ComplexEnvelope(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        return envelope_subtract(self, other)

    def __mul__(self, c):
        return ComplexEnvelope(self.grid, self.samples * c)

    __rmul__ = __mul__

    def peak(self):
        return float(np.max(np.abs(self.samples)))


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def envelope_subtract(a, b):
    """Pointwise ``a - b``; both envelopes must share one grid."""
    _check_same_grid(a, b)
    return ComplexEnvelope(a.grid, a.samples - b.samples)


def quadratures(v):
    """Return the (real, imaginary) component series of an envelope."""
    return v.samples.real.copy(), v.samples.imag.copy()


def zero_envelope(grid):
    return ComplexEnvelope(grid, np.zeros(grid.n_points, dtype=complex))


def expm1_ratio(x):
    """``(exp(x) - 1) / x`` with the removable singularity at 0 filled in.

    Works for complex arrays. A short Taylor series is used where ``|x|``
    is small enough that the direct quotient loses digits.
    """
    x = np.asarray(x, dtype=complex)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-3
    xs = x[small]
    out[small] = 1 + xs / 2 * (1 + xs / 3 * (1 + xs / 4 * (1 + xs / 5)))
    xl = x[~small]
    out[~small] = np.expm1(xl) / xl
    return out


def exp_difference_quotient(a, b, t):
    """Evaluate ``(exp(a t) - exp(b t)) / (a - b)`` stably for complex rates.

    Tends to ``t exp(b t)`` as ``a -> b``, so near-degenerate rate pairs need
    no special casing by the caller.
    """
    t = np.asarray(t, dtype=float)
    # symmetric in (a, b); factor out the slower exponential so expm1 cannot overflow
    if complex(a).real > complex(b).real:
        a, b = b, a
    return np.exp(b * t) * t * expm1_ratio((a - b) * t)


def fit_complex_scale(reference, candidate):
    """Least-squares complex factor ``c`` minimizing ``|c * candidate - reference|``.

    Returns ``(c, residual)`` where ``residual`` is the sup-norm of the
    fitted difference relative to the peak of ``reference``.
    """
    ref = np.asarray(getattr(reference, "samples", reference), dtype=complex)
    cand = np.asarray(getattr(candidate, "samples", candidate), dtype=complex)
    if ref.shape != cand.shape:
        raise GridMismatchError(f"shape mismatch: {ref.shape} vs {cand.shape}")
    c = np.vdot(cand, ref) / np.vdot(cand, cand)
    resid = np.max(np.abs(c * cand - ref)) / np.max(np.abs(ref))
    return complex(c), float(resid)
