"""Distance between classical and single-photon scattered fields.

The integral distance is

    eps = sqrt( int_0^T (V_cl - V_q)**2 / (V_cl + V_q)**2 dt )

taken on the real resonant envelopes. As ``t -> infinity`` both fields decay
with the same leading exponential but generally different prefactors, so
the integrand tends to a positive constant and the improper integral
diverges. It is therefore cut at ``T = window_factor / min(gamma_e, gamma_p)``
and the denominator is clamped from below at ``denom_floor`` times its peak.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .classical import evolve_bloch, resonant_bloch_batch
from .core import (
    ComplexEnvelope,
    DriveSpec,
    GridMismatchError,
    OptimizationError,
    RateSet,
    TimeGrid,
)
from .quantum import quantum_closed_form, scattered_closed_form

GOLDEN = (math.sqrt(5) - 1) / 2
DEFAULT_POINTS = 2001


class MetricWarning(UserWarning):
    """The clamped denominator dominates the distance integral."""


@dataclass(frozen=True)
class EpsilonConfig:
    window_factor: float = 10.0
    denom_floor: float = 1e-3

    def __post_init__(self):
        if not self.window_factor > 0:
            raise ValueError(f"window_factor must be positive, got {self.window_factor}")
        if not 0 <= self.denom_floor < 1:
            raise ValueError(f"denom_floor must lie in [0, 1), got {self.denom_floor}")

    def window(self, rates):
        return self.window_factor / min(rates.gamma_e, rates.gamma_p)

    def grid(self, rates, n_points=DEFAULT_POINTS):
        return TimeGrid(self.window(rates), n_points)


@dataclass(frozen=True)
class EpsilonDetails:
    epsilon: float
    clamped_fraction: float
    ill_conditioned: bool


@dataclass
class ComparisonResult:
    epsilon: float
    epsilon_normalized: float
    omega_star: float
    curves: tuple | None = None
    converged: bool = True
    evaluations: int = 0
    profile: list = field(default_factory=list)


def epsilon_details(v_cl, v_q, cfg=None, t_window=None):
    cfg = cfg or EpsilonConfig()
    if v_cl.grid != v_q.grid:
        raise GridMismatchError(f"grid mismatch: {v_cl.grid} vs {v_q.grid}")
    t = v_cl.grid.values
    a, b = v_cl.samples.real, v_q.samples.real
    if t_window is not None:
        if t_window > v_cl.grid.t_max * (1 + 1e-12):
            raise ValueError(f"grid ends at {v_cl.grid.t_max}, window needs {t_window}")
        keep = t <= t_window * (1 + 1e-12)
        t, a, b = t[keep], a[keep], b[keep]
    s, d = np.abs(a + b), a - b
    peak = s.max()
    if peak == 0:
        return EpsilonDetails(0.0 if not np.any(d) else math.inf, 0.0, False)
    floor = cfg.denom_floor * peak
    clamped = s < floor
    with np.errstate(invalid="ignore", divide="ignore"):
        f = d**2 / np.maximum(s, floor) ** 2
    if (clamped[0] or s[0] == 0) and len(f) > 2:
        # both fields vanish at t = 0; take the limit from the next samples
        f[0] = max(2 * f[1] - f[2], 0.0)
        clamped[0] = False
    frac = float(clamped.mean())
    ill = frac > 0.1
    if ill:
        warnings.warn(f"denominator clamped on {frac:.0%} of samples", MetricWarning,
                      stacklevel=3)
    return EpsilonDetails(float(math.sqrt(trapezoid(f, t))), frac, ill)


def epsilon(v_cl, v_q, cfg=None, t_window=None):
    """Integral distance between two envelopes on ``[0, t_window]``.

    The whole grid is used when ``t_window`` is omitted.
    """
    return epsilon_details(v_cl, v_q, cfg, t_window).epsilon


def peak_shift(v_cl, v_q):
    """``t_peak(V_q) - t_peak(V_cl)`` from the maxima of ``|V|``."""
    t = v_cl.grid.values
    return float(t[np.argmax(np.abs(v_q.samples))] - t[np.argmax(np.abs(v_cl.samples))])


def resonant_pair(rates, omega0, cfg=None, n_points=DEFAULT_POINTS):
    """Scattered-only classical (Bloch) and quantum envelopes on ``[0, T]``."""
    cfg = cfg or EpsilonConfig()
    grid = cfg.grid(rates, n_points)
    v_cl = evolve_bloch(rates, DriveSpec(omega0=omega0), grid).field
    v_q = quantum_closed_form(rates, DriveSpec(), grid, scattered_only=True)
    return v_cl, v_q


def epsilon_at(rates, omega0, cfg=None, n_points=DEFAULT_POINTS):
    v_cl, v_q = resonant_pair(rates, omega0, cfg, n_points)
    return epsilon(v_cl, v_q, cfg)


def scan_epsilon(rates, omegas, cfg=None, n_points=DEFAULT_POINTS):
    """epsilon for every amplitude in ``omegas`` from one batched integration.

    Used as a brute-force reference for :func:`optimize_omega`.
    """
    cfg = cfg or EpsilonConfig()
    omegas = np.asarray(omegas, dtype=float)
    grid = cfg.grid(rates, n_points)
    y, _ = resonant_bloch_batch(rates.gamma_e, rates.gamma_p, omegas, grid.t_max, n_points,
                                gamma2_e=rates.gamma2_e, gamma2_p=rates.gamma2_p)
    v_q = ComplexEnvelope(grid, scattered_closed_form(rates, 0.0, grid.values))
    pref = -math.sqrt(rates.gamma_p / 2) / 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MetricWarning)
        return np.array([epsilon(ComplexEnvelope(grid, pref * row), v_q, cfg) for row in y])


def _golden_section(f, lo, hi, tol, profile):
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    profile += [(x1, f1), (x2, f2)]
    while hi - lo >= tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
            profile.append((x1, f1))
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
            profile.append((x2, f2))
    return (lo + hi) / 2


def golden_minimize(f, bracket, tol, max_expansions=3):
    """Golden-section minimization of a unimodal scalar function.

    The bracket is first checked to contain a minimum (midpoint below both
    ends); otherwise its width is doubled about the midpoint, keeping the
    lower end positive, up to ``max_expansions`` times. Returns
    ``(x_min, f(x_min), profile)``.
    """
    lo, hi = map(float, bracket)
    if not 0 <= lo < hi:
        raise ValueError(f"invalid bracket {bracket}")
    profile = []

    def ev(x):
        v = float(f(x))
        profile.append((x, v))
        return v

    for attempt in range(max_expansions + 1):
        mid = (lo + hi) / 2
        f_lo, f_mid, f_hi = ev(lo), ev(mid), ev(hi)
        if f_mid < f_lo and f_mid < f_hi:
            break
        if attempt == max_expansions:
            raise OptimizationError(
                f"no interior minimum found on [{lo:.6g}, {hi:.6g}] after expansion",
                profile)
        width = hi - lo
        lo, hi = max(mid - width, lo / 2), mid + width
    x = _golden_section(lambda v: float(f(v)), lo, hi, tol, profile)
    fx = ev(x)
    return x, fx, profile


def optimize_omega(rates, cfg=None, bracket=None, tol=None, n_points=DEFAULT_POINTS,
                   objective=None):
    """Classical amplitude minimizing epsilon against the single-photon field.

    ``bracket`` defaults to ``(0.05, 3) * sqrt(gamma_e gamma_p)`` and ``tol``
    to ``1e-4 * sqrt(gamma_e gamma_p)``. Every evaluation integrates the Bloch
    equations afresh. ``objective`` replaces the epsilon evaluation (used to
    test the search itself). ``epsilon_normalized`` is relative to the
    largest epsilon seen during the search.
    """
    cfg = cfg or EpsilonConfig()
    s = rates.omega_star
    bracket = bracket or (0.05 * s, 3.0 * s)
    tol = tol or 1e-4 * s
    synthetic = objective is not None
    if not synthetic:
        def objective(om):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", MetricWarning)
                return epsilon_at(rates, om, cfg, n_points)
    x, fx, profile = golden_minimize(objective, bracket, tol)
    emax = max(v for _, v in profile)
    curves = None if synthetic else resonant_pair(rates, x, cfg, n_points)
    return ComparisonResult(
        epsilon=fx,
        epsilon_normalized=fx / emax if emax > 0 else 0.0,
        omega_star=x,
        curves=curves,
        evaluations=len(profile),
        profile=profile,
    )


def _workers(workers=None):
    cap = os.environ.get("QSCATTER_THREADS")
    if workers is None:
        workers = int(cap) if cap else 1
    elif cap:
        workers = min(workers, int(cap))
    return max(1, int(workers))


def _pmap(fn, items, workers):
    items = list(items)
    n = _workers(workers)
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass
class RateSweep:
    gamma_e: np.ndarray
    gamma_p: np.ndarray
    epsilon: np.ndarray  # [i_e, j_p]
    omega0: float
    window_factor: float
    denom_floor: float

    @property
    def epsilon_normalized(self):
        return self.epsilon / self.epsilon.max()

    def harmonic_locus(self):
        """Points with ``gamma_e gamma_p / (gamma_e + gamma_p) = omega0``."""
        gp = self.gamma_p[self.gamma_p > self.omega0]
        return self.omega0 * gp / (gp - self.omega0), gp

    def diagonal(self):
        lo = max(self.gamma_e.min(), self.gamma_p.min())
        hi = min(self.gamma_e.max(), self.gamma_p.max())
        return np.array([lo, hi]), np.array([lo, hi])


def _sweep_row(args):
    ge, gps, omega0, cfg, n_points = args
    gps = np.asarray(gps, dtype=float)
    t_max = cfg.window_factor / np.minimum(ge, gps)
    y, _ = resonant_bloch_batch(ge, gps, omega0, t_max, n_points)
    row = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MetricWarning)
        for k, gp in enumerate(gps):
            rates = RateSet(ge, gp)
            grid = TimeGrid(t_max[k], n_points)
            v_cl = ComplexEnvelope(grid, -math.sqrt(gp / 2) * y[k] / 2)
            v_q = ComplexEnvelope(grid, scattered_closed_form(rates, 0.0, grid.values))
            row.append(epsilon(v_cl, v_q, cfg))
    return row


def rate_grid_sweep(gamma_e_values, gamma_p_values, omega0, cfg=None,
                    n_points=DEFAULT_POINTS, workers=None):
    """epsilon over a grid of radiative rates at fixed classical amplitude.

    Each row (one Emitter rate) is integrated as one batch; rows are
    independent and may run in separate processes.
    """
    cfg = cfg or EpsilonConfig()
    ge = np.asarray(gamma_e_values, dtype=float)
    gp = np.asarray(gamma_p_values, dtype=float)
    if np.any(ge <= 0) or np.any(gp <= 0):
        raise ValueError("rate ranges must be positive")
    rows = _pmap(_sweep_row, [(g, gp, omega0, cfg, n_points) for g in ge], workers)
    return RateSweep(ge, gp, np.array(rows), omega0, cfg.window_factor, cfg.denom_floor)


@dataclass
class CurvePoint:
    ratio: float
    omega_star_over_gamma_p: float
    epsilon_min: float
    epsilon_min_normalized: float = float("nan")
    converged: bool = True
    scan_omega_star_over_gamma_p: float = float("nan")
    message: str = ""


def _curve_point(args):
    ratio, gamma_p, cfg, rel_bracket, rel_tol, n_points, scan_points = args
    rates = RateSet(ratio * gamma_p, gamma_p)
    s = rates.omega_star
    try:
        res = optimize_omega(rates, cfg, (rel_bracket[0] * s, rel_bracket[1] * s),
                             rel_tol * s, n_points)
    except OptimizationError as exc:
        return CurvePoint(ratio, float("nan"), float("nan"), converged=False, message=str(exc))
    point = CurvePoint(ratio, res.omega_star / gamma_p, res.epsilon)
    if scan_points:
        omegas = np.linspace(rel_bracket[0] * s, rel_bracket[1] * s, scan_points)
        best = omegas[int(np.argmin(scan_epsilon(rates, omegas, cfg, n_points)))]
        point.scan_omega_star_over_gamma_p = best / gamma_p
        if abs(best - res.omega_star) > 0.02 * res.omega_star:
            point.converged = False
            point.message = f"grid scan minimum {best:.6g} disagrees with {res.omega_star:.6g}"
    return point


def harmonic_ratio_curve(ratios):
    """Harmonic mean of the two rates over ``gamma_p``: ``2 r / (r + 1)``."""
    r = np.asarray(ratios, dtype=float)
    return 2 * r / (r + 1)


def optimal_curve(ratios, gamma_p, cfg=None, bracket=(0.05, 3.0), tol=1e-4,
                  n_points=DEFAULT_POINTS, scan_points=0, workers=None):
    """Optimal classical amplitude and minimal epsilon versus ``gamma_e / gamma_p``.

    ``bracket`` and ``tol`` are relative to ``sqrt(gamma_e gamma_p)``. With
    ``scan_points`` a brute-force scan cross-checks every optimum; points that
    fail either the search or the cross-check are flagged, not dropped.
    """
    cfg = cfg or EpsilonConfig()
    ratios = [float(r) for r in ratios]
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    args = [(r, gamma_p, cfg, bracket, tol, n_points, scan_points) for r in ratios]
    points = _pmap(_curve_point, args, workers)
    finite = [p.epsilon_min for p in points if math.isfinite(p.epsilon_min)]
    emax = max(finite) if finite else float("nan")
    for p in points:
        p.epsilon_min_normalized = p.epsilon_min / emax
    return points
