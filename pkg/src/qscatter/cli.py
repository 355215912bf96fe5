"""Command-line front end: ``qscatter <verb> [flags]``.

Rates and frequencies are given in MHz (``f = omega / 2 pi``), times in ns.
Every output file starts with a comment line carrying the tool version and a
hash of the resolved configuration, and numbers are written with 12
significant digits so identical configurations give identical bytes.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import svg
from .classical import evolve_bloch, first_order_field, series_correction, series_sum
from .comparison import (
    EpsilonConfig,
    epsilon_details,
    harmonic_ratio_curve,
    optimal_curve,
    optimize_omega,
    peak_shift,
    rate_grid_sweep,
)
from .core import (
    DriveSpec,
    QScatterError,
    RateSet,
    TimeGrid,
    angular_to_mhz,
    mhz_to_angular,
)
from .master import solve_cascade, vq_from_master
from .quantum import amplitude_field, quantum_closed_form, solve_amplitudes

VERBS = ("quantum", "classical", "compare", "optimize", "sweep-rates", "optimal-curve")

# experimental device rates and the low-Emitter-rate comparison case
PRESETS = {
    "device": {"gamma_e_mhz": 1.86, "gamma_p_mhz": 1.85, "omega_mhz": [1.02]},
    "fig5": {"gamma_e_mhz": 0.09, "gamma_p_mhz": 1.0, "omega_mhz": [0.3]},
}

REQUIRED = {
    "quantum": ("gamma_e_mhz", "gamma_p_mhz"),
    "classical": ("gamma_e_mhz", "gamma_p_mhz", "omega_mhz"),
    "compare": ("gamma_e_mhz", "gamma_p_mhz", "omega_mhz"),
    "optimize": ("gamma_e_mhz", "gamma_p_mhz"),
    "sweep-rates": ("omega_mhz",),
    "optimal-curve": ("gamma_p_mhz",),
}

# excluded from the echoed configuration and its hash: they do not change results
UNHASHED_FIELDS = ("out", "json", "plot", "config", "workers")


class UsageError(QScatterError):
    category = "usage"

    def __init__(self, message, field_name=None):
        super().__init__(message)
        self.field = field_name


@dataclass
class RunConfig:
    scenario: str
    gamma_e_mhz: float | None = None
    gamma_p_mhz: float | None = None
    gamma2_e_mhz: float | None = None
    gamma2_p_mhz: float | None = None
    detuning_mhz: list = field(default_factory=lambda: [0.0])
    omega_mhz: list | None = None
    tmax_ns: float | None = None
    points: int = 2001
    method: str | None = None
    scattered_only: bool = False
    window_factor: float = 10.0
    denom_floor: float = 1e-3
    gamma_e_range: list = field(default_factory=lambda: [0.1, 3.0, 40])
    gamma_p_range: list = field(default_factory=lambda: [0.1, 3.0, 40])
    spacing: str = "lin"
    ratios: list = field(default_factory=lambda: [0.05, 20.0, 25])
    bracket: list = field(default_factory=lambda: [0.05, 3.0])
    rel_tol: float = 1e-4
    scan_points: int = 0
    workers: int | None = None
    dump_series: int | None = None
    seed: int | None = None
    preset: str | None = None
    config: str | None = None
    out: str | None = None
    json: str | None = None
    plot: str | None = None

    def validate(self):
        for name in REQUIRED[self.scenario]:
            if getattr(self, name) is None:
                raise UsageError(f"missing required field {name} "
                                 f"(--{name.replace('_', '-')})", name)
        for name in ("gamma_e_mhz", "gamma_p_mhz", "gamma2_e_mhz", "gamma2_p_mhz", "tmax_ns"):
            v = getattr(self, name)
            if v is not None and not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise UsageError(f"{name} must be positive, got {v}", name)
        if self.omega_mhz is not None and any(not w >= 0 for w in self.omega_mhz):
            raise UsageError(f"omega_mhz must be non-negative, got {self.omega_mhz}", "omega_mhz")
        if not isinstance(self.points, int) or self.points < 2:
            raise UsageError(f"points must be an integer >= 2, got {self.points}", "points")
        if not self.window_factor > 0:
            raise UsageError("window_factor must be positive", "window_factor")
        if not 0 <= self.denom_floor < 1:
            raise UsageError("denom_floor must lie in [0, 1)", "denom_floor")
        for name in ("gamma_e_range", "gamma_p_range", "ratios"):
            lo, hi, n = getattr(self, name)
            if not (0 < lo <= hi) or int(n) != n or n < 1:
                raise UsageError(f"{name} must be LO,HI,N with 0 < LO <= HI, N >= 1", name)
        if self.spacing not in ("lin", "log"):
            raise UsageError("spacing must be lin or log", "spacing")
        if self.gamma_e_mhz is not None and self.gamma_p_mhz is not None:
            try:
                self.rates()
            except ValueError as exc:
                name = next((f for f in ("gamma2_e_mhz", "gamma2_p_mhz")
                             if f[:-4] in str(exc)), "gamma_e_mhz")
                raise UsageError(str(exc), name)
        self.method = self.method or _default_method(self.scenario)
        _parse_method(self.method, self.scenario)
        for name in ("out", "json", "plot"):
            v = getattr(self, name)
            if v is not None and not v:
                raise UsageError(f"{name} path must be nonempty", name)
        return self

    def rates(self):
        return RateSet.from_mhz(self.gamma_e_mhz, self.gamma_p_mhz,
                                self.gamma2_e_mhz, self.gamma2_p_mhz)

    def eps_config(self):
        return EpsilonConfig(self.window_factor, self.denom_floor)

    def echo(self):
        """Resolved configuration without file paths and worker count."""
        d = dataclasses.asdict(self)
        for k in UNHASHED_FIELDS:
            d.pop(k)
        return d

    def digest(self):
        text = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _default_method(scenario):
    return {"quantum": "closed", "classical": "ode"}.get(scenario, "ode")


def _parse_method(method, scenario):
    allowed = {
        "quantum": ("closed", "ode", "master"),
        "classical": ("ode", "series", "first-order"),
    }.get(scenario, ("ode",))
    name, _, arg = method.partition(":")
    if name not in allowed:
        raise UsageError(f"method {method!r} not available for {scenario}; "
                         f"choose from {', '.join(allowed)}", "method")
    if name == "series":
        if not arg.isdigit() or int(arg) < 1:
            raise UsageError("series method needs an order, e.g. series:3", "method")
        return name, int(arg)
    if arg:
        raise UsageError(f"method {name} takes no argument", "method")
    return name, None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _range(text):
    vals = _floats(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected LO,HI,N, got {text!r}")
    return [vals[0], vals[1], int(vals[2])]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    a = common.add_argument
    a("--gamma-e-mhz", type=float, default=S, help="Emitter radiative rate")
    a("--gamma-p-mhz", type=float, default=S, help="Probe radiative rate")
    a("--gamma2-e-mhz", type=float, default=S, help="Emitter dephasing rate (default gamma/2)")
    a("--gamma2-p-mhz", type=float, default=S, help="Probe dephasing rate (default gamma/2)")
    a("--detuning-mhz", type=_floats, default=S, help="detuning, or a comma-separated list")
    a("--omega-mhz", type=_floats, default=S, help="classical Rabi amplitude(s)")
    a("--tmax-ns", type=float, default=S, help="time window (default window_factor/min rate)")
    a("--points", type=int, default=S)
    a("--method", default=S, help="closed | ode | master | series:N | first-order")
    a("--scattered-only", action="store_true", default=S)
    a("--window-factor", type=float, default=S)
    a("--denom-floor", type=float, default=S)
    a("--gamma-e-range", type=_range, default=S, metavar="LO,HI,N")
    a("--gamma-p-range", type=_range, default=S, metavar="LO,HI,N")
    a("--spacing", choices=("lin", "log"), default=S)
    a("--ratios", type=_range, default=S, metavar="LO,HI,N", help="log-spaced ratio grid")
    a("--bracket", type=_floats, default=S, help="search bracket relative to sqrt(gamma_e gamma_p)")
    a("--rel-tol", type=float, default=S)
    a("--scan-points", type=int, default=S, help="brute-force cross-check points per optimum")
    a("--workers", type=int, default=S)
    a("--dump-series", type=int, default=S, metavar="N")
    a("--seed", type=int, default=S, help="accepted for compatibility; unused")
    a("--preset", choices=sorted(PRESETS), default=S)
    a("--config", default=S, help="JSON file with field values")
    a("--out", default=S, help="CSV output path")
    a("--json", default=S, help="JSON summary path")
    a("--plot", default=S, help="SVG plot path")

    parser = _Parser(prog="qscatter", description="Classical versus single-photon scattering.")
    parser.add_argument("--version", action="version", version=f"qscatter {__version__}")
    sub = parser.add_subparsers(dest="scenario", required=True, parser_class=_Parser)
    for verb in VERBS:
        sub.add_parser(verb, parents=[common])
    return parser


def parse_config(argv):
    """Resolve preset, then config file, then flags into a validated RunConfig."""
    ns = vars(build_parser().parse_args(argv))
    values = {}
    preset = ns.get("preset")
    if preset:
        values.update(PRESETS[preset])
    if ns.get("config"):
        try:
            with open(ns["config"]) as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}", "config")
        known = {f.name for f in dataclasses.fields(RunConfig)}
        for k in from_file:
            if k not in known:
                raise UsageError(f"unknown field {k!r} in config file", k)
        values.update(from_file)
    values.update(ns)
    for k in ("omega_mhz", "detuning_mhz"):
        if k in values and not isinstance(values[k], list):
            values[k] = [values[k]]
    return RunConfig(**values).validate()


# output helpers

def _g(v):
    return format(float(v), ".12g")


def _round(v):
    if isinstance(v, float):
        return float(_g(v)) if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _round(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_round(x) for x in v]
    return v


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qscatter-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(cfg, extra=()):
    lines = [f"# qscatter {__version__} config-sha256={cfg.digest()}"]
    lines += [f"# {e}" for e in extra]
    return lines


def envelope_csv(cfg, grid, labelled):
    """``labelled`` is a list of ``(label, ComplexEnvelope)``."""
    labels = ",".join(lab for lab, _ in labelled)
    cols = ["t_ns"]
    for k in range(len(labelled)):
        cols += ["re", "im"] if k == 0 else [f"re_{k + 1}", f"im_{k + 1}"]
    lines = _header(cfg, [f"series: {labels}", "t in ns, fields in sqrt(rad/us)"])
    lines.append(",".join(cols))
    t_ns = grid.values * 1e3
    data = [env.samples for _, env in labelled]
    for i, t in enumerate(t_ns):
        row = [_g(t)]
        for s in data:
            row += [_g(s[i].real), _g(s[i].imag)]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _summary(cfg, omega_star=None, eps=None, eps_norm=None, **extra):
    out = {
        "omega_star_mhz": None if omega_star is None else angular_to_mhz(omega_star),
        "epsilon": eps,
        "epsilon_normalized": eps_norm,
        "window_factor": cfg.window_factor,
        "denom_floor": cfg.denom_floor,
        "config": cfg.echo(),
        "config_sha256": cfg.digest(),
        "version": __version__,
    }
    out.update(extra)
    return json.dumps(_round(out), sort_keys=True, indent=2) + "\n"


def _grid(cfg, rates):
    if cfg.tmax_ns is not None:
        return TimeGrid(cfg.tmax_ns / 1e3, cfg.points)
    return cfg.eps_config().grid(rates, cfg.points)


def _emit(cfg, csv_text=None, summary=None, plot=None):
    if cfg.out and csv_text is not None:
        _write_atomic(cfg.out, csv_text)
    if cfg.json and summary is not None:
        _write_atomic(cfg.json, summary)
    if cfg.plot and plot is not None:
        _write_atomic(cfg.plot, plot())
    if not cfg.out and csv_text is not None and not cfg.json:
        sys.stdout.write(csv_text)


def _envelope_plot(grid, labelled, title):
    t_ns = grid.values * 1e3
    return lambda: svg.line_chart([(lab, t_ns, env.real) for lab, env in labelled],
                                  "t (ns)", "Re V", title)


def _dump_series(cfg, rates):
    n = cfg.dump_series
    if not n:
        return
    records = [{"order": k,
                "sigma_y": series_correction(k, rates).sigma_y.to_records(),
                "sigma_z": series_correction(k, rates).sigma_z.to_records()}
               for k in range(1, n + 1)]
    sys.stdout.write(json.dumps(records, sort_keys=True, indent=1) + "\n")


def _resonant_only(cfg, what):
    if any(d != 0 for d in cfg.detuning_mhz):
        raise UsageError(f"{what} requires zero detuning", "detuning_mhz")


# verbs

def run_quantum(cfg):
    rates = cfg.rates()
    grid = _grid(cfg, rates)
    method, _ = _parse_method(cfg.method, "quantum")
    labelled = []
    for f in cfg.detuning_mhz:
        delta = mhz_to_angular(f)
        if method == "closed":
            env = quantum_closed_form(rates, DriveSpec(detuning=delta), grid, cfg.scattered_only)
        elif method == "ode":
            env = amplitude_field(solve_amplitudes(rates, delta, grid), rates, delta,
                                  scattered_only=cfg.scattered_only)
        else:
            env = vq_from_master(solve_cascade(rates, delta, grid), rates,
                                 scattered_only=cfg.scattered_only)
        labelled.append((f"quantum-{method} detuning_mhz={_g(f)}", env))
    _emit(cfg, envelope_csv(cfg, grid, labelled), _summary(cfg),
          _envelope_plot(grid, labelled, "single-photon field"))
    return 0


def _classical_envelope(cfg, rates, grid, omega, delta):
    method, order = _parse_method(cfg.method, "classical")
    drive = DriveSpec(omega0=omega, detuning=delta)
    if method == "ode":
        return evolve_bloch(rates, drive, grid).field
    _resonant_only(cfg, f"method {cfg.method}")
    if method == "series":
        return series_sum(order, rates, drive, grid)
    return first_order_field(rates, drive, grid)


def run_classical(cfg):
    rates = cfg.rates()
    grid = _grid(cfg, rates)
    _dump_series(cfg, rates)
    labelled = []
    for w in cfg.omega_mhz:
        for f in cfg.detuning_mhz:
            env = _classical_envelope(cfg, rates, grid, mhz_to_angular(w), mhz_to_angular(f))
            labelled.append((f"classical-{cfg.method} omega_mhz={_g(w)} detuning_mhz={_g(f)}", env))
    _emit(cfg, envelope_csv(cfg, grid, labelled), _summary(cfg),
          _envelope_plot(grid, labelled, "classical scattered field"))
    return 0


def run_compare(cfg):
    _resonant_only(cfg, "compare")
    rates = cfg.rates()
    grid = _grid(cfg, rates)
    _dump_series(cfg, rates)
    om = mhz_to_angular(cfg.omega_mhz[0])
    drive = DriveSpec(omega0=om)
    v_q = quantum_closed_form(rates, DriveSpec(), grid, scattered_only=True)
    v_cl = evolve_bloch(rates, drive, grid).field
    labelled = [("quantum", v_q), ("classical-ode", v_cl),
                ("series-N1", series_sum(1, rates, drive, grid)),
                ("series-N3", series_sum(3, rates, drive, grid))]
    ecfg = cfg.eps_config()
    window = ecfg.window(rates)
    if window <= grid.t_max * (1 + 1e-12):
        det = epsilon_details(v_cl, v_q, ecfg, window)
        eps, extra = det.epsilon, {"ill_conditioned": det.ill_conditioned}
    else:
        eps, extra = None, {"note": "time window shorter than the epsilon window"}
    summary = _summary(cfg, eps=eps, peak_shift_ns=peak_shift(v_cl, v_q) * 1e3, **extra)
    _emit(cfg, envelope_csv(cfg, grid, labelled), summary,
          _envelope_plot(grid, labelled, "classical vs single-photon scattered field"))
    return 0


def run_optimize(cfg):
    rates = cfg.rates()
    s = rates.omega_star
    lo, hi = cfg.bracket
    res = optimize_omega(rates, cfg.eps_config(), (lo * s, hi * s), cfg.rel_tol * s, cfg.points)
    v_cl, v_q = res.curves
    labelled = [("quantum", v_q), ("classical-ode at omega_star", v_cl)]
    summary = _summary(cfg, res.omega_star, res.epsilon, res.epsilon_normalized,
                       omega_star_over_sqrt_rates=res.omega_star / s,
                       evaluations=res.evaluations)
    _emit(cfg, envelope_csv(cfg, v_q.grid, labelled), summary,
          _envelope_plot(v_q.grid, labelled, "optimal classical amplitude"))
    return 0


def _axis(spec, spacing):
    lo, hi, n = spec
    return np.geomspace(lo, hi, n) if spacing == "log" else np.linspace(lo, hi, n)


def run_sweep_rates(cfg):
    ge = _axis(cfg.gamma_e_range, cfg.spacing)
    gp = _axis(cfg.gamma_p_range, cfg.spacing)
    om = mhz_to_angular(cfg.omega_mhz[0])
    sweep = rate_grid_sweep(mhz_to_angular(ge), mhz_to_angular(gp), om, cfg.eps_config(),
                            cfg.points, cfg.workers)
    norm = sweep.epsilon_normalized
    lines = _header(cfg, [f"omega_mhz={_g(cfg.omega_mhz[0])} eps_max={_g(sweep.epsilon.max())}"])
    lines.append("gamma_e_mhz,gamma_p_mhz,eps_norm")
    for i, a in enumerate(ge):
        for j, b in enumerate(gp):
            lines.append(f"{_g(a)},{_g(b)},{_g(norm[i, j])}")
    i, j = np.unravel_index(np.argmax(sweep.epsilon), sweep.epsilon.shape)
    summary = _summary(cfg, eps=float(sweep.epsilon.max()), eps_norm=1.0,
                       argmax_gamma_e_mhz=float(ge[i]), argmax_gamma_p_mhz=float(gp[j]))

    def plot():
        he, hp = sweep.harmonic_locus()
        de, dp = sweep.diagonal()
        return svg.heatmap(gp, ge, norm, "gamma_p (MHz)", "gamma_e (MHz)", "normalized epsilon",
                           overlays=[("harmonic", angular_to_mhz(hp), angular_to_mhz(he)),
                                     ("diagonal", angular_to_mhz(dp), angular_to_mhz(de))])

    _emit(cfg, "\n".join(lines) + "\n", summary, plot)
    return 0


def run_optimal_curve(cfg):
    lo, hi, n = cfg.ratios
    ratios = np.geomspace(lo, hi, n)
    points = optimal_curve(ratios, mhz_to_angular(cfg.gamma_p_mhz), cfg.eps_config(),
                           tuple(cfg.bracket), cfg.rel_tol, cfg.points, cfg.scan_points,
                           cfg.workers)
    lines = _header(cfg, [f"gamma_p_mhz={_g(cfg.gamma_p_mhz)}",
                          "harmonic comparison curve: 2 r / (r + 1)"])
    lines.append("ratio,omega_star_over_gamma_p,eps_min_norm,converged")
    for p in points:
        lines.append(f"{_g(p.ratio)},{_g(p.omega_star_over_gamma_p)},"
                     f"{_g(p.epsilon_min_normalized)},{int(p.converged)}")
    failed = [p.ratio for p in points if not p.converged]
    summary = _summary(cfg, failed_ratios=failed)

    def plot():
        r = [p.ratio for p in points]
        return svg.line_chart(
            [("omega_star / gamma_p", r, [p.omega_star_over_gamma_p for p in points]),
             ("eps_min (normalized)", r, [p.epsilon_min_normalized for p in points]),
             ("2r/(r+1)", r, harmonic_ratio_curve(r))],
            "gamma_e / gamma_p", "", "optimal classical amplitude", logx=True)

    _emit(cfg, "\n".join(lines) + "\n", summary, plot)
    return 0


RUNNERS = {
    "quantum": run_quantum,
    "classical": run_classical,
    "compare": run_compare,
    "optimize": run_optimize,
    "sweep-rates": run_sweep_rates,
    "optimal-curve": run_optimal_curve,
}


def run(cfg):
    return RUNNERS[cfg.scenario](cfg)


def _fail(category, message, code, field_name=None):
    payload = {"category": category, "message": message}
    if field_name:
        payload["field"] = field_name
    sys.stderr.write(f"qscatter: {category}: {message}\n")
    sys.stderr.write("error: " + json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), 2, exc.field)
    except ValueError as exc:
        return _fail("usage", str(exc), 2)
    try:
        return run(cfg)
    except UsageError as exc:
        return _fail("usage", str(exc), 2, exc.field)
    except QScatterError as exc:
        return _fail(exc.category, str(exc), 1)
    except (ValueError, OSError) as exc:
        return _fail("invalid-input" if isinstance(exc, ValueError) else "io", str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
