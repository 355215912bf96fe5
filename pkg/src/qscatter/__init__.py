"""Classical versus single-photon driving of a two-level Probe.

Two routes model the field scattered by the Probe: a coherent exponentially
decaying pulse (Bloch equations, perturbation series) and the
vacuum/one-photon superposition radiated by an Emitter (closed form,
amplitude equations, cascaded master equation). The :mod:`comparison`
module measures how far apart they are and finds the best classical
amplitude.
"""
__version__ = "0.1.0"

from .core import (
    ComplexEnvelope,
    DegenerateParameterError,
    DriveSpec,
    GridMismatchError,
    IntegrationDriftError,
    OptimizationError,
    QScatterError,
    RateSet,
    ResolutionError,
    StiffnessError,
    TimeGrid,
    angular_to_mhz,
    envelope_subtract,
    fit_complex_scale,
    mhz_to_angular,
    quadratures,
)
from .exp_poly import ExpPoly
from .quantum import (
    amplitude_field,
    detuning_sweep,
    emitter_envelope,
    quantum_closed_form,
    solve_amplitudes,
)
from .master import DensityMatrix4, build_cascade, evolve_rho, solve_cascade, vq_from_master
from .classical import (
    BlochState,
    evolve_bloch,
    first_order_field,
    second_order_ode_residual,
    series_correction,
    series_sum,
    third_order_field,
)
from .comparison import (
    ComparisonResult,
    EpsilonConfig,
    MetricWarning,
    epsilon,
    optimal_curve,
    optimize_omega,
    rate_grid_sweep,
)
