"""Numerics for chordal Loewner flows driven by Brownian motion.

The package splits into five layers: exponent algebra (`exponents`),
driving functions (`driving`), the slit-map Loewner engine (`loewner`),
the radial diffusion surrogate (`diffusion`), and Monte Carlo
estimators tying them together (`estimators`).  The `sle-lab` console
script runs the canned experiments.
"""

__version__ = "0.1.0"

from .errors import (
    BadGrid,
    BadTime,
    BadYmin,
    ConfigInvalid,
    ExponentRegime,
    HorizonExceeded,
    NonInteriorPoint,
    NonPositiveKappa,
    SleLabError,
    SupercriticalR,
    TooFewPoints,
    ValidationError,
    WrongMeasure,
)
from .exponents import (
    CriticalExponents,
    ExponentSet,
    alpha_curve,
    alpha_star_closed_form,
    beta_plus_closed_form,
    derive_exponents,
    r_critical,
    solve_critical,
)
from .driving import (
    DrivingPath,
    SubpowerEnvelope,
    WeakHolderCheck,
    check_weak_holder,
    deterministic_driver,
    load_driver,
    sample_brownian,
    save_driver,
)
from .loewner import (
    FlowSample,
    FlowTrajectory,
    HullStats,
    Swallowed,
    Trace,
    forward_map,
    hull_stats,
    reverse_flow,
    reversed_driver,
    trace,
    v_integral,
)
from .diffusion import (
    DiffusionPath,
    SigmaTail,
    SurrogateSamples,
    beta_from_density,
    invariant_density,
    martingale_N,
    martingale_terminal,
    max_abs_J,
    sigma_tail,
    simulate_J,
    surrogate_derivative,
    surrogate_terminal,
    terminal_J,
)
from .estimators import (
    HolderEstimate,
    MomentEstimate,
    TypicalExponentEstimate,
    YnStatistic,
    calibrate_envelope,
    check_event_E,
    estimate_holder,
    estimate_moment,
    estimate_typical_exponent,
    flow_derivative_samples,
    y_n_statistic,
    yn_correlation_table,
)

__all__ = [name for name in dir() if not name.startswith("_")]
