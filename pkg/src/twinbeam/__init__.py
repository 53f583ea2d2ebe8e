"""Conditional preparation of nonclassical light and its tomographic
verification.

A two-mode squeezed vacuum is heralded by an on/off detector (with
efficiency and optional dark counts) on one beam, leaving the other in a
vacuum-free pseudo-thermal state whose s-ordered Wigner values at the
phase-space origin are negative.  The package provides the analytic
model, Monte Carlo homodyne sampling, and pattern-function estimation of
W_s(0), plus a CLI that sweeps parameters and renders figures.
"""

__version__ = "0.1.0"

from .detection import (
    ClickOutcome,
    DarkModel,
    OnOffPovm,
    ZeroClickProbabilityError,
    click_probability,
    conditional_state,
    dark_model_first_order_gap,
    p1_ideal,
    p1_poisson_dark,
    p1_thermal_dark,
    povm_from_mixture,
    povm_ideal,
    povm_poisson_dark,
    povm_thermal_dark,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    SweepSpec,
    config_from_mapping,
    config_from_yaml,
    quadrature_identity_error,
    run_point,
    run_sweep,
    selfcheck,
)
from .fockstate import (
    CutoffTooSmallError,
    FockDiagonalState,
    GainParams,
    geometric_cutoff,
    loss_channel,
    number_state,
    phase_averaged_coherent,
    thermal_state,
    twin_beam_reduced,
)
from .homodyne import (
    HomodyneDataset,
    click_simulation,
    quadrature_pdf,
    sample,
)
from .specfun import hermite_function, kummer_1_half, laguerre
from .tomography import (
    KernelEstimate,
    UnboundedKernelError,
    estimate_ws0,
    kernel,
    max_reconstructible_s,
)
from .wigner import (
    CLASSICAL_AT_ORIGIN,
    WsOperatorDiag,
    nonclassicality_index,
    w0_ideal,
    ws0_dark,
    ws0_dark_closed,
    ws0_ideal,
    ws_operator,
    ws_origin_trace,
)

__all__ = [
    "__version__",
    "CLASSICAL_AT_ORIGIN",
    "ClickOutcome",
    "ConfigError",
    "CutoffTooSmallError",
    "DarkModel",
    "ExperimentConfig",
    "FockDiagonalState",
    "GainParams",
    "HomodyneDataset",
    "KernelEstimate",
    "OnOffPovm",
    "SweepSpec",
    "UnboundedKernelError",
    "WsOperatorDiag",
    "ZeroClickProbabilityError",
    "click_probability",
    "click_simulation",
    "conditional_state",
    "config_from_mapping",
    "config_from_yaml",
    "dark_model_first_order_gap",
    "estimate_ws0",
    "geometric_cutoff",
    "hermite_function",
    "kernel",
    "kummer_1_half",
    "laguerre",
    "loss_channel",
    "max_reconstructible_s",
    "nonclassicality_index",
    "number_state",
    "p1_ideal",
    "p1_poisson_dark",
    "p1_thermal_dark",
    "phase_averaged_coherent",
    "povm_from_mixture",
    "povm_ideal",
    "povm_poisson_dark",
    "povm_thermal_dark",
    "quadrature_identity_error",
    "quadrature_pdf",
    "run_point",
    "run_sweep",
    "sample",
    "selfcheck",
    "thermal_state",
    "twin_beam_reduced",
    "w0_ideal",
    "ws0_dark",
    "ws0_dark_closed",
    "ws0_ideal",
    "ws_operator",
    "ws_origin_trace",
]
