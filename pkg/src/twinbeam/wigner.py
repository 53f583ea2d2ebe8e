"""s-ordered quasiprobability values at the phase-space origin.

For a number-diagonal state the s-ordered Wigner value at the origin is a
weighted sum over the photon distribution,

    W_s(0) = (2 / pi) (1 - s)^-1 sum_n weights[n] ((s+1)/(s-1))^n ,

which is the ground truth every closed form here is checked against.
Negativity of W_s(0) for s in (-1, 0] certifies nonclassicality; the
index s* locates the boundary of the negative region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .detection import povm_ideal, povm_poisson_dark, conditional_state
from .fockstate import (
    FockDiagonalState,
    GainParams,
    geometric_cutoff,
    twin_beam_reduced,
)

# Bisection result meaning "W_s(0) >= 0 everywhere in [-1, 0]": the state
# shows no negativity at the origin, so the boundary sits at s = 0.
CLASSICAL_AT_ORIGIN = 0.0

_SSTAR_SCAN_POINTS = 41
# Terms of the trace series scale like (xi^2 |ratio|)^n with
# |ratio| = (1+s)/(1-s); beyond this effective ratio the series diverges
# or converges too slowly for a truncated sum to be meaningful.
_WS_SERIES_LIMIT = 0.98


def _check_order(s: float) -> None:
    if not -1.0 <= s < 1.0:
        raise ValueError(f"ordering parameter must lie in [-1, 1), got {s}")


@dataclass(frozen=True, eq=False)
class WsOperatorDiag:
    """Fock diagonal of the operator whose expectation is W_s(0).

    diag[n] = (2/pi) (1-s)^-1 ((s+1)/(s-1))^n.  The ratio is negative
    for every s in (-1, 1) and has modulus below one exactly when s < 0,
    where the diagonal decreases geometrically.
    """

    s: float
    cutoff: int
    diag: np.ndarray


def ws_operator(s: float, cutoff: int) -> WsOperatorDiag:
    _check_order(s)
    ratio = (s + 1.0) / (s - 1.0)
    diag = (2.0 / (math.pi * (1.0 - s))) * ratio ** np.arange(cutoff + 1)
    diag.setflags(write=False)
    return WsOperatorDiag(s=s, cutoff=cutoff, diag=diag)


def ws_origin_trace(state: FockDiagonalState, s: float) -> float:
    """W_s(0) as the truncated trace sum; the module's ground-truth oracle."""
    op = ws_operator(s, state.cutoff)
    return float(np.dot(state.weights, op.diag))


def w0_ideal(lam: float, eta_a: float) -> float:
    """Wigner value at the origin of the heralded state, no dark counts.

    Always negative:
    -(2/pi) (1-xi^2)/(1+xi^2) * (1 - xi^2(1-eta)) / (1 + xi^2(1-eta)).
    """
    if lam <= 0.0:
        raise ValueError("conditional state undefined at zero gain")
    xi_sq = math.tanh(lam) ** 2
    q = xi_sq * (1.0 - eta_a)
    return -(2.0 / math.pi) * (1.0 - xi_sq) / (1.0 + xi_sq) * (1.0 - q) / (1.0 + q)


def ws0_ideal(lam: float, eta_a: float, s: float) -> float:
    """Closed-form W_s(0) of the heralded state, no dark counts.

    Strictly negative for every gain, efficiency and s in (-1, 0]:
    the heralded state carries no vacuum component.
    """
    if lam <= 0.0:
        raise ValueError("conditional state undefined at zero gain")
    _check_order(s)
    xi_sq = math.tanh(lam) ** 2
    d1 = (1.0 - s) + xi_sq * (1.0 + s)
    d2 = (1.0 - s) + xi_sq * (1.0 + s) * (1.0 - eta_a)
    return (-(2.0 * (1.0 + s) / math.pi) * (1.0 - xi_sq) / d1
            * (1.0 - xi_sq * (1.0 - eta_a)) / d2)


def _trace_cutoff(xi_sq: float, s: float) -> int:
    """Cutoff leaving the s-weighted series tail far below the oracle tolerance."""
    effective_ratio = xi_sq * max(1.0, (1.0 + s) / (1.0 - s))
    if effective_ratio >= _WS_SERIES_LIMIT:
        raise ValueError(
            f"the trace series for W_s(0) does not converge at this gain and "
            f"ordering (effective ratio {effective_ratio:.3f} >= {_WS_SERIES_LIMIT})"
        )
    return geometric_cutoff(effective_ratio, tol=1e-15, floor=32, cap=2048)


def _dark_conditional(lam: float, eta_a: float, dark_mean: float,
                      cutoff: int) -> FockDiagonalState:
    beam = twin_beam_reduced(GainParams(lam), cutoff, tol=1e-9)
    if dark_mean > 0.0:
        povm = povm_poisson_dark(dark_mean, eta_a, cutoff)
    else:
        povm = povm_ideal(eta_a, cutoff)
    return conditional_state(beam, povm).conditional


def ws0_dark(lam: float, eta_a: float, s: float, dark_mean: float,
             cutoff: int | None = None) -> float:
    """W_s(0) of the state heralded through a Poissonian-dark-count detector.

    Computed as the trace sum over the heralded photon distribution; the
    resummed expression in ws0_dark_closed is kept as an independent
    cross-check.  With dark counts the value is no longer negative for
    all parameters.
    """
    _check_order(s)
    if lam <= 0.0 and dark_mean <= 0.0:
        raise ValueError("need nonzero gain or dark counts to herald a state")
    if cutoff is None:
        cutoff = _trace_cutoff(GainParams(lam).xi_sq, s)
    return ws_origin_trace(_dark_conditional(lam, eta_a, dark_mean, cutoff), s)


def ws0_dark_closed(lam: float, eta_a: float, s: float, dark_mean: float) -> float:
    """Resummed W_s(0) with Poissonian dark counts.

    With d1 = (1-s) + xi^2 (1+s) and d2 = (1-s) + xi^2 (1+s)(1-eta):

        W_s(0) = 2 (1 - xi^2) / (pi P1) [ 1/d1 - exp(-N d1/d2) / d2 ] .

    Derived by summing the Laguerre generating function against the
    geometric photon distribution; reduces to ws0_ideal at N = 0.
    """
    _check_order(s)
    if lam <= 0.0 and dark_mean <= 0.0:
        raise ValueError("need nonzero gain or dark counts to herald a state")
    from .detection import p1_poisson_dark

    xi_sq = math.tanh(lam) ** 2
    d1 = (1.0 - s) + xi_sq * (1.0 + s)
    d2 = (1.0 - s) + xi_sq * (1.0 + s) * (1.0 - eta_a)
    p1 = p1_poisson_dark(lam, eta_a, dark_mean)
    return (2.0 * (1.0 - xi_sq) / (math.pi * p1)
            * (1.0 / d1 - math.exp(-dark_mean * d1 / d2) / d2))


def nonclassicality_index(state: FockDiagonalState, tolerance: float = 1e-4) -> float:
    """Boundary s* of the negative region of W_s(0) on s in [-1, 0].

    W_s(0) is nonnegative at s = -1 (it is the vacuum occupation over pi)
    and, for the states of interest, negative on an upper interval
    (s*, 0].  A grid scan brackets the sign change and bisection refines
    it to the given tolerance.  Returns CLASSICAL_AT_ORIGIN (0.0) when no
    negativity exists anywhere in the range, and -1 when the state is
    negative arbitrarily close to s = -1, the number-state-like extreme.
    """
    if tolerance <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    grid = np.linspace(-1.0, 0.0, _SSTAR_SCAN_POINTS)
    values = [ws_origin_trace(state, s) for s in grid]
    negatives = [i for i, v in enumerate(values) if v < 0.0]
    if not negatives:
        return CLASSICAL_AT_ORIGIN
    first = negatives[0]
    lo = grid[first - 1] if first > 0 else -1.0
    hi = grid[first]
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if ws_origin_trace(state, mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
