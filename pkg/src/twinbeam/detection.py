"""On/off photodetector models and conditional state preparation.

A binary (avalanche-style) detector is described by the diagonal of its
no-click element pi0; the click element is implicitly 1 - pi0[n], which
makes completeness structural.  Dark counts are modeled by a noisy
ancilla (thermal or phase-averaged coherent) entering the loss port of
the detector's beam splitter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import gammaln

from .fockstate import FockDiagonalState
from .specfun import laguerre_sequence

# Below this distance from eta_a = 1 the Laguerre form of the Poissonian
# no-click diagonal is replaced by its analytic limit e^-N N^n / n!.
_ETA_UNITY_EPS = 1e-8
_POVM_TOL = 1e-12


class DarkModel(str, Enum):
    NONE = "none"
    THERMAL = "thermal"
    POISSON = "poisson"


class ZeroClickProbabilityError(ValueError):
    """Conditioning on a click that can never happen."""


@dataclass(frozen=True, eq=False)
class OnOffPovm:
    """Diagonal of the no-click POVM element of a binary photodetector."""

    pi0: np.ndarray
    eta_a: float
    dark_model: DarkModel = DarkModel.NONE
    dark_mean: float = 0.0

    def __post_init__(self):
        pi0 = np.asarray(self.pi0, dtype=float)
        if pi0.ndim != 1 or pi0.size == 0:
            raise ValueError("pi0 must be a nonempty 1-D array")
        if np.any(pi0 < -_POVM_TOL) or np.any(pi0 > 1.0 + _POVM_TOL):
            raise ValueError("pi0 entries must lie in [0, 1]")
        if np.any(np.diff(pi0) > _POVM_TOL):
            raise ValueError(
                "pi0 must be nonincreasing in photon number; the noisy-ancilla "
                "model only guarantees this for weak background noise"
            )
        if self.dark_model is DarkModel.NONE and abs(pi0[0] - 1.0) > _POVM_TOL:
            raise ValueError("a dark-count-free detector never clicks on vacuum")
        pi0 = np.clip(pi0, 0.0, 1.0)
        pi0.setflags(write=False)
        object.__setattr__(self, "pi0", pi0)

    @property
    def cutoff(self) -> int:
        return self.pi0.size - 1

    def to_record(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "pi0": [float(p) for p in self.pi0],
            "eta_a": float(self.eta_a),
            "dark_model": self.dark_model.value,
            "dark_mean": float(self.dark_mean),
        }


@dataclass(frozen=True)
class ClickOutcome:
    """Click probability and the heralded state it leaves behind."""

    p1: float
    conditional: FockDiagonalState


def _check_eta(eta_a: float, allow_unity: bool = True) -> None:
    hi_ok = eta_a <= 1.0 if allow_unity else eta_a < 1.0
    if not (0.0 < eta_a and hi_ok):
        rng = "(0, 1]" if allow_unity else "(0, 1)"
        raise ValueError(f"quantum efficiency must lie in {rng}, got {eta_a}")


def povm_ideal(eta_a: float, cutoff: int) -> OnOffPovm:
    """Dark-count-free on/off detector: pi0[n] = (1 - eta_a)^n."""
    _check_eta(eta_a)
    pi0 = (1.0 - eta_a) ** np.arange(cutoff + 1)
    return OnOffPovm(pi0, eta_a=eta_a)


def povm_from_mixture(nu: FockDiagonalState, eta_a: float, cutoff: int,
                      dark_model: DarkModel = DarkModel.NONE,
                      dark_mean: float = 0.0) -> OnOffPovm:
    """No-click diagonal for an arbitrary diagonal ancilla at the loss port.

    pi0[n] = (1 - eta_a)^n sum_s nu_ss eta_a^s C(n+s, s).  This is the
    series the closed-form constructors resum; it is kept as the generic
    route (and as their test oracle).
    """
    if np.count_nonzero(nu.weights[1:]) == 0:
        _check_eta(eta_a)
        return povm_ideal(eta_a, cutoff)
    _check_eta(eta_a, allow_unity=False)
    s = np.arange(nu.weights.size)
    n = np.arange(cutoff + 1)
    log_binom = (gammaln(n[:, None] + s[None, :] + 1.0)
                 - gammaln(s[None, :] + 1.0) - gammaln(n[:, None] + 1.0))
    terms = nu.weights[None, :] * np.exp(log_binom + s[None, :] * math.log(eta_a))
    pi0 = (1.0 - eta_a) ** n * terms.sum(axis=1)
    return OnOffPovm(pi0, eta_a=eta_a, dark_model=dark_model, dark_mean=dark_mean)


def povm_thermal_dark(dark_mean: float, eta_a: float, cutoff: int) -> OnOffPovm:
    """Detector with thermal background of mean dark_mean.

    Resummed ancilla series for a thermal ancilla of mean N/(1 - eta_a):
    pi0[n] = (1 + N)^-1 (1 - eta_a / (1 + N))^n.
    """
    _check_eta(eta_a)
    if dark_mean < 0.0:
        raise ValueError(f"dark-count mean must be nonnegative, got {dark_mean}")
    if dark_mean == 0.0:
        return povm_ideal(eta_a, cutoff)
    n = np.arange(cutoff + 1)
    pi0 = (1.0 - eta_a / (1.0 + dark_mean)) ** n / (1.0 + dark_mean)
    return OnOffPovm(pi0, eta_a=eta_a, dark_model=DarkModel.THERMAL,
                     dark_mean=dark_mean)


def povm_poisson_dark(dark_mean: float, eta_a: float, cutoff: int) -> OnOffPovm:
    """Detector with Poissonian background of mean dark_mean.

    pi0[n] = e^-N (1 - eta_a)^n L_n(-N eta_a / (1 - eta_a)).  At
    eta_a -> 1 the Laguerre argument diverges while the product tends to
    the removable limit e^-N N^n / n!, which is used instead near unity.
    """
    _check_eta(eta_a)
    if dark_mean < 0.0:
        raise ValueError(f"dark-count mean must be nonnegative, got {dark_mean}")
    if dark_mean == 0.0:
        return povm_ideal(eta_a, cutoff)
    n = np.arange(cutoff + 1)
    if 1.0 - eta_a < _ETA_UNITY_EPS:
        pi0 = np.exp(-dark_mean + n * math.log(dark_mean) - gammaln(n + 1.0))
    else:
        lag = laguerre_sequence(cutoff, -dark_mean * eta_a / (1.0 - eta_a))
        pi0 = math.exp(-dark_mean) * (1.0 - eta_a) ** n * lag
    return OnOffPovm(pi0, eta_a=eta_a, dark_model=DarkModel.POISSON,
                     dark_mean=dark_mean)


def _aligned_pi0(state: FockDiagonalState, povm: OnOffPovm) -> np.ndarray:
    if povm.cutoff < state.cutoff:
        raise ValueError(
            f"POVM cutoff {povm.cutoff} smaller than state cutoff {state.cutoff}"
        )
    return povm.pi0[: state.cutoff + 1]


def click_probability(state: FockDiagonalState, povm: OnOffPovm) -> float:
    """P1 = 1 - sum_n weights[n] pi0[n]."""
    pi0 = _aligned_pi0(state, povm)
    return 1.0 - float(np.dot(state.weights, pi0))


def conditional_state(state: FockDiagonalState, povm: OnOffPovm) -> ClickOutcome:
    """State heralded by a click, with its probability.

    conditional[n] is proportional to weights[n] (1 - pi0[n]) and is
    renormalized by the numerically computed click mass so truncation
    errors cancel; closed forms serve only as test oracles.
    """
    pi0 = _aligned_pi0(state, povm)
    unnorm = state.weights * (1.0 - pi0)
    total = math.fsum(unnorm.tolist())
    if total <= 0.0:
        raise ZeroClickProbabilityError(
            "click probability is zero (vacuum input and no dark counts); "
            "no conditional state exists"
        )
    conditional = FockDiagonalState(unnorm / total)
    return ClickOutcome(p1=click_probability(state, povm), conditional=conditional)


# Closed-form click probabilities for the reduced amplifier beam.  These are
# the analytic resummations of click_probability over the geometric photon
# distribution; the truncated sums act as their oracles in the test suite.

def p1_ideal(lam: float, eta_a: float) -> float:
    """Click probability, no dark counts: eta xi^2 / (1 - xi^2 (1 - eta))."""
    _check_eta(eta_a)
    xi_sq = math.tanh(lam) ** 2
    return eta_a * xi_sq / (1.0 - xi_sq * (1.0 - eta_a))


def p1_thermal_dark(lam: float, eta_a: float, dark_mean: float) -> float:
    """Click probability with thermal background."""
    _check_eta(eta_a)
    xi_sq = math.tanh(lam) ** 2
    return 1.0 - (1.0 - xi_sq) / ((1.0 + dark_mean) * (1.0 - xi_sq) + eta_a * xi_sq)


def p1_poisson_dark(lam: float, eta_a: float, dark_mean: float) -> float:
    """Click probability with Poissonian background."""
    _check_eta(eta_a)
    xi_sq = math.tanh(lam) ** 2
    b = 1.0 - xi_sq * (1.0 - eta_a)
    return 1.0 - (1.0 - xi_sq) / b * math.exp(-dark_mean * (1.0 - xi_sq) / b)


def dark_model_first_order_gap(lam: float, eta_a: float, dark_mean: float) -> float:
    """|P1_thermal - P1_poisson| / N^2.

    The two background models share the same first-order response to the
    dark-count mean, so this ratio stays bounded as N -> 0.
    """
    if dark_mean <= 0.0:
        raise ValueError(f"dark-count mean must be positive, got {dark_mean}")
    gap = abs(p1_thermal_dark(lam, eta_a, dark_mean)
              - p1_poisson_dark(lam, eta_a, dark_mean))
    return gap / dark_mean ** 2
