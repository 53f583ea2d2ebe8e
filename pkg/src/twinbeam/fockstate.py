"""Truncated photon-number-diagonal density matrices.

Every state in the conditional-preparation model is diagonal in the Fock
basis, so a state is a vector of occupation probabilities plus a record of
the probability mass the truncation threw away.  States are immutable;
conditioning and loss produce new states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaln

DEFAULT_TRUNCATION_TOL = 1e-10
MAX_AUTO_CUTOFF = 512
_NORMALIZATION_TOL = 1e-12


class CutoffTooSmallError(ValueError):
    """Requested cutoff leaves more probability outside the basis than allowed."""


@dataclass(frozen=True)
class GainParams:
    """Parametric gain of the two-mode amplifier.

    The derived squeezing parameter xi = tanh(lam) lies in [0, 1); the
    mean photon number of either reduced beam is sinh(lam)^2.
    """

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError(f"gain must be finite and nonnegative, got {self.lam}")

    @property
    def xi(self) -> float:
        return math.tanh(self.lam)

    @property
    def xi_sq(self) -> float:
        return math.tanh(self.lam) ** 2

    @property
    def mean_photons(self) -> float:
        return math.sinh(self.lam) ** 2


@dataclass(frozen=True, eq=False)
class FockDiagonalState:
    """Diagonal density matrix on photon numbers 0..cutoff.

    weights[n] is the probability of n photons; trace_deficit is the mass
    beyond the cutoff, recorded at construction instead of silently
    renormalized so downstream error bounds stay auditable.
    """

    weights: np.ndarray
    trace_deficit: float = 0.0
    truncation_tol: float = field(default=DEFAULT_TRUNCATION_TOL, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D array")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        total = math.fsum(w.tolist()) + self.trace_deficit
        if abs(total - 1.0) > _NORMALIZATION_TOL:
            raise ValueError(f"weights + trace_deficit = {total!r}, expected 1")
        if self.trace_deficit >= self.truncation_tol:
            raise CutoffTooSmallError(
                f"cutoff {w.size - 1} leaves truncated mass {self.trace_deficit:.3e} "
                f">= tolerance {self.truncation_tol:.3e}"
            )

    @property
    def cutoff(self) -> int:
        return self.weights.size - 1

    @property
    def mean_photon_number(self) -> float:
        return float(np.dot(np.arange(self.weights.size), self.weights))

    def to_record(self) -> dict:
        """Plain record {cutoff, weights, trace_deficit} for cross-checks."""
        return {
            "cutoff": self.cutoff,
            "weights": [float(w) for w in self.weights],
            "trace_deficit": float(self.trace_deficit),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, record: dict) -> "FockDiagonalState":
        weights = np.asarray(record["weights"], dtype=float)
        if record.get("cutoff", weights.size - 1) != weights.size - 1:
            raise ValueError("record cutoff does not match weights length")
        return cls(weights, trace_deficit=float(record.get("trace_deficit", 0.0)))

    @classmethod
    def from_json(cls, text: str) -> "FockDiagonalState":
        return cls.from_record(json.loads(text))


def geometric_cutoff(ratio: float, tol: float = DEFAULT_TRUNCATION_TOL,
                     cap: int = MAX_AUTO_CUTOFF, floor: int = 16) -> int:
    """Smallest cutoff with geometric tail mass ratio^(cutoff+1) below tol.

    Used for the automatic cutoff policy: both the reduced amplifier beam
    and the thermal noise states have geometric number distributions, so
    the bound is exact for them.  Capped at `cap`; construction still
    validates the deficit so an insufficient cap surfaces as an error.
    """
    if not 0.0 <= ratio < 1.0:
        raise ValueError(f"ratio must be in [0, 1), got {ratio}")
    if ratio == 0.0:
        return floor
    needed = int(math.floor(math.log(tol) / math.log(ratio)))
    return min(cap, max(floor, needed))


def twin_beam_reduced(gain: GainParams | float, cutoff: int,
                      tol: float = DEFAULT_TRUNCATION_TOL) -> FockDiagonalState:
    """Either single-mode marginal of the two-mode squeezed vacuum.

    weights[n] = (1 - xi^2) xi^(2n): a thermal distribution with mean
    photon number sinh(lam)^2.
    """
    if not isinstance(gain, GainParams):
        gain = GainParams(float(gain))
    xi_sq = gain.xi_sq
    n = np.arange(cutoff + 1)
    weights = (1.0 - xi_sq) * xi_sq ** n
    deficit = xi_sq ** (cutoff + 1)
    return FockDiagonalState(weights, trace_deficit=deficit, truncation_tol=tol)


def thermal_state(mean: float, cutoff: int,
                  tol: float = DEFAULT_TRUNCATION_TOL) -> FockDiagonalState:
    """Thermal state: weights[n] = M^n / (M+1)^(n+1)."""
    if not (math.isfinite(mean) and mean >= 0.0):
        raise ValueError(f"mean photon number must be nonnegative, got {mean}")
    ratio = mean / (mean + 1.0)
    n = np.arange(cutoff + 1)
    weights = ratio ** n / (mean + 1.0)
    deficit = ratio ** (cutoff + 1)
    return FockDiagonalState(weights, trace_deficit=deficit, truncation_tol=tol)


def phase_averaged_coherent(mean: float, cutoff: int,
                            tol: float = DEFAULT_TRUNCATION_TOL) -> FockDiagonalState:
    """Phase-averaged coherent state: Poissonian weights e^-M M^n / n!."""
    if not (math.isfinite(mean) and mean >= 0.0):
        raise ValueError(f"mean photon number must be nonnegative, got {mean}")
    n = np.arange(cutoff + 1)
    if mean == 0.0:
        weights = (n == 0).astype(float)
        deficit = 0.0
    else:
        weights = np.exp(-mean + n * math.log(mean) - gammaln(n + 1.0))
        deficit = float(gammainc(cutoff + 1.0, mean))  # Poisson tail P(X > cutoff)
    return FockDiagonalState(weights, trace_deficit=deficit, truncation_tol=tol)


def number_state(n: int, cutoff: int) -> FockDiagonalState:
    """Photon-number eigenstate |n><n|."""
    if n < 0:
        raise ValueError(f"photon number must be nonnegative, got {n}")
    if n > cutoff:
        raise CutoffTooSmallError(f"number state {n} exceeds cutoff {cutoff}")
    weights = np.zeros(cutoff + 1)
    weights[n] = 1.0
    return FockDiagonalState(weights)


def loss_channel(state: FockDiagonalState, eta: float) -> FockDiagonalState:
    """Beam-splitter loss of transmissivity eta applied to a diagonal state.

    weights'[m] = sum_{n>=m} weights[n] C(n, m) eta^m (1-eta)^(n-m).
    Binomial columns sum to one, so the retained trace is preserved; the
    recorded deficit carries over unchanged.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {eta}")
    if eta == 1.0:
        return FockDiagonalState(state.weights, trace_deficit=state.trace_deficit,
                                 truncation_tol=state.truncation_tol)
    c = state.cutoff
    out = np.zeros(c + 1)
    if eta == 0.0:
        out[0] = math.fsum(state.weights.tolist())
    else:
        m, n = np.meshgrid(np.arange(c + 1), np.arange(c + 1), indexing="ij")
        log_binom = gammaln(n + 1.0) - gammaln(m + 1.0) - gammaln(n - m + 1.0)
        log_kernel = log_binom + m * math.log(eta) + (n - m) * math.log1p(-eta)
        kernel = np.where(m <= n, np.exp(log_kernel), 0.0)
        out = kernel @ state.weights
    return FockDiagonalState(out, trace_deficit=state.trace_deficit,
                             truncation_tol=state.truncation_tol)
