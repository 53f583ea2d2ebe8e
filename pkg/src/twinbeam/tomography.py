"""Pattern-function estimation of W_s(0) from random-phase quadrature data.

Averaging the kernel

    R(x) = (2 eta_h / pi) Phi(1; 1/2; -2 eta_h x^2 / d) / d ,
    d = (1 - s) eta_h - 1 ,

over homodyne samples gives an unbiased estimate of W_s(0).  The kernel
is bounded exactly when s < 1 - 1/eta_h, which is therefore the largest
ordering index reconstructible at efficiency eta_h; requests at or above
the boundary are rejected rather than estimated with divergent variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .homodyne import HomodyneDataset
from .specfun import kummer_1_half_neg

_CHUNK = 65536


class UnboundedKernelError(ValueError):
    """Requested ordering index is not reconstructible at this efficiency."""


def max_reconstructible_s(eta_h: float) -> float:
    """Supremum of ordering indices with a bounded kernel: 1 - 1/eta_h."""
    if not 0.0 < eta_h <= 1.0:
        raise ValueError(f"homodyne efficiency must lie in (0, 1], got {eta_h}")
    return 1.0 - 1.0 / eta_h


def kernel(x, s: float, eta_h: float):
    """Tomographic kernel R(x) for W_s(0) at homodyne efficiency eta_h.

    Even in x, finite and bounded on the admissible domain.  Accepts a
    scalar or an array of quadrature values.
    """
    bound = max_reconstructible_s(eta_h)
    if s >= bound:
        raise UnboundedKernelError(
            f"s = {s} is not reconstructible at eta_h = {eta_h}: "
            f"the kernel is bounded only for s < {bound}"
        )
    d = (1.0 - s) * eta_h - 1.0
    xv = np.asarray(x, dtype=float)
    phi = kummer_1_half_neg(-2.0 * eta_h * xv ** 2 / d)
    values = (2.0 * eta_h / math.pi) * phi / d
    return values if np.ndim(x) else float(values)


@dataclass(frozen=True)
class KernelEstimate:
    """Sample-mean reconstruction of W_s(0) with its standard error."""

    mean: float
    std_error: float
    count: int
    s: float
    eta_h: float


class RunningStats:
    """Streaming count/mean/M2 accumulator with associative merging.

    Chunk results merge with Chan's parallel update, so a map-reduce over
    sample chunks reproduces the single-pass result.
    """

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return
        other = RunningStats()
        other.count = values.size
        other.mean = float(values.mean())
        other.m2 = float(np.sum((values - other.mean) ** 2))
        self.merge(other)

    def merge(self, other: "RunningStats") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta ** 2 * self.count * other.count / total
        self.count = total

    @property
    def variance(self) -> float:
        return self.m2 / max(self.count - 1, 1)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count else 0.0


def estimate_ws0(data: HomodyneDataset, s: float) -> KernelEstimate:
    """Empirical mean of the kernel over a quadrature dataset.

    Streams over the samples in chunks (one pass, constant memory) and
    reports the standard error of the mean.
    """
    if data.count == 0:
        raise ValueError("cannot estimate from an empty dataset")
    stats = RunningStats()
    for start in range(0, data.count, _CHUNK):
        chunk = data.samples[start:start + _CHUNK]
        stats.update(kernel(chunk, s, data.eta_h))
    return KernelEstimate(mean=stats.mean, std_error=stats.std_error,
                          count=stats.count, s=s, eta_h=data.eta_h)
