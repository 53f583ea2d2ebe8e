"""Scalar special functions used by the detector POVMs, quadrature densities
and the tomographic kernel: Laguerre polynomials, the confluent
hypergeometric value Phi(1; 1/2; z), and normalized oscillator
eigenfunctions in the vacuum-variance-1/4 quadrature convention.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import dawsn, erf

# math.exp overflows just above this; callers asking for larger z get an
# explicit OverflowError instead of an inf propagating silently.
_EXP_OVERFLOW = 709.0


def laguerre(n: int, x: float) -> float:
    """Laguerre polynomial L_n(x) by the stable three-term recurrence.

    The recurrence (k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1} avoids the
    catastrophic cancellation the explicit binomial sum suffers for large
    negative arguments.
    """
    if n < 0:
        raise ValueError(f"order must be nonnegative, got {n}")
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x}")
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0)
    return cur


def laguerre_sequence(nmax: int, x: float) -> np.ndarray:
    """All of L_0(x) .. L_nmax(x) in one recurrence pass."""
    if nmax < 0:
        raise ValueError(f"order must be nonnegative, got {nmax}")
    out = np.empty(nmax + 1)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 1.0 - x
        for k in range(1, nmax):
            out[k + 1] = ((2.0 * k + 1.0 - x) * out[k] - k * out[k - 1]) / (k + 1.0)
    return out


def kummer_1_half(z: float) -> float:
    """Confluent hypergeometric value Phi(1; 1/2; z).

    Evaluated in closed form: for z >= 0 via
    1 + sqrt(pi z) e^z erf(sqrt z), and for z < 0 via the analytic
    continuation 1 - 2 sqrt(-z) D(sqrt(-z)) with D the Dawson integral,
    which is free of the exponential cancellation the erfi form would
    have.  Negative z is the operative regime for the tomographic kernel.
    """
    if not math.isfinite(z):
        raise ValueError(f"argument must be finite, got {z}")
    if z < 0.0:
        u = math.sqrt(-z)
        return 1.0 - 2.0 * u * float(dawsn(u))
    if z == 0.0:
        return 1.0
    if z > _EXP_OVERFLOW:
        raise OverflowError(f"exp({z}) overflows a double")
    return 1.0 + math.sqrt(math.pi * z) * math.exp(z) * float(erf(math.sqrt(z)))


def kummer_1_half_neg(z: np.ndarray) -> np.ndarray:
    """Vectorized Phi(1; 1/2; z) for z <= 0 (kernel hot path)."""
    z = np.asarray(z, dtype=float)
    if np.any(z > 0.0):
        raise ValueError("kummer_1_half_neg requires z <= 0")
    u = np.sqrt(-z)
    return 1.0 - 2.0 * u * dawsn(u)


def hermite_function(n: int, x):
    """Normalized oscillator eigenfunction psi_n(x), vacuum variance 1/4.

    psi_n(x) = 2^{1/4} phi_n(sqrt(2) x) where phi_n is the unit-variance
    Hermite function; satisfies  integral psi_n^2 dx = 1  and
    <x^2>_n = (2n+1)/4.  Accepts a scalar or an array of positions.
    """
    vals = hermite_function_all(n, x)
    return vals[n]


def hermite_function_all(nmax: int, x):
    """psi_0(x) .. psi_nmax(x) stacked along the first axis.

    Uses the normalized recurrence
    phi_{n+1}(y) = y sqrt(2/(n+1)) phi_n(y) - sqrt(n/(n+1)) phi_{n-1}(y),
    which stays O(1) for all orders (no factorial overflow).
    """
    if nmax < 0:
        raise ValueError(f"order must be nonnegative, got {nmax}")
    xv = np.asarray(x, dtype=float)
    y = math.sqrt(2.0) * xv
    out = np.empty((nmax + 1,) + xv.shape)
    phi_prev = np.pi ** -0.25 * np.exp(-0.5 * y * y)
    out[0] = phi_prev
    if nmax >= 1:
        phi = math.sqrt(2.0) * y * phi_prev
        out[1] = phi
        for n in range(1, nmax):
            phi_next = y * math.sqrt(2.0 / (n + 1)) * phi - math.sqrt(n / (n + 1.0)) * phi_prev
            phi_prev, phi = phi, phi_next
            out[n + 1] = phi_next
    out *= 2.0 ** 0.25
    if np.ndim(x) == 0:
        return out.reshape(nmax + 1)
    return out
