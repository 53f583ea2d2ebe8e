"""Independent oracles used by the test suite.

Everything here deliberately avoids the code paths under test: series are
summed in arbitrary precision, densities are convolved on fine grids, and
distributions are written out term by term.
"""

import math

import mpmath as mp
import numpy as np

from twinbeam.homodyne import quadrature_pdf, smearing_variance

mp.mp.dps = 40


def kummer_series(z: float) -> float:
    """Phi(1; 1/2; z) by brute-force power series in 40-digit arithmetic.

    term_{k+1} = term_k * z / (1/2 + k); high precision absorbs the
    cancellation the alternating series suffers for large negative z.
    """
    zm = mp.mpf(z)
    total = mp.mpf(1)
    term = mp.mpf(1)
    k = 0
    while True:
        term = term * zm / (mp.mpf(0.5) + k)
        total += term
        k += 1
        if k > 8 and abs(term) < mp.mpf(10) ** -35 * max(1, abs(total)):
            return float(total)
        if k > 5000:
            raise RuntimeError("series did not converge")


def laguerre_polynomial_sum(n: int, x: float) -> float:
    """L_n(x) by the explicit binomial sum, in exact rational arithmetic."""
    xm = mp.mpf(x)
    return float(sum(mp.binomial(n, k) * (-xm) ** k / mp.factorial(k)
                     for k in range(n + 1)))


def ideal_pdf_grid(state, half_width: float, points: int = 40001):
    xs = np.linspace(-half_width, half_width, points)
    return xs, quadrature_pdf(state, 1.0, xs)


def convolved_pdf_oracle(state, eta_h: float, x: float) -> float:
    """Quadrature density by direct Gaussian convolution on a fine grid.

    Independent of the loss-channel route the library uses.
    """
    sigma_sq = smearing_variance(eta_h)
    half_width = 0.5 * math.sqrt(2.0 * state.cutoff + 1.0) + 8.0
    ys, ideal = ideal_pdf_grid(state, half_width)
    if sigma_sq == 0.0:
        return float(np.interp(x, ys, ideal))
    gauss = np.exp(-(x - ys) ** 2 / (2.0 * sigma_sq)) / math.sqrt(2.0 * math.pi * sigma_sq)
    return float(np.trapezoid(ideal * gauss, ys))


def cdf_callable(state, eta_h: float):
    """Numerical CDF of the quadrature density, for KS tests."""
    sigma = math.sqrt(smearing_variance(eta_h))
    half_width = 0.5 * math.sqrt(2.0 * state.cutoff + 1.0) + 6.0 * sigma + 8.0
    xs = np.linspace(-half_width, half_width, 16001)
    pdf = quadrature_pdf(state, eta_h, xs)
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(xs))))
    cdf = np.clip(cdf / cdf[-1], 0.0, 1.0)

    def evaluate(values):
        return np.interp(values, xs, cdf)

    return evaluate


def ws_trace_sum(weights: np.ndarray, s: float) -> float:
    """Independently coded W_s(0) trace sum (compensated summation)."""
    ratio = (s + 1.0) / (s - 1.0)
    terms = [w * ratio ** n for n, w in enumerate(weights)]
    return 2.0 / (math.pi * (1.0 - s)) * math.fsum(terms)
