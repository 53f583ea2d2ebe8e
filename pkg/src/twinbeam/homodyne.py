"""Monte Carlo homodyne quadrature data for number-diagonal states.

The quadrature convention is x = (a e^{-i phi} + a^dag e^{i phi}) / 2,
vacuum variance 1/4.  Detector efficiency eta_h acts as Gaussian smearing
of the ideal distribution with variance (1 - eta_h) / (4 eta_h), which is
equivalent to beam-splitter loss followed by a 1/sqrt(eta_h) rescale of
the outcome.  Number-diagonal states have phase-independent quadrature
statistics, so no local-oscillator phase enters the physics; an optional
uniform phase column can still be recorded for format compatibility and
is ignored by every estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .detection import OnOffPovm, _aligned_pi0
from .fockstate import FockDiagonalState, loss_channel
from .specfun import hermite_function, hermite_function_all

GENERATOR_ID = "numpy-pcg64"

# Fixed generation chunk: every dataset is produced in chunks of this size,
# each from its own seed substream, so parallel and serial generation agree
# bit for bit.
CHUNK_SIZE = 16384
_TABLE_POINTS = 4096


def smearing_variance(eta_h: float) -> float:
    """Variance of the efficiency-induced Gaussian noise on x."""
    if not 0.0 < eta_h <= 1.0:
        raise ValueError(f"homodyne efficiency must lie in (0, 1], got {eta_h}")
    return (1.0 - eta_h) / (4.0 * eta_h)


@dataclass(frozen=True, eq=False)
class HomodyneDataset:
    """Quadrature samples plus everything needed to regenerate them."""

    samples: np.ndarray
    eta_h: float
    seed: int
    meta: dict = field(default_factory=dict)
    phases: np.ndarray | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a nonempty 1-D array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must all be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.phases is not None:
            phases = np.asarray(self.phases, dtype=float)
            if phases.shape != samples.shape:
                raise ValueError("phases must align with samples")
            phases.setflags(write=False)
            object.__setattr__(self, "phases", phases)

    @property
    def count(self) -> int:
        return self.samples.size

    def save(self, path) -> None:
        """One header line with the config echo, then one sample per line.

        Values are written with repr so the round trip is bit exact.
        """
        fields = {
            "format": "quadrature-samples-v1",
            "generator": GENERATOR_ID,
            "eta_h": repr(float(self.eta_h)),
            "seed": str(int(self.seed)),
            "count": str(self.count),
            "columns": "x,phase" if self.phases is not None else "x",
        }
        for key, value in self.meta.items():
            fields[str(key)] = repr(value) if isinstance(value, float) else str(value)
        header = "# " + " ".join(f"{k}={v}" for k, v in fields.items())
        lines = [header]
        if self.phases is None:
            lines.extend(repr(float(x)) for x in self.samples)
        else:
            lines.extend(f"{float(x)!r} {float(p)!r}"
                         for x, p in zip(self.samples, self.phases))
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")

    @classmethod
    def load(cls, path) -> "HomodyneDataset":
        lines = Path(path).read_text(encoding="ascii").splitlines()
        if not lines or not lines[0].startswith("# "):
            raise ValueError(f"{path}: missing dataset header")
        fields = dict(item.split("=", 1) for item in lines[0][2:].split(" "))
        if fields.get("format") != "quadrature-samples-v1":
            raise ValueError(f"{path}: unknown dataset format")
        with_phases = fields.get("columns", "x") == "x,phase"
        eta_h = float(fields.pop("eta_h"))
        seed = int(fields.pop("seed"))
        known = {"format", "generator", "count", "columns"}
        meta = {k: v for k, v in fields.items() if k not in known}
        body = [line.split() for line in lines[1:] if line]
        samples = np.array([float(row[0]) for row in body])
        phases = np.array([float(row[1]) for row in body]) if with_phases else None
        return cls(samples=samples, eta_h=eta_h, seed=seed, meta=meta, phases=phases)


@lru_cache(maxsize=None)
def _inverse_cdf_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tabulated inverse CDF of psi_n^2 on a per-order grid.

    The grid spans the classically allowed region plus six units of
    Gaussian tail; interpolation error is far below Monte Carlo noise at
    the sample sizes of interest.
    """
    half_width = 0.5 * math.sqrt(2.0 * n + 1.0) + 6.0
    ys = np.linspace(-half_width, half_width, _TABLE_POINTS)
    pdf = hermite_function(n, ys) ** 2
    cdf = np.concatenate(([0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(ys))))
    cdf /= cdf[-1]
    keep = np.concatenate(([True], np.diff(cdf) > 0.0))
    cdf, ys = cdf[keep], ys[keep]
    cdf.setflags(write=False)
    ys.setflags(write=False)
    return cdf, ys


def quadrature_pdf(state: FockDiagonalState, eta_h: float, x):
    """Quadrature density p_eta(x) of a number-diagonal state.

    Evaluated through the loss-channel equivalence: smear-then-measure
    equals lose-then-rescale, so
    p_eta(x) = sqrt(eta) sum_m weights'[m] psi_m(sqrt(eta) x)^2
    with weights' the state after transmissivity-eta loss.  A fine-grid
    Gaussian-convolution oracle checks this route in the test suite.
    """
    smearing_variance(eta_h)  # range check
    scale = math.sqrt(eta_h)
    lossy = state if eta_h == 1.0 else loss_channel(state, eta_h)
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    psi_sq = hermite_function_all(state.cutoff, scale * xv) ** 2
    values = scale * (lossy.weights @ psi_sq)
    return values if np.ndim(x) else float(values[0])


def _chunk_rng(seed: int, chunk_index: int, stream: int = 0) -> np.random.Generator:
    key = (chunk_index,) if stream == 0 else (chunk_index, stream)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def sample_chunk(state: FockDiagonalState, eta_h: float, seed: int,
                 chunk_index: int, count: int) -> np.ndarray:
    """Quadrature samples for one fixed chunk of a dataset.

    Per draw: photon number n from the weights, a position from the
    psi_n^2 inverse-CDF table, plus the efficiency Gaussian.  The chunk is
    a pure function of (state, eta_h, seed, chunk_index, count).
    """
    sigma = math.sqrt(smearing_variance(eta_h))
    rng = _chunk_rng(seed, chunk_index)
    cum = np.cumsum(state.weights)
    ns = np.searchsorted(cum, rng.random(count) * cum[-1], side="right")
    ns = np.minimum(ns, state.cutoff)
    u = rng.random(count)
    noise = rng.standard_normal(count)
    xs = np.empty(count)
    for n in np.unique(ns):
        mask = ns == n
        cdf, ys = _inverse_cdf_table(int(n))
        xs[mask] = np.interp(u[mask], cdf, ys)
    return xs + sigma * noise


def sample(state: FockDiagonalState, eta_h: float, count: int, seed: int,
           with_phases: bool = False, meta: dict | None = None) -> HomodyneDataset:
    """Dataset of `count` independent quadrature samples.

    Generation is chunked (CHUNK_SIZE per substream, derived from the seed
    and the chunk index), so it can be parallelized by chunk and merged by
    concatenation without changing a single bit.  Phases, when requested,
    come from separate substreams and leave the x draws untouched.
    """
    if count < 1:
        raise ValueError(f"sample count must be positive, got {count}")
    chunks = []
    for index, start in enumerate(range(0, count, CHUNK_SIZE)):
        size = min(CHUNK_SIZE, count - start)
        chunks.append(sample_chunk(state, eta_h, seed, index, size))
    xs = np.concatenate(chunks)
    phases = None
    if with_phases:
        parts = []
        for index, start in enumerate(range(0, count, CHUNK_SIZE)):
            size = min(CHUNK_SIZE, count - start)
            rng = _chunk_rng(seed, index, stream=1)
            parts.append(rng.uniform(0.0, 2.0 * math.pi, size))
        phases = np.concatenate(parts)
    return HomodyneDataset(samples=xs, eta_h=eta_h, seed=seed,
                           meta=dict(meta or {}), phases=phases)


def click_simulation(state: FockDiagonalState, povm: OnOffPovm,
                     trials: int, seed: int) -> float:
    """Empirical click frequency of the detector on the given beam.

    Per trial: draw a photon number from the beam's distribution, then
    click with probability 1 - pi0[n].  Validates the analytic click
    probability to binomial accuracy.
    """
    if trials < 1:
        raise ValueError(f"trial count must be positive, got {trials}")
    pi0 = _aligned_pi0(state, povm)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    cum = np.cumsum(state.weights)
    ns = np.searchsorted(cum, rng.random(trials) * cum[-1], side="right")
    ns = np.minimum(ns, state.cutoff)
    clicks = rng.random(trials) < (1.0 - pi0[ns])
    return float(np.mean(clicks))
