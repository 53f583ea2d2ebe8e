"""Experiment runner: single points, parameter sweeps, and self checks.

A point builds the heralded state for one parameter set, computes the
analytic click probability and trace-oracle W_s(0), cross-checks the
click statistics by Monte Carlo, samples homodyne data, and estimates
W_s(0) with the pattern-function kernel.  Sweeps repeat that over a grid
with per-point seed substreams derived from the master seed, emit one CSV
row per point, and render the companion figures from the CSV alone.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml
from scipy.integrate import quad

from . import detection, homodyne, tomography, wigner
from .detection import (
    DarkModel,
    ZeroClickProbabilityError,
    conditional_state,
    p1_ideal,
    p1_poisson_dark,
    p1_thermal_dark,
    povm_ideal,
    povm_poisson_dark,
    povm_thermal_dark,
)
from .fockstate import (
    CutoffTooSmallError,
    FockDiagonalState,
    GainParams,
    geometric_cutoff,
    number_state,
    phase_averaged_coherent,
    thermal_state,
    twin_beam_reduced,
)
from .homodyne import GENERATOR_ID, click_simulation, quadrature_pdf, sample
from .tomography import UnboundedKernelError, estimate_ws0, max_reconstructible_s
from .wigner import ws0_dark_closed, ws0_ideal, ws_origin_trace

CSV_COLUMNS = [
    "sweep_param", "sweep_value", "lambda", "eta_a", "eta_h", "s",
    "dark_model", "N", "samples", "seed", "p1_theory", "p1_mc",
    "ws0_theory", "ws0_estimate", "ws0_stderr", "status",
]

CLICK_TRIALS = 100_000
MIN_SAMPLES = 100
DEFAULT_SWEEP_POINTS = 21

SWEEPABLE = ("lambda", "eta_a")

_CLICK_STREAM_KEY = 1 << 20


class ConfigError(ValueError):
    """Configuration that fails validation before any physics runs."""


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    points: int = DEFAULT_SWEEP_POINTS

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ExperimentConfig:
    """One run or sweep: gain, efficiencies, ordering, noise, sampling."""

    lam: float = 0.5
    eta_a: float = 0.6
    eta_h: float = 0.7
    s: float = -0.5
    dark_model: DarkModel = DarkModel.NONE
    dark_mean: float = 0.0
    samples: int = 50_000
    seed: int = 20260810
    cutoff: int | None = None
    sweep: SweepSpec | None = None

    def validate(self) -> None:
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ConfigError(f"lambda must be finite and nonnegative, got {self.lam}")
        if not 0.0 < self.eta_a <= 1.0:
            raise ConfigError(f"eta_a must lie in (0, 1], got {self.eta_a}")
        if not 0.0 < self.eta_h <= 1.0:
            raise ConfigError(f"eta_h must lie in (0, 1], got {self.eta_h}")
        if not math.isfinite(self.s) or not -1.0 <= self.s < 1.0:
            raise ConfigError(f"s must lie in [-1, 1), got {self.s}")
        if self.dark_mean < 0.0:
            raise ConfigError(f"dark_n must be nonnegative, got {self.dark_mean}")
        if self.dark_model is DarkModel.NONE and self.dark_mean != 0.0:
            raise ConfigError("dark_n must be 0 when dark_model is none")
        if self.samples < MIN_SAMPLES:
            raise ConfigError(f"samples must be at least {MIN_SAMPLES}, got {self.samples}")
        if self.cutoff is not None and self.cutoff < 1:
            raise ConfigError(f"cutoff must be positive, got {self.cutoff}")
        if self.sweep is not None:
            sw = self.sweep
            if sw.parameter not in SWEEPABLE:
                raise ConfigError(f"sweep parameter must be one of {SWEEPABLE}, "
                                  f"got {sw.parameter!r}")
            if not sw.start < sw.stop:
                raise ConfigError("sweep bounds must satisfy min < max")
            if sw.points < 2:
                raise ConfigError(f"sweep needs at least 2 points, got {sw.points}")
            low_ok = sw.start >= 0.0 if sw.parameter == "lambda" else sw.start > 0.0
            high_ok = True if sw.parameter == "lambda" else sw.stop <= 1.0
            if not (low_ok and high_ok):
                raise ConfigError(f"sweep bounds outside the legal range of "
                                  f"{sw.parameter}")

    def echo(self) -> dict:
        """Flat mapping of the configuration, for metadata files."""
        out = {
            "lambda": self.lam, "eta_a": self.eta_a, "eta_h": self.eta_h,
            "s": self.s, "dark_model": self.dark_model.value,
            "dark_n": self.dark_mean, "samples": self.samples,
            "seed": self.seed, "cutoff": self.cutoff,
        }
        if self.sweep is not None:
            out["sweep"] = {
                "parameter": self.sweep.parameter, "min": self.sweep.start,
                "max": self.sweep.stop, "points": self.sweep.points,
            }
        return out


_CONFIG_KEYS = {"lambda", "eta_a", "eta_h", "s", "dark_model", "dark_n",
                "samples", "seed", "cutoff", "sweep"}
_SWEEP_KEYS = {"parameter", "min", "max", "points"}


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build and validate a configuration from a flat key/value mapping."""
    if not isinstance(mapping, dict):
        raise ConfigError("configuration must be a mapping")
    unknown = set(mapping) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs = {}
    try:
        if "lambda" in mapping:
            kwargs["lam"] = float(mapping["lambda"])
        for key, attr in (("eta_a", "eta_a"), ("eta_h", "eta_h"), ("s", "s"),
                          ("dark_n", "dark_mean")):
            if key in mapping:
                kwargs[attr] = float(mapping[key])
        if "dark_model" in mapping:
            kwargs["dark_model"] = DarkModel(str(mapping["dark_model"]))
        for key in ("samples", "seed"):
            if key in mapping:
                kwargs[key] = int(mapping[key])
        if "cutoff" in mapping:
            raw = mapping["cutoff"]
            kwargs["cutoff"] = None if raw in (None, "auto") else int(raw)
        if "sweep" in mapping and mapping["sweep"] is not None:
            sw = mapping["sweep"]
            if not isinstance(sw, dict) or set(sw) - _SWEEP_KEYS:
                raise ConfigError(f"sweep block must use keys {sorted(_SWEEP_KEYS)}")
            kwargs["sweep"] = SweepSpec(
                parameter=str(sw["parameter"]),
                start=float(sw["min"]),
                stop=float(sw["max"]),
                points=int(sw.get("points", DEFAULT_SWEEP_POINTS)),
            )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed configuration value: {exc}") from exc
    config = ExperimentConfig(**kwargs)
    config.validate()
    return config


def config_from_yaml(path) -> ExperimentConfig:
    try:
        mapping = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    return config_from_mapping(mapping or {})


def resolve_cutoff(config: ExperimentConfig, lam: float | None = None) -> int:
    if config.cutoff is not None:
        return config.cutoff
    xi_sq = GainParams(lam if lam is not None else config.lam).xi_sq
    return geometric_cutoff(xi_sq)


@dataclass(frozen=True)
class PointResult:
    """Everything one CSV row records about a parameter point."""

    lam: float
    eta_a: float
    eta_h: float
    s: float
    dark_model: DarkModel
    dark_mean: float
    samples: int
    seed: int
    p1_theory: float | None = None
    p1_mc: float | None = None
    ws0_theory: float | None = None
    ws0_estimate: float | None = None
    ws0_stderr: float | None = None
    status: str = "ok"
    sweep_param: str = ""
    sweep_value: float | None = None

    def to_row(self) -> list:
        return [
            self.sweep_param, self.sweep_value, self.lam, self.eta_a,
            self.eta_h, self.s, self.dark_model.value, self.dark_mean,
            self.samples, self.seed, self.p1_theory, self.p1_mc,
            self.ws0_theory, self.ws0_estimate, self.ws0_stderr, self.status,
        ]


def _build_povm(config: ExperimentConfig, cutoff: int):
    if config.dark_model is DarkModel.THERMAL:
        return povm_thermal_dark(config.dark_mean, config.eta_a, cutoff)
    if config.dark_model is DarkModel.POISSON:
        return povm_poisson_dark(config.dark_mean, config.eta_a, cutoff)
    return povm_ideal(config.eta_a, cutoff)


def _p1_closed_form(config: ExperimentConfig) -> float:
    if config.dark_model is DarkModel.THERMAL:
        return p1_thermal_dark(config.lam, config.eta_a, config.dark_mean)
    if config.dark_model is DarkModel.POISSON:
        return p1_poisson_dark(config.lam, config.eta_a, config.dark_mean)
    return p1_ideal(config.lam, config.eta_a)


def _click_seed(seed: int) -> int:
    ss = np.random.SeedSequence(seed, spawn_key=(_CLICK_STREAM_KEY,))
    return int(ss.generate_state(1)[0])


def run_point(config: ExperimentConfig, sweep_param: str = "",
              sweep_value: float | None = None) -> PointResult:
    """Theory values, Monte Carlo cross-checks and the tomographic estimate
    for a single parameter point.

    Raises ZeroClickProbabilityError, UnboundedKernelError or
    CutoffTooSmallError when the point is not realizable; sweeps record
    those per row, single runs surface them as exit diagnostics.
    """
    config.validate()
    cutoff = resolve_cutoff(config)
    beam = twin_beam_reduced(GainParams(config.lam), cutoff)
    povm = _build_povm(config, cutoff)
    p1_theory = _p1_closed_form(config)
    outcome = conditional_state(beam, povm)
    ws0_theory = ws_origin_trace(outcome.conditional, config.s)
    if config.s >= max_reconstructible_s(config.eta_h):
        raise UnboundedKernelError(
            f"s = {config.s} is not reconstructible at eta_h = {config.eta_h}: "
            f"the kernel is bounded only for s < {max_reconstructible_s(config.eta_h)}"
        )
    p1_mc = click_simulation(beam, povm, CLICK_TRIALS, seed=_click_seed(config.seed))
    data = sample(outcome.conditional, config.eta_h, config.samples,
                  seed=config.seed, meta={"lambda": config.lam,
                                          "eta_a": config.eta_a, "s": config.s,
                                          "dark": config.dark_model.value,
                                          "N": config.dark_mean})
    estimate = estimate_ws0(data, config.s)
    return PointResult(
        lam=config.lam, eta_a=config.eta_a, eta_h=config.eta_h, s=config.s,
        dark_model=config.dark_model, dark_mean=config.dark_mean,
        samples=config.samples, seed=config.seed,
        p1_theory=p1_theory, p1_mc=p1_mc, ws0_theory=ws0_theory,
        ws0_estimate=estimate.mean, ws0_stderr=estimate.std_error,
        status="ok", sweep_param=sweep_param, sweep_value=sweep_value,
    )


_FAILURE_SLUGS = {
    ZeroClickProbabilityError: "zero-click-probability",
    UnboundedKernelError: "unbounded-kernel",
    CutoffTooSmallError: "cutoff-too-small",
}


def point_seed(master_seed: int, index: int) -> int:
    """Deterministic per-point seed substream for sweep point `index`."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class SweepResult:
    results: list
    csv_path: Path
    meta_path: Path
    figure_paths: list = field(default_factory=list)


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results_csv(results: list, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for result in results:
            writer.writerow([_fmt_cell(v) for v in result.to_row()])
    return path


def _write_meta(config: ExperimentConfig, path: Path) -> Path:
    from . import __version__

    meta = {
        "config": config.echo(),
        "generator": GENERATOR_ID,
        "package_version": __version__,
        "numpy_version": np.__version__,
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return path


def run_sweep(config: ExperimentConfig, out_dir, render: bool = True) -> SweepResult:
    """One row per sweep point, written in sweep order, plus figures.

    Every point gets its own seed substream derived from the master seed
    and the point index; a point that violates a physics constraint is
    recorded in its row and the sweep continues.
    """
    config.validate()
    if config.sweep is None:
        raise ConfigError("sweep requested but the configuration has no sweep block")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = []
    for index, value in enumerate(config.sweep.values()):
        value = float(value)
        overrides = {"seed": point_seed(config.seed, index), "sweep": None}
        if config.sweep.parameter == "lambda":
            overrides["lam"] = value
        else:
            overrides["eta_a"] = value
        point_config = replace(config, **overrides)
        try:
            result = run_point(point_config, sweep_param=config.sweep.parameter,
                               sweep_value=value)
        except tuple(_FAILURE_SLUGS) as exc:
            result = PointResult(
                lam=point_config.lam, eta_a=point_config.eta_a,
                eta_h=point_config.eta_h, s=point_config.s,
                dark_model=point_config.dark_model,
                dark_mean=point_config.dark_mean,
                samples=point_config.samples, seed=point_config.seed,
                status=_FAILURE_SLUGS[type(exc)],
                sweep_param=config.sweep.parameter, sweep_value=value,
            )
        results.append(result)
    csv_path = write_results_csv(results, out_dir / "results.csv")
    meta_path = _write_meta(config, out_dir / "run_meta.json")
    figure_paths = []
    if render:
        from .plotting import render_sweep_figures

        figure_paths = render_sweep_figures(csv_path)
    return SweepResult(results=results, csv_path=csv_path, meta_path=meta_path,
                       figure_paths=figure_paths)


def quadrature_identity_error(state: FockDiagonalState, s: float, eta_h: float,
                              kernel_scale: float = 1.0) -> float:
    """|integral pdf * kernel - trace W_s(0)|, the convention-locking gap.

    Deterministic quadrature of the product of the quadrature density and
    the pattern kernel must reproduce the trace value; kernel_scale != 1
    exists so self checks can prove the test detects a broken kernel.
    """
    sigma = math.sqrt(homodyne.smearing_variance(eta_h))
    half_width = math.sqrt(state.cutoff) + 6.0 * sigma + 6.0

    def integrand(x: float) -> float:
        return (quadrature_pdf(state, eta_h, x)
                * kernel_scale * tomography.kernel(x, s, eta_h))

    integral, _ = quad(integrand, -half_width, half_width, limit=200,
                       epsabs=1e-11, epsrel=1e-11)
    return abs(integral - ws_origin_trace(state, s))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class SelfcheckReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def format_table(self) -> str:
        width = max(len(check.name) for check in self.checks)
        lines = []
        for check in self.checks:
            flag = "PASS" if check.passed else "FAIL"
            lines.append(f"{flag}  {check.name:<{width}}  {check.detail}")
        summary = "all checks passed" if self.passed else "SELFCHECK FAILED"
        lines.append(summary)
        return "\n".join(lines)


def selfcheck(kernel_scale: float = 1.0, cutoff: int | None = None) -> SelfcheckReport:
    """Fast release gate: convention lock, POVM reductions, oracle equality,
    truncation headroom, and sampling determinism.

    kernel_scale and cutoff are perturbation hooks so the suite can verify
    the checks actually fail when the physics is broken.
    """
    checks = []

    def record(name: str, passed: bool, detail: str) -> None:
        checks.append(CheckResult(name=name, passed=passed, detail=detail))

    # Convention lock: kernel-averaged densities reproduce trace values.
    vac = number_state(0, 8)
    one = number_state(1, 8)
    cond = conditional_state(twin_beam_reduced(GainParams(0.5), 64),
                             povm_ideal(0.6, 64)).conditional
    gap = quadrature_identity_error(vac, -1.0, 1.0, kernel_scale)
    record("quadrature-identity vacuum (eta_h=1, s=-1) = 1/pi",
           gap < 1e-6, f"gap {gap:.2e}")
    for name, state, s, eta_h in (
        ("fock-1", one, -0.5, 0.7),
        ("thermal", thermal_state(0.5, 64), -0.6, 0.8),
        ("conditional", cond, -0.5, 0.7),
    ):
        gap = quadrature_identity_error(state, s, eta_h, kernel_scale)
        record(f"quadrature-identity {name}", gap < 1e-6, f"gap {gap:.2e}")

    # Noisy-ancilla resummations match the generic mixture series.
    mix_cut = 48
    nu_t = thermal_state(0.08 / (1 - 0.7), 320)
    nu_p = phase_averaged_coherent(0.08 / (1 - 0.7), 320)
    gap_t = np.max(np.abs(
        detection.povm_from_mixture(nu_t, 0.7, mix_cut, DarkModel.THERMAL, 0.08).pi0
        - povm_thermal_dark(0.08, 0.7, mix_cut).pi0))
    gap_p = np.max(np.abs(
        detection.povm_from_mixture(nu_p, 0.7, mix_cut, DarkModel.POISSON, 0.08).pi0
        - povm_poisson_dark(0.08, 0.7, mix_cut).pi0))
    record("povm-reduction thermal", gap_t < 1e-10, f"max gap {gap_t:.2e}")
    record("povm-reduction poisson", gap_p < 1e-10, f"max gap {gap_p:.2e}")

    # Closed-form click probabilities and Wigner values against trace sums.
    beam = twin_beam_reduced(GainParams(0.8), 256)
    gap_p1 = abs(detection.click_probability(beam, povm_poisson_dark(0.08, 0.7, 256))
                 - p1_poisson_dark(0.8, 0.7, 0.08))
    record("click-probability closed form", gap_p1 < 1e-10, f"gap {gap_p1:.2e}")
    gap_w = abs(ws0_ideal(0.5, 0.6, -0.5)
                - ws_origin_trace(cond, -0.5))
    gap_wd = abs(ws0_dark_closed(0.8, 0.7, -0.4, 0.08)
                 - wigner.ws0_dark(0.8, 0.7, -0.4, 0.08))
    record("wigner closed form (no dark)", gap_w < 1e-10, f"gap {gap_w:.2e}")
    record("wigner closed form (poisson dark)", gap_wd < 1e-9, f"gap {gap_wd:.2e}")

    # Truncation headroom at the largest preset gain.
    trunc_cut = cutoff if cutoff is not None else geometric_cutoff(
        GainParams(1.2).xi_sq)
    try:
        twin_beam_reduced(GainParams(1.2), trunc_cut)
        record("truncation lambda=1.2", True, f"cutoff {trunc_cut} sufficient")
    except CutoffTooSmallError as exc:
        record("truncation lambda=1.2", False, str(exc))

    # Bit determinism of the sampler.
    d1 = sample(cond, 0.7, 1000, seed=7)
    d2 = sample(cond, 0.7, 1000, seed=7)
    same = bool(np.array_equal(d1.samples, d2.samples))
    record("sampling determinism", same, "bit-identical" if same else "mismatch")

    return SelfcheckReport(checks=checks)
