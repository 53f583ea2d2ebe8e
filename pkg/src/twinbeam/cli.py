"""Command-line interface: run, sweep, selfcheck.

Exit codes: 0 success, 2 invalid configuration, 3 physics constraint
violated (unbounded kernel or zero click probability), 4 selfcheck
failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

from .detection import DarkModel, ZeroClickProbabilityError
from .experiment import (
    ConfigError,
    ExperimentConfig,
    SweepSpec,
    config_from_yaml,
    run_point,
    run_sweep,
    selfcheck,
    write_results_csv,
    _write_meta,
)
from .fockstate import CutoffTooSmallError
from .tomography import UnboundedKernelError

PRESETS = ("fig1_top", "fig1_bottom", "fig3_top", "fig3_bottom")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3
EXIT_SELFCHECK = 4


def _resolve_config_source(name: str) -> Path:
    """A literal path, or the name of a shipped preset."""
    path = Path(name)
    if path.exists():
        return path
    stem = name.removesuffix(".yaml")
    if stem in PRESETS:
        return Path(str(resources.files("twinbeam").joinpath(f"presets/{stem}.yaml")))
    raise ConfigError(
        f"config {name!r} is neither a file nor one of the presets {PRESETS}"
    )


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config file path or preset name "
                        f"({', '.join(PRESETS)})")
    parser.add_argument("--seed", type=int, help="master random seed")
    parser.add_argument("--samples", type=int, help="homodyne samples per point")
    parser.add_argument("--out-dir", default="out", help="output directory")
    parser.add_argument("--lambda", dest="lam", type=float, help="amplifier gain")
    parser.add_argument("--eta-a", type=float, help="on/off detector efficiency")
    parser.add_argument("--eta-h", type=float, help="homodyne efficiency")
    parser.add_argument("--s", type=float, help="ordering index of W_s(0)")
    parser.add_argument("--dark", choices=[m.value for m in DarkModel],
                        help="dark-count model")
    parser.add_argument("--dark-n", type=float, help="dark-count mean photon number")
    parser.add_argument("--cutoff", type=int, help="photon-number cutoff "
                        "(default: automatic)")


def _apply_overrides(config: ExperimentConfig,
                     args: argparse.Namespace) -> ExperimentConfig:
    overrides = {}
    for attr, key in (("lam", "lam"), ("eta_a", "eta_a"), ("eta_h", "eta_h"),
                      ("s", "s"), ("seed", "seed"), ("samples", "samples"),
                      ("cutoff", "cutoff")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "dark", None) is not None:
        overrides["dark_model"] = DarkModel(args.dark)
        if overrides["dark_model"] is DarkModel.NONE:
            overrides.setdefault("dark_mean", 0.0)
    if getattr(args, "dark_n", None) is not None:
        overrides["dark_mean"] = args.dark_n
    if getattr(args, "points", None) is not None:
        if config.sweep is None and "sweep" not in overrides:
            raise ConfigError("--points given but the configuration has no sweep block")
        overrides["sweep"] = replace(config.sweep, points=args.points)
    config = replace(config, **overrides)
    config.validate()
    return config


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None:
        config = config_from_yaml(_resolve_config_source(args.config))
    else:
        config = ExperimentConfig()
    return _apply_overrides(config, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinbeam",
        description="Conditional nonclassical-light simulation with Monte Carlo "
                    "homodyne tomography of W_s(0).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a single parameter point")
    _add_common_flags(run)

    sweep = sub.add_parser("sweep", help="run a parameter sweep and render figures")
    _add_common_flags(sweep)
    sweep.add_argument("--points", type=int, help="number of sweep points")

    check = sub.add_parser("selfcheck", help="run the built-in consistency checks")
    check.add_argument("--kernel-scale", type=float, default=1.0,
                       help="diagnostic hook: scale the kernel to prove the "
                            "convention check detects breakage")
    check.add_argument("--cutoff", type=int,
                       help="diagnostic hook: cutoff for the truncation check")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result = run_point(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_results_csv([result], out_dir / "results.csv")
    _write_meta(config, out_dir / "run_meta.json")
    print(f"P1: theory {result.p1_theory:.6f}  MC {result.p1_mc:.6f}")
    print(f"W_s(0): theory {result.ws0_theory:+.6f}  "
          f"estimate {result.ws0_estimate:+.6f} +- {result.ws0_stderr:.6f}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result = run_sweep(config, args.out_dir)
    failed = [r for r in result.results if r.status != "ok"]
    print(f"wrote {result.csv_path}")
    for path in result.figure_paths:
        print(f"wrote {path}")
    if failed:
        print(f"{len(failed)} of {len(result.results)} points failed "
              f"({', '.join(sorted({r.status for r in failed}))}); see CSV rows")
    return EXIT_OK


def _cmd_selfcheck(args: argparse.Namespace) -> int:
    report = selfcheck(kernel_scale=args.kernel_scale, cutoff=args.cutoff)
    print(report.format_table())
    return EXIT_OK if report.passed else EXIT_SELFCHECK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_selfcheck(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CutoffTooSmallError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnboundedKernelError, ZeroClickProbabilityError) as exc:
        print(f"constraint violated: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
