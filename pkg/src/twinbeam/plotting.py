"""Static figures rendered from sweep CSV files.

The plots are pure functions of the CSV: anything a figure shows can be
regenerated offline from the data alone with render_sweep_figures.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_PARAM_LABELS = {"lambda": r"gain $\lambda$", "eta_a": r"detector efficiency $\eta_a$"}


def read_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="", encoding="ascii") as handle:
        return list(csv.DictReader(handle))


def _ok_rows(rows: list[dict]) -> list[dict]:
    return [row for row in rows if row["status"] == "ok"]


def render_sweep_figures(csv_path, out_dir=None) -> list[Path]:
    """Write the estimate panel and the click-probability panel as PDFs.

    Returns the written paths: <stem>_ws0.pdf and <stem>_p1.pdf next to
    the CSV (or under out_dir).
    """
    csv_path = Path(csv_path)
    out_dir = Path(out_dir) if out_dir is not None else csv_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = read_rows(csv_path)
    ok = _ok_rows(rows)
    if not ok:
        raise ValueError(f"{csv_path}: no successful rows to plot")
    param = ok[0]["sweep_param"] or "lambda"
    xlabel = _PARAM_LABELS.get(param, param)
    x = [float(row["sweep_value"] or row["lambda"]) for row in ok]
    s_value = float(ok[0]["s"])

    written = []

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(x, [float(r["ws0_theory"]) for r in ok], "-", color="C0",
            label="theory (trace)")
    ax.errorbar(x, [float(r["ws0_estimate"]) for r in ok],
                yerr=[float(r["ws0_stderr"]) for r in ok],
                fmt="o", ms=3.5, color="C3", capsize=2, label="tomography")
    ax.axhline(0.0, color="0.6", lw=0.8, ls=":")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(rf"$W_{{{s_value:g}}}(0)$")
    ax.legend(frameon=False)
    fig.tight_layout()
    ws0_path = out_dir / f"{csv_path.stem}_ws0.pdf"
    fig.savefig(ws0_path)
    plt.close(fig)
    written.append(ws0_path)

    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(x, [float(r["p1_theory"]) for r in ok], "-", color="C0",
            label="theory")
    ax.plot(x, [float(r["p1_mc"]) for r in ok], "o", ms=3.5, color="C3",
            label="Monte Carlo")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(r"click probability $P_1$")
    ax.legend(frameon=False)
    fig.tight_layout()
    p1_path = out_dir / f"{csv_path.stem}_p1.pdf"
    fig.savefig(p1_path)
    plt.close(fig)
    written.append(p1_path)

    return written
