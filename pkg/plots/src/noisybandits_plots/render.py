"""Render publication-style figures from noisybandits harness CSVs.

Three figure kinds, selected with --kind:

  alpha_scatter      alpha_scatter.csv -> alpha* vs graph size, one panel
                     per weight distribution
  regret_vs_epsilon  summary.csv -> mean +- std final regret vs threshold
                     for the swept policies, flat reference lines for the
                     threshold-free ones
  regret_over_time   one or more trace.csv -> cumulative regret curves
                     (label with label=path, default is the file stem)

Scripts are read-only over their inputs and fail loudly (no image
written) when a CSV is empty or misses required columns. Output format
follows the file extension; SVG output is byte-stable across reruns.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import style  # noqa: E402

REQUIRED = {
    "alpha_scatter": {"distribution", "n", "alpha_star", "status"},
    "regret_vs_epsilon": {"policy", "eps", "mean_regret", "std_regret"},
    "regret_over_time": {"round", "cum_regret"},
}

SWEPT_POLICIES = ("exp3-ixt", "exp3-ixb")


class SchemaError(ValueError):
    """Input CSV does not match the expected harness schema."""


def read_rows(path) -> list[dict]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def check_columns(rows: list[dict], kind: str, path):
    missing = REQUIRED[kind] - set(rows[0])
    if missing:
        raise SchemaError(
            f"{path}: missing columns {sorted(missing)} required for {kind}"
        )


def _save(fig, output):
    metadata = style.SVG_METADATA if str(output).endswith(".svg") else None
    fig.savefig(output, metadata=metadata)
    plt.close(fig)


def plot_alpha_scatter(inputs, output, title=None):
    rows = []
    for path in inputs:
        got = read_rows(path)
        check_columns(got, "alpha_scatter", path)
        rows.extend(got)
    skipped = [r for r in rows if r["status"] != "ok"]
    if skipped:
        warnings.warn(f"skipping {len(skipped)} rows without an exact alpha*")
    rows = [r for r in rows if r["status"] == "ok"]
    if not rows:
        raise SchemaError("no usable rows: every search was budget-exceeded")
    dists = sorted({r["distribution"] for r in rows})
    fig, axes = plt.subplots(
        1, len(dists), figsize=(3.0 * len(dists), 2.8), sharey=True, squeeze=False
    )
    for ax, dist in zip(axes[0], dists):
        pts = [(int(r["n"]), float(r["alpha_star"])) for r in rows if r["distribution"] == dist]
        ax.scatter([n for n, _ in pts], [a for _, a in pts], **style.SCATTER)
        ax.set_title(f"{dist} weights")
        ax.set_xlabel("graph size")
    axes[0][0].set_ylabel("effective independence number")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    _save(fig, output)


def plot_regret_vs_epsilon(inputs, output, title=None):
    if len(inputs) != 1:
        raise SchemaError("regret_vs_epsilon expects exactly one summary CSV")
    rows = read_rows(inputs[0])
    check_columns(rows, "regret_vs_epsilon", inputs[0])
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    for idx, policy in enumerate(SWEPT_POLICIES):
        pts = sorted(
            (float(r["eps"]), float(r["mean_regret"]), float(r["std_regret"]))
            for r in rows
            if r["policy"] == policy and r["eps"] != ""
        )
        if not pts:
            warnings.warn(f"no swept rows for {policy}; curve omitted")
            continue
        ax.errorbar(
            [e for e, _, _ in pts],
            [m for _, m, _ in pts],
            yerr=[s for _, _, s in pts],
            label=policy,
            color=style.policy_color(policy, idx),
            **style.ERRORBAR,
        )
    for idx, policy in enumerate(("exp3-wix", "exp3")):
        flat = [r for r in rows if r["policy"] == policy and r["eps"] == ""]
        if not flat:
            warnings.warn(f"no reference row for {policy}; line omitted")
            continue
        mean = float(flat[0]["mean_regret"])
        ax.axhline(
            mean,
            label=policy,
            color=style.policy_color(policy, idx),
            **style.REFERENCE_LINE,
        )
    ax.set_xlabel("threshold")
    ax.set_ylabel("final regret")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, output)


def plot_regret_over_time(inputs, output, title=None):
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    for idx, spec in enumerate(inputs):
        label, _, path = str(spec).rpartition("=")
        if not label:
            label = Path(path).stem
        rows = read_rows(path)
        check_columns(rows, "regret_over_time", path)
        t = [int(r["round"]) for r in rows]
        regret = [float(r["cum_regret"]) for r in rows]
        ax.plot(t, regret, label=label, color=style.policy_color(label, idx), linewidth=1.3)
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, output)


KINDS = {
    "alpha_scatter": plot_alpha_scatter,
    "regret_vs_epsilon": plot_regret_vs_epsilon,
    "regret_over_time": plot_regret_over_time,
}


def render(kind: str, inputs, output, title=None):
    if kind not in KINDS:
        raise SchemaError(f"unknown figure kind {kind!r}; expected one of {sorted(KINDS)}")
    plt.rcParams.update(style.RC_PARAMS)
    KINDS[kind](inputs, output, title)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="noisybandits-plot",
        description="Render figures from noisybandits harness CSVs",
    )
    parser.add_argument(
        "--input",
        action="append",
        required=True,
        help="input CSV; repeatable; regret_over_time accepts label=path",
    )
    parser.add_argument("--kind", required=True, choices=sorted(KINDS))
    parser.add_argument("--output", required=True, help="image path (.svg default idiom)")
    parser.add_argument("--title", default=None)
    args = parser.parse_args(argv)
    try:
        render(args.kind, args.input, args.output, args.title)
    except Exception as exc:  # noqa: BLE001 - script boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
