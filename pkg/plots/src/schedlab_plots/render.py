"""Render experiment-summary CSVs as line plots with error bands.

This package does no numerical work of its own: it consumes the summary CSV
schema written by the experiment harness
(``policy,K,n,lambdas,mean_cr,stderr_cr,mean_excess,stderr_excess,count``,
with ``#`` comment lines) and draws one curve per policy.
"""
from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

X_FIELDS = ("n", "lambda1")
Y_MODES = ("mean_cr", "excess_vs_ftpp")

# fixed palette and ordering keep renders deterministic
_POLICY_ORDER = ["opt", "ftpp", "rr", "etc-u", "ucb-u", "etc-rr", "ucb-rr", "lsept"]
_COLORS = {
    "opt": "#444444",
    "ftpp": "#000000",
    "rr": "#7f7f7f",
    "etc-u": "#d62728",
    "ucb-u": "#ff7f0e",
    "etc-rr": "#1f77b4",
    "ucb-rr": "#2ca02c",
    "lsept": "#9467bd",
}


class PlotError(ValueError):
    """Malformed specification or input CSV."""


@dataclass(frozen=True)
class FigureSpec:
    input: str
    x_field: str
    y_mode: str
    log_y: bool
    output: str

    def __post_init__(self):
        if self.x_field not in X_FIELDS:
            raise PlotError(f"x_field must be one of {X_FIELDS}, got {self.x_field!r}")
        if self.y_mode not in Y_MODES:
            raise PlotError(f"y_mode must be one of {Y_MODES}, got {self.y_mode!r}")


def spec_from_json(path) -> FigureSpec:
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise PlotError("figure spec must be a JSON object")
    try:
        return FigureSpec(
            input=raw["input"],
            x_field=raw["x_field"],
            y_mode=raw["y_mode"],
            log_y=bool(raw.get("log_y", False)),
            output=raw["output"],
        )
    except KeyError as exc:
        raise PlotError(f"figure spec is missing field {exc.args[0]!r}") from None


def read_summary(path) -> list[dict]:
    """Parse the harness summary CSV, skipping generator comment lines."""
    rows = []
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise PlotError(f"{path}: no data rows")
    reader = csv.DictReader(lines)
    required = {"policy", "K", "n", "lambdas", "mean_cr", "stderr_cr"}
    if not required.issubset(reader.fieldnames or ()):
        raise PlotError(f"{path}: missing columns {sorted(required - set(reader.fieldnames or ()))}")
    for raw in reader:
        lambdas = tuple(float(x) for x in raw["lambdas"].split(";"))
        rows.append(
            {
                "policy": raw["policy"],
                "n": int(raw["n"]),
                "lambdas": lambdas,
                "lambda1": lambdas[0],
                "mean_cr": float(raw["mean_cr"]),
                "stderr_cr": float(raw["stderr_cr"]),
            }
        )
    if not rows:
        raise PlotError(f"{path}: no data rows")
    return rows


def build_series(rows: list[dict], spec: FigureSpec) -> dict[str, dict]:
    """One (x, y, err) series per policy, x sorted ascending.

    In ``excess_vs_ftpp`` mode the y value is the policy's mean ratio minus
    the ftpp mean ratio at the same grid point, and the ftpp curve itself is
    omitted (it is identically zero).
    """
    ftpp_at = {}
    if spec.y_mode == "excess_vs_ftpp":
        for row in rows:
            if row["policy"] == "ftpp":
                ftpp_at[(row["lambdas"], row["n"])] = row["mean_cr"]
        if not ftpp_at:
            raise PlotError("excess_vs_ftpp mode needs ftpp rows in the summary")
    series: dict[str, dict] = {}
    skipped = set()
    for row in rows:
        policy = row["policy"]
        if spec.y_mode == "excess_vs_ftpp":
            if policy == "ftpp":
                continue
            key = (row["lambdas"], row["n"])
            if key not in ftpp_at:
                skipped.add(policy)
                continue
            y = row["mean_cr"] - ftpp_at[key]
        else:
            y = row["mean_cr"]
        entry = series.setdefault(policy, {"x": [], "y": [], "err": []})
        entry["x"].append(row[spec.x_field])
        entry["y"].append(y)
        entry["err"].append(row["stderr_cr"])
    for policy in skipped:
        print(f"warning: no ftpp counterpart for {policy}; rows skipped", file=sys.stderr)
    for entry in series.values():
        order = sorted(range(len(entry["x"])), key=lambda i: entry["x"][i])
        for key in ("x", "y", "err"):
            entry[key] = [entry[key][i] for i in order]
    return series


def render(spec: FigureSpec) -> dict[str, dict]:
    """Draw the figure described by ``spec`` and return its data series."""
    rows = read_summary(spec.input)
    series = build_series(rows, spec)
    if not series:
        raise PlotError("nothing to plot: no usable policy rows")

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ordered = sorted(
        series,
        key=lambda p: (_POLICY_ORDER.index(p) if p in _POLICY_ORDER else 99, p),
    )
    for policy in ordered:
        entry = series[policy]
        color = _COLORS.get(policy)
        ax.plot(entry["x"], entry["y"], marker="o", label=policy, color=color)
        lo = [y - e for y, e in zip(entry["y"], entry["err"])]
        hi = [y + e for y, e in zip(entry["y"], entry["err"])]
        ax.fill_between(entry["x"], lo, hi, alpha=0.2, color=color, linewidth=0)
    ax.set_xlabel("jobs per type" if spec.x_field == "n" else "shortest type mean")
    ax.set_ylabel(
        "mean competitive ratio" if spec.y_mode == "mean_cr" else "mean CR above ftpp"
    )
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.output, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return series
