"""Acceptance for the rendering component: reproduce the two figure layouts
from real experiment-summary CSVs and check the plotted series against
golden files."""
import json
import os

import pytest

from schedlab_plots.render import FigureSpec, render

DATA = os.path.join(os.path.dirname(__file__), "data")


def load_golden(name):
    with open(os.path.join(DATA, name)) as fh:
        return json.load(fh)


def report(label, ok, detail):
    print(f"criterion {label}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_11_figure1_layout(tmp_path):
    out = tmp_path / "fig1.png"
    spec = FigureSpec(
        input=os.path.join(DATA, "fig1_summary.csv"),
        x_field="n",
        y_mode="mean_cr",
        log_y=False,
        output=str(out),
    )
    series = render(spec)
    golden = load_golden("golden_fig1.json")
    ok = out.exists() and out.stat().st_size > 0
    ok &= set(series) == {"ftpp", "rr", "etc-u", "ucb-u", "etc-rr", "ucb-rr"}
    ok &= all(series[p]["x"] == [25, 100, 400] for p in series)
    ok &= series == golden
    assert report(
        "11/fig1", ok, f"{len(series)} curves over n grid, series match golden"
    )


def test_criterion_11_figure2_layout(tmp_path):
    out = tmp_path / "fig2.png"
    spec = FigureSpec(
        input=os.path.join(DATA, "fig2_summary.csv"),
        x_field="lambda1",
        y_mode="excess_vs_ftpp",
        log_y=True,
        output=str(out),
    )
    series = render(spec)
    golden = load_golden("golden_fig2.json")
    ok = out.exists() and out.stat().st_size > 0
    ok &= set(series) == {"etc-u", "ucb-u", "etc-rr", "ucb-rr"}
    ok &= all(series[p]["x"] == [0.02, 0.5] for p in series)
    # preemptive curves sit below non-preemptive ones at the small mean
    small = {p: series[p]["y"][0] for p in series}
    ok &= max(small["etc-rr"], small["ucb-rr"]) < min(small["etc-u"], small["ucb-u"])
    ok &= spec.log_y
    ok &= series == golden
    assert report(
        "11/fig2",
        ok,
        "log-scale excess layout, preemptive below non-preemptive at lambda1=0.02, "
        "series match golden",
    )
