import json
import os

import pytest

from schedlab_plots.render import (
    FigureSpec,
    PlotError,
    build_series,
    read_summary,
    render,
    spec_from_json,
)
from schedlab_plots.cli import main as cli_main

DATA = os.path.join(os.path.dirname(__file__), "data")


def write_summary(path, rows):
    lines = [
        "# generator=numpy-philox4x64 v1",
        "policy,K,n,lambdas,mean_cr,stderr_cr,mean_excess,stderr_excess,count",
    ]
    lines += rows
    path.write_text("\n".join(lines) + "\n")


SAMPLE = [
    "ftpp,2,25,1;0.25,1.62,0.004,0,0.1,400",
    "ftpp,2,100,1;0.25,1.68,0.003,0,0.1,400",
    "rr,2,25,1;0.25,1.97,0.001,30,0.2,400",
    "rr,2,100,1;0.25,1.98,0.001,120,0.2,400",
    "ucb-rr,2,25,1;0.25,1.70,0.004,3,0.2,400",
    "ucb-rr,2,100,1;0.25,1.71,0.003,8,0.2,400",
]


def test_spec_validation(tmp_path):
    with pytest.raises(PlotError):
        FigureSpec(input="x", x_field="k", y_mode="mean_cr", log_y=False, output="y")
    with pytest.raises(PlotError):
        FigureSpec(input="x", x_field="n", y_mode="median", log_y=False, output="y")
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"input": "a", "x_field": "n"}))
    with pytest.raises(PlotError):
        spec_from_json(spec_path)


def test_read_summary_skips_comments(tmp_path):
    path = tmp_path / "summary.csv"
    write_summary(path, SAMPLE)
    rows = read_summary(path)
    assert len(rows) == 6
    assert rows[0]["lambda1"] == 1.0
    assert rows[0]["n"] == 25


def test_read_summary_rejects_empty_and_malformed(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# generator=x\n")
    with pytest.raises(PlotError):
        read_summary(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(PlotError):
        read_summary(bad)


def test_build_series_mean_cr_mode(tmp_path):
    path = tmp_path / "summary.csv"
    write_summary(path, SAMPLE)
    spec = FigureSpec(str(path), "n", "mean_cr", False, str(tmp_path / "o.png"))
    series = build_series(read_summary(path), spec)
    assert set(series) == {"ftpp", "rr", "ucb-rr"}
    assert series["ftpp"]["x"] == [25, 100]
    assert series["ftpp"]["y"] == [1.62, 1.68]


def test_build_series_excess_mode_drops_ftpp(tmp_path):
    path = tmp_path / "summary.csv"
    write_summary(path, SAMPLE)
    spec = FigureSpec(str(path), "n", "excess_vs_ftpp", True, str(tmp_path / "o.png"))
    series = build_series(read_summary(path), spec)
    assert set(series) == {"rr", "ucb-rr"}
    assert series["rr"]["y"][0] == pytest.approx(1.97 - 1.62)


def test_excess_mode_requires_ftpp(tmp_path):
    path = tmp_path / "summary.csv"
    write_summary(path, SAMPLE[2:])
    spec = FigureSpec(str(path), "n", "excess_vs_ftpp", True, str(tmp_path / "o.png"))
    with pytest.raises(PlotError):
        build_series(read_summary(path), spec)


def test_render_writes_png_deterministically(tmp_path):
    path = tmp_path / "summary.csv"
    write_summary(path, SAMPLE)
    out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
    s1 = render(FigureSpec(str(path), "n", "mean_cr", False, str(out1)))
    s2 = render(FigureSpec(str(path), "n", "mean_cr", False, str(out2)))
    assert out1.read_bytes() == out2.read_bytes()
    assert s1 == s2
    assert out1.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_cli_roundtrip_and_error_exit(tmp_path, capsys):
    path = tmp_path / "summary.csv"
    write_summary(path, SAMPLE)
    out = tmp_path / "fig.png"
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(
        json.dumps(
            {
                "input": str(path),
                "x_field": "n",
                "y_mode": "mean_cr",
                "log_y": False,
                "output": str(out),
            }
        )
    )
    assert cli_main(["--spec", str(spec_path)]) == 0
    assert out.exists()

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    out2 = tmp_path / "fig2.png"
    spec_path.write_text(
        json.dumps(
            {
                "input": str(empty),
                "x_field": "n",
                "y_mode": "mean_cr",
                "log_y": False,
                "output": str(out2),
            }
        )
    )
    assert cli_main(["--spec", str(spec_path)]) == 1
    assert not out2.exists()  # error exits write nothing
