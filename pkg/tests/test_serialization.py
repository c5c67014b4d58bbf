import csv
import json
import math

import numpy as np
import pytest

from utils.curves import build_flat_core, sample_loop, sample_segment
from utils.errors import DomainError
from utils.hooked import BoundaryReport
from utils.serialization import (
    CURVE_FIELDS,
    to_jsonable,
    write_curve_csv,
    write_curve_json,
    write_json,
    write_probe_csv,
    write_suite_csv,
    write_trajectory_csv,
)
from utils.svg_render import SVG, render_svg


def _read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def count_elements(text, tag):
    return text.count(f"<{tag} ")


def viewbox(text):
    start = text.index('viewBox="') + len('viewBox="')
    return [float(v) for v in text[start:text.index('"', start)].split()]


def test_curve_csv_round_trips_floats(tmp_path):
    curve = sample_loop(4.0, "+", 40)
    rows = _read_rows(write_curve_csv(curve, tmp_path / "loop.csv"))
    assert list(rows[0]) == CURVE_FIELDS
    assert len(rows) == len(curve.s)
    for i in (0, 17, len(rows) - 1):
        assert float(rows[i]["x"]) == curve.x[i]
        assert float(rows[i]["kappa"]) == curve.kappa[i]


def test_curve_json_carries_metadata(tmp_path):
    curve = sample_segment(2.0, 10, p=4.0)
    payload = json.loads(write_curve_json(curve, tmp_path / "segment.json", extra={"note": "x"}).read_text())
    assert payload["metadata"]["length"] == 2.0
    assert payload["metadata"]["energy"] == 0.0
    assert payload["metadata"]["pieces"] == [{"kind": "segment", "start": 0, "stop": 10, "sign": 0}]
    assert payload["note"] == "x"
    assert len(payload["s"]) == 11


def test_json_output_is_byte_stable(tmp_path):
    payload = {"b": np.float64(1.0) / 3.0, "a": [np.int64(2), np.bool_(True)], "c": float("nan")}
    first = write_json(payload, tmp_path / "one.json").read_bytes()
    second = write_json(payload, tmp_path / "two.json").read_bytes()
    assert first == second
    decoded = json.loads(first)
    assert list(decoded) == ["a", "b", "c"]
    assert decoded["c"] is None
    assert decoded["b"] == 1.0 / 3.0


def test_to_jsonable_handles_models_and_arrays():
    report = BoundaryReport(k0=0.0, kL=2.0, wprimeL=1e-9, tol=1e-6, passed=True)
    assert to_jsonable(report)["pass"] is True
    assert to_jsonable(np.array([1.0, math.inf])) == [1.0, None]
    assert to_jsonable((1, "x")) == [1, "x"]


def test_trajectory_rows_leave_first_iterate_blank(tmp_path):
    rows = _read_rows(write_trajectory_csv([3.0, 2.0, 1.5], [(0.25, True), (None, None)], tmp_path / "t.csv"))
    assert [row["iteration"] for row in rows] == ["0", "1", "2"]
    assert rows[0]["bound_slack"] == "" and rows[0]["bound_ok"] == ""
    assert float(rows[1]["bound_slack"]) == 0.25
    assert rows[1]["bound_ok"] == "true"
    assert rows[2]["bound_slack"] == ""


def test_suite_and_probe_tables(tmp_path):
    suite = {"checks": {"beta_oracle": {"status": "pass", "message": "ok"}}}
    assert _read_rows(write_suite_csv(suite, tmp_path / "suite.csv")) == [
        {"check": "beta_oracle", "status": "pass", "message": "ok"}]
    probe = {"seeds": [{"seed": 3, "E_final": 1.5, "sup_dev": 0.01, "iterations": 7, "status": "converged"}]}
    rows = _read_rows(write_probe_csv(probe, tmp_path / "probe.csv"))
    assert rows[0]["seed"] == "3"
    assert float(rows[0]["E_final"]) == 1.5


def test_svg_has_one_path_per_piece(tmp_path, double_loop_spec):
    curve = build_flat_core(double_loop_spec, 50)
    text = render_svg(curve, tmp_path / "core.svg").read_text()
    assert count_elements(text, "path") == len(curve.pieces)
    assert count_elements(text, "circle") == 2
    assert 'data-kind="loop"' in text


def test_svg_viewbox_is_padded(tmp_path):
    curves = [sample_segment(1.0, 10), sample_segment(2.0, 10)]
    text = render_svg(curves, tmp_path / "segments.svg").read_text()
    assert count_elements(text, "circle") == 4
    min_x, min_y, width, height = viewbox(text)
    assert min_x == pytest.approx(-2.0 - 0.1)
    assert min_y == pytest.approx(-0.1)
    assert width == pytest.approx(2.2)
    assert height == pytest.approx(0.2)


def test_empty_svg_cannot_render():
    with pytest.raises(DomainError):
        SVG().render()
