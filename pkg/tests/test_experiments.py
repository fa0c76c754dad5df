"""Experiment loading, presets, runner behavior, CSV/SVG artifacts."""

import math
import os
import xml.etree.ElementTree as ET
from dataclasses import replace

import pytest

from v2xuplink import experiments as ex
from v2xuplink.pointprocess import NetworkParams


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# ---------------------------------------------------------------------------
# unit conversions
# ---------------------------------------------------------------------------

def test_db_round_trips():
    for v in (1e-6, 0.5, 3.0, 12345.6):
        assert math.isclose(ex.db_to_linear(ex.linear_to_db(v)), v, rel_tol=1e-12)
        assert math.isclose(ex.mw_to_dbm(ex.dbm_to_mw(ex.mw_to_dbm(v))), ex.mw_to_dbm(v), rel_tol=1e-12)


def test_noise_power_derivation():
    # -174 dBm/Hz over 10 MHz: -174 + 10*log10(1e7) = -104 dBm
    assert math.isclose(ex.mw_to_dbm(ex.noise_power_mw()), -104.0, abs_tol=1e-9)
    assert math.isclose(ex.noise_power_mw(), 10.0 ** (-10.4), rel_tol=1e-12)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def test_preset_fig4_expansion():
    spec = ex.make_preset_spec("fig4")
    assert spec.kind == "success_sweep"
    assert spec.params.lambda_R == 0.001
    assert spec.params.mu_v == 0.1
    assert spec.params.lambda_b == 2e-5
    assert spec.params.bias_B == 1.0
    assert math.isclose(spec.params.P_v, 1000.0)  # 30 dBm
    assert math.isclose(spec.params.sigma2, 10.0 ** (-10.4))
    assert spec.sweep_parameter == "z_dB"
    assert spec.sweep_values[0] == -20.0 and spec.sweep_values[-1] == 30.0


def test_preset_fig3_is_distance_cdf():
    spec = ex.make_preset_spec("fig3")
    assert spec.kind == "distance_cdf"
    assert spec.params.mu_v == 0.001 and spec.params.lambda_R == 0.005


@pytest.mark.parametrize(
    "name,parameter",
    [("fig5", "mu_v"), ("fig6", "mu_v"), ("fig7", "lambda_R"),
     ("fig8", "lambda_b"), ("fig9", "bias_B")],
)
def test_preset_sweep_parameters(name, parameter):
    spec = ex.make_preset_spec(name)
    assert spec.sweep_parameter == parameter
    assert list(spec.sweep_values) == sorted(spec.sweep_values)
    assert len(spec.sweep_values) >= 5


def test_unknown_preset():
    with pytest.raises(ex.ExperimentSpecError, match="unknown preset"):
        ex.make_preset_spec("fig99")


# ---------------------------------------------------------------------------
# INI loading and validation
# ---------------------------------------------------------------------------

CUSTOM = """
[params]
lambda_R = 0.002
mu_v = 0.05
lambda_b = 2e-5
z_dB = 0

[sweep]
parameter = bias_B
values = 0.1, 1, 10

[sim]
trials = 40
seed = 5
"""


def test_load_custom_spec(tmp_path):
    spec = ex.load_spec(_write(tmp_path, "c.ini", CUSTOM))
    assert spec.sweep_parameter == "bias_B"
    assert spec.sweep_values == (0.1, 1.0, 10.0)
    assert spec.sim.trials == 40
    assert spec.params.z == 1.0


def test_load_preset_with_overrides(tmp_path):
    text = "[experiment]\npreset = fig6\n\n[params]\nlambda_b = 4e-5\n\n[sim]\ntrials = 7\n"
    spec = ex.load_spec(_write(tmp_path, "p.ini", text))
    assert spec.preset == "fig6"
    assert spec.kind == "association_sweep"
    assert spec.params.lambda_b == 4e-5
    assert spec.sim.trials == 7


def test_cli_style_overrides_win(tmp_path):
    spec = ex.load_spec(_write(tmp_path, "c.ini", CUSTOM), trials=3, seed=11, mode="physical")
    assert spec.sim.trials == 3
    assert spec.sim.seed.seed == 11
    assert spec.sim.mode == "physical"


def test_zero_trials_in_file_means_analytic_only(tmp_path):
    spec = ex.load_spec(_write(tmp_path, "c.ini", CUSTOM.replace("trials = 40", "trials = 0")))
    assert spec.sim.trials == 0
    res = ex.run(spec)
    assert res.ok
    assert all(r.cells["p_v2x_mc"] is None for r in res.rows)


def test_missing_file():
    with pytest.raises(ex.ExperimentSpecError, match="cannot read"):
        ex.load_spec("/nonexistent/path.ini")


@pytest.mark.parametrize(
    "mutation,message",
    [
        (("lambda_R = 0.002", "lambda_r = 0.002"), "lambda_r"),
        (("lambda_R = 0.002", "P_v = 30\nlambda_R = 0.002"), "P_v_dBm"),
        (("values = 0.1, 1, 10", "values = 1, 0.1, 10"), "sorted"),
        (("values = 0.1, 1, 10", "values ="), "nonempty"),
        (("parameter = bias_B", "parameter = sigma2"), "sweep parameter"),
        (("mu_v = 0.05", "mu_v = -1"), "params"),
        (("trials = 40", "trials = forty"), "trials"),
    ],
)
def test_named_validation_errors(tmp_path, mutation, message):
    old, new = mutation
    with pytest.raises(ex.ExperimentSpecError, match=message):
        ex.load_spec(_write(tmp_path, "bad.ini", CUSTOM.replace(old, new)))


def test_unknown_section(tmp_path):
    with pytest.raises(ex.ExperimentSpecError, match="unknown section"):
        ex.load_spec(_write(tmp_path, "bad.ini", CUSTOM + "\n[weird]\nx = 1\n"))


def test_missing_required_params(tmp_path):
    with pytest.raises(ex.ExperimentSpecError, match="missing required"):
        ex.load_spec(_write(tmp_path, "bad.ini", "[params]\nlambda_R = 0.1\n"))


# ---------------------------------------------------------------------------
# runner
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_fig4_result():
    spec = ex.make_preset_spec("fig4", trials=150, seed=12)
    return spec, ex.run(spec)


def test_run_shape(small_fig4_result):
    spec, res = small_fig4_result
    assert res.ok
    assert len(res.rows) == len(spec.sweep_values)
    assert res.parameter == "z_dB"
    for row in res.rows:
        assert 0.0 <= row.cells["p_v2x_analytic"] <= 1.0
        assert row.cells["p_v2x_mc"] is not None
        assert row.wall_time >= 0.0


def test_association_sum_per_row(small_fig4_result):
    _, res = small_fig4_result
    for row in res.rows:
        total = row.cells["assoc_v2v_analytic"] + row.cells["assoc_v2b_analytic"]
        assert abs(total - 1.0) < 2e-3


def test_run_analytic_only():
    spec = ex.make_preset_spec("fig4", trials=0)
    res = ex.run(spec)
    assert res.ok
    assert all(r.cells["p_v2x_mc"] is None for r in res.rows)
    assert all(r.cells["p_v2x_analytic"] is not None for r in res.rows)


def test_run_marks_failed_rows_and_continues(monkeypatch):
    spec = ex.make_preset_spec("fig9", trials=0)

    real = ex.analytic.success_v2x

    def sometimes_broken(z, params, quad=None):
        if params.bias_B > 100.0:
            raise RuntimeError("synthetic failure")
        return real(z, params, quad)

    monkeypatch.setattr(ex.analytic, "success_v2x", sometimes_broken)
    res = ex.run(spec)
    assert not res.ok
    failed = [r for r in res.rows if not r.ok]
    assert failed and all("synthetic failure" in r.error for r in failed)
    assert any(r.ok for r in res.rows)


def test_worker_pool_count_invariance(monkeypatch):
    spec = ex.make_preset_spec("fig9", trials=0)
    monkeypatch.setenv("V2X_THREADS", "1")
    res1 = ex.run(spec)
    monkeypatch.setenv("V2X_THREADS", "4")
    res4 = ex.run(spec)
    for a, b in zip(res1.rows, res4.rows):
        assert a.cells == b.cells


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def test_csv_round_trip(tmp_path, small_fig4_result):
    _, res = small_fig4_result
    path = str(tmp_path / "out.csv")
    ex.emit_csv(res, path)
    header, rows = ex.read_csv(path)
    assert header[0] == "z_dB"
    assert "p_v2x_analytic" in header and "p_v2x_mc" in header and "p_v2x_mc_ci" in header
    assert header[-1] == "status"
    assert len(rows) == len(res.rows)
    # full-precision scientific round trip is bit exact
    col = header.index("p_v2x_analytic")
    for text_row, row in zip(rows, res.rows):
        assert float(text_row[col]) == row.cells["p_v2x_analytic"]
        assert float(text_row[0]) == row.value
        assert text_row[-1] == "ok"
    raw = open(path, "rb").read()
    assert raw.endswith(b"\r\n")


def test_csv_byte_identical_rerun(tmp_path):
    spec = ex.make_preset_spec("fig6", trials=60, seed=3)
    a = str(tmp_path / "a.csv")
    b = str(tmp_path / "b.csv")
    ex.emit_csv(ex.run(spec), a)
    ex.emit_csv(ex.run(spec), b)
    assert open(a, "rb").read() == open(b, "rb").read()


def test_csv_header_only_for_empty_result(tmp_path):
    res = ex.SweepResult("success_sweep", "z_dB", ex._ANALYTIC_COLUMNS + ex._MC_COLUMNS, ())
    path = str(tmp_path / "empty.csv")
    ex.emit_csv(res, path)
    header, rows = ex.read_csv(path)
    assert header and rows == []


def test_csv_quotes_error_messages(tmp_path):
    row = ex.RowResult(1.0, {c: None for c in ex._ANALYTIC_COLUMNS + ex._MC_COLUMNS},
                       'boom, with "quotes"', 0, 0.0)
    res = ex.SweepResult("success_sweep", "z_dB",
                         ex._ANALYTIC_COLUMNS + ex._MC_COLUMNS, (row,))
    path = str(tmp_path / "err.csv")
    ex.emit_csv(res, path)
    header, rows = ex.read_csv(path)
    assert rows[0][-1] == 'boom, with "quotes"'


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

def test_svg_well_formed_success_sweep(tmp_path, small_fig4_result):
    _, res = small_fig4_result
    path = str(tmp_path / "plot.svg")
    ex.emit_plot(res, path)
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    body = open(path).read()
    # four analytic series with markers and CI bars for the MC estimates
    assert body.count("<polyline") == 4
    assert "circle" in body
    for label in ("V2X", "C-V2V", "C-V2B", "V2V only"):
        assert label in body


def test_realization_dump_round_trip(tmp_path):
    from v2xuplink.pointprocess import RngSeed, sample_network

    spec = ex.make_preset_spec("fig4")
    real = sample_network(spec.params, 500.0, RngSeed(5).stream(0))
    path = str(tmp_path / "real.json")
    ex.dump_realization(real, path)
    back = ex.load_realization(path)
    assert back.lines == real.lines
    assert back.typical_line_index == real.typical_line_index
    assert (back.vehicle_line == real.vehicle_line).all()
    assert (back.vehicle_t == real.vehicle_t).all()
    assert (back.tx_flags == real.tx_flags).all()
    assert (back.base_stations == real.base_stations).all()


def test_svg_single_row(tmp_path):
    cells = {c: None for c in ex._ANALYTIC_COLUMNS + ex._MC_COLUMNS}
    cells.update(p_v2x_analytic=0.5, p_cv2v_analytic=0.4, p_cv2b_analytic=0.1,
                 p_v2v_only_analytic=0.45, assoc_v2v_analytic=0.6,
                 assoc_v2b_analytic=0.4, p_v2x_mc=0.51, p_v2x_mc_ci=0.02)
    res = ex.SweepResult("success_sweep", "z_dB",
                         ex._ANALYTIC_COLUMNS + ex._MC_COLUMNS,
                         (ex.RowResult(0.0, cells, None, 0, 0.0),))
    path = str(tmp_path / "one.svg")
    ex.emit_plot(res, path)
    ET.parse(path)
    assert "circle" in open(path).read()


def test_svg_distance_cdf(tmp_path):
    spec = ex.make_preset_spec("fig3", trials=80, seed=2)
    res = ex.run(spec)
    path = str(tmp_path / "cdf.svg")
    ex.emit_plot(res, path)
    ET.parse(path)


def test_svg_refuses_empty(tmp_path):
    res = ex.SweepResult("success_sweep", "z_dB",
                         ex._ANALYTIC_COLUMNS + ex._MC_COLUMNS, ())
    with pytest.raises(ValueError):
        ex.emit_plot(res, str(tmp_path / "no.svg"))
