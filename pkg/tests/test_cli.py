"""Command-line driver: artifacts, config layering, exit codes, reproducibility."""

import json

import numpy as np
import pytest

from hydrovarx.cli import _parse_range, main, parse_artifact_header, parse_grid
from hydrovarx.errors import ConfigError
from hydrovarx.metrics import METRIC_ORDER

GRID = "0.5:50:6"


@pytest.fixture()
def synth_csv(tmp_path):
    out = tmp_path / "sim"
    rc = main(["simulate", "--out", str(out), "--n", "300", "--k", "1",
               "--m", "1", "--p", "1", "--s", "1", "--phi", "0.5",
               "--beta", "0.8", "--noise-sd", "0.3", "--seed", "7"])
    assert rc == 0
    return out / "synth.csv"


def _fit(synth_csv, out, extra=()):
    return main(["fit", "--input", str(synth_csv), "--out", str(out),
                 "--target", "Y1", "--p", "2", "--s", "1", "--grid", GRID,
                 *extra])


def test_simulate_writes_data_and_truth(synth_csv):
    truth_path = synth_csv.parent / "truth.json"
    assert synth_csv.exists() and truth_path.exists()
    truth = json.loads(truth_path.read_text())["truth"]
    assert truth["support"] == ["Y1L1", "x11"]
    assert truth["seed"] == 7
    header = synth_csv.read_text().splitlines()[0]
    assert header == "Date,Y1,x1"


def test_fit_then_evaluate_roundtrip(synth_csv, tmp_path):
    fit_dir = tmp_path / "fit"
    assert _fit(synth_csv, fit_dir) == 0
    for name in ("model.json", "lambda_path.csv", "coefficients.csv",
                 "config.json"):
        assert (fit_dir / name).exists()

    eval_dir = tmp_path / "eval"
    rc = main(["evaluate", "--model", str(fit_dir / "model.json"),
               "--input", str(synth_csv), "--out", str(eval_dir),
               "--target", "Y1", "--grid", GRID])
    assert rc == 0
    for name in ("metrics.csv", "forecast.csv", "regression_line.json",
                 "config.json"):
        assert (eval_dir / name).exists()

    rows = [line.split(",") for line in
            (eval_dir / "metrics.csv").read_text().splitlines()
            if line and not line.startswith("#")]
    assert rows[0] == ["metric", "value", "flag"]
    table = {r[0]: r[1] for r in rows[1:]}
    assert set(table) == set(METRIC_ORDER)
    assert float(table["NSE"]) > 0.5  # strong AR+exog signal must be learnable

    reg = json.loads((eval_dir / "regression_line.json").read_text())
    assert np.isfinite(reg["regression_line"]["slope"])


def test_artifact_headers_embed_resolved_config(synth_csv, tmp_path):
    fit_dir = tmp_path / "fit"
    _fit(synth_csv, fit_dir)
    for name in ("lambda_path.csv", "coefficients.csv"):
        cfg = parse_artifact_header(fit_dir / name)
        assert cfg["p"] == 2 and cfg["s"] == 1
        assert cfg["target"] == ["Y1"]
        assert cfg["grid"] == GRID
        assert cfg["input"] == str(synth_csv)
    doc = json.loads((fit_dir / "config.json").read_text())
    assert doc["command"] == "fit"
    assert doc["config"] == parse_artifact_header(fit_dir / "lambda_path.csv")


def test_reruns_are_byte_identical(synth_csv, tmp_path):
    fit_dir = tmp_path / "fit"
    names = ("model.json", "lambda_path.csv", "coefficients.csv", "config.json")
    _fit(synth_csv, fit_dir)
    first = {n: (fit_dir / n).read_bytes() for n in names}
    _fit(synth_csv, fit_dir)
    assert all((fit_dir / n).read_bytes() == first[n] for n in names)

    eval_dir = tmp_path / "eval"
    eval_args = ["evaluate", "--model", str(fit_dir / "model.json"),
                 "--input", str(synth_csv), "--out", str(eval_dir),
                 "--target", "Y1", "--grid", GRID]
    assert main(eval_args) == 0
    snap = {p.name: p.read_bytes() for p in eval_dir.iterdir()}
    assert main(eval_args) == 0
    assert {p.name: p.read_bytes() for p in eval_dir.iterdir()} == snap


def test_config_errors_exit_2_before_reading_input(tmp_path, capsys):
    # input path does not exist, but the bad order must be caught first
    rc = main(["fit", "--input", str(tmp_path / "ghost.csv"),
               "--out", str(tmp_path / "o"), "--target", "Y", "--p", "0"])
    assert rc == 2
    assert "hydrovarx fit: setup:" in capsys.readouterr().err

    rc = main(["fit", "--input", str(tmp_path / "ghost.csv"),
               "--out", str(tmp_path / "o"), "--target", "Y",
               "--grid", "50:5:3"])
    assert rc == 2


def test_missing_input_exits_3(tmp_path, capsys):
    rc = main(["fit", "--input", str(tmp_path / "ghost.csv"),
               "--out", str(tmp_path / "o"), "--target", "Y", "--grid", GRID])
    assert rc == 3
    assert "io" in capsys.readouterr().err


def test_unknown_column_exits_3(synth_csv, tmp_path, capsys):
    rc = main(["fit", "--input", str(synth_csv), "--out", str(tmp_path / "o"),
               "--target", "NoSuch", "--grid", GRID])
    assert rc == 3
    assert "load" in capsys.readouterr().err


def test_non_finite_cell_exits_4(tmp_path):
    bad = tmp_path / "bad.csv"
    lines = ["Date,Y"] + [f"2001-01-{d:02d},{v}" for d, v in
                          zip(range(1, 11), [1, 2, "inf", 4, 5, 6, 7, 8, 9, 10])]
    bad.write_text("\n".join(lines) + "\n")
    rc = main(["fit", "--input", str(bad), "--out", str(tmp_path / "o"),
               "--target", "Y", "--grid", GRID])
    assert rc == 4


def test_evaluate_rejects_mismatched_columns(synth_csv, tmp_path, capsys):
    fit_dir = tmp_path / "fit"
    _fit(synth_csv, fit_dir)
    rc = main(["evaluate", "--model", str(fit_dir / "model.json"),
               "--input", str(synth_csv), "--out", str(tmp_path / "e"),
               "--target", "Y1", "--grid", GRID, "--drop", "x1"])
    assert rc == 3
    assert "model-only" in capsys.readouterr().err


def test_config_file_with_flag_override(synth_csv, tmp_path):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({
        "input": str(synth_csv), "out": str(tmp_path / "fit"),
        "target": ["Y1"], "p": 3, "s": 1, "grid": GRID}))
    rc = main(["fit", "--config", str(cfg_path), "--p", "2"])
    assert rc == 0
    cfg = parse_artifact_header(tmp_path / "fit" / "lambda_path.csv")
    assert cfg["p"] == 2      # flag beats the file
    assert cfg["s"] == 1      # file beats the default


def test_unknown_config_key_exits_2(synth_csv, tmp_path, capsys):
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps({
        "input": str(synth_csv), "out": str(tmp_path / "o"),
        "target": ["Y1"], "lambda_grid": GRID}))
    assert main(["fit", "--config", str(cfg_path)]) == 2
    assert "lambda_grid" in capsys.readouterr().err


def test_missing_required_options_exit_2(capsys):
    assert main(["fit", "--target", "Y"]) == 2
    err = capsys.readouterr().err
    assert "--input" in err and "--out" in err


def test_ablate_writes_paired_artifacts(synth_csv, tmp_path):
    out = tmp_path / "abl"
    rc = main(["ablate", "--input", str(synth_csv), "--out", str(out),
               "--target", "Y1", "--p", "1", "--s", "1", "--grid", GRID,
               "--drop", "x1"])
    assert rc == 0
    for name in ("metrics_full.csv", "metrics_reduced.csv",
                 "metrics_delta.csv", "config.json"):
        assert (out / name).exists()
    rows = [line.split(",") for line in
            (out / "metrics_delta.csv").read_text().splitlines()
            if line and not line.startswith("#")]
    assert rows[0] == ["metric", "full", "reduced", "delta"]
    assert [r[0] for r in rows[1:]] == list(METRIC_ORDER)
    table = {r[0]: r for r in rows[1:]}
    # x1 carries signal, so the reduced model must lose accuracy
    assert float(table["NSE"][2]) < float(table["NSE"][1])
    full_v, red_v, delta = (float(x) for x in table["MSE"][1:])
    assert delta == pytest.approx(red_v - full_v, abs=1e-9)


def test_select_order_scan(synth_csv, tmp_path):
    out = tmp_path / "ord"
    rc = main(["select-order", "--input", str(synth_csv), "--out", str(out),
               "--target", "Y1", "--grid", GRID,
               "--p-range", "1:2", "--s-range", "0:1"])
    assert rc == 0
    text = (out / "order_scan.csv").read_text().splitlines()
    chosen = [l for l in text if l.startswith("# chosen_")]
    assert len(chosen) == 2
    rows = [l for l in text if l and not l.startswith("#")]
    assert rows[0] == "p,s,bic,lambda"
    assert len(rows) == 1 + 4  # header + 2x2 candidates


def test_simulate_rejects_wrong_phi_count(tmp_path, capsys):
    rc = main(["simulate", "--out", str(tmp_path / "s"), "--n", "50",
               "--p", "2", "--phi", "0.5"])
    assert rc == 2
    assert "p*k*k" in capsys.readouterr().err


def test_parse_grid_forms():
    np.testing.assert_allclose(parse_grid("10:500:24"),
                               np.geomspace(10, 500, 24))
    np.testing.assert_allclose(parse_grid("1:100:5:linear"),
                               np.linspace(1, 100, 5))
    np.testing.assert_allclose(parse_grid("7:7:1"), [7.0])
    for bad in ("5:1:3", "1:10:0", "a:b:c", "1:10:5:cubic", "0:10:3:log", "1:2"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_parse_order_ranges():
    assert _parse_range("1:4") == [1, 2, 3, 4]
    assert _parse_range("1,3,7") == [1, 3, 7]
    with pytest.raises(ConfigError):
        _parse_range("4:1")
    with pytest.raises(ConfigError):
        _parse_range("one:two")
