"""Command-line front end: configuration loading, exit codes, CSV and
SVG outputs, reproducibility."""

import argparse
import csv

import numpy as np
import pytest

from galbrunhdg import cli
from galbrunhdg.cli import (
    EXIT_CHECK,
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_SOLVER,
    check_rows,
    load_config,
    main,
)
from galbrunhdg.experiments import (
    CSV_COLUMNS,
    ConfigError,
    ResultRow,
    RunConfig,
    write_csv,
)
from galbrunhdg.solver import SingularMatrixError


def _ns(**kw):
    base = dict(
        experiment=None, config=None, k=None, levels=None, method=None,
        alpha=None, conv_mode=None, lam=None, preset=None, mach=None,
        solar_csv=None, out=None, svg=None, check=False,
    )
    base.update(kw)
    return argparse.Namespace(**base)


def _row(**kw):
    base = dict(
        L=0, order=1, method="full", lamb=None, Mach=0.0, wxerror=0.1,
        ndofs=100, ncdofs=40, nze=500, eoc=None, runtime_s=0.01,
        residual=1e-12,
    )
    base.update(kw)
    return ResultRow(**base)


# ---- configuration -------------------------------------------------------


def test_load_config_from_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        'experiment = "convergence"\nk = 2\nlevels = 3\n'
        'method = "reduced"\nalpha = 50.0\n'
    )
    cfg = load_config(_ns(config=str(path)))
    assert cfg.experiment == "convergence"
    assert cfg.k == 2 and cfg.levels == 3
    assert cfg.method == "reduced" and cfg.alpha == 50.0


def test_flags_override_toml(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('experiment = "convergence"\nk = 2\n')
    cfg = load_config(_ns(config=str(path), k=3, levels=2))
    assert cfg.k == 3 and cfg.levels == 2


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(_ns())  # no experiment anywhere
    with pytest.raises(ConfigError):
        load_config(_ns(config=str(tmp_path / "missing.toml"),
                        experiment="convergence"))
    bad = tmp_path / "bad.toml"
    bad.write_text("experiment = [unclosed\n")
    with pytest.raises(ConfigError):
        load_config(_ns(config=str(bad)))
    unknown = tmp_path / "unknown.toml"
    unknown.write_text('experiment = "convergence"\nbogus_key = 1\n')
    with pytest.raises(ConfigError):
        load_config(_ns(config=str(unknown)))


def test_solar_experiment_defaults_preset():
    cfg = load_config(_ns(experiment="solar", solar_csv="model.csv"))
    assert cfg.preset == "solar"


def test_validate_rejections():
    good = dict(experiment="convergence")
    for bad in (
        dict(experiment="nope"),
        dict(method="other"),
        dict(k=0),
        dict(k=7),
        dict(method="reduced", k=1),
        dict(alpha=-1.0),
        dict(lam=0.0),
        dict(conv_mode="upwind"),
        dict(levels=0),
        dict(levels=9),
        dict(preset="mystery"),
        dict(experiment="solar", preset="solar"),  # no CSV
        dict(experiment="solar", solar_csv="m.csv"),  # preset mismatch
        dict(preset="solar"),  # experiment mismatch
        dict(experiment="mach", mach_schedule=(0.0, 0.5)),
        dict(mach=-0.1),
        dict(mach=2.0),
        dict(quad_margin=-1),
    ):
        with pytest.raises(ConfigError):
            RunConfig(**{**good, **bad}).validate()
    RunConfig(**good).validate()


def test_schedule_defaults():
    assert RunConfig("mach").schedule() == (0.05, 0.25, 0.45)
    assert RunConfig("sip").schedule() == (0.45,)
    assert RunConfig("sip", mach=0.3).schedule() == (0.3,)
    assert RunConfig("convergence").schedule() == ()
    assert RunConfig(
        "mach", mach_schedule=(0.1, 0.2)
    ).schedule() == (0.1, 0.2)


def test_config_hash_ignores_out():
    a = RunConfig("convergence", out="a.csv").config_hash()
    b = RunConfig("convergence", out="b.csv").config_hash()
    c = RunConfig("convergence", k=2).config_hash()
    assert a == b
    assert a != c
    assert len(a) == 16 and int(a, 16) >= 0


# ---- threshold checks ----------------------------------------------------


def test_check_rows_convergence():
    cfg = RunConfig("convergence", k=2)
    ok = [_row(eoc=None), _row(L=1, eoc=2.0)]
    assert check_rows(cfg, ok) == []
    assert check_rows(cfg, [_row(eoc=None), _row(L=1, eoc=1.2)])
    assert check_rows(cfg, [_row(eoc=None), _row(L=1, eoc=None)])


def test_check_rows_mach():
    cfg = RunConfig("mach")
    ok = [_row(Mach=0.25, wxerror=0.5),
          _row(Mach=0.25, method="proj", wxerror=0.1)]
    assert check_rows(cfg, ok) == []
    bad = [_row(Mach=0.25, wxerror=5.0),
           _row(Mach=0.25, method="proj", wxerror=0.1)]
    assert check_rows(cfg, bad)
    # above the checked range the ratio is not enforced
    high = [_row(Mach=0.45, wxerror=5.0),
            _row(Mach=0.45, method="proj", wxerror=0.1)]
    assert check_rows(cfg, high) == []


def test_check_rows_sip():
    cfg = RunConfig("sip")
    rows = [
        _row(L=1, method="lifting", wxerror=0.1),
        _row(L=1, method="sip", lamb=1.0, wxerror=0.2),
        _row(L=1, method="sip", lamb=10.0, wxerror=0.4),
    ]
    assert check_rows(cfg, rows) == []
    rows[0].wxerror = 1.0
    assert check_rows(cfg, rows)
    flat = [
        _row(L=1, method="lifting", wxerror=0.1),
        _row(L=1, method="sip", lamb=1.0, wxerror=0.2),
        _row(L=1, method="sip", lamb=10.0, wxerror=0.2),
    ]
    assert check_rows(cfg, flat)


def test_check_rows_solar():
    cfg = RunConfig("solar", preset="solar", solar_csv="m.csv")
    assert check_rows(cfg, [_row(Mach=0.05, residual=1e-10)]) == []
    assert check_rows(cfg, [_row(Mach=0.05, residual=1e-6)])


# ---- end-to-end runs -----------------------------------------------------


def _read_csv(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    meta = [ln for ln in lines if ln.startswith("# ")]
    body = [ln for ln in lines if not ln.startswith("# ")]
    rows = list(csv.reader(body))
    return meta, rows


def test_main_convergence_writes_csv(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    code = main([
        "convergence", "--k", "1", "--levels", "2", "--out", str(out),
    ])
    assert code == EXIT_OK
    meta, rows = _read_csv(out)
    assert meta[0].startswith("# galbrunhdg ")
    assert meta[1].startswith("# config ")
    assert meta[2] == "# quad_margin 4"
    assert meta[3] == "# solver splu/COLAMD"
    assert rows[0] == list(CSV_COLUMNS)
    assert len(rows) == 3  # header + one row per level
    # levels are the first column, one line echoed per row
    assert [r[0] for r in rows[1:]] == ["0", "1"]
    echoed = capsys.readouterr().out.strip().splitlines()
    assert len(echoed) == 2


def test_repeat_runs_identical_up_to_runtime(tmp_path):
    args = ["convergence", "--k", "1", "--levels", "2"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    meta_a, rows_a = _read_csv(a)
    meta_b, rows_b = _read_csv(b)
    assert meta_a == meta_b
    stamp = CSV_COLUMNS.index("runtime_s")
    for ra, rb in zip(rows_a, rows_b):
        ra[stamp] = rb[stamp] = ""
        assert ra == rb


def test_main_writes_svg(tmp_path):
    out = tmp_path / "conv.csv"
    svg = tmp_path / "conv.svg"
    code = main([
        "convergence", "--k", "1", "--levels", "2",
        "--out", str(out), "--svg", str(svg),
    ])
    assert code == EXIT_OK
    text = svg.read_text()
    assert text.startswith("<svg ")
    assert "polyline" in text


def test_main_exit_codes(tmp_path, monkeypatch, capsys):
    assert main([]) == EXIT_CONFIG
    assert main(["solar"]) == EXIT_CONFIG  # missing radial CSV
    assert "configuration error" in capsys.readouterr().err

    def boom(config):
        raise SingularMatrixError("skeleton matrix is singular")

    monkeypatch.setattr(cli, "run", boom)
    assert main(["convergence"]) == EXIT_SOLVER
    assert "solver failure" in capsys.readouterr().err

    def flat(config):
        return [_row(eoc=None), _row(L=1, eoc=0.1)]

    monkeypatch.setattr(cli, "run", flat)
    assert main(["convergence", "--check"]) == EXIT_CHECK
    assert "check failed" in capsys.readouterr().err
    assert main(["convergence"]) == EXIT_OK


def test_main_check_passes_on_real_run(tmp_path):
    code = main([
        "convergence", "--k", "1", "--levels", "2", "--check",
        "--out", str(tmp_path / "c.csv"),
    ])
    assert code == EXIT_OK


def test_write_csv_roundtrip(tmp_path):
    cfg = RunConfig("convergence", out=None)
    rows = [_row(), _row(L=1, eoc=1.5, lamb=10.0)]
    path = tmp_path / "rows.csv"
    write_csv(rows, cfg, path)
    meta, parsed = _read_csv(path)
    assert len(meta) == 4
    assert parsed[0] == list(CSV_COLUMNS)
    rec = parsed[2]
    assert rec[CSV_COLUMNS.index("lamb")] == "10"
    assert rec[CSV_COLUMNS.index("eoc")] == "1.500000"
    assert float(rec[CSV_COLUMNS.index("wxerror")]) == pytest.approx(0.1)
