"""Sweep driver: config resolution, CSV/manifest output, exit codes."""
import json

import numpy as np
import pytest

from nanojunction.cli import (
    COLUMNS,
    RcSettings,
    SweepSpec,
    build_parser,
    main,
    point_params,
    run_sweep,
)
from nanojunction.model import regime_params
from nanojunction.thermo import transport_report


def _spec(**kw):
    base = dict(methods=("wcme",), regime=2, swept="V", start=0.0, stop=0.2,
                points=3)
    base.update(kw)
    return SweepSpec(**base)


def test_grid_endpoints_inclusive():
    lin = _spec(points=5).grid()
    assert lin[0] == 0.0 and lin[-1] == 0.2 and len(lin) == 5
    log = _spec(start=0.1, stop=1000.0, points=5, log=True).grid()
    assert log[0] == pytest.approx(0.1) and log[-1] == pytest.approx(1000.0)
    assert np.allclose(np.diff(np.log(log)), np.log(10.0))


def test_point_params_routes_the_swept_variable():
    assert point_params(_spec(swept="lambda"), 7.5).lam == 7.5
    assert point_params(_spec(swept="V"), 0.3).V == pytest.approx(0.3)
    p1 = point_params(_spec(regime=1, swept="beta_hot"), 0.05)
    assert p1.beta_L == 0.05 and p1.beta_ph == 1.0
    p2 = point_params(_spec(regime=2, swept="beta_hot"), 0.05)
    assert p2.beta_ph == 0.05 and p2.beta_L == 1.0
    pm = point_params(_spec(methods=("rcme",), swept="M"), 12.0)
    assert pm == regime_params(2)


@pytest.mark.parametrize("bad", [
    dict(methods=()),
    dict(methods=("wcme", "secular")),
    dict(regime=3),
    dict(swept="voltage"),
    dict(points=0),
    dict(log=True, start=-1.0, stop=1.0),
    dict(methods=("wcme", "rcme"), swept="M"),
    dict(workers=0),
    dict(model={"bogus": 1.0}),
])
def test_spec_validation_rejects(bad):
    with pytest.raises(ValueError):
        _spec(**bad).validate()


def test_config_file_merges_under_flags(tmp_path):
    ini = tmp_path / "sweep.ini"
    ini.write_text(
        "[sweep]\n"
        "method = wcme, rcme\n"
        "regime = 2\n"
        "sweep = lambda\n"
        "from = 0.1\n"
        "to = 10\n"
        "points = 4\n"
        "log = yes\n"
        "out = run.csv\n"
        "[rc]\n"
        "levels = 6\n"
        "[model]\n"
        "beta_R = 0.9\n"
    )
    from nanojunction.cli import _spec_from_sources
    args = build_parser().parse_args([str(ini), "--points", "7",
                                      "--method", "rcme"])
    spec = _spec_from_sources(args)
    assert spec.methods == ("rcme",)          # flag wins
    assert spec.points == 7                   # flag wins
    assert spec.log and spec.start == 0.1 and spec.stop == 10.0
    assert spec.out == "run.csv"
    assert spec.rc == RcSettings(levels=6)
    assert spec.model == {"beta_R": 0.9}


def test_flags_alone_are_sufficient(tmp_path):
    out = tmp_path / "v.csv"
    code = main(["--method", "wcme", "--regime", "2", "--sweep", "V",
                 "--from", "0", "--to", "0.1", "--points", "2",
                 "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(COLUMNS)
    assert len(lines) == 3
    assert all(len(line.split(",")) == len(COLUMNS) for line in lines)


def test_csv_cells_roundtrip_and_match_direct_solve(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["--method", "wcme", "--regime", "2", "--sweep", "V",
                 "--from", "0.05", "--to", "0.1", "--points", "2",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    for V, line in zip((0.05, 0.1), lines[1:]):
        cells = dict(zip(COLUMNS, line.split(",")))
        rep = transport_report(regime_params(2).with_bias(V), "wcme", 2)
        assert float(cells["c1"]) == rep.c1           # .17g is lossless
        assert float(cells["eta"]) == rep.eta
        assert cells["converged"] == "true" and cells["M"] == ""


def test_repeat_runs_are_byte_identical(tmp_path):
    args = ["--method", "wcme,rcme", "--regime", "2", "--sweep", "lambda",
            "--from", "1", "--to", "3", "--points", "2", "--rc-levels", "6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_stalled_engine_leaves_ratio_cells_empty(tmp_path):
    out = tmp_path / "stall.csv"
    assert main(["--method", "wcme", "--regime", "2", "--sweep", "V",
                 "--from", "1.9", "--to", "2.0", "--points", "2",
                 "--out", str(out)]) == 0
    for line in out.read_text().splitlines()[1:]:
        cells = dict(zip(COLUMNS, line.split(",")))
        assert cells["eta"] == ""
        assert cells["converged"] == "true"
        assert float(cells["c1"]) < 0.0


def test_truncation_sweep_reports_each_level(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["--method", "rcme", "--regime", "2", "--sweep", "M",
                 "--from", "4", "--to", "8", "--points", "2",
                 "--out", str(out)]) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
    assert [r[COLUMNS.index("M")] for r in rows] == ["4", "8"]
    c1 = [float(r[COLUMNS.index("c1")]) for r in rows]
    assert all(np.isfinite(c1))


def test_workers_do_not_change_the_rows():
    spec = _spec(points=3)
    serial, f1 = run_sweep(spec)
    parallel, f2 = run_sweep(_spec(points=3, workers=2))
    assert serial == parallel
    assert f1 == [] and f2 == []


def test_manifest_records_environment(tmp_path):
    import scipy
    import nanojunction
    out = tmp_path / "v.csv"
    assert main(["--method", "wcme", "--regime", "1", "--sweep", "V",
                 "--from", "0", "--to", "0.1", "--points", "2",
                 "--out", str(out)]) == 0
    manifest = json.loads((tmp_path / "v.csv.manifest.json").read_text())
    assert manifest["versions"]["numpy"] == np.__version__
    assert manifest["versions"]["scipy"] == scipy.__version__
    assert manifest["versions"]["nanojunction"] == nanojunction.__version__
    assert manifest["parameters"]["points"] == 2
    assert manifest["timings"]["points"] == 2
    assert manifest["timings"]["failed_points"] == 0


def test_bad_invocations_exit_2(tmp_path):
    assert main([]) == 2                                  # nothing specified
    assert main(["--method", "secular", "--regime", "2", "--sweep", "V",
                 "--from", "0", "--to", "1", "--points", "2"]) == 2
    assert main(["--method", "wcme", "--regime", "2", "--sweep", "M",
                 "--from", "4", "--to", "8", "--points", "2"]) == 2
    assert main([str(tmp_path / "missing.ini")]) == 2


def test_unsolvable_points_fail_soft(tmp_path, capsys):
    out = tmp_path / "bad.csv"
    code = main(["--method", "wcme", "--regime", "1", "--sweep", "beta_hot",
                 "--from", "-1", "--to", "-0.5", "--points", "2",
                 "--out", str(out)])
    assert code == 1                                      # every point failed
    assert "point failed" in capsys.readouterr().err
    for line in out.read_text().splitlines()[1:]:
        cells = dict(zip(COLUMNS, line.split(",")))
        assert cells["converged"] == "false" and cells["c1"] == ""
