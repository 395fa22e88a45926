import csv

import numpy as np
import pytest

from sicode import cli, harness
from sicode.checks import ordering_points
from sicode.encoder import SiConfig
from sicode.harness import (CSV_FIELDS, ExperimentSpec, ResultRow, dump_spec, load_spec, read_rows, report_rate,
                            run_experiment, series, trial_seed)

SMALL = dict(m=4, s=2, d=25, L=4, t1=(0, 1, 2, 3), t2=(3, 2, 1, 0), trials=2, record_timing=False)

CONFIG = """\
# small sweep
scheme = si, marker8
m = 4
s = 2
d = 25
L = 4
t1 = 0, 1, 2, 3
t2 = 3, 2, 1, 0
p_ids = 0.0, 0.05
p_e = 0.0
trials = 2
record_timing = false
"""


def row(scheme, p_ids, p_e, errs, bits=1000):
    return ResultRow(scheme, p_ids, p_e, 1, bits, errs, errs / bits, 0, 0.0, 1.0, 0.0, 0)


def test_report_rate():
    cfg = SiConfig(91, 1, 1, 91, tuple(range(9)) + (9,) * 82, tuple(range(9)) + (9,) * 82)
    assert report_rate(cfg, 0.5, 0.5) == pytest.approx(0.91)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(schemes=("bogus",))
    with pytest.raises(ValueError):
        ExperimentSpec(p_ids=(1.5,))
    with pytest.raises(ValueError):
        ExperimentSpec(trials=0)
    with pytest.raises(ValueError):
        ExperimentSpec(t1=(0, 1, 2))


def test_scheme_rates():
    spec = ExperimentSpec(schemes=("si", "naive", "marker8", "marker23"))
    assert spec.rate("si", 0.5, 0.5) == pytest.approx(20 / 29)
    assert spec.rate("naive", 0.5, 0.5) == 1
    assert spec.rate("marker8", 0.5, 0.5) == pytest.approx(100 / 124)
    assert spec.column_length("marker23") == 108


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG)
    spec = load_spec(path)
    assert spec.schemes == ("si", "marker8")
    assert spec.p_ids == (0.0, 0.05) and spec.t2 == (3, 2, 1, 0)
    assert spec.record_timing is False
    assert load_spec(path, seed=9, workers=None).seed == 9
    again = tmp_path / "again.cfg"
    again.write_text(dump_spec(spec))
    assert load_spec(again) == spec


def test_config_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("colour = blue\n")
    with pytest.raises(ValueError):
        load_spec(path)
    path.write_text("scheme = si, turbo\n")
    with pytest.raises(ValueError):
        load_spec(path)


def test_trial_seed_depends_on_grid_and_trial_only():
    a = trial_seed(0, 0.1, 0.0, 3)
    assert a == trial_seed(0, 0.1, 0.0, 3)
    assert len({a, trial_seed(0, 0.1, 0.0, 4), trial_seed(0, 0.2, 0.0, 3), trial_seed(1, 0.1, 0.0, 3)}) == 4


def test_noiseless_points_have_zero_ber():
    spec = ExperimentSpec(schemes=("si", "naive", "marker8", "marker23"), **SMALL)
    rows = run_experiment(spec)
    assert all(r.ber == 0 and r.trials == 2 for r in rows)
    assert all(r.total_bits == 2 * 2 * spec.L * spec.N for r in rows)


def test_stopping_rule():
    spec = ExperimentSpec(schemes=("naive",), p_ids=(0.3,), min_bit_errors=1, **{**SMALL, "trials": 5})
    r = run_experiment(spec)[0]
    assert r.trials == 1 and r.bit_errors >= 1


def test_csv_is_deterministic(tmp_path):
    spec = ExperimentSpec(schemes=("si", "naive"), p_ids=(0.0, 0.1), p_e=(0.0, 0.2), **SMALL)
    run_experiment(spec, tmp_path / "a", plot=False)
    run_experiment(spec, tmp_path / "b", plot=False)
    a = (tmp_path / "a" / "results.csv").read_bytes()
    assert a == (tmp_path / "b" / "results.csv").read_bytes()
    with open(tmp_path / "a" / "results.csv", newline="") as fh:
        assert tuple(next(csv.reader(fh))) == CSV_FIELDS
    rows = read_rows(tmp_path / "a" / "results.csv")
    assert len(rows) == 8 and isinstance(rows[0].ber, float) and isinstance(rows[0].trials, int)


def test_outputs_written(tmp_path):
    spec = ExperimentSpec(schemes=("si",), p_ids=(0.0, 0.05), **SMALL)
    run_experiment(spec, tmp_path)
    assert (tmp_path / "plot.svg").read_text().lstrip().startswith("<?xml")
    manifest = (tmp_path / "run-manifest.txt").read_text()
    assert "rate_bits_per_base[si]" in manifest and "trials = 2" in manifest


def test_series_grouping():
    rows = [row(sc, p, pe, 5) for sc in ("si", "naive") for pe in (0.0, 0.1) for p in (0.2, 0.1)]
    groups = series(rows)
    assert len(groups) == 4
    assert [r.p_ids for r in groups[("si", 0.0)]] == [0.1, 0.2]


def test_plot_with_zero_points(tmp_path):
    rows = [row("si", 0.1, 0.0, 0), row("si", 0.2, 0.0, 50)]
    assert harness.emit_plot(rows, tmp_path / "p.svg").exists()
    with pytest.raises(ValueError):
        harness.emit_plot([], tmp_path / "q.svg")


def test_ordering_points():
    rows = [row("si", 0.1, 0.0, 0), row("naive", 0.1, 0.0, 500), row("marker8", 0.1, 0.0, 200),
            row("si", 0.2, 0.0, 100), row("naive", 0.2, 0.0, 900), row("marker8", 0.2, 0.0, 300),
            row("si", 0.1, 0.1, 0), row("naive", 0.1, 0.1, 500), row("marker8", 0.1, 0.1, 50)]
    assert ordering_points(rows) == {0.0: [0.1], 0.1: []}


def test_cli_rate(capsys):
    assert cli.main(["rate"]) == 0
    out = capsys.readouterr().out
    assert "si: R_tx = 20/29" in out


def test_cli_export_code(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG)
    assert cli.main(["export-code", "--config", str(path), "--out", str(tmp_path / "codes")]) == 0
    from sicode.ldpc import read_alist

    code = read_alist(tmp_path / "codes" / "code1.alist")
    assert code.n_bits == 200


def test_cli_sweep(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG)
    assert cli.main(["sweep", "--config", str(path), "--out", str(tmp_path / "out"), "--seed", "3"]) == 0
    rows = read_rows(tmp_path / "out" / "results.csv")
    assert {r.scheme for r in rows} == {"si", "marker8"} and all(r.seed == 3 for r in rows)


def test_cli_requires_command():
    with pytest.raises(SystemExit):
        cli.main([])


def test_parallel_matches_serial():
    spec = ExperimentSpec(schemes=("si",), p_ids=(0.08,), **SMALL)
    serial = run_experiment(spec)
    spec.workers = 2
    parallel = run_experiment(spec)
    assert serial == parallel
