import math
from dataclasses import replace

import numpy as np
import pytest

from rmtstap import cli
from rmtstap.harness import (CSV_HEADER, DOPPLER_GRID, ConfigError, ResultRow, Scenario,
                             dump_scenario, emit_csv, format_csv, load_scenario,
                             bundled_scenarios, run_scenario, scenario_from_dict)
from rmtstap.scene import RadarConfig
from rmtstap.stap import Method

SMALL = RadarConfig(n_elements=4, n_pulses=4, n_patches=91)


def tiny(**kw):
    base = dict(name="tiny", radar=SMALL, sweep_axis="samples", sweep_values=(8, 16),
                n_trials=4, base_seed=7)
    base.update(kw)
    return Scenario(**base)


@pytest.fixture(scope="module")
def fig3_rows():
    return run_scenario(replace(bundled_scenarios()["fig3"], n_trials=100), threads=2)


def by_key(rows):
    return {(r.sweep_value, r.algorithm): r for r in rows}


def test_optimal_rows_do_not_depend_on_sample_count():
    rows = run_scenario(tiny(algorithms=(Method.OPTIMAL,), sweep_values=(4, 8, 32)))
    assert len({(r.mean_scnr_loss_db, r.mean_output_power_db) for r in rows}) == 1
    assert all(r.std_db == 0 for r in rows)


def test_rmt_beats_fd_on_every_sample_count(fig3_rows):
    rows = by_key(fig3_rows)
    for L in bundled_scenarios()["fig3"].sweep_values:
        fd = rows[(L, Method.FD)].mean_scnr_loss_db
        for m in (Method.RMT_FD, Method.RMT_RD):
            r = rows[(L, m)]
            if r.n_valid_trials:
                assert r.mean_scnr_loss_db > fd, (L, m)


def test_optimal_bounds_every_algorithm(fig3_rows):
    rows = by_key(fig3_rows)
    for (L, m), r in rows.items():
        if r.mean_scnr_loss_db is not None:
            assert r.mean_scnr_loss_db <= rows[(L, Method.OPTIMAL)].mean_scnr_loss_db + 0.05
            assert r.mean_scnr_loss_db <= 0.01


def test_not_applicable_rows_are_empty(fig3_rows):
    r = by_key(fig3_rows)[(10, Method.RMT_FD)]
    assert r.n_valid_trials == 0 and r.mean_scnr_loss_db is None
    line = [ln for ln in format_csv(fig3_rows).splitlines() if ln.startswith("10,rmt_fd")]
    assert line == ["10,rmt_fd,,,,0,0"]


def test_trial_count_doubling_is_stable():
    s = tiny(sweep_values=(12,), algorithms=(Method.FD, Method.RMT_FD), n_trials=200)
    a = by_key(run_scenario(s))
    b = by_key(run_scenario(replace(s, n_trials=400)))
    for key, r in a.items():
        se = r.std_db / math.sqrt(r.n_valid_trials)
        assert abs(b[key].mean_scnr_loss_db - r.mean_scnr_loss_db) < 3 * se + 1e-12


def test_single_row_gives_two_line_file(tmp_path):
    row = ResultRow(10, Method.FD, -3.0, -12.5, 0.25, 5, 0)
    path = emit_csv([row], tmp_path / "one.csv")
    text = path.read_bytes().decode("utf-8")
    assert text == CSV_HEADER + "\n10,fd,-3.000000,-12.500000,0.250000,5,0\n"


def test_emit_rejects_empty_rows(tmp_path):
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "x.csv")


def test_rows_sorted_by_sweep_then_algorithm():
    s = tiny(sweep_values=(16, 8), algorithms=(Method.RMT_FD, Method.FD, Method.OPTIMAL))
    lines = format_csv(run_scenario(s)).splitlines()[1:]
    keys = [tuple(ln.split(",")[:2]) for ln in lines]
    assert keys == [("8", "optimal"), ("8", "fd"), ("8", "rmt_fd"),
                    ("16", "optimal"), ("16", "fd"), ("16", "rmt_fd")]


def test_rerun_and_threads_are_byte_identical():
    s = tiny(n_trials=6)
    ref = format_csv(run_scenario(s))
    assert format_csv(run_scenario(s)) == ref
    assert format_csv(run_scenario(s, threads=3)) == ref


def test_seed_changes_results():
    s = tiny(algorithms=(Method.FD,))
    assert format_csv(run_scenario(s)) != format_csv(run_scenario(replace(s, base_seed=8)))


def test_doppler_scenario_row_count():
    s = replace(bundled_scenarios()["fig2_L48"], n_trials=1)
    assert len(DOPPLER_GRID) == 41
    assert len(run_scenario(s)) == 164


def test_bundled_set_names():
    assert sorted(bundled_scenarios()) == sorted(
        ["fig1_v150", "fig1_v300", "fig2_L10", "fig2_L15", "fig2_L48", "fig2_L128",
         "fig3", "fig4_L12", "fig4_L22", "fig5_L13", "fig5_L18"])


def test_velocity_sweep_builds_distinct_scenes():
    s = tiny(sweep_axis="velocity", sweep_values=(75.0, 150.0), n_samples=16,
             algorithms=(Method.OPTIMAL,))
    rows = run_scenario(s)
    assert rows[0].mean_scnr_loss_db != rows[1].mean_scnr_loss_db


@pytest.mark.parametrize("kw", [
    dict(sweep_axis="range"),
    dict(sweep_values=()),
    dict(sweep_values=(8, 8)),
    dict(n_trials=0),
    dict(base_seed=-1),
    dict(efa_channels=2),
    dict(sweep_values=(0,)),
    dict(sweep_axis="doppler", sweep_values=(0.1,)),
    dict(sweep_axis="dof_error", sweep_values=(0.5,), n_samples=8),
    dict(algorithms=()),
])
def test_invalid_scenarios(kw):
    with pytest.raises(ConfigError):
        tiny(**kw)


def test_dof_error_out_of_range():
    s = tiny(sweep_axis="dof_error", sweep_values=(-30,), n_samples=8)
    with pytest.raises(ConfigError):
        run_scenario(s)


def test_scenario_toml_round_trip(tmp_path):
    for s in bundled_scenarios(n_trials=3).values():
        p = tmp_path / f"{s.name}.toml"
        p.write_text(dump_scenario(s))
        assert load_scenario(p) == s


def test_scenario_dict_errors():
    with pytest.raises(ConfigError):
        scenario_from_dict({"name": "x", "sweep_axis": "samples"})
    with pytest.raises(ConfigError):
        scenario_from_dict({"name": "x", "sweep_axis": "samples", "sweep_values": [8],
                            "colour": "red"})
    with pytest.raises(ConfigError):
        scenario_from_dict({"name": "x", "sweep_axis": "samples", "sweep_values": [8],
                            "algorithms": ["magic"]})


# -- command line -----------------------------------------------------------

def write_tiny(path, **kw):
    path.write_text(dump_scenario(tiny(**kw)))
    return path


def test_cli_run(tmp_path):
    src = write_tiny(tmp_path / "s.toml")
    out = tmp_path / "out.csv"
    assert cli.main(["run", str(src), "--out", str(out), "--trials", "3", "--seed", "5"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER and len(lines) == 1 + 2 * 5
    assert lines[1].endswith(",3,0")


def test_cli_scenario_prints_toml(capsys, tmp_path):
    assert cli.main(["scenario", "fig3"]) == 0
    p = tmp_path / "fig3.toml"
    p.write_text(capsys.readouterr().out)
    assert load_scenario(p) == bundled_scenarios()["fig3"]


@pytest.mark.parametrize("argv", [
    ["run", "missing.toml", "--out", "x.csv"],
    ["scenario", "fig9"],
    ["figures", "--out-dir", "d"],
    ["bogus"],
    ["run", "s.toml"],
])
def test_cli_config_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.main(argv) == 2


def test_cli_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("name = \n")
    assert cli.main(["run", str(p), "--out", str(tmp_path / "o.csv")]) == 2


def test_cli_numerical_failure(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise ArithmeticError("broken inverse")
    monkeypatch.setattr(cli.harness, "run_scenario", boom)
    src = write_tiny(tmp_path / "s.toml")
    assert cli.main(["run", str(src), "--out", str(tmp_path / "o.csv")]) == 3


def test_cli_threads_must_be_positive(tmp_path):
    src = write_tiny(tmp_path / "s.toml")
    assert cli.main(["run", str(src), "--out", str(tmp_path / "o.csv"), "--threads", "0"]) == 2
