import csv
import json
import os
import subprocess
import sys

import pytest

from spinkrylov import cli


def _write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def _read_csv(out_dir, name):
    with open(os.path.join(out_dir, name), encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def _read_summary(out_dir):
    with open(os.path.join(out_dir, "summary.json"), encoding="utf-8") as f:
        return json.load(f)


def test_witten_run_verifies_trace_identities(tmp_path):
    cfg = _write_config(tmp_path, "w.json", {"nx": 8, "ny": 2})
    out = str(tmp_path / "out")
    assert cli.main(["witten", "--config", cfg, "--out", out]) == 0
    header, rows = _read_csv(out, "witten.csv")
    assert header == ["nx", "ny", "n_down", "operator", "formula",
                      "brute_force", "match"]
    table = {(r[2], r[3]): r for r in rows}
    assert table[("8", "sublattice")][4:] == ["70", "70", "true"]
    assert table[("8", "chiral")][4:] == ["256", "256", "true"]
    assert all(r[-1] == "true" for r in rows)
    summary = _read_summary(out)
    assert summary["subcommand"] == "witten"
    assert summary["results"]["mismatches"] == 0
    assert summary["figure"]


def test_spectrum_run_and_byte_identical_rerun(tmp_path):
    cfg = _write_config(tmp_path, "s.json", {"lattice": {"nx": 4, "ny": 2}})
    out_a, out_b = str(tmp_path / "a"), str(tmp_path / "b")
    assert cli.main(["spectrum", "--config", cfg, "--out", out_a]) == 0
    assert cli.main(["spectrum", "--config", cfg, "--out", out_b]) == 0
    with open(os.path.join(out_a, "spectrum.csv"), "rb") as f:
        bytes_a = f.read()
    with open(os.path.join(out_b, "spectrum.csv"), "rb") as f:
        bytes_b = f.read()
    assert bytes_a == bytes_b
    assert b"\r" not in bytes_a and b"," in bytes_a
    sum_a, sum_b = _read_summary(out_a), _read_summary(out_b)
    assert sum_a["results"]["zero_count"] == 18
    assert sum_a["threads"] == 1
    sum_a.pop("wall_time_s"), sum_b.pop("wall_time_s")
    assert sum_a == sum_b


def test_spectrum_certificate_strategy(tmp_path):
    cfg = _write_config(tmp_path, "c.json", {
        "lattice": {"nx": 8, "ny": 1}, "n_down": 4, "strategy": "certificate"})
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", cfg, "--out", out]) == 0
    res = _read_summary(out)["results"]
    assert res["certificate"]["kernel_exact"] == 6
    assert res["zero_count"] == 6
    assert not os.path.exists(os.path.join(out, "spectrum.csv"))


def test_unknown_keys_rejected(tmp_path):
    out = str(tmp_path / "out")
    cfg = _write_config(tmp_path, "bad.json",
                        {"lattice": {"nx": 4, "ny": 2}, "bogus": 1})
    assert cli.main(["spectrum", "--config", cfg, "--out", out]) == 2
    with open(os.path.join(out, "error.json"), encoding="utf-8") as f:
        err = json.load(f)["error"]
    assert err["stage"] == "validation"
    assert "bogus" in err["message"]
    assert not os.path.exists(os.path.join(out, "summary.json"))

    cfg2 = _write_config(tmp_path, "bad2.json",
                         {"lattice": {"nx": 4, "ny": 2, "tilt": 0.1}})
    out2 = str(tmp_path / "out2")
    assert cli.main(["spectrum", "--config", cfg2, "--out", out2]) == 2
    with open(os.path.join(out2, "error.json"), encoding="utf-8") as f:
        assert "lattice.tilt" in json.load(f)["error"]["message"]


def test_missing_required_key(tmp_path):
    cfg = _write_config(tmp_path, "empty.json", {})
    out = str(tmp_path / "out")
    assert cli.main(["evolve", "--config", cfg, "--out", out]) == 2


def test_wrong_type_rejected(tmp_path):
    cfg = _write_config(tmp_path, "t.json", {"lattice": {"nx": "four", "ny": 2}})
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", cfg, "--out", out]) == 2


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", str(path), "--out", out]) == 2
    assert os.path.exists(os.path.join(out, "error.json"))


def test_set_overrides_dotted_paths(tmp_path):
    cfg = _write_config(tmp_path, "s.json", {"lattice": {"nx": 4, "ny": 2}})
    out = str(tmp_path / "out")
    assert cli.main(["spectrum", "--config", cfg, "--out", out,
                     "--set", "lattice.nx=3", "--set", "n_down=3"]) == 0
    summary = _read_summary(out)
    assert summary["config"]["lattice"]["nx"] == 3
    assert summary["results"]["dim"] == 20


def test_env_threads_override(tmp_path, monkeypatch):
    cfg = _write_config(tmp_path, "s.json",
                        {"lattice": {"nx": 4, "ny": 2}, "threads": 0})
    out = str(tmp_path / "out")
    monkeypatch.setenv("SPINKRYLOV_THREADS", "1")
    assert cli.main(["spectrum", "--config", cfg, "--out", out]) == 0
    assert _read_summary(out)["threads"] == 1
    monkeypatch.setenv("SPINKRYLOV_THREADS", "lots")
    assert cli.main(["spectrum", "--config", cfg, "--out", out]) == 2


def test_bad_pattern_is_a_validation_failure(tmp_path):
    cfg = _write_config(tmp_path, "e.json", {
        "lattice": {"nx": 4, "ny": 2}, "pattern": "xxxx",
        "times": {"stop": 1.0, "step": 0.5}})
    out = str(tmp_path / "out")
    assert cli.main(["evolve", "--config", cfg, "--out", out]) == 2
    with open(os.path.join(out, "error.json"), encoding="utf-8") as f:
        assert json.load(f)["error"]["stage"] == "validation"


def test_runtime_failure_exits_3(tmp_path):
    cfg = _write_config(tmp_path, "w.json", {"nx": 8, "ny": 2, "cap": 10})
    out = str(tmp_path / "out")
    assert cli.main(["witten", "--config", cfg, "--out", out]) == 3
    with open(os.path.join(out, "error.json"), encoding="utf-8") as f:
        err = json.load(f)["error"]
    assert err["stage"] == "runtime"
    assert not os.path.exists(os.path.join(out, "summary.json"))


def test_evolve_writes_observable_table(tmp_path):
    cfg = _write_config(tmp_path, "e.json", {
        "lattice": {"nx": 2, "ny": 1}, "pattern": "du",
        "times": {"stop": 2.0, "step": 0.5}, "window": [0.0, 2.0]})
    out = str(tmp_path / "out")
    assert cli.main(["evolve", "--config", cfg, "--out", out]) == 0
    header, rows = _read_csv(out, "observables.csv")
    assert header == ["t", "mz_x0", "mz_x1", "czz_x0", "czz_x1",
                      "svn", "energy", "norm"]
    assert len(rows) == 5
    assert rows[0][0] == "0.0"
    assert float(rows[0][1]) == pytest.approx(-0.5, abs=1e-12)
    assert float(rows[0][2]) == pytest.approx(0.5, abs=1e-12)
    assert all("." in cell for row in rows for cell in row)   # decimal dot
    header_w, rows_w = _read_csv(out, "window_averages.csv")
    assert header_w == ["x", "mz_avg", "czz_avg"]
    assert len(rows_w) == 2


def test_lanczos_table_contract(tmp_path):
    cfg = _write_config(tmp_path, "l.json", {
        "lattice": {"nx": 10, "ny": 1}, "max_steps": 10, "window": [2, 9]})
    out = str(tmp_path / "out")
    assert cli.main(["lanczos", "--config", cfg, "--out", out]) == 0
    header, rows = _read_csv(out, "lanczos.csv")
    assert header == ["j", "beta_sq", "alpha", "c_sq"]
    assert len(rows) == 10
    assert rows[0][:2] == ["1", "0.0"]
    assert float(rows[1][1]) == pytest.approx(0.25, rel=1e-10)  # beta_2^2 = 1/4
    assert abs(float(rows[3][2])) < 1e-12                       # alpha_4 = 0
    res = _read_summary(out)["results"]
    assert "error" in res["double_linear_fit"]   # window too small for the fit
    assert res["max_abs_alpha"] < 1e-12


def test_scars_fermion_sweep_smoke(tmp_path):
    out1 = str(tmp_path / "scars")
    cfg1 = _write_config(tmp_path, "sc.json", {"nx": 4})
    assert cli.main(["scars", "--config", cfg1, "--out", out1]) == 0
    for name in ("rf_residuals.csv", "ra_residuals.csv", "schmidt.csv"):
        assert os.path.exists(os.path.join(out1, name)), name

    out2 = str(tmp_path / "fermion")
    cfg2 = _write_config(tmp_path, "f.json", {
        "nx": 6, "ny": 1, "pattern": "uuuddd", "compare_j_perp": 2.0,
        "times": {"stop": 3.0, "step": 1.0}})
    assert cli.main(["fermion", "--config", cfg2, "--out", out2]) == 0
    header, rows = _read_csv(out2, "dispersion.csv")
    assert header[:2] == ["index", "energy"]
    assert len(rows) == 6

    out3 = str(tmp_path / "sweep")
    cfg3 = _write_config(tmp_path, "sw.json", {
        "lattice": {"nx": 4, "ny": 2}, "window": [10.0, 30.0], "dt": 2.0})
    assert cli.main(["sweep", "--config", cfg3, "--out", out3]) == 0
    header, rows = _read_csv(out3, "sweep.csv")
    assert [r[0] for r in rows] == ["1", "2"]
    _, pat_rows = _read_csv(out3, "patterns.csv")
    assert len(pat_rows) == 3
    assert _read_summary(out3)["figure"]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-c",
                           "from spinkrylov.cli import main; main(['--help'])"],
                          capture_output=True, text=True)
    # argparse exits 0 on --help from the top-level parser
    assert proc.returncode == 0
    assert "spectrum" in proc.stdout and "sweep" in proc.stdout
