import csv
import subprocess
import sys

import numpy as np
import pytest

from previewlqr.cli import main
from previewlqr.config import bundled_config_path, load_config, parse_config
from previewlqr.exceptions import ConfigError

BOEING_TEXT = bundled_config_path().read_text()


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) if v.replace(".", "").replace("-", "").replace("e", "")
                      .replace("+", "").isdigit() else v for v in r] for r in rows[1:]]


def with_bw_zero(tmp_path, extra=""):
    text = BOEING_TEXT.replace("[system]", "[system]\n", 1)
    start = text.index("Bw = {")
    stop = text.index("}", start) + 1
    text = (text[:start] + "Bw = { rows = 4, cols = 4, data = [" + ", ".join(["0.0"] * 16)
            + "] }" + text[stop:])
    path = tmp_path / "quiet.cfg"
    path.write_text(text + extra)
    return str(path)


class TestConfig:
    def test_bundled(self):
        cfg = load_config()
        assert cfg.system.A.shape == (4, 4) and cfg.system.Bu.shape == (4, 2)
        assert cfg.system.A[1, 2] == 4.7 and cfg.system.Bu[1, 0] == -3.44
        assert cfg.sweep == list(range(31)) and cfg.fh_previews == [5, 20]

    def test_wrong_count(self):
        bad = BOEING_TEXT.replace("rows = 4, cols = 2", "rows = 4, cols = 3")
        with pytest.raises(ConfigError, match="system.Bu.data"):
            parse_config(bad)

    def test_missing_field(self):
        bad = BOEING_TEXT.replace("R = {", "S = {")
        with pytest.raises(ConfigError, match="cost.R"):
            parse_config(bad)

    def test_syntax_error_reports_line(self):
        with pytest.raises(ConfigError, match="line"):
            parse_config("[system]\nA = {rows = 1\n")

    def test_bad_preview_list(self):
        with pytest.raises(ConfigError, match="sweep"):
            parse_config(BOEING_TEXT.replace("sweep = { start = 0, stop = 30 }", "sweep = []"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")


def run(*args):
    return main([str(a) for a in args])


def test_validate_ok(capsys):
    assert run("validate") == 0
    assert "PASS  (A, Bu) stabilizable" in capsys.readouterr().out


def test_validate_failure_exit_code(tmp_path):
    text = BOEING_TEXT.replace("R = { rows = 2, cols = 2, data = [\n    1.0, 0.0,\n    0.0, 1.0,",
                               "R = { rows = 2, cols = 2, data = [\n    1.0, 0.0,\n    0.0, 0.0,")
    path = tmp_path / "bad.cfg"
    path.write_text(text)
    assert run("validate", "--config", path) == 1
    assert run("ih-sweep", "--config", path, "--out", tmp_path) == 1


def test_config_error_exit_code(tmp_path):
    path = tmp_path / "broken.cfg"
    path.write_text("[system\n")
    assert run("gap", "--config", path) == 1


def test_numerical_error_exit_code(tmp_path):
    # two identical, large input columns and a tiny R: the assumptions hold but
    # H = R + Bu'P Bu is too ill conditioned to invert reliably
    start = BOEING_TEXT.index("Bu = {")
    stop = BOEING_TEXT.index("}", start) + 1
    col = [0.01, -3.44, -0.83, -0.47]
    bu = ", ".join(f"{100 * c}, {100 * c}" for c in col)
    text = BOEING_TEXT[:start] + f"Bu = {{ rows = 4, cols = 2, data = [{bu}] }}" + BOEING_TEXT[stop:]
    text = text.replace("    1.0, 0.0,\n    0.0, 1.0,\n] }\n\n[experiment]",
                        "    2e-9, 0.0,\n    0.0, 2e-9,\n] }\n\n[experiment]")
    path = tmp_path / "illcond.cfg"
    path.write_text(text)
    assert run("validate", "--config", path) == 0
    assert run("ih-sweep", "--config", path, "--out", tmp_path) == 2


def test_ih_sweep(tmp_path):
    assert run("ih-sweep", "--out", tmp_path) == 0
    header, rows = read(tmp_path / "ih_cost_vs_p.csv")
    assert header == ["p", "J_analytic", "J_nc", "J_lqr"]
    assert [r[0] for r in rows] == list(range(31))
    assert rows[0][1] == pytest.approx(29.4, rel=0.05)
    assert rows[0][2] == pytest.approx(17.8, rel=0.05)
    assert rows[0][3] == pytest.approx(33.2, rel=0.05)
    J = [r[1] for r in rows]
    assert all(b <= a for a, b in zip(J, J[1:]))


def test_ih_sweep_no_disturbance(tmp_path):
    assert run("ih-sweep", "--config", with_bw_zero(tmp_path), "--out", tmp_path) == 0
    _, rows = read(tmp_path / "ih_cost_vs_p.csv")
    assert all(v == 0 for r in rows for v in r[1:])


def test_gap(tmp_path):
    assert run("gap", "--out", tmp_path) == 0
    assert run("ih-sweep", "--out", tmp_path) == 0
    header, rows = read(tmp_path / "gap_vs_p.csv")
    assert header == ["p", "gap", "gap_over_nc", "lower_bound", "upper_bound"]
    for p, gap, ratio, lo, hi in rows:
        assert lo <= gap <= hi
    _, sweep = read(tmp_path / "ih_cost_vs_p.csv")
    for g, s in zip(rows, sweep):
        # 12 significant digits in the files
        assert abs(g[1] - (s[1] - s[2])) <= 1e-10 + 1e-11 * s[1]
    _, fit = read(tmp_path / "gap_fit.csv")
    assert fit[0][2] == pytest.approx(fit[0][3], rel=0.15)


def test_compare_aug(tmp_path, capsys):
    assert run("compare-aug", "--out", tmp_path, "--random", 20) == 0
    _, rows = read(tmp_path / "compare_aug.csv")
    assert len(rows) == 21 * 6
    assert max(r[2] for r in rows if r[0] == "config") <= 1e-8
    assert max(r[2] for r in rows) <= 1e-7
    assert run("compare-aug", "--out", tmp_path, "--fault-inject") == 3
    assert "FAIL" in capsys.readouterr().out


def test_fh_sim(tmp_path):
    assert run("fh-sim", "--out", tmp_path) == 0
    header, rows = read(tmp_path / "fh_running_avg.csv")
    assert header == ["t", "p", "avg_cost_fh", "avg_cost_ih"]
    assert len(rows) == 200
    for p in (5, 20):
        curve = [r for r in rows if r[1] == p]
        assert curve[-1][2] <= curve[-1][3]
    header, tail = read(tmp_path / "fh_gains_tail.csv")
    assert header == ["t", "kx_dev_fro"] and len(tail) == 100
    assert tail[-1][1] > 100 * tail[0][1]


def test_fh_sim_zero_noise(tmp_path):
    assert run("fh-sim", "--config", with_bw_zero(tmp_path), "--out", tmp_path) == 0
    _, rows = read(tmp_path / "fh_running_avg.csv")
    assert all(r[2] == 0 and r[3] == 0 for r in rows)


def test_mc_check(tmp_path):
    assert run("mc-check", "--out", tmp_path, "--horizon", 2000, "--trials", 8) == 0
    header, rows = read(tmp_path / "mc_check.csv")
    assert header == ["controller", "p", "J_analytic", "mc_mean", "mc_stderr", "z"]
    assert [(r[0], r[1]) for r in rows] == [("lqr", 0), ("preview", 0), ("preview", 2),
                                           ("preview", 5)]
    assert all(abs(r[5]) <= 3 for r in rows)


def test_outputs_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run("fh-sim", "--out", tmp_path / d, "--seed", 123, "--horizon", 40) == 0
        assert run("gap", "--out", tmp_path / d) == 0
    for name in ("fh_running_avg.csv", "fh_gains_tail.csv", "gap_vs_p.csv", "gap_fit.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_seed_changes_output(tmp_path):
    run("fh-sim", "--out", tmp_path / "a", "--seed", 1, "--horizon", 30)
    run("fh-sim", "--out", tmp_path / "b", "--seed", 2, "--horizon", 30)
    assert (tmp_path / "a" / "fh_running_avg.csv").read_bytes() != \
        (tmp_path / "b" / "fh_running_avg.csv").read_bytes()


def test_twelve_significant_digits(tmp_path):
    run("ih-sweep", "--out", tmp_path)
    line = (tmp_path / "ih_cost_vs_p.csv").read_text().splitlines()[1]
    for field in line.split(",")[1:]:
        assert field == f"{float(field):.12g}"


def test_bad_seed_rejected(tmp_path):
    assert run("gap", "--seed", -1, "--out", tmp_path) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "previewlqr", "validate"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "R positive definite" in out.stdout
