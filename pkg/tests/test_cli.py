"""Config handling, artifact layout, and exit codes of the command-line driver.

Everything calls main(argv) in-process; artifacts land in tmp_path and
are reparsed as plain text or JSON.
"""

import json
import math

import pytest

from ergrates.cli import (
    ConfigError,
    config_hash,
    emit_config,
    main,
    parse_config_text,
)


def read_csv(path):
    """(header, data rows, comment lines) of an artifact CSV."""
    lines = path.read_text().splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    data = [ln.split(",") for ln in lines[1:] if not ln.startswith("#")]
    return lines[0].split(","), data, comments


class TestConfigText:
    def test_round_trip(self):
        cfg = {"body": "ball:1", "measure": "radial:2,1,1", "tol": "0.0001"}
        assert parse_config_text(emit_config(cfg)) == cfg

    def test_skips_comments_and_blank_lines(self):
        text = "# a comment\n\n  body = ball:1  \n\n# another\nmeasure = radial:2,1,1\n"
        assert parse_config_text(text) == {"body": "ball:1", "measure": "radial:2,1,1"}

    def test_every_error_reported_with_line_number(self):
        text = "body = ball:1\nnonsense\nfrobnicate = 3\nbody = cube\n= 7\n"
        with pytest.raises(ConfigError) as exc:
            parse_config_text(text)
        msg = str(exc.value)
        for frag in ("line 2", "line 3", "line 4", "line 5",
                     "unknown key", "duplicate", "empty key"):
            assert frag in msg

    def test_hash_tracks_content(self):
        a = {"body": "ball:1", "tol": "1e-4"}
        b = {"tol": "1e-4", "body": "ball:1"}
        assert config_hash(a) == config_hash(b)
        assert config_hash(a) != config_hash({"body": "ball:2", "tol": "1e-4"})


class TestOptionMerging:
    def test_command_line_beats_config_file(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("alpha = 1,1\n")
        out = tmp_path / "report.json"
        assert main(["classify", "--config", str(cfg_file), "--alpha", "3,1",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["verdict"] == "CircleBetter"

    def test_config_file_beats_default(self, tmp_path):
        cfg_file = tmp_path / "run.cfg"
        cfg_file.write_text("alpha = 1,1\nr-mode = at-max\n")
        out = tmp_path / "report.json"
        assert main(["classify", "--config", str(cfg_file), "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["verdict"] == "Equal"
        assert rep["r_mode"] == "at-max"


class TestFourierCommand:
    def test_csv_and_plot_script(self, tmp_path):
        out, plot = tmp_path / "f.csv", tmp_path / "f.gp"
        assert main(["fourier", "--z-lo", "1", "--z-hi", "20", "--points", "16",
                     "--out", str(out), "--plot", str(plot)]) == 0
        header, rows, comments = read_csv(out)
        assert header == ["x_1", "x_2", "re", "im", "abs", "herz_envelope"]
        assert len(rows) == 16
        assert any(c.startswith("# config-hash = ") for c in comments)
        assert any(c.startswith("# version = ") for c in comments)
        re0, im0, abs0 = (float(v) for v in rows[0][2:5])
        assert abs0 == pytest.approx(math.hypot(re0, im0), rel=1e-10)
        script = plot.read_text()
        assert str(out) in script and "envelope" in script


class TestRatesCommand:
    def test_ladder_csv(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["rates", "--measure", "radial:2,1,1", "--points", "10",
                     "--p-lo", "10", "--p-hi", "120", "--out", str(out)]) == 0
        header, rows, _ = read_csv(out)
        assert header == ["p", "t_1", "t_2", "I", "theta_fit_running"]
        assert len(rows) == 10
        vals = [float(r[3]) for r in rows]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        # the running fit needs 8 points before it reports anything
        assert all(r[4] == "nan" for r in rows[:7])
        assert float(rows[-1][4]) == pytest.approx(-2.0, abs=0.3)

    def test_budget_failure_exits_3(self, tmp_path, capsys):
        # an unreachable tolerance on the oscillatory box integrand must
        # surface as a numeric failure, not silence or a crash
        rc = main(["rates", "--body", "cube", "--measure", "aniso:1.3,0.8;1,1;1",
                   "--direction", "137.3,912.7", "--p-lo", "1", "--p-hi", "1",
                   "--points", "1", "--tol", "0",
                   "--out", str(tmp_path / "r.csv")])
        assert rc == 3
        assert "numeric failure" in capsys.readouterr().err


class TestSimulateCommand:
    def test_identity_columns(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["simulate", "--action", "demo20", "--t", "10,10|40,40",
                     "--out", str(out)]) == 0
        header, rows, _ = read_csv(out)
        assert header == ["t_1", "t_2", "norm_sq", "i_k_atomic", "abs_diff"]
        assert len(rows) == 2
        for row in rows:
            assert float(row[2]) > 0
            assert float(row[4]) < 1e-10

    def test_missing_action_exits_2(self, tmp_path, capsys):
        assert main(["simulate", "--out", str(tmp_path / "s.csv")]) == 2
        assert "config error" in capsys.readouterr().err


class TestVerifyCommand:
    def test_theorem1_canonical_example(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--theorem", "1", "--body", "ball:1",
                     "--measure", "radial:2,1,1", "--phi", "power:2",
                     "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["verdict"] == "consistent with equivalence"
        assert rep["evidence"]["consistent"] is True
        assert rep["sup_ratios"]["decay_over_phi"] > 0
        assert "config_hash" in rep and "version" in rep

    def test_theorem2_atomic(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--theorem", "2",
                     "--measure", "atomic:[(1,0;1),(0,2;4)]",
                     "--points", "10", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["evidence"]["singular_state"] == "finite"
        assert rep["evidence"]["consistent"] is True

    def test_theorem3_excluded(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--theorem", "3",
                     "--measure", "atomic:[(0.9,0.7;1)]",
                     "--points", "120", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["evidence"]["rate_excluded"] is True
        assert rep["fit"]["theta_hat"] == pytest.approx(-3.0, abs=0.1)

    def test_theorem3_zero_measure(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["verify", "--theorem", "3", "--measure", "atomic:[]",
                     "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert "trivially" in rep["verdict"]
        assert rep["sup_ratios"]["scaled_decay"] == 0.0

    def test_config_problems_exit_2(self, tmp_path, capsys):
        out = str(tmp_path / "v.json")
        assert main(["verify", "--out", out]) == 2
        assert main(["verify", "--theorem", "7", "--out", out]) == 2
        assert main(["verify", "--theorem", "1", "--out", out]) == 2  # no phi
        assert main(["verify", "--theorem", "2", "--measure", "radial:-1,1,1",
                     "--out", out]) == 2
        err = capsys.readouterr().err
        assert "gamma must be positive" in err


class TestClassifyCommand:
    def test_json_report(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["classify", "--alpha", "1.5,1.5", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["verdict"] == "SquareBetter"
        assert rep["radial_consistency"]["matches_circle"] is True

    def test_r_mode_flag(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["classify", "--alpha", "1,1,3", "--r-mode", "at-max",
                     "--out", str(out)]) == 0
        assert json.loads(out.read_text())["r"] == 0

    def test_bad_alpha_exits_2(self, tmp_path):
        assert main(["classify", "--alpha", "1,zebra",
                     "--out", str(tmp_path / "c.json")]) == 2


class TestRegionmapCommand:
    def test_counts_and_plot(self, tmp_path):
        out, plot = tmp_path / "m.csv", tmp_path / "m.gp"
        assert main(["regionmap", "--grid", "0:4:24", "--out", str(out),
                     "--plot", str(plot)]) == 0
        header, rows, comments = read_csv(out)
        assert header == ["alpha1", "alpha2", "square_family", "square_log",
                          "circle_family", "circle_log", "verdict"]
        assert len(rows) > 24 * 24
        assert "# square-labels = 5" in comments
        assert "# circle-labels = 3" in comments
        assert "multiplot" in plot.read_text()

    def test_bad_grid_exits_2(self, tmp_path):
        out = str(tmp_path / "m.csv")
        assert main(["regionmap", "--grid", "1:4:24", "--out", out]) == 2
        assert main(["regionmap", "--grid", "0:4", "--out", out]) == 2
        assert main(["regionmap", "--grid", "0:4:7", "--out", out]) == 2


class TestDeterminism:
    def test_verify_byte_identical(self, tmp_path):
        args = ["verify", "--theorem", "2", "--measure", "atomic:[(1,0;1),(0,2;4)]",
                "--points", "10"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        # the out path itself enters the config hash, so compare payloads
        ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
        ra.pop("config_hash"), rb.pop("config_hash")
        assert ra == rb

    def test_regionmap_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["regionmap", "--grid", "0:4:24", "--out", str(a)]) == 0
        assert main(["regionmap", "--grid", "0:4:24", "--out", str(b)]) == 0
        strip = lambda p: [ln for ln in p.read_text().splitlines()
                           if not ln.startswith("# config-hash")]
        assert strip(a) == strip(b)


class TestTopLevel:
    def test_help_exits_0(self, capsys):
        assert main(["--help"]) == 0
        capsys.readouterr()

    def test_no_command_exits_2(self, capsys):
        assert main([]) == 2
        capsys.readouterr()

    def test_unknown_command_exits_2(self, capsys):
        assert main(["transmogrify"]) == 2
        capsys.readouterr()
