import os

import numpy as np
import pytest

from porompm.config import RunConfig, parse_config, parse_quantity, serialize_config
from porompm.errors import ConfigurationError
from porompm.outputs import (
    read_snapshot,
    write_history_csv,
    write_profile_csv,
    write_snapshot,
)
from porompm.particles import seed_particles
from porompm.grid import build_grid


class TestUnits:
    def test_pressure_units(self):
        assert parse_quantity("8.4 MPa") == pytest.approx(8.4e6)
        assert parse_quantity("15 kPa") == pytest.approx(15e3)
        assert parse_quantity("1e-6 kPa.s") == pytest.approx(1e-3)

    def test_density_units(self):
        assert parse_quantity("2.5 Mg/m3") == pytest.approx(2500.0)

    def test_bare_number(self):
        assert parse_quantity(0.25) == 0.25
        assert parse_quantity("0.25") == 0.25

    def test_unknown_unit(self):
        with pytest.raises(ConfigurationError):
            parse_quantity("3 furlongs")


class TestParseConfig:
    def test_minimal_preset(self):
        cfg = parse_config("preset: terzaghi\n")
        assert cfg.preset == "terzaghi"
        assert cfg.scale == 1.0
        assert cfg.stabilized
        assert cfg.basis == "gimp"

    def test_unknown_key_is_hard_error(self):
        with pytest.raises(ConfigurationError, match="stabilzation"):
            parse_config("preset: terzaghi\nstabilzation: ppp\n")

    def test_probe_parsing(self):
        cfg = parse_config(
            "preset: footing\nprobes:\n- name: A\n  x: 0.0625 m\n  y: 9.4375 m\n"
        )
        assert cfg.probes[0].name == "A"
        assert cfg.probes[0].y == pytest.approx(9.4375)

    def test_round_trip(self):
        text = (
            "preset: footing\nscale: 0.5\nstabilization: off\nbasis: linear\n"
            "solver: fixed_stress\noutput_dir: runs/x\nsnapshot_every: 5\n"
            "probes:\n- name: A\n  x: 0.0625\n  y: 9.4375\n"
            "overrides:\n  t_end: 0.1 s\n"
        )
        cfg = parse_config(text)
        again = parse_config(serialize_config(cfg))
        assert again == cfg

    def test_invalid_values(self):
        with pytest.raises(ConfigurationError):
            parse_config("preset: terzaghi\nstabilization: maybe\n")
        with pytest.raises(ConfigurationError):
            parse_config("preset: terzaghi\nscale: -1\n")
        with pytest.raises(ConfigurationError):
            parse_config("preset: terzaghi\nsnapshot_every: -2\n")


class TestSnapshot:
    def make_particles(self, n_cells=1):
        g = build_grid((0, 0), (0.5 * n_cells, 0.5 * n_cells), 0.5)
        return seed_particles(g, (0, 0), (0.5 * n_cells, 0.5 * n_cells), (2, 2), 0.4)

    def test_empty_set(self, tmp_path):
        parts = self.make_particles()
        import copy
        empty = copy.deepcopy(parts)
        for name in ("x", "V", "F", "l_p", "v", "a", "p", "p_dot", "p_ddot",
                     "phi", "X", "V0", "l_p0", "body_id", "drained"):
            setattr(empty, name, getattr(empty, name)[:0])
        path = str(tmp_path / "snap.vtk")
        write_snapshot(path, empty, 0, 0.0)
        pts, vec, sca = read_snapshot(path)
        assert len(pts) == 0

    def test_round_trip_bit_exact(self, tmp_path):
        parts = self.make_particles()
        rng = np.random.default_rng(0)
        parts.p = rng.normal(size=len(parts)) * 1e4
        parts.v = rng.normal(size=(len(parts), 2))
        parts.x = parts.x + rng.normal(scale=1e-3, size=parts.x.shape)
        path = str(tmp_path / "snap.vtk")
        write_snapshot(path, parts, 3, 0.125)
        pts, vec, sca = read_snapshot(path)
        assert np.array_equal(pts, parts.x)
        assert np.array_equal(sca["pressure"], parts.p)
        assert np.array_equal(vec["velocity"], parts.v)
        assert np.array_equal(vec["displacement"], parts.x - parts.X)

    def test_deterministic_bytes(self, tmp_path):
        parts = self.make_particles()
        p1, p2 = str(tmp_path / "a.vtk"), str(tmp_path / "b.vtk")
        write_snapshot(p1, parts, 0, 0.0)
        write_snapshot(p2, parts, 0, 0.0)
        assert open(p1, "rb").read() == open(p2, "rb").read()


class TestCsv:
    def test_profile_columns(self, tmp_path):
        path = str(tmp_path / "profile.csv")
        write_profile_csv(path, [0.0, 0.5], [0.1, 0.9], [0.0, 1.0])
        lines = open(path).read().splitlines()
        assert lines[0] == "Z,P_numerical,P_exact"
        assert len(lines) == 3

    def test_history_missing_samples(self, tmp_path):
        path = str(tmp_path / "hist.csv")
        write_history_csv(path, [(0.1, 5.0), (0.2, None)])
        lines = open(path).read().splitlines()
        assert lines[2] == "0.20000000000000001,"


class TestCli:
    def test_bad_config_path_exit_2(self):
        from porompm.cli import main
        assert main(["run", "/nonexistent/conf.yaml"]) == 2

    def test_unknown_preset_exit_2(self, tmp_path):
        from porompm.cli import main
        cfg = tmp_path / "c.yaml"
        cfg.write_text("preset: nosuch\n")
        assert main(["run", str(cfg)]) == 2

    def test_preset_terzaghi_smoke(self, tmp_path):
        from porompm.cli import main
        out = str(tmp_path / "run1")
        rc = main(["preset", "terzaghi", "-o", out])
        assert rc == 0
        names = sorted(os.listdir(out))
        assert "config.yaml" in names
        assert "solve_report.csv" in names
        assert "profile_terzaghi.csv" in names
        assert "run.log" in names

    def test_preset_terzaghi_unstabilized_smoke(self, tmp_path):
        from porompm.cli import main
        out = str(tmp_path / "run2")
        rc = main(["preset", "terzaghi", "--unstabilized", "-o", out])
        assert rc == 0
        log = open(os.path.join(out, "run.log")).read()
        assert "oscillation metric" in log

    def test_deterministic_outputs(self, tmp_path):
        from porompm.cli import main
        out1, out2 = str(tmp_path / "d1"), str(tmp_path / "d2")
        assert main(["preset", "terzaghi", "-o", out1]) == 0
        assert main(["preset", "terzaghi", "-o", out2]) == 0
        for name in ("profile_terzaghi.csv", "solve_report.csv"):
            a = open(os.path.join(out1, name), "rb").read()
            b = open(os.path.join(out2, name), "rb").read()
            assert a == b

    def test_report_command(self, tmp_path, capsys):
        from porompm.cli import main
        out = str(tmp_path / "run3")
        assert main(["preset", "terzaghi", "-o", out]) == 0
        assert main(["report", out]) == 0
        captured = capsys.readouterr()
        assert "newton iterations" in captured.out

    def test_run_config_with_snapshot(self, tmp_path):
        from porompm.cli import main
        out = str(tmp_path / "run4")
        cfg = tmp_path / "c.yaml"
        cfg.write_text(f"preset: terzaghi\noutput_dir: {out}\nsnapshot_every: 1\n")
        assert main(["run", str(cfg)]) == 0
        assert any(n.startswith("snap_") for n in os.listdir(out))


def test_snapshot_cadence_count(tmp_path):
    # cadence 10 over 35 steps -> exactly snapshots 0, 10, 20, 30
    from porompm.cli import main
    out = str(tmp_path / "cad")
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "preset: terzaghi\noutput_dir: %s\nsnapshot_every: 10\n"
        "overrides:\n  n_steps: 35\n  t_end: 350.0\n" % out
    )
    assert main(["run", str(cfg)]) == 0
    snaps = sorted(n for n in os.listdir(out) if n.startswith("snap_"))
    assert snaps == ["snap_000000.vtk", "snap_000010.vtk",
                     "snap_000020.vtk", "snap_000030.vtk"]
