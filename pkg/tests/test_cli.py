"""Tests for the command line interface."""

import numpy as np
import pytest

from eulerpml.cli import main
from eulerpml.core import FlowParams, GridSpec, PmlConfig, SourceSpec
from eulerpml.harness import ExperimentConfig, read_snapshot, save_config


@pytest.fixture
def small_cfg_file(tmp_path):
    grid = GridSpec(lx=1.2, ly=1.2, nx=30, ny=30, cfl=0.3)
    cfg = ExperimentConfig(
        flow=FlowParams(u_bar=200.0, v_bar=100.0, rho_bar=1.0, c_bar=300.0),
        grid=grid,
        pml=PmlConfig(sides=frozenset(("x-min", "x-max", "y-min", "y-max")),
                      delta=5 * grid.dx, sigma_pml=40.0),
        source=SourceSpec(fc=1500.0, ts=2.0 / 1500.0, location=(0.6, 0.6),
                          targets=frozenset(("p", "u"))),
        horizon=80,
        probes=((0.6, 0.6),),
        enlargement=3,
        record_every=4,
    )
    path = tmp_path / "small.cfg"
    save_config(cfg, path)
    return str(path)


class TestVerifySmith:
    def test_check_passes(self, tmp_path):
        out = tmp_path / "smith.csv"
        assert main(["verify-smith", "--flows", "4", "--check", "-o", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0].startswith("# smith verification")
        assert lines[1].split(",")[0] == "u_bar"
        assert len(lines) == 2 + 4 + 1  # header pair, rows, summary


class TestModes:
    def test_csv_shape(self, tmp_path):
        out = tmp_path / "modes.csv"
        rc = main([
            "modes", "--omega", "100", "400", "3", "--k", "1", "4", "2",
            "--sigma", "30", "-o", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[1].startswith("omega,k,regime")
        assert len(lines) == 2 + 3 * 2


class TestReflect:
    def test_check_passes(self, tmp_path):
        out = tmp_path / "reflect.csv"
        assert main(["reflect", "--draws", "10", "--check", "-o", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[1] == "sigma,alpha3_model1,alpha3_model2,beta_deviation,w1_first"
        assert lines[-1].startswith("# 10/10 draws")


class TestRunAndReference:
    def test_run_outputs(self, small_cfg_file, tmp_path):
        out = tmp_path / "probes.csv"
        snaps = tmp_path / "snaps"
        rc = main([
            "run", "--config", small_cfg_file, "--fields", "p,vorticity",
            "--snapshot-dir", str(snaps), "-o", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 2 + 80
        meta, arr = read_snapshot(snaps / "p_000080.snap")
        assert meta["field"] == "p"
        assert arr.shape == (30, 30)
        assert np.all(np.isfinite(arr))
        # vorticity frames live on interior corners
        _, w = read_snapshot(snaps / "vorticity_000080.snap")
        assert w.shape == (29, 29)

    def test_reference_runs(self, small_cfg_file, tmp_path):
        out = tmp_path / "ref.csv"
        assert main(["reference", "--config", small_cfg_file, "-o", str(out)]) == 0
        assert out.read_text().startswith("# probe series")

    def test_missing_config_is_an_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.cfg")]) == 2

    def test_bad_config_is_an_error(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("flow.u_bar = fast\n")
        assert main(["run", "--config", str(path)]) == 2


class TestTable1:
    def test_sweep_csv(self, small_cfg_file, tmp_path):
        out = tmp_path / "sweep.csv"
        rc = main([
            "table1", "--config", small_cfg_file, "--cells", "9:40,3:40",
            "-o", str(out),
        ])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 4
        assert lines[2].startswith("9,4.000000e+01,")

    def test_check_fails_on_reversed_cells(self, small_cfg_file, tmp_path):
        # the 3-cell layer cannot beat the 9-cell layer by the required 5x
        rc = main([
            "table1", "--config", small_cfg_file, "--cells", "3:40,9:40",
            "--check", "-o", str(tmp_path / "s.csv"),
        ])
        assert rc == 1


class TestStability:
    def test_check_passes_with_control(self, small_cfg_file, tmp_path, capsys):
        rc = main([
            "stability", "--config", small_cfg_file, "--multiplier", "3",
            "--control", "--check", "-o", str(tmp_path / "stab.csv"),
        ])
        assert rc == 0
        err = capsys.readouterr().err
        assert "UnstableState" in err
        assert "passed=True" in err


class TestBench:
    def test_reports_both_backends(self, capsys):
        pytest.importorskip("eulerpml.solver._kernels")
        assert main(["bench", "--nx", "24", "--steps", "5", "--warmup", "1"]) == 0
        text = capsys.readouterr().out
        assert "python," in text and "compiled," in text
        assert "speedup" in text
