"""Tests for the experiment harness: reference oracle, metrics, sweeps, I/O."""

import numpy as np
import pytest

from eulerpml.core import FlowParams, GridSpec, PmlConfig, SourceSpec, time_step
from eulerpml.errors import (
    ConfigError,
    ReflectedContamination,
    UnstableState,
    ZeroReference,
)
from eulerpml.harness import (
    ExperimentConfig,
    baseline_config,
    check_travel_bound,
    comparison_masks,
    format_config,
    over_cfl_control,
    parse_config,
    probe_csv,
    read_snapshot,
    reference_geometry,
    relative_error,
    run_reference,
    stability_csv,
    stability_probe,
    sweep_csv,
    table1_sweep,
    write_snapshot,
)
from eulerpml.solver import run
from eulerpml.solver.state import TAG_INTERIOR, build_region_map

FLOW = FlowParams(u_bar=200.0, v_bar=100.0, rho_bar=1.0, c_bar=300.0)
ALL_SIDES = frozenset(("x-min", "x-max", "y-min", "y-max"))


def small_config(nx=30, horizon=80, enlargement=3, n_delta=5, fc=1500.0):
    grid = GridSpec(lx=1.2, ly=1.2, nx=nx, ny=nx, cfl=0.3)
    pml = PmlConfig(
        sides=ALL_SIDES, delta=n_delta * grid.dx, sigma_pml=40.0
    )
    source = SourceSpec(
        fc=fc, ts=2.0 / fc, location=(0.6, 0.6), targets=frozenset(("p", "u"))
    )
    return ExperimentConfig(
        flow=FLOW,
        grid=grid,
        pml=pml,
        source=source,
        horizon=horizon,
        probes=((0.45, 0.75), (0.6, 0.6)),
        enlargement=enlargement,
        record_every=4,
    )


class TestConfigValidation:
    def test_enlargement_too_small(self):
        with pytest.raises(ConfigError):
            small_config(enlargement=1)

    def test_horizon_too_small(self):
        with pytest.raises(ConfigError):
            small_config(horizon=0)


class TestReferenceGeometry:
    def test_offsets_center_the_domain(self):
        cfg = small_config(nx=30, enlargement=3)
        big, ox, oy = reference_geometry(cfg)
        assert (big.nx, big.ny) == (90, 90)
        assert (ox, oy) == (30, 30)
        assert big.dx == pytest.approx(cfg.grid.dx)
        assert big.dy == pytest.approx(cfg.grid.dy)

    def test_travel_bound_value(self):
        cfg = small_config(nx=30, enlargement=3)
        # margin is one original-domain width on every side
        speed = FLOW.c_bar + FLOW.speed
        assert check_travel_bound(cfg) == pytest.approx(2 * 1.2 / speed)

    def test_travel_bound_violation(self):
        cfg = small_config(nx=30, horizon=5000, enlargement=3)
        with pytest.raises(ReflectedContamination):
            check_travel_bound(cfg)

    def test_reference_matches_truncated_run_before_boundary_contact(self):
        # until the numerical domain of dependence (one cell per step)
        # reaches the truncated boundary, the PML-free truncated run and
        # the restricted reference are bit-identical solutions
        cfg = small_config(nx=30, horizon=14, enlargement=3)
        assert cfg.horizon <= cfg.grid.nx // 2 - 1
        ref = run_reference(cfg, record_fields=("p", "u"))
        out = run(
            cfg,
            pml=PmlConfig(sides=frozenset(), delta=0.0, sigma_pml=0.0),
            record_fields=("p", "u"),
        )
        scale = np.max(np.abs(ref.frames["p"]))
        assert scale > 0
        for name in ("p", "u"):
            dev = np.max(np.abs(ref.frames[name] - out.frames[name]))
            assert dev <= 1e-12 * scale
        # probes ride along with the coordinate shift
        assert np.allclose(
            ref.probes["p"], out.probes["p"], rtol=0, atol=1e-12 * scale
        )


class TestComparisonMasks:
    def test_masks_partition_the_centers(self):
        grid = GridSpec(lx=1.2, ly=1.2, nx=20, ny=20, cfl=0.3)
        pml = PmlConfig(sides=ALL_SIDES, delta=4 * grid.dx, sigma_pml=40.0)
        masks = comparison_masks(grid, pml)
        euler, layer = masks["euler_centers"], masks["pml_centers"]
        assert euler.shape == (20, 20)
        assert not np.any(euler & layer)
        assert np.all(euler | layer)
        assert euler.sum() == 12 * 12

    def test_corner_masks_exclude_wall_rim(self):
        grid = GridSpec(lx=1.2, ly=1.2, nx=20, ny=20, cfl=0.3)
        pml = PmlConfig(sides=ALL_SIDES, delta=4 * grid.dx, sigma_pml=40.0)
        masks = comparison_masks(grid, pml, rim=2)
        ec, pc = masks["euler_corners"], masks["pml_corners"]
        assert ec.shape == (19, 19)
        assert not np.any(ec & pc)
        assert not np.any(ec[:2, :]) and not np.any(pc[:2, :])
        assert not np.any(ec[-2:, :]) and not np.any(pc[-2:, :])
        # corner m sits between cells m and m+1: the last layer corner is
        # m=3 (cell 3 is the outermost layer cell) and m=4 is pure Euler
        assert pc[3, 10] and pc[2, 10] and not pc[4, 10]
        assert ec[4, 10]


class _Frames:
    def __init__(self, frames):
        self.frames = frames


class TestRelativeError:
    def test_zero_for_identical_frames(self):
        q = np.random.default_rng(0).normal(size=(4, 6, 6))
        assert relative_error(_Frames({"p": q.copy()}), _Frames({"p": q}), "p") == 0.0

    def test_scales_with_perturbation(self):
        rng = np.random.default_rng(1)
        q = rng.normal(size=(4, 6, 6))
        err = relative_error(_Frames({"p": q * 1.02}), _Frames({"p": q}), "p")
        assert err == pytest.approx(2.0)

    def test_region_restriction(self):
        q = np.ones((2, 4, 4))
        qp = q.copy()
        qp[:, 0, 0] = 2.0  # perturb one cell outside the region
        region = np.zeros((4, 4), dtype=bool)
        region[2:, 2:] = True
        assert relative_error(_Frames({"p": qp}), _Frames({"p": q}), "p", region) == 0.0

    def test_window_restriction(self):
        q = np.ones((4, 3, 3))
        qp = q.copy()
        qp[0] = 3.0  # perturb only the first frame
        err = relative_error(
            _Frames({"p": qp}), _Frames({"p": q}), "p", window=(1, 4)
        )
        assert err == 0.0

    def test_zero_reference_raises(self):
        z = np.zeros((2, 3, 3))
        with pytest.raises(ZeroReference):
            relative_error(_Frames({"p": z.copy()}), _Frames({"p": z}), "p")

    def test_shape_mismatch_raises(self):
        a = _Frames({"p": np.ones((2, 3, 3))})
        b = _Frames({"p": np.ones((2, 4, 4))})
        with pytest.raises(ValueError):
            relative_error(a, b, "p")


class TestTableSweep:
    def test_sweep_reports_and_determinism(self):
        cfg = small_config(nx=30, horizon=60)
        cells = [(9, 40.0), (3, 40.0)]
        first = sweep_csv(table1_sweep(cfg, cells))
        second = sweep_csv(table1_sweep(cfg, cells))
        assert first == second
        lines = first.strip().splitlines()
        assert lines[0].startswith("#")
        assert lines[1] == (
            "n_delta,sigma_pml,p_error,u_error,v_error,vorticity_error,status"
        )
        assert len(lines) == 4
        assert lines[2].startswith("9,") and lines[2].endswith(",ok")

    def test_failing_cell_recorded_not_raised(self):
        cfg = small_config(nx=30, horizon=60)
        reports = table1_sweep(cfg, [(3, 40.0), (15, 40.0)])
        assert reports[0].status == "ok"
        assert reports[1].status.startswith("LayerTooWide")
        assert reports[1].p_error is None


class TestStability:
    def test_probe_passes_on_decaying_run(self):
        cfg = small_config(nx=30, horizon=200)
        trace = stability_probe(cfg, multiplier=3, block_size=25)
        assert trace.passed
        assert all(f <= 1.05 for f in trace.factors.values())
        assert trace.bound_factor >= 1.0
        csv = stability_csv(trace)
        assert csv.splitlines()[1] == "block,t_end,max_p,max_u,max_v"

    def test_over_cfl_control_detects_blowup(self):
        cfg = small_config(nx=30, horizon=60)
        exc = over_cfl_control(cfg, cfl=1.5)
        assert isinstance(exc, UnstableState)
        assert exc.step_index >= 1


class TestProbeCsv:
    def test_schema_and_row_count(self):
        cfg = small_config(nx=30, horizon=20)
        out = run(cfg, record_fields=())
        csv = probe_csv(out)
        lines = csv.strip().splitlines()
        assert lines[0].startswith("# probe series:")
        assert lines[1].split(",")[:2] == ["step", "t"]
        assert len(lines) == 2 + cfg.horizon
        # one p,u,v,w quadruple per probe
        assert len(lines[2].split(",")) == 2 + 4 * len(cfg.probes)


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        arr = np.arange(12.0).reshape(3, 4)
        path = tmp_path / "p_000010.snap"
        write_snapshot(path, arr, "p", 10, 0.01, 0.02)
        meta, back = read_snapshot(path)
        assert meta["field"] == "p"
        assert meta["step"] == 10
        assert meta["dx"] == 0.01 and meta["dy"] == 0.02
        assert meta["byte-order"] == "little-endian"
        np.testing.assert_array_equal(back, arr)

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "junk"
        path.write_bytes(b"not a snapshot\ndata\n")
        with pytest.raises(ConfigError):
            read_snapshot(path)


class TestConfigIO:
    def test_round_trip(self):
        cfg = baseline_config()
        assert parse_config(format_config(cfg)) == cfg

    def test_unknown_key(self):
        text = format_config(baseline_config()) + "bogus = 1\n"
        with pytest.raises(ConfigError, match="bogus"):
            parse_config(text)

    def test_missing_key(self):
        text = "\n".join(
            line
            for line in format_config(baseline_config()).splitlines()
            if not line.startswith("grid.nx")
        )
        with pytest.raises(ConfigError, match="grid.nx"):
            parse_config(text)

    def test_duplicate_key(self):
        text = format_config(baseline_config()) + "horizon = 5\n"
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(text)

    def test_bad_number(self):
        text = format_config(baseline_config()).replace(
            "grid.cfl = 0.3", "grid.cfl = fast"
        )
        with pytest.raises(ConfigError, match="grid.cfl"):
            parse_config(text)

    def test_bad_side(self):
        text = format_config(baseline_config()).replace("x-min", "x-left")
        with pytest.raises(ConfigError, match="x-left"):
            parse_config(text)

    def test_bad_probe(self):
        text = format_config(baseline_config()) + "probe = 0.5\n"
        with pytest.raises(ConfigError, match="probe"):
            parse_config(text)

    def test_comments_and_blank_lines_ignored(self):
        text = "# banner\n\n" + format_config(baseline_config()) + "\n# tail\n"
        assert parse_config(text) == baseline_config()

    def test_sourceless_config(self):
        text = "\n".join(
            line
            for line in format_config(baseline_config()).splitlines()
            if not line.startswith("source.")
        )
        cfg = parse_config(text)
        assert cfg.source is None


class TestBaseline:
    def test_baseline_respects_travel_bound(self):
        cfg = baseline_config()
        assert check_travel_bound(cfg) >= cfg.horizon * time_step(cfg.grid, cfg.flow)

    def test_baseline_geometry(self):
        cfg = baseline_config()
        regions = build_region_map(cfg.grid, cfg.pml)
        n_layer = int(np.sum(regions.tag != TAG_INTERIOR))
        assert n_layer == 120 * 120 - 44 * 44
