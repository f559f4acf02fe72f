"""Command line interface.

Subcommands:
    verify-smith  residuals and Smith diagonals over random flows, CSV
    modes         wave/convection exponents over an (omega, k) grid, CSV
    reflect       interface reflection report over randomized draws, CSV
    run           one truncated simulation from a config file
    reference     the enlarged-domain reference run for a config file
    table1        layer-parameter sweep, CSV
    stability     long-run block maxima plus the over-CFL negative control
    bench         python vs compiled kernel timing

Every report subcommand accepts --check, which exits nonzero when the
corresponding acceptance bound fails. All CSV output starts with a
one-line schema comment.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .core import FlowParams, FourierPoint, GridSpec, PmlConfig, validate_flow
from .errors import EulerPmlError, UnstableState
from .modes import (
    lambdas,
    lambdas_pml,
    mode_set,
    reflection_model1,
    reflection_model1_closed_form,
    reflection_model2,
    regime_of,
)
from .polymat import (
    advective_pml_symbol,
    advective_symbol,
    build_euler_symbol,
    build_model2_symbol,
    smith_diagonal,
    transport_symbol,
    verify_factorization,
    verify_pressure_reduction,
)
from . import harness
from .harness import (
    load_config,
    over_cfl_control,
    probe_csv,
    run_reference,
    stability_csv,
    stability_probe,
    sweep_csv,
    table1_sweep,
    write_snapshot,
)
from .solver import run as solver_run


def _write(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)


def _random_flow(rng) -> FlowParams:
    # |u_bar| bounded away from 0: the mode formulas divide by it
    c = rng.uniform(100.0, 400.0)
    return FlowParams(
        u_bar=rng.uniform(0.05, 0.7) * c * rng.choice((-1.0, 1.0)),
        v_bar=rng.uniform(-0.6, 0.6) * c,
        rho_bar=rng.uniform(0.2, 5.0),
        c_bar=c,
    )


def _random_point(flow, rng) -> FourierPoint:
    # keep omega + k v_bar and omega + k u_bar away from zero (the factor
    # symbols are degenerate there) and the exponent scale |s|/|u_bar|
    # moderate so the gcd arithmetic stays well conditioned
    while True:
        omega = rng.uniform(50.0, 2000.0) * rng.choice((-1.0, 1.0))
        k = rng.uniform(0.1, 20.0) * rng.choice((-1.0, 1.0))
        pt = FourierPoint(omega=omega, k=k)
        s = abs(pt.s(flow))
        if 1.0 < s <= 20.0 * abs(flow.u_bar) and abs(omega + k * flow.u_bar) > 1.0:
            return pt


def _ratio_spread(p, q, points):
    """Relative spread of p(z)/q(z): zero iff p is a scalar multiple of q."""
    ratios = [p(z) / q(z) for z in points]
    mean = sum(ratios) / len(ratios)
    return max(abs(r - mean) for r in ratios) / abs(mean)


_EVAL_POINTS = (0.3 + 0.1j, -0.7 + 0.4j, 1.1 - 0.2j, -0.2 - 0.9j)


def _diag_deviation(flow, pt, sigma) -> float:
    """Worst lambda-independence defect of the nontrivial Smith entries.

    The 3x3 Euler diagonal must end in a multiple of the transport times
    the advective-wave symbol; the 4x4 second-model diagonal must end in
    multiples of the transport symbol and of the transport times the
    PML-stretched wave symbol. The leading entries must be the constant 1.
    """
    g = transport_symbol(flow, pt)
    lw = advective_symbol(flow, pt)
    lp = advective_pml_symbol(flow, pt, sigma)
    d3 = smith_diagonal(build_euler_symbol(flow, pt)).d
    d4 = smith_diagonal(build_model2_symbol(flow, pt, sigma=sigma)).d
    dev = 0.0
    for one in (d3[0], d3[1], d4[0], d4[1]):
        dev = max(dev, abs(one(0.0) - 1.0) + abs(one(1.0) - 1.0))
    dev = max(dev, _ratio_spread(d3[2], g * lw, _EVAL_POINTS))
    dev = max(dev, _ratio_spread(d4[2], g, _EVAL_POINTS))
    dev = max(dev, _ratio_spread(d4[3], g * lp, _EVAL_POINTS))
    return dev


def cmd_verify_smith(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    worst_res = 0.0
    worst_dev = 0.0
    t0 = time.time()
    for _ in range(args.flows):
        flow = _random_flow(rng)
        pt = _random_point(flow, rng)
        res = verify_factorization(flow, pt, samples=None)
        res2 = verify_pressure_reduction(flow, pt, samples=None)
        dev = _diag_deviation(flow, pt, args.sigma)
        worst_res = max(worst_res, res, res2)
        worst_dev = max(worst_dev, dev)
        rows.append(
            f"{flow.u_bar:.6e},{flow.v_bar:.6e},{flow.c_bar:.6e},"
            f"{pt.omega:.6e},{pt.k:.6e},{res:.3e},{res2:.3e},{dev:.3e}"
        )
    elapsed = time.time() - t0
    buf = [
        "# smith verification: one row per random (flow, omega, k); "
        "residuals of A=EDF and of the model-2 pressure reduction, and the "
        "worst lambda-independence deviation of both Smith diagonals",
        "u_bar,v_bar,c_bar,omega,k,residual_edf,residual_reduction,diag_deviation",
    ]
    buf += rows
    buf.append(
        f"# worst residual {worst_res:.3e}, worst diagonal deviation "
        f"{worst_dev:.3e}, elapsed {elapsed:.2f} s"
    )
    _write("\n".join(buf) + "\n", args.output)
    if args.check and (worst_res > 1e-10 or worst_dev > 1e-9):
        return 1
    return 0


def cmd_modes(args):
    flow = FlowParams(*args.flow)
    validate_flow(flow, for_modes=True)
    omegas = np.linspace(args.omega[0], args.omega[1], int(args.omega[2]))
    ks = np.linspace(args.k[0], args.k[1], int(args.k[2]))
    buf = [
        "# mode exponents per (omega, k): lambda1..3 of the Euler symbol and "
        f"lambda1..3 of the PML symbol at sigma={args.sigma:g}",
        "omega,k,regime,"
        "re_l1,im_l1,re_l2,im_l2,re_l3,im_l3,"
        "re_l1p,im_l1p,re_l2p,im_l2p,re_l3p,im_l3p",
    ]
    for omega in omegas:
        for k in ks:
            pt = FourierPoint(omega=float(omega), k=float(k))
            try:
                ms = lambdas(flow, pt)
                pm = lambdas_pml(flow, pt, args.sigma)
            except EulerPmlError as exc:
                buf.append(f"{omega:.6e},{k:.6e},skipped: {type(exc).__name__},,,,,,,,,,,,")
                continue
            vals = list(ms.exponents) + list(pm.exponents)
            buf.append(
                f"{omega:.6e},{k:.6e},{regime_of(flow, pt)},"
                + ",".join(f"{z.real:.9e},{z.imag:.9e}" for z in vals)
            )
    _write("\n".join(buf) + "\n", args.output)
    return 0


def cmd_reflect(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    worst_a3 = 0.0
    worst_beta = 0.0
    worst_w11 = 0.0
    n_ok = 0
    for _ in range(args.draws):
        flow = _random_flow(rng)
        pt = _random_point(flow, rng)
        sigma = rng.uniform(1.0, 200.0)
        a1 = rng.normal() + 1j * rng.normal()
        a2 = rng.normal() + 1j * rng.normal()
        try:
            b1, b2, a3_1 = reflection_model1(flow, pt, sigma, a1, a2)
            b1c, b2c = reflection_model1_closed_form(flow, pt, sigma, a1, a2)
            _b0, _b1m2, _b2m2, a3_2 = reflection_model2(flow, pt, sigma, a1, a2)
            ms = mode_set(flow, pt)
        except EulerPmlError as exc:
            rows.append(f",,,,skipped: {type(exc).__name__}")
            continue
        scale = abs(a1) + abs(a2)
        r1 = abs(a3_1) / scale
        r2 = abs(a3_2) / scale
        beta_dev = max(
            abs(b1 - b1c) / max(abs(b1c), 1e-300),
            abs(b2 - b2c) / max(abs(b2c), 1e-300),
        )
        w11 = abs(ms.w1[0])
        worst_a3 = max(worst_a3, r1, r2)
        worst_beta = max(worst_beta, beta_dev)
        worst_w11 = max(worst_w11, w11)
        n_ok += 1
        rows.append(
            f"{sigma:.6e},{r1:.3e},{r2:.3e},{beta_dev:.3e},{w11:.3e}"
        )
    buf = [
        "# reflection report per random draw: |alpha3|/(|alpha1|+|alpha2|) "
        "for both models, closed-form beta deviation (model 1), |(W1)_1|",
        "sigma,alpha3_model1,alpha3_model2,beta_deviation,w1_first",
    ]
    buf += rows
    buf.append(
        f"# {n_ok}/{args.draws} draws evaluated; worst alpha3 ratio "
        f"{worst_a3:.3e}, worst beta deviation {worst_beta:.3e}, "
        f"worst |(W1)_1| {worst_w11:.3e}"
    )
    _write("\n".join(buf) + "\n", args.output)
    if args.check and (
        worst_a3 > 1e-11 or worst_beta > 1e-11 or worst_w11 > 1e-12
    ):
        return 1
    return 0


def _write_snapshots(out, args, grid):
    if args.snapshot_dir is None:
        return
    os.makedirs(args.snapshot_dir, exist_ok=True)
    for name, stack in out.frames.items():
        steps = out.frame_steps
        pick = range(len(steps)) if args.snapshot_all else [len(steps) - 1]
        for idx in pick:
            path = os.path.join(
                args.snapshot_dir, f"{name}_{steps[idx]:06d}.snap"
            )
            write_snapshot(path, stack[idx], name, steps[idx], grid.dx, grid.dy)


def cmd_run(args):
    cfg = load_config(args.config)
    out = solver_run(cfg, record_fields=tuple(args.fields.split(",")))
    _write(probe_csv(out), args.output)
    _write_snapshots(out, args, cfg.grid)
    return 0


def cmd_reference(args):
    cfg = load_config(args.config)
    out = run_reference(cfg, record_fields=tuple(args.fields.split(",")))
    _write(probe_csv(out), args.output)
    _write_snapshots(out, args, cfg.grid)
    return 0


def _parse_cells(text):
    cells = []
    for part in text.split(","):
        nd, _, sig = part.partition(":")
        cells.append((int(nd), float(sig)))
    if not cells:
        raise SystemExit("table1: no cells given")
    return cells


def cmd_table1(args):
    cfg = load_config(args.config)
    cells = _parse_cells(args.cells)
    reports = table1_sweep(cfg, cells)
    _write(sweep_csv(reports), args.output)
    if not args.check:
        return 0
    wide, narrow = reports[0], reports[-1]
    ok = (
        wide.status == "ok"
        and narrow.status == "ok"
        and wide.p_error < 1.0
        and wide.u_error < 1.0
        and wide.v_error < 1.0
        and wide.vorticity_error < 1e-10
        and narrow.p_error >= 5.0 * wide.p_error
    )
    return 0 if ok else 1


def cmd_stability(args):
    cfg = load_config(args.config)
    trace = stability_probe(cfg, multiplier=args.multiplier)
    _write(stability_csv(trace), args.output)
    control_ok = True
    if args.control:
        try:
            exc = over_cfl_control(cfg)
            sys.stderr.write(
                f"over-CFL control: UnstableState at step {exc.step_index}\n"
            )
        except EulerPmlError as err:
            control_ok = False
            sys.stderr.write(f"over-CFL control FAILED: {err}\n")
    sys.stderr.write(
        f"stability: passed={trace.passed} factors="
        + " ".join(f"{k}={v:.4f}" for k, v in trace.factors.items())
        + f" bound_factor={trace.bound_factor:.3e}\n"
    )
    if args.check and not (trace.passed and control_ok):
        return 1
    return 0


def cmd_bench(args):
    from .core import SourceSpec
    from .solver import kernels_py, set_backend, backend_name, get_backend
    from .solver.driver import Stepper
    from .solver.state import init_state

    flow = FlowParams(200.0, 100.0, 1.0, 300.0)
    grid = GridSpec(1.2, 1.2, args.nx, args.nx, cfl=0.3)
    pml = PmlConfig(
        sides=frozenset(("x-min", "x-max", "y-min", "y-max")),
        delta=0.38 * grid.lx / 1.2,
        sigma_pml=40.0,
    )
    source = SourceSpec(
        fc=600.0, ts=3.4e-3, location=(grid.lx / 2, grid.ly / 2),
        targets=frozenset(("p", "u")),
    )
    backends = ["python"]
    try:
        from .solver import _kernels  # noqa: F401
        backends.append("compiled")
    except ImportError:
        sys.stderr.write("compiled backend not available\n")

    results = {}
    finals = {}
    saved = backend_name()
    try:
        for name in backends:
            set_backend(name)
            state, regions = init_state(grid, pml)
            stepper = Stepper(flow, grid, regions, source)
            for _ in range(args.warmup):
                stepper.step(state)
            t0 = time.perf_counter()
            for _ in range(args.steps):
                stepper.step(state)
            results[name] = (time.perf_counter() - t0) / args.steps * 1e3
            finals[name] = state.p.copy()
    finally:
        set_backend(saved)

    print(f"# kernel benchmark: {args.nx}x{args.nx} grid, {args.steps} steps")
    print("backend,ms_per_step")
    for name, ms in results.items():
        print(f"{name},{ms:.4f}")
    if len(results) == 2:
        print(f"# speedup compiled vs python: {results['python']/results['compiled']:.2f}x")
        scale = max(1e-300, float(np.max(np.abs(finals["python"]))))
        dev = float(np.max(np.abs(finals["python"] - finals["compiled"]))) / scale
        print(f"# relative max |p| disagreement after run: {dev:.3e}")
    return 0


def _add_output(p):
    p.add_argument(
        "-o", "--output", default="-",
        help="output path for the CSV report (default stdout)",
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="eulerpml",
        description="Smith-factorization PML toolkit for the 2D linearized "
        "Euler equations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-smith", help="factorization residual report")
    p.add_argument("--flows", type=int, default=100)
    p.add_argument("--sigma", type=float, default=25.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_verify_smith)

    p = sub.add_parser("modes", help="exponent table over an (omega, k) grid")
    p.add_argument(
        "--flow", type=float, nargs=4, default=[200.0, 100.0, 1.0, 300.0],
        metavar=("U", "V", "RHO", "C"),
    )
    p.add_argument(
        "--omega", type=float, nargs=3, default=[100.0, 1000.0, 4],
        metavar=("LO", "HI", "N"),
    )
    p.add_argument(
        "--k", type=float, nargs=3, default=[0.5, 8.0, 4], metavar=("LO", "HI", "N")
    )
    p.add_argument("--sigma", type=float, default=25.0)
    _add_output(p)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("reflect", help="interface reflection report")
    p.add_argument("--draws", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_reflect)

    for name, func, help_text in (
        ("run", cmd_run, "truncated-domain simulation"),
        ("reference", cmd_reference, "enlarged-domain reference run"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.add_argument(
            "--fields", default="p",
            help="comma list of frame fields (p,u,v,P,vorticity)",
        )
        p.add_argument("--snapshot-dir", default=None)
        p.add_argument(
            "--snapshot-all", action="store_true",
            help="write every recorded frame, not only the last",
        )
        _add_output(p)
        p.set_defaults(func=func)

    p = sub.add_parser("table1", help="layer-parameter sweep")
    p.add_argument("--config", required=True)
    p.add_argument(
        "--cells", default="38:40,8:40",
        help="comma list of n_delta:sigma_pml cells; with --check the first "
        "cell must beat the error bounds and the last cell's p error must "
        "exceed the first by 5x",
    )
    p.add_argument("--check", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("stability", help="long-run stability probe")
    p.add_argument("--config", required=True)
    p.add_argument("--multiplier", type=int, default=5)
    p.add_argument(
        "--control", action="store_true",
        help="also run the over-CFL negative control",
    )
    p.add_argument("--check", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("bench", help="python vs compiled kernel timing")
    p.add_argument("--nx", type=int, default=120)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--warmup", type=int, default=10)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EulerPmlError, OSError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
