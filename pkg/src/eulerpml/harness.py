"""Experiment orchestration around the solver.

Provides the reference-solution oracle on an enlarged domain, percent
relative-error metrics, layer-parameter sweeps, long-time stability
probes, and the plain-text file formats (config, CSV, snapshots) used
by the command line interface.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    PML_SIDES,
    SOURCE_TARGETS,
    FlowParams,
    GridSpec,
    PmlConfig,
    SourceSpec,
    time_step,
)
from .errors import (
    ConfigError,
    EulerPmlError,
    ReflectedContamination,
    UnstableState,
    ZeroReference,
)
from .solver import run
from .solver.state import TAG_INTERIOR, build_region_map

NORM_DESCRIPTOR = "space-time discrete L2, percent"


@dataclass
class ExperimentConfig:
    """Everything one experiment needs.

    horizon counts time steps; probes are (x, y) positions; enlargement
    is the linear factor by which the reference domain exceeds the
    truncated one in every direction.
    """

    flow: FlowParams
    grid: GridSpec
    pml: PmlConfig
    source: SourceSpec
    horizon: int
    probes: tuple = ()
    enlargement: int = 3
    record_every: int = 5

    def __post_init__(self):
        if self.enlargement < 2:
            raise ConfigError(
                f"enlargement must be >= 2, got {self.enlargement}"
            )
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")


def baseline_config() -> ExperimentConfig:
    """Desk-scale baseline: 120 x 120 cells, four-sided 38-cell layer.

    The source drives p and u so the field carries both acoustic and
    vorticity content. The pulse (center 1/fc, cut off at ts = 2/fc) is
    fully emitted early in the run, so the window contains the complete
    transit through the layers plus the ring-down in which any reflected
    energy is visible; the horizon stays inside the travel-time bound of
    the enlarged reference (see run_reference). The frequency is chosen
    well inside the resolved band (20 cells per wavelength): the layer's
    discretization error grows toward low frequencies because the
    auxiliary pressure, the antiderivative of p along the flow, scales
    like p/omega.
    """
    flow = FlowParams(u_bar=200.0, v_bar=100.0, rho_bar=1.0, c_bar=300.0)
    grid = GridSpec(lx=1.2, ly=1.2, nx=120, ny=120, cfl=0.3)
    pml = PmlConfig(sides=frozenset(PML_SIDES), delta=0.38, sigma_pml=40.0)
    source = SourceSpec(
        fc=1500.0,
        ts=2.0 / 1500.0,
        location=(0.6, 0.6),
        targets=frozenset(("p", "u")),
    )
    probes = ((0.45, 0.75), (0.5, 0.75), (0.45, 0.7), (0.5, 0.7))
    return ExperimentConfig(
        flow=flow,
        grid=grid,
        pml=pml,
        source=source,
        horizon=1000,
        probes=probes,
        enlargement=5,
        record_every=5,
    )


# ---------------------------------------------------------------------------
# reference oracle


def reference_geometry(cfg: ExperimentConfig):
    """Enlarged grid plus the cell offset of the original domain inside it."""
    grid, enl = cfg.grid, cfg.enlargement
    nxb, nyb = enl * grid.nx, enl * grid.ny
    ox = ((enl - 1) * grid.nx) // 2
    oy = ((enl - 1) * grid.ny) // 2
    big = GridSpec(
        lx=nxb * grid.dx, ly=nyb * grid.dy, nx=nxb, ny=nyb, cfl=grid.cfl
    )
    return big, ox, oy


def check_travel_bound(cfg: ExperimentConfig) -> float:
    """Largest admissible run time before outer-wall reflections re-enter.

    A signal leaving the comparison region needs at least
    2 margin / (c + |flow|) to reach the enlarged domain's outer wall and
    come back. Raises ReflectedContamination when cfg.horizon violates it.
    """
    big, ox, oy = reference_geometry(cfg)
    grid = cfg.grid
    margin = min(
        ox * grid.dx,
        (big.nx - ox - grid.nx) * grid.dx,
        oy * grid.dy,
        (big.ny - oy - grid.ny) * grid.dy,
    )
    speed = cfg.flow.c_bar + cfg.flow.speed
    t_max = 2.0 * margin / speed
    t_run = cfg.horizon * time_step(grid, cfg.flow)
    if t_run > t_max:
        raise ReflectedContamination(
            f"horizon {cfg.horizon} steps = {t_run:.4e} s exceeds the "
            f"travel-time bound {t_max:.4e} s for enlargement "
            f"{cfg.enlargement}"
        )
    return t_max


def run_reference(cfg: ExperimentConfig, record_fields=("p", "u", "v")):
    """Reference solution: no layers, enlarged domain, restricted output.

    Same spacing and time step as the truncated run; the source and the
    probes keep their positions relative to the original domain; frames
    are restricted to the original domain's cell box.
    """
    check_travel_bound(cfg)
    big, ox, oy = reference_geometry(cfg)
    grid = cfg.grid
    shift_x, shift_y = ox * grid.dx, oy * grid.dy
    src = cfg.source
    src_shifted = None
    if src is not None:
        src_shifted = replace(
            src, location=(src.location[0] + shift_x, src.location[1] + shift_y)
        )
    shifted = replace(
        cfg,
        grid=big,
        pml=PmlConfig(sides=frozenset(), delta=0.0, sigma_pml=0.0),
        source=src_shifted,
        probes=tuple((x + shift_x, y + shift_y) for (x, y) in cfg.probes),
    )
    return run(
        shifted,
        record_fields=record_fields,
        record_box=(ox, ox + grid.nx, oy, oy + grid.ny),
    )


# ---------------------------------------------------------------------------
# error metric


def comparison_masks(grid: GridSpec, pml: PmlConfig, rim: int = 2):
    """Boolean masks for the error regions of one layer configuration.

    Center masks (nx, ny) split cells into the Euler region and the layer
    region; corner masks (nx-1, ny-1) do the same for the vorticity
    geometry, excluding `rim` cells next to the outer walls where the
    truncated run's wall closures differ from the reference's interior
    stencils.
    """
    regions = build_region_map(grid, pml)
    in_layer = regions.tag != TAG_INTERIOR
    euler_c = ~in_layer
    # a corner is a layer corner when any adjacent cell is a layer cell
    lc = in_layer
    corner_layer = lc[1:, 1:] | lc[:-1, 1:] | lc[1:, :-1] | lc[:-1, :-1]
    keep = np.zeros_like(corner_layer)
    keep[rim : corner_layer.shape[0] - rim, rim : corner_layer.shape[1] - rim] = True
    return {
        "euler_centers": euler_c,
        "pml_centers": in_layer,
        "euler_corners": (~corner_layer) & keep,
        "pml_corners": corner_layer & keep,
    }


def relative_error(pml_run, ref_run, variable, region=None, window=None):
    """Percent error 100 ||q_pml - q_ref||_2 / ||q_ref||_2.

    The discrete L2 norm runs over the frames in `window` (a frame-index
    slice pair, default all) restricted to the boolean mask `region`
    (default everywhere). Raises ZeroReference when the reference norm
    vanishes.
    """
    qa = pml_run.frames[variable]
    qb = ref_run.frames[variable]
    if qa.shape != qb.shape:
        raise ValueError(
            f"frame shapes differ: {qa.shape} vs {qb.shape} for {variable}"
        )
    sl = slice(None) if window is None else slice(window[0], window[1])
    qa, qb = qa[sl], qb[sl]
    if region is not None:
        qa = qa[:, region]
        qb = qb[:, region]
    ref_norm = float(np.sqrt(np.sum(qb * qb)))
    if ref_norm == 0.0:
        raise ZeroReference(f"reference {variable} vanishes on the region")
    diff = qa - qb
    return 100.0 * float(np.sqrt(np.sum(diff * diff))) / ref_norm


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class ErrorReport:
    """Errors of one (n_delta, sigma_pml) cell of a sweep."""

    n_delta: int
    sigma_pml: float
    p_error: float = None
    u_error: float = None
    v_error: float = None
    vorticity_error: float = None
    norm: str = NORM_DESCRIPTOR
    status: str = "ok"


_SWEEP_FIELDS = ("p_error", "u_error", "v_error", "vorticity_error")
_SWEEP_VARS = ("p", "u", "v", "vorticity")


def table1_sweep(cfg: ExperimentConfig, cells):
    """One truncated run + error report per (n_delta, sigma_pml) cell.

    All cells share a single reference run (the reference does not depend
    on the layer). Solver failures inside one cell are recorded in that
    cell's status and do not abort the sweep.
    """
    fields = ("p", "u", "v", "vorticity")
    ref = run_reference(cfg, record_fields=fields)
    reports = []
    for (n_delta, sigma_pml) in cells:
        report = ErrorReport(n_delta=int(n_delta), sigma_pml=float(sigma_pml))
        pml = PmlConfig(
            sides=cfg.pml.sides,
            delta=n_delta * cfg.grid.dx,
            sigma_pml=sigma_pml,
        )
        try:
            out = run(cfg, pml=pml, record_fields=fields)
            masks = comparison_masks(cfg.grid, pml)
            report.p_error = relative_error(out, ref, "p", masks["euler_centers"])
            report.u_error = relative_error(out, ref, "u", masks["euler_centers"])
            report.v_error = relative_error(out, ref, "v", masks["euler_centers"])
            report.vorticity_error = relative_error(
                out, ref, "vorticity", masks["pml_corners"]
            )
        except EulerPmlError as exc:
            report.status = f"{type(exc).__name__}: {exc}"
        reports.append(report)
    return reports


def sweep_csv(reports) -> str:
    """Deterministic CSV for a sweep (identical inputs, identical bytes)."""
    buf = io.StringIO()
    buf.write(
        "# table1 sweep: one row per (n_delta, sigma_pml) cell; errors are "
        "percent space-time L2 (p, u, v over the Euler region; vorticity "
        "over the layer region)\n"
    )
    buf.write("n_delta,sigma_pml,p_error,u_error,v_error,vorticity_error,status\n")
    for r in reports:
        vals = []
        for name in _SWEEP_FIELDS:
            v = getattr(r, name)
            vals.append("" if v is None else f"{v:.6e}")
        buf.write(
            f"{r.n_delta},{r.sigma_pml:.6e},"
            + ",".join(vals)
            + f",{r.status}\n"
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# stability


@dataclass
class StabilityTrace:
    """Block maxima of one long run plus the pass/fail verdict.

    passed requires, per field, the maximum over the last quarter of the
    post-source blocks to stay within `factor_tol` times the maximum over
    the first quarter.
    """

    dt: float
    block_size: int
    n_steps: int
    cutoff_block: int
    block_max: dict
    factors: dict
    source_window_max: float
    overall_max: float
    factor_tol: float = 1.05
    passed: bool = False

    @property
    def bound_factor(self) -> float:
        if self.source_window_max == 0.0:
            return 0.0
        return self.overall_max / self.source_window_max


def stability_probe(
    cfg: ExperimentConfig, multiplier: int = 5, block_size: int = 100
) -> StabilityTrace:
    """Run cfg.horizon * multiplier steps and judge the block maxima."""
    if multiplier < 1:
        raise ConfigError(f"multiplier must be >= 1, got {multiplier}")
    n_steps = cfg.horizon * multiplier
    out = run(
        cfg,
        n_steps=n_steps,
        record_fields=(),
        record_every=n_steps,
        block_size=block_size,
    )
    dt = out.dt
    ts = cfg.source.ts if cfg.source is not None else 0.0
    cutoff_block = min(
        int(np.ceil(ts / (dt * block_size))), len(out.block_max["p"])
    )
    factors = {}
    passed = True
    for name in ("p", "u", "v"):
        post = out.block_max[name][cutoff_block:]
        if len(post) < 4:
            factors[name] = 0.0
            continue
        quarter = len(post) // 4
        first = float(np.max(post[:quarter]))
        last = float(np.max(post[-quarter:]))
        factors[name] = last / first if first > 0 else 0.0
        if factors[name] > 1.05:
            passed = False
    src_steps = int(np.ceil(ts / dt))
    src_blocks = max(1, int(np.ceil(src_steps / block_size)))
    source_window_max = float(np.max(out.block_max["p"][:src_blocks]))
    overall_max = float(np.max(out.block_max["p"]))
    return StabilityTrace(
        dt=dt,
        block_size=block_size,
        n_steps=n_steps,
        cutoff_block=cutoff_block,
        block_max=out.block_max,
        factors=factors,
        source_window_max=source_window_max,
        overall_max=overall_max,
        passed=passed,
    )


def over_cfl_control(cfg: ExperimentConfig, cfl: float = 1.5, max_steps: int = 3000):
    """Negative control: run with an over-CFL time step.

    Returns the UnstableState exception that the run raised; raises
    EulerPmlError if the run unexpectedly stays bounded.
    """
    from .solver import Stepper, init_state

    grid = cfg.grid
    dt = cfl * min(grid.dx, grid.dy) / (
        cfg.flow.c_bar + max(abs(cfg.flow.u_bar), abs(cfg.flow.v_bar))
    )
    state, regions = init_state(grid, cfg.pml)
    stepper = Stepper(cfg.flow, grid, regions, cfg.source, dt=dt)
    try:
        for _ in range(max_steps):
            stepper.step(state)
    except UnstableState as exc:
        return exc
    raise EulerPmlError(
        f"over-CFL control stayed bounded for {max_steps} steps at cfl={cfl}"
    )


def stability_csv(trace: StabilityTrace) -> str:
    buf = io.StringIO()
    buf.write(
        "# stability trace: per-block max |field| over blocks of "
        f"{trace.block_size} steps, dt={trace.dt:.9e}; source cutoff at "
        f"block {trace.cutoff_block}\n"
    )
    buf.write("block,t_end,max_p,max_u,max_v\n")
    n = len(trace.block_max["p"])
    for b in range(n):
        t_end = min((b + 1) * trace.block_size, trace.n_steps) * trace.dt
        buf.write(
            f"{b},{t_end:.9e},"
            f"{trace.block_max['p'][b]:.6e},"
            f"{trace.block_max['u'][b]:.6e},"
            f"{trace.block_max['v'][b]:.6e}\n"
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# probe CSV and snapshots


def probe_csv(out) -> str:
    buf = io.StringIO()
    coords = "; ".join(f"({x:g},{y:g})" for (x, y) in out.probe_xy)
    buf.write(
        "# probe series: step,t then p,u,v,vorticity per probe; probes at "
        + (coords if coords else "(none)")
        + "\n"
    )
    names = []
    for k in range(len(out.probe_xy)):
        names += [f"p{k}", f"u{k}", f"v{k}", f"w{k}"]
    buf.write("step,t," + ",".join(names) + "\n")
    for n in range(out.n_steps):
        row = [str(n + 1), f"{out.times[n]:.9e}"]
        for k in range(len(out.probe_xy)):
            for var in ("p", "u", "v", "vorticity"):
                row.append(f"{out.probes[var][k, n]:.9e}")
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


SNAPSHOT_MAGIC = "eulerpml-snapshot 1"


def write_snapshot(path, array, field_name, step, dx, dy):
    """Self-describing snapshot: ASCII header, little-endian float64 payload.

    The payload is C-ordered (the second index varies fastest), nx rows of
    ny values.
    """
    arr = np.ascontiguousarray(array, dtype="<f8")
    header = (
        f"{SNAPSHOT_MAGIC}\n"
        f"field {field_name}\n"
        f"step {int(step)}\n"
        f"nx {arr.shape[0]}\n"
        f"ny {arr.shape[1]}\n"
        f"dx {dx!r}\n"
        f"dy {dy!r}\n"
        "byte-order little-endian\n"
        "dtype float64\n"
        "data\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(arr.tobytes(order="C"))


def read_snapshot(path):
    """Returns (meta dict, array) for a snapshot file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    end = raw.index(b"data\n") + len(b"data\n")
    lines = raw[:end].decode("ascii").splitlines()
    if lines[0] != SNAPSHOT_MAGIC:
        raise ConfigError(f"not a snapshot file: {path}")
    meta = {}
    for line in lines[1:]:
        if line == "data":
            break
        key, _, value = line.partition(" ")
        meta[key] = value
    nx, ny = int(meta["nx"]), int(meta["ny"])
    arr = np.frombuffer(raw[end:], dtype="<f8", count=nx * ny).reshape(nx, ny)
    meta["step"] = int(meta["step"])
    meta["dx"] = float(meta["dx"])
    meta["dy"] = float(meta["dy"])
    return meta, arr.copy()


# ---------------------------------------------------------------------------
# plain-text config files

_REQUIRED_KEYS = (
    "flow.u_bar",
    "flow.v_bar",
    "flow.rho_bar",
    "flow.c_bar",
    "grid.lx",
    "grid.ly",
    "grid.nx",
    "grid.ny",
    "horizon",
)

_OPTIONAL_DEFAULTS = {
    "grid.cfl": "0.3",
    "pml.sides": "",
    "pml.delta": "0",
    "pml.sigma_pml": "0",
    "source.fc": "",
    "source.ts": "",
    "source.x": "",
    "source.y": "",
    "source.targets": "p",
    "enlargement": "3",
    "record_every": "5",
}


def _parse_kv(text: str):
    pairs = {}
    probes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "probe":
            probes.append(value)
        elif key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        else:
            pairs[key] = value
    return pairs, probes


def parse_config(text: str) -> ExperimentConfig:
    pairs, probe_lines = _parse_kv(text)
    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_DEFAULTS)
    unknown = sorted(set(pairs) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(k for k in _REQUIRED_KEYS if k not in pairs)
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    get = lambda k: pairs.get(k, _OPTIONAL_DEFAULTS.get(k, ""))  # noqa: E731

    def number(key, conv=float):
        value = get(key)
        try:
            return conv(value)
        except ValueError:
            raise ConfigError(f"{key}: cannot parse {value!r}") from None

    flow = FlowParams(
        u_bar=number("flow.u_bar"),
        v_bar=number("flow.v_bar"),
        rho_bar=number("flow.rho_bar"),
        c_bar=number("flow.c_bar"),
    )
    grid = GridSpec(
        lx=number("grid.lx"),
        ly=number("grid.ly"),
        nx=number("grid.nx", int),
        ny=number("grid.ny", int),
        cfl=number("grid.cfl"),
    )
    sides_raw = [s.strip() for s in get("pml.sides").split(",") if s.strip()]
    bad = sorted(set(sides_raw) - set(PML_SIDES))
    if bad:
        raise ConfigError(f"pml.sides: unknown sides {', '.join(bad)}")
    pml = PmlConfig(
        sides=frozenset(sides_raw),
        delta=number("pml.delta"),
        sigma_pml=number("pml.sigma_pml"),
    )
    source = None
    if get("source.fc"):
        targets = [t.strip() for t in get("source.targets").split(",") if t.strip()]
        bad = sorted(set(targets) - set(SOURCE_TARGETS))
        if bad:
            raise ConfigError(f"source.targets: unknown targets {', '.join(bad)}")
        source = SourceSpec(
            fc=number("source.fc"),
            ts=number("source.ts"),
            location=(number("source.x"), number("source.y")),
            targets=frozenset(targets),
        )
    probes = []
    for text_xy in probe_lines:
        parts = [s.strip() for s in text_xy.split(",")]
        if len(parts) != 2:
            raise ConfigError(f"probe: expected 'x, y', got {text_xy!r}")
        try:
            probes.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise ConfigError(f"probe: cannot parse {text_xy!r}") from None
    return ExperimentConfig(
        flow=flow,
        grid=grid,
        pml=pml,
        source=source,
        horizon=number("horizon", int),
        probes=tuple(probes),
        enlargement=number("enlargement", int),
        record_every=number("record_every", int),
    )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="ascii") as fh:
        return parse_config(fh.read())


def format_config(cfg: ExperimentConfig) -> str:
    lines = [
        "# eulerpml experiment config (key = value)",
        f"flow.u_bar = {cfg.flow.u_bar!r}",
        f"flow.v_bar = {cfg.flow.v_bar!r}",
        f"flow.rho_bar = {cfg.flow.rho_bar!r}",
        f"flow.c_bar = {cfg.flow.c_bar!r}",
        f"grid.lx = {cfg.grid.lx!r}",
        f"grid.ly = {cfg.grid.ly!r}",
        f"grid.nx = {cfg.grid.nx}",
        f"grid.ny = {cfg.grid.ny}",
        f"grid.cfl = {cfg.grid.cfl!r}",
        "pml.sides = " + ", ".join(s for s in PML_SIDES if s in cfg.pml.sides),
        f"pml.delta = {cfg.pml.delta!r}",
        f"pml.sigma_pml = {cfg.pml.sigma_pml!r}",
    ]
    if cfg.source is not None:
        lines += [
            f"source.fc = {cfg.source.fc!r}",
            f"source.ts = {cfg.source.ts!r}",
            f"source.x = {cfg.source.location[0]!r}",
            f"source.y = {cfg.source.location[1]!r}",
            "source.targets = "
            + ", ".join(t for t in SOURCE_TARGETS if t in cfg.source.targets),
        ]
    lines += [
        f"horizon = {cfg.horizon}",
        f"enlargement = {cfg.enlargement}",
        f"record_every = {cfg.record_every}",
    ]
    lines += [f"probe = {x!r}, {y!r}" for (x, y) in cfg.probes]
    return "\n".join(lines) + "\n"


def save_config(cfg: ExperimentConfig, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_config(cfg))
