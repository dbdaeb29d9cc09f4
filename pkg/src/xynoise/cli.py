"""Command-line front end.

Every run reads an INI-style config (``--config``) and/or flags, with flags
taking precedence, and writes ``curve.csv``, ``manifest.txt`` and
``plot.svg`` into ``--out-dir``.  The manifest is itself a valid config, so

    xynoise sweep --config runs/w/manifest.txt --out-dir runs/w2

reproduces ``runs/w/curve.csv`` byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import __version__
from .dynamics import DEFAULT_DT, DEFAULT_TMAX, EvolutionParams, IntegrationDiverged, evolve
from .entanglement import DEFAULT_EPSILON, ConcurrenceTrace, NotApplicable, concurrence, entanglement_area, esd_time
from .experiments import (
    DEFAULT_REL_TOL,
    InsufficientData,
    SweepConfig,
    SweepFailed,
    classify_effect,
    default_grid,
    paper_spec,
    run_sweep,
    sweep_anisotropy,
    sweep_temperature,
)
from .io import OutputError, read_curve, write_csv, write_curve, write_manifest, write_svg_plot
from .operators import NOISE_MODELS, NoisePlacement
from .states import InvalidPreparation, get_preparation, initial_state, load_table_file, register_preparation
from .tables import TABLES, match_summary, reproduce_table

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MISMATCH = 0, 1, 2, 3, 4
TABLE_THRESHOLD = 0.9
COMMANDS = ("evolve", "sweep", "classify", "reproduce-table", "temp-sweep", "anisotropy-sweep")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Flat view of every run parameter; sections only group them on disk."""

    # [system]
    n_qubits: int = 3
    j: float = 0.2
    delta: float = 0.1
    omega0: float = 4.0
    gamma: float = 0.01
    nbar: float = 0.0
    periodic: bool = True
    double_two_qubit_bond: bool = False
    # [noise]
    placement: str = ""
    strength: float = 0.0
    grid: str = "default"
    model: str = "collective"  # or "independent": one noise source per qubit
    # [run]
    preparation: str = ""
    preparation_file: str = ""
    response: str = "auto"
    t_max: float = DEFAULT_TMAX
    dt: float = DEFAULT_DT
    epsilon: float = DEFAULT_EPSILON
    store_stride: int = 10
    rel_tol: float = DEFAULT_REL_TOL
    threads: int = 1
    log_x: bool = True
    # [sweep]
    nbar_grid: str = "0,0.5,1,2,4,6"
    delta_grid: str = "0.1,0.2,0.4"
    # [table]
    table: str = ""
    rows: str = ""
    # [classify]
    curve: str = ""


SECTIONS = {
    "system": ("n_qubits", "j", "delta", "omega0", "gamma", "nbar", "periodic", "double_two_qubit_bond"),
    "noise": ("placement", "strength", "grid", "model"),
    "run": ("preparation", "preparation_file", "response", "t_max", "dt", "epsilon", "store_stride", "rel_tol",
            "threads", "log_x"),
    "sweep": ("nbar_grid", "delta_grid"),
    "table": ("table", "rows"),
    "classify": ("curve",),
}
# written by us into manifests, accepted and ignored on read
MANIFEST_ONLY = {"manifest": ("command", "version", "duration_s"), "result": None}

_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(section, key, raw):
    kind = _TYPES[key]
    text = str(raw).strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            x = float(text)
            if not math.isfinite(x):
                raise ValueError
            return x
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected {kind}, got {text!r}") from None
    return text


def read_config_file(path) -> dict:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    values = {}
    for section in cp.sections():
        if section in MANIFEST_ONLY:
            allowed = MANIFEST_ONLY[section]
            if allowed is not None:
                unknown = set(cp[section]) - set(allowed)
                if unknown:
                    raise ConfigError(f"[{section}] unknown key {sorted(unknown)[0]!r}")
            continue
        if section not in SECTIONS:
            raise ConfigError(f"unknown section [{section}]; expected one of {sorted(SECTIONS)}")
        for key, raw in cp[section].items():
            if key not in SECTIONS[section]:
                raise ConfigError(f"[{section}] unknown key {key!r}; allowed: {', '.join(SECTIONS[section])}")
            values[key] = _convert(section, key, raw)
    return values


def _section_of(key):
    return next(s for s, keys in SECTIONS.items() if key in keys)


def parse_config(path=None, overrides: dict | None = None) -> RunConfig:
    """File values, then flag overrides, on top of the default physics."""
    values = read_config_file(path) if path else {}
    for key, raw in (overrides or {}).items():
        if raw is None:
            continue
        if key not in _TYPES:
            raise ConfigError(f"unknown parameter {key!r}")
        values[key] = _convert(_section_of(key), key, raw)
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def parse_float_list(text, key) -> list[float]:
    try:
        out = [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from None
    if not out:
        raise ConfigError(f"{key}: empty list")
    return out


def parse_grid(text) -> list[float]:
    """``default``, ``default:N`` (N points up to M=10) or a comma-separated list."""
    text = str(text).strip()
    if text.startswith("default"):
        _, _, n = text.partition(":")
        try:
            return default_grid(int(n)) if n else default_grid()
        except ValueError:
            raise ConfigError(f"grid: bad point count in {text!r}") from None
    grid = parse_float_list(text, "grid")
    for m in grid:
        if m < 0 or not math.isfinite(m):
            raise ConfigError(f"grid: value {m!r} must be finite and >= 0")
    if grid[0] != 0:
        raise ConfigError(f"grid: must start at 0, got {grid[0]!r}")
    for a, b in zip(grid, grid[1:]):
        if b <= a:
            raise ConfigError(f"grid: must be strictly increasing ({a!r} then {b!r})")
    return grid


def _placement(cfg: RunConfig) -> NoisePlacement:
    if cfg.model not in NOISE_MODELS:
        raise ConfigError(f"[noise] model: expected collective or independent, got {cfg.model!r}")
    try:
        return NoisePlacement.parse(cfg.placement, cfg.strength, cfg.model)
    except ValueError as exc:
        raise ConfigError(f"[noise] placement/strength: {exc}") from None


def _validate(cfg: RunConfig):
    try:
        spec = spec_of(cfg)
    except ValueError as exc:
        raise ConfigError(f"[system] {exc}") from None
    try:
        _placement(cfg).validate(spec.n_qubits)
    except ValueError as exc:
        raise ConfigError(f"[noise] placement: {exc}") from None
    parse_grid(cfg.grid)
    for key in ("t_max", "dt", "epsilon", "rel_tol"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(f"[run] {key}: must be > 0, got {getattr(cfg, key)!r}")
    if cfg.dt > cfg.t_max:
        raise ConfigError(f"[run] dt: {cfg.dt!r} exceeds t_max={cfg.t_max!r}")
    if cfg.store_stride < 1:
        raise ConfigError(f"[run] store_stride: must be >= 1, got {cfg.store_stride}")
    if cfg.threads < 1:
        raise ConfigError(f"[run] threads: must be >= 1, got {cfg.threads}")
    if cfg.response not in ("auto", "esd_time", "area"):
        raise ConfigError(f"[run] response: must be auto, esd_time or area, got {cfg.response!r}")


def spec_of(cfg: RunConfig):
    return paper_spec(
        cfg.n_qubits,
        J=cfg.j,
        delta=cfg.delta,
        omega0=cfg.omega0,
        gamma=cfg.gamma,
        nbar=cfg.nbar,
        periodic=cfg.periodic,
        double_two_qubit_bond=cfg.double_two_qubit_bond,
    )


def preparation_key(cfg: RunConfig) -> str:
    if cfg.preparation_file:
        try:
            prep = load_table_file(cfg.preparation_file, cfg.n_qubits)
        except OSError as exc:
            raise ConfigError(f"[run] preparation_file: {exc}") from None
        except (InvalidPreparation, ValueError) as exc:
            raise ConfigError(f"[run] preparation_file: {exc}") from None
        return register_preparation(f"file:{cfg.preparation_file}", prep)
    if not cfg.preparation:
        raise ConfigError("[run] preparation: required (catalog key or preparation_file)")
    try:
        prep = get_preparation(cfg.preparation)
    except KeyError as exc:
        raise ConfigError(f"[run] preparation: {exc.args[0]}") from None
    if prep.n_qubits != cfg.n_qubits:
        raise ConfigError(f"[run] preparation: {cfg.preparation!r} has {prep.n_qubits} qubits, n_qubits={cfg.n_qubits}")
    return cfg.preparation


def sweep_config(cfg: RunConfig) -> SweepConfig:
    key = preparation_key(cfg)
    try:
        return SweepConfig(
            preparation=key,
            spec=spec_of(cfg),
            placement=_placement(cfg).qubits,
            grid=tuple(parse_grid(cfg.grid)),
            response=cfg.response,
            t_max=cfg.t_max,
            dt=cfg.dt,
            epsilon=cfg.epsilon,
            store_stride=cfg.store_stride,
            noise_model=cfg.model,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def evolution_params(cfg: RunConfig) -> EvolutionParams:
    try:
        return EvolutionParams(spec_of(cfg), _placement(cfg), cfg.t_max, cfg.dt, cfg.store_stride)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def manifest_sections(cfg: RunConfig, command: str, duration: float, result: dict) -> dict:
    values = asdict(cfg)
    out = {"manifest": {"command": command, "version": __version__, "duration_s": round(duration, 3)}}
    for section, keys in SECTIONS.items():
        out[section] = {k: values[k] for k in keys}
    out["result"] = result
    return out


# --- commands -------------------------------------------------------------


def cmd_evolve(cfg: RunConfig, out: Path):
    key = preparation_key(cfg)
    params = evolution_params(cfg)
    traj = evolve(initial_state(key), params)
    C = concurrence(traj.reduced((1, 2)))
    write_csv(out / "curve.csv", ["t", "concurrence"], zip(traj.times, C))
    trace = ConcurrenceTrace(traj.times, C)
    result = {"initial_concurrence": float(C[0])}
    try:
        esd = esd_time(trace, cfg.epsilon)
        result["t_esd"] = "none" if esd.terminal else esd.t_esd
    except NotApplicable:
        result["t_esd"] = "not_applicable"
    area = entanglement_area(trace, cfg.epsilon)
    result["first_cycle_area"] = area.area
    write_svg_plot(out / "plot.svg", [("C(t)", traj.times, C)], "t", "concurrence",
                   title=f"{key}, {params.noise.label}, M={params.noise.strength:g}")
    return result, EXIT_OK


def _classify_result(curve, rel_tol):
    try:
        cls = classify_effect(curve, rel_tol)
    except InsufficientData as exc:
        return {"label": "insufficient_data", "note": str(exc)}
    return {
        "label": cls.label,
        "extrema": [f"{kind}@{m!r}" for m, _, kind in cls.extrema],
        "threshold": cls.notes["threshold"],
    }


def cmd_sweep(cfg: RunConfig, out: Path):
    config = sweep_config(cfg)
    curve = run_sweep(config, cfg.threads)
    write_curve(out / "curve.csv", curve)
    result = {"response": config.resolved_response, "censored_points": int(curve.censored.sum())}
    result.update(_classify_result(curve, cfg.rel_tol))
    write_svg_plot(out / "plot.svg", [(config.placement_label, curve.m_values, curve.responses)], "M",
                   config.resolved_response, title=config.preparation, logx=cfg.log_x)
    return result, EXIT_OK


def cmd_classify(cfg: RunConfig, out: Path):
    if not cfg.curve:
        raise ConfigError("[classify] curve: path to a curve CSV is required")
    try:
        curve = read_curve(cfg.curve)
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"[classify] curve: {exc}") from None
    try:
        cls = classify_effect(curve, cfg.rel_tol)
    except InsufficientData as exc:
        raise ConfigError(f"[classify] curve: {exc}") from None
    write_curve(out / "curve.csv", curve)
    write_svg_plot(out / "plot.svg", [("response", curve.m_values, curve.responses)], "M", "response",
                   title=cls.label, logx=cfg.log_x)
    result = {"label": cls.label, "extrema": [f"{kind}@{m!r}" for m, _, kind in cls.extrema],
              "threshold": cls.notes["threshold"]}
    return result, EXIT_OK


def cmd_reproduce_table(cfg: RunConfig, out: Path):
    if cfg.table not in TABLES:
        raise ConfigError(f"[table] table: expected one of {sorted(TABLES)}, got {cfg.table!r}")
    rows = [int(r) for r in parse_float_list(cfg.rows, "rows")] if cfg.rows else None

    def progress(c):
        mark = "ok" if c.match else ("flagged" if c.hard else "MISMATCH")
        print(f"{c.table} row {c.row:2d} {c.placement:6s} expected {c.expected:25s} got {c.predicted:25s} {mark}",
              flush=True)

    cells = reproduce_table(cfg.table, cfg.rel_tol, parse_grid(cfg.grid), cfg.threads, rows, progress,
                            t_max=cfg.t_max, dt=cfg.dt, epsilon=cfg.epsilon, store_stride=cfg.store_stride,
                            noise_model=cfg.model)
    write_csv(out / "report.csv", ["row", "preparation", "placement", "expected", "predicted", "match", "hard"],
              [(c.row, c.preparation, c.placement, c.expected, c.predicted, c.match, c.hard) for c in cells])
    write_csv(out / "curve.csv", ["row", "placement", "M", "response", "censored"],
              [(c.row, c.placement, m, r, bool(z)) for c in cells
               for m, r, z in zip(c.curve.m_values, c.curve.responses, c.curve.censored)])
    series = [(f"{c.row} {c.placement}", c.curve.m_values, c.curve.responses / max(c.curve.responses.max(), 1e-300))
              for c in cells]
    write_svg_plot(out / "plot.svg", series, "M", "response / max", title=f"Table {cfg.table}", logx=cfg.log_x)
    summary = match_summary(cells)
    result = {k: summary[k] for k in ("cells", "scored", "matched", "rate", "flagged", "flagged_matched")}
    result["mismatches"] = [f"row{c.row}:{c.placement}" for c in summary["mismatches"]]
    return result, EXIT_OK if summary["rate"] >= TABLE_THRESHOLD else EXIT_MISMATCH


def cmd_temp_sweep(cfg: RunConfig, out: Path):
    config = sweep_config(cfg)
    nbars = parse_float_list(cfg.nbar_grid, "nbar_grid")
    try:
        res = sweep_temperature(config, nbars, cfg.rel_tol, cfg.threads)
    except InsufficientData as exc:
        raise ConfigError(f"[noise] grid: {exc}") from None
    write_csv(out / "curve.csv", ["nbar", "M", "response", "censored"],
              [(nb, m, r, bool(z)) for nb, c in zip(res.nbar_values, res.curves)
               for m, r, z in zip(c.m_values, c.responses, c.censored)])
    write_svg_plot(out / "plot.svg", [(f"nbar={nb:g}", c.m_values, c.responses)
                                      for nb, c in zip(res.nbar_values, res.curves)],
                   "M", config.resolved_response, title=config.preparation, logx=cfg.log_x)
    result = {"labels": [f"{nb!r}:{lab}" for nb, lab in zip(res.nbar_values, res.labels)],
              "nbar_critical": "none" if res.nbar_critical is None else res.nbar_critical}
    return result, EXIT_OK


def cmd_anisotropy_sweep(cfg: RunConfig, out: Path):
    config = sweep_config(cfg)
    deltas = parse_float_list(cfg.delta_grid, "delta_grid")
    try:
        fam = sweep_anisotropy(config, deltas, cfg.threads)
    except ValueError as exc:
        raise ConfigError(f"[sweep] delta_grid: {exc}") from None
    write_csv(out / "curve.csv", ["delta", "M", "response", "censored"],
              [(d, m, r, bool(z)) for d, c, _ in fam for m, r, z in zip(c.m_values, c.responses, c.censored)])
    write_svg_plot(out / "plot.svg", [(f"delta={d:g}", c.m_values, c.responses) for d, c, _ in fam],
                   "M", config.resolved_response, title=config.preparation, logx=cfg.log_x)
    gains = [g for _, _, g in fam]
    result = {"gains": [f"{d!r}:{g!r}" for d, _, g in fam],
              "gain_decreasing": all(b < a for a, b in zip(gains, gains[1:]))}
    return result, EXIT_OK


HANDLERS = {
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "reproduce-table": cmd_reproduce_table,
    "temp-sweep": cmd_temp_sweep,
    "anisotropy-sweep": cmd_anisotropy_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file; flags override its values")
    common.add_argument("--out-dir", default="run", help="output directory (default: ./run)")
    common.add_argument("--n-qubits", dest="n_qubits", type=int)
    common.add_argument("--preparation", help="catalog key, e.g. w_state or psi_plus_4q_prep5")
    common.add_argument("--preparation-file", dest="preparation_file", help="custom table: lines of 'row col re [im]'")
    common.add_argument("--placement", help="noisy qubits, e.g. 3,4 or M34")
    common.add_argument("--strength", type=float, help="noise strength M (evolve)")
    common.add_argument("--model", choices=NOISE_MODELS,
                        help="noise on several qubits: one shared source (collective) or one per qubit")
    common.add_argument("--grid", help="'default', 'default:N' or comma-separated M values starting at 0")
    common.add_argument("--j", type=float, help="J = (jx + jy) / 2")
    common.add_argument("--delta", type=float, help="anisotropy (jx - jy) / 2")
    common.add_argument("--omega0", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--nbar", type=float)
    common.add_argument("--response", choices=("auto", "esd_time", "area"))
    common.add_argument("--tmax", dest="t_max", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--stride", dest="store_stride", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--rel-tol", dest="rel_tol", type=float)
    common.add_argument("--threads", type=int)
    common.add_argument("--nbar-grid", dest="nbar_grid")
    common.add_argument("--delta-grid", dest="delta_grid")
    common.add_argument("--rows", help="table rows to run, e.g. 1,5")
    common.add_argument("--linear-x", dest="log_x", action="store_const", const=False, help="linear M axis in plots")

    parser = argparse.ArgumentParser(prog="xynoise", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"xynoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="one trajectory; writes C(t)")
    sub.add_parser("sweep", parents=[common], help="response over the M grid, classified")
    p = sub.add_parser("classify", parents=[common], help="classify an existing curve CSV")
    p.add_argument("curve", nargs="?", help="CSV with columns M,response,censored")
    p = sub.add_parser("reproduce-table", parents=[common], help="re-run one summary table (A1-A6)")
    p.add_argument("table", nargs="?", help="A1 ... A6")
    sub.add_parser("temp-sweep", parents=[common], help="M sweeps over an nbar grid")
    sub.add_parser("anisotropy-sweep", parents=[common], help="M sweeps over a Delta grid at fixed J")
    return parser


_NOT_PARAMS = {"command", "config", "out_dir"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMS and v is not None}
    out = Path(args.out_dir)
    t0 = time.perf_counter()
    try:
        cfg = parse_config(args.config, overrides)
        result, code = HANDLERS[args.command](cfg, out)
        write_manifest(out / "manifest.txt", manifest_sections(cfg, args.command, time.perf_counter() - t0, result))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationDiverged, SweepFailed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for key, value in result.items():
        print(f"{key} = {value}")
    if code == EXIT_MISMATCH:
        print(f"match rate below {TABLE_THRESHOLD:.0%}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
