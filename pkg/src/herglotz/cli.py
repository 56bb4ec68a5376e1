"""Command line front end: ``herglotz {presets,derive,simulate,dispersion,verify}``.

Effective settings are resolved as flags > config file > defaults and are
validated before anything is computed.  With ``--out DIR`` every run writes
its data plus ``manifest.json``; feeding that manifest back through
``--config`` reproduces the run byte for byte.

Exit codes: 0 success, 1 domain error, 2 usage or configuration error.
Errors are reported on stderr as ``error code=<module.code> message=<text>``.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dispersion import classify
from .elderive import (
    classical_field_equations,
    derive,
    extract_gamma,
    load_problem,
    problem_from_dict,
)
from .errors import ConfigError, HerglotzError
from .fieldsim import (
    DIRICHLET,
    PERIODIC,
    DampedWaveParams,
    Grid1P1D,
    LagrangianDensity,
    simulate_damped_wave,
    simulate_schrodinger,
)
from .herglotz1d import integrate_ivp, oscillator
from .presets import PRESET_NAMES, preset
from .stationarity import BumpPerturbation, verify_field, verify_path
from .symexpr import ZERO, Parameter, equivalent, substitute, to_string

NAMESPACE = "herglotz"


class _UsageError(Exception):
    pass


# --- settings ------------------------------------------------------------------------

# per-preset physics parameters and initial-data fixtures for `simulate`
SIMULATE_DEFAULTS = {
    "oscillator": {
        "params": {"m": 1.0, "k": 1.0, "gamma": 0.1},
        "initial": {"x0": 1.0, "v0": 0.0, "S0": 0.0},
        "duration": 20.0,
        "steps": 4096,
    },
    "string": {
        "params": {"mu": 1.0, "T": 1.0, "gamma": 0.1},
        "initial": {"mode": 1, "amplitude": 1.0},
        "length": 1.0,
        "duration": 8.0,
        "grid": [512, 4096],
        "bc": DIRICHLET,
    },
    "klein_gordon_1p1": {
        "params": {"gamma0": 0.5, "m": 1.0, "c": 1.0},
        "initial": {"k": 1, "amplitude": 1.0},
        "length": 2.0 * math.pi,
        "duration": 4.0,
        "grid": [128, 401],
        "bc": PERIODIC,
    },
    "em_1p1": {
        "params": {"gamma0": 1.0, "c": 1.0},
        "initial": {"k": 1, "amplitude": 1.0},
        "length": 2.0 * math.pi,
        "duration": 4.0,
        "grid": [128, 401],
        "bc": PERIODIC,
    },
    "schrodinger_1d": {
        "params": {"hbar": 1.0, "m": 1.0, "gamma0": 0.5, "gamma1": 0.0},
        "initial": {"center": 0.0, "sigma": 2.0, "k0": 0.5, "potential": "free", "omega": 1.0},
        "length": 20.0,
        "duration": 2.0,
        "grid": [401, 401],
        "bc": DIRICHLET,
    },
}

VERIFY_DEFAULTS = {
    "oscillator": {
        "params": {"m": 1.0, "k": 1.0, "gamma": 0.1},
        "duration": 2.0 * math.pi,
        "steps": 4096,
        "bump": {"center": [math.pi], "width": [1.0], "amplitude": 1.0},
        "eps": None,
        "offset": 0.5,
    },
    "string": {
        "params": {"mu": 1.0, "T": 1.0, "gamma": 0.2},
        "length": 1.0,
        "duration": 1.0,
        "grid": [256, 256],
        "bump": {"center": [0.5, 0.5], "width": [0.25, 0.25], "amplitude": 1.0},
        "eps": None,
        "offset": 0.5,
    },
}

COMMON_KEYS = {"preset", "format", "seed"}
COMMAND_KEYS = {
    "presets": {"format"},
    "derive": {"preset", "problem", "format", "seed", "classical"},
    "dispersion": {"gamma0", "k", "format"},
    "simulate": COMMON_KEYS | {"params", "initial", "duration", "length", "steps", "grid", "bc", "layout"},
    "verify": COMMON_KEYS | {"params", "duration", "length", "steps", "grid", "bump", "eps", "offset"},
}


def _read_config(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    if "command" in data and data["command"] != command:
        raise ConfigError(f"config was written for {data['command']!r}, not {command!r}")
    if "command" in data or NAMESPACE in data:
        data = data.get(NAMESPACE, {})
    if not isinstance(data, dict):
        raise ConfigError(f"{NAMESPACE!r} block must be a JSON object")
    unknown = sorted(set(data) - COMMAND_KEYS[command])
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")
    return data


def _merge_dict(base: dict, over: dict, what: str) -> dict:
    if not isinstance(over, dict):
        raise ConfigError(f"{what} must be an object")
    unknown = sorted(set(over) - set(base))
    if unknown:
        raise ConfigError(f"unknown {what} keys: {', '.join(unknown)}")
    out = dict(base)
    out.update(over)
    return out


def _number(value, what: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{what} must be a finite number")
    if positive and not value > 0:
        raise ConfigError(f"{what} must be positive")
    return float(value)


def _count(value, what: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{what} must be an integer >= {minimum}")
    return value


def _flag_params(args) -> dict:
    """Physics parameters given on the command line."""
    out = {}
    for item in args.param or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise _UsageError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise _UsageError(f"--param {name}: {value!r} is not a number") from None
    for name in ("gamma", "gamma0", "gamma1"):
        if getattr(args, name, None) is not None:
            out[name] = getattr(args, name)
    return out


def _resolve(command: str, args, table: dict | None) -> dict:
    """Defaults < config < flags, then validation."""
    cfg = _read_config(args.config, command) if args.config else {}
    name = args.preset or cfg.get("preset") or (next(iter(table)) if table else None)
    if table is not None and name not in table:
        raise ConfigError(f"{command} supports presets {', '.join(table)}; got {name!r}")
    eff = copy.deepcopy(table[name]) if table else {}
    eff["preset"] = name
    eff.setdefault("format", "csv" if command == "simulate" else "json")
    eff.setdefault("seed", 0)
    if command == "simulate":
        eff.setdefault("layout", "long")
    for key, value in cfg.items():
        if key in ("params", "initial", "bump"):
            eff[key] = _merge_dict(eff.get(key, {}), value, key)
        elif key == "preset":
            continue
        elif key not in eff:
            raise ConfigError(f"key {key!r} does not apply to preset {name!r}")
        else:
            eff[key] = value
    flag_params = _flag_params(args)
    if flag_params:
        eff["params"] = _merge_dict(eff["params"], flag_params, "params")
    for key in ("duration", "length", "steps", "grid", "format", "seed", "layout", "bc", "eps", "offset"):
        value = getattr(args, key, None)
        if value is None:
            continue
        if key not in eff:
            raise _UsageError(f"--{key} does not apply to preset {name!r}")
        eff[key] = value
    _validate(command, eff)
    return eff


def _validate(command: str, eff: dict) -> None:
    for name, value in eff["params"].items():
        _number(value, f"parameter {name}")
    for key in ("duration", "length"):
        if key in eff:
            _number(eff[key], key, positive=True)
    if "steps" in eff:
        _count(eff["steps"], "steps", 16)
    if "grid" in eff:
        grid = eff["grid"]
        if not (isinstance(grid, list) and len(grid) == 2):
            raise ConfigError("grid must be [nx, nt]")
        _count(grid[0], "grid nx", 8)
        _count(grid[1], "grid nt", 8)
    _count(eff["seed"], "seed", 0)
    formats = {"simulate": ("csv", "json"), "verify": ("json",)}[command]
    if eff["format"] not in formats:
        raise ConfigError(f"{command} supports --format {'|'.join(formats)}")
    if eff.get("layout", "long") not in ("long", "wide"):
        raise ConfigError("layout must be long or wide")
    if eff.get("bc", DIRICHLET) not in (DIRICHLET, PERIODIC):
        raise ConfigError("bc must be dirichlet or periodic")
    if eff.get("eps") is not None:
        _number(eff["eps"], "eps", positive=True)
    if "offset" in eff:
        _number(eff["offset"], "offset", positive=True)
    initial = eff.get("initial", {})
    for key, value in initial.items():
        if key == "potential":
            if value not in ("free", "harmonic"):
                raise ConfigError("potential must be free or harmonic")
        elif key in ("mode", "k"):
            _count(value, f"initial {key}", 1)
        else:
            _number(value, f"initial {key}", positive=key in ("sigma", "amplitude"))


# --- output --------------------------------------------------------------------------


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(args, command: str, eff: dict, files: dict[str, str], stdout_key: str) -> None:
    """Write data files and the manifest to --out, or the main file to stdout."""
    if args.out is None:
        sys.stdout.write(files[stdout_key])
        return
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    manifest = {
        "tool": "herglotz",
        "version": __version__,
        "command": command,
        NAMESPACE: eff,
        "outputs": sorted(files),
    }
    (out / "manifest.json").write_text(_dump_json(manifest), encoding="utf-8")


# --- subcommands ---------------------------------------------------------------------


def _cmd_presets(args) -> int:
    rows = {}
    for name in PRESET_NAMES:
        problem = preset(name)
        rows[name] = problem.to_dict()
    if args.format == "json":
        sys.stdout.write(_dump_json(rows))
    else:
        for name, row in rows.items():
            sys.stdout.write(f"{name}: L = {row['lagrangian']}\n")
    return 0


def _cmd_derive(args) -> int:
    cfg = _read_config(args.config, "derive") if args.config else {}
    eff = {"preset": None, "problem": None, "format": "text", "seed": 0, "classical": False}
    eff.update(cfg)
    for key in ("preset", "format", "seed"):
        if getattr(args, key) is not None:
            eff[key] = getattr(args, key)
    if args.problem is not None:
        eff["problem"], eff["preset"] = args.problem, None
    elif args.preset is not None:
        eff["problem"] = None
    if args.classical:
        eff["classical"] = True
    if (eff["preset"] is None) == (eff["problem"] is None):
        raise _UsageError("derive needs exactly one of --preset or --problem")
    if eff["format"] not in ("text", "json"):
        raise ConfigError("derive supports --format text|json")
    _count(eff["seed"], "seed", 0)

    if eff["preset"] is not None:
        problem = preset(eff["preset"])
    elif isinstance(eff["problem"], dict):
        problem = problem_from_dict(eff["problem"])
    else:
        problem = load_problem(eff["problem"])
        # embed the problem so the manifest does not depend on the file
        eff["problem"] = problem.to_dict()

    equations = classical_field_equations(problem) if eff["classical"] else derive(problem)
    text = "".join(f"{eq}\n" for eq in equations)
    classical = classical_field_equations(problem)
    report = {
        "equations": [eq.to_dict() for eq in equations],
        "gamma": [to_string(g) for g in extract_gamma(problem)],
        "lagrangian": to_string(problem.lagrangian),
    }
    if not eff["classical"]:
        # randomized check that the derived equations collapse to the classical ones at gamma = 0
        zero = problem.metadata.get("gamma_parameters", [])
        report["conservative_reduction"] = _reduces(problem, equations, classical, zero, eff["seed"])
    files = {"equations.txt": text, "equations.json": _dump_json(report)}
    _emit(args, "derive", eff, files, "equations.txt" if eff["format"] == "text" else "equations.json")
    return 0


def _reduces(problem, equations, classical, gamma_names, seed) -> bool | None:
    if not gamma_names:
        return None
    zero = {Parameter(g): ZERO for g in gamma_names}
    return all(
        equivalent(substitute(eq.lhs, zero), cl.lhs, trials=64, seed=seed)
        or equivalent(substitute(eq.lhs, zero), -cl.lhs, trials=64, seed=seed)
        for eq, cl in zip(equations, classical)
    )


def _parse_list(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise _UsageError(f"{what} expects comma-separated numbers") from None


def _cmd_dispersion(args) -> int:
    cfg = _read_config(args.config, "dispersion") if args.config else {}
    eff = {"gamma0": [1.0], "k": [1.0], "format": "table"}
    for key, value in cfg.items():
        eff[key] = value if key == "format" else ([value] if not isinstance(value, list) else value)
    if args.gamma0 is not None:
        eff["gamma0"] = _parse_list(args.gamma0, "--gamma0")
    if args.k is not None:
        eff["k"] = _parse_list(args.k, "--k")
    if args.format is not None:
        eff["format"] = args.format
    if eff["format"] not in ("table", "csv", "json"):
        raise ConfigError("dispersion supports --format table|csv|json")
    eff["gamma0"] = [_number(g, "gamma0") for g in eff["gamma0"]]
    eff["k"] = [_number(k, "k") for k in eff["k"]]
    rows = [classify(g, k).to_dict() for g in eff["gamma0"] for k in eff["k"]]
    cols = ["gamma0", "k", "regime", "re_lambda_plus", "im_lambda_plus",
            "re_lambda_minus", "im_lambda_minus", "speed"]

    def cell(v):
        return "-" if v is None else (v if isinstance(v, str) else repr(float(v)))

    table = [[cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in table)) for i, c in enumerate(cols)]
    text = "".join(
        "  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip() + "\n" for row in [cols] + table
    )
    csv_text = "".join(",".join("" if v == "-" else v for v in row) + "\n" for row in [cols] + table)
    files = {"dispersion.txt": text, "dispersion.csv": csv_text, "dispersion.json": _dump_json(rows)}
    main = {"table": "dispersion.txt", "csv": "dispersion.csv", "json": "dispersion.json"}[eff["format"]]
    _emit(args, "dispersion", eff, files, main)
    return 0


def _string_fixture(eff):
    p, ini = eff["params"], eff["initial"]
    nx, nt = eff["grid"]
    grid = Grid1P1D.uniform(eff["length"], eff["duration"], nx, nt, eff["bc"])
    u0 = ini["amplitude"] * np.sin(ini["mode"] * math.pi * grid.x / eff["length"])
    return grid, DampedWaveParams.string(p["mu"], p["T"], p["gamma"]), u0


def _cmd_simulate(args) -> int:
    eff = _resolve("simulate", args, SIMULATE_DEFAULTS)
    name, p, ini = eff["preset"], eff["params"], eff.get("initial", {})
    if name == "oscillator":
        sys_ = oscillator(p["m"], p["k"], p["gamma"])
        traj = integrate_ivp(sys_, ini["x0"], ini["v0"], ini["S0"], (0.0, eff["duration"]), eff["steps"])
        csv_text = traj.to_csv()
        summary = {
            "final": {"t": float(traj.t[-1]), "x": float(traj.x[-1]), "v": float(traj.v[-1]),
                      "S": float(traj.S[-1]), "H": float(traj.H[-1])},
        }
        files = {"trajectory.csv": csv_text, "summary.json": _dump_json(summary)}
        main = "trajectory.csv"
    else:
        nx, nt = eff["grid"]
        if name == "schrodinger_1d":
            grid = Grid1P1D.uniform(eff["length"], eff["duration"], nx, nt, DIRICHLET, x0=-0.5 * eff["length"])
            x = grid.x
            V = np.zeros_like(x)
            if ini["potential"] == "harmonic":
                V = 0.5 * p["m"] * ini["omega"] ** 2 * x * x
            psi0 = np.exp(-((x - ini["center"]) ** 2) / (2 * ini["sigma"] ** 2) + 1j * ini["k0"] * x)
            series = simulate_schrodinger(V, p["gamma0"], p["gamma1"], psi0, grid, p["hbar"], p["m"])
        else:
            if name == "string":
                grid, wave, u0 = _string_fixture(eff)
            else:
                grid = Grid1P1D.uniform(eff["length"], eff["duration"], nx, nt, eff["bc"])
                u0 = ini["amplitude"] * np.cos(ini["k"] * 2.0 * math.pi * grid.x / eff["length"])
                if name == "klein_gordon_1p1":
                    wave = DampedWaveParams.telegraph(p["gamma0"], p["m"], p["c"])
                else:
                    wave = DampedWaveParams.maxwell(p["gamma0"], p["c"])
            series = simulate_damped_wave(wave, u0, np.zeros_like(u0), grid, eff["bc"])
        csv_text = series.to_csv(eff["layout"])
        vals = series.values
        summary = {"final_l2": float(np.sqrt(np.sum(np.abs(vals[-1]) ** 2) * series.grid.dx)),
                   "nx": series.grid.nx, "nt": series.grid.nt}
        files = {"field.csv": csv_text, "summary.json": _dump_json(summary)}
        main = "field.csv"
    _emit(args, "simulate", eff, files, main if eff["format"] == "csv" else "summary.json")
    return 0


def _cmd_verify(args) -> int:
    eff = _resolve("verify", args, VERIFY_DEFAULTS)
    name, p, b = eff["preset"], eff["params"], eff["bump"]
    bump = BumpPerturbation(tuple(b["center"]), tuple(b["width"]), b["amplitude"])
    if name == "oscillator":
        sys_ = oscillator(p["m"], p["k"], p["gamma"])
        traj = integrate_ivp(sys_, 1.0, 0.0, 0.0, (0.0, eff["duration"]), eff["steps"])
        report = verify_path(sys_.lagrangian, traj.t, traj.x, bump, 0.0, eff["eps"], eff["offset"])
    else:
        grid, wave, u0 = _string_fixture(
            dict(eff, initial={"mode": 1, "amplitude": 1.0}, bc=DIRICHLET)
        )
        series = simulate_damped_wave(wave, u0, np.zeros_like(u0), grid)
        density = LagrangianDensity.from_problem(preset("string"), p)
        report = verify_field(density, series, bump, 0.0, eff["eps"], eff["offset"])
    out = dict(report.to_dict(), preset=name)
    _emit(args, "verify", eff, {"report.json": _dump_json(out)}, "report.json")
    return 0


# --- parser --------------------------------------------------------------------------


def _grid(text: str) -> list[int]:
    try:
        nx, nt = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected nx,nt") from None
    return [nx, nt]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herglotz", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("presets", help="list built-in problems")
    p.add_argument("--format", choices=("text", "json"), default="text")

    d = sub.add_parser("derive", help="print the field equations of a problem")
    d.add_argument("--preset", choices=PRESET_NAMES)
    d.add_argument("--problem", help="JSON problem file")
    d.add_argument("--classical", action="store_true", help="classical equations (gamma dropped)")
    d.add_argument("--format", choices=("text", "json"))

    s = sub.add_parser("simulate", help="integrate a preset numerically")
    s.add_argument("--preset", choices=tuple(SIMULATE_DEFAULTS))
    s.add_argument("--steps", type=int)
    s.add_argument("--grid", type=_grid, help="nx,nt")
    s.add_argument("--duration", type=float)
    s.add_argument("--length", type=float)
    s.add_argument("--bc", choices=(DIRICHLET, PERIODIC))
    s.add_argument("--layout", choices=("long", "wide"))
    s.add_argument("--format", choices=("csv", "json"))

    disp = sub.add_parser("dispersion", help="damping regimes of electromagnetic modes")
    disp.add_argument("--gamma0", help="value or comma-separated list")
    disp.add_argument("--k", help="value or comma-separated list")
    disp.add_argument("--format", choices=("table", "csv", "json"))

    v = sub.add_parser("verify", help="finite-difference stationarity check")
    v.add_argument("--preset", choices=tuple(VERIFY_DEFAULTS))
    v.add_argument("--steps", type=int)
    v.add_argument("--grid", type=_grid, help="nx,nt")
    v.add_argument("--duration", type=float)
    v.add_argument("--length", type=float)
    v.add_argument("--eps", type=float)
    v.add_argument("--offset", type=float)
    v.add_argument("--format", choices=("json",))

    for cmd in (d, s, disp, v):
        cmd.add_argument("--config", help="JSON config or a manifest from an earlier run")
        cmd.add_argument("--out", help="directory for data files and manifest.json")
    for cmd in (d, s, v):
        cmd.add_argument("--seed", type=int)
    for cmd in (s, v):
        cmd.add_argument("--gamma", type=float)
        cmd.add_argument("--gamma0", type=float)
        cmd.add_argument("--gamma1", type=float)
        cmd.add_argument("--param", action="append", metavar="NAME=VALUE")
    return parser


_COMMANDS = {
    "presets": _cmd_presets,
    "derive": _cmd_derive,
    "simulate": _cmd_simulate,
    "dispersion": _cmd_dispersion,
    "verify": _cmd_verify,
}


def _fail(code: str, message: str) -> None:
    one_line = " ".join(str(message).split())
    sys.stderr.write(f"error code={code} message={one_line}\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        _fail("cli.usage", exc)
        return 2
    except ConfigError as exc:
        _fail(exc.code, exc)
        return 2
    except HerglotzError as exc:
        _fail(exc.code, exc)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
