"""Command-line front end: ``omdrift simulate | fit | pipeline``."""

import argparse
import configparser
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .design import build_design
from .model import BASIS_NAMES, N_BETA, describe
from .search import (
    HyperParams,
    NoRecordBelowCap,
    Problem,
    grid_search,
    initial_estimate,
    weight_grid,
    select_final,
    trace_cell,
    write_records_csv,
)
from .simulate import BoundaryConditions, ShootingError, n_steps, read_trajectory_csv, shoot, write_trajectory_csv

log = logging.getLogger("omdrift")

CASES = {
    "I": ({1: 0.5, 3: -1.2, 6: 1.0}, 0.8),
    "II": ({1: 0.5, 3: -1.2}, 0.8),
    "III": ({7: 1.0}, 0.8),
}

DEFAULT_GRID = "0:0.025:0.4,0.01:0.01:0.3"

# option name -> (type, default); shared by flags and the config file
OPTIONS = {
    "case": (str, None),
    "beta": (str, None),
    "eps": (float, None),
    "x0": (float, 0.0),
    "xT": (float, math.sqrt(2.0)),
    "T": (float, 1.0),
    "dt": (float, 1e-3),
    "seed": (int, None),
    "seeds": (int, 1),
    "grid": (str, DEFAULT_GRID),
    "theta0": (float, HyperParams.theta_t0),
    "h0": (float, HyperParams.h0),
    "e3cap": (float, 1.0),
    "jobs": (int, 1),
    "out": (str, "omdrift_out"),
    "trace": (str, ""),
    "input": (str, None),
}


class ConfigError(ValueError):
    pass


def case_beta(name):
    """Drift coefficients and eps of a named example."""
    try:
        coefs, eps = CASES[name]
    except KeyError:
        raise ConfigError(f"unknown case {name!r}; choose from {', '.join(CASES)}") from None
    beta = np.zeros(N_BETA)
    for i, v in coefs.items():
        beta[i] = v
    return beta, eps


def parse_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range {text!r} must be start:step:stop")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"range {text!r} is not numeric") from None


def parse_grid(text):
    """``k1min:k1step:k1max,k2min:k2step:k2max`` or ``k1/k2;k1/k2;...``."""
    text = text.strip()
    if "/" in text:
        cells = []
        for item in text.split(";"):
            a, _, c = item.partition("/")
            try:
                cells.append((float(a), float(c)))
            except ValueError:
                raise ConfigError(f"bad grid cell {item!r}") from None
        return cells
    k1, sep, k2 = text.partition(",")
    if not sep:
        raise ConfigError(f"grid {text!r} needs two comma-separated ranges")
    try:
        return weight_grid(parse_range(k1), parse_range(k2))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_cells(text):
    if not text:
        return []
    return parse_grid(text if "/" in text else text.replace(",", "/"))


@dataclass
class RunConfig:
    mode: str
    beta: np.ndarray = None
    eps: float = None
    x0: float = 0.0
    xT: float = math.sqrt(2.0)
    T: float = 1.0
    dt: float = 1e-3
    seed: int = 0
    seeds: int = 1
    grid: list = field(default_factory=weight_grid)
    hp: HyperParams = HyperParams()
    e3cap: float = 1.0
    jobs: int = 1
    out: Path = Path("omdrift_out")
    trace: list = field(default_factory=list)
    input: Path = None


def _read_config_file(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    if not parser.read(path):
        raise ConfigError(f"cannot read config file {path}")
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in OPTIONS:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            values[key] = raw
    return values


def build_config(mode, args):
    """Merge defaults, the optional config file and flags (flags win)."""
    merged = {k: default for k, (_, default) in OPTIONS.items()}
    if getattr(args, "config", None):
        merged.update(_read_config_file(args.config))
    for key in OPTIONS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    if merged["seed"] is None:
        merged["seed"] = os.environ.get("OMD_SEED", 0)
    try:
        typed = {k: (OPTIONS[k][0](v) if v is not None else None) for k, v in merged.items()}
    except ValueError as exc:
        raise ConfigError(f"bad option value: {exc}") from None

    cfg = RunConfig(mode=mode)
    if typed["case"] is not None:
        cfg.beta, cfg.eps = case_beta(typed["case"])
    if typed["beta"] is not None:
        vals = [v for v in typed["beta"].replace(" ", "").split(",") if v]
        if len(vals) != N_BETA:
            raise ConfigError(f"--beta needs {N_BETA} comma-separated values, got {len(vals)}")
        cfg.beta = np.array([float(v) for v in vals])
    if typed["eps"] is not None:
        cfg.eps = typed["eps"]
    if mode in ("simulate", "pipeline"):
        if cfg.beta is None:
            raise ConfigError("give --case or --beta")
        if cfg.eps is None:
            raise ConfigError("give --eps (or a --case)")
        if cfg.eps < 0:
            raise ConfigError("--eps must be non-negative")
    for name in ("x0", "xT", "T", "dt", "e3cap"):
        setattr(cfg, name, typed[name])
    try:
        n_steps(cfg.T, cfg.dt)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg.seed, cfg.seeds, cfg.jobs = typed["seed"], typed["seeds"], typed["jobs"]
    if cfg.seeds < 1 or cfg.jobs < 1:
        raise ConfigError("--seeds and --jobs must be >= 1")
    cfg.grid = parse_grid(typed["grid"])
    cfg.trace = parse_cells(typed["trace"])
    try:
        cfg.hp = HyperParams(theta_t0=typed["theta0"], h0=typed["h0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg.out = Path(typed["out"])
    if mode == "fit":
        if typed["input"] is None:
            raise ConfigError("fit needs a trajectory CSV (--input)")
        cfg.input = Path(typed["input"])
    return cfg


def run_simulate(cfg, path=None):
    """Shoot the boundary value problem and write ``trajectory.csv``."""
    cfg.out.mkdir(parents=True, exist_ok=True)
    traj = shoot(cfg.beta, cfg.eps, BoundaryConditions(cfg.x0, cfg.xT), cfg.T, cfg.dt)
    path = Path(path) if path else cfg.out / "trajectory.csv"
    write_trajectory_csv(traj, path)
    print(f"wrote {path} ({traj.z.size} samples); boundary residual {abs(traj.z[-1] - cfg.xT):.3e}")
    return traj


def _cell_tag(k1, k2):
    return f"{k1:g}_{k2:g}"


def fit_one(traj, cfg, seed, out):
    """Run the grid for one split seed; return the final record or None."""
    out.mkdir(parents=True, exist_ok=True)
    design = build_design(traj, 0.7, seed)
    problem = Problem.from_design(design)
    init = initial_estimate(problem)
    table = grid_search(problem, cfg.grid, cfg.hp, jobs=cfg.jobs, init=init)
    write_records_csv(out / "grid.csv", table)

    for k1, k2 in cfg.trace:
        rounds, accepted, inner = trace_cell(problem, init, k1, k2, cfg.hp)
        write_records_csv(out / f"trace_{_cell_tag(k1, k2)}.csv", rounds,
                          {"round": list(range(1, len(rounds) + 1)), "accepted": [int(a) for a in accepted]})
        write_records_csv(out / f"inner_{_cell_tag(k1, k2)}.csv", inner,
                          {"iteration": [r.iterations for r in inner]})

    try:
        final = select_final(table, cfg.e3cap)
    except NoRecordBelowCap as exc:
        final = None
        reason = str(exc)
    lines = [f"split seed: {seed}", f"grid cells: {len(table)}",
             f"sentinel cells: {sum(r.sentinel for r in table)}"]
    if final is None:
        sentinel = next((r for r in table if r.sentinel), table[0])
        write_records_csv(out / "final.csv", [sentinel])
        lines.append(f"no final model selected: {reason}")
    else:
        write_records_csv(out / "final.csv", [final])
        lines.append(f"selected cell: k1={final.k1:g}, k2={final.k2:g}, theta_T={final.theta_t:g}")
        lines.append(describe(final.beta, final.epsilon))
        for i in final.support:
            lines.append(f"  {BASIS_NAMES[i]:>7s}: {final.beta[i]!r}")
        lines.append(f"  epsilon: {final.epsilon!r}")
        e = final.errors
        lines.append(f"E1={e.E1:.6g} E2={e.E2:.6g} E3={e.E3:.6g} E4={e.E4} E5={e.E5} E6={e.E6:.6g}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return final


def run_fit(cfg, traj=None):
    """Fit every requested split seed; exit status 0 iff all selected a model."""
    if traj is None:
        traj = read_trajectory_csv(cfg.input)
    seeds = [cfg.seed + i for i in range(cfg.seeds)]
    finals = []
    for s in seeds:
        out = cfg.out if len(seeds) == 1 else cfg.out / f"seed_{s}"
        finals.append(fit_one(traj, cfg, s, out))
    if len(seeds) > 1:
        supports = {f.support if f else None for f in finals}
        print(f"supports identical across seeds: {len(supports) == 1}")
    return 0 if all(f is not None for f in finals) else 1


def run_pipeline(cfg):
    traj = run_simulate(cfg)
    return run_fit(cfg, traj)


def _add_common(p):
    p.add_argument("--config", help="INI file with the same keys as the flags; flags win")
    p.add_argument("--case", choices=sorted(CASES))
    p.add_argument("--beta", help="10 comma-separated drift coefficients")
    p.add_argument("--eps", type=float)
    p.add_argument("--x0", type=float)
    p.add_argument("--xT", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--out", help="output directory")


def _add_fit(p):
    p.add_argument("--seed", type=int, help="split seed (default: $OMD_SEED or 0)")
    p.add_argument("--seeds", type=int, help="number of consecutive split seeds")
    p.add_argument("--grid", help=f"k1 and k2 ranges start:step:stop (default {DEFAULT_GRID})")
    p.add_argument("--theta0", type=float)
    p.add_argument("--h0", type=float)
    p.add_argument("--e3cap", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--trace", help="cells to trace, e.g. '0.375/0.22;0/0.01'")


def make_parser():
    parser = argparse.ArgumentParser(prog="omdrift", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="mode", required=True)
    p = sub.add_parser("simulate", help="most probable path by shooting")
    _add_common(p)
    p = sub.add_parser("fit", help="identify drift and noise from a trajectory CSV")
    _add_common(p)
    _add_fit(p)
    p.add_argument("input", nargs="?", help="trajectory CSV with columns t,z")
    p = sub.add_parser("pipeline", help="simulate, then fit")
    _add_common(p)
    _add_fit(p)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args.mode, args)
        if cfg.mode == "simulate":
            run_simulate(cfg)
            return 0
        if cfg.mode == "fit":
            return run_fit(cfg)
        return run_pipeline(cfg)
    except ConfigError as exc:
        print(f"omdrift: {exc}", file=sys.stderr)
        return 2
    except (ShootingError, ArithmeticError) as exc:
        print(f"omdrift: simulation failed: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"omdrift: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
