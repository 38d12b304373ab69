"""Command-line experiment runner.

``dynomd run CONFIG`` executes every section of an INI config, writing
``<out>/<section>/trace.csv`` and ``<out>/<section>/report.csv``.
``dynomd compare CONFIG...`` runs the OCO sections and prints one summary
row per section. Exit status: 0 success, 1 a bound check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import logging
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import environment as env
from . import game as gm
from .aomd import aomd_run
from .errors import ConfigError, DynomdError
from .geometry import Geometry
from .metrics import (BoundCheck, epoch_bound, format_report, lemma1_rhs, lemma2_rhs,
                      min_branch, theorem1_rhs, write_report)
from .omd import run_omd, static_regret_bound
from .predictor import External, by_name

log = logging.getLogger("dynomd")

EXIT_OK, EXIT_BOUND, EXIT_INVALID = 0, 1, 2

OCO_ALGORITHMS = ("omd-static", "aomd")
GAME_ALGORITHMS = ("game-honest", "game-adversarial")
SCENARIOS = ("alternating_experts", "fixed_best_expert", "smooth_batches", "drifting_minimizer",
             "random_linear", "random_quadratic", "csv")
GAMES = ("matching_pennies", "random", "file")
OPPONENTS = ("uniform", "greedy", "honest")
L_GRID = (2.5, 3.0, 6.0, 12.0)
BOUND_TOL = 1e-6

COMMON_KEYS = {"algorithm", "t", "seed"}
OCO_KEYS = {"scenario", "d", "predictor", "predictions", "b", "h", "radius", "sigma", "shock_at",
            "losses", "geometry", "l"}
GAME_KEYS = {"game", "m", "n", "k", "schedule", "opponent", "l", "x0", "f0"}


@dataclass
class RunConfig:
    """One validated config section."""

    name: str
    algorithm: str
    T: int
    seed: int
    params: Dict[str, object] = field(default_factory=dict)
    scenario: Optional[env.Scenario] = None
    schedule: Optional[gm.GameSchedule] = None

    @property
    def is_game(self) -> bool:
        return self.algorithm in GAME_ALGORITHMS


# ---------------------------------------------------------------- parsing

def _key_lines(text: str):
    lines, section = {}, None
    for no, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = no
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), no)
    return lines


class _Section:
    def __init__(self, path, name, sec, lines):
        self.path, self.name, self.sec, self.lines = path, name, sec, lines

    def line(self, key=None) -> int:
        key = key.lower() if key else None
        return self.lines.get((self.name, key)) or self.lines.get(("DEFAULT", key)) \
            or self.lines.get((self.name, None), 0)

    def fail(self, key, msg):
        raise ConfigError(f"{self.path}:{self.line(key)}: [{self.name}] {msg}")

    def has(self, key) -> bool:
        return key in self.sec

    def str(self, key, default=None, choices=None):
        if key not in self.sec:
            if default is None:
                self.fail(None, f"missing required key '{key}'")
            return default
        v = self.sec[key].strip()
        if choices is not None and v not in choices:
            self.fail(key, f"unknown {key} '{v}'; choose from {', '.join(choices)}")
        return v

    def int(self, key, default=None, lo=None):
        if key not in self.sec:
            if default is None:
                self.fail(None, f"missing required key '{key}'")
            return default
        try:
            v = int(self.sec[key])
        except ValueError:
            self.fail(key, f"{key} must be an integer, got '{self.sec[key]}'")
        if lo is not None and v < lo:
            self.fail(key, f"{key} must be >= {lo}, got {v}")
        return v

    def float(self, key, default=None, lo=None, strict=False):
        if key not in self.sec:
            return default
        try:
            v = float(self.sec[key])
        except ValueError:
            self.fail(key, f"{key} must be a number, got '{self.sec[key]}'")
        if not math.isfinite(v) or (lo is not None and (v <= lo if strict else v < lo)):
            self.fail(key, f"{key} must be {'>' if strict else '>='} {lo}, got {v}")
        return v

    def vector(self, key):
        if key not in self.sec:
            return None
        try:
            return [float(v) for v in self.sec[key].split(",")]
        except ValueError:
            self.fail(key, f"{key} must be a comma-separated list of numbers")

    def resolve(self, key):
        p = Path(self.sec[key].strip())
        if not p.is_absolute():
            p = Path(self.path).parent / p
        if not p.is_file():
            self.fail(key, f"file not found: {p}")
        return p


def read_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    return cp


def parse_config(path, seed: Optional[int] = None, L: Optional[float] = None) -> List[RunConfig]:
    """Read and validate every section; raises :class:`ConfigError` on the first problem."""
    cp = read_config(path)
    with open(path) as fh:
        lines = _key_lines(fh.read())
    return [parse_section(_Section(path, name, cp[name], lines), seed, L) for name in cp.sections()]


def parse_section(s: _Section, seed=None, L=None) -> RunConfig:
    algo = s.str("algorithm", choices=OCO_ALGORITHMS + GAME_ALGORITHMS)
    allowed = COMMON_KEYS | (GAME_KEYS if algo in GAME_ALGORITHMS else OCO_KEYS)
    for key in s.sec:
        if key not in allowed and key not in s.sec.parser.defaults():
            s.fail(key, f"unknown key '{key}' for algorithm {algo}")
    if not re.fullmatch(r"[A-Za-z0-9_.\-]+", s.name):
        s.fail(None, "section names may only contain letters, digits, '_', '-' and '.'")
    cfg = RunConfig(s.name, algo, s.int("T", lo=1), seed if seed is not None else s.int("seed", 0))
    if cfg.seed < 0:
        s.fail("seed", "seed must be >= 0")
    try:
        if cfg.is_game:
            _parse_game(s, cfg, L)
        else:
            _parse_oco(s, cfg)
    except ConfigError:
        raise
    except DynomdError as exc:
        s.fail(None, str(exc))
    return cfg


def _parse_oco(s: _Section, cfg: RunConfig) -> None:
    name = s.str("scenario", choices=SCENARIOS)
    T, d = cfg.T, s.int("d", 2, lo=1)
    radius = s.float("radius", 1.0, lo=0.0, strict=True)
    h = s.float("h", 1.0, lo=0.0, strict=True)
    if name in ("alternating_experts", "fixed_best_expert") and T < 2:
        s.fail("t", f"{name} needs T >= 2")
    if name == "alternating_experts":
        sc = env.make_alternating_experts(T, max(d, 2))
    elif name == "fixed_best_expert":
        sc = env.make_fixed_best_expert(T)
    elif name == "smooth_batches":
        B = s.int("b", 1, lo=1)
        if T % B:
            s.fail("b", f"T={T} is not a multiple of B={B}")
        sc = env.make_smooth_batches(B, T // B, env.batch_centers(B, d, cfg.seed, radius), h, radius)
    elif name == "drifting_minimizer":
        shock = s.int("shock_at", 0, lo=0) or None
        sc = env.make_drifting_minimizer(T, d, s.float("sigma", 0.01, lo=0.0), cfg.seed, h, radius, shock)
    elif name == "random_linear":
        sc = env.make_random_linear(T, d, cfg.seed)
    elif name == "random_quadratic":
        sc = env.make_random_quadratic(T, d, cfg.seed, radius)
    else:
        geo_name = s.str("geometry", choices=("simplex", "ball"))
        geo = Geometry.simplex(d) if geo_name == "simplex" else Geometry.ball(d, radius)
        sc = env.load_losses_csv(s.resolve("losses"), geo)
        if sc.T != T:
            s.fail("t", f"T={T} but the loss file has {sc.T} rounds")
    pred = s.str("predictor", "last_gradient")
    if pred == "external":
        predictor = External.from_csv(s.resolve("predictions"))
        predictor.table(sc.T, sc.d)
    else:
        try:
            predictor = by_name(pred)
        except ConfigError as exc:
            s.fail("predictor", str(exc))
    cfg.scenario = sc
    cfg.params.update(scenario=name, predictor=predictor, L=s.float("l", None, lo=0.0, strict=True))


def _parse_game(s: _Section, cfg: RunConfig, L_override) -> None:
    kind = s.str("game", choices=GAMES)
    T = cfg.T
    if kind == "matching_pennies":
        sched = gm.GameSchedule.fixed([[1.0, -1.0], [-1.0, 1.0]], T)
    elif kind == "random":
        K = s.int("k", 0, lo=0)
        if K > T - 1:
            s.fail("k", f"K={K} switches need T >= {K + 1}")
        sched = gm.random_schedule(T, s.int("m", 2, lo=1), s.int("n", 2, lo=1), K, cfg.seed)
    else:
        p = s.resolve("schedule")
        sched = gm.GameSchedule.from_json(p) if p.suffix == ".json" else gm.GameSchedule.from_csv(p)
        if sched.T != T:
            s.fail("t", f"T={T} but the schedule covers {sched.T} rounds")
    if math.log(float(T) * float(T) * sched.n) <= 0:
        s.fail("t", "T = n = 1 leaves log(T^2 n) = 0; the step size is undefined")
    L = L_override if L_override is not None else s.float("l", None, lo=0.0, strict=True)
    x0, f0 = s.vector("x0"), s.vector("f0")
    for key, v, dim in (("x0", x0, sched.n), ("f0", f0, sched.m)):
        if v is not None:
            gm._simplex_point(v, dim, key)
    cfg.schedule = sched
    cfg.params.update(game=kind, L=L, x0=x0, f0=f0,
                      opponent=s.str("opponent", "uniform", choices=OPPONENTS))


# ---------------------------------------------------------------- running

def _oco_checks(cfg: RunConfig):
    sc = cfg.scenario
    T = sc.T
    k = sc.geometry.constants(T)
    pred = cfg.params["predictor"]
    checks = []
    C_T, V_T = float(sc.c_increments.sum()), float(sc.v_increments.sum())

    if cfg.algorithm == "aomd":
        tr = aomd_run(sc, pred)
        ms = tr.measures()
        checks.append(BoundCheck(cfg.name, T, "theorem1", tr.dynamic_regret,
                                 theorem1_rhs(ms, T, k.gamma, k.r_max_sq, sc.g_bound), BOUND_TOL))
        checks.append(BoundCheck(cfg.name, T, "epoch_count", tr.n_epochs,
                                 epoch_bound(T, k.gamma, k.r_max_sq), 0.0))
        eps = tr.epochs
        err = max(abs(sum(e.delta for e in eps) - T),
                  abs(sum(e.d_epoch for e in eps) - (ms.d_t + len(eps))),
                  abs(sum(e.c_epoch for e in eps) - ms.c_t),
                  abs(sum(e.v_epoch for e in eps) - ms.v_t))
        checks.append(BoundCheck(cfg.name, T, "tracker_conservation", err, 0.0, 1e-9))
    else:
        L = cfg.params["L"] or 3.0 * k.r_max
        tr = run_omd(sc, pred, L)
        D_T = float(tr.dev.sum())
        checks.append(BoundCheck(cfg.name, T, "lemma1[trace]", tr.dynamic_regret,
                                 lemma1_rhs(L, D_T, C_T, k.gamma, k.r_max_sq), BOUND_TOL))

    for mult in L_GRID:
        L = mult * k.r_max
        run = run_omd(sc, pred, L)
        D_T = float(run.dev.sum())
        tag = f"[L={mult:g}R]"
        checks.append(BoundCheck(cfg.name, T, "lemma1" + tag, run.dynamic_regret,
                                 lemma1_rhs(L, D_T, C_T, k.gamma, k.r_max_sq), BOUND_TOL))
        checks.append(BoundCheck(cfg.name, T, "lemma2" + tag, run.dynamic_regret,
                                 lemma2_rhs(L, D_T, C_T, V_T, T, k.gamma, k.r_max_sq), BOUND_TOL))

    st = run_omd(sc, pred, tuning="static")
    best = sc.best_fixed_action()
    static_reg = float(st.loss.sum() - sc.values_at(best).sum())
    checks.append(BoundCheck(cfg.name, T, "static", static_reg,
                             static_regret_bound(k.r_max_sq, float(st.dev.sum())), BOUND_TOL))
    return tr, checks


def _game_checks(cfg: RunConfig):
    sched, p = cfg.schedule, cfg.params
    if cfg.algorithm == "game-honest":
        tr = gm.run_honest_game(sched, p["L"], p["x0"], p["f0"])
    else:
        opp = {"uniform": lambda: gm.UniformRandomOpponent(cfg.seed),
               "greedy": gm.GreedyOpponent,
               "honest": lambda: gm.PrescribedOpponent(p["L"], p["f0"])}[p["opponent"]]()
        tr = gm.run_vs_adversary(sched, p["L"], opp, p["x0"])
    T = tr.T
    checks = [BoundCheck(cfg.name, T, "payoff_bounded", float(np.abs(tr.payoff).max()), 1.0, 1e-12)]
    for label, u in (("const", gm.best_constant_action(tr)), ("switch", gm.best_switching_actions(tr))):
        checks.append(BoundCheck(cfg.name, T, f"dishonest[{label}]", tr.regret_against(u),
                                 tr.dishonest_rhs(gm.path_length(u)), BOUND_TOL))
    if tr.honest:
        note = f"LCON 2L^2={2 * tr.L ** 2:.4g} vs max(C,C')+3={max(tr.c_T, tr.c_T_prime) + 3:.4g}"
        checks.append(BoundCheck(cfg.name, T, "honest", tr.honest_gap, tr.honest_rhs(), BOUND_TOL,
                                 applicable=tr.lcon, note=note))
    return tr, checks


def execute(cfg: RunConfig):
    """Run one validated config; returns (trace, checks)."""
    return _game_checks(cfg) if cfg.is_game else _oco_checks(cfg)


def run_experiment(cfg: RunConfig, out_dir: Path) -> List[BoundCheck]:
    trace, checks = execute(cfg)
    d = out_dir / cfg.name
    d.mkdir(parents=True, exist_ok=True)
    trace.to_csv(d / "trace.csv")
    write_report(checks, d / "report.csv")
    return checks


COMPARE_COLUMNS = ["name", "scenario", "T", "Reg_T", "C_T", "D_T", "V_T", "branch", "N", "status"]


def compare_scenarios(configs: List[RunConfig]) -> List[dict]:
    """One summary row per OCO config; failures annotate the row."""
    rows = []
    for cfg in configs:
        row = {k: "" for k in COMPARE_COLUMNS}
        row.update(name=cfg.name, T=cfg.T)
        if cfg.is_game:
            row.update(scenario=cfg.params.get("game", ""), status="skipped: game run")
            rows.append(row)
            continue
        row["scenario"] = cfg.params["scenario"]
        try:
            tr, checks = execute(cfg)
            ms = tr.measures()
            row.update(Reg_T=tr.dynamic_regret, C_T=ms.c_t, D_T=ms.d_t, V_T=ms.v_t,
                       branch=min_branch(ms, tr.T), N=tr.n_epochs)
            failed = [c.check for c in checks if not c.passed]
            row["status"] = "ok" if not failed else "bound FAIL: " + ";".join(failed)
        except DynomdError as exc:
            row["status"] = f"error: {exc}"
        rows.append(row)
    return rows


def _fmt(v):
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def format_table(rows: List[dict]) -> str:
    cells = [COMPARE_COLUMNS] + [[_fmt(r[c]) for c in COMPARE_COLUMNS] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(COMPARE_COLUMNS))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


def write_table(rows: List[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for r in rows:
            w.writerow([f"{r[c]:.17g}" if isinstance(r[c], float) else r[c] for c in COMPARE_COLUMNS])


# ---------------------------------------------------------------- entry point

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynomd", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "compare"):
        p = sub.add_parser(name)
        p.add_argument("config", nargs="+" if name == "compare" else None, help="INI config file")
        p.add_argument("--out", help="output directory (default $DYNOMD_OUTPUT_DIR or ./out)")
        p.add_argument("--seed", type=int, help="override the seed of every section")
        p.add_argument("--L", type=float, dest="L", help="override L for game sections")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else
                        logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    out_dir = Path(args.out or os.environ.get("DYNOMD_OUTPUT_DIR") or "out")
    if args.L is not None and not (args.L > 0 and math.isfinite(args.L)):
        print(f"error: --L must be positive, got {args.L}", file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None and args.seed < 0:
        print(f"error: --seed must be >= 0, got {args.seed}", file=sys.stderr)
        return EXIT_INVALID
    paths = args.config if args.command == "compare" else [args.config]
    try:
        configs = [c for p in paths for c in parse_config(p, args.seed, args.L)]
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    names = [c.name for c in configs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        print(f"error: duplicate section names across configs: {', '.join(dupes)}", file=sys.stderr)
        return EXIT_INVALID

    if args.command == "compare":
        rows = compare_scenarios(configs)
        print(format_table(rows))
        out_dir.mkdir(parents=True, exist_ok=True)
        write_table(rows, out_dir / "compare.csv")
        return EXIT_OK

    status = EXIT_OK
    for cfg in configs:
        checks = run_experiment(cfg, out_dir)
        failed = [c for c in checks if not c.passed]
        if failed:
            status = EXIT_BOUND
        log.info(format_report(checks))
        print(f"{cfg.name}: {len(checks) - len(failed)}/{len(checks)} checks passed"
              + (f", FAILED: {', '.join(c.check for c in failed)}" if failed else ""))
    return status


if __name__ == "__main__":
    sys.exit(main())
