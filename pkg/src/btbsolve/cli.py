"""Command-line front end: ``btbsolve {solve,compare,verify,sweep,simulate}``.

Configuration is a JSON file with optional sections ``market``, ``population``,
``p``, ``eps``, ``oracle``, ``sweep`` and ``output``.  Command-line flags take
precedence over the file.  Every command validates its inputs before writing
anything, and every file is written atomically.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import oracle
from .btb import compare_btb
from .model import (
    DEFAULT_EPS,
    MarketParams,
    PopulationParams,
    StrategyProfile,
    ValidationError,
    classify_potentials,
    classify_test,
    hiring_threshold,
    validate,
)
from .solver import profile_payoffs, solve_single
from .sweep import MARKET_KEYS, SweepSpec, atomic_write, emit, run_sweep

EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3
OUT_DIR_ENV = "BTBSOLVE_OUT_DIR"

ORACLE_DEFAULTS = {"grid_n": 401, "n_samples": 10**6, "seed": 42, "tol": 1e-9}


class UsageError(ValidationError):
    pass


@dataclass
class RunConfig:
    market: MarketParams
    population: PopulationParams | None
    p: float | None
    eps: float = DEFAULT_EPS
    grid_n: int = 401
    n_samples: int = 10**6
    seed: int = 42
    tol: float = 1e-9
    sweep: dict | None = None
    out_dir: str = "."
    fmt: str | None = None
    quiet: bool = False

    @property
    def single_p(self) -> float:
        if self.p is not None:
            return self.p
        if self.population is not None:
            return self.population.p1
        raise ValidationError("no potential given: set p or population.p1", field="p")

    def require_population(self) -> PopulationParams:
        if self.population is None:
            raise ValidationError("this command needs a population block "
                                  "(gamma, p1, p2)", field="population")
        return self.population


# -- configuration -------------------------------------------------------------

def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_override(raw: dict, item: str) -> None:
    key, sep, value = item.partition("=")
    if not sep or not key:
        raise UsageError(f"--set expects key=value, got {item!r}", field="set")
    node = raw
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise UsageError(f"--set {key}: {part} is not a section", field=key)
    node[parts[-1]] = _parse_value(value)


def _number(section: dict, key: str, where: str) -> float:
    if key not in section:
        raise ValidationError(f"{where}.{key} is missing", field=key)
    v = section[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"{where}.{key}={v!r} is not a number", field=key)
    return float(v)


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.config}: not valid JSON ({exc})", field="config")
        if not isinstance(raw, dict):
            raise ValidationError(f"{args.config}: top level must be an object", field="config")
    raw = copy.deepcopy(raw)
    for item in args.set or ():
        _apply_override(raw, item)

    market = raw.get("market", {})
    params = MarketParams(*(_number(market, k, "market") for k in MARKET_KEYS))
    pop = None
    if "population" in raw:
        sec = raw["population"]
        pop = PopulationParams(*(_number(sec, k, "population") for k in ("gamma", "p1", "p2")))
    p = raw.get("p")
    if getattr(args, "p", None) is not None:
        p = args.p
    if p is not None:
        p = _number({"p": p}, "p", "config")

    orc = {**ORACLE_DEFAULTS, **raw.get("oracle", {})}
    out = raw.get("output", {})
    try:
        cfg = _build(args, raw, params, pop, p, orc, out)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed config value: {exc}") from None
    _validate_config(cfg)
    return cfg


def _build(args, raw, params, pop, p, orc, out) -> RunConfig:
    eps = args.eps if args.eps is not None else float(raw.get("eps", DEFAULT_EPS))
    return RunConfig(
        market=params,
        population=pop,
        p=p,
        eps=eps,
        grid_n=int(orc["grid_n"]),
        n_samples=int(getattr(args, "n", None) or orc["n_samples"]),
        seed=int(args.seed if args.seed is not None else orc["seed"]),
        tol=float(orc["tol"]),
        sweep=raw.get("sweep"),
        out_dir=args.out or out.get("dir") or os.environ.get(OUT_DIR_ENV) or ".",
        fmt=args.format or out.get("format"),
        quiet=args.quiet,
    )


def _validate_config(cfg: RunConfig) -> None:
    validate(cfg.market, cfg.population)
    if cfg.p is not None:
        validate(cfg.market, PopulationParams(0.5, cfg.p, cfg.p))
    if not 0 < cfg.eps < 1e-3:
        raise ValidationError(f"eps={cfg.eps!r} must lie in (0, 1e-3)", field="eps")
    if cfg.grid_n < 2:
        raise ValidationError("oracle.grid_n must be at least 2", field="grid_n")
    if cfg.n_samples < 2:
        raise ValidationError("oracle.n_samples must be at least 2", field="n_samples")
    if not 0 <= cfg.seed < 2**64:
        raise ValidationError("seed must be an unsigned 64-bit integer", field="seed")
    if cfg.fmt not in (None, "csv", "json"):
        raise ValidationError(f"unknown format {cfg.fmt!r}", field="format")


# -- report helpers ------------------------------------------------------------

def _f(x) -> str:
    return format(float(x), ".6g")


def _eq_dict(eq, table) -> dict:
    return {"label": eq.label, "kind": eq.kind.value, "posture": eq.posture.value,
            "chi_star": eq.chi_star, "eta_star": eq.eta_star, "mu": eq.mu,
            "payoffs": {"worker_low": table.worker_low, "worker_high": table.worker_high,
                        "worker_exante": table.worker_exante, "employer": table.employer}}


def _eq_line(eq, table) -> str:
    return (f"{eq.label:<17} chi*={_f(eq.chi_star):<9} eta*={_f(eq.eta_star):<9} "
            f"mu={_f(eq.mu):<9} worker(low,high,ex-ante)=({_f(table.worker_low)}, "
            f"{_f(table.worker_high)}, {_f(table.worker_exante)}) "
            f"employer={_f(table.employer)}")


def _market_lines(cfg: RunConfig) -> list[str]:
    m = cfg.market
    return [f"market: w={_f(m.w)} B={_f(m.B)} c_L={_f(m.c_L)} c_H={_f(m.c_H)} "
            f"phi0={_f(m.phi0)} phi1={_f(m.phi1)}",
            f"hiring threshold p_E* = {_f(hiring_threshold(m))}",
            f"test typology: {classify_test(m, cfg.eps).value}"]


def _write_reports(cfg: RunConfig, stem: str, text: str, data) -> list[str]:
    txt = os.path.join(cfg.out_dir, f"{stem}.txt")
    js = os.path.join(cfg.out_dir, f"{stem}.json")
    atomic_write(js, json.dumps(data, indent=2, sort_keys=True) + "\n")
    atomic_write(txt, text)
    return [txt, js]


def _say(cfg: RunConfig, text: str) -> None:
    if not cfg.quiet:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- commands --------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    p = cfg.single_p
    best, table, eqs, tables = solve_single(cfg.market, p, cfg.eps)
    lines = _market_lines(cfg) + [f"potential p = {_f(p)}",
                                  f"equilibria ({len(eqs)}):"]
    lines += ["  " + _eq_line(e, t) for e, t in zip(eqs, tables)]
    lines.append(f"Pareto-selected: {best.label}")
    data = {"p": p, "p_e_star": hiring_threshold(cfg.market),
            "test_typology": classify_test(cfg.market, cfg.eps).value,
            "equilibria": [_eq_dict(e, t) for e, t in zip(eqs, tables)],
            "selected": best.label}
    if cfg.population is not None:
        pot = classify_potentials(cfg.population, data["p_e_star"], cfg.eps).value
        data["potential_typology"] = pot
        lines.append(f"potential typology: {pot}")
    text = "\n".join(lines) + "\n"
    _write_reports(cfg, "solve", text, data)
    _say(cfg, text)
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    pop = cfg.require_population()
    cmp = compare_btb(cfg.market, pop, cfg.eps)
    lines = _market_lines(cfg) + [
        f"population: gamma={_f(pop.gamma)} p1={_f(pop.p1)} p2={_f(pop.p2)} "
        f"pbar={_f(pop.pbar)} ({cmp.pbar_level})",
        f"potential typology: {cmp.potential_typology.value}",
        f"with box: group1 {cmp.with_box.group1[0].label}, group2 {cmp.with_box.group2[0].label}, "
        f"employer {_f(cmp.with_box.employer_total)}",
        f"banned:   pooled {cmp.banned.pooled.label}, employer {_f(cmp.banned.employer_total)}",
        "deltas (banned minus with box):"]
    lines += [f"  {k:<10} {_f(v)}" for k, v in cmp.deltas.items()]
    if cmp.interval is not None:
        lo, hi = cmp.interval
        lines.append(f"employer gains from the ban for p2 in [{_f(lo)}, {_f(hi)})")
    lines.append(f"scenario: {cmp.scenario.value}")

    def sol(s):
        return {"group1": _eq_dict(*s.group1), "group2": _eq_dict(*s.group2),
                "employer_total": s.employer_total}

    data = {"scenario": cmp.scenario.value, "test_typology": cmp.test_typology.value,
            "potential_typology": cmp.potential_typology.value, "pbar": pop.pbar,
            "pbar_level": cmp.pbar_level, "deltas": cmp.deltas,
            "with_box": sol(cmp.with_box), "banned": sol(cmp.banned),
            "employer_interval": list(cmp.interval) if cmp.interval else None}
    text = "\n".join(lines) + "\n"
    _write_reports(cfg, "compare", text, data)
    _say(cfg, text)
    return EXIT_OK


def _perturb(profile: StrategyProfile, delta: float) -> StrategyProfile:
    # move eta inward by delta so the shift is never clipped away
    eta = profile.eta + delta if profile.eta + delta <= 1 else profile.eta - delta
    return StrategyProfile(profile.chi, eta)


def cmd_verify(cfg: RunConfig, perturb: float = 0.0) -> int:
    m = cfg.market
    potentials = []
    if cfg.p is not None:
        potentials.append(("p", cfg.p))
    if cfg.population is not None:
        pop = cfg.population
        potentials += [("p1", pop.p1), ("p2", pop.p2), ("pbar", pop.pbar)]
    if not potentials:
        raise ValidationError("verify needs p or a population block", field="p")
    seeds = iter(np.random.SeedSequence(cfg.seed).spawn(len(potentials) + 1))

    checks = []

    def record(name, passed, detail):
        checks.append({"check": name, "passed": bool(passed), **detail})

    for tag, p in potentials:
        best, table, eqs, _ = solve_single(m, p, cfg.eps)
        for eq in eqs:
            prof = _perturb(eq.profile, perturb) if perturb else eq.profile
            rep = oracle.check_equilibrium(prof, m, p, cfg.tol)
            record(f"equilibrium {eq.label} at {tag}={_f(p)}", rep.passed,
                   {"chi": prof.chi, "eta": prof.eta, "worker_gain": rep.worker_gain,
                    "employer_gain": rep.employer_gain, "belief_error": rep.belief_error})
        clusters = oracle.grid_search_equilibria(m, p, cfg.grid_n, cfg.tol)
        extra, missing = oracle.match_clusters(clusters, eqs, cfg.grid_n)
        record(f"grid search at {tag}={_f(p)}", not extra and not missing,
               {"clusters": [[c.chi, c.eta] for c in clusters],
                "extra": [[c.chi, c.eta] for c in extra],
                "missing": [e.label for e in missing]})
        rows = oracle.check_payoffs(best.profile, table, m, p, cfg.n_samples, next(seeds))
        record(f"Monte Carlo payoffs of {best.label} at {tag}={_f(p)}",
               all(r["ok"] for r in rows.values()), {"actors": rows})

    if cfg.population is not None:
        cmp = compare_btb(m, cfg.population, cfg.eps)
        rep = oracle.verify_comparison(cmp, m, cfg.population, cfg.n_samples, next(seeds),
                                       cfg.tol, eps=cfg.eps)
        record(f"Monte Carlo welfare deltas ({cmp.scenario.value})", rep.passed,
               {"actors": rep.rows, "failures": rep.failures})

    failed = [c for c in checks if not c["passed"]]
    lines = _market_lines(cfg)
    for c in checks:
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['check']}")
        if not c["passed"] and "worker_gain" in c:
            lines.append(f"       worker deviation gain {_f(c['worker_gain'])}, "
                         f"employer deviation gain {_f(c['employer_gain'])}")
        for msg in c.get("failures", []):
            lines.append(f"       {msg}")
    if failed:
        lines.append(f"first failing check: {failed[0]['check']}")
    lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    data = {"passed": not failed, "seed": cfg.seed, "n_samples": cfg.n_samples,
            "grid_n": cfg.grid_n, "tol": cfg.tol, "perturb": perturb,
            "first_failure": failed[0]["check"] if failed else None, "checks": checks}
    text = "\n".join(lines) + "\n"
    _write_reports(cfg, "verify", text, data)
    _say(cfg, text)
    if failed:
        sys.stderr.write(f"verification failed: {failed[0]['check']}\n")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, workers: int = 1) -> int:
    if not cfg.sweep:
        raise ValidationError("sweep needs a 'sweep' block in the config", field="sweep")
    raw = dict(cfg.sweep)
    raw["format"] = cfg.fmt or raw.get("format", "csv")
    fixed = {k: getattr(cfg.market, k) for k in MARKET_KEYS}
    if cfg.population is not None:
        fixed.update(gamma=cfg.population.gamma, p1=cfg.population.p1, p2=cfg.population.p2)
    if cfg.p is not None:
        fixed["p"] = cfg.p
    fixed.update(raw.get("fixed", {}))
    raw["fixed"] = fixed
    try:
        spec = SweepSpec.from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed sweep block: {exc}", field="sweep") from None
    result = run_sweep(spec, cfg.eps, workers)
    table = os.path.join(cfg.out_dir, f"sweep.{spec.fmt}")
    counts = result.label_counts()
    lines = [f"sweep mode {spec.mode.value}: "
             + " x ".join(f"{a.name}[{_f(a.lo)}, {_f(a.hi)}; {a.steps}]" for a in spec.axes),
             f"{len(result.cells)} cells"]
    lines += [f"  {label:<30} {n}" for label, n in counts.items()]
    n_boundary = sum(1 for c in result.cells if c["boundary"])
    lines.append(f"boundary cells: {n_boundary}")
    text = "\n".join(lines) + "\n"
    emit(result, table)
    atomic_write(os.path.join(cfg.out_dir, "sweep.txt"), text)
    _say(cfg, text)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, chi: float | None, eta: float | None) -> int:
    p = cfg.single_p
    if chi is None or eta is None:
        best = solve_single(cfg.market, p, cfg.eps)[0]
        chi = best.chi_star if chi is None else chi
        eta = best.eta_star if eta is None else eta
    for name, v in (("chi", chi), ("eta", eta)):
        if not 0 <= v <= 1:
            raise ValidationError(f"{name}={v!r} outside [0, 1]", field=name)
    prof = StrategyProfile(chi, eta)
    table = profile_payoffs(prof, cfg.market, p)
    rows = oracle.check_payoffs(prof, table, cfg.market, p, cfg.n_samples, cfg.seed)
    ok = all(r["ok"] for r in rows.values())
    lines = _market_lines(cfg) + [f"profile chi={_f(chi)} eta={_f(eta)} at p={_f(p)}, "
                                  f"n={cfg.n_samples}, seed={cfg.seed}"]
    for actor, r in rows.items():
        lines.append(f"  [{'PASS' if r['ok'] else 'FAIL'}] {actor:<14} simulated "
                     f"{_f(r['mean'])} ± {_f(r['std_error'])}  closed form {_f(r['expected'])}")
    data = {"p": p, "chi": chi, "eta": eta, "n_samples": cfg.n_samples, "seed": cfg.seed,
            "passed": ok, "actors": rows}
    text = "\n".join(lines) + "\n"
    _write_reports(cfg, "simulate", text, data)
    _say(cfg, text)
    return EXIT_OK if ok else EXIT_VERIFY


# -- entry point -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_VALIDATION)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--out", help=f"output directory (default ${OUT_DIR_ENV} or .)")
    common.add_argument("--format", choices=("csv", "json"), help="sweep table format")
    common.add_argument("--seed", type=int, help="Monte Carlo seed")
    common.add_argument("--eps", type=float, help="boundary tolerance")
    common.add_argument("--quiet", action="store_true", help="do not print the report")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config entry, e.g. market.B=2 (repeatable)")
    common.add_argument("--p", type=float, help="potential for single-group commands")

    parser = _Parser(prog="btbsolve", description="Hiring-game equilibria and "
                     "ban-the-box welfare analysis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="equilibria at one potential")
    sub.add_parser("compare", parents=[common], help="welfare effect of banning the box")
    v = sub.add_parser("verify", parents=[common], help="run the numerical oracles")
    v.add_argument("--perturb", type=float, default=0.0, metavar="DELTA",
                   help="debug: shift every equilibrium's eta by DELTA before checking")
    s = sub.add_parser("sweep", parents=[common], help="region map over a parameter grid")
    s.add_argument("--workers", type=int, default=1)
    m = sub.add_parser("simulate", parents=[common], help="Monte Carlo payoffs of a profile")
    m.add_argument("--chi", type=float)
    m.add_argument("--eta", type=float)
    m.add_argument("--n", type=int, help="number of simulated plays")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.command == "solve":
            return cmd_solve(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, args.perturb)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.workers)
        return cmd_simulate(cfg, args.chi, args.eta)
    except ValidationError as exc:
        sys.stderr.write(f"validation error: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
