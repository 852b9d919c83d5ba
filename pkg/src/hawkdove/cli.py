"""Command-line entry point: ``hawkdove {generate,run,sweep,oracle}``."""

from __future__ import annotations

import argparse
import itertools
import logging
import os
import re
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, io
from .domain import SurplusFloorPolicy, settle
from .evolution import GaConfig, evolve
from .fitness import FitnessWeights
from .kernels import BACKEND
from .oracle import OracleSpec, exhaustive_best, tiny_scenario
from .scenario_gen import THRESHOLD_RULES, GenSpec, generate

log = logging.getLogger("hawkdove")

OUTPUT_ENV = "HAWKDOVE_OUTPUT_DIR"

#: Five well-performing configurations from an earlier greedy parameter search.
REFERENCE_CONFIGS = (
    "G500_P80_E13_M0.005",
    "G500_P80_E12_M0.007",
    "G500_P80_E12_M0.01",
    "G400_P80_E14_M0.005",
    "G400_P80_E14_M0.007",
)
#: Default mutation width for oracle comparisons, as a fraction of THV.
ORACLE_SIGMA_FRACTION = 0.5

_CONFIG_ID = re.compile(r"^G(\d+)_P(\d+)_E(\d+)_M([0-9.eE+-]+)$")


class CliError(Exception):
    pass


def parse_config_id(text: str) -> dict:
    m = _CONFIG_ID.match(text.strip())
    if not m:
        raise CliError(f"bad config id {text!r}; expected like G500_P80_E13_M0.005")
    g, p, e, pm = m.groups()
    return {"generations": int(g), "pop_size": int(p), "elite_size": int(e), "p_min": float(pm)}


def _default_out(name: str) -> Path:
    return Path(os.environ.get(OUTPUT_ENV, ".")) / name


# -- argument groups -------------------------------------------------------

def _add_ga_args(p: argparse.ArgumentParser, generations=500, pop=80, elite=13) -> None:
    g = p.add_argument_group("genetic algorithm")
    g.add_argument("--generations", type=int, default=generations)
    g.add_argument("--pop", type=int, default=pop, help="population size")
    g.add_argument("--elite", type=int, default=elite, help="elite size")
    g.add_argument("--mating-pool", type=int, default=None, help="mating pool size (default pop/4)")
    g.add_argument("--pmin", type=float, default=0.005, help="minimum mutation rate")
    g.add_argument("--sigma", type=float, default=None, help="mutation std dev in kWh (default 0.1*THV)")
    g.add_argument("--seed", type=int, default=120)
    g.add_argument("--init-seed", type=int, default=None,
                   help="separate seed for roles and the initial population")
    g.add_argument("--policy", choices=[p.value for p in SurplusFloorPolicy], default="buy_threshold")
    g.add_argument("--store-adjusted", action="store_true",
                   help="write adjusted matrices back into the population")
    w = p.add_argument_group("fitness weights")
    defaults = FitnessWeights()
    for name in ("alpha", "beta", "gamma", "delta", "w1", "w2", "w3", "w4", "mu",
                 "payoff_stable", "payoff_other"):
        w.add_argument(f"--{name.replace('_', '-')}", type=float, default=getattr(defaults, name))
    w.add_argument("--n-max", type=int, default=defaults.n_max)
    w.add_argument("--payoff-keyed-to", choices=("buyer", "seller"), default=defaults.payoff_keyed_to)


def _weights(args) -> FitnessWeights:
    return FitnessWeights(
        alpha=args.alpha, beta=args.beta, gamma=args.gamma, delta=args.delta,
        w1=args.w1, w2=args.w2, w3=args.w3, w4=args.w4, mu=args.mu, n_max=args.n_max,
        payoff_stable=args.payoff_stable, payoff_other=args.payoff_other,
        payoff_keyed_to=args.payoff_keyed_to,
    )


def _config(args, **overrides) -> GaConfig:
    kw = dict(
        pop_size=args.pop, generations=args.generations, elite_size=args.elite,
        mating_pool_size=args.mating_pool, p_min=args.pmin, sigma=args.sigma, seed=args.seed,
        init_seed=args.init_seed, weights=_weights(args), policy=args.policy,
        store_adjusted=args.store_adjusted,
    )
    kw.update(overrides)
    return GaConfig(**kw)


def _range(lo_hi, name):
    lo, hi = lo_hi
    if lo > hi:
        raise CliError(f"--{name}: lower bound {lo} exceeds upper bound {hi}")
    return (lo, hi)


# -- subcommands -----------------------------------------------------------

def cmd_generate(args) -> int:
    spec = GenSpec(
        n=args.n,
        energy_range=_range(args.energy_range, "energy-range"),
        cycles_range=tuple(int(c) for c in _range(args.cycles_range, "cycles-range")),
        capacity_range=_range(args.capacity_range, "capacity-range"),
        cycles_max=args.cycles_max,
        threshold_rule=args.threshold_rule,
        target_buyer_fraction=args.buyer_fraction,
        buyer_tolerance=args.buyer_tolerance,
        deficit_range=_range(args.deficit_range, "deficit-range"),
        band_range=_range(args.band_range, "band-range"),
        surplus_range=_range(args.surplus_range, "surplus-range"),
        excess_range=_range(args.excess_range, "excess-range"),
        thv=args.thv,
        line_limit=args.line_limit,
        seed=args.seed,
    )
    scenario = generate(spec)
    text = io.dumps_scenario(scenario, generator=spec.to_dict())
    if args.out == "-":
        sys.stdout.write(text)
    else:
        out = Path(args.out) if args.out else _default_out("scenario.json")
        io.atomic_write(out, text)
        log.info("wrote %d microgrids to %s", scenario.n, out)
    return 0


def _run_outputs(out_dir: Path, result, config: GaConfig, scenario_path, generator, seconds) -> dict:
    scenario = result.scenario
    finals = settle(scenario, result.best)
    io.atomic_write(out_dir / "stats.csv", io.stats_csv(result.stats))
    io.atomic_write(out_dir / "best_trades.csv", io.matrix_csv(result.best))
    io.atomic_write(out_dir / "settlement.csv", io.settlement_csv(scenario, result.best, finals))
    manifest = {
        "artifact_version": __version__,
        "kernel_backend": BACKEND,
        "config": config.to_dict(),
        "seed": config.seed,
        "gen_spec": generator,
        "scenario_path": str(scenario_path),
        "scenario_digest": io.scenario_digest(scenario),
        "wall_clock_seconds": seconds,
        "final_stable_count": result.best_breakdown.stable_count,
        "final_best_fitness": result.best_breakdown.score,
        "best_breakdown": result.best_breakdown.to_dict(),
    }
    io.write_json(out_dir / "manifest.json", manifest)
    return manifest


def cmd_run(args) -> int:
    scenario = io.read_scenario(args.scenario)
    generator = io.read_generator_meta(args.scenario)
    config = _config(args)
    out_dir = Path(args.out) if args.out else _default_out("run")
    t0 = time.perf_counter()
    result = evolve(scenario, config, progress=_progress(args))
    seconds = time.perf_counter() - t0
    m = _run_outputs(out_dir, result, config, args.scenario, generator, seconds)
    print(f"{config.config_id}: fitness {m['final_best_fitness']:.4f}, "
          f"stable {m['final_stable_count']}/{scenario.n}, {seconds:.1f}s -> {out_dir}")
    return 0


def _progress(args):
    if not getattr(args, "verbose", False):
        return None

    def report(s):
        if s.generation % 50 == 0 or s.generation == 1:
            log.info("gen %d best %.4f mean %.4f stable %d div %.3f",
                     s.generation, s.best_fitness, s.mean_fitness, s.stable_count_best, s.diversity)
    return report


def sweep_grid(args) -> list[dict]:
    points = [parse_config_id(c) for c in (args.config_id or [])]
    if args.reference:
        points += [parse_config_id(c) for c in REFERENCE_CONFIGS]
    if args.generations or args.pop or args.elite or args.pmin:
        if not (args.generations and args.pop and args.elite and args.pmin):
            raise CliError("grid sweeps need --generations, --pop, --elite and --pmin lists")
        for g, p, e, pm in itertools.product(args.generations, args.pop, args.elite, args.pmin):
            points.append({"generations": g, "pop_size": p, "elite_size": e, "p_min": pm})
    if not points:
        raise CliError("empty sweep grid")
    if len(points) > args.budget:
        raise CliError(f"sweep grid has {len(points)} runs, above --budget {args.budget}")
    return points


def run_sweep(scenario, points, base: GaConfig, progress=None) -> list[dict]:
    rows = []
    for pt in points:
        config = replace(base, **pt)
        t0 = time.perf_counter()
        result = evolve(scenario, config)
        seconds = time.perf_counter() - t0
        row = {"config_id": config.config_id, **pt,
               "fitness": result.best_breakdown.score,
               "stable_count": result.best_breakdown.stable_count,
               "seconds": seconds}
        rows.append(row)
        if progress:
            progress(row)
    return rows


def cmd_sweep(args) -> int:
    scenario = io.read_scenario(args.scenario)
    points = sweep_grid(args)
    base = GaConfig(seed=args.seed, init_seed=args.init_seed, weights=_weights(args),
                    policy=args.policy, sigma=args.sigma, mating_pool_size=args.mating_pool,
                    store_adjusted=args.store_adjusted)
    rows = run_sweep(scenario, points, base,
                     progress=lambda r: log.info("%s fitness %.4f stable %d (%.1fs)", r["config_id"],
                                                 r["fitness"], r["stable_count"], r["seconds"]))
    text = io.sweep_csv(rows)
    out = Path(args.out) if args.out else _default_out("sweep.csv")
    io.atomic_write(out, text)
    sys.stdout.write(text)
    return 0


def oracle_compare(scenario, ga_config: GaConfig, spec: OracleSpec):
    """(oracle breakdown, GA breakdown, ratio) on one role-assigned instance."""
    _, oracle_bd = exhaustive_best(scenario, spec, ga_config.weights, ga_config.policy)
    ga = evolve(scenario, ga_config)
    if scenario.sellers.size == 0 or scenario.buyers.size == 0:
        ratio = 1.0
    elif oracle_bd.score == 0:
        ratio = 1.0 if ga.best_breakdown.score == 0 else float("inf")
    else:
        ratio = ga.best_breakdown.score / oracle_bd.score
    return oracle_bd, ga.best_breakdown, ratio


def cmd_oracle(args) -> int:
    if args.scenario:
        scenario = io.read_scenario(args.scenario)
        if not scenario.has_roles:
            from .domain import assign_roles
            scenario = assign_roles(scenario, np.random.default_rng(args.seed))
    else:
        scenario = tiny_scenario(np.random.default_rng(args.instance_seed), n=args.n)
    # Tiny landscapes have plateaus that need coordinated jumps; wide steps escape them.
    sigma = args.sigma if args.sigma is not None else ORACLE_SIGMA_FRACTION * scenario.thv
    config = _config(args, sigma=sigma)
    spec = OracleSpec(grid_step=args.grid_step, max_cells=args.max_cells)
    oracle_bd, ga_bd, ratio = oracle_compare(scenario, config, spec)
    print(f"oracle optimum: {oracle_bd.score:.6f} (stable {oracle_bd.stable_count}/{scenario.n})")
    print(f"GA best:        {ga_bd.score:.6f} (stable {ga_bd.stable_count}/{scenario.n})")
    print(f"ratio:          {ratio:.4f}")
    return 0


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkdove", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = GenSpec()
    g = sub.add_parser("generate", help="write a synthetic scenario file")
    g.add_argument("--n", type=int, default=d.n)
    g.add_argument("--seed", type=int, default=d.seed)
    g.add_argument("--energy-range", type=float, nargs=2, default=d.energy_range, metavar=("LO", "HI"))
    g.add_argument("--cycles-range", type=int, nargs=2, default=d.cycles_range, metavar=("LO", "HI"))
    g.add_argument("--capacity-range", type=float, nargs=2, default=d.capacity_range, metavar=("LO", "HI"))
    g.add_argument("--cycles-max", type=int, default=d.cycles_max)
    g.add_argument("--threshold-rule", choices=THRESHOLD_RULES, default=d.threshold_rule)
    g.add_argument("--buyer-fraction", type=float, default=d.target_buyer_fraction)
    g.add_argument("--buyer-tolerance", type=float, default=d.buyer_tolerance)
    g.add_argument("--deficit-range", type=float, nargs=2, default=d.deficit_range, metavar=("LO", "HI"))
    g.add_argument("--band-range", type=float, nargs=2, default=d.band_range, metavar=("LO", "HI"))
    g.add_argument("--surplus-range", type=float, nargs=2, default=d.surplus_range, metavar=("LO", "HI"))
    g.add_argument("--excess-range", type=float, nargs=2, default=d.excess_range, metavar=("LO", "HI"))
    g.add_argument("--thv", type=float, default=d.thv)
    g.add_argument("--line-limit", type=float, default=d.line_limit)
    g.add_argument("--out", help=f"output file, '-' for stdout (default ${OUTPUT_ENV}/scenario.json)")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="evolve trades for a scenario")
    r.add_argument("--scenario", required=True)
    r.add_argument("--out", help=f"results directory (default ${OUTPUT_ENV}/run)")
    _add_ga_args(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a grid of GA configurations")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", help=f"sweep table (default ${OUTPUT_ENV}/sweep.csv)")
    s.add_argument("--config-id", action="append", help="e.g. G500_P80_E13_M0.005 (repeatable)")
    s.add_argument("--reference", action="store_true", help="add the five reference configurations")
    s.add_argument("--generations", type=int, nargs="+")
    s.add_argument("--pop", type=int, nargs="+")
    s.add_argument("--elite", type=int, nargs="+")
    s.add_argument("--pmin", type=float, nargs="+")
    s.add_argument("--budget", type=int, default=50, help="refuse grids with more runs than this")
    s.add_argument("--seed", type=int, default=120)
    s.add_argument("--init-seed", type=int, default=None)
    s.add_argument("--sigma", type=float, default=None)
    s.add_argument("--mating-pool", type=int, default=None)
    s.add_argument("--policy", choices=[p.value for p in SurplusFloorPolicy], default="buy_threshold")
    s.add_argument("--store-adjusted", action="store_true")
    defaults = FitnessWeights()
    for name in ("alpha", "beta", "gamma", "delta", "w1", "w2", "w3", "w4", "mu",
                 "payoff_stable", "payoff_other"):
        s.add_argument(f"--{name.replace('_', '-')}", type=float, default=getattr(defaults, name))
    s.add_argument("--n-max", type=int, default=defaults.n_max)
    s.add_argument("--payoff-keyed-to", choices=("buyer", "seller"), default=defaults.payoff_keyed_to)
    s.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="compare the GA with exhaustive search on a tiny instance")
    o.add_argument("--scenario", help="scenario file (default: random tiny instance)")
    o.add_argument("--instance-seed", type=int, default=0)
    o.add_argument("--n", type=int, default=None, help="size of the random instance (2-4)")
    o.add_argument("--grid-step", type=float, default=None, help="oracle grid step (default THV/8)")
    o.add_argument("--max-cells", type=int, default=6)
    _add_ga_args(o, generations=200, pop=40, elite=6)
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, RuntimeError) as exc:
        print(f"hawkdove {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
