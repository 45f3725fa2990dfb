"""Command-line entry points for the experiment harness.

Exit codes: 0 success, 2 configuration errors, 1 runtime failures.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import harness
from .cppn import decode_strategy, load_genome
from .harness import ExperimentSpec, scaled_down, spec_from_json
from .landscape import build_landscape, point_from_str
from .simulation import run_simulation
from .sphereviz import build_grid, render
from .strategy import save_strategy, StateOccupancy, export_pie

CONFIG_ERROR, RUNTIME_ERROR = 2, 1


def _add_common(p):
    p.add_argument("--config", help="experiment spec as a JSON file")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--n", type=int, help="search space dimension")
    p.add_argument("--repeats", type=int, help="evaluation runs per strategy")
    p.add_argument("--profile", choices=("desk", "paper"), default="desk",
                   help="desk = scaled-down defaults, paper = full scale")


def _build_spec(args, kind: str) -> ExperimentSpec:
    if args.config:
        spec = spec_from_json(args.config)
        spec = replace(spec, kind=kind)
    else:
        spec = ExperimentSpec(kind=kind)
        if args.profile == "desk":
            spec = scaled_down(spec)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out:
        overrides["output_dir"] = args.out
    if args.n:
        overrides["n"] = args.n
    if args.repeats:
        overrides["repeats"] = args.repeats
    return replace(spec, **overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cmaslab",
        description="Competitive multi-agent search experiments on dynamic "
                    "NK landscapes")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare-manual", help="catalog strategies vs the six "
                       "homogeneous environments")
    _add_common(p)

    p = sub.add_parser("evolve", help="evolve strategies with NEAT")
    _add_common(p)
    p.add_argument("--mode", default="per-env",
                   choices=("per-env", "general-homogeneous",
                            "general-heterogeneous"))

    p = sub.add_parser("compare-rtts", help="RTTS baselines vs catalog and "
                       "evolved strategies")
    _add_common(p)
    p.add_argument("--strategy", action="append", default=[],
                   help="extra evaluated strategy (name or file); repeatable")

    p = sub.add_parser("prior-visits", help="prior-visit accounting report")
    _add_common(p)

    p = sub.add_parser("wave-trace", help="per-step spherical frames of one run")
    _add_common(p)
    p.add_argument("--single-agent", action="store_true")
    p.add_argument("--follow-agent", action="store_true")

    p = sub.add_parser("render", help="render a fresh landscape around a focus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--focus", required=True, help="focus point as a bit string")
    p.add_argument("--out", default="out")

    p = sub.add_parser("decode-genome", help="decode a genome file into a "
                       "strategy file and pie chart")
    p.add_argument("genome")
    p.add_argument("--out", default="out")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return CONFIG_ERROR
    except Exception as exc:   # pragma: no cover - defensive
        print(f"runtime failure: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "compare-manual":
        harness.run_manual_comparison(_build_spec(args, "manual-comparison"))
    elif cmd == "evolve":
        spec = _build_spec(args, f"evolve-{args.mode}"
                           if args.mode != "per-env" else "evolve-per-env")
        harness.run_evolution_experiment(spec)
    elif cmd == "compare-rtts":
        spec = _build_spec(args, "rtts-comparison")
        if args.strategy:
            spec = replace(spec, strategies=tuple(
                ["rtts", "rtts-matched"] + args.strategy))
        harness.run_rtts_comparison(spec)
    elif cmd == "prior-visits":
        harness.run_prior_visits(_build_spec(args, "prior-visits"))
    elif cmd == "wave-trace":
        spec = _build_spec(args, "wave-trace")
        if args.single_agent:
            spec = replace(spec, num_agents=1)
        harness.export_wave_trace(spec, follow_agent=args.follow_agent)
    elif cmd == "render":
        os.makedirs(args.out, exist_ok=True)
        landscape = build_landscape(args.n, args.k, args.seed)
        grid = build_grid(args.n, point_from_str(args.focus))
        render(landscape, grid,
               svg_path=os.path.join(args.out, "landscape.svg"),
               heightfield_path=os.path.join(args.out, "heightfield.csv"))
    elif cmd == "decode-genome":
        os.makedirs(args.out, exist_ok=True)
        strategy = decode_strategy(load_genome(args.genome),
                                   label=os.path.basename(args.genome))
        base = os.path.join(args.out,
                            os.path.splitext(os.path.basename(args.genome))[0])
        save_strategy(strategy, base + ".strategy")
        export_pie(strategy, StateOccupancy(), base + ".svg", base + ".json")
    else:
        raise ValueError(f"unknown command {cmd!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
