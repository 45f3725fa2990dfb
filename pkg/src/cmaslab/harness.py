"""Experiment layer: built-in strategy catalog, experiment specs, and the
seeded experiment runners behind the CLI."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace, asdict

import numpy as np

from . import analysis, neat, strategy as strategy_mod
from .cppn import decode_strategy, load_genome, save_genome
from .landscape import FlockingConfig
from .simulation import (EnvironmentConfig, evaluate_strategy, run_simulation,
                         ALL_EVALUATIONS)
from .strategy import (Strategy, S1Table, S2Table, StateOccupancy,
                       save_strategy, load_strategy, strategy_to_vector,
                       export_pie)
from .sphereviz import build_grid, render

SPARSE_N = 20
DENSE_N = 10

MANUAL_METHODS = ("exploit", "explore")
MANUAL_MEMORIES = ("public", "private", "either")


def manual_strategy(method: str, memory: str) -> Strategy:
    """Degenerate strategy: fixed search method, fixed (or 50/50) memory.

    New points are placed into the same memory the strategy reads; the
    "either" variants place with the same 50/50 split they read with.
    """
    mi = MANUAL_METHODS.index(method)
    if memory == "public":
        source = [1.0, 0.0]
    elif memory == "private":
        source = [0.0, 1.0]
    elif memory == "either":
        source = [0.5, 0.5]
    else:
        raise ValueError(f"unknown memory kind {memory!r}")
    row = [0.0] * 4
    row[2 * mi] = source[0]
    row[2 * mi + 1] = source[1]
    s1 = S1Table([row] * 4)
    s2 = S2Table([source, source])
    return Strategy(s1, s2, label=f"{method}-{memory}")


def manual_catalog() -> dict:
    """The six built-in strategies: {exploit, explore} x {public, private, either}."""
    return {f"{m}-{mem}": manual_strategy(m, mem)
            for m in MANUAL_METHODS for mem in MANUAL_MEMORIES}


STRATEGY_KINDS = tuple(manual_catalog()) + ("rtts", "rtts-matched")


def resolve_strategy(name: str):
    """Map a spec string to a Strategy / RTTS marker; file paths load files."""
    catalog = manual_catalog()
    if name in catalog:
        return catalog[name]
    if name in ("rtts", "rtts-matched"):
        return name
    if name.endswith(".genome"):
        return decode_strategy(load_genome(name), label=os.path.basename(name))
    if os.path.exists(name):
        return load_strategy(name)
    raise ValueError(f"unknown strategy {name!r} (not a built-in, file, or genome)")


EXPERIMENT_KINDS = ("manual-comparison", "evolve-per-env",
                    "evolve-general-homogeneous", "evolve-general-heterogeneous",
                    "rtts-comparison", "prior-visits", "wave-trace", "render")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    n: int = DENSE_N
    k: int = 3
    num_agents: int = 8
    steps: int = 100
    repeats: int = 200
    master_seed: int = 0
    output_dir: str = "out"
    environments: tuple = tuple(manual_catalog())   # opponent strategy names
    strategies: tuple = ()                          # evaluated strategy names
    population_size: int = 100
    generations: int = 500
    runs_per_eval: int = 8
    max_jump_attempts: int = 10
    visit_policy: str = ALL_EVALUATIONS
    flocking: FlockingConfig = field(default_factory=FlockingConfig)

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")

    def environment(self, opponent, seed: int) -> EnvironmentConfig:
        opponents = opponent if isinstance(opponent, (list, tuple)) else (opponent,)
        return EnvironmentConfig(
            n=self.n, k=self.k, num_agents=self.num_agents, steps=self.steps,
            opponent_strategies=tuple(resolve_strategy(o) for o in opponents),
            max_jump_attempts=self.max_jump_attempts,
            flocking=self.flocking, visit_policy=self.visit_policy, seed=seed)


def scaled_down(spec: ExperimentSpec) -> ExperimentSpec:
    """Desk-scale profile: quick versions of the paper-scale defaults."""
    return replace(spec, repeats=8, population_size=50, generations=50,
                   runs_per_eval=8)


def spec_from_json(path) -> ExperimentSpec:
    with open(path) as f:
        data = json.load(f)
    if "flocking" in data:
        data["flocking"] = FlockingConfig(**data["flocking"])
    for key in ("environments", "strategies"):
        if key in data:
            data[key] = tuple(data[key])
    return ExperimentSpec(**data)


def spec_to_json(spec: ExperimentSpec, path) -> None:
    data = asdict(spec)
    data["environments"] = list(spec.environments)
    data["strategies"] = list(spec.strategies)
    with open(path, "w") as f:
        json.dump(data, f, indent=2, sort_keys=True)


def derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(
        1, dtype=np.uint64)[0] >> 1)


def _ensure_dir(spec: ExperimentSpec) -> str:
    os.makedirs(spec.output_dir, exist_ok=True)
    return spec.output_dir


def _write_manifest(spec: ExperimentSpec, seeds: dict, outputs: list) -> None:
    with open(os.path.join(spec.output_dir, "manifest.json"), "w") as f:
        json.dump({"spec": {**asdict(spec),
                            "environments": list(spec.environments),
                            "strategies": list(spec.strategies)},
                   "derived_seeds": seeds, "outputs": outputs},
                  f, indent=2, sort_keys=True, default=str)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


# -- experiments -------------------------------------------------------------

def run_manual_comparison(spec: ExperimentSpec) -> dict:
    """Evaluate each catalog strategy against each homogeneous environment."""
    out = _ensure_dir(spec)
    evaluated = spec.strategies or tuple(manual_catalog())
    seeds, results = {}, {}
    for env_name in spec.environments:
        env_seed = derived_seed(spec.master_seed, "env", env_name)
        seeds[env_name] = env_seed
        env = spec.environment(env_name, env_seed)
        for strat_name in evaluated:
            stats = evaluate_strategy(resolve_strategy(strat_name), env,
                                      spec.repeats)
            results[(env_name, strat_name)] = stats
    rows = [[env, strat, repr(st.mean), repr(st.std), repr(st.stderr),
             st.repeats]
            for (env, strat), st in sorted(results.items())]
    _write_csv(os.path.join(out, "manual_comparison.csv"),
               ["environment", "strategy", "mean", "std", "stderr", "repeats"],
               rows)
    prows = []
    for env_name in spec.environments:
        for i, a in enumerate(evaluated):
            for b in evaluated[i + 1:]:
                res = analysis.welch_t_test(
                    results[(env_name, a)].performances,
                    results[(env_name, b)].performances)
                prows.append([env_name, a, b, repr(res.statistic),
                              repr(res.df), repr(res.p_value)])
    _write_csv(os.path.join(out, "manual_comparison_pvalues.csv"),
               ["environment", "strategy_a", "strategy_b", "t", "df",
                "p_value"], prows)
    _write_manifest(spec, seeds,
                    ["manual_comparison.csv", "manual_comparison_pvalues.csv"])
    return results


def run_rtts_comparison(spec: ExperimentSpec) -> dict:
    """Compare RTTS variants (and any supplied strategies) per environment."""
    out = _ensure_dir(spec)
    evaluated = spec.strategies or ("rtts", "rtts-matched", "exploit-private",
                                    "explore-private")
    seeds, results, rows = {}, {}, []
    for env_name in spec.environments:
        env_seed = derived_seed(spec.master_seed, "env", env_name)
        seeds[env_name] = env_seed
        env = spec.environment(env_name, env_seed)
        for strat_name in evaluated:
            stats, traces = evaluate_strategy(
                resolve_strategy(strat_name), env, spec.repeats,
                detail=True, collect_traces=True)
            evals = [r.evaluations for t in traces for r in t.records
                     if r.agent == 0]
            results[(env_name, strat_name)] = stats
            rows.append([env_name, strat_name, repr(stats.mean),
                         repr(stats.std), repr(stats.stderr), stats.repeats,
                         repr(sum(evals) / len(evals)) if evals else "0"])
    _write_csv(os.path.join(out, "rtts_comparison.csv"),
               ["environment", "strategy", "mean", "std", "stderr", "repeats",
                "mean_evaluations_per_step"], rows)
    _write_manifest(spec, seeds, ["rtts_comparison.csv"])
    return results


def _neat_config(spec: ExperimentSpec) -> neat.NeatConfig:
    return neat.NeatConfig(population_size=spec.population_size,
                           generations=spec.generations)


def run_evolution_experiment(spec: ExperimentSpec) -> dict:
    """Evolve strategies per environment, or general ones across environments.

    Modes: evolve-per-env runs one population per listed environment;
    evolve-general-homogeneous averages fitness over the six catalog
    environments plus an RTTS-opponent one; evolve-general-heterogeneous
    uses a single environment with one opponent of each kind.
    """
    out = _ensure_dir(spec)
    config = _neat_config(spec)
    seeds, outputs, results = {}, [], {}

    def env_list(tag):
        seed = derived_seed(spec.master_seed, "evolve", tag)
        seeds[str(tag)] = seed
        return seed

    if spec.kind == "evolve-per-env":
        jobs = [(name, [spec.environment(name, env_list(name))])
                for name in spec.environments]
    elif spec.kind == "evolve-general-homogeneous":
        names = list(spec.environments) + ["rtts"]
        jobs = [("general-homogeneous",
                 [spec.environment(n, env_list(n)) for n in names])]
    elif spec.kind == "evolve-general-heterogeneous":
        opponents = list(spec.environments) + ["rtts"]
        if len(opponents) != spec.num_agents - 1:
            raise ValueError(
                f"heterogeneous mode needs {spec.num_agents - 1} opponents, "
                f"got {len(opponents)}")
        jobs = [("general-heterogeneous",
                 [spec.environment(tuple(opponents),
                                   env_list("heterogeneous"))])]
    else:
        raise ValueError(f"{spec.kind!r} is not an evolution experiment")

    for tag, envs in jobs:
        run_seed = derived_seed(spec.master_seed, "neat", tag)
        seeds[f"neat/{tag}"] = run_seed
        stats_csv = os.path.join(out, f"evolution_{tag}.csv")
        if os.path.exists(stats_csv):
            os.remove(stats_csv)
        result = neat.evolve(envs, config, run_seed,
                             runs_per_eval=spec.runs_per_eval,
                             stats_csv=stats_csv)
        genome_path = os.path.join(out, f"best_{tag}.genome")
        strat_path = os.path.join(out, f"best_{tag}.strategy")
        save_genome(result.best_genome, genome_path)
        decoded = decode_strategy(result.best_genome, label=f"evolved-{tag}")
        save_strategy(decoded, strat_path)
        outputs += [os.path.basename(p) for p in
                    (stats_csv, genome_path, strat_path)]
        results[tag] = result
    _write_manifest(spec, seeds, outputs)
    return results


def run_prior_visits(spec: ExperimentSpec) -> dict:
    """Prior-visit accounting for each evaluated strategy per environment."""
    out = _ensure_dir(spec)
    evaluated = spec.strategies or ("exploit-public", "exploit-private")
    seeds, rows, reports = {}, [], {}
    for env_name in spec.environments:
        env_seed = derived_seed(spec.master_seed, "env", env_name)
        seeds[env_name] = env_seed
        env = spec.environment(env_name, env_seed)
        for strat_name in evaluated:
            _, traces = evaluate_strategy(resolve_strategy(strat_name), env,
                                          spec.repeats, detail=True,
                                          collect_traces=True)
            report = analysis.count_prior_visits(traces, spec.flocking.radius)
            reports[(env_name, strat_name)] = report
            rows.append([env_name, strat_name, repr(report.mean_self),
                         repr(report.mean_opponent), repr(report.mean_total)])
    _write_csv(os.path.join(out, "prior_visits.csv"),
               ["environment", "strategy", "mean_self", "mean_opponent",
                "mean_total"], rows)
    _write_manifest(spec, seeds, ["prior_visits.csv"])
    return reports


def export_wave_trace(spec: ExperimentSpec, follow_agent: bool = True) -> list:
    """Render one run as per-step spherical frames with past-visit dots."""
    out = _ensure_dir(spec)
    strat_name = (spec.strategies or ("exploit-private",))[0]
    env_seed = derived_seed(spec.master_seed, "wave")
    if spec.num_agents == 1:
        env = replace(spec.environment("exploit-private", env_seed),
                      num_agents=1, opponent_strategies=())
    else:
        env = spec.environment(spec.environments[0], env_seed)
    trace = run_simulation(env, resolve_strategy(strat_name), detail=True)
    positions = [r.position for r in trace.records if r.agent == 0]
    start = trace.init_records[0].position
    frames = []
    grid = build_grid(env.n, start)
    for k, pos in enumerate(positions, start=1):
        if follow_agent:
            grid = build_grid(env.n, pos)
        markers = [(p, "dot") for p in [start] + positions[:k - 1]]
        markers.append((pos, "square"))
        frame = os.path.join(out, f"wave_{k:04d}.svg")
        render(trace.landscape, grid, markers, svg_path=frame)
        frames.append(frame)
    with open(os.path.join(out, "wave_trace.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "position", "fitness"])
        for k, (pos, fit) in enumerate(zip(positions, trace.agent0_fitness), 1):
            w.writerow([k, format(pos, f"0{env.n}b"), repr(fit)])
    _write_manifest(spec, {"wave": env_seed},
                    [os.path.basename(p) for p in frames] + ["wave_trace.csv"])
    return frames
