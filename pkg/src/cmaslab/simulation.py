"""Deferred-update multi-agent simulation over dynamic NK landscapes.

Each time step every agent performs one search action. Landscape visits
and public-memory placements are buffered during the step and applied
after all agents have acted, so the collective outcome is independent of
the order in which agents are advanced.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace

import numpy as np

from .landscape import Landscape, FlockingConfig, build_landscape
from .strategy import (Strategy, StateOccupancy, discretize,
                       select_s1, select_s2, EXPLOIT, EXPLORE, PUBLIC, PRIVATE)

ALL_EVALUATIONS = "all-evaluations"
ACCEPTED_ONLY = "accepted-only"


@dataclass(frozen=True)
class MemoryEntry:
    point: int
    stored_fitness: float
    inserted_step: int
    owner: int

    def sort_key(self):
        return (-self.stored_fitness, self.inserted_step, self.point, self.owner)


class Memory:
    """Append-only store of discovered points with a cached best entry.

    The best entry has maximal stored fitness; ties go to the earliest
    insertion step, then the lexicographically smallest point, then the
    lowest owner id.
    """

    def __init__(self):
        self.entries: list = []
        self.best: MemoryEntry | None = None

    def add(self, entry: MemoryEntry) -> None:
        self.entries.append(entry)
        if self.best is None or entry.sort_key() < self.best.sort_key():
            self.best = entry


@dataclass(frozen=True)
class EnvironmentConfig:
    n: int
    k: int = 3
    num_agents: int = 8
    steps: int = 100
    opponent_strategies: tuple = ()
    explore_range: tuple = (0.5, 1.0)
    max_jump_attempts: int = 10
    flocking: FlockingConfig = field(default_factory=FlockingConfig)
    visit_policy: str = ALL_EVALUATIONS
    seed: int = 0

    def __post_init__(self):
        if self.num_agents < 1:
            raise ValueError("num_agents must be >= 1")
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.visit_policy not in (ALL_EVALUATIONS, ACCEPTED_ONLY):
            raise ValueError(f"unknown visit policy {self.visit_policy!r}")


@dataclass
class StepRecord:
    step: int
    agent: int
    position: int
    fitness: float
    evaluations: int
    s1_state: int | None
    s1_action: tuple | None
    s2_state: int | None
    placement: str | None
    visits: tuple


@dataclass
class RunTrace:
    n: int
    num_agents: int
    steps: int
    flocking_radius: int
    records: list = field(default_factory=list)
    init_records: list = field(default_factory=list)
    agent0_fitness: list = field(default_factory=list)
    occupancies: list = field(default_factory=list)
    landscape: Landscape | None = None
    public_memory: Memory | None = None

    def performance(self) -> float:
        return sum(self.agent0_fitness) / len(self.agent0_fitness) \
            if self.agent0_fitness else 0.0


def agent_rng(master_seed: int, run_index: int, agent_id: int) -> random.Random:
    """Independent per-agent stream from a splittable seed hierarchy."""
    ss = np.random.SeedSequence([master_seed, run_index, agent_id])
    return random.Random(int(ss.generate_state(2, dtype=np.uint64)[0]))


def exploit_step(landscape: Landscape, start: int, rng) -> tuple:
    """Probe one-bit neighbors in a fresh random dimension order.

    Returns (improving point or None, list of probed points).
    """
    n = landscape.n
    threshold = landscape.current_fitness(start)
    dims = list(range(n))
    rng.shuffle(dims)
    evaluated = []
    for d in dims:
        cand = start ^ (1 << (n - 1 - d))
        evaluated.append(cand)
        if landscape.current_fitness(cand) > threshold:
            return cand, evaluated
    return None, evaluated


def explore_step(landscape: Landscape, start: int, explore_range: tuple,
                 max_attempts: int, rng) -> tuple:
    """Long jumps flipping a random fraction of bits, until improvement.

    Returns (improving point or None, list of probed points).
    """
    n = landscape.n
    lo, hi = explore_range
    m_lo, m_hi = math.ceil(lo * n), math.floor(hi * n)
    if not 1 <= m_lo <= m_hi <= n:
        raise ValueError(f"explore range {explore_range} invalid for n={n}")
    threshold = landscape.current_fitness(start)
    evaluated = []
    dims = range(n)
    for _ in range(max_attempts):
        m = rng.randint(m_lo, m_hi)
        mask = 0
        for d in rng.sample(dims, m):
            mask |= 1 << (n - 1 - d)
        cand = start ^ mask
        evaluated.append(cand)
        if landscape.current_fitness(cand) > threshold:
            return cand, evaluated
    return None, evaluated


class TableAgent:
    """An agent driven by S1/S2 probability tables."""

    def __init__(self, agent_id: int, strategy: Strategy, rng: random.Random):
        self.id = agent_id
        self.strategy = strategy
        self.rng = rng
        self.private_memory = Memory()
        self.position = None
        self.occupancy = StateOccupancy()

    def initialize(self, landscape: Landscape, public_memory: Memory,
                   pending_visits: list) -> MemoryEntry:
        self.position = self.rng.getrandbits(landscape.n)
        entry = MemoryEntry(self.position, landscape.current_fitness(self.position),
                            0, self.id)
        self.private_memory.add(entry)
        pending_visits.append(self.position)
        return entry

    def step(self, step_no: int, env: EnvironmentConfig, landscape: Landscape,
             public_memory: Memory, pending_visits: list,
             pending_public: list) -> StepRecord:
        pub_level = discretize(public_memory.best.stored_fitness)
        priv_level = discretize(self.private_memory.best.stored_fitness)
        self.occupancy.s1_counts[2 * pub_level + priv_level] += 1
        method, source = select_s1(self.strategy, pub_level, priv_level, self.rng)
        start = (public_memory.best if source == PUBLIC
                 else self.private_memory.best).point
        if method == EXPLOIT:
            found, evaluated = exploit_step(landscape, start, self.rng)
        else:
            found, evaluated = explore_step(landscape, start, env.explore_range,
                                            env.max_jump_attempts, self.rng)
        if env.visit_policy == ALL_EVALUATIONS:
            pending_visits.extend(evaluated)
        elif found is not None:
            pending_visits.append(found)

        s2_state = placement = None
        if found is not None:
            self.position = found
            fitness = landscape.current_fitness(found)
            s2_state = discretize(fitness)
            self.occupancy.s2_counts[s2_state] += 1
            dest = select_s2(self.strategy, s2_state, self.rng)
            entry = MemoryEntry(found, fitness, step_no, self.id)
            if dest == PUBLIC:
                pending_public.append(entry)
                placement = "public"
            else:
                self.private_memory.add(entry)
                placement = "private"
        return StepRecord(step_no, self.id, self.position,
                          landscape.current_fitness(self.position),
                          len(evaluated), 2 * pub_level + priv_level,
                          (method, source), s2_state, placement,
                          tuple(evaluated) if env.visit_policy == ALL_EVALUATIONS
                          else ((found,) if found is not None else ()))


def make_agent(agent_id: int, strategy, rng: random.Random):
    """Build an agent for a strategy spec (Strategy or 'rtts'/'rtts-matched')."""
    if isinstance(strategy, Strategy):
        return TableAgent(agent_id, strategy, rng)
    if strategy in ("rtts", "rtts-matched"):
        from .rtts import RttsAgent, RttsConfig
        return RttsAgent(agent_id, RttsConfig(budget_matched=strategy == "rtts-matched"),
                         rng)
    raise ValueError(f"unrecognized strategy spec: {strategy!r}")


def _resolve_strategies(env: EnvironmentConfig, evaluated_strategy):
    opponents = list(env.opponent_strategies)
    if env.num_agents > 1:
        if len(opponents) == 1:
            opponents = opponents * (env.num_agents - 1)
        if len(opponents) != env.num_agents - 1:
            raise ValueError(f"need {env.num_agents - 1} opponent strategies, "
                             f"got {len(opponents)}")
    else:
        opponents = []
    return [evaluated_strategy] + opponents


def run_simulation(env: EnvironmentConfig, evaluated_strategy,
                   run_index: int = 0, agent_order=None,
                   landscape: Landscape | None = None,
                   detail: bool = True) -> RunTrace:
    """Run one seeded simulation; agent 0 uses `evaluated_strategy`.

    `agent_order` permutes the within-step update order (testing hook);
    the end state must not depend on it. Returns the run trace; the
    mutated landscape is reachable as trace.landscape.
    """
    strategies = _resolve_strategies(env, evaluated_strategy)
    if landscape is None:
        land_seed = int(np.random.SeedSequence(
            [env.seed, run_index]).generate_state(1, dtype=np.uint64)[0])
        landscape = build_landscape(env.n, env.k, land_seed, env.flocking)
    agents = [make_agent(i, s, agent_rng(env.seed, run_index, i))
              for i, s in enumerate(strategies)]
    public_memory = Memory()
    trace = RunTrace(env.n, env.num_agents, env.steps, env.flocking.radius)
    trace.landscape = landscape
    trace.public_memory = public_memory

    pending_visits: list = []
    init_entries = [agent.initialize(landscape, public_memory, pending_visits)
                    for agent in agents]
    for entry in sorted(init_entries, key=MemoryEntry.sort_key):
        public_memory.add(entry)
    if detail:
        trace.init_records = [
            StepRecord(0, a.id, a.position, e.stored_fitness, 1,
                       None, None, None, "both", (a.position,))
            for a, e in zip(agents, init_entries)]
    landscape.apply_visits(pending_visits)

    order = list(agent_order) if agent_order is not None else list(range(len(agents)))
    if sorted(order) != list(range(len(agents))):
        raise ValueError("agent_order must be a permutation of all agent ids")

    for step_no in range(1, env.steps + 1):
        pending_public: list = []
        step_records = {}
        for i in order:
            rec = agents[i].step(step_no, env, landscape, public_memory,
                                 pending_visits, pending_public)
            step_records[i] = rec
        trace.agent0_fitness.append(step_records[0].fitness)
        if detail:
            trace.records.extend(step_records[i] for i in range(len(agents)))
        landscape.apply_visits(pending_visits)
        for entry in sorted(pending_public, key=MemoryEntry.sort_key):
            public_memory.add(entry)

    trace.occupancies = [getattr(a, "occupancy", None) for a in agents]
    return trace


@dataclass(frozen=True)
class EvalStats:
    mean: float
    std: float
    stderr: float
    performances: tuple

    @property
    def repeats(self) -> int:
        return len(self.performances)


def evaluate_strategy(strategy, env: EnvironmentConfig, repeats: int,
                      detail: bool = False, collect_traces: bool = False):
    """Mean per-step fitness of agent 0 over `repeats` fresh-landscape runs."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    perfs = []
    traces = []
    for r in range(repeats):
        trace = run_simulation(env, strategy, run_index=r, detail=detail)
        perfs.append(trace.performance())
        if collect_traces:
            traces.append(trace)
    arr = np.asarray(perfs)
    stats = EvalStats(float(arr.mean()),
                      float(arr.std(ddof=1)) if len(perfs) > 1 else 0.0,
                      float(arr.std(ddof=1) / math.sqrt(len(perfs))) if len(perfs) > 1 else 0.0,
                      tuple(perfs))
    return (stats, traces) if collect_traces else stats
