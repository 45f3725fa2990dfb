"""Real-time tree-search baseline: depth-2 lookahead over bit-flip moves.

The full scan scores each one-bit neighbor by its fitness plus the best
fitness among that neighbor's own neighbors, then commits to the argmax.
A budget-matched variant spreads the scan over consecutive time steps so
the evaluation rate matches the table-driven agents' average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .landscape import Landscape
from .simulation import MemoryEntry, StepRecord, ALL_EVALUATIONS

TABLE_AGENT_EVALS_PER_STEP = 8


def scan_size(n: int) -> int:
    """Distinct points touched by a full depth-2 scan: 1 + N(N+1)/2."""
    return 1 + n * (n + 1) // 2


def steps_per_move(n: int, evals_per_step: int = TABLE_AGENT_EVALS_PER_STEP) -> int:
    """Time steps a budget-matched scan takes (26 at N=20, 7 at N=10)."""
    return max(1, scan_size(n) // evals_per_step)


@dataclass(frozen=True)
class RttsConfig:
    depth: int = 2
    budget_matched: bool = False
    evals_per_step: int = TABLE_AGENT_EVALS_PER_STEP

    def __post_init__(self):
        if self.depth != 2:
            raise ValueError("only depth-2 lookahead is supported")


def scan_order(current: int, n: int) -> list:
    """Deterministic probe order covering the radius-2 ball, current first."""
    probes = [current]
    seen = {current}
    for i in range(n):
        ni = current ^ (1 << (n - 1 - i))
        probes.append(ni)
        seen.add(ni)
    for i in range(n):
        ni = current ^ (1 << (n - 1 - i))
        for j in range(n):
            nij = ni ^ (1 << (n - 1 - j))
            if nij not in seen:
                probes.append(nij)
                seen.add(nij)
    return probes


def _choose_move(current: int, n: int, values: dict) -> int:
    """Argmax over one-bit moves of fitness(s') + max fitness of s' neighbors."""
    best_dim, best_score = 0, -math.inf
    for i in range(n):
        ni = current ^ (1 << (n - 1 - i))
        lookahead = max(values[ni ^ (1 << (n - 1 - j))] for j in range(n))
        score = values[ni] + lookahead
        if score > best_score:
            best_dim, best_score = i, score
    return current ^ (1 << (n - 1 - best_dim))


def rtts_step(landscape: Landscape, current: int) -> tuple:
    """One full depth-2 move. Returns (next point, evaluated points list)."""
    n = landscape.n
    probes = scan_order(current, n)
    values = {p: landscape.current_fitness(p) for p in probes}
    return _choose_move(current, n, values), probes


class RttsAgent:
    """Position-only searcher usable as evaluated agent or opponent.

    Keeps no memory tables and never schedules public-memory updates; its
    fitness queries are recorded as landscape visits per the environment's
    visit policy. In budget-matched mode the scan probes are spread evenly
    over `steps_per_move` time steps and the move executes on the step the
    scan completes; fitness values are read live, so earlier probes can be
    stale by the time the move is chosen.
    """

    def __init__(self, agent_id: int, config: RttsConfig, rng):
        self.id = agent_id
        self.config = config
        self.rng = rng
        self.position = None
        self.occupancy = None
        self._scan = None
        self._values = {}
        self._scan_step = 0

    def initialize(self, landscape: Landscape, public_memory, pending_visits) -> MemoryEntry:
        self.position = self.rng.getrandbits(landscape.n)
        pending_visits.append(self.position)
        return MemoryEntry(self.position, landscape.current_fitness(self.position),
                           0, self.id)

    def _record(self, probes, env, pending_visits, moved_to):
        if env.visit_policy == ALL_EVALUATIONS:
            pending_visits.extend(probes)
        elif moved_to is not None:
            pending_visits.append(moved_to)

    def step(self, step_no: int, env, landscape: Landscape, public_memory,
             pending_visits, pending_public) -> StepRecord:
        n = landscape.n
        if not self.config.budget_matched:
            nxt, probes = rtts_step(landscape, self.position)
            self.position = nxt
            self._record(probes, env, pending_visits, nxt)
            evals = len(probes)
            visits = tuple(probes) if env.visit_policy == ALL_EVALUATIONS else (nxt,)
        else:
            if self._scan is None:
                self._scan = scan_order(self.position, n)
                self._values = {}
                self._scan_step = 0
            total = len(self._scan)
            span = steps_per_move(n, self.config.evals_per_step)
            s = self._scan_step + 1
            lo = round(total * (s - 1) / span)
            hi = round(total * s / span)
            batch = self._scan[lo:hi]
            for p in batch:
                self._values[p] = landscape.current_fitness(p)
            self._scan_step = s
            moved_to = None
            if s >= span:
                moved_to = _choose_move(self.position, n, self._values)
                self.position = moved_to
                self._scan = None
            self._record(batch, env, pending_visits, moved_to)
            evals = len(batch)
            visits = (tuple(batch) if env.visit_policy == ALL_EVALUATIONS
                      else ((moved_to,) if moved_to is not None else ()))
        return StepRecord(step_no, self.id, self.position,
                          landscape.current_fitness(self.position),
                          evals, None, None, None, None, visits)
