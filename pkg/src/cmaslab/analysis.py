"""Post-run analysis: PCA of strategy ensembles, Welch's t-test,
state-occupancy aggregation, and prior-visit accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .landscape import hamming
from .strategy import private_memory_mass


@dataclass
class StrategyEnsemble:
    """Strategy vectors with environment labels and fitness values."""

    vectors: np.ndarray          # shape (m, 20)
    labels: list
    fitnesses: list

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=float)
        if self.vectors.ndim != 2 or self.vectors.shape[1] != 20:
            raise ValueError(f"vectors must be (m, 20), got {self.vectors.shape}")


@dataclass
class PcaResult:
    coordinates: np.ndarray
    explained_variance: np.ndarray   # fractions, all components, nonincreasing
    components: np.ndarray
    mean: np.ndarray


def pca_project(ensemble: StrategyEnsemble) -> PcaResult:
    """Project 20-vectors on the first principal component.

    The component sign is oriented so that larger coordinates mean more
    private-memory probability mass.
    """
    x = ensemble.vectors
    if x.shape[0] < 2:
        raise ValueError("need at least 2 vectors")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (x.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    total = eigvals.sum()
    if total <= 1e-15:
        raise ValueError("degenerate ensemble: all vectors identical "
                         "(zero variance in every direction)")
    coords = centered @ eigvecs[:, 0]
    mass = np.array([private_memory_mass(v) for v in x])
    corr = float(np.dot(coords - coords.mean(), mass - mass.mean()))
    if corr < 0:
        eigvecs = -eigvecs
        coords = -coords
    return PcaResult(coords, eigvals / total, eigvecs, mean)


@dataclass(frozen=True)
class WelchResult:
    statistic: float
    df: float
    p_value: float


def welch_t_test(sample_a, sample_b, alternative: str = "two-sided") -> WelchResult:
    """Unequal-variance t-test with Welch-Satterthwaite degrees of freedom.

    `alternative`: "two-sided", or "greater"/"less" for one-sided tests of
    mean(a) relative to mean(b).
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each sample needs at least 2 observations")
    na, nb = len(a), len(b)
    va, vb = a.var(ddof=1), b.var(ddof=1)
    se2 = va / na + vb / nb
    if se2 == 0.0:
        # no variance anywhere: identical means are indistinguishable
        p = 1.0 if a.mean() == b.mean() else 0.0
        t = 0.0 if p == 1.0 else math.inf * np.sign(a.mean() - b.mean())
        return WelchResult(float(t), float(na + nb - 2), p)
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    if alternative == "two-sided":
        p = 2.0 * _scipy_stats.t.sf(abs(t), df)
    elif alternative == "greater":
        p = _scipy_stats.t.sf(t, df)
    elif alternative == "less":
        p = _scipy_stats.t.cdf(t, df)
    else:
        raise ValueError(f"unknown alternative {alternative!r}")
    return WelchResult(float(t), float(df), float(min(p, 1.0)))


@dataclass
class PriorVisitReport:
    mean_self: float
    mean_opponent: float
    per_run: list    # (mean self per step, mean opponent per step)

    @property
    def mean_total(self) -> float:
        return self.mean_self + self.mean_opponent


def count_prior_visits(traces, radius: int) -> PriorVisitReport:
    """Average number of earlier visits within `radius` of the evaluated
    agent's position, split into its own visits and opponents' visits.

    A step's count considers all visits from strictly earlier steps,
    including the step-0 initialization visits.
    """
    per_run = []
    for trace in traces:
        prior = []   # (point, owner), in visit order
        for rec in trace.init_records:
            prior.extend((p, rec.agent) for p in rec.visits)
        by_step: dict = {}
        for rec in trace.records:
            by_step.setdefault(rec.step, []).append(rec)
        self_total = opp_total = 0
        steps = sorted(by_step)
        for step in steps:
            recs = by_step[step]
            me = next(r for r in recs if r.agent == 0)
            for p, owner in prior:
                if hamming(p, me.position) <= radius:
                    if owner == 0:
                        self_total += 1
                    else:
                        opp_total += 1
            for r in recs:
                prior.extend((p, r.agent) for p in r.visits)
        nsteps = max(1, len(steps))
        per_run.append((self_total / nsteps, opp_total / nsteps))
    if not per_run:
        raise ValueError("no traces supplied")
    return PriorVisitReport(
        float(np.mean([s for s, _ in per_run])),
        float(np.mean([o for _, o in per_run])),
        per_run)


def aggregate_occupancy(traces) -> tuple:
    """Percentages of time the evaluated agent spent in each discrete state.

    Returns (four action-table state percentages, two placement-table
    state percentages); each group sums to 100.
    """
    s1 = np.zeros(4)
    s2 = np.zeros(2)
    for trace in traces:
        occ = trace.occupancies[0]
        if occ is None:
            raise ValueError("evaluated agent has no occupancy record")
        s1 += occ.s1_counts
        s2 += occ.s2_counts
    if s1.sum() == 0:
        raise ValueError("traces contain no steps")
    s1_pct = 100.0 * s1 / s1.sum()
    s2_pct = 100.0 * s2 / s2.sum() if s2.sum() else np.zeros(2)
    return s1_pct, s2_pct
