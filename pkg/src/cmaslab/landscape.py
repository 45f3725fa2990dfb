"""NK fitness landscapes with visit-driven dynamic fitness changes.

Points are represented as plain Python ints: dimension 0 is the most
significant of the n bits, so the numeric order of two points equals the
lexicographic order of their bit strings.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

# Landscapes up to this dimension keep dense multiplier/visit arrays
# (2^n floats); above it they fall back to sparse dicts.
DENSE_LIMIT = 20

MAX_N = 30


def point_from_bits(bits) -> int:
    """Pack an iterable of 0/1 values (dimension 0 first) into a point."""
    p = 0
    for b in bits:
        p = (p << 1) | (b & 1)
    return p


def point_to_bits(point: int, n: int) -> tuple:
    """Unpack a point into a tuple of 0/1 values, dimension 0 first."""
    return tuple((point >> (n - 1 - i)) & 1 for i in range(n))


def point_to_str(point: int, n: int) -> str:
    return format(point, f"0{n}b")


def point_from_str(s: str) -> int:
    return int(s, 2)


def hamming(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def flip_dim(point: int, dim: int, n: int) -> int:
    """Flip dimension `dim` (0-based) of an n-bit point."""
    return point ^ (1 << (n - 1 - dim))


def ball_masks(n: int, radius: int) -> list:
    """XOR masks reaching every point within Hamming distance <= radius.

    Includes the zero mask, so len == sum_{d<=radius} C(n, d).
    """
    positions = [1 << i for i in range(n)]
    masks = []
    for d in range(radius + 1):
        for combo in itertools.combinations(positions, d):
            m = 0
            for bit in combo:
                m |= bit
            masks.append(m)
    return masks


def hamming_ball(point: int, radius: int, n: int) -> set:
    """All points within Hamming distance <= radius of `point`."""
    if not 0 <= radius <= n:
        raise ValueError(f"radius must be in [0, {n}], got {radius}")
    return {point ^ m for m in ball_masks(n, radius)}


@dataclass(frozen=True)
class FlockingConfig:
    """Linear intensity decay applied around visited points."""

    intensity_start: float = 1.05
    intensity_end: float = 0.9
    decay_visits: int = 10
    radius: int = 2

    def __post_init__(self):
        if self.decay_visits < 1:
            raise ValueError("decay_visits must be >= 1")
        if self.radius < 0:
            raise ValueError("radius must be >= 0")

    @classmethod
    def disabled(cls) -> "FlockingConfig":
        return cls(intensity_start=1.0, intensity_end=1.0)

    def intensity(self, visit_count: int) -> float:
        """Intensity applied on the visit that brings the count to `visit_count`."""
        frac = min(visit_count - 1, self.decay_visits) / self.decay_visits
        return self.intensity_start + (self.intensity_end - self.intensity_start) * frac


class Landscape:
    """An NK contribution table plus a visit-driven fitness multiplier overlay.

    Base fitness of a point is the mean of per-dimension contributions,
    where dimension i's contribution is looked up with the (K+1)-bit key
    formed by bits i, i+1, ..., i+K (cyclically). Current fitness is the
    base fitness times the point's accumulated multiplier, clamped to [0, 1].
    """

    def __init__(self, n: int, k: int, table: np.ndarray,
                 flocking: FlockingConfig | None = None):
        if not 1 <= n <= MAX_N:
            raise ValueError(f"n must be in [1, {MAX_N}], got {n}")
        if not 0 <= k <= n - 1:
            raise ValueError(f"k must be in [0, n-1], got {k} (n={n})")
        if table.shape != (n, 2 ** (k + 1)):
            raise ValueError(f"table shape {table.shape} != ({n}, {2 ** (k + 1)})")
        self.n = n
        self.k = k
        self.table = table
        self.flocking = flocking if flocking is not None else FlockingConfig()
        self._dense = n <= DENSE_LIMIT
        if self._dense:
            self._base = self._full_base_array()
            self.multipliers = np.ones(1 << n)
            self.visit_counts = np.zeros(1 << n, dtype=np.int64)
        else:
            self._base_cache: dict = {}
            self.multipliers = {}
            self.visit_counts = {}
        self._masks = np.array(ball_masks(n, self.flocking.radius), dtype=np.int64) \
            if self._dense else ball_masks(n, self.flocking.radius)

    def _full_base_array(self) -> np.ndarray:
        xs = np.arange(1 << self.n, dtype=np.int64)
        n, k = self.n, self.k
        total = np.zeros(len(xs))
        for i in range(n):
            key = np.zeros(len(xs), dtype=np.int64)
            for j in range(k + 1):
                dim = (i + j) % n
                bit = (xs >> (n - 1 - dim)) & 1
                key |= bit << (k - j)
            total += self.table[i, key]
        return total / n

    def _check_point(self, point: int):
        if not 0 <= point < (1 << self.n):
            raise ValueError(f"point {point} out of range for n={self.n}")

    def base_fitness(self, point: int) -> float:
        self._check_point(point)
        if self._dense:
            return float(self._base[point])
        cached = self._base_cache.get(point)
        if cached is not None:
            return cached
        n, k = self.n, self.k
        total = 0.0
        for i in range(n):
            key = 0
            for j in range(k + 1):
                dim = (i + j) % n
                key |= ((point >> (n - 1 - dim)) & 1) << (k - j)
            total += self.table[i, key]
        value = total / n
        self._base_cache[point] = value
        return value

    def multiplier(self, point: int) -> float:
        if self._dense:
            return float(self.multipliers[point])
        return self.multipliers.get(point, 1.0)

    def visit_count(self, point: int) -> int:
        if self._dense:
            return int(self.visit_counts[point])
        return self.visit_counts.get(point, 0)

    def current_fitness(self, point: int) -> float:
        f = self.base_fitness(point) * self.multiplier(point)
        return 0.0 if f < 0.0 else (1.0 if f > 1.0 else f)

    def apply_visits(self, pending: list) -> None:
        """Apply one time step's recorded visits, then clear the list.

        Visits are applied in canonical (sorted-by-point) order so the end
        state does not depend on the order agents were advanced in. Each
        visit increments the central point's count and multiplies the
        multiplier of every point within the flocking radius by the
        intensity for that count.
        """
        fl = self.flocking
        if self._dense:
            mult, counts, masks = self.multipliers, self.visit_counts, self._masks
            for p in sorted(pending):
                counts[p] += 1
                mult[p ^ masks] *= fl.intensity(int(counts[p]))
        else:
            mult, counts = self.multipliers, self.visit_counts
            for p in sorted(pending):
                v = counts.get(p, 0) + 1
                counts[p] = v
                inten = fl.intensity(v)
                for m in self._masks:
                    q = p ^ m
                    mult[q] = mult.get(q, 1.0) * inten
        pending.clear()


def build_landscape(n: int, k: int, seed: int,
                    flocking: FlockingConfig | None = None) -> Landscape:
    """Seeded landscape with uniform [0, 1) contribution entries."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}], got {n}")
    if not 0 <= k <= n - 1:
        raise ValueError(f"k must be in [0, n-1], got {k} (n={n})")
    rng = np.random.default_rng(seed)
    table = rng.random((n, 2 ** (k + 1)))
    return Landscape(n, k, table, flocking)
