"""Spherical variable-resolution rendering of NK landscapes.

A focus point sits at the north pole; ring d of the grid holds points at
Hamming distance d, built by flipping d cyclically consecutive bits of
the focus. Latitude encodes Hamming distance, so the local neighborhood
is shown at full resolution and the far side at reduced resolution.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass

from .landscape import Landscape, hamming, point_to_str


@dataclass
class SphericalGrid:
    n: int
    focus: int
    rings: list           # rings[d] = list of points at Hamming distance d
    _slots: dict = None   # point -> (ring, slot)

    def __post_init__(self):
        if self._slots is None:
            self._slots = {}
            for d, ring in enumerate(self.rings):
                for j, p in enumerate(ring):
                    self._slots.setdefault(p, (d, j))

    def slot(self, point: int):
        return self._slots.get(point)


def _run_mask(n: int, start_dim: int, length: int) -> int:
    """XOR mask flipping `length` cyclically consecutive dims from `start_dim`."""
    m = 0
    for t in range(length):
        dim = (start_dim + t) % n
        m |= 1 << (n - 1 - dim)
    return m


def build_grid(n: int, focus: int) -> SphericalGrid:
    """Rings of cyclic-run bit flips; ring N is the focus complement."""
    if not 2 <= n <= 24:
        raise ValueError(f"n must be in [2, 24], got {n}")
    if not 0 <= focus < (1 << n):
        raise ValueError("focus out of range")
    rings = [[focus]]
    for d in range(1, n):
        rings.append([focus ^ _run_mask(n, j, d) for j in range(n)])
    rings.append([focus ^ ((1 << n) - 1)])
    return SphericalGrid(n, focus, rings)


@dataclass(frozen=True)
class SphericalPlacement:
    point: int
    latitude: int        # Hamming distance from focus
    cell: int | None     # None for exact grid points
    u: float             # within-cell offsets in [0, 1)
    v: float


def _cell_corners(grid: SphericalGrid, d: int, j: int) -> list:
    """Corners of cell j straddling latitude d (rings d-1, d, d+1)."""
    n = grid.n
    below = grid.rings[d - 1]
    here = grid.rings[d]
    above = grid.rings[d + 1]
    return [below[j % len(below)], here[j % len(here)],
            here[(j + 1) % len(here)], above[j % len(above)]]


def _hash_offsets(point: int, n: int) -> tuple:
    digest = hashlib.blake2b(point_to_str(point, n).encode(),
                             digest_size=8).digest()
    u = int.from_bytes(digest[:4], "big") / 2 ** 32
    v = int.from_bytes(digest[4:], "big") / 2 ** 32
    return 0.15 + 0.7 * u, 0.15 + 0.7 * v

def place_point(point: int, grid: SphericalGrid) -> SphericalPlacement:
    """Latitude = Hamming distance; off-grid points go to the straddling
    cell whose corners are closest in total Hamming distance."""
    n = grid.n
    if not 0 <= point < (1 << n):
        raise ValueError("point out of range")
    d = hamming(point, grid.focus)
    slot = grid.slot(point)
    if slot is not None and slot[0] == d:
        return SphericalPlacement(point, d, None, 0.0, 0.0)
    best_j, best_cost = 0, math.inf
    for j in range(n):
        cost = sum(hamming(point, c) for c in _cell_corners(grid, d, j))
        if cost < best_cost:
            best_j, best_cost = j, cost
    u, v = _hash_offsets(point, n)
    return SphericalPlacement(point, d, best_j, u, v)


# -- rendering ---------------------------------------------------------------

def _vertex(grid: SphericalGrid, d: int, j: int, fitness: float,
            elevation_scale: float) -> tuple:
    n = grid.n
    theta = math.pi * d / n
    ring_len = len(grid.rings[d])
    phi = 2.0 * math.pi * j / ring_len if ring_len > 1 else 0.0
    r = 1.0 + elevation_scale * fitness
    return (r * math.sin(theta) * math.cos(phi),
            r * math.sin(theta) * math.sin(phi),
            r * math.cos(theta))


def _shade(fitness: float) -> str:
    g = int(round(255 * max(0.0, min(1.0, fitness))))
    return f"#{g:02x}{g:02x}{g:02x}"


def _marker_xy(grid: SphericalGrid, placement: SphericalPlacement,
               elevation_scale: float, fitness: float) -> tuple:
    n = grid.n
    slot = grid.slot(placement.point)
    if placement.cell is None and slot is not None:
        d, j = slot
        frac_j = float(j)
        ring_len = len(grid.rings[d])
    else:
        d = placement.latitude
        frac_j = placement.cell + placement.u
        ring_len = n
    theta = math.pi * (d + (placement.v - 0.5) * 0.6 * (placement.cell is not None)) / n
    phi = 2.0 * math.pi * frac_j / ring_len if ring_len > 1 else 0.0
    r = 1.0 + elevation_scale * fitness
    return (r * math.sin(theta) * math.cos(phi),
            r * math.sin(theta) * math.sin(phi),
            r * math.cos(theta))


MARKER_KINDS = ("dot", "triangle", "square")


def render(landscape: Landscape, grid: SphericalGrid, markers=(),
           svg_path=None, heightfield_path=None, rear: bool = False,
           elevation_scale: float = 0.15, size: int = 420) -> str:
    """Orthographic view of the focus hemisphere as an SVG string.

    `markers` is a list of (point, kind) with kind in MARKER_KINDS.
    Writes the SVG and a (ring, slot, point, fitness) heightfield file
    when paths are given.
    """
    if grid.n != landscape.n:
        raise ValueError("grid and landscape dimensions differ")
    n = grid.n
    fitness = [[landscape.current_fitness(p) for p in ring] for ring in grid.rings]
    flip = -1.0 if rear else 1.0
    half, scale = size / 2.0, size / 2.0 / (1.0 + elevation_scale) * 0.95

    faces = []
    for d in range(n):
        ring_a, ring_b = grid.rings[d], grid.rings[d + 1]
        la, lb = len(ring_a), len(ring_b)
        cols = max(la, lb)
        for j in range(cols):
            quad = [(d, j % la), (d, (j + 1) % la),
                    (d + 1, (j + 1) % lb), (d + 1, j % lb)]
            verts = [_vertex(grid, dd, jj, fitness[dd][jj], elevation_scale)
                     for dd, jj in quad]
            zmean = sum(v[2] for v in verts) / len(verts) * flip
            if zmean < 0:
                continue
            fmean = sum(fitness[dd][jj] for dd, jj in quad) / len(quad)
            faces.append((zmean, verts, fmean))
    faces.sort(key=lambda f: f[0])

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" '
             f'height="{size}">',
             f'<rect width="{size}" height="{size}" fill="#202030"/>']
    for _, verts, fmean in faces:
        pts = " ".join(f"{half + scale * x:.2f},{half - scale * y:.2f}"
                       for x, y, z in verts)
        parts.append(f'<polygon points="{pts}" fill="{_shade(fmean)}" '
                     f'stroke="#303030" stroke-width="0.4"/>')
    for point, kind in markers:
        placement = place_point(point, grid)
        f = landscape.current_fitness(point)
        x, y, z = _marker_xy(grid, placement, elevation_scale, f)
        if z * flip < 0:
            continue
        sx, sy = half + scale * x, half - scale * y
        if kind == "dot":
            parts.append(f'<circle cx="{sx:.2f}" cy="{sy:.2f}" r="2.2" '
                         f'fill="#15151f"/>')
        elif kind == "triangle":
            parts.append(f'<polygon points="{sx:.2f},{sy - 3.2:.2f} '
                         f'{sx - 2.8:.2f},{sy + 2.4:.2f} {sx + 2.8:.2f},{sy + 2.4:.2f}" '
                         f'fill="#d0312d"/>')
        elif kind == "square":
            parts.append(f'<rect x="{sx - 2.4:.2f}" y="{sy - 2.4:.2f}" '
                         f'width="4.8" height="4.8" fill="#2d6fd0"/>')
        else:
            raise ValueError(f"unknown marker kind {kind!r}")
    parts.append("</svg>")
    svg = "\n".join(parts)

    if svg_path is not None:
        with open(svg_path, "w") as f:
            f.write(svg)
    if heightfield_path is not None:
        with open(heightfield_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["ring", "slot", "point", "fitness"])
            for d, ring in enumerate(grid.rings):
                for j, p in enumerate(ring):
                    w.writerow([d, j, point_to_str(p, n), repr(fitness[d][j])])
    return svg
