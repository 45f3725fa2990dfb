"""Probability-table strategies: state discretization, sampling, export.

An S1 table has four rows (public level x private level) and four columns
(method x source memory); an S2 table has two rows (new-point level) and
two columns (destination memory). Index conventions, used everywhere:

  level:   0 = low fitness, 1 = high fitness
  method:  0 = exploit, 1 = explore
  memory:  0 = public, 1 = private
  S1 row = 2 * public_level + private_level
  S1 col = 2 * method + source
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

LOW, HIGH = 0, 1
EXPLOIT, EXPLORE = 0, 1
PUBLIC, PRIVATE = 0, 1

ROW_SUM_TOL = 1e-9
UNIFORM_ROW_EPSILON = 1e-6

S1_ROW_LABELS = ("pub-low/priv-low", "pub-low/priv-high",
                 "pub-high/priv-low", "pub-high/priv-high")
S1_COL_LABELS = ("exploit-public", "exploit-private",
                 "explore-public", "explore-private")
S2_ROW_LABELS = ("new-low", "new-high")
S2_COL_LABELS = ("place-public", "place-private")


def discretize(f: float) -> int:
    """Map a fitness value to LOW (< 0.5) or HIGH (>= 0.5)."""
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"fitness must be in [0, 1], got {f}")
    return LOW if f < 0.5 else HIGH


def normalize_rows(raw, epsilon: float = UNIFORM_ROW_EPSILON) -> np.ndarray:
    """Scale each row to sum to 1; near-zero rows become uniform."""
    raw = np.asarray(raw, dtype=float)
    if (raw < 0).any():
        raise ValueError("entries must be nonnegative")
    out = np.empty_like(raw)
    ncols = raw.shape[1]
    for r in range(raw.shape[0]):
        s = raw[r].sum()
        if s < epsilon or np.all(raw[r] == raw[r, 0]):
            # all-equal rows (including all-zero) become exactly uniform
            out[r] = 1.0 / ncols
        else:
            out[r] = raw[r] / s
    return out


def _check_table(probs: np.ndarray, shape: tuple) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.shape != shape:
        raise ValueError(f"expected shape {shape}, got {probs.shape}")
    if (probs < 0).any() or (probs > 1).any():
        raise ValueError("probabilities must be in [0, 1]")
    sums = probs.sum(axis=1)
    if not np.all(np.abs(sums - 1.0) <= ROW_SUM_TOL):
        raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOL}, got {sums}")
    return probs


class S1Table:
    """4x4 action probabilities: row = state, column = (method, source)."""

    def __init__(self, probs):
        self.probs = _check_table(probs, (4, 4))
        self._rows = [list(row) for row in self.probs]

    def row(self, pub_level: int, priv_level: int) -> list:
        return self._rows[2 * pub_level + priv_level]


class S2Table:
    """2x2 placement probabilities: row = new-point level, column = destination."""

    def __init__(self, probs):
        self.probs = _check_table(probs, (2, 2))
        self._rows = [list(row) for row in self.probs]

    def row(self, level: int) -> list:
        return self._rows[level]


@dataclass(frozen=True)
class Strategy:
    s1: S1Table
    s2: S2Table
    label: str = ""


@dataclass
class StateOccupancy:
    """Step counts per discrete state, for one agent over one run."""

    s1_counts: list = field(default_factory=lambda: [0, 0, 0, 0])
    s2_counts: list = field(default_factory=lambda: [0, 0])


def _sample_row(row, rng) -> int:
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(row):
        acc += p
        if u < acc:
            return i
    return len(row) - 1


def select_s1(strategy: Strategy, pub_level: int, priv_level: int, rng) -> tuple:
    """Sample (method, source) from the S1 row for the given state."""
    action = _sample_row(strategy.s1.row(pub_level, priv_level), rng)
    return action // 2, action % 2


def select_s2(strategy: Strategy, new_level: int, rng) -> int:
    """Sample a destination memory from the S2 row for the new point's level."""
    return _sample_row(strategy.s2.row(new_level), rng)


def strategy_to_vector(strategy: Strategy) -> np.ndarray:
    """Canonical 20-vector: S1 rows row-major, then S2 rows."""
    return np.concatenate([strategy.s1.probs.ravel(), strategy.s2.probs.ravel()])


def vector_to_strategy(vector, label: str = "") -> Strategy:
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (20,):
        raise ValueError(f"expected 20 values, got shape {vector.shape}")
    return Strategy(S1Table(vector[:16].reshape(4, 4)),
                    S2Table(vector[16:].reshape(2, 2)), label=label)


PRIVATE_MASS_INDICES = [r * 4 + c for r in range(4) for c in (1, 3)] + [17, 19]


def private_memory_mass(vector) -> float:
    """Total probability mass on private-memory actions of a 20-vector."""
    vector = np.asarray(vector, dtype=float)
    return float(vector[PRIVATE_MASS_INDICES].sum())


# -- strategy files ----------------------------------------------------------

def format_strategy(strategy: Strategy) -> str:
    lines = []
    if strategy.label:
        lines.append(f"# {strategy.label}")
    lines.append("# s1 <state>: " + " ".join(S1_COL_LABELS))
    for r, label in enumerate(S1_ROW_LABELS):
        vals = " ".join(repr(v) for v in strategy.s1.probs[r])
        lines.append(f"s1 {label}: {vals}")
    lines.append("# s2 <state>: " + " ".join(S2_COL_LABELS))
    for r, label in enumerate(S2_ROW_LABELS):
        vals = " ".join(repr(v) for v in strategy.s2.probs[r])
        lines.append(f"s2 {label}: {vals}")
    return "\n".join(lines) + "\n"


def parse_strategy(text: str, label: str = "") -> Strategy:
    s1 = np.zeros((4, 4))
    s2 = np.zeros((2, 2))
    seen = set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        head, _, vals = line.partition(":")
        kind, _, state = head.strip().partition(" ")
        state = state.strip()
        values = [float(v) for v in vals.split()]
        if kind == "s1":
            r = S1_ROW_LABELS.index(state)
            s1[r] = values
        elif kind == "s2":
            r = S2_ROW_LABELS.index(state)
            s2[r] = values
        else:
            raise ValueError(f"unrecognized strategy line: {line!r}")
        seen.add((kind, state))
    if len(seen) != 6:
        raise ValueError(f"strategy file must define 4 s1 rows and 2 s2 rows, got {sorted(seen)}")
    return Strategy(S1Table(s1), S2Table(s2), label=label)


def save_strategy(strategy: Strategy, path) -> None:
    with open(path, "w") as f:
        f.write(format_strategy(strategy))


def load_strategy(path, label: str = "") -> Strategy:
    with open(path) as f:
        return parse_strategy(f.read(), label=label or str(path))


# -- pie-chart export --------------------------------------------------------

_SLICE_SHADES = ("#ffffff", "#9e9e9e", "#d7e9f7", "#4a7fb5")
_S2_SHADES = ("#ffffff", "#9e9e9e")


def pie_chart_data(strategy: Strategy, occupancy: StateOccupancy) -> dict:
    """Numeric slice/band description behind the pie export."""
    s1_total = sum(occupancy.s1_counts)
    s2_total = sum(occupancy.s2_counts)
    charts = []
    for r in range(4):
        probs = list(strategy.s1.probs[r])
        occ = occupancy.s1_counts[r] / s1_total if s1_total else None
        charts.append({
            "table": "s1", "state": S1_ROW_LABELS[r],
            "actions": list(S1_COL_LABELS),
            "probabilities": probs,
            "slice_degrees": [360.0 * p for p in probs],
            "occupancy_fraction": occ,
            "band_degrees": 360.0 * occ if occ is not None else None,
        })
    for r in range(2):
        probs = list(strategy.s2.probs[r])
        occ = occupancy.s2_counts[r] / s2_total if s2_total else None
        charts.append({
            "table": "s2", "state": S2_ROW_LABELS[r],
            "actions": list(S2_COL_LABELS),
            "probabilities": probs,
            "slice_degrees": [360.0 * p for p in probs],
            "occupancy_fraction": occ,
            "band_degrees": 360.0 * occ if occ is not None else None,
        })
    return {"label": strategy.label, "charts": charts}


def _arc_path(cx, cy, radius, start_deg, sweep_deg):
    a0 = math.radians(start_deg - 90.0)
    a1 = math.radians(start_deg + sweep_deg - 90.0)
    x0, y0 = cx + radius * math.cos(a0), cy + radius * math.sin(a0)
    x1, y1 = cx + radius * math.cos(a1), cy + radius * math.sin(a1)
    large = 1 if sweep_deg > 180.0 else 0
    return x0, y0, x1, y1, large


def render_pie_svg(data: dict) -> str:
    """Six-circle strategy chart: slices = probabilities, band = occupancy."""
    r, pad, band_gap = 40, 14, 6
    width = 6 * (2 * r + pad) + pad
    height = 2 * r + 2 * pad + 16
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    for idx, chart in enumerate(data["charts"]):
        cx = pad + r + idx * (2 * r + pad)
        cy = pad + r
        shades = _SLICE_SHADES if chart["table"] == "s1" else _S2_SHADES
        start = 0.0
        for ai, sweep in enumerate(chart["slice_degrees"]):
            if sweep <= 0.0:
                continue
            if sweep >= 360.0:
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="{r}" fill="{shades[ai]}" stroke="black"/>')
            else:
                x0, y0, x1, y1, large = _arc_path(cx, cy, r, start, sweep)
                parts.append(
                    f'<path d="M{cx:.2f},{cy:.2f} L{x0:.2f},{y0:.2f} '
                    f'A{r},{r} 0 {large} 1 {x1:.2f},{y1:.2f} Z" '
                    f'fill="{shades[ai]}" stroke="black"/>')
            start += sweep
        band = chart["band_degrees"]
        if band:
            br = r + band_gap
            if band >= 360.0:
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="{br}" fill="none" '
                             f'stroke="black" stroke-width="3"/>')
            else:
                x0, y0, x1, y1, large = _arc_path(cx, cy, br, 0.0, band)
                parts.append(f'<path d="M{x0:.2f},{y0:.2f} A{br},{br} 0 {large} 1 '
                             f'{x1:.2f},{y1:.2f}" fill="none" stroke="black" stroke-width="3"/>')
        parts.append(f'<text x="{cx}" y="{height - 4}" font-size="9" '
                     f'text-anchor="middle">{chart["state"]}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def export_pie(strategy: Strategy, occupancy: StateOccupancy,
               svg_path, data_path=None) -> dict:
    """Write the pie chart SVG (and JSON sidecar); return the data record."""
    data = pie_chart_data(strategy, occupancy)
    with open(svg_path, "w") as f:
        f.write(render_pie_svg(data))
    if data_path is not None:
        with open(data_path, "w") as f:
            json.dump(data, f, indent=2)
    return data
