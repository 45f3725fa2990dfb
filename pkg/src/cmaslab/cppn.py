"""Feed-forward CPPN genomes and their decoding into strategy tables.

A genome has four inputs, one bias, and two outputs. Inputs take values
in {-1, 1} (-1 encodes index 0): input 0 selects the public-memory level
(or, for the placement table, the new point's level), input 1 the
private-memory level, input 2 the search method, input 3 the memory used.
Output 0 yields the 4x4 action table, output 1 the 2x2 placement table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .strategy import Strategy, S1Table, S2Table, normalize_rows

NUM_INPUTS = 4
BIAS_ID = 4
OUTPUT_IDS = (5, 6)
FIRST_HIDDEN_ID = 7

INPUT_KIND, BIAS_KIND, HIDDEN_KIND, OUTPUT_KIND = "input", "bias", "hidden", "output"


def _sigmoid(x: float) -> float:
    if x < -60.0:
        return 0.0
    if x > 60.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(-x))


def _gaussian(x: float) -> float:
    return math.exp(-x * x)


def _sine(x: float) -> float:
    return math.sin(x)


def _linear(x: float) -> float:
    return x


ACTIVATIONS = {
    "sigmoid": _sigmoid,
    "gaussian": _gaussian,
    "sine": _sine,
    "linear": _linear,
}

SQUASHES = {"sigmoid": _sigmoid, "gaussian": _gaussian}


@dataclass(frozen=True)
class NodeGene:
    id: int
    kind: str
    activation: str = "sigmoid"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass(frozen=True)
class LinkGene:
    innovation: int
    src: int
    dst: int
    weight: float
    enabled: bool = True


class Genome:
    """Acyclic CPPN genome; construction validates structure."""

    def __init__(self, nodes, links):
        self.nodes = {n.id: n for n in nodes}
        self.links = {l.innovation: l for l in links}
        if len(self.nodes) != len(nodes):
            raise ValueError("duplicate node ids")
        if len(self.links) != len(links):
            raise ValueError("duplicate innovation numbers")
        inputs = [n for n in nodes if n.kind == INPUT_KIND]
        biases = [n for n in nodes if n.kind == BIAS_KIND]
        outputs = [n for n in nodes if n.kind == OUTPUT_KIND]
        if len(inputs) != NUM_INPUTS or len(biases) != 1 or len(outputs) != 2:
            raise ValueError("genome needs exactly 4 inputs, 1 bias, 2 outputs")
        for l in links:
            if l.src not in self.nodes or l.dst not in self.nodes:
                raise ValueError(f"link {l.innovation} references unknown node")
            if self.nodes[l.dst].kind in (INPUT_KIND, BIAS_KIND):
                raise ValueError("links into input/bias nodes are not allowed")
        self._order = self._topological_order()

    def _topological_order(self) -> list:
        incoming: dict = {nid: [] for nid in self.nodes}
        indegree = {nid: 0 for nid in self.nodes}
        for l in self.links.values():
            if not l.enabled:
                continue
            incoming[l.dst].append(l)
            indegree[l.dst] += 1
        ready = sorted(nid for nid, d in indegree.items() if d == 0)
        out_links: dict = {nid: [] for nid in self.nodes}
        for l in self.links.values():
            if l.enabled:
                out_links[l.src].append(l)
        order = []
        while ready:
            nid = ready.pop()
            order.append(nid)
            for l in out_links[nid]:
                indegree[l.dst] -= 1
                if indegree[l.dst] == 0:
                    ready.append(l.dst)
        if len(order) != len(self.nodes):
            raise ValueError("genome graph contains a cycle")
        self._incoming = incoming
        return order

    def size(self) -> tuple:
        return len(self.nodes), len(self.links)


def activate(genome: Genome, inputs) -> tuple:
    """Single feed-forward pass; returns the two output values."""
    if len(inputs) != NUM_INPUTS:
        raise ValueError(f"expected {NUM_INPUTS} inputs")
    values = {}
    for nid in genome._order:
        node = genome.nodes[nid]
        if node.kind == INPUT_KIND:
            values[nid] = float(inputs[nid])
        elif node.kind == BIAS_KIND:
            values[nid] = 1.0
        else:
            total = 0.0
            for l in genome._incoming[nid]:
                total += l.weight * values[l.src]
            values[nid] = ACTIVATIONS[node.activation](total)
    return values[OUTPUT_IDS[0]], values[OUTPUT_IDS[1]]


def decode_strategy(genome: Genome, squash: str = "sigmoid",
                    label: str = "") -> Strategy:
    """Fill both probability tables by sweeping input combinations.

    The action table sweeps all four inputs over {-1, 1}; the placement
    table sweeps inputs 0 and 3 with inputs 1 and 2 held at 0. Raw output
    values are squashed into (0, 1) and each row is normalized.
    """
    sq = SQUASHES[squash]
    raw1 = [[0.0] * 4 for _ in range(4)]
    raw2 = [[0.0] * 2 for _ in range(2)]
    signs = (-1.0, 1.0)
    for pub in (0, 1):
        for priv in (0, 1):
            for method in (0, 1):
                for source in (0, 1):
                    o1, _ = activate(genome, (signs[pub], signs[priv],
                                              signs[method], signs[source]))
                    raw1[2 * pub + priv][2 * method + source] = sq(o1)
    for level in (0, 1):
        for dest in (0, 1):
            _, o2 = activate(genome, (signs[level], 0.0, 0.0, signs[dest]))
            raw2[level][dest] = sq(o2)
    return Strategy(S1Table(normalize_rows(raw1)),
                    S2Table(normalize_rows(raw2)), label=label)


# -- serialization -----------------------------------------------------------

def format_genome(genome: Genome) -> str:
    lines = []
    for n in sorted(genome.nodes.values(), key=lambda n: n.id):
        lines.append(f"node {n.id} {n.kind} {n.activation}")
    for l in sorted(genome.links.values(), key=lambda l: l.innovation):
        lines.append(f"link {l.innovation} {l.src} {l.dst} {l.weight!r} "
                     f"{int(l.enabled)}")
    return "\n".join(lines) + "\n"


def parse_genome(text: str) -> Genome:
    nodes, links = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "node":
            nodes.append(NodeGene(int(parts[1]), parts[2], parts[3]))
        elif parts[0] == "link":
            links.append(LinkGene(int(parts[1]), int(parts[2]), int(parts[3]),
                                  float(parts[4]), bool(int(parts[5]))))
        else:
            raise ValueError(f"unrecognized genome line: {line!r}")
    return Genome(nodes, links)


def save_genome(genome: Genome, path) -> None:
    with open(path, "w") as f:
        f.write(format_genome(genome))


def load_genome(path) -> Genome:
    with open(path) as f:
        return parse_genome(f.read())
