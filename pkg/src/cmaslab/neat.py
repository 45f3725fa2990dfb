"""Neuroevolution of CPPN genomes: speciation, innovation-aligned crossover,
structural and weight mutation, and fitness sharing."""

from __future__ import annotations

import csv
import math
import pickle
import random
from dataclasses import dataclass, field, replace

import numpy as np

from .cppn import (Genome, NodeGene, LinkGene, decode_strategy,
                   NUM_INPUTS, BIAS_ID, OUTPUT_IDS, FIRST_HIDDEN_ID,
                   INPUT_KIND, BIAS_KIND, HIDDEN_KIND, OUTPUT_KIND)
from .simulation import EnvironmentConfig, evaluate_strategy


@dataclass(frozen=True)
class NeatConfig:
    population_size: int = 100
    generations: int = 500
    compatibility_threshold: float = 20.0
    disjoint_coefficient: float = 1.0
    excess_coefficient: float = 1.0
    weight_difference_coefficient: float = 0.8
    survival_threshold: float = 0.2
    mutate_add_node_prob: float = 0.2
    mutate_add_link_prob: float = 0.2
    mutate_link_weights_prob: float = 0.8
    mutate_demolish_link_prob: float = 0.04
    mutate_only_prob: float = 0.5
    mutation_power: float = 2.0
    dropoff_age: int = 10
    age_significance: float = 1.2
    force_copy_champion: bool = True
    smallest_species_elitism: int = 1
    activation_set: tuple = ("sigmoid", "gaussian", "sine", "linear")
    squash: str = "sigmoid"

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        for name in ("survival_threshold", "mutate_add_node_prob",
                     "mutate_add_link_prob", "mutate_link_weights_prob",
                     "mutate_demolish_link_prob", "mutate_only_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


class InnovationRegistry:
    """Global innovation counter with per-generation structural memoization.

    Identical structural changes made within the same generation receive
    the same innovation numbers (and, for node splits, the same node id).
    """

    def __init__(self):
        self.next_innovation = 0
        self.next_node_id = FIRST_HIDDEN_ID
        self._link_memo: dict = {}
        self._split_memo: dict = {}

    def new_generation(self) -> None:
        self._link_memo.clear()
        self._split_memo.clear()

    def _fresh(self) -> int:
        innov = self.next_innovation
        self.next_innovation += 1
        return innov

    def link(self, src: int, dst: int) -> int:
        key = (src, dst)
        if key not in self._link_memo:
            self._link_memo[key] = self._fresh()
        return self._link_memo[key]

    def split(self, src: int, dst: int) -> tuple:
        """(new node id, in-link innovation, out-link innovation, bias innovation)."""
        key = (src, dst)
        if key not in self._split_memo:
            node_id = self.next_node_id
            self.next_node_id += 1
            self._split_memo[key] = (node_id, self._fresh(), self._fresh(),
                                     self._fresh())
        return self._split_memo[key]


def initial_genome(rng: random.Random, config: NeatConfig,
                   registry: InnovationRegistry) -> Genome:
    """Minimal genome: inputs and bias fully connected to both outputs."""
    nodes = [NodeGene(i, INPUT_KIND, "linear") for i in range(NUM_INPUTS)]
    nodes.append(NodeGene(BIAS_ID, BIAS_KIND, "linear"))
    nodes.extend(NodeGene(o, OUTPUT_KIND, "linear") for o in OUTPUT_IDS)
    links = []
    for src in list(range(NUM_INPUTS)) + [BIAS_ID]:
        for dst in OUTPUT_IDS:
            weight = rng.uniform(-config.mutation_power, config.mutation_power)
            links.append(LinkGene(registry.link(src, dst), src, dst, weight))
    return Genome(nodes, links)


def compatibility(a: Genome, b: Genome, config: NeatConfig) -> float:
    """Raw-count gene distance: c_e * excess + c_d * disjoint + c_w * mean |dw|."""
    ia, ib = set(a.links), set(b.links)
    if not ia and not ib:
        return 0.0
    max_a = max(ia) if ia else -1
    max_b = max(ib) if ib else -1
    cutoff = min(max_a, max_b)
    matching = ia & ib
    excess = sum(1 for i in ia ^ ib if i > cutoff)
    disjoint = len(ia ^ ib) - excess
    if matching:
        wbar = sum(abs(a.links[i].weight - b.links[i].weight)
                   for i in matching) / len(matching)
    else:
        wbar = 0.0
    return (config.excess_coefficient * excess
            + config.disjoint_coefficient * disjoint
            + config.weight_difference_coefficient * wbar)


def _creates_cycle(links, src: int, dst: int) -> bool:
    """Would adding src->dst close a cycle? Considers all genes, enabled or not."""
    if src == dst:
        return True
    out: dict = {}
    for l in links:
        out.setdefault(l.src, []).append(l.dst)
    stack, seen = [dst], set()
    while stack:
        nid = stack.pop()
        if nid == src:
            return True
        if nid in seen:
            continue
        seen.add(nid)
        stack.extend(out.get(nid, ()))
    return False


def mutate(genome: Genome, rng: random.Random, config: NeatConfig,
           registry: InnovationRegistry) -> Genome:
    nodes = dict(genome.nodes)
    links = dict(genome.links)

    if rng.random() < config.mutate_add_node_prob:
        enabled = [l for l in links.values() if l.enabled]
        if enabled:
            old = rng.choice(sorted(enabled, key=lambda l: l.innovation))
            node_id, in_innov, out_innov, bias_innov = registry.split(old.src, old.dst)
            if node_id not in nodes:
                links[old.innovation] = replace(old, enabled=False)
                nodes[node_id] = NodeGene(node_id, HIDDEN_KIND,
                                          rng.choice(config.activation_set))
                links[in_innov] = LinkGene(in_innov, old.src, node_id, 1.0)
                links[out_innov] = LinkGene(out_innov, node_id, old.dst, old.weight)
                if old.src != BIAS_ID:
                    # new hidden nodes also get a (neutral) bias connection
                    links[bias_innov] = LinkGene(bias_innov, BIAS_ID, node_id, 0.0)

    if rng.random() < config.mutate_add_link_prob:
        sources = [n.id for n in nodes.values() if n.kind != OUTPUT_KIND]
        dests = [n.id for n in nodes.values()
                 if n.kind in (HIDDEN_KIND, OUTPUT_KIND)]
        existing = {(l.src, l.dst) for l in links.values()}
        for _ in range(20):
            src = rng.choice(sources)
            dst = rng.choice(dests)
            if (src, dst) in existing or _creates_cycle(links.values(), src, dst):
                continue
            innov = registry.link(src, dst)
            links[innov] = LinkGene(innov, src, dst,
                                    rng.uniform(-config.mutation_power,
                                                config.mutation_power))
            break

    if rng.random() < config.mutate_demolish_link_prob and links:
        victim = rng.choice(sorted(links))
        del links[victim]

    if rng.random() < config.mutate_link_weights_prob:
        for innov in sorted(links):
            l = links[innov]
            delta = rng.uniform(-config.mutation_power, config.mutation_power)
            links[innov] = replace(l, weight=l.weight + delta)

    return Genome(list(nodes.values()), list(links.values()))


def crossover(a: Genome, fitness_a: float, b: Genome, fitness_b: float,
              rng: random.Random) -> Genome:
    """Align link genes by innovation; matching genes come from a random
    parent, disjoint and excess genes from the fitter one (ties favor a)."""
    if fitness_b > fitness_a:
        a, b = b, a
    chosen = []
    for innov in sorted(set(a.links) | set(b.links)):
        in_a, in_b = innov in a.links, innov in b.links
        if in_a and in_b:
            chosen.append((a.links if rng.random() < 0.5 else b.links)[innov])
        elif in_a:
            chosen.append(a.links[innov])
    nodes = dict(a.nodes)
    for l in chosen:
        for nid in (l.src, l.dst):
            if nid not in nodes:
                nodes[nid] = b.nodes[nid]
    # mixing two acyclic parents can close a loop; drop offending genes
    links = []
    for l in chosen:
        if not _creates_cycle(links, l.src, l.dst):
            links.append(l)
    return Genome(list(nodes.values()), links)


class Species:
    _next_id = 0

    def __init__(self, representative: Genome):
        self.id = Species._next_id
        Species._next_id += 1
        self.representative = representative
        self.members: list = []            # (genome, raw fitness, adjusted)
        self.age = 0
        self.best_fitness = -math.inf
        self.gens_since_improvement = 0
        self.can_reproduce = True
        self.quota = 0

    def raw_fitnesses(self):
        return [f for _, f, _ in self.members]


def speciate(population, fitnesses, previous_species, config: NeatConfig):
    """Assign genomes to species and compute shared (adjusted) fitness."""
    if not population:
        raise ValueError("population must be nonempty")
    species = list(previous_species)
    for sp in species:
        sp.members = []
    for genome, fit in zip(population, fitnesses):
        for sp in species:
            if compatibility(genome, sp.representative, config) < \
                    config.compatibility_threshold:
                sp.members.append((genome, fit, 0.0))
                break
        else:
            sp = Species(genome)
            sp.members.append((genome, fit, 0.0))
            species.append(sp)
    species = [sp for sp in species if sp.members]

    for sp in species:
        sp.age += 1
        sp.representative = sp.members[0][0]
        best = max(f for _, f, _ in sp.members)
        if best > sp.best_fitness:
            sp.best_fitness = best
            sp.gens_since_improvement = 0
        else:
            sp.gens_since_improvement += 1
        sp.can_reproduce = sp.gens_since_improvement <= config.dropoff_age
        size = len(sp.members)
        boost = config.age_significance if sp.age <= config.dropoff_age else 1.0
        sp.members = [(g, f, f * boost / size) for g, f, _ in sp.members]

    if len(species) == 1 or not any(sp.can_reproduce for sp in species):
        for sp in species:
            sp.can_reproduce = True
    _assign_quotas(species, config.population_size)
    return species


def _assign_quotas(species, population_size: int) -> None:
    reproducers = [sp for sp in species if sp.can_reproduce]
    totals = [sum(adj for _, _, adj in sp.members) for sp in reproducers]
    grand = sum(totals)
    if grand <= 0:
        shares = [population_size / len(reproducers)] * len(reproducers)
    else:
        shares = [population_size * t / grand for t in totals]
    quotas = [int(s) for s in shares]
    remainders = [s - q for s, q in zip(shares, quotas)]
    shortfall = population_size - sum(quotas)
    for i in sorted(range(len(reproducers)),
                    key=lambda i: (-remainders[i], i))[:shortfall]:
        quotas[i] += 1
    for sp in species:
        sp.quota = 0
    for sp, q in zip(reproducers, quotas):
        sp.quota = q


def reproduce(species, registry: InnovationRegistry, rng: random.Random,
              config: NeatConfig):
    """Produce the next population; size is preserved exactly."""
    registry.new_generation()
    next_population = []
    for sp in species:
        quota = sp.quota
        if quota <= 0:
            continue
        members = sorted(sp.members, key=lambda m: -m[1])
        if (config.force_copy_champion and quota > 0
                and len(members) >= config.smallest_species_elitism):
            next_population.append(members[0][0])
            quota -= 1
        pool = members[:max(1, math.ceil(config.survival_threshold * len(members)))]
        for _ in range(quota):
            if len(pool) == 1 or rng.random() < config.mutate_only_prob:
                parent = rng.choice(pool)
                child = mutate(parent[0], rng, config, registry)
            else:
                pa, pb = rng.sample(pool, 2)
                child = crossover(pa[0], pa[1], pb[0], pb[1], rng)
                child = mutate(child, rng, config, registry)
            next_population.append(child)
    return next_population


@dataclass
class GenerationStats:
    generation: int
    max_fitness: float
    mean_fitness: float
    best_so_far: float
    num_species: int


@dataclass
class EvolutionResult:
    best_genome: Genome
    best_fitness: float
    history: list


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(
        1, dtype=np.uint64)[0] >> 1)


def evolve(environments, config: NeatConfig, master_seed: int,
           runs_per_eval: int = 8, checkpoint_path=None,
           checkpoint_interval: int = 0, stats_csv=None,
           progress=None) -> EvolutionResult:
    """Evolve strategy genomes; fitness is the mean evaluation score
    across the given environments.

    Each generation evaluates the whole population on a shared batch of
    landscape seeds (common random numbers) derived from the master seed,
    so the run is reproducible end to end.
    """
    if not environments:
        raise ValueError("need at least one environment")
    rng = random.Random(_derived_seed(master_seed, 0))
    registry = InnovationRegistry()
    population = [initial_genome(rng, config, registry)
                  for _ in range(config.population_size)]
    species: list = []
    history: list = []
    best_genome, best_fitness = None, -math.inf

    def eval_population(pop, generation):
        gen_envs = [replace(env, seed=_derived_seed(master_seed, 1, generation, ei))
                    for ei, env in enumerate(environments)]
        fits = []
        for genome in pop:
            strategy = decode_strategy(genome, squash=config.squash)
            score = sum(
                evaluate_strategy(strategy, env, runs_per_eval).mean
                for env in gen_envs) / len(gen_envs)
            fits.append(score)
        return fits

    fitnesses = eval_population(population, 0)
    for gen in range(config.generations + 1):
        gen_best = max(fitnesses)
        if gen_best > best_fitness:
            best_fitness = gen_best
            best_genome = population[fitnesses.index(gen_best)]
        history.append(GenerationStats(gen, gen_best,
                                       sum(fitnesses) / len(fitnesses),
                                       best_fitness, max(1, len(species))))
        if progress:
            progress(history[-1])
        if stats_csv:
            _append_stats(stats_csv, history[-1], header=gen == 0)
        if checkpoint_path and checkpoint_interval and \
                gen % checkpoint_interval == 0:
            save_checkpoint(checkpoint_path, population, registry, rng, gen,
                            history)
        if gen == config.generations:
            break
        species = speciate(population, fitnesses, species, config)
        population = reproduce(species, registry, rng, config)
        fitnesses = eval_population(population, gen + 1)
    return EvolutionResult(best_genome, best_fitness, history)


def _append_stats(path, stats: GenerationStats, header: bool) -> None:
    with open(path, "a", newline="") as f:
        w = csv.writer(f)
        if header:
            w.writerow(["generation", "max_fitness", "mean_fitness",
                        "best_so_far", "num_species"])
        w.writerow([stats.generation, repr(stats.max_fitness),
                    repr(stats.mean_fitness), repr(stats.best_so_far),
                    stats.num_species])


def save_checkpoint(path, population, registry, rng, generation, history) -> None:
    with open(path, "wb") as f:
        pickle.dump({"population": population, "registry": registry,
                     "rng_state": rng.getstate(), "generation": generation,
                     "history": history}, f)


def load_checkpoint(path) -> dict:
    with open(path, "rb") as f:
        return pickle.load(f)
