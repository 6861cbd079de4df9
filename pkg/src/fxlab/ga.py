"""Genetic search over indicator feature sets.

A chromosome is a fixed number of slots; each slot is a gene carrying an
enabled bit, an indicator kind and three window parameters. The per-slot
state count (2 kinds-of-enabled x 6 kinds x 199^3 window triples) raised to
12 slots makes exhaustive search hopeless, which is the point of the GA.

The generation loop follows the classic recipe with two
diversity-preserving modifications:

- random immigrants: after the offspring are evaluated, the worst
  ceil(replacement_rate * N) individuals of the pool are swapped for fresh
  random ones;
- hyper-mutation: when the best fitness has not improved versus three
  generations earlier, the per-gene mutation rate is raised for that
  generation's offspring.

The single best individual ever seen is always carried into the next
population, so the max-fitness trace never decreases.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from .cv import DEFAULT_FOLDS, run_cv
from .errors import (
    DegenerateFitnessWarning,
    FoldTooSmall,
    InsufficientHistory,
    SingleClassData,
    SingleClassFold,
)
from .indicators import (
    WINDOW_MAX,
    WINDOW_MIN,
    IndicatorKind,
    IndicatorSpec,
    build_matrix,
)
from .timeseries import LabeledSeries

KINDS = tuple(IndicatorKind)
DEFAULT_SLOTS = 12


@dataclass(frozen=True)
class Gene:
    enabled: bool
    kind: IndicatorKind
    p1: int
    p2: int
    p3: int

    def repaired(self) -> "Gene":
        p1, p2 = self.p1, self.p2
        if self.kind is IndicatorKind.MACD and p1 >= p2:
            if p1 == p2:
                p1, p2 = (p1, p2 + 1) if p2 < WINDOW_MAX else (p1 - 1, p2)
            else:
                p1, p2 = p2, p1
            return replace(self, p1=p1, p2=p2)
        return self

    def to_spec(self) -> IndicatorSpec:
        return IndicatorSpec(self.kind, self.p1, self.p2, self.p3)


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[Gene, ...]

    def __post_init__(self):
        if not any(g.enabled for g in self.genes):
            raise ValueError("at least one gene must be enabled")
        for g in self.genes:
            for p in (g.p1, g.p2, g.p3):
                if not WINDOW_MIN <= p <= WINDOW_MAX:
                    raise ValueError(f"window {p} outside [{WINDOW_MIN}, {WINDOW_MAX}]")
            if g.kind is IndicatorKind.MACD and g.p1 >= g.p2:
                raise ValueError("MACD gene with fast >= slow")

    def specs(self) -> tuple[IndicatorSpec, ...]:
        return tuple(g.to_spec() for g in self.genes if g.enabled)

    def to_json(self) -> dict:
        return {
            "slots": [
                {"enabled": g.enabled, "kind": g.kind.value, "p1": g.p1, "p2": g.p2, "p3": g.p3}
                for g in self.genes
            ]
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Chromosome":
        return cls(
            tuple(
                Gene(bool(s["enabled"]), IndicatorKind(s["kind"]), int(s["p1"]), int(s["p2"]), int(s["p3"]))
                for s in doc["slots"]
            )
        )


def random_gene(rng: random.Random) -> Gene:
    return Gene(
        enabled=rng.random() < 0.5,
        kind=rng.choice(KINDS),
        p1=rng.randint(WINDOW_MIN, WINDOW_MAX),
        p2=rng.randint(WINDOW_MIN, WINDOW_MAX),
        p3=rng.randint(WINDOW_MIN, WINDOW_MAX),
    ).repaired()


def _assemble(genes: Sequence[Gene], rng: random.Random) -> Chromosome:
    """Repair gene-level and chromosome-level invariants, then construct."""
    genes = [g.repaired() for g in genes]
    if not any(g.enabled for g in genes):
        idx = rng.randrange(len(genes))
        genes[idx] = replace(genes[idx], enabled=True)
    return Chromosome(tuple(genes))


def random_chromosome(rng: random.Random, slots: int = DEFAULT_SLOTS) -> Chromosome:
    return _assemble([random_gene(rng) for _ in range(slots)], rng)


def baseline_chromosome(slots: int = DEFAULT_SLOTS, baseline_specs=None) -> Chromosome:
    """The literature-default feature set packed into a chromosome."""
    from .indicators import DEFAULT_SPECS

    specs = tuple(baseline_specs or DEFAULT_SPECS)
    if slots < len(specs):
        raise ValueError(f"{slots} slots cannot hold {len(specs)} baseline indicators")
    genes = [Gene(True, s.kind, s.p1, s.p2, s.p3) for s in specs]
    genes += [Gene(False, IndicatorKind.RSI, 14, 14, 14)] * (slots - len(specs))
    return Chromosome(tuple(genes))


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 64
    generations: int = 60
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    hyper_mutation_rate: float = 0.25
    replacement_rate: float = 0.1
    stagnation_window: int = 3
    slots: int = DEFAULT_SLOTS
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate", "hyper_mutation_rate", "replacement_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if self.replacement_rate * self.population_size < 1:
            raise ValueError("replacement_rate x population_size must be >= 1")
        if self.generations < 1 or self.slots < 1:
            raise ValueError("generations and slots must be >= 1")


@dataclass
class GaTrace:
    max_fitness: list[float] = field(default_factory=list)
    mean_fitness: list[float] = field(default_factory=list)
    min_fitness: list[float] = field(default_factory=list)
    best: list[Chromosome] = field(default_factory=list)
    hyper_mutation: list[bool] = field(default_factory=list)

    def record(self, fitnesses: Sequence[float], best: Chromosome, hyper: bool) -> None:
        self.max_fitness.append(max(fitnesses))
        self.mean_fitness.append(sum(fitnesses) / len(fitnesses))
        self.min_fitness.append(min(fitnesses))
        self.best.append(best)
        self.hyper_mutation.append(hyper)

    def generations(self) -> int:
        return len(self.max_fitness)

    def to_csv(self, header_lines: list[str] | None = None) -> str:
        lines = [f"# {h}" for h in (header_lines or [])]
        lines.append("generation,max_fitness,mean_fitness,min_fitness,hypermutation")
        for g in range(self.generations()):
            lines.append(
                f"{g},{repr(self.max_fitness[g])},{repr(self.mean_fitness[g])},"
                f"{repr(self.min_fitness[g])},{int(self.hyper_mutation[g])}"
            )
        return "\n".join(lines) + "\n"


FitnessFn = Callable[[Chromosome], float]


def make_cv_fitness(train: LabeledSeries, k: int = DEFAULT_FOLDS, acceptance: float = 0.5) -> FitnessFn:
    """Fitness = mean CV accuracy of the rejection classifier on the enabled
    indicator set; chromosomes the data cannot support score 0."""
    series = train.series
    labels = train.labels

    def fitness(chromosome: Chromosome) -> float:
        try:
            fm = build_matrix(series, chromosome.specs())
            X, y = fm.training_arrays(labels)
            report = run_cv(X, y, k=k, rejection=True, acceptance=acceptance)
        except (InsufficientHistory, SingleClassFold, SingleClassData, FoldTooSmall):
            return 0.0
        return report.mean_accuracy

    return fitness


def select(population: Sequence[Chromosome], fitnesses: Sequence[float], count: int, rng: random.Random) -> list[Chromosome]:
    """Fitness-proportional sampling with replacement; uniform when fitness
    carries no signal (all equal, or all zero)."""
    if any(f < 0 for f in fitnesses):
        raise ValueError("fitnesses must be non-negative")
    total = sum(fitnesses)
    if total == 0.0:
        warnings.warn("all-zero fitness; selecting uniformly", DegenerateFitnessWarning, stacklevel=2)
        return [population[rng.randrange(len(population))] for _ in range(count)]
    return rng.choices(list(population), weights=list(fitnesses), k=count)


def crossover(a: Chromosome, b: Chromosome, crossover_rate: float, rng: random.Random) -> tuple[Chromosome, Chromosome]:
    """Uniform per-slot exchange applied with probability crossover_rate."""
    if len(a.genes) != len(b.genes):
        raise ValueError("parents must have the same slot count")
    if rng.random() >= crossover_rate:
        return a, b
    left, right = [], []
    for ga_, gb in zip(a.genes, b.genes):
        if rng.random() < 0.5:
            ga_, gb = gb, ga_
        left.append(ga_)
        right.append(gb)
    return _assemble(left, rng), _assemble(right, rng)


def mutate(c: Chromosome, rate: float, rng: random.Random) -> Chromosome:
    """Resample each gene uniformly with probability `rate`, then repair."""
    genes = [random_gene(rng) if rng.random() < rate else g for g in c.genes]
    return _assemble(genes, rng)


def replace_worst_with_immigrants(
    pool: list[Chromosome],
    fitnesses: list[float],
    count: int,
    rng: random.Random,
    fitness_fn: FitnessFn,
    slots: int,
) -> list[int]:
    """Swap the `count` lowest-fitness individuals for fresh random ones,
    in place; the top individual is never displaced, so ties at a flat
    fitness level cannot evict the elite. Returns the replaced indices."""
    order = sorted(range(len(pool)), key=lambda i: (fitnesses[i], i))
    protected = max(range(len(pool)), key=lambda i: (fitnesses[i], -i))
    victims = [i for i in order if i != protected][:count]
    for i in victims:
        immigrant = random_chromosome(rng, slots)
        pool[i] = immigrant
        fitnesses[i] = fitness_fn(immigrant)
    return victims


def evolve(
    config: GaConfig,
    fitness_fn: FitnessFn,
    seed_individuals: Sequence[Chromosome] = (),
) -> tuple[Chromosome, GaTrace]:
    """Run the full generational loop and return the best chromosome seen.

    Each generation: roulette-select parents, cross over, mutate (at the
    hyper rate while the best fitness has not beaten its level of
    `stagnation_window` generations earlier), evaluate the offspring, merge
    them with the previous population keeping the fitter half (so survivors
    must outcompete offspring and the best individual is always retained),
    then swap the worst ceil(replacement_rate * N) for random immigrants.

    `seed_individuals` are injected into the initial population (replacing
    random ones), which is how the pipeline guarantees the optimized result
    can never score below the baseline feature set.
    """
    rng = random.Random(config.rng_seed)
    n = config.population_size

    population = [random_chromosome(rng, config.slots) for _ in range(n)]
    for i, seeded in enumerate(seed_individuals):
        if i >= n:
            break
        if len(seeded.genes) != config.slots:
            raise ValueError("seed individual has wrong slot count")
        population[i] = seeded
    fitnesses = [fitness_fn(c) for c in population]

    best_idx = max(range(n), key=lambda i: fitnesses[i])
    best_chromosome, best_fitness = population[best_idx], fitnesses[best_idx]

    trace = GaTrace()
    trace.record(fitnesses, best_chromosome, False)

    for gen in range(1, config.generations + 1):
        stale = (
            gen - 1 - config.stagnation_window >= 0
            and trace.max_fitness[gen - 1] <= trace.max_fitness[gen - 1 - config.stagnation_window]
        )
        rate = config.hyper_mutation_rate if stale else config.mutation_rate

        offspring: list[Chromosome] = []
        while len(offspring) < n:
            pa, pb = select(population, fitnesses, 2, rng)
            ca, cb = crossover(pa, pb, config.crossover_rate, rng)
            offspring.append(mutate(ca, rate, rng))
            if len(offspring) < n:
                offspring.append(mutate(cb, rate, rng))
        offspring_fitnesses = [fitness_fn(c) for c in offspring]

        candidates = population + offspring
        candidate_fitnesses = fitnesses + offspring_fitnesses
        order = sorted(range(2 * n), key=lambda i: (-candidate_fitnesses[i], i))
        pool = [candidates[i] for i in order[:n]]
        pool_fitnesses = [candidate_fitnesses[i] for i in order[:n]]

        immigrants = math.ceil(config.replacement_rate * n)
        replace_worst_with_immigrants(pool, pool_fitnesses, immigrants, rng, fitness_fn, config.slots)

        population, fitnesses = pool, pool_fitnesses
        gen_best = max(range(n), key=lambda i: fitnesses[i])
        if fitnesses[gen_best] > best_fitness:
            best_chromosome, best_fitness = population[gen_best], fitnesses[gen_best]
        trace.record(fitnesses, best_chromosome, stale)

    return best_chromosome, trace


def save_chromosome(c: Chromosome, path: str | Path) -> None:
    Path(path).write_text(json.dumps(c.to_json(), indent=2, sort_keys=True) + "\n")


def load_chromosome(path: str | Path) -> Chromosome:
    return Chromosome.from_json(json.loads(Path(path).read_text()))
