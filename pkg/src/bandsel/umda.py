"""Univariate Marginal Distribution Algorithm over binary band-subset genomes.

Each generation: evaluate the population, keep the top-n parents, estimate
per-gene Bernoulli marginals from parent frequencies (clamped away from 0/1
to preserve exploration), sample offspring, and form the next population as
the union of parents and offspring. The best-ever individual by validation
fitness is returned together with a full per-generation log.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

GENOME_LENGTH = 7

# fitness_fn(genome) -> (validation_score, test_score)
FitnessFn = Callable[[tuple[int, ...]], tuple[float, float]]


class UmdaError(Exception):
    pass


@dataclass(frozen=True)
class Individual:
    genome: tuple[int, ...]
    fitness: float | None = None     # validation balanced accuracy
    test_score: float | None = None  # reporting only

    def __post_init__(self):
        if not any(self.genome):
            raise UmdaError("genome must have at least one active gene")
        if any(g not in (0, 1) for g in self.genome):
            raise UmdaError(f"genome genes must be 0/1, got {self.genome}")

    @property
    def active_bands(self) -> tuple[int, ...]:
        """1-based band indices present in the genome."""
        return tuple(i + 1 for i, g in enumerate(self.genome) if g)

    @property
    def bits(self) -> str:
        return "".join(str(g) for g in self.genome)


@dataclass(frozen=True)
class UmdaConfig:
    population_size: int = 10
    generations: int = 10
    parents: int = 5
    offspring: int = 5
    seed: int = 42
    clamp: tuple[float, float] = (0.05, 0.95)
    genome_length: int = GENOME_LENGTH

    def __post_init__(self):
        if self.parents + self.offspring != self.population_size:
            raise UmdaError(
                f"parents ({self.parents}) + offspring ({self.offspring}) must "
                f"equal population_size ({self.population_size})"
            )
        if self.parents < 1:
            raise UmdaError("parents must be >= 1")
        lo, hi = self.clamp
        if not 0.0 <= lo <= hi <= 1.0:
            raise UmdaError(f"invalid clamp bounds {self.clamp}")


@dataclass(frozen=True)
class GenerationLog:
    generation: int
    marginals: tuple[float, ...]
    parents: tuple[tuple[int, ...], ...]
    best_genome: tuple[int, ...]
    best_val: float
    best_test: float


def _sample_genome(probs: np.ndarray, rng: np.random.Generator) -> tuple[int, ...]:
    # Genes drawn in index order; all-zero genomes are resampled.
    while True:
        genome = tuple(int(rng.random() < p) for p in probs)
        if any(genome):
            return genome


def init_population(config: UmdaConfig, rng: np.random.Generator) -> list[Individual]:
    """population_size individuals with genes i.i.d. Bernoulli(0.5)."""
    probs = np.full(config.genome_length, 0.5)
    return [
        Individual(genome=_sample_genome(probs, rng))
        for _ in range(config.population_size)
    ]


def _sort_key(ind: Individual):
    # Fitness descending; ties prefer fewer active bands, then lexicographic genome.
    return (-ind.fitness, sum(ind.genome), ind.genome)


def select_parents(population: Sequence[Individual], n_parents: int) -> list[Individual]:
    """The n highest-fitness individuals under the deterministic tie rule."""
    for ind in population:
        if ind.fitness is None:
            raise UmdaError(f"individual {ind.bits} has no fitness")
    return sorted(population, key=_sort_key)[:n_parents]


def estimate_marginals(
    parents: Sequence[Individual], clamp: tuple[float, float] = (0.05, 0.95)
) -> np.ndarray:
    """Per-gene relative frequency among parents, clamped to [lo, hi]."""
    if not parents:
        raise UmdaError("need at least one parent")
    genomes = np.array([p.genome for p in parents], dtype=np.float64)
    raw = genomes.mean(axis=0)
    return np.clip(raw, clamp[0], clamp[1])


def sample_offspring(
    marginals: np.ndarray, count: int, rng: np.random.Generator
) -> list[Individual]:
    """`count` new individuals with genes i.i.d. Bernoulli(marginals)."""
    marginals = np.asarray(marginals, dtype=np.float64)
    if marginals.min() < 0 or marginals.max() > 1:
        raise UmdaError("marginals must lie in [0, 1]")
    return [Individual(genome=_sample_genome(marginals, rng)) for _ in range(count)]


def _evaluate(population: list[Individual], fitness_fn: FitnessFn) -> list[Individual]:
    out = []
    for ind in population:
        if ind.fitness is None:
            val, test = fitness_fn(ind.genome)
            ind = replace(ind, fitness=float(val), test_score=float(test))
        out.append(ind)
    return out


def evolve(
    config: UmdaConfig, fitness_fn: FitnessFn
) -> tuple[Individual, list[GenerationLog]]:
    """Run the full loop and return (best-ever individual, generation logs)."""
    rng = np.random.default_rng(config.seed)
    population = _evaluate(init_population(config, rng), fitness_fn)
    best = min(population, key=_sort_key)
    logs: list[GenerationLog] = []
    for gen in range(1, config.generations + 1):
        parents = select_parents(population, config.parents)
        marginals = estimate_marginals(parents, config.clamp)
        offspring = sample_offspring(marginals, config.offspring, rng)
        population = _evaluate(list(parents) + offspring, fitness_fn)
        gen_best = min(population, key=_sort_key)
        if _sort_key(gen_best) < _sort_key(best):
            best = gen_best
        logs.append(
            GenerationLog(
                generation=gen,
                marginals=tuple(float(m) for m in marginals),
                parents=tuple(p.genome for p in parents),
                best_genome=gen_best.genome,
                best_val=gen_best.fitness,
                best_test=gen_best.test_score,
            )
        )
    return best, logs


def all_genomes(genome_length: int = GENOME_LENGTH) -> list[tuple[int, ...]]:
    """All 2^L - 1 valid (non-empty) genomes in ascending binary order."""
    out = []
    for code in range(1, 2 ** genome_length):
        genome = tuple((code >> (genome_length - 1 - i)) & 1 for i in range(genome_length))
        out.append(genome)
    return out


def exhaustive_oracle(
    fitness_fn: FitnessFn, genome_length: int = GENOME_LENGTH
) -> list[Individual]:
    """Evaluate every valid genome once, ranked best-first with the tie rule."""
    evaluated = []
    for genome in all_genomes(genome_length):
        val, test = fitness_fn(genome)
        evaluated.append(
            Individual(genome=genome, fitness=float(val), test_score=float(test))
        )
    return sorted(evaluated, key=_sort_key)


def write_log_jsonl(logs: Sequence[GenerationLog], path: str | Path) -> None:
    """One JSON object per generation; stable field order for byte-level diffs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        for log in logs:
            f.write(
                json.dumps(
                    {
                        "gen": log.generation,
                        "marginals": list(log.marginals),
                        "parents": ["".join(map(str, p)) for p in log.parents],
                        "best_genome": "".join(map(str, log.best_genome)),
                        "best_val": log.best_val,
                        "best_test": log.best_test,
                    }
                )
                + "\n"
            )


def read_log_jsonl(path: str | Path) -> list[GenerationLog]:
    logs = []
    with Path(path).open() as f:
        for line in f:
            obj = json.loads(line)
            logs.append(
                GenerationLog(
                    generation=obj["gen"],
                    marginals=tuple(obj["marginals"]),
                    parents=tuple(tuple(int(c) for c in p) for p in obj["parents"]),
                    best_genome=tuple(int(c) for c in obj["best_genome"]),
                    best_val=obj["best_val"],
                    best_test=obj["best_test"],
                )
            )
    return logs
