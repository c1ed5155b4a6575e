"""Aggregation of evolution runs: per-seed bests, band frequencies, summary.

All numbers here are pure functions of the per-generation JSONL logs;
nothing is re-evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .umda import GenerationLog


class ReportError(Exception):
    pass


@dataclass(frozen=True)
class RunSummary:
    per_seed_best: dict[int, tuple[tuple[int, ...], float, float]]  # seed -> (genome, val, test)
    band_frequencies: tuple[float, ...]
    mean_best: float
    std_best: float
    composition: tuple[int, ...]  # top-k most frequent bands, frequency-descending


def band_frequencies(genomes) -> np.ndarray:
    """Per-band selection frequency across a collection of genomes."""
    genomes = [tuple(g) for g in genomes]
    if not genomes:
        raise ReportError("no genomes to aggregate")
    return np.array(genomes, dtype=np.float64).mean(axis=0)


def best_of_run(logs: list[GenerationLog]) -> tuple[tuple[int, ...], float, float]:
    """Best (genome, val, test) over a run's generation log."""
    if not logs:
        raise ReportError("empty run log")
    best = max(
        logs,
        key=lambda log: (log.best_val, -sum(log.best_genome), tuple(-g for g in log.best_genome)),
    )
    return best.best_genome, best.best_val, best.best_test


def collect_best_genomes(runs: dict[int, list[GenerationLog]]) -> list[tuple[int, ...]]:
    """Per-generation best genomes across all runs, deduplicated per run."""
    out = []
    for seed in sorted(runs):
        seen = set()
        for log in runs[seed]:
            if log.best_genome not in seen:
                seen.add(log.best_genome)
                out.append(log.best_genome)
    return out


def top_bands(frequencies: np.ndarray, k: int = 3) -> tuple[int, ...]:
    """The k most frequent 1-based bands, frequency-descending (index asc on ties)."""
    order = sorted(range(len(frequencies)), key=lambda i: (-frequencies[i], i))
    return tuple(i + 1 for i in order[:k])


def summarize(runs: dict[int, list[GenerationLog]], top_k: int = 3) -> RunSummary:
    if not runs:
        raise ReportError("no completed evolution runs found")
    per_seed = {seed: best_of_run(logs) for seed, logs in runs.items()}
    bests = collect_best_genomes(runs)
    freqs = band_frequencies(bests)
    vals = np.array([v for _, v, _ in per_seed.values()])
    return RunSummary(
        per_seed_best=per_seed,
        band_frequencies=tuple(float(f) for f in freqs),
        mean_best=float(vals.mean()),
        std_best=float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
        composition=top_bands(freqs, top_k),
    )


def format_summary(summary: RunSummary) -> str:
    lines = ["Best individual per seed:"]
    for seed in sorted(summary.per_seed_best):
        genome, val, test = summary.per_seed_best[seed]
        bits = "".join(map(str, genome))
        lines.append(f"  seed {seed:>4}: {bits}  val={val:.4f}  test={test:.4f}")
    freq = "  ".join(
        f"b{i + 1}={f * 100:.1f}%" for i, f in enumerate(summary.band_frequencies)
    )
    lines.append(f"Band frequency among bests: {freq}")
    lines.append(f"Mean best fitness: {summary.mean_best:.4f}")
    lines.append(f"Std best fitness:  {summary.std_best:.4f}")
    lines.append(
        "Suggested composition: " + ", ".join(str(b) for b in summary.composition)
    )
    return "\n".join(lines)
