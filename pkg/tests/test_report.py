import numpy as np
import pytest

from bandsel.report import (
    ReportError,
    band_frequencies,
    best_of_run,
    collect_best_genomes,
    format_summary,
    summarize,
    top_bands,
)
from bandsel.umda import GenerationLog


# 13 published best individuals (rows) over 7 bands; reference aggregation:
# frequencies 69.2, 23.1, 61.5, 61.5, 92.3, 92.3, 61.5 percent and band order
# 6, 5, 1 among the top three.
BEST_13 = [
    (1, 0, 1, 1, 1, 1, 0),
    (0, 1, 0, 1, 1, 1, 0),
    (1, 0, 1, 1, 1, 1, 1),
    (1, 0, 1, 0, 1, 1, 1),
    (0, 1, 1, 1, 1, 1, 1),
    (1, 0, 1, 1, 1, 1, 1),
    (0, 0, 1, 1, 1, 1, 0),
    (1, 0, 0, 0, 1, 1, 1),
    (1, 0, 0, 0, 1, 0, 1),
    (1, 0, 1, 1, 1, 1, 0),
    (0, 0, 0, 1, 1, 1, 1),
    (1, 0, 1, 0, 0, 1, 1),
    (1, 1, 0, 0, 1, 1, 0),
]


def log(gen, best_genome, best_val, best_test=0.0):
    return GenerationLog(
        generation=gen,
        marginals=(0.5,) * 7,
        parents=((1, 0, 0, 0, 0, 0, 0),) * 5,
        best_genome=best_genome,
        best_val=best_val,
        best_test=best_test,
    )


def test_band_frequencies_reference_table():
    freqs = band_frequencies(BEST_13)
    expected = np.array([9, 3, 8, 8, 12, 12, 8]) / 13
    assert np.allclose(freqs, expected)
    assert freqs[0] == pytest.approx(0.692, abs=5e-4)
    assert freqs[4] == pytest.approx(0.923, abs=5e-4)
    assert freqs[5] == pytest.approx(0.923, abs=5e-4)


def test_top_bands_reference_composition():
    freqs = band_frequencies(BEST_13)
    # Bands 5 and 6 tie at 12/13; index-ascending tie rule puts 5 first.
    assert top_bands(freqs, 3) == (5, 6, 1)
    assert set(top_bands(freqs, 3)) == {6, 5, 1}


def test_top_bands_full_order():
    freqs = band_frequencies(BEST_13)
    assert top_bands(freqs, 7) == (5, 6, 1, 3, 4, 7, 2)


def test_band_frequencies_empty_errors():
    with pytest.raises(ReportError):
        band_frequencies([])


def test_best_of_run_picks_max_val():
    logs = [
        log(1, (1, 0, 0, 0, 0, 0, 0), 0.7, 0.6),
        log(2, (0, 1, 0, 0, 0, 0, 0), 0.9, 0.8),
        log(3, (0, 0, 1, 0, 0, 0, 0), 0.8, 0.9),
    ]
    genome, val, test = best_of_run(logs)
    assert genome == (0, 1, 0, 0, 0, 0, 0)
    assert val == 0.9 and test == 0.8


def test_best_of_run_tie_prefers_fewer_bands():
    logs = [
        log(1, (1, 1, 0, 0, 0, 0, 0), 0.9),
        log(2, (0, 1, 0, 0, 0, 0, 0), 0.9),
    ]
    genome, _, _ = best_of_run(logs)
    assert genome == (0, 1, 0, 0, 0, 0, 0)


def test_best_of_run_empty_errors():
    with pytest.raises(ReportError):
        best_of_run([])


def test_collect_best_genomes_dedupes_within_run_only():
    g1 = (1, 0, 0, 0, 0, 0, 0)
    g2 = (0, 1, 0, 0, 0, 0, 0)
    runs = {
        1: [log(1, g1, 0.5), log(2, g1, 0.5), log(3, g2, 0.6)],
        10: [log(1, g1, 0.4)],
    }
    assert collect_best_genomes(runs) == [g1, g2, g1]


def test_summary_mean_and_sample_std():
    # Per-seed bests 91.50, 93.74, 92.67, 93.12, 93.24 -> mean 92.85 and
    # sample (n-1) standard deviation 0.85.
    vals = {1: 0.9150, 10: 0.9374, 20: 0.9267, 30: 0.9312, 42: 0.9424 - 0.01}
    runs = {seed: [log(1, (1, 0, 0, 0, 1, 1, 0), v)] for seed, v in vals.items()}
    s = summarize(runs)
    assert s.mean_best * 100 == pytest.approx(92.85, abs=5e-3)
    assert s.std_best * 100 == pytest.approx(0.85, abs=5e-3)


def test_summary_single_run_zero_std():
    runs = {42: [log(1, (1, 0, 0, 0, 0, 0, 0), 0.8, 0.7)]}
    s = summarize(runs)
    assert s.std_best == 0.0
    assert s.mean_best == 0.8
    assert s.per_seed_best[42] == ((1, 0, 0, 0, 0, 0, 0), 0.8, 0.7)


def test_summarize_empty_errors():
    with pytest.raises(ReportError):
        summarize({})


def test_format_summary_contents():
    runs = {
        1: [log(1, (0, 0, 0, 0, 1, 1, 0), 0.91, 0.90)],
        42: [log(1, (1, 0, 0, 0, 1, 1, 0), 0.93, 0.92)],
    }
    text = format_summary(summarize(runs))
    assert "seed    1: 0000110" in text
    assert "seed   42: 1000110" in text
    assert "b5=100.0%" in text
    assert "Suggested composition:" in text
