"""Synthetic test stems.

Real instrument stems are external assets, so tests and experiments run
on generated ones.  Each stem is a sum of sinusoids drawn from a shared
128-sample-period frequency grid, with the grid's odd multiples split
into three disjoint sets (one per stem).  Distinct grid frequencies are
exactly orthogonal over any span that is a whole number of periods, so
any analysis window that is a multiple of 128 samples (512, 4096, ...)
sees pairwise stem correlations at float round-off, far below the 0.01
bound the decoder relies on.  The loop length is also a multiple of the
period, so looping introduces no seam.
"""

from __future__ import annotations

import numpy as np

from .audio import AudioClip, StemBank

GRID_PERIOD = 128            # samples per cycle of the base grid frequency
_STEM_MULTIPLES = {
    "drums": (1, 7, 13),     # lowest band
    "strings": (3, 9, 15),   # mid band
    "others": (5, 11, 17),   # highest band
}
_PEAK_BUDGET = 0.3           # per-stem amplitude cap; 3 stems at gain <= 1 never clip


def _stem_samples(rng: np.random.Generator, multiples, n_samples: int) -> np.ndarray:
    t = np.arange(n_samples)
    amps = rng.uniform(0.5, 1.0, size=len(multiples))
    amps *= _PEAK_BUDGET / amps.sum()
    phases = rng.uniform(0.0, 2.0 * np.pi, size=len(multiples))
    out = np.zeros(n_samples)
    for j, amp, phase in zip(multiples, amps, phases):
        out += amp * np.sin(2.0 * np.pi * j * t / GRID_PERIOD + phase)
    return out


def generate_stems(seed: int, duration_seconds: float = 10.0,
                   sample_rate: int = 48000) -> StemBank:
    """Deterministic loop-aligned stem bank for one seed.

    The length is rounded down to a whole number of grid periods (at
    least one) so the loop is seamless.
    """
    n = max(GRID_PERIOD, (int(duration_seconds * sample_rate)
                          // GRID_PERIOD) * GRID_PERIOD)
    rng = np.random.default_rng(seed)
    clips = {name: AudioClip(sample_rate=sample_rate,
                             samples=_stem_samples(rng, mult, n))
             for name, mult in _STEM_MULTIPLES.items()}
    return StemBank(**clips)


def pairwise_correlations(stems: StemBank, start: int = 0,
                          length: int = 4096) -> list[float]:
    """Normalized correlations of the three stem pairs over one window."""
    segs = [clip.samples[start:start + length] for clip in stems.clips()]
    out = []
    for i in range(3):
        for j in range(i + 1, 3):
            a, b = segs[i], segs[j]
            denom = np.linalg.norm(a) * np.linalg.norm(b)
            out.append(float(np.dot(a, b) / denom))
    return out


def generate_verified_stems(seed: int, duration_seconds: float = 10.0,
                            sample_rate: int = 48000,
                            max_correlation: float = 0.01,
                            max_attempts: int = 16) -> tuple[StemBank, int]:
    """Generate stems and verify the correlation bound, bumping the seed
    until it holds.  Returns (stems, seed actually used); by construction
    the first attempt should always pass."""
    for attempt in range(max_attempts):
        used = seed + attempt
        stems = generate_stems(used, duration_seconds, sample_rate)
        worst = max(abs(c) for c in pairwise_correlations(stems))
        if worst < max_correlation:
            return stems, used
    raise RuntimeError(f"no stem set met the correlation bound after "
                       f"{max_attempts} seeds")
