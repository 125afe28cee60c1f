"""Rayleigh block fading, AWGN, SNR bookkeeping and reproducible random substreams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SnrPoint",
    "Rng",
    "rayleigh_draw",
    "awgn_add",
    "complex_gaussian",
    "TAGS",
]

# substream tags; values are part of the reproducibility contract
TAGS = {
    "bits": 1,
    "fading": 2,
    "noise": 3,
    "co_users": 4,
    "resample": 5,
}


@dataclass(frozen=True)
class SnrPoint:
    """Average received Es/N0 per receive antenna, in dB (``inf`` disables noise)."""

    snr_db: float

    def __post_init__(self) -> None:
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"invalid SNR {self.snr_db}")

    @property
    def noiseless(self) -> bool:
        return self.snr_db == math.inf

    @property
    def noise_var(self) -> float:
        """Complex noise variance for unit symbol energy."""
        return 0.0 if self.noiseless else 10.0 ** (-self.snr_db / 10.0)

    def eb_n0_db(self, bits_per_symbol: int, code_rate: float = 1.0, spreading_factor: int = 1) -> float:
        """Es/N0 converted to energy per information bit."""
        return self.snr_db - 10.0 * math.log10(bits_per_symbol * code_rate / spreading_factor)


@dataclass(frozen=True)
class Rng:
    """Counter-based substream factory.

    Every ``(master_seed, trial_index, tag)`` triple seeds its own PCG64
    generator through :class:`numpy.random.SeedSequence`, whose entropy
    mixing is the integer hash.  Nothing is shared between trials, so draw
    order and worker count cannot change any sample.
    """

    master_seed: int = 0

    def stream(self, trial_index: int, tag: str | int, *extra: int) -> np.random.Generator:
        code = TAGS[tag] if isinstance(tag, str) else int(tag)
        seq = np.random.SeedSequence([self.master_seed & (2**64 - 1), trial_index, code, *extra])
        return np.random.Generator(np.random.PCG64(seq))


def complex_gaussian(gen: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples of total variance ``var``."""
    z = gen.standard_normal(tuple(shape) + (2,))
    z *= math.sqrt(var / 2.0)
    return z.view(np.complex128)[..., 0]


def rayleigh_draw(gen: np.random.Generator, size=(), rx: int = 3, tx: int = 2) -> np.ndarray:
    """Draw ``size`` independent ``(rx, tx)`` matrices of unit-variance Rayleigh taps."""
    size = (size,) if isinstance(size, int) else tuple(size)
    return complex_gaussian(gen, size + (rx, tx))


def awgn_add(x, snr: SnrPoint, gen: np.random.Generator | None) -> np.ndarray:
    """Add complex white noise of variance ``snr.noise_var`` per sample (unit Es)."""
    x = np.asarray(x, dtype=complex)
    if snr.noiseless:
        return x.copy()
    if gen is None:
        raise ValueError("a generator is required for finite SNR")
    return x + complex_gaussian(gen, x.shape, snr.noise_var)
