"""PN chip generation and direct-sequence spreading of the coded bit stream.

The LFSR is described by its characteristic polynomial, written in octal like
generator polynomials: ``0o13`` is ``x^3 + x + 1``.  With degree ``m`` and
coefficients ``c_k`` the emitted bits obey

    a[n + m] = sum(c_k * a[n + k] for k in range(m))  (mod 2)

and the first ``m`` bits are the seed, LSB first.  A primitive polynomial gives
an m-sequence of period ``2**m - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "PnCode",
    "lfsr_bits",
    "pn_generate",
    "spread",
    "despread",
    "chips_to_bits",
    "bits_to_chips",
]

# chip offset between consecutive users sharing one LFSR
USER_CHIP_OFFSET = 41


@dataclass(frozen=True)
class PnCode:
    """Spreading code: one LFSR plus the per-user phase offset."""

    taps: int = 0o211  # x^7 + x^3 + 1, period 127
    seed: int = 1
    chips_per_bit: int = 8
    user_index: int = 0

    def __post_init__(self) -> None:
        if self.taps < 2 or not self.taps & 1:
            raise ValueError(f"feedback polynomial {self.taps:o} must have degree >= 1 and a constant term")
        if self.seed == 0:
            raise ValueError("degenerate LFSR seed")
        if not 0 < self.seed < (1 << self.degree):
            raise ValueError(f"seed must fit in {self.degree} bits")
        if self.chips_per_bit < 1:
            raise ValueError("chips_per_bit must be >= 1")
        if self.user_index < 0:
            raise ValueError("user_index must be >= 0")

    @property
    def degree(self) -> int:
        return self.taps.bit_length() - 1

    def for_user(self, user_index: int) -> "PnCode":
        return PnCode(self.taps, self.seed, self.chips_per_bit, user_index)


@lru_cache(maxsize=64)
def _lfsr_period_bits(taps: int, seed: int, n: int) -> np.ndarray:
    m = taps.bit_length() - 1
    coeffs = [k for k in range(m) if (taps >> k) & 1]
    a = np.empty(n + m, dtype=np.int8)
    for k in range(m):
        a[k] = (seed >> k) & 1
    for i in range(n):
        acc = 0
        for k in coeffs:
            acc ^= a[i + k]
        a[i + m] = acc
    a.setflags(write=False)
    return a


def lfsr_bits(taps: int, seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Return ``n`` LFSR output bits starting ``offset`` steps after the seed."""
    if seed == 0:
        raise ValueError("degenerate LFSR seed")
    m = taps.bit_length() - 1
    period = (1 << m) - 1
    # tile one period when the state recurs after 2**m - 1 steps, else step directly
    base = _lfsr_period_bits(taps, seed, period + m)
    if np.array_equal(base[period : period + m], base[:m]):
        idx = (offset + np.arange(n)) % period
        return base[idx]
    long = _lfsr_period_bits(taps, seed, offset + n)
    return long[offset : offset + n]


def pn_generate(code: PnCode, n_chips: int) -> np.ndarray:
    """Bipolar chip stream (0 -> +1, 1 -> -1) for ``code``."""
    if n_chips < 1:
        raise ValueError("n_chips must be >= 1")
    bits = lfsr_bits(code.taps, code.seed, n_chips, offset=code.user_index * USER_CHIP_OFFSET)
    return 1 - 2 * bits.astype(np.int8)


def bits_to_chips(bits) -> np.ndarray:
    return 1 - 2 * np.asarray(bits, dtype=np.int8)


def chips_to_bits(chips) -> np.ndarray:
    """Hard re-binarization: negative chip -> 1, otherwise 0."""
    return (np.asarray(chips) < 0).astype(np.int8)


def spread(bits, code: PnCode) -> np.ndarray:
    """Multiply each bipolar bit by the next ``chips_per_bit`` PN chips.

    The PN stream restarts at the code's phase for every call, so a frame's
    chips do not depend on previously spread frames.  Leading axes of a 2-D
    input are treated as independent frames.
    """
    b = np.asarray(bits, dtype=np.int8)
    if b.shape[-1] == 0:
        raise ValueError("empty bit stream")
    sf = code.chips_per_bit
    pn = pn_generate(code, b.shape[-1] * sf)
    chips = np.repeat(bits_to_chips(b), sf, axis=-1) * pn
    return chips.astype(np.int8)


def despread(chips, code: PnCode) -> np.ndarray:
    """Correlate each ``chips_per_bit`` window with the PN code.

    Works on soft (real-valued) chips as well as hard ones.  A correlation of
    exactly zero decodes to bit 0.
    """
    c = np.asarray(chips)
    sf = code.chips_per_bit
    if c.shape[-1] % sf:
        raise ValueError(f"chip count {c.shape[-1]} is not a multiple of {sf}")
    n_bits = c.shape[-1] // sf
    if n_bits == 0:
        raise ValueError("empty chip stream")
    pn = pn_generate(code, c.shape[-1])
    corr = (c * pn).reshape(c.shape[:-1] + (n_bits, sf)).sum(axis=-1)
    return (corr < 0).astype(np.int8)
