"""Unitary mixed-radix DFT and cyclic-prefix OFDM framing."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["OfdmParams", "dft", "idft", "naive_dft", "ofdm_modulate", "ofdm_demodulate"]


@dataclass(frozen=True)
class OfdmParams:
    n_subcarriers: int = 64
    cp_len: int = 12

    def __post_init__(self) -> None:
        if self.n_subcarriers < 2:
            raise ValueError("n_subcarriers must be >= 2")
        if not 0 < self.cp_len < self.n_subcarriers:
            raise ValueError("cp_len must be < subcarriers")

    @property
    def symbol_len(self) -> int:
        return self.n_subcarriers + self.cp_len


# sizes at or below this are transformed by a direct matrix product
_LEAF = 16


def _radix(n: int) -> int:
    if n % 4 == 0:
        return 4
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


@lru_cache(maxsize=None)
def _dft_matrix(p: int, sign: int) -> np.ndarray:
    k = np.arange(p)
    w = np.exp(sign * 2j * np.pi * np.outer(k, k) / p)
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _twiddles(n: int, p: int, sign: int) -> np.ndarray:
    m = n // p
    t = np.exp(sign * 2j * np.pi * np.outer(np.arange(p), np.arange(m)) / n)
    t.setflags(write=False)
    return t


def _butterfly(z: np.ndarray, p: int, sign: int) -> np.ndarray:
    """Length-``p`` DFT across axis -2 of ``z`` (shape ``(..., p, m)``)."""
    if p == 2:
        a, b = z[..., 0, :], z[..., 1, :]
        return np.stack([a + b, a - b], axis=-2)
    if p == 4:
        a, b, c, d = (z[..., i, :] for i in range(4))
        s0, s1 = a + c, a - c
        t0, t1 = b + d, (b - d) * (1j * sign)
        return np.stack([s0 + t0, s1 + t1, s0 - t0, s1 - t1], axis=-2)
    return _dft_matrix(p, sign) @ z


def _fft(x: np.ndarray, sign: int) -> np.ndarray:
    # decimation in time: n = p * m, p a small radix
    n = x.shape[-1]
    p = _radix(n)
    if n <= _LEAF or p == n:
        return x @ _dft_matrix(n, sign)
    m = n // p
    sub = np.swapaxes(x.reshape(x.shape[:-1] + (m, p)), -1, -2)  # sub[r, j] = x[j*p + r]
    inner = _fft(sub, sign) * _twiddles(n, p, sign)
    return _butterfly(inner, p, sign).reshape(x.shape)  # row q, column k holds X[q*m + k]


def dft(x, axis: int = -1) -> np.ndarray:
    """Unitary forward DFT, ``X[k] = sum(x[n] exp(-2j pi k n / N)) / sqrt(N)``."""
    a = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    n = a.shape[-1]
    if n == 0:
        raise ValueError("dft of a zero-length sequence")
    return np.moveaxis(_fft(a, -1) / np.sqrt(n), -1, axis)


def idft(x, axis: int = -1) -> np.ndarray:
    """Unitary inverse DFT."""
    a = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    n = a.shape[-1]
    if n == 0:
        raise ValueError("idft of a zero-length sequence")
    return np.moveaxis(_fft(a, 1) / np.sqrt(n), -1, axis)


def naive_dft(x) -> np.ndarray:
    """Direct O(N^2) unitary DFT, kept as a reference for the fast transform."""
    a = np.asarray(x, dtype=complex)
    n = a.shape[-1]
    k = np.arange(n)
    return a @ np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def ofdm_modulate(freq_symbols, p: OfdmParams) -> np.ndarray:
    """IDFT each block of ``n_subcarriers`` symbols and prepend the cyclic prefix.

    Leading axes are carried through, so a ``(..., n_symbols, N)`` grid becomes
    ``(..., n_symbols, N + cp)`` time samples.
    """
    x = np.asarray(freq_symbols, dtype=complex)
    if x.shape[-1] != p.n_subcarriers:
        raise ValueError(f"expected blocks of {p.n_subcarriers} symbols, got {x.shape[-1]}")
    body = idft(x)
    return np.concatenate([body[..., -p.cp_len :], body], axis=-1)


def ofdm_demodulate(samples, p: OfdmParams) -> np.ndarray:
    """Drop the cyclic prefix and DFT back to subcarrier symbols."""
    y = np.asarray(samples, dtype=complex)
    if y.shape[-1] != p.symbol_len:
        raise ValueError(f"expected {p.symbol_len} samples per OFDM symbol, got {y.shape[-1]}")
    return dft(y[..., p.cp_len :])
