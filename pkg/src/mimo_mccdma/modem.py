"""Constellation tables and hard-decision mapping for the six supported schemes.

Bit groups are read MSB first: the first bit of each group is the MSB of the
label.  Square QAM uses separable Gray coding with the leading half of the
label on the in-phase axis; amplitude levels are indexed from the most
positive downward so label 0 always sits in the first quadrant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModScheme",
    "SCHEMES",
    "get_scheme",
    "canonical_name",
    "modulate",
    "demodulate",
    "pad_bits",
]


def _gray(i):
    return i ^ (i >> 1)


def _pam_levels(n_levels: int) -> np.ndarray:
    """Amplitude of Gray label ``g`` for a ``n_levels``-ary PAM axis, indexed by label."""
    amps = np.empty(n_levels)
    for idx in range(n_levels):
        amps[_gray(idx)] = (n_levels - 1) - 2 * idx
    return amps


def _rect_qam(i_bits: int, q_bits: int) -> np.ndarray:
    i_amp = _pam_levels(1 << i_bits)
    q_amp = _pam_levels(1 << q_bits)
    labels = np.arange(1 << (i_bits + q_bits))
    return i_amp[labels >> q_bits] + 1j * q_amp[labels & ((1 << q_bits) - 1)]


def _cross_qam32() -> np.ndarray:
    # start from Gray-labelled 8x4 rectangle, fold the |I| = 7 columns onto |Q| = 5 rows
    pts = _rect_qam(3, 2)
    folded = pts.copy()
    for k, p in enumerate(pts):
        if abs(p.real) == 7:
            new_i = np.sign(p.real) * (3 if abs(p.imag) == 1 else 1)
            folded[k] = new_i + 1j * 5 * np.sign(p.imag)
    return folded


def _psk8() -> np.ndarray:
    pts = np.empty(8, dtype=complex)
    for k in range(8):
        pts[_gray(k)] = np.exp(1j * np.pi * k / 4)
    return pts


@dataclass(frozen=True)
class ModScheme:
    """A labelled constellation; ``points[label]`` is the symbol for ``label``."""

    name: str
    points: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def bits_per_symbol(self) -> int:
        return int(self.order).bit_length() - 1

    @property
    def min_distance(self) -> float:
        d = np.abs(self.points[:, None] - self.points[None, :])
        return float(d[~np.eye(self.order, dtype=bool)].min())

    @property
    def labels(self) -> np.ndarray:
        """Label bits, one row per point, MSB first."""
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((np.arange(self.order)[:, None] >> shifts) & 1).astype(np.int8)


def _make(name: str, raw: np.ndarray) -> ModScheme:
    pts = raw / np.sqrt(np.mean(np.abs(raw) ** 2))
    pts.setflags(write=False)
    return ModScheme(name, pts)


SCHEMES: dict[str, ModScheme] = {
    s.name: s
    for s in (
        _make("QPSK", _rect_qam(1, 1)),
        _make("PSK8", _psk8()),
        _make("QAM8", _rect_qam(2, 1)),
        _make("QAM16", _rect_qam(2, 2)),
        _make("QAM32", _cross_qam32()),
        _make("QAM64", _rect_qam(3, 3)),
    )
}

_ALIASES = {
    "QPSK": "QPSK", "4QAM": "QPSK", "QAM4": "QPSK",
    "8PSK": "PSK8", "PSK8": "PSK8",
    "8QAM": "QAM8", "QAM8": "QAM8",
    "16QAM": "QAM16", "QAM16": "QAM16",
    "32QAM": "QAM32", "QAM32": "QAM32",
    "64QAM": "QAM64", "QAM64": "QAM64",
}


def canonical_name(name: str) -> str:
    """Map spellings such as ``"16-QAM"`` or ``"8 psk"`` to the table key."""
    key = "".join(ch for ch in name.upper() if ch.isalnum())
    try:
        return _ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown modulation {name!r}; choose from {sorted(SCHEMES)}") from None


def get_scheme(name: str | ModScheme) -> ModScheme:
    if isinstance(name, ModScheme):
        return name
    return SCHEMES[canonical_name(name)]


def pad_bits(bits, bits_per_symbol: int) -> tuple[np.ndarray, int]:
    """Zero-pad the last axis to a multiple of ``bits_per_symbol``; return (bits, pad)."""
    b = np.asarray(bits, dtype=np.int8)
    pad = -b.shape[-1] % bits_per_symbol
    if pad:
        b = np.concatenate([b, np.zeros(b.shape[:-1] + (pad,), dtype=np.int8)], axis=-1)
    return b, pad


def modulate(bits, scheme: str | ModScheme, pad: bool = False) -> np.ndarray:
    """Map consecutive bit groups to constellation points.

    With ``pad=False`` the bit count must already be a multiple of the
    symbol size; use :func:`pad_bits` to get the padding length explicitly.
    """
    sch = get_scheme(scheme)
    k = sch.bits_per_symbol
    b = np.asarray(bits, dtype=np.int8)
    if b.shape[-1] % k:
        if not pad:
            raise ValueError(f"{b.shape[-1]} bits do not fill whole {sch.name} symbols ({k} bits each)")
        b, _ = pad_bits(b, k)
    groups = b.reshape(b.shape[:-1] + (-1, k)).astype(np.intp)
    weights = 1 << np.arange(k - 1, -1, -1)
    return sch.points[groups @ weights]


def demodulate(symbols, scheme: str | ModScheme) -> np.ndarray:
    """Minimum-distance demapping; equidistant points resolve to the lowest label."""
    sch = get_scheme(scheme)
    s = np.asarray(symbols, dtype=complex)
    flat = s.reshape(-1)
    labels = np.empty(flat.shape, dtype=np.intp)
    # chunked to bound the (symbols x points) distance matrix
    step = max(1, (1 << 20) // sch.order)
    for lo in range(0, flat.size, step):
        d = np.abs(flat[lo : lo + step, None] - sch.points[None, :])
        labels[lo : lo + step] = np.argmin(d, axis=1)
    bits = sch.labels[labels]
    return bits.reshape(s.shape[:-1] + (s.shape[-1] * sch.bits_per_symbol,))
