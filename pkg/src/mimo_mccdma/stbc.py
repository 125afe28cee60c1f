"""Alamouti transmit diversity and zero-forcing combining.

Array layout used throughout: channel matrices are ``(..., rx, tx)`` and
received blocks are ``(..., rx, slot)``.  Both transmit antennas carry half
the symbol energy, so the block radiates ``|s1|^2 + |s2|^2`` in total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelRealization",
    "stbc_encode",
    "stacked_model",
    "zf_combine",
    "zf_single",
    "SingularChannelError",
]

SINGULAR_GAIN = 1e-12
_SPLIT = 1 / np.sqrt(2)


class SingularChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelRealization:
    """One quasi-static block: ``H`` is ``(rx, tx)``; ``noise_var`` per complex sample."""

    H: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self) -> None:
        if np.ndim(self.H) != 2:
            raise ValueError("H must be a 2-D (rx, tx) matrix")
        if self.noise_var < 0:
            raise ValueError("noise_var must be nonnegative")

    @property
    def gain(self) -> float:
        return float(np.sum(np.abs(self.H) ** 2))


def stbc_encode(s1, s2) -> np.ndarray:
    """Alamouti block ``(..., slot, antenna)``: slot 1 ``(s1, s2)``, slot 2 ``(-s2*, s1*)``."""
    s1 = np.asarray(s1, dtype=complex)
    s2 = np.asarray(s2, dtype=complex)
    tx = np.stack(
        [np.stack([s1, s2], axis=-1), np.stack([-np.conj(s2), np.conj(s1)], axis=-1)],
        axis=-2,
    )
    return tx * _SPLIT


def stacked_model(H) -> np.ndarray:
    """Effective ``(..., 2*rx, 2)`` matrix ``A`` with ``[y_slot1; conj(y_slot2)] = A @ [s1, s2]``.

    Rows for antenna ``m`` are ``[h_m1, h_m2] / sqrt(2)`` and
    ``[conj(h_m2), -conj(h_m1)] / sqrt(2)``.
    """
    H = np.asarray(H, dtype=complex)
    h1, h2 = H[..., 0], H[..., 1]
    first = np.stack([h1, h2], axis=-1)
    second = np.stack([np.conj(h2), -np.conj(h1)], axis=-1)
    return np.concatenate([first, second], axis=-2) * _SPLIT


def _as_matrix(h) -> np.ndarray:
    return np.asarray(h.H if isinstance(h, ChannelRealization) else h, dtype=complex)


def zf_combine(y, h) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero-forcing estimate of ``(s1, s2)`` from one Alamouti block per leading index.

    For the orthogonal stacked model ``A^H A = (||H||_F^2 / 2) I``, so the
    pseudo-inverse collapses to a scaled matched filter.  Returns
    ``(s1_hat, s2_hat, gain)`` with ``gain = ||H||_F^2``.
    """
    H = _as_matrix(h)
    y = np.asarray(y, dtype=complex)
    if H.shape[-1] != 2:
        raise ValueError("Alamouti combining needs a (rx, 2) channel")
    gain = np.sum(np.abs(H) ** 2, axis=(-2, -1))
    if np.any(gain < SINGULAR_GAIN):
        raise SingularChannelError("singular channel draw")
    h1, h2 = H[..., 0], H[..., 1]
    y1, y2c = y[..., 0], np.conj(y[..., 1])
    scale = np.sqrt(2) / gain
    s1 = scale * np.sum(np.conj(h1) * y1 + h2 * y2c, axis=-1)
    s2 = scale * np.sum(np.conj(h2) * y1 - h1 * y2c, axis=-1)
    return s1, s2, gain


def zf_single(y, h) -> tuple[np.ndarray, np.ndarray]:
    """Single transmit antenna: ``(h^H y) / ||h||^2`` per leading index.

    ``h`` and ``y`` are both ``(..., rx)``.
    """
    h = _as_matrix(h)
    y = np.asarray(y, dtype=complex)
    gain = np.sum(np.abs(h) ** 2, axis=-1)
    if np.any(gain < SINGULAR_GAIN):
        raise SingularChannelError("singular channel draw")
    return np.sum(np.conj(h) * y, axis=-1) / gain, gain
