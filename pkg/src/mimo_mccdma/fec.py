"""Rate-1/2 non-systematic convolutional code with hard-decision Viterbi decoding.

Register convention: the encoder state holds the last ``v`` input bits with the
most recent bit in the most significant position, so state ``0b110`` means the
two previous inputs were 1 and the one before that was 0.  The register window
seen by the generators is ``(d_i, d_{i-1}, ..., d_{i-v})`` with ``d_i`` as the
MSB, which is the usual octal generator convention (``15`` octal taps
``d_i, d_{i-1}, d_{i-3}``).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["ConvCode", "conv_encode", "viterbi_decode", "parse_generators"]


def _parity(x: int) -> int:
    return bin(x).count("1") & 1


def parse_generators(text: str) -> tuple[int, int]:
    """Parse ``"15,17"`` (octal) into a generator pair."""
    parts = [p.strip() for p in text.replace(" ", ",").split(",") if p.strip()]
    if len(parts) != 2:
        raise ValueError(f"expected two octal generators, got {text!r}")
    return int(parts[0], 8), int(parts[1], 8)


@dataclass(frozen=True)
class ConvCode:
    """Rate-1/2 feedforward convolutional code.

    Parameters
    ----------
    generators : pair of int
        Tap vectors as integers (write them in octal, e.g. ``0o15``).  Bit
        ``v`` is the tap on the current input, bit 0 the oldest register cell.
    memory : int
        Number of delay elements ``v``; constraint length is ``v + 1``.
    """

    generators: tuple[int, int] = (0o15, 0o17)
    memory: int = 3

    def __post_init__(self) -> None:
        if len(self.generators) != 2:
            raise ValueError("rate-1/2 code needs exactly 2 generators")
        if self.memory < 1:
            raise ValueError("memory must be >= 1")
        top = 1 << (self.memory + 1)
        for g in self.generators:
            if not 0 < g < top:
                raise ValueError(f"generator {g:o} does not fit constraint length {self.memory + 1}")
            if not g & 1:
                # lowest-order tap unused would shrink the effective memory
                raise ValueError(f"generator {g:o} has no tap on the oldest register cell")

    @classmethod
    def from_octal(cls, text: str) -> "ConvCode":
        g = parse_generators(text)
        memory = max(x.bit_length() for x in g) - 1
        return cls(generators=g, memory=memory)

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def octal(self) -> str:
        return ",".join(f"{g:o}" for g in self.generators)

    def next_state(self, state: int, bit: int) -> int:
        return (bit << (self.memory - 1)) | (state >> 1)

    def output(self, state: int, bit: int) -> tuple[int, int]:
        window = (bit << self.memory) | state
        return _parity(window & self.generators[0]), _parity(window & self.generators[1])

    @cached_property
    def _tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Predecessor table and branch outputs indexed by destination state.

        ``pred[s, j]`` is the j-th predecessor of state ``s`` (ascending), and
        ``out[s, j]`` the two code bits on that branch.  The input bit driving
        any transition into ``s`` is the MSB of ``s``.
        """
        n = self.n_states
        pred = np.empty((n, 2), dtype=np.intp)
        out = np.empty((n, 2, 2), dtype=np.int8)
        low_mask = (1 << (self.memory - 1)) - 1
        for s in range(n):
            bit = s >> (self.memory - 1)
            for j in (0, 1):
                p = ((s & low_mask) << 1) | j
                assert self.next_state(p, bit) == s
                pred[s, j] = p
                out[s, j] = self.output(p, bit)
        return pred, out, np.arange(n) >> (self.memory - 1)


def conv_encode(info, code: ConvCode = ConvCode()) -> np.ndarray:
    """Encode ``info`` and append ``v`` zero tail bits.

    Returns ``2 * (len(info) + v)`` bits, interleaved as ``(r1_0, r2_0, r1_1, ...)``.
    Accepts a 2-D array to encode several equal-length messages at once.
    """
    bits = np.asarray(info, dtype=np.int8)
    if bits.shape[-1] == 0:
        raise ValueError("empty message")
    v = code.memory
    tail = np.zeros(bits.shape[:-1] + (v,), dtype=np.int8)
    padded = np.concatenate([np.zeros_like(tail), bits, tail], axis=-1)
    n = bits.shape[-1] + v
    out = np.empty(bits.shape[:-1] + (n, 2), dtype=np.int8)
    for k, g in enumerate(code.generators):
        acc = np.zeros(bits.shape[:-1] + (n,), dtype=np.int8)
        for delay in range(v + 1):
            if (g >> (v - delay)) & 1:
                acc ^= padded[..., v - delay : v - delay + n]
        out[..., k] = acc
    return out.reshape(bits.shape[:-1] + (2 * n,))


def viterbi_decode(coded, code: ConvCode = ConvCode()) -> np.ndarray:
    """Hard-decision Viterbi decoding of a zero-terminated codeword.

    The survivor into each state keeps the lower-numbered predecessor when the
    two candidate metrics are equal.  A 2-D input decodes one codeword per row.
    """
    rx = np.asarray(coded, dtype=np.int8)
    squeeze = rx.ndim == 1
    if squeeze:
        rx = rx[None, :]
    if rx.shape[-1] % 2:
        raise ValueError("misaligned codeword")
    v = code.memory
    steps = rx.shape[-1] // 2
    if steps < v + 1:
        raise ValueError(f"codeword shorter than {2 * (v + 1)} bits")

    pred, out, _ = code._tables
    batch = rx.shape[0]
    n = code.n_states
    inf = np.int32(1 << 28)
    metric = np.full((batch, n), inf, dtype=np.int32)
    metric[:, 0] = 0
    pairs = rx.reshape(batch, steps, 2).astype(np.int32)
    out = out.astype(np.int32)
    decisions = np.empty((steps, batch, n), dtype=bool)
    p0, p1 = pred[:, 0], pred[:, 1]
    for t in range(steps):
        r = pairs[:, t, :]  # (batch, 2)
        # Hamming distance of each branch label to the received pair
        bm = (out[None, :, :, 0] ^ r[:, None, None, 0]) + (out[None, :, :, 1] ^ r[:, None, None, 1])
        m0 = metric[:, p0] + bm[:, :, 0]
        m1 = metric[:, p1] + bm[:, :, 1]
        choose1 = m1 < m0
        decisions[t] = choose1
        metric = np.where(choose1, m1, m0)

    # traceback from the all-zero state forced by the tail
    state = np.zeros(batch, dtype=np.intp)
    rows = np.arange(batch)
    msb = v - 1
    decoded = np.empty((batch, steps), dtype=np.int8)
    for t in range(steps - 1, -1, -1):
        decoded[:, t] = state >> msb
        j = decisions[t, rows, state]
        state = pred[state, j.astype(np.intp)]
    result = decoded[:, : steps - v]
    return result[0] if squeeze else result
