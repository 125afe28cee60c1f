"""Fast invariant checks behind ``mimo-mccdma selftest``."""

from __future__ import annotations

import itertools
import math
from typing import Callable

import numpy as np

from .fec import ConvCode, conv_encode, viterbi_decode
from .link import LinkConfig, run_trials
from .modem import SCHEMES, demodulate, modulate
from .ofdm import OfdmParams, dft, idft, naive_dft, ofdm_demodulate, ofdm_modulate
from .spreading import PnCode, despread, lfsr_bits, spread
from .stbc import stacked_model, stbc_encode, zf_combine


def _unit_energy() -> bool:
    return all(abs(np.mean(np.abs(s.points) ** 2) - 1.0) < 1e-12 for s in SCHEMES.values())


def _gray_square() -> bool:
    for name in ("QPSK", "QAM16", "QAM64"):
        s = SCHEMES[name]
        d = np.abs(s.points[:, None] - s.points[None, :])
        near = np.isclose(d, s.min_distance)
        for i, j in zip(*np.nonzero(near)):
            if bin(i ^ j).count("1") != 1:
                return False
    return True


def _modem_loopback() -> bool:
    rng = np.random.default_rng(1)
    for s in SCHEMES.values():
        bits = rng.integers(0, 2, 60 * s.bits_per_symbol)
        if not np.array_equal(demodulate(modulate(bits, s), s), bits):
            return False
    return True


def _dft_oracle() -> bool:
    rng = np.random.default_rng(2)
    for n in (8, 60, 64, 100, 256):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        if np.max(np.abs(dft(x) - naive_dft(x))) > 1e-9 or np.max(np.abs(idft(dft(x)) - x)) > 1e-10:
            return False
    return True


def _ofdm_cp() -> bool:
    p = OfdmParams(64, 12)
    rng = np.random.default_rng(3)
    s = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    t = ofdm_modulate(s, p)
    return np.array_equal(t[:12], t[-12:]) and np.allclose(ofdm_demodulate(t, p), s, atol=1e-10)


def _viterbi_ml() -> bool:
    code = ConvCode()
    msgs = np.array(list(itertools.product((0, 1), repeat=8)), dtype=np.int8)
    book = conv_encode(msgs, code)
    rng = np.random.default_rng(4)
    rx = book.copy()
    for row in rx:
        row[rng.choice(rx.shape[1], 2, replace=False)] ^= 1
    return np.array_equal(viterbi_decode(rx, code), msgs)


def _pn_balance() -> bool:
    bits = lfsr_bits(0o211, 1, 127)
    c = PnCode()
    b = np.random.default_rng(5).integers(0, 2, 40)
    return abs(int(bits.sum()) * 2 - 127) == 1 and np.array_equal(despread(spread(b, c), c), b)


def _alamouti_orthogonal() -> bool:
    rng = np.random.default_rng(6)
    H = (rng.standard_normal((200, 3, 2)) + 1j * rng.standard_normal((200, 3, 2))) / math.sqrt(2)
    A = stacked_model(H)
    gram = np.conj(np.swapaxes(A, -1, -2)) @ A
    gain = np.sum(np.abs(H) ** 2, axis=(-2, -1))
    if np.max(np.abs(gram - (gain / 2)[:, None, None] * np.eye(2))) > 1e-10:
        return False
    s = rng.standard_normal((200, 2)) + 1j * rng.standard_normal((200, 2))
    y = H @ np.swapaxes(stbc_encode(s[:, 0], s[:, 1]), -1, -2)  # (rx, slot)
    s1, s2, _ = zf_combine(y, H)
    return np.allclose(s1, s[:, 0], atol=1e-10) and np.allclose(s2, s[:, 1], atol=1e-10)


def _link_loopback() -> bool:
    for name in SCHEMES:
        cfg = LinkConfig(modulation=name, users=2)
        if run_trials(cfg, math.inf, [0]).errors.sum():
            return False
    return True


CHECKS: dict[str, Callable[[], bool]] = {
    "constellations have unit energy": _unit_energy,
    "square QAM labels are Gray": _gray_square,
    "modem loopback": _modem_loopback,
    "fast DFT matches direct DFT": _dft_oracle,
    "cyclic prefix and OFDM loopback": _ofdm_cp,
    "Viterbi corrects every 2-bit error (8-bit messages)": _viterbi_ml,
    "m-sequence balance and despread loopback": _pn_balance,
    "Alamouti orthogonality and ZF recovery": _alamouti_orthogonal,
    "noiseless link loopback, 2 users": _link_loopback,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        try:
            passed = bool(check())
        except Exception as exc:  # report and keep going
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
