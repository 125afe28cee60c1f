"""End-to-end MIMO-MC-CDMA link and the Monte-Carlo BER engine.

One trial carries ``frame_bits`` information bits through

    conv encode -> PN spread -> constellation map -> OFDM grid ->
    Alamouti per subcarrier over OFDM symbol pairs -> IDFT + CP ->
    block Rayleigh channel + AWGN -> CP removal + DFT -> ZF combine ->
    demap -> despread -> Viterbi

Fading is flat per subcarrier and quasi-static over every Alamouti block.
With ``fading="frame"`` (default) one 3x2 matrix holds for the whole frame and
frames fade independently; ``fading="block"`` redraws it independently for
every (subcarrier, OFDM symbol pair).  Trials are independent given
``(seed, trial_index)``, so any batching or worker count yields the same counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import Rng, SnrPoint, awgn_add, rayleigh_draw
from .fec import ConvCode, conv_encode, viterbi_decode
from .modem import ModScheme, canonical_name, demodulate, get_scheme, modulate
from .ofdm import OfdmParams, dft, idft, ofdm_demodulate, ofdm_modulate
from .spreading import PnCode, bits_to_chips, chips_to_bits, despread, spread
from .stbc import SINGULAR_GAIN, stbc_encode, zf_combine, zf_single

__all__ = [
    "LinkConfig",
    "BerRecord",
    "TrialBatch",
    "run_trials",
    "run_trial",
    "simulate_point",
    "run_sweep",
    "reference_chain",
    "rayleigh_ber_bpsk",
    "mrc_ber_bpsk",
    "CalibrationCheck",
    "calibration_checks",
    "gain_db",
]

ROUND_TRIALS = 16
PROFILES = {"desk": (64, 12), "paper": (6400, 1280)}


@dataclass(frozen=True)
class LinkConfig:
    """Every knob of the link; defaults are the desk-scale profile."""

    modulation: str = "QPSK"
    profile: str = "desk"
    subcarriers: int = 64
    cp_len: int = 12
    generators: tuple[int, int] = (0o15, 0o17)
    coding: bool = True
    pn_taps: int = 0o211
    pn_seed: int = 1
    spreading_factor: int = 8
    spreading: bool = True
    users: int = 1
    co_user_backoff_db: float = 20.0
    tx_antennas: int = 2
    rx_antennas: int = 3
    channel: str = "rayleigh"
    fading: str = "frame"
    snr_start_db: float = -10.0
    snr_stop_db: float = 20.0
    snr_step_db: float = 1.0
    frame_bits: int = 1024
    max_bits: int = 10_000_000
    target_errors: int = 200
    min_trials: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "modulation", canonical_name(self.modulation))
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {sorted(PROFILES)}")
        # component invariants raise on construction
        _ = (self.code, self.pn, self.ofdm)
        if self.tx_antennas not in (1, 2):
            raise ValueError("tx_antennas must be 1 or 2")
        if not 1 <= self.rx_antennas <= 4:
            raise ValueError("rx_antennas must be in 1..4")
        if self.channel not in ("rayleigh", "none"):
            raise ValueError("channel must be 'rayleigh' or 'none'")
        if self.fading not in ("block", "frame"):
            raise ValueError("fading must be 'block' or 'frame'")
        if self.users < 1:
            raise ValueError("users must be >= 1")
        if self.frame_bits < 1:
            raise ValueError("frame_bits must be >= 1")
        if self.max_bits < 10_000:
            raise ValueError("max_bits must be >= 10000")
        if self.target_errors < 1:
            raise ValueError("target_errors must be >= 1")
        if self.min_trials < 1:
            raise ValueError("min_trials must be >= 1")
        if self.snr_stop_db < self.snr_start_db:
            raise ValueError("snr_stop_db must be >= snr_start_db")
        if self.snr_step_db <= 0 and self.snr_stop_db != self.snr_start_db:
            raise ValueError("snr_step_db must be > 0")
        if self.users > 1:
            # co-users must not move a noiseless point out of its decision region
            sch = self.scheme
            worst = (self.users - 1) * self.co_user_amplitude * np.abs(sch.points).max()
            if worst >= sch.min_distance / 2:
                raise ValueError(
                    f"co_user_backoff_db={self.co_user_backoff_db} too small for "
                    f"{self.users} users on {sch.name}"
                )

    @property
    def scheme(self) -> ModScheme:
        return get_scheme(self.modulation)

    @property
    def code(self) -> ConvCode:
        memory = max(g.bit_length() for g in self.generators) - 1
        return ConvCode(tuple(self.generators), memory)

    @property
    def pn(self) -> PnCode:
        return PnCode(self.pn_taps, self.pn_seed, self.spreading_factor)

    @property
    def ofdm(self) -> OfdmParams:
        return OfdmParams(self.subcarriers, self.cp_len)

    @property
    def co_user_amplitude(self) -> float:
        return 10.0 ** (-self.co_user_backoff_db / 20.0)

    @property
    def code_rate(self) -> float:
        return 0.5 if self.coding else 1.0

    @property
    def chips_per_bit(self) -> int:
        return self.spreading_factor if self.spreading else 1

    def snr_grid(self) -> list[float]:
        if self.snr_stop_db == self.snr_start_db:
            return [float(self.snr_start_db)]
        n = int(math.floor((self.snr_stop_db - self.snr_start_db) / self.snr_step_db + 1e-9)) + 1
        return [round(self.snr_start_db + i * self.snr_step_db, 9) for i in range(n)]

    def eb_n0_db(self, snr_db: float) -> float:
        return SnrPoint(snr_db).eb_n0_db(self.scheme.bits_per_symbol, self.code_rate, self.chips_per_bit)

    def replace(self, **changes) -> "LinkConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class BerRecord:
    modulation: str
    snr_db: float
    eb_n0_db: float
    bits_simulated: int
    bit_errors: int
    trials: int
    resampled: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.bits_simulated <= 0:
            raise ValueError("bits_simulated must be positive")
        if not 0 <= self.bit_errors <= self.bits_simulated:
            raise ValueError("bit_errors out of range")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_simulated

    @property
    def std_error(self) -> float:
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.bits_simulated)


@dataclass
class TrialBatch:
    """Per-trial counts for a contiguous run of trial indices."""

    bits: np.ndarray
    errors: np.ndarray
    resampled: int = 0


def _frame_layout(cfg: LinkConfig) -> tuple[int, int, int]:
    """(chip bits per frame, OFDM symbols per frame, zero pad bits)."""
    coded = 2 * (cfg.frame_bits + cfg.code.memory) if cfg.coding else cfg.frame_bits
    chip_bits = coded * cfg.chips_per_bit
    bps = cfg.scheme.bits_per_symbol
    n_sc = cfg.subcarriers
    n_symbols = -(-chip_bits // bps)
    n_ofdm = -(-n_symbols // n_sc)
    n_ofdm += n_ofdm % 2  # fading blocks and Alamouti both span symbol pairs
    return chip_bits, n_ofdm, n_ofdm * n_sc * bps - chip_bits


def _transmit_symbols(cfg: LinkConfig, info: np.ndarray, user: int, n_ofdm: int, pad: int) -> np.ndarray:
    bits = conv_encode(info, cfg.code) if cfg.coding else info
    if cfg.spreading:
        bits = chips_to_bits(spread(bits, cfg.pn.for_user(user)))
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), dtype=np.int8)], axis=-1)
    return modulate(bits, cfg.scheme).reshape(info.shape[0], n_ofdm, cfg.subcarriers)


def _draw_fading(cfg: LinkConfig, rng: Rng, trial: int, n_pairs: int) -> tuple[np.ndarray, int]:
    shape = (n_pairs, cfg.subcarriers)
    if cfg.channel == "none":
        return np.broadcast_to(np.eye(cfg.rx_antennas, cfg.tx_antennas), shape + (cfg.rx_antennas, cfg.tx_antennas)), 0
    gen = rng.stream(trial, "fading")
    if cfg.fading == "frame":
        H = np.broadcast_to(rayleigh_draw(gen, (), cfg.rx_antennas, cfg.tx_antennas), shape + (cfg.rx_antennas, cfg.tx_antennas)).copy()
    else:
        H = rayleigh_draw(gen, shape, cfg.rx_antennas, cfg.tx_antennas)
    resampled = 0
    attempt = 0
    while True:
        bad = np.sum(np.abs(H) ** 2, axis=(-2, -1)) < SINGULAR_GAIN
        if not bad.any():
            return H, resampled
        attempt += 1
        resampled += int(bad.sum())
        H[bad] = rayleigh_draw(rng.stream(trial, "resample", attempt), int(bad.sum()), cfg.rx_antennas, cfg.tx_antennas)


def _apply_channel(tx_time: np.ndarray, H: np.ndarray, p: OfdmParams) -> np.ndarray:
    """Per-subcarrier flat fading realised as circular convolution on each OFDM symbol.

    ``tx_time`` is ``(B, tx, n_ofdm, N + cp)``; ``H`` is ``(B, pairs, N, rx, tx)``.
    """
    freq = dft(tx_time[..., p.cp_len :])  # (B, tx, n_ofdm, N)
    B, n_tx, n_ofdm, n = freq.shape
    freq = freq.reshape(B, n_tx, n_ofdm // 2, 2, n)
    # H[b, p, k, m, t] -> (b, m, t, p, 1, k) to broadcast over both symbols of a pair
    gains = np.moveaxis(H, (3, 4), (1, 2))[:, :, :, :, None, :]
    rx_freq = (gains * freq[:, None]).sum(axis=2).reshape(B, H.shape[-2], n_ofdm, n)
    body = idft(rx_freq)
    return np.concatenate([body[..., -p.cp_len :], body], axis=-1)


def run_trials(cfg: LinkConfig, snr: SnrPoint | float, trial_indices) -> TrialBatch:
    """Simulate the given trials and return per-trial information-bit and error counts."""
    snr = snr if isinstance(snr, SnrPoint) else SnrPoint(float(snr))
    trials = [int(t) for t in trial_indices]
    B = len(trials)
    if B == 0:
        return TrialBatch(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    rng = Rng(cfg.seed)
    p = cfg.ofdm
    chip_bits, n_ofdm, pad = _frame_layout(cfg)
    n_pairs = n_ofdm // 2

    info = np.stack([rng.stream(t, "bits").integers(0, 2, cfg.frame_bits, dtype=np.int8) for t in trials])
    X = _transmit_symbols(cfg, info, 0, n_ofdm, pad)
    if cfg.users > 1:
        amp = cfg.co_user_amplitude
        for u in range(1, cfg.users):
            co_info = np.stack(
                [rng.stream(t, "co_users", u).integers(0, 2, cfg.frame_bits, dtype=np.int8) for t in trials]
            )
            X = X + amp * _transmit_symbols(cfg, co_info, u, n_ofdm, pad)

    if cfg.tx_antennas == 2:
        block = stbc_encode(X[:, 0::2, :], X[:, 1::2, :])  # (B, pairs, N, slot, ant)
        F = np.moveaxis(block, (-1, -2), (1, 3)).reshape(B, 2, n_ofdm, p.n_subcarriers)
    else:
        F = X[:, None, :, :]
    tx_time = ofdm_modulate(F, p)

    fading = [_draw_fading(cfg, rng, t, n_pairs) for t in trials]
    H = np.stack([h for h, _ in fading])
    resampled = sum(r for _, r in fading)

    rx_time = _apply_channel(tx_time, H, p)
    if cfg.channel == "rayleigh" and not snr.noiseless:
        rx_time = np.stack([awgn_add(rx_time[i], snr, rng.stream(t, "noise")) for i, t in enumerate(trials)])
    Y = ofdm_demodulate(rx_time, p)  # (B, rx, n_ofdm, N)

    if cfg.tx_antennas == 2:
        y = Y.reshape(B, cfg.rx_antennas, n_pairs, 2, p.n_subcarriers)
        y = np.moveaxis(y, (1, 3), (-2, -1))  # (B, pairs, N, rx, slot)
        s1, s2, _ = zf_combine(y, H)
        X_hat = np.stack([s1, s2], axis=2).reshape(B, n_ofdm, p.n_subcarriers)
    else:
        y = np.moveaxis(Y, 1, -1)  # (B, n_ofdm, N, rx)
        h = np.repeat(H[..., 0], 2, axis=1)  # (B, n_ofdm, N, rx)
        X_hat, _ = zf_single(y, h)

    bits_hat = demodulate(X_hat.reshape(B, -1), cfg.scheme)[:, :chip_bits]
    if cfg.spreading:
        bits_hat = despread(bits_to_chips(bits_hat), cfg.pn)
    if cfg.coding:
        bits_hat = viterbi_decode(bits_hat, cfg.code)
    errors = np.count_nonzero(bits_hat != info, axis=1).astype(np.int64)
    return TrialBatch(np.full(B, cfg.frame_bits, dtype=np.int64), errors, resampled)


def run_trial(cfg: LinkConfig, snr: SnrPoint | float, trial_index: int) -> tuple[int, int]:
    batch = run_trials(cfg, snr, [trial_index])
    return int(batch.bits[0]), int(batch.errors[0])


def _run_round(cfg: LinkConfig, snr: SnrPoint, start: int, pool: ThreadPoolExecutor | None, workers: int) -> TrialBatch:
    indices = np.arange(start, start + ROUND_TRIALS)
    if pool is None or workers <= 1:
        return run_trials(cfg, snr, indices)
    parts = [part for part in np.array_split(indices, workers) if part.size]
    done = list(pool.map(lambda part: run_trials(cfg, snr, part), parts))
    return TrialBatch(
        np.concatenate([d.bits for d in done]),
        np.concatenate([d.errors for d in done]),
        sum(d.resampled for d in done),
    )


def simulate_point(cfg: LinkConfig, snr_db: float, threads: int = 1, pool: ThreadPoolExecutor | None = None) -> BerRecord:
    """Accumulate trials in index order until enough errors or ``max_bits`` bits.

    "Enough errors" means ``target_errors`` errors over at least
    ``min_trials`` trials; with frame-coherent fading one bad frame can carry
    hundreds of errors, and the floor keeps such a point from stopping early.
    The stop is decided per trial on the cumulative counts, so the result
    does not depend on how rounds are split across workers.
    """
    snr = SnrPoint(float(snr_db))
    bits = errors = trials = resampled = 0
    start = 0
    own_pool = pool is None and threads > 1
    if own_pool:
        pool = ThreadPoolExecutor(max_workers=threads)
    try:
        while True:
            batch = _run_round(cfg, snr, start, pool, threads)
            cum_bits = bits + np.cumsum(batch.bits)
            cum_err = errors + np.cumsum(batch.errors)
            count = trials + np.arange(1, len(batch.bits) + 1)
            enough = (cum_err >= cfg.target_errors) & (count >= cfg.min_trials)
            hit = np.flatnonzero(enough | (cum_bits >= cfg.max_bits))
            take = int(hit[0]) + 1 if hit.size else len(batch.bits)
            bits = int(cum_bits[take - 1])
            errors = int(cum_err[take - 1])
            trials += take
            resampled += batch.resampled
            if hit.size:
                break
            start += ROUND_TRIALS
    finally:
        if own_pool:
            pool.shutdown()
    return BerRecord(cfg.modulation, float(snr_db), cfg.eb_n0_db(snr_db), bits, errors, trials, resampled)


def run_sweep(cfg: LinkConfig, threads: int = 1) -> list[BerRecord]:
    """One :class:`BerRecord` per SNR grid point, in grid order."""
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        return [simulate_point(cfg, s, threads, pool) for s in cfg.snr_grid()]
    finally:
        if pool is not None:
            pool.shutdown()


def reference_chain(
    cfg: LinkConfig,
    *,
    coding: bool = False,
    spreading: bool = False,
    tx_antennas: int = 1,
    rx_antennas: int = 1,
    channel: str | None = None,
    threads: int = 1,
) -> list[BerRecord]:
    """Sweep a reduced chain (blocks bypassed per flag) for closed-form calibration."""
    reduced = cfg.replace(
        coding=coding,
        spreading=spreading,
        tx_antennas=tx_antennas,
        rx_antennas=rx_antennas,
        users=1,
        channel=channel or cfg.channel,
    )
    return run_sweep(reduced, threads)


def rayleigh_ber_bpsk(gamma: float) -> float:
    """BPSK over flat Rayleigh fading at average SNR per bit ``gamma`` (linear)."""
    return 0.5 * (1.0 - math.sqrt(gamma / (1.0 + gamma)))


def mrc_ber_bpsk(gamma_branch: float, branches: int) -> float:
    """BPSK with ``branches``-fold maximal-ratio combining of i.i.d. Rayleigh branches."""
    mu = math.sqrt(gamma_branch / (1.0 + gamma_branch))
    lo, hi = (1.0 - mu) / 2.0, (1.0 + mu) / 2.0
    return lo**branches * sum(math.comb(branches - 1 + k, k) * hi**k for k in range(branches))


@dataclass(frozen=True)
class CalibrationCheck:
    name: str
    measured: float
    expected: float
    rel_tol: float
    bits: int

    @property
    def passed(self) -> bool:
        if self.expected == 0.0:
            return self.measured == 0.0
        return abs(self.measured - self.expected) <= self.rel_tol * self.expected


def calibration_checks(
    seed: int = 0,
    min_bits: int = 2_000_000,
    eb_n0_points=(0.0, 5.0, 10.0),
    threads: int = 1,
    rel_tol: float = 0.10,
) -> list[CalibrationCheck]:
    """Uncoded QPSK reference chains against closed-form Rayleigh BERs.

    Gray QPSK is two BPSK streams at half the symbol energy, so at a given
    Eb/N0 its BER equals the BPSK closed forms.  Alamouti 2x1 splits power
    across the two antennas, giving two MRC branches at Eb/N0 / 2 each.
    """
    base = LinkConfig(
        modulation="QPSK",
        fading="block",
        seed=seed,
        frame_bits=16384,
        max_bits=min_bits,
        target_errors=10**12,
    )
    es_offset = 10.0 * math.log10(2)
    checks = []
    for label, tx, closed in (
        ("SISO QPSK Rayleigh", 1, lambda g: rayleigh_ber_bpsk(g)),
        ("Alamouti 2x1 QPSK Rayleigh", 2, lambda g: mrc_ber_bpsk(g / 2.0, 2)),
    ):
        for eb in eb_n0_points:
            es = eb + es_offset
            cfg = base.replace(snr_start_db=es, snr_stop_db=es)
            (rec,) = reference_chain(cfg, tx_antennas=tx, rx_antennas=1, threads=threads)
            checks.append(CalibrationCheck(f"{label} Eb/N0={eb:g} dB", rec.ber, closed(10.0 ** (eb / 10.0)), rel_tol, rec.bits_simulated))
    bypass = base.replace(snr_start_db=0.0, snr_stop_db=0.0, max_bits=100_000)
    (rec,) = reference_chain(bypass, coding=True, spreading=True, tx_antennas=2, rx_antennas=3, channel="none", threads=threads)
    checks.append(CalibrationCheck("bypass (no channel)", rec.ber, 0.0, 0.0, rec.bits_simulated))
    return checks


def gain_db(ber_reference: float, ber: float) -> float:
    """BER improvement over a reference scheme, ``10 log10(ber_reference / ber)``."""
    if ber == 0.0:
        return math.inf
    return 10.0 * math.log10(ber_reference / ber)
