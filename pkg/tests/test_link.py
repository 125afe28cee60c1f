import math

import numpy as np
import pytest

import mimo_mccdma.link as link
from mimo_mccdma.link import (
    BerRecord,
    LinkConfig,
    gain_db,
    mrc_ber_bpsk,
    rayleigh_ber_bpsk,
    run_sweep,
    run_trial,
    run_trials,
    simulate_point,
)
from mimo_mccdma.modem import SCHEMES

FAST = dict(max_bits=10_000, target_errors=1, min_trials=1)


@pytest.mark.parametrize("name", sorted(SCHEMES))
@pytest.mark.parametrize("rx", [1, 2, 3])
@pytest.mark.parametrize("users", [1, 2])
def test_noiseless_loopback(name, rx, users):
    cfg = LinkConfig(modulation=name, rx_antennas=rx, users=users)
    batch = run_trials(cfg, math.inf, [0, 1])
    assert batch.errors.tolist() == [0, 0]
    assert batch.bits.tolist() == [1024, 1024]


@pytest.mark.parametrize(
    "changes",
    [
        dict(tx_antennas=1, rx_antennas=1),
        dict(coding=False, spreading=False),
        dict(fading="block", users=3),
        dict(subcarriers=60, cp_len=15, frame_bits=100),
    ],
)
def test_noiseless_loopback_variants(changes):
    assert run_trial(LinkConfig(**changes), math.inf, 0) == (changes.get("frame_bits", 1024), 0)


def test_trial_is_deterministic_and_batch_independent():
    cfg = LinkConfig(modulation="QAM16")
    alone = [run_trial(cfg, -4.0, t) for t in (5, 9)]
    together = run_trials(cfg, -4.0, [9, 5])
    assert [(int(b), int(e)) for b, e in zip(together.bits[::-1], together.errors[::-1])] == alone
    assert run_trial(cfg.replace(seed=1), -4.0, 5) != alone[0] or run_trial(cfg.replace(seed=1), -4.0, 9) != alone[1]


def test_point_is_independent_of_thread_count():
    cfg = LinkConfig(max_bits=200_000)
    ref = simulate_point(cfg, -6.0, threads=1)
    for threads in (3, 8):
        assert simulate_point(cfg, -6.0, threads=threads) == ref


def test_stopping_rule():
    cfg = LinkConfig(target_errors=50, min_trials=20)
    rec = simulate_point(cfg, -10.0)
    assert rec.bit_errors >= 50 and rec.trials >= 20
    # removing the last trial would break one of the two conditions
    prev = run_trial(cfg, -10.0, rec.trials - 1)
    assert rec.bit_errors - prev[1] < 50 or rec.trials - 1 < 20
    capped = simulate_point(LinkConfig(max_bits=10_000), 20.0)
    assert capped.bits_simulated == 10_240 and capped.trials == 10


def test_sweep_grid_and_records():
    assert len(LinkConfig().snr_grid()) == 31
    cfg = LinkConfig(snr_start_db=3.0, snr_stop_db=3.0, **FAST)
    (rec,) = run_sweep(cfg)
    assert rec.snr_db == 3.0
    assert rec.eb_n0_db == pytest.approx(3.0 + 10 * math.log10(8))
    assert rec.ber * rec.bits_simulated == rec.bit_errors
    recs = run_sweep(LinkConfig(snr_start_db=-2.0, snr_stop_db=2.0, snr_step_db=2.0, **FAST))
    assert [r.snr_db for r in recs] == [-2.0, 0.0, 2.0]


def test_ber_record_validation():
    rec = BerRecord("QPSK", 0.0, 9.03, 1000, 10, 1)
    assert rec.ber == 0.01 and rec.std_error == pytest.approx(math.sqrt(0.01 * 0.99 / 1000))
    with pytest.raises(ValueError):
        BerRecord("QPSK", 0.0, 9.03, 0, 0, 1)
    with pytest.raises(ValueError):
        BerRecord("QPSK", 0.0, 9.03, 10, 11, 1)


@pytest.mark.parametrize(
    "changes, message",
    [
        (dict(max_bits=9_999), "max_bits"),
        (dict(target_errors=0), "target_errors"),
        (dict(tx_antennas=3), "tx_antennas"),
        (dict(rx_antennas=5), "rx_antennas"),
        (dict(cp_len=64), "cp_len must be < subcarriers"),
        (dict(users=4, modulation="QAM64", co_user_backoff_db=10.0), "too small"),
        (dict(modulation="BPSK"), "unknown modulation"),
        (dict(fading="fast"), "fading"),
    ],
)
def test_config_validation(changes, message):
    with pytest.raises(ValueError, match=message):
        LinkConfig(**changes)


def test_singular_draws_are_resampled(monkeypatch):
    real = link.rayleigh_draw
    calls = []

    def first_draw_singular(gen, size=(), rx=3, tx=2):
        H = real(gen, size, rx, tx)
        if not calls:
            H[0, 0] = 0  # one singular (rx, tx) matrix
        calls.append(size)
        return H

    monkeypatch.setattr(link, "rayleigh_draw", first_draw_singular)
    cfg = LinkConfig(fading="block")
    batch = run_trials(cfg, math.inf, [0])
    assert batch.resampled == 1
    assert batch.errors.tolist() == [0]


def test_ber_falls_with_snr():
    cfg = LinkConfig(max_bits=100_000, target_errors=10**9)
    for name in sorted(SCHEMES):
        low = simulate_point(cfg.replace(modulation=name), -10.0)
        high = simulate_point(cfg.replace(modulation=name), 20.0)
        assert low.ber > high.ber + low.std_error, name


@pytest.mark.parametrize("eb_n0", [4.0, 6.0])
def test_coding_gain_at_equal_eb_n0(eb_n0):
    # independent fading per subcarrier pair; hard-decision decoding gains little under frame-coherent fading
    base = LinkConfig(fading="block", max_bits=100_000, target_errors=10**9)
    coded = simulate_point(base, eb_n0 + 10 * math.log10(2 * 0.5 / 8))
    uncoded = simulate_point(base.replace(coding=False), eb_n0 + 10 * math.log10(2 / 8))
    assert coded.eb_n0_db == pytest.approx(eb_n0) and uncoded.eb_n0_db == pytest.approx(eb_n0)
    assert coded.ber + 2 * coded.std_error < uncoded.ber


def test_closed_forms():
    assert rayleigh_ber_bpsk(10.0) == pytest.approx(0.5 * (1 - math.sqrt(10 / 11)))
    assert mrc_ber_bpsk(10.0, 1) == pytest.approx(rayleigh_ber_bpsk(10.0))
    # two-branch closed form written out: p^2 (1 + 2(1 - p))
    mu = math.sqrt(5 / 6)
    p = (1 - mu) / 2
    assert mrc_ber_bpsk(5.0, 2) == pytest.approx(p**2 * (1 + 2 * (1 - p)))
    assert gain_db(0.3313, 0.01308) == pytest.approx(14.04, abs=0.01)
    assert gain_db(0.1, 0.0) == math.inf
