import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_mccdma.channel import rayleigh_draw
from mimo_mccdma.stbc import (
    ChannelRealization,
    SingularChannelError,
    stacked_model,
    stbc_encode,
    zf_combine,
    zf_single,
)


def receive(H, s1, s2):
    """y[..., rx, slot] = H @ X^T for an Alamouti block X[..., slot, antenna]."""
    X = stbc_encode(s1, s2)
    return H @ np.swapaxes(X, -1, -2)


def test_block_structure():
    X = stbc_encode(1 + 2j, 3 - 1j) * math.sqrt(2)
    assert np.allclose(X, [[1 + 2j, 3 - 1j], [-(3 + 1j), 1 - 2j]])


def test_orthogonality_and_power_split(rng):
    s = rng.standard_normal((100, 2)) + 1j * rng.standard_normal((100, 2))
    X = stbc_encode(s[:, 0], s[:, 1])
    gram = np.conj(np.swapaxes(X, -1, -2)) @ X
    energy = (np.abs(s) ** 2).sum(axis=1) / 2
    assert np.allclose(gram, energy[:, None, None] * np.eye(2))


def test_single_path_example():
    # only h11 = 1: slot 1 receives s1/sqrt2, slot 2 receives s1*/sqrt2
    H = np.zeros((3, 2), dtype=complex)
    H[0, 0] = 1
    y = np.zeros((3, 2), dtype=complex)
    y[0] = [0.3 + 0.1j, -0.2 + 0.5j]
    s1, s2, gain = zf_combine(y, H)
    assert s1 == pytest.approx(math.sqrt(2) * y[0, 0])
    assert s2 == pytest.approx(-math.sqrt(2) * np.conj(y[0, 1]))
    assert gain == 1.0


def test_matches_pseudo_inverse_on_1000_draws(rng):
    H = rayleigh_draw(rng, 1000)
    y = rng.standard_normal((1000, 3, 2)) + 1j * rng.standard_normal((1000, 3, 2))
    s1, s2, _ = zf_combine(y, H)
    A = stacked_model(H)
    z = np.concatenate([y[..., 0], np.conj(y[..., 1])], axis=-1)
    ref = np.einsum("bij,bj->bi", np.linalg.pinv(A), z)
    assert np.max(np.abs(ref[:, 0] - s1)) < 1e-10
    assert np.max(np.abs(ref[:, 1] - s2)) < 1e-10


@settings(deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_noiseless_recovery_any_rx(rx, seed):
    g = np.random.default_rng(seed)
    H = rayleigh_draw(g, 20, rx=rx, tx=2)
    s = g.standard_normal((20, 2)) + 1j * g.standard_normal((20, 2))
    s1, s2, gain = zf_combine(receive(H, s[:, 0], s[:, 1]), H)
    assert np.allclose(s1, s[:, 0]) and np.allclose(s2, s[:, 1])
    assert np.allclose(gain, np.sum(np.abs(H) ** 2, axis=(-2, -1)))


def test_gram_is_scaled_identity(rng):
    H = rayleigh_draw(rng, 50)
    A = stacked_model(H)
    gram = np.conj(np.swapaxes(A, -1, -2)) @ A
    g = np.sum(np.abs(H) ** 2, axis=(-2, -1)) / 2
    assert np.allclose(gram, g[:, None, None] * np.eye(2))


def test_gain_mean_is_six(rng):
    H = rayleigh_draw(rng, 100_000)
    assert ChannelRealization(H[0]).gain == pytest.approx(np.sum(np.abs(H[0]) ** 2))
    assert np.mean(np.sum(np.abs(H) ** 2, axis=(-2, -1))) == pytest.approx(6.0, rel=0.02)


def test_singular_channel_raises():
    with pytest.raises(SingularChannelError, match="singular channel draw"):
        zf_combine(np.ones((3, 2)), np.zeros((3, 2)))
    with pytest.raises(SingularChannelError):
        zf_single(np.ones(3), np.zeros(3))


def test_single_antenna_combiner(rng):
    h = rayleigh_draw(rng, 10, rx=3, tx=1)[..., 0]
    s = rng.standard_normal(10) + 0j
    est, gain = zf_single(h * s[:, None], h)
    assert np.allclose(est, s)
    est1, _ = zf_single(h[:, :1] * s[:, None], h[:, :1])
    assert np.allclose(est1, s)
