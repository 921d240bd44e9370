import numpy as np
import pytest

from stabstbc import channel
from stabstbc.cmat import kron, vec
from stabstbc.stabilizer import encode, encode_matrix

from conftest import crandn, random_unit


def test_decompose_identity_and_z():
    assert np.allclose(channel.decompose(np.eye(2)), [1, 0, 0, 0])
    assert np.allclose(channel.decompose(np.diag([1, -1])), [0, 0, 1, 0])


def test_decompose_upper_corner():
    c = channel.decompose([[0, 1], [0, 0]])
    assert np.allclose(c, [0, 0.5, 0, 0.5j])
    X = np.array([[0, 1], [1, 0]])
    Y = np.array([[0, -1j], [1j, 0]])
    assert np.allclose(c[1] * X + c[3] * Y, [[0, 1], [0, 0]])


def test_roundtrips(rng):
    H = crandn(rng, 100, 2, 2)
    assert np.allclose(channel.reconstruct(channel.decompose(H)), H, atol=1e-12)
    c = crandn(rng, 100, 4)
    assert np.allclose(channel.decompose(channel.reconstruct(c)), c, atol=1e-12)


def test_pauli_channel_is_block_channel(rng):
    H = crandn(rng, 2, 2)
    assert np.allclose(channel.pauli_channel(channel.decompose(H)), kron(np.eye(2), np.eye(2), H), atol=1e-12)


def test_channel_statistics():
    rng = np.random.default_rng(5)
    H = channel.sample_channels(rng, 100_000)
    assert abs(np.mean(np.abs(H) ** 2) - 1) < 0.02
    c = channel.decompose(H)
    assert np.all(np.abs(np.mean(np.abs(c) ** 2, axis=0) - 0.5) < 0.02)
    corr = np.mean(c[:, 0] * np.conj(c[:, 1])) / 0.5
    assert abs(corr) < 0.02


def test_sample_channel_fields(rng):
    ch = channel.sample_channel(rng)
    assert ch.H.shape == (2, 2)
    assert np.allclose(channel.reconstruct(ch.c), ch.H)


def test_transmit_noiseless_identity(rng):
    T = encode_matrix(random_unit(rng))
    assert np.array_equal(channel.transmit(T, np.eye(2), 0.0), T)


def test_transmit_two_paths_agree(rng):
    for _ in range(100):
        s = random_unit(rng)
        ch = channel.sample_channel(rng)
        N = channel.complex_normal(rng, (2, 4), 0.3)
        Y = channel.transmit(encode_matrix(s), ch.H, 0.3, noise=N)
        y = channel.received_vec(encode(s), ch.c, vec(N))
        assert np.allclose(vec(Y).ravel(), y, atol=1e-10)
        Y0 = channel.transmit(encode_matrix(s), ch.H, 0.0)
        assert np.allclose(vec(Y0).ravel(), kron(np.eye(4), ch.H) @ encode(s), atol=1e-10)


def test_pure_noise_variance():
    rng = np.random.default_rng(9)
    Y = np.stack([channel.transmit(np.zeros((2, 4)), np.eye(2), 1.0, rng) for _ in range(12_500)])
    assert Y.size == 100_000
    assert abs(np.mean(np.abs(Y) ** 2) - 1) < 0.02


def test_transmit_needs_rng_for_noise():
    with pytest.raises(ValueError):
        channel.transmit(np.zeros((2, 4)), np.eye(2), 1.0)


def test_noise_params():
    p = channel.NoiseParams.from_snr_db(10)
    assert np.isclose(p.sigma_n_sq, 0.1)
    assert np.isclose(p.snr_db, 10)
    with pytest.raises(ValueError):
        channel.NoiseParams(0.0)
    assert channel.noise_var_from_snr_db(float("inf")) == 0.0


def test_fresh_channel_each_draw():
    rng = np.random.default_rng(1)
    a, b = channel.sample_channel(rng), channel.sample_channel(rng)
    assert not np.allclose(a.H, b.H)
