import itertools

import numpy as np
import pytest

from stabstbc import baselines
from stabstbc.baselines import (
    PILOT,
    REFERENCE,
    AlamoutiScheme,
    DifferentialScheme,
    alamouti_run_interval,
    build_dicyclic_16,
    differential_decode,
    differential_run_interval,
    pauli_codebook,
)
from stabstbc.channel import complex_normal, sample_channel
from stabstbc.montecarlo import BerPoint, diversity_slope

from conftest import crandn


def test_pilot_is_unitary():
    assert np.allclose(PILOT @ PILOT.conj().T, np.eye(2))


def test_unit_power_per_use(rng):
    # Alamouti block columns and pilot columns carry unit total power
    for nb in (2, 4):
        bits = rng.integers(0, 2, (100, nb))
        B = baselines.alamouti_block(baselines._modulate(bits))
        assert np.allclose(np.sum(np.abs(B) ** 2, axis=-2), 1)
    assert np.allclose(np.sum(np.abs(PILOT) ** 2, axis=0), 1)
    for cb in (pauli_codebook(), build_dicyclic_16()):
        assert np.allclose(np.sum(np.abs(REFERENCE @ cb) ** 2, axis=-2), 1)


@pytest.mark.parametrize("nb", [2, 4])
def test_alamouti_noiseless(rng, nb):
    for bits in itertools.product([0, 1], repeat=nb):
        for _ in range(20):
            H = sample_channel(rng).H
            assert np.array_equal(alamouti_run_interval(bits, H, 0.0), bits)
            assert np.array_equal(alamouti_run_interval(bits, H, 0.0, perfect_csi=True), bits)


@pytest.mark.parametrize("nb", [2, 4])
def test_differential_noiseless(rng, nb):
    for bits in itertools.product([0, 1], repeat=nb):
        for _ in range(20):
            H = sample_channel(rng).H
            assert np.array_equal(differential_run_interval(bits, H, 0.0), bits)


def test_bad_bit_counts():
    H = np.eye(2)
    with pytest.raises(ValueError):
        alamouti_run_interval([0, 1, 1], H, 0.0)
    with pytest.raises(ValueError):
        differential_run_interval([0], H, 0.0)
    with pytest.raises(ValueError):
        AlamoutiScheme(0.75)
    with pytest.raises(ValueError):
        DifferentialScheme(2.0)


def test_pilot_estimate_noiseless(rng):
    H = complex_normal(rng, (2, 2))
    assert np.allclose((H @ PILOT) @ PILOT.conj().T, H)


def test_alamouti_combining_gain(rng):
    # with exact CSI, combining returns (|h|_F^2 / sqrt 2) x
    x = np.array([[1 + 1j, -1 + 1j]]) / np.sqrt(2)
    H = complex_normal(rng, (1, 2, 2))
    out = baselines.alamouti_combine(H @ baselines.alamouti_block(x), H)
    assert np.allclose(out, np.sum(np.abs(H) ** 2) / np.sqrt(2) * x)


def test_perfect_csi_beats_estimate():
    rng = np.random.default_rng(5)
    n = 100_000
    est = AlamoutiScheme(0.5).simulate(rng, n, 0.1)
    rng = np.random.default_rng(5)
    csi = AlamoutiScheme(0.5, perfect_csi=True).simulate(rng, n, 0.1)
    assert csi < est


def test_pauli_codebook_distances():
    cb = pauli_codebook()
    d = {round(float(np.sum(np.abs(a - b) ** 2)), 9) for a, b in itertools.combinations(cb, 2)}
    assert d <= {4.0, 8.0}
    for U in cb:
        assert np.allclose(U.conj().T @ U, np.eye(2))


def test_dicyclic_group():
    G = build_dicyclic_16()
    w = np.exp(1j * np.pi / 4)
    a = np.diag([w, w.conjugate()])
    b = np.array([[0, 1], [-1, 0]])
    assert np.allclose(np.linalg.matrix_power(a, 8), np.eye(2))
    assert np.allclose(b @ b, np.linalg.matrix_power(a, 4))
    assert np.allclose(b @ a @ np.linalg.inv(b), np.linalg.inv(a))
    assert len({tuple(np.round(g, 9).ravel()) for g in G}) == 16
    for g in G:
        assert np.isclose(np.linalg.det(g), 1)
        assert np.allclose(g.conj().T @ g, np.eye(2))
    keys = {tuple(np.round(g, 9).ravel()) for g in G}
    for g, h in itertools.product(G, G):
        assert tuple(np.round(g @ h, 9).ravel()) in keys


def test_differential_decoder_left_invariant(rng):
    cb = build_dicyclic_16()
    Y1 = crandn(rng, 200, 2, 2)
    Y2 = crandn(rng, 200, 2, 2)
    W = np.linalg.qr(crandn(rng, 2, 2))[0]
    assert np.array_equal(differential_decode(Y1, Y2, cb), differential_decode(W @ Y1, W @ Y2, cb))


@pytest.mark.parametrize(
    "scheme,bits", [(AlamoutiScheme(0.5), 2), (AlamoutiScheme(1.0), 4), (DifferentialScheme(0.5), 2), (DifferentialScheme(1.0), 4)]
)
def test_rate_matches_bits(scheme, bits):
    assert scheme.bits_per_interval == bits
    assert scheme.metadata()["rate"] == bits / 4


@pytest.mark.slow
def test_alamouti_perfect_csi_full_diversity():
    # exact-CSI Alamouti over 2x2 has diversity 4; BER is already ~0 past 20 dB, so fit 10-15 dB
    scheme = AlamoutiScheme(0.5, perfect_csi=True)
    pts = []
    for snr in (10.0, 12.5, 15.0):
        rng = np.random.default_rng(int(snr * 10))
        n = 400_000
        e = scheme.simulate(rng, n, 10 ** (-snr / 10))
        pts.append(BerPoint.from_counts(snr, n, e, 2))
    assert diversity_slope(pts) >= 1.7
