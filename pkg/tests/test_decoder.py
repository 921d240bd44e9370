import io
import json
import math

import numpy as np
import pytest

from stabstbc import decoder
from stabstbc.channel import complex_normal, sample_channel, transmit
from stabstbc.constellation import embedded
from stabstbc.stabilizer import encode, encode_matrix

from conftest import crandn, random_unit

GR4, GR8 = embedded("gr4"), embedded("gr8")


def received(rng, s, sigma_sq, H=None):
    H = sample_channel(rng).H if H is None else H
    Y = transmit(encode_matrix(s), H, sigma_sq, rng)
    return Y.reshape(-1, order="F")


def test_project_codeword(code):
    parts = decoder.project(code.basis[:, 0], code)
    assert np.allclose(parts[0], code.basis[:, 0])
    for p in parts[1:]:
        assert np.allclose(p, 0)


def test_project_error_image(code):
    y = code.error_matrices[2] @ code.basis[:, 0]
    parts = decoder.project(y, code)
    assert [bool(np.any(np.abs(p) > 1e-12)) for p in parts] == [False, False, True, False]


def test_projections_sum_to_input(code, rng):
    y = crandn(rng, 8)
    assert np.allclose(sum(decoder.project(y, code)), y, atol=1e-12)


def test_reduce_codeword(code, rng):
    s = random_unit(rng)
    stats = decoder.reduce(encode(s), code)
    assert np.allclose(stats.q[0], math.sqrt(2) * s, atol=1e-12)
    assert np.allclose(stats.q[1:], 0, atol=1e-12)


def test_reduce_error_slot_3(code, rng):
    s = random_unit(rng)
    stats = decoder.reduce(code.error_matrices[3] @ encode(s), code)
    assert np.allclose(stats.q[3], math.sqrt(2) * s, atol=1e-12)
    assert np.allclose(stats.q[:3], 0, atol=1e-12)


def test_reduce_zero(code):
    stats = decoder.reduce(np.zeros(8), code, keep_z=True)
    assert np.array_equal(stats.q, np.zeros((4, 2)))
    assert stats.z.shape == (4, 8)


def test_noiseless_reduction_is_scaled_channel(code, rng):
    for _ in range(100):
        s = random_unit(rng)
        ch = sample_channel(rng)
        stats = decoder.reduce(received(rng, s, 0.0, ch.H), code)
        assert np.allclose(stats.q, math.sqrt(2) * ch.c[:, None] * s[None, :], atol=1e-12)


def test_reduction_matrix_matches_chain(code, rng):
    y = crandn(rng, 50, 8)
    batch = decoder.reduce_batch(y, code)
    for yi, qi in zip(y, batch):
        assert np.allclose(decoder.reduce(yi, code).q, qi, atol=1e-12)


@pytest.mark.parametrize("const", [GR4, GR8], ids=["gr4", "gr8"])
def test_noiseless_decisions_exact(code, const):
    rng = np.random.default_rng(11)
    for t in range(10_000 // len(const)):
        for i, s in enumerate(const.points):
            idx, diag = decoder.ml_decide(decoder.reduce(received(rng, s, 0.0), code), const)
            assert idx == i
            assert math.isclose(diag.fidelity, 1.0, rel_tol=1e-9)


def test_zero_stats_tie_break():
    idx, diag = decoder.ml_decide(decoder.SufficientStats(np.zeros((4, 2))), GR8)
    assert idx == 0 and diag.degenerate
    with pytest.raises(decoder.DegenerateInputError):
        decoder.fidelity_decide(decoder.SufficientStats(np.zeros((4, 2))), GR8)


def test_empty_constellation():
    with pytest.raises(decoder.ConfigurationError):
        decoder.ml_decide(decoder.SufficientStats(np.ones((4, 2))), np.zeros((0, 2)))


def test_u_s_example():
    assert np.allclose(decoder.u_s_explicit([1, 0], 2.0), 0.5 * np.array([[1, 0], [0, 2]]))


def test_u_s_is_inverse(rng):
    for _ in range(20):
        s = random_unit(rng)
        sig = rng.uniform(0.01, 3)
        A = np.outer(s, s.conj()) + sig / 2 * np.eye(2)
        assert np.allclose(decoder.u_s_explicit(s, sig) @ A, np.eye(2), atol=1e-10)


def test_q_covariance_from_mixing_matrix(rng):
    s = random_unit(rng)
    sig = 0.7
    M = np.hstack([np.kron(np.eye(4), s.reshape(2, 1)), np.eye(8)])
    Sigma = np.diag([1.0] * 4 + [sig / 2] * 8)
    assert np.allclose(M @ Sigma @ M.conj().T, decoder.q_covariance(s, sig), atol=1e-12)


def test_det_q_constant(rng):
    for _ in range(20):
        s = random_unit(rng)
        sig = rng.uniform(0.01, 3)
        expected = ((1 + sig / 2) * sig / 2) ** 4
        assert np.isclose(np.linalg.det(decoder.q_covariance(s, sig)).real, expected)


def test_q_empirical_covariance_matches_model(code):
    rng = np.random.default_rng(3)
    s = GR4.points[1]
    sig = 0.5
    n = 100_000
    H = complex_normal(rng, (n, 2, 2))
    Y = H @ encode_matrix(s) + complex_normal(rng, (n, 2, 4), sig)
    q = decoder.reduce_batch(Y.transpose(0, 2, 1).reshape(n, 8), code).reshape(n, 8)
    emp = q.T @ q.conj() / n
    assert np.allclose(emp, decoder.q_covariance(s, sig), atol=0.02)


def test_reduced_noise_covariance(code):
    rng = np.random.default_rng(4)
    sig = 0.8
    n = 100_000
    N = complex_normal(rng, (n, 8), sig)
    q = decoder.reduce_batch(N, code)  # reduction is linear, so this is q_k - sqrt(2) c_k s
    for k in range(4):
        cov = q[:, k, :].T @ q[:, k, :].conj() / n
        assert np.allclose(np.diag(cov).real, sig / 2, rtol=0.02)
        assert abs(cov[0, 1]) < 0.02 * sig / 2
    cross = q[:, 0, :].T @ q[:, 1, :].conj() / n
    assert np.all(np.abs(cross) < 0.02 * sig / 2)


@pytest.mark.parametrize("snr_db", [0.0, 10.0, 20.0])
def test_oracles_agree(code, snr_db):
    rng = np.random.default_rng(int(snr_db) + 100)
    sig = 10 ** (-snr_db / 10)
    for _ in range(300):
        i = rng.integers(8)
        y = received(rng, GR8.points[i], sig)
        stats = decoder.reduce(y, code)
        a = decoder.ml_decide(stats, GR8, sig)[0]
        assert a == decoder.bruteforce_ml(y, code, GR8, sig)
        assert a == decoder.fidelity_decide(stats, GR8)


def test_full_vector_likelihood_agrees(code):
    # third oracle: channel marginalized on the raw 8-dim observation
    rng = np.random.default_rng(77)
    for t in range(1000):
        sig = 10 ** (-rng.choice([0.0, 10.0, 20.0]) / 10)
        const = GR4 if t % 2 else GR8
        y = received(rng, const.points[rng.integers(len(const))], sig)
        assert decoder.marginal_ml(y, const, sig) == decoder.ml_decide(decoder.reduce(y, code), const)[0]


def test_bruteforce_requires_noise(code):
    with pytest.raises(ValueError):
        decoder.bruteforce_ml(np.ones(8), code, GR4, 0.0)


def test_mixed_state_is_density_matrix(rng):
    for _ in range(50):
        stats = decoder.SufficientStats(crandn(rng, 4, 2))
        rho = decoder.mixed_state(stats)
        assert np.allclose(rho, rho.conj().T)
        assert np.isclose(np.trace(rho).real, 1)
        assert np.all(np.linalg.eigvalsh(rho) > -1e-12)
        S = stats.outer_sum
        assert np.allclose(rho, S / np.trace(S).real)


def test_fidelity_pure_cases(rng):
    q = random_unit(rng)
    stats = decoder.SufficientStats(np.vstack([2.5 * q, np.zeros((3, 2))]))
    rho = decoder.mixed_state(stats)
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 1
    assert math.isclose(decoder.fidelity(rho, np.outer(q, q.conj())), 1.0, rel_tol=1e-9)
    # pure-vs-mixed fidelity reduces to sqrt(s* rho s)
    mixed = decoder.mixed_state(decoder.SufficientStats(crandn(rng, 4, 2)))
    s = random_unit(rng)
    assert math.isclose(
        decoder.fidelity(mixed, np.outer(s, s.conj())), math.sqrt(np.vdot(s, mixed @ s).real), rel_tol=1e-7
    )


def test_global_phase_invariance(code, rng):
    for _ in range(200):
        y = crandn(rng, 8)
        stats = decoder.reduce(y, code)
        pts = GR8.points * np.exp(1j * rng.uniform(0, 2 * np.pi, (8, 1)))
        assert decoder.ml_decide(stats, GR8)[0] == decoder.ml_decide(stats, pts)[0]
        # rotating the transmitted symbol rotates every q_k by the same phase
        rotated = decoder.SufficientStats(stats.q * np.exp(1j * 0.9))
        assert decoder.ml_decide(stats, GR8)[0] == decoder.ml_decide(rotated, GR8)[0]


def test_scale_equivariance(code, rng):
    for _ in range(200):
        stats = decoder.SufficientStats(crandn(rng, 4, 2))
        lam = rng.uniform(1e-3, 1e3)
        assert decoder.ml_decide(stats, GR8)[0] == decoder.ml_decide(decoder.SufficientStats(lam * stats.q), GR8)[0]


def test_diagnostics_dump(code, rng):
    idx, diag = decoder.ml_decide(decoder.reduce(crandn(rng, 8), code), GR4)
    assert diag.index == idx == int(np.argmax(diag.scores))
    buf = io.StringIO()
    decoder.dump_diagnostics(buf, 7, diag)
    rec = json.loads(buf.getvalue())
    assert rec["trial"] == 7 and rec["index"] == idx and len(rec["scores"]) == 4
