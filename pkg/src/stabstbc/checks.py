"""Algebraic and statistical self-checks, grouped for ``stabstbc selftest``."""

from __future__ import annotations

import time

import numpy as np

from . import baselines, channel, constellation, decoder, stabilizer
from .pauli import commutes_dense, signature

SYNDROME_TABLE = {"III": (0, 0), "IIX": (0, 1), "IIZ": (1, 0), "IIY": (1, 1)}
ATOL = 1e-10


class CheckFailed(AssertionError):
    pass


def _require(cond, msg):
    if not cond:
        raise CheckFailed(msg)


def check_pauli():
    code = stabilizer.build_code()
    ops = list(code.errors) + list(code.generators)
    for a in ops:
        for b in ops:
            _require(a.commutes(b) == commutes_dense(a, b), f"symplectic/dense mismatch for {a},{b}")
    for e in code.errors:
        _require(signature(e, code.generators) == SYNDROME_TABLE[e.letters], f"syndrome of {e} differs from table")
    sigs = {signature(e, code.generators) for e in code.errors}
    _require(len(sigs) == 4, "error syndromes not distinct")


def check_stabilizer():
    code = stabilizer.build_code()
    S0, S1 = (g.to_matrix() for g in code.generators)
    _require(np.allclose(S0 @ S1, S1 @ S0, atol=ATOL), "generators do not commute")
    P = code.projectors
    I8 = np.eye(8)
    _require(np.allclose(sum(P), I8, atol=ATOL), "projectors do not sum to I")
    for j, Pj in enumerate(P):
        _require(np.allclose(Pj @ Pj, Pj, atol=ATOL), f"P{j} not idempotent")
        _require(np.allclose(Pj, Pj.conj().T, atol=ATOL), f"P{j} not Hermitian")
        for k, Pk in enumerate(P):
            if j != k:
                _require(np.allclose(Pj @ Pk, 0, atol=ATOL), f"P{j} P{k} != 0")
    for k, (E, Pk) in enumerate(zip(code.error_matrices, P)):
        _require(np.allclose(Pk @ E, E @ P[0], atol=ATOL), f"P{k} E{k} != E{k} P0")
    C = code.basis
    _require(np.allclose(C.conj().T @ C, 4 * np.eye(2), atol=ATOL), "C* C != 4 I")
    for S in (S0, S1):
        _require(np.allclose(S @ C, C, atol=ATOL), "basis not stabilized")
    V = stabilizer.eigenspace_basis(code.generators)
    _require(V.shape[1] == 2, "code space is not two-dimensional")
    _require(np.allclose(V @ V.conj().T @ C, C, atol=ATOL), "basis outside computed eigenspace")


def check_channel(rng):
    H = channel.sample_channels(rng, 1000)
    _require(np.allclose(channel.reconstruct(channel.decompose(H)), H, atol=1e-12), "decompose/reconstruct mismatch")
    for _ in range(50):
        ch = channel.sample_channel(rng)
        s = np.exp(1j * rng.uniform(0, 2 * np.pi, 2)) / np.sqrt(2)
        T = stabilizer.encode_matrix(s)
        N = channel.complex_normal(rng, (2, 4), 0.1)
        Y = channel.transmit(T, ch.H, 0.1, noise=N)
        y = channel.received_vec(stabilizer.encode(s), ch.c, N.reshape(-1, order="F"))
        _require(np.allclose(Y.reshape(-1, order="F"), y, atol=ATOL), "matrix and Pauli receive paths differ")


def check_packings(paths=()):
    consts = [constellation.embedded(n) for n in constellation.EMBEDDED_NAMES]
    consts += [constellation.load_constellation(p) for p in paths]
    for c in consts:
        coh = c.coherence
        _require(coh >= constellation.welch_bound(len(c)) - 1e-9, f"{c.name} beats the Welch bound")
        direct = constellation.pairing_criterion(c, 0.3)
        _require(abs(direct - constellation.pairing_criterion_closed_form(c)) < 1e-10, f"{c.name} pairing mismatch")
    gr4 = constellation.embedded("gr4")
    _require(abs(gr4.coherence - np.sqrt(1 / 3)) < 1e-6, "gr4 is not equiangular at the Welch bound")


def check_oracles(rng, trials: int = 1000):
    code = stabilizer.build_code()
    mismatches = 0
    for c in (constellation.embedded("gr4"), constellation.embedded("gr8")):
        for t in range(trials // 2):
            sigma2 = 10 ** (-rng.choice([0.0, 10.0, 20.0]) / 10)
            idx = rng.integers(len(c))
            T = stabilizer.encode_matrix(c.points[idx])
            Y = channel.transmit(T, channel.sample_channel(rng).H, sigma2, rng)
            y = Y.reshape(-1, order="F")
            stats = decoder.reduce(y, code)
            a = decoder.ml_decide(stats, c)[0]
            b = decoder.bruteforce_ml(y, code, c, sigma2)
            f = decoder.fidelity_decide(stats, c)
            if not a == b == f:
                mismatches += 1
    _require(mismatches == 0, f"{mismatches} decisions disagree between ML, likelihood and fidelity forms")


def check_baselines(rng):
    for rate in (0.5, 1.0):
        nb = 2 if rate == 0.5 else 4
        for _ in range(100):
            bits = rng.integers(0, 2, nb)
            H = channel.sample_channel(rng).H
            _require(np.array_equal(baselines.alamouti_run_interval(bits, H, 0.0), bits), "noiseless Alamouti failed")
            _require(np.array_equal(baselines.differential_run_interval(bits, H, 0.0), bits), "noiseless differential failed")
    for cb in (baselines.pauli_codebook(), baselines.build_dicyclic_16()):
        for U in cb:
            _require(np.allclose(U.conj().T @ U, np.eye(2), atol=ATOL), "codebook matrix not unitary")


def run_all(packing_paths=(), seed: int = 0):
    """Yield ``(group, ok, message, seconds)`` for every check group."""
    rng = np.random.default_rng(seed)
    groups = [
        ("pauli", check_pauli),
        ("stabilizer", check_stabilizer),
        ("channel", lambda: check_channel(rng)),
        ("packings", lambda: check_packings(packing_paths)),
        ("oracles", lambda: check_oracles(rng)),
        ("baselines", lambda: check_baselines(rng)),
    ]
    for name, fn in groups:
        t0 = time.perf_counter()
        try:
            fn()
            yield name, True, "", time.perf_counter() - t0
        except Exception as exc:  # report every failure, keep going
            yield name, False, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0
