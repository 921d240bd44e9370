import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stabstbc.cmat import DimensionError
from stabstbc.pauli import PAULI_MATRICES, PauliOp, commutes, commutes_dense, signature
from stabstbc.stabilizer import ERRORS, GENERATORS

paulis3 = st.builds(
    lambda letters, phase: PauliOp.from_letters("".join(letters), phase),
    st.lists(st.sampled_from("IXYZ"), min_size=3, max_size=3),
    st.integers(0, 3),
)


def test_single_qubit_matrices():
    assert np.array_equal(PauliOp.parse("X").to_matrix(), [[0, 1], [1, 0]])
    assert np.array_equal(PauliOp.parse("Y").to_matrix(), [[0, -1j], [1j, 0]])
    assert np.array_equal(PauliOp.parse("Z").to_matrix(), [[1, 0], [0, -1]])
    assert np.array_equal(PauliOp.parse("III").to_matrix(), np.eye(8))


def test_xzx_is_hermitian_unitary_traceless():
    M = PauliOp.parse("XZX").to_matrix()
    assert np.allclose(M, M.conj().T)
    assert np.allclose(M.conj().T @ M, np.eye(8))
    assert abs(np.trace(M)) < 1e-12


def test_x_times_z():
    # matrix-product oracle
    expected = PAULI_MATRICES["X"] @ PAULI_MATRICES["Z"]
    prod = PauliOp.parse("X") * PauliOp.parse("Z")
    assert str(prod) == "-jY"
    assert np.allclose(prod.to_matrix(), expected)


@pytest.mark.parametrize("text", ["XZX", "-jYII", "jZ", "-IXY", "+XX"])
def test_parse_print_roundtrip(text):
    p = PauliOp.parse(text)
    assert PauliOp.parse(str(p)) == p


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        PauliOp.parse("XQ")


def test_mismatched_sizes():
    with pytest.raises(DimensionError):
        PauliOp.parse("X") * PauliOp.parse("XX")
    with pytest.raises(DimensionError):
        commutes(PauliOp.parse("X"), PauliOp.parse("XX"))


def test_generators_commute():
    S0, S1 = GENERATORS
    assert S0 * S1 == S1 * S0
    assert commutes(S0, S1)


@pytest.mark.parametrize(
    "k, expected",
    [(0, (0, 0)), (1, (0, 1)), (2, (1, 0)), (3, (1, 1))],
)
def test_signatures_match_commutation_table(k, expected):
    assert signature(ERRORS[k], GENERATORS) == expected
    assert [not commutes(ERRORS[k], g) for g in GENERATORS] == [bool(b) for b in expected]


def test_signature_of_identity():
    assert signature(PauliOp.identity(3), GENERATORS) == (0, 0)


def test_error_signatures_distinct():
    assert len({signature(e, GENERATORS) for e in ERRORS}) == 4


def test_symplectic_matches_dense_on_code_operators():
    ops = list(ERRORS) + list(GENERATORS)
    for a in ops:
        for b in ops:
            assert commutes(a, b) == commutes_dense(a, b)


@settings(max_examples=200, deadline=None)
@given(paulis3, paulis3)
def test_homomorphism(a, b):
    assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)
    assert commutes(a, b) == commutes_dense(a, b)
    # any two elements commute or anticommute
    A, B = a.to_matrix(), b.to_matrix()
    assert np.allclose(A @ B, B @ A) or np.allclose(A @ B, -B @ A)


def test_homomorphism_1000_random_pairs(rng):
    for _ in range(1000):
        a = PauliOp.from_letters("".join(rng.choice(list("IXYZ"), 3)), int(rng.integers(4)))
        b = PauliOp.from_letters("".join(rng.choice(list("IXYZ"), 3)), int(rng.integers(4)))
        assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix(), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(paulis3)
def test_inverse_and_unitarity(p):
    assert p * p.inverse() == PauliOp.identity(3)
    assert commutes(p, PauliOp.identity(3))
    M = p.to_matrix()
    assert np.allclose(M.conj().T @ M, np.eye(8))
    if p.phase == 0:
        w = np.linalg.eigvalsh(M)
        assert np.all(np.isclose(w, 1) | np.isclose(w, -1))
