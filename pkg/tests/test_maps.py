import numpy as np
import pytest

from kslab.linalg import dagger, ginibre, hs_inner, hs_norm, partial_trace_second
from kslab.maps import AmplifiedMap, BlockOperator, QuantumMap, mix
from kslab.zoo import depolarizing, sample_utp_cp, transpose_map

rng = np.random.default_rng(99)


def test_identity_map():
    I2 = QuantumMap.identity(3)
    X = ginibre(rng, 3)
    assert np.allclose(I2(X), X)
    assert I2.unital and I2.trace_preserving and I2.hermiticity_preserving


def test_transfer_shape_validation():
    with pytest.raises(ValueError):
        QuantumMap(np.eye(5))
    with pytest.raises(ValueError):
        QuantumMap(np.full((4, 4), np.nan))


def test_structural_flags():
    D = depolarizing(2)
    assert D.unital and D.trace_preserving
    # trace-killing map: X -> <0|X|0> E_00, unital fails
    T = np.zeros((4, 4))
    T[0, 0] = 1
    M = QuantumMap(T)
    assert not M.unital
    assert not M.trace_preserving


def test_choi_of_known_maps():
    # Choi of the identity is the unnormalized maximally entangled projector
    C_id = QuantumMap.identity(2).choi()
    w = np.linalg.eigvalsh(C_id)
    assert np.allclose(w, [0, 0, 0, 2])
    # Choi of transposition is the SWAP operator
    C_T = transpose_map(2).choi()
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.allclose(C_T, swap)


def test_choi_round_trip():
    Phi = sample_utp_cp(3, seed=5)
    back = QuantumMap.from_choi(Phi.choi())
    assert hs_norm(back.transfer - Phi.transfer) < 1e-12


def test_kraus_round_trip():
    Phi = sample_utp_cp(2, seed=11)
    ops = Phi.kraus()
    back = QuantumMap.from_kraus(ops)
    assert hs_norm(back.transfer - Phi.transfer) < 1e-12
    # completeness: sum K* K = I for a TP map
    assert hs_norm(sum(dagger(K) @ K for K in ops) - np.eye(2)) < 1e-10


def test_kraus_rejects_non_cp():
    with pytest.raises(ValueError, match="completely positive"):
        transpose_map(2).kraus()


def test_dual_is_hs_adjoint():
    Phi = sample_utp_cp(3, seed=2)
    dual = Phi.dual()
    A, B = ginibre(rng, 3), ginibre(rng, 3)
    assert abs(hs_inner(dual(A), B) - hs_inner(A, Phi(B))) < 1e-10


def test_hs_norm_is_spectral_and_submultiplicative():
    for seed in range(5):
        Phi = sample_utp_cp(2, seed=seed)
        Psi = sample_utp_cp(2, seed=seed + 50)
        assert (Phi @ Psi).hs_norm() <= Phi.hs_norm() * Psi.hs_norm() + 1e-12
    assert abs(QuantumMap.identity(4).hs_norm() - 1.0) < 1e-12


def test_compose():
    Phi = sample_utp_cp(2, seed=1)
    Psi = sample_utp_cp(2, seed=2)
    X = ginibre(rng, 2)
    assert np.allclose((Phi @ Psi)(X), Phi(Psi(X)))


def test_amplified_identity_is_identity():
    Phi = QuantumMap.identity(3)
    X = ginibre(rng, 6)
    assert np.allclose(Phi.apply_amplified(X, 2), X)


def test_amplified_on_kron_factorizes():
    # (id_k (x) Phi)(M (x) Y) = M (x) Phi(Y)
    Phi = sample_utp_cp(3, seed=7)
    M = ginibre(rng, 2)
    Y = ginibre(rng, 3)
    assert np.allclose(Phi.apply_amplified(np.kron(M, Y), 2), np.kron(M, Phi(Y)))


def test_amplified_depolarizing_is_partial_trace():
    d, k = 3, 2
    D = depolarizing(d)
    X = ginibre(rng, k * d)
    expected = np.kron(partial_trace_second(X, k, d), np.eye(d)) / d
    assert np.allclose(D.apply_amplified(X, k), expected)


def test_amplified_transfer_matrix_consistent():
    Phi = sample_utp_cp(2, seed=3)
    amp = Phi.amplify(2)
    T = amp.transfer_matrix()
    X = ginibre(rng, 4)
    assert np.allclose((T @ X.flatten(order="F")).reshape(4, 4, order="F"), amp(X))
    assert T is amp.transfer_matrix()  # cached


def test_amplified_dual():
    Phi = sample_utp_cp(2, seed=13)
    amp = Phi.amplify(2)
    A, B = ginibre(rng, 4), ginibre(rng, 4)
    assert abs(hs_inner(amp.dual()(A), B) - hs_inner(A, amp(B))) < 1e-10


def test_amplify_rejects_bad_k():
    with pytest.raises(ValueError):
        AmplifiedMap(QuantumMap.identity(2), 0)


def test_block_operator_validation():
    with pytest.raises(ValueError):
        BlockOperator(k=2, d=2, data=np.eye(3))
    b = BlockOperator(k=2, d=3, data=np.eye(6))
    assert b.k == 2 and b.d == 3


def test_mix_affine():
    D, T = depolarizing(2), transpose_map(2)
    M = mix([(0.3, D), (0.7, T)])
    X = ginibre(rng, 2)
    assert np.allclose(M(X), 0.3 * D(X) + 0.7 * T(X))
    assert M.unital and M.trace_preserving
