import numpy as np
import pytest

from kslab.certify import SearchBudget
from kslab.decompose import (
    DecompositionInfeasibleError,
    decompose_lambda_plus_T,
    decompose_reduction,
    jordan_defect,
    jordan_product,
    ks_threshold_depolarized_transpose,
    reduction_feasibility_search,
    reduction_split_params,
    stormer_defect,
    verify_decomposition,
)
from kslab.linalg import ginibre, hs_norm, min_eigenvalue
from kslab.maps import QuantumMap
from kslab.zoo import (
    ParameterDomainError,
    depolarizing,
    lambda_plus,
    reduction,
    transpose_map,
)

rng = np.random.default_rng(3)
FAST = SearchBudget(restarts=8, max_iters=200, seed=0)


def test_threshold_values():
    # (2d + 1 - sqrt(4d+1)) / (2d)
    assert ks_threshold_depolarized_transpose(2) == pytest.approx(0.5)
    assert ks_threshold_depolarized_transpose(3) == pytest.approx((7 - np.sqrt(13)) / 6)


def test_lambda_plus_T_below_threshold():
    r = decompose_lambda_plus_T(2, 0.2)
    assert r.lam == pytest.approx(0.4)
    assert r.params["beta"] == pytest.approx(0.5)
    assert abs(r.lam * r.params["beta"] - 0.2) < 1e-14
    target = lambda_plus(transpose_map(2), 0.2)
    assert hs_norm(r.reconstruction().transfer - target.transfer) < 1e-12


def test_lambda_plus_T_above_threshold_trivial():
    r = decompose_lambda_plus_T(2, 0.8)
    assert r.lam == 1.0
    assert r.params["beta"] == 0.8


def test_lambda_plus_T_a_zero():
    r = decompose_lambda_plus_T(3, 0.0)
    assert r.lam == 0.0
    # pure transposition component carries all the weight
    assert hs_norm(r.phi2.transfer - transpose_map(3).transfer) < 1e-12


def test_lambda_plus_T_domain():
    with pytest.raises(ParameterDomainError):
        decompose_lambda_plus_T(2, 1.5)


def test_reduction_worked_example_d2_a09():
    # hand-worked instance: alpha = 1/11, lambda window [4/33, 6/33]
    r = decompose_reduction(2, 0.9)
    p = r.params
    assert r.lam == pytest.approx(5 / 33)
    assert p["alpha"] == pytest.approx(1 / 11)
    assert p["beta"] == pytest.approx(1 / 33)
    assert p["gamma"] == pytest.approx(9 / 11)
    assert p["delta"] == pytest.approx(-26 / 33)
    assert p["beta"] / p["alpha"] == pytest.approx(1 / 3)
    assert -p["delta"] / p["gamma"] == pytest.approx(26 / 27)


def test_reduction_trivial_below_ks_boundary():
    r = decompose_reduction(2, 0.5)
    assert r.lam == 1.0
    assert hs_norm(r.phi1.transfer - reduction(2, 0.5).transfer) < 1e-12


@pytest.mark.parametrize("d,a", [(2, 0.7), (2, 0.95), (3, 0.8), (3, 0.99)])
def test_reduction_split_parameter_identities(d, a):
    r = decompose_reduction(d, a)
    p = r.params
    assert abs(p["alpha"] + p["gamma"] - 1 / (d - a)) < 1e-14
    assert abs(p["beta"] - p["delta"] - a / (d - a)) < 1e-14
    assert abs(p["alpha"] * d - p["beta"] - r.lam) < 1e-14
    assert abs(p["gamma"] * d + p["delta"] - (1 - r.lam)) < 1e-14
    assert p["delta"] < 0
    assert r.phi1.unital and r.phi2.unital
    assert r.reconstruction_residual < 1e-10


def test_reduction_a1_infeasible():
    with pytest.raises(DecompositionInfeasibleError):
        decompose_reduction(2, 1.0)
    assert reduction_feasibility_search(2, 1.0, n_alpha=40, n_lam=40) is None


def test_reduction_split_params_formula():
    p = reduction_split_params(2, 0.9, alpha=1 / 11, lam=5 / 33)
    assert p["beta"] == pytest.approx(2 / 11 - 5 / 33)
    assert p["gamma"] == pytest.approx(1 / 1.1 - 1 / 11)


def test_jordan_product_unnormalized():
    A, B = ginibre(rng, 3), ginibre(rng, 3)
    assert np.allclose(jordan_product(A, B), A @ B + B @ A)
    assert np.allclose(jordan_product(A, A), 2 * A @ A)


def test_jordan_defect_edge_lambdas():
    r = decompose_reduction(2, 0.9)
    X = ginibre(rng, 2)
    # at lambda in {0, 1} the correction term drops out
    D0 = jordan_defect(r.phi1, r.phi2, 0.0, X)
    Z = r.phi2(X)
    expected = r.phi2(jordan_product(X.conj().T, X)) - jordan_product(Z.conj().T, Z)
    assert np.allclose(D0, expected)


def test_jordan_defect_equal_components():
    Phi = depolarizing(2)
    X = ginibre(rng, 2)
    D = jordan_defect(Phi, Phi, 0.5, X)
    Z = Phi(X)
    expected = Phi(jordan_product(X.conj().T, X)) - jordan_product(Z.conj().T, Z)
    assert np.allclose(D, expected)


def test_jordan_defect_psd_on_decompositions():
    r = decompose_reduction(3, 0.9)
    for _ in range(50):
        X = ginibre(rng, 3)
        X /= hs_norm(X)
        assert min_eigenvalue(jordan_defect(r.phi1, r.phi2, r.lam, X)) > -1e-9


def test_jordan_defect_validation():
    with pytest.raises(ValueError):
        jordan_defect(depolarizing(2), depolarizing(3), 0.5, np.eye(2))
    with pytest.raises(ValueError):
        jordan_defect(depolarizing(2), depolarizing(2), 1.5, np.eye(2))


def test_stormer_defect_identity_zero():
    X = ginibre(rng, 2)
    assert hs_norm(stormer_defect(QuantumMap.identity(2), X)) < 1e-12


def test_stormer_defect_psd_for_positive_unital():
    for Phi in (depolarizing(3), reduction(3, 0.8), transpose_map(3)):
        for _ in range(20):
            X = ginibre(rng, 3)
            X /= hs_norm(X)
            assert min_eigenvalue(stormer_defect(Phi, X)) > -1e-9


def test_stormer_defect_precondition():
    with pytest.raises(ValueError, match="precondition"):
        stormer_defect(QuantumMap(2 * np.eye(4)), np.eye(2))


def test_verify_decomposition_all_ok():
    r = decompose_reduction(2, 0.9)
    rep = verify_decomposition(r, reduction(2, 0.9), FAST, n_jordan_samples=30)
    assert rep.all_ok
    assert rep.reconstruction_residual < 1e-10
    assert rep.jordan_min_eigenvalue > -1e-9


def test_verify_decomposition_detects_tampering():
    r = decompose_reduction(2, 0.9)
    r.lam += 0.05
    rep = verify_decomposition(r, reduction(2, 0.9), FAST, n_jordan_samples=10)
    assert not rep.reconstruction_ok
    assert not rep.all_ok
