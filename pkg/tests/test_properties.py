"""Property-based and implication tests: algebraic invariants under
hypothesis, plus falsifier-backed closure properties of the certified
classes (convex mixtures, unitary sandwiches, KS implies the partial-trace
domination condition on samples)."""

import json

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from kslab.certify import SearchBudget, check_phi_k_condition, falsify_ks
from kslab.linalg import dagger, ginibre, haar_unitary, hs_norm, unvec, vec
from kslab.maps import mix
from kslab.serialize import matrix_from_json, matrix_to_json
from kslab.zoo import lambda_minus, reduction, sample_utp_cp, unitary_sandwich

FAST = SearchBudget(restarts=8, max_iters=200, seed=0)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, width=64)
cplx = st.builds(complex, finite, finite)


@st.composite
def square(draw, nmax=5):
    n = draw(st.integers(2, nmax))
    seed = draw(st.integers(0, 2**31 - 1))
    return ginibre(np.random.default_rng(seed), n)


@given(square())
def test_vec_unvec_round_trip(X):
    assert np.array_equal(unvec(vec(X), X.shape[0]), X)


@given(square(), square())
def test_hs_norm_triangle(A, B):
    n = min(A.shape[0], B.shape[0])
    A, B = A[:n, :n], B[:n, :n]
    assert hs_norm(A + B) <= hs_norm(A) + hs_norm(B) + 1e-9


@given(square(), cplx, cplx)
def test_amplified_application_linear(X, a, b):
    Phi = sample_utp_cp(2, seed=1)
    n = X.shape[0]
    if n % 2:
        X = np.kron(X, np.eye(2))
        n *= 2
    k = n // 2
    Y = ginibre(np.random.default_rng(0), n)
    lhs = Phi.apply_amplified(a * X + b * Y, k)
    rhs = a * Phi.apply_amplified(X, k) + b * Phi.apply_amplified(Y, k)
    assert hs_norm(lhs - rhs) <= 1e-8 * max(abs(a) + abs(b), 1) * (hs_norm(X) + hs_norm(Y) + 1)


@given(st.lists(finite, min_size=1, max_size=6))
@settings(max_examples=50)
def test_float_json_round_trip_bit_exact(xs):
    row = [[x, -x] for x in xs]
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(np.array([
        [complex(a, b) for a, b in row]
    ])))))
    assert np.array_equal(back, np.array([[complex(a, b) for a, b in row]]))


@given(square())
@settings(max_examples=25)
def test_defect_of_cp_map_hermitian(X):
    Phi = sample_utp_cp(X.shape[0], seed=2) if X.shape[0] in (2, 3) else None
    if Phi is None:
        return
    from kslab.certify import ks_defect

    D = ks_defect(Phi, X)
    assert hs_norm(D - dagger(D)) < 1e-9 * max(hs_norm(X) ** 2, 1)


# -- closure properties of the certified classes ----------------------------


def test_convex_mix_of_cp_maps_stays_ks_clean():
    A = sample_utp_cp(2, seed=31)
    B = sample_utp_cp(2, seed=32)
    for w in (0.25, 0.5, 0.75):
        M = mix([(w, A), (1 - w, B)])
        assert falsify_ks(M, 1, FAST).verdict == "NoViolationFound"


def test_unitary_sandwich_preserves_ks():
    # defect of the sandwich is a unitary conjugate of the base defect
    rng = np.random.default_rng(11)
    Phi = reduction(2, 0.6)  # certified KS (below the 2/3 boundary)
    for _ in range(3):
        S = unitary_sandwich(Phi, haar_unitary(rng, 2), haar_unitary(rng, 2))
        assert falsify_ks(S, 1, FAST).verdict == "NoViolationFound"


def test_ks_implies_phi_k_on_samples():
    # maps that pass the k-KS falsifier also pass the partial-trace
    # domination check at the same k
    for seed in (41, 42, 43):
        Phi = sample_utp_cp(2, seed=seed)
        for k in (1, 2):
            assert falsify_ks(Phi, k, FAST).verdict == "NoViolationFound"
            assert check_phi_k_condition(Phi, k, FAST).verdict == "NoViolationFound"


def test_lambda_minus_bound_stable_under_base_sandwich():
    # sandwiching the base by one unitary on each side keeps the certified
    # region: Lambda^- over U id U* is Lambda^- over the identity
    rng = np.random.default_rng(13)
    U = haar_unitary(rng, 2)
    from kslab.maps import QuantumMap

    base = unitary_sandwich(QuantumMap.identity(2), U, dagger(U))
    M = lambda_minus(base, 2 / 3)
    assert falsify_ks(M, 1, FAST).verdict == "NoViolationFound"
