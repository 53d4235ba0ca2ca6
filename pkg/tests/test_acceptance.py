"""Acceptance battery, one test per criterion.

Each test prints a single pass/fail line (visible with -s, and in the
failure report otherwise) and asserts the criterion's verdict. The
battery runs once per session at seed 0.

Known red: criterion 3's upper-endpoint clause. The claimed sufficiency
interval for Lambda^+_a extends above a = 1, but for a > 1 the defect
acquires a negatively-weighted term and both an independent random-search
oracle and the falsifier exhibit witnesses at the upper endpoint (e.g.
transposition base at d = 3: violations for every a > 1.5, while the
upper endpoint sits at ~1.77). The criterion is implemented exactly as
stated and fails honestly; see the decisions ledger for the analysis.
"""

import json

import pytest

from kslab.suite import CRITERIA, run_suite

SEED = 0


@pytest.fixture(scope="module")
def report():
    return run_suite(seed=SEED)


def _record(report, cid):
    rec = next(r for r in report["criteria"] if r["id"] == cid)
    status = "PASS" if rec["passed"] else "FAIL"
    print(f"criterion {cid:>2}: {status}  ({rec['seconds']:.2f}s)  {rec['description']}")
    if not rec["passed"]:
        print(json.dumps(rec["details"], indent=1, default=str)[:2000])
    return rec


def test_suite_covers_all_ten(report):
    assert [r["id"] for r in report["criteria"]] == [c[0] for c in CRITERIA] == list(range(1, 11))


def test_criterion_1_lambda_minus_threshold_bracketing(report):
    rec = _record(report, 1)
    assert rec["passed"], rec["details"]


def test_criterion_2_lambda_plus_transpose_scan(report):
    rec = _record(report, 2)
    assert rec["passed"], rec["details"]


def test_criterion_3_sufficiency_on_random_bases(report):
    rec = _record(report, 3)
    # documented honest failure: every recorded violation sits at the
    # upper (a > 1) endpoint; the bound and lower-endpoint checks are clean
    details = rec["details"]
    assert all(f["check"] == "lambda-plus@upper" for f in details["failures"])
    assert rec["passed"], (
        f"{details['n_failures']}/{details['n_checks']} checks violated, all at "
        "the upper endpoint — the claimed sufficiency interval above a = 1 is "
        "refuted numerically (see module docstring and the decisions ledger)"
    )


def test_criterion_4_depolarizing_projection_identities(report):
    rec = _record(report, 4)
    assert rec["passed"], rec["details"]


def test_criterion_5_hs_contraction_property(report):
    rec = _record(report, 5)
    assert rec["passed"], rec["details"]


def test_criterion_6_positivity_implies_kks(report):
    rec = _record(report, 6)
    assert rec["passed"], rec["details"]


def test_criterion_7_reduction_k_positivity_bracket(report):
    rec = _record(report, 7)
    assert rec["passed"], rec["details"]


def test_criterion_8_decomposition_grids_verify(report):
    rec = _record(report, 8)
    assert rec["passed"], rec["details"]


def test_criterion_9_jordan_and_subunital_inequalities(report):
    rec = _record(report, 9)
    assert rec["passed"], rec["details"]


def test_criterion_10_determinism(report):
    rec = _record(report, 10)
    assert rec["passed"], rec["details"]
    # independent spot check at seed 42, twice, full suite-level records
    a = run_suite(seed=42, filter="determinism")
    b = run_suite(seed=42, filter="determinism")
    for rep in (a, b):
        for r in rep["criteria"]:
            r.pop("seconds")
    assert a == b
