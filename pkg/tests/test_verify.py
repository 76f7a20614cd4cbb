"""Verification suites: oracle values, modularity checks, report contracts.

The integer oracles (pentagonal recurrence, Eulerian series, double-sum
bracket) are pinned against frozen values and against each other; the
suites themselves must pass end to end; and the report machinery is held
to the exit-code and byte-determinism contracts the CLI relies on.
"""

import json
from fractions import Fraction

import numpy as np
import pytest

from mjforms.jacobigroup import SL2_T, from_sl2, heisenberg
from mjforms.lattice import discriminant_group, lattice
from mjforms.specfun import theta_definite
from mjforms.verify import (
    IDENTITY_IDS,
    ORACLE_TAGS,
    SUITE_IDS,
    CheckRecord,
    SlashWeights,
    VerificationReport,
    check_identity,
    check_modularity,
    eta_tail_coefficients,
    eulerian_f0_coefficients,
    exit_code,
    generate_report,
    gz_bracket_coefficients,
    render_text,
    report_json,
    run_suite,
)

LAT1 = lattice([[1]], "paper-L")
DG1 = discriminant_group(LAT1)
THETA_POINTS = [(0.13 + 1.1j, (0.21 + 0.17j,)), (-0.4 + 0.77j, (0.05 + 0.3j,))]
T1 = from_sl2(SL2_T, 1)


# ---------------------------------------------------------------------------
# integer oracles


def test_eta_tail_frozen_values():
    assert eta_tail_coefficients(14) == [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0, 0]


def test_eulerian_f0_frozen_values():
    want = [1, 1, 0, 1, 1, 1, 0, 2, 1, 2, 1, 2, 1, 3, 2, 3, 3, 3]
    assert eulerian_f0_coefficients(17) == want


def test_bracket_equals_eta_tail_square():
    order = 14
    eta = eta_tail_coefficients(order)
    eta2 = [sum(eta[i] * eta[k - i] for i in range(k + 1)) for k in range(order + 1)]
    assert gz_bracket_coefficients(order) == eta2


# ---------------------------------------------------------------------------
# identity suites


@pytest.mark.parametrize("identity", IDENTITY_IDS)
def test_identity_suites_pass(identity):
    report = check_identity(identity)
    assert report.suite == identity
    assert report.passed, [c.name for c in report.failures]
    assert report.checks
    for check in report.checks:
        assert check.oracle in ORACLE_TAGS
        assert check.tolerance >= 0
    assert "tolerance" in report.meta
    assert "precision" in report.meta


def test_gz_product_two_copies():
    report = check_identity("gz_product", {"copies": 2, "order": 8})
    assert report.passed
    assert report.meta["copies"] == 2


def test_gz_product_rejects_bad_params():
    with pytest.raises(ValueError, match="copies"):
        check_identity("gz_product", {"copies": 0})
    with pytest.raises(ValueError, match="order"):
        check_identity("mock_theta_F0", {"order": 0})


def test_efunction_grid_is_configurable():
    report = check_identity("efunction", {"points": 7, "lo": -1.0, "hi": 1.0})
    assert len(report.checks) == 7
    assert report.passed


def test_unknown_identity_is_a_config_error():
    with pytest.raises(ValueError, match="unknown identity"):
        check_identity("riemann_hypothesis")


def test_negative_tolerance_rejected():
    with pytest.raises(ValueError, match="nonnegative"):
        check_identity("splitting", tol=-1.0)


# ---------------------------------------------------------------------------
# modularity


def _component(elt):
    return lambda tau, z: theta_definite(LAT1, elt, tau, (z[0],))


def _component_vector(tau, z):
    return np.array([theta_definite(LAT1, elt, tau, (z[0],)) for elt in DG1.elements])


def test_modularity_definite_vector_exact_under_T():
    report = check_modularity(
        _component_vector,
        SlashWeights(Fraction(1, 2), LAT1),
        rep="weil",
        gens=[T1],
        points=THETA_POINTS,
        tol=1e-8,
    )
    assert report.passed
    assert all(c.residual < 1e-12 for c in report.checks)


def test_modularity_projective_fits_the_quarter_phase():
    # the half-shift component picks up e(1/4) under tau -> tau + 1; with
    # no representation the exact check must fail and the projective one
    # must recover the constant i
    phi = _component(DG1.elements[1])
    weights = SlashWeights(Fraction(1, 2), LAT1)
    exact = check_modularity(phi, weights, gens=[T1], points=THETA_POINTS, mode="exact")
    assert not exact.passed
    proj = check_modularity(phi, weights, gens=[T1], points=THETA_POINTS, mode="projective")
    assert proj.passed
    constants = [c.expected["constant"] for c in proj.checks if not isinstance(c.expected, str)]
    assert constants and all(abs(c - 1j) < 1e-12 for c in constants)


def test_modularity_wrong_weight_fails():
    report = check_modularity(
        _component_vector,
        SlashWeights(Fraction(3, 2), LAT1),
        rep="weil",
        gens=[from_sl2(((0, -1), (1, 0)), 1)],
        points=THETA_POINTS,
        tol=1e-6,
    )
    assert not report.passed


def test_modularity_builtin_suite_passes():
    report = run_suite("modularity")
    assert report.passed
    names = [c.name for c in report.checks]
    assert any("wrong weight" in n for n in names)
    assert any(n.startswith("definite rank-1") for n in names)
    assert any(n.startswith("completed indefinite") for n in names)


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(gens=[], points=THETA_POINTS), "group element"),
        (dict(gens=[T1], points=[]), "sample point"),
        (dict(gens=[T1], points=THETA_POINTS, mode="best"), "exact.*projective"),
        (dict(gens=[T1], points=THETA_POINTS, tol=0.0), "tol"),
        (dict(gens=[heisenberg((1,), (0,))], points=THETA_POINTS, rep="weil"), "SL2 generators"),
        (dict(gens=[T1], points=THETA_POINTS, rep=[np.eye(2)] * 2), "one representation matrix"),
        (dict(gens=[T1], points=THETA_POINTS, rep="magic"), "unknown representation"),
    ],
)
def test_modularity_config_errors(kwargs, message):
    with pytest.raises(ValueError, match=message):
        check_modularity(_component_vector, SlashWeights(Fraction(1, 2), LAT1), **kwargs)


# ---------------------------------------------------------------------------
# report machinery


def test_generate_report_shape_and_text():
    reports = [run_suite("splitting"), run_suite("gz_product")]
    doc = generate_report(reports)
    assert doc["schema"] == "verify/1"
    assert doc["passed"] is True
    assert doc["counts"]["suites"] == 2
    assert doc["counts"]["checks"] == sum(len(r.checks) for r in reports)
    assert doc["counts"]["failed"] == 0
    assert [s["suite"] for s in doc["suites"]] == ["splitting", "gz_product"]
    assert exit_code(doc) == 0

    text = render_text(doc)
    assert "PASS splitting" in text
    assert text.strip().endswith("0 failed")

    parsed = json.loads(report_json(doc))
    assert parsed == json.loads(report_json(doc))


def test_reports_are_byte_identical_across_runs():
    def build():
        return report_json(generate_report([run_suite("splitting"), run_suite("gz_product")]))

    assert build() == build()


def test_empty_report_trivially_passes():
    doc = generate_report([])
    assert doc["passed"] is True
    assert doc["counts"] == {"suites": 0, "checks": 0, "failed": 0}
    assert exit_code(doc) == 0


def _failing_record():
    return CheckRecord(
        name="synthetic failure",
        inputs={},
        expected=0.0,
        observed=1.0,
        residual=1.0,
        tolerance=1e-6,
        oracle="quadrature",
        passed=False,
    )


def test_failing_suite_flows_to_exit_one():
    doc = generate_report([VerificationReport("synthetic", (_failing_record(),))])
    assert doc["passed"] is False
    assert doc["counts"]["failed"] == 1
    assert exit_code(doc) == 1
    text = render_text(doc)
    assert "FAIL synthetic" in text
    assert "synthetic failure" in text


def test_oracle_tag_vocabulary_is_enforced():
    with pytest.raises(ValueError, match="oracle tag"):
        CheckRecord(
            name="x", inputs={}, expected=0, observed=0,
            residual=0.0, tolerance=0.0, oracle="gut feeling", passed=True,
        )


def test_suite_ids_cover_identities_plus_modularity():
    assert set(SUITE_IDS) == set(IDENTITY_IDS) | {"modularity"}
