import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqml import oracles
from cvqml.fock import make_fock
from cvqml.measurement import PostSelectionWindow
from cvqml.qml import (
    ClassicalVector,
    DistanceProblem,
    EncodingBasis,
    SubroutineReport,
    distance_estimate,
    distance_pdf,
    eigen_distinguish,
    encode_vector,
    encoding_complexity_class,
    encoding_gram,
    grover_reflection,
    matrix_invert,
    phase_mark,
)


def test_fock_encoding_roundtrip():
    a = ClassicalVector.unit([1, 2, 0, 1j])
    v = encode_vector(a, EncodingBasis("fock", 2, 2))
    assert np.allclose(v.amps, a.entries)


def test_capacity_check():
    with pytest.raises(ValueError):
        encode_vector(ClassicalVector.unit(np.ones(5)), EncodingBasis("fock", 2, 2))


@given(st.floats(0.3, 1.5), st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_coherent_encoding_gram_matches_overlap(alpha, seed):
    r = np.random.default_rng(seed)
    basis = EncodingBasis("coherent", 2, 2, alpha, cutoff=30)
    a = ClassicalVector.unit(r.normal(size=4))
    b = ClassicalVector.unit(r.normal(size=4))
    fa, fb = encode_vector(a, basis), encode_vector(b, basis)
    na = math.sqrt(encoding_gram(a, a, basis).real)
    nb = math.sqrt(encoding_gram(b, b, basis).real)
    assert fa.overlap(fb) == pytest.approx(encoding_gram(a, b, basis) / (na * nb), abs=1e-8)


def test_coherent_gram_single_mode():
    g = EncodingBasis("coherent", 1, 2, 0.8).gram()
    assert g[0, 1] == pytest.approx(math.exp(-2 * 0.64))


def test_grover_reflection_and_phase_mark():
    psi = make_fock(1, 3)
    r = grover_reflection(psi).mat
    assert np.allclose(r @ psi.amps, -psi.amps)
    m = phase_mark(2, math.pi, (3,)).mat
    assert m[2, 2] == pytest.approx(-1) and m[0, 0] == 1


def test_encoding_complexity_class():
    assert encoding_complexity_class(ClassicalVector.unit(np.ones(16))) == "PolyN_log"
    assert encoding_complexity_class(ClassicalVector.unit(np.eye(16)[0])) == "SqrtN"


def test_report_rejects_negative_residual():
    with pytest.raises(ValueError):
        SubroutineReport("x", residuals={"r": -1.0})


def test_eigen_distinguish_two_peaks():
    A = np.diag([1.0, -1.0])
    dist, est, rep = eigen_distinguish(A, ClassicalVector.unit([1, 1]), 2.0, 4.0, dim_R=60)
    assert rep.residuals["total_variation"] < 1e-3
    assert est == pytest.approx([-1.0, 1.0], abs=0.25)
    assert rep.details["valley_ratio"] < 0.1


def test_eigen_distinguish_shift_direction():
    # a single eigenvalue +1 moves the q peak to -gamma in this convention
    dist, est, _ = eigen_distinguish(np.array([[1.0]]), ClassicalVector.unit([1.0]), 2.0, 4.0, dim_R=60)
    assert dist.mean() == pytest.approx(-2.0, abs=1e-3)
    assert est[0] == pytest.approx(1.0, abs=1e-2)


def test_matrix_invert_direct():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    b = ClassicalVector.unit([1.0, 0.3])
    rho, rep = matrix_invert(A, b, 5.0, 20.0, PostSelectionWindow(0, 0.1))
    assert rep.residuals["joint_total_variation"] < 1e-2
    assert rep.residuals["infidelity"] < 1e-2
    assert 0 < rep.success_probability < 1
    assert rho.trace() == pytest.approx(1)


def test_matrix_invert_sampled_outcome_is_seeded():
    A = np.diag([1.0, 2.0])
    b = ClassicalVector.unit([1, 1])
    _, r1 = matrix_invert(A, b, 5.0, 20.0, q_r=None, rng=3)
    _, r2 = matrix_invert(A, b, 5.0, 20.0, q_r=None, rng=3)
    assert r1.estimates["q_R"] == r2.estimates["q_R"]


def test_distance_problem_validation():
    with pytest.raises(Exception):
        DistanceProblem(ClassicalVector([1, 0]), (ClassicalVector([1, 0, 0]),))


def test_distance_sign_law_with_half_swap_expectation():
    pr = DistanceProblem(ClassicalVector(np.array([1.0, 0])), (ClassicalVector(np.array([0, 1.0])),))
    beta = 2.0
    d = distance_pdf(pr, beta)
    diff = oracles.curve_sign_difference(d)
    law = -oracles.sign_difference(beta) * pr.distance2 / (2 * pr.norm2)
    assert diff == pytest.approx(law, rel=1e-3)


def test_distance_estimate_calibrations():
    pr = DistanceProblem(ClassicalVector(np.array([1.0, 0])), (ClassicalVector(np.array([0, 1.0])),))
    _, rep = distance_estimate(pr, 2.0, shots=0)
    _, rep_u = distance_estimate(pr, 2.0, shots=0, calibration="unit-overlap")
    assert rep.estimates["D2_exact_distribution"] == pytest.approx(2.0, rel=1e-3)
    assert rep_u.estimates["D2_exact_distribution"] == pytest.approx(1.0, rel=1e-3)
    with pytest.raises(ValueError):
        distance_estimate(pr, 2.0, shots=0, calibration="bogus")
