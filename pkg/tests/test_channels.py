import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqml.channels import (
    HermitianObservable,
    TrotterPlan,
    conjugate,
    direct_expA,
    eswap_channel,
    eswap_channel_error,
    expA_pR,
    random_density,
)
from cvqml.fock import DensityMatrix, FockCutoff, FockVector, make_squeezed_ancilla, tensor, trace_distance
from cvqml.gates import fit_loglog_slope


def test_random_density_is_valid(rng):
    r = random_density(5, 2, rng)
    assert r.trace() == pytest.approx(1)
    assert np.linalg.matrix_rank(r.mat, tol=1e-10) == 2


@given(st.floats(-1.0, 1.0), st.integers(0, 2**32 - 1))
@settings(max_examples=20, deadline=None)
def test_eswap_channel_preserves_trace_and_positivity(delta, seed):
    r = np.random.default_rng(seed)
    out = eswap_channel(random_density(3, 3, r), random_density(3, 2, r), delta)
    assert out.trace() == pytest.approx(1, abs=1e-12)
    assert np.linalg.eigvalsh(out.mat).min() > -1e-12


def test_eswap_channel_error_is_second_order(rng):
    rho, sig = random_density(4, 4, rng), random_density(4, 4, rng)
    deltas = [1e-3, 3e-3, 1e-2, 3e-2]
    errs = [eswap_channel_error(rho, sig, d) for d in deltas]
    assert fit_loglog_slope(deltas, errs) == pytest.approx(2.0, abs=0.1)


def test_conjugate_identity_at_zero(rng):
    rho = random_density(3, 3, rng)
    assert np.allclose(conjugate(rho, np.eye(3), 0.0).mat, rho.mat)


def test_observable_validation(rng):
    with pytest.raises(ValueError):
        HermitianObservable(np.array([[0, 1], [0, 0]]))
    rho, sig = random_density(3, 3, rng), random_density(3, 3, rng)
    a = HermitianObservable.from_pair(rho, sig)
    assert np.allclose(a.mat, rho.mat - sig.mat)
    b = HermitianObservable.from_scaled(rho, 2.5)
    assert np.allclose(b.mat, 2.5 * rho.mat)


@pytest.mark.parametrize("gamma,eps,n", [(1.0, 0.3, 4), (0.9, 0.3, 3), (0.05, 0.1, 1)])
def test_trotter_plan_steps(gamma, eps, n):
    st_ = TrotterPlan(gamma, eps).strengths()
    assert len(st_) == n
    assert sum(st_) == pytest.approx(gamma)
    assert max(abs(x) for x in st_) <= eps + 1e-15


def test_trotter_plan_limits():
    with pytest.raises(ValueError):
        TrotterPlan(1.0, 0.0)
    with pytest.raises(OverflowError):
        TrotterPlan(10.0, 1e-3, max_steps=100).strengths()
    assert TrotterPlan(0.0, 0.1).strengths() == []


def test_expA_pR_approaches_direct_exponential(rng):
    rho, sig = random_density(2, 2, rng), random_density(2, 2, rng)
    A = HermitianObservable.from_pair(rho, sig)
    data = FockVector(FockCutoff((2,)), np.array([1, 1j]) / math.sqrt(2))
    state = tensor(data, make_squeezed_ancilla(2.0, 8, leakage_tol=1e-3))
    errs = []
    for eps in (0.2, 0.1):
        r = expA_pR(TrotterPlan(0.4, eps), A, state)
        assert r.min_ancilla_fidelity > 1 - 1e-9
        assert r.copies_rho == r.copies_sigma == r.steps
        errs.append(r.trace_distance)
    assert errs[1] < errs[0]
    direct = direct_expA(A, state, 0.4)
    assert trace_distance(direct, r.target) < 1e-12


def test_expA_requires_decomposition():
    A = HermitianObservable(np.diag([1.0, -1.0]))
    state = tensor(FockVector(FockCutoff((2,)), np.array([1.0, 0.0])), make_squeezed_ancilla(2.0, 6, 1e-2))
    with pytest.raises(ValueError):
        expA_pR(TrotterPlan(0.2, 0.1), A, state)
