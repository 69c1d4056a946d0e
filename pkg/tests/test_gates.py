import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqml.fock import FockCutoff, FockVector, apply, make_fock, tensor, tensor_all
from cvqml.gates import (
    GateSequence,
    PolyPhaseSpec,
    RootFindingError,
    block_polynomial,
    compile_poly_phase,
    compile_quartic_US,
    controlled_swap,
    controlled_swap_factors,
    exp_multi_swap,
    exp_swap,
    exp_swap_direct,
    fit_loglog_slope,
    harmonic_rotation,
    p_op,
    plus_state,
    poly_roots,
    rotation_R,
    rotation_R_pRpS,
    rotation_generator_pRpS,
    swap_matrix,
    x_op,
)


def _unit(rng, n):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def test_swap_matrix_exchanges_factors(rng):
    a, b = _unit(rng, 3), _unit(rng, 3)
    assert np.allclose(swap_matrix(3) @ np.kron(a, b), np.kron(b, a))


def test_rotation_R_on_dual_rail():
    u = rotation_R(math.pi / 2).mat
    v = np.zeros(4, complex)
    v[1] = 1  # |01>
    out = u @ v
    assert abs(out[2]) == pytest.approx(1)


@pytest.mark.parametrize("dim", [2, 3])
def test_controlled_swap_branches(dim, rng):
    a, b = _unit(rng, dim), _unit(rng, dim)
    u = controlled_swap((2, dim, dim)).mat
    for k, want in ((0, np.kron(a, b)), (1, np.kron(b, a))):
        ctl = np.eye(2)[k]
        got = u @ np.kron(ctl, np.kron(a, b))
        assert abs(np.vdot(np.kron(ctl, want), got)) ** 2 == pytest.approx(1, abs=1e-12)


def test_controlled_swap_factor_product_matches_sector_construction():
    seq = controlled_swap_factors((2, 3, 3))
    low = seq.error(levels=(2, 2, 2))
    assert low < 1e-12


@given(st.floats(-math.pi, math.pi), st.integers(2, 4), st.integers(0, 2**32 - 1))
@settings(max_examples=15, deadline=None)
def test_exp_swap_action(theta, dim, seed):
    r = np.random.default_rng(seed)
    a, b = _unit(r, dim), _unit(r, dim)
    plus = plus_state().amps
    got = exp_swap(theta, dim).mat @ np.kron(plus, np.kron(a, b))
    want = np.kron(plus, math.cos(theta) * np.kron(a, b) + 1j * math.sin(theta) * np.kron(b, a))
    assert abs(np.vdot(want, got)) ** 2 == pytest.approx(1, abs=1e-10)


def test_exp_multi_swap_matches_direct():
    theta = 0.37
    u = exp_multi_swap(theta, [2, 2]).mat
    plus = plus_state().amps
    full = np.kron(plus[:, None], np.eye(16))
    red = full.conj().T @ u @ full
    assert np.allclose(red, exp_swap_direct(theta, [2, 2]), atol=1e-12)


def test_rotation_pRpS_is_exponential_of_generator():
    from cvqml.fock import expi_hermitian

    g = rotation_generator_pRpS(4, 3)
    assert np.allclose(rotation_R_pRpS(0.3, 4, 3).mat, expi_hermitian(g, 0.3), atol=1e-10)


def test_compiler_quadrature_convention():
    d = 10
    h = x_op(d) @ x_op(d) + p_op(d) @ p_op(d)
    assert np.allclose(np.diag(h)[: d - 1], np.arange(d - 1) + 0.5)
    r = harmonic_rotation(math.pi / 2, d, 0).mat
    assert np.allclose((r @ x_op(d) @ r.conj().T)[:6, :6], p_op(d)[:6, :6], atol=1e-12)


@given(st.lists(st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3), min_size=4, max_size=5))
@settings(max_examples=30, deadline=None)
def test_poly_roots_residuals(coeffs):
    roots = poly_roots(coeffs)
    assert roots.size == len(coeffs) - 1
    for r in roots:
        val = sum(c * r**k for k, c in enumerate(coeffs))
        assert abs(val) <= 1e-8 * sum(abs(c) * abs(r) ** k for k, c in enumerate(coeffs))


def test_poly_roots_rejects_zero_leading():
    with pytest.raises(RootFindingError):
        poly_roots([1.0, 2.0, 0.0])


def test_poly_spec_validation():
    with pytest.raises(ValueError):
        PolyPhaseSpec(0.1, (0, 1, 1))
    with pytest.raises(ValueError):
        PolyPhaseSpec(0.1, (0, 0, 0, 1), K=0)


@pytest.mark.parametrize("coeffs", [(0, 0, 0, 1), (0.5, -1, 0.3, 1), (0, 0, 0, 0, 1)])
def test_block_factorisation_is_exact(coeffs):
    spec = PolyPhaseSpec(0.2, coeffs, K=3)
    seq = compile_poly_phase(spec, 12)
    assert np.allclose(seq.block_matrix(), block_polynomial(spec, 12), atol=1e-10)


def test_zero_polynomial_gives_identity():
    seq = compile_poly_phase(PolyPhaseSpec(0.3, (0, 0, 0, 0)), 6)
    assert seq.factors == []
    assert np.allclose(seq.product(), np.eye(6))


def test_cubic_gate_error_slope():
    Ks = [8, 16, 32]
    errs = [compile_poly_phase(PolyPhaseSpec(0.1, (0, 0, 0, 1), K), 16).error() for K in Ks]
    assert errs[0] > errs[1] > errs[2]
    assert fit_loglog_slope(Ks, errs) == pytest.approx(-1.0, abs=0.2)


@pytest.mark.parametrize("route", ["compiled", "trotter"])
def test_quartic_factors_are_unitary_and_block_is_unitary(route):
    seq = compile_quartic_US(2, 6, route=route)
    assert all(f.unitary for f in seq.factors)
    b = seq.block_matrix()
    assert np.allclose(b.conj().T @ b, np.eye(36), atol=1e-9)


def test_quartic_trotter_route_converges_at_large_K():
    # small register and large K keep this cheap; the error is first order in 1/K
    errs = [compile_quartic_US(K, 8, route="trotter").error() for K in (64, 128, 256)]
    assert errs[0] > errs[1] > errs[2]
    assert fit_loglog_slope((64, 128, 256), errs) == pytest.approx(-1.0, abs=0.3)


def test_sequence_apply_matches_product(rng):
    seq = compile_poly_phase(PolyPhaseSpec(0.1, (0, 0, 0, 1), 2), 8)
    v = FockVector(FockCutoff((8,)), _unit(rng, 8))
    out = seq.apply(v, renormalize=False)
    assert np.allclose(out.amps, seq.product() @ v.amps, atol=1e-12)


def test_sequence_json_roundtrip():
    import json

    seq = compile_poly_phase(PolyPhaseSpec(0.1, (0, 0, 0, 1), 4), 8)
    doc = json.loads(seq.to_json())
    assert doc["K"] == 4 and len(doc["factors"]) == 3
    assert doc["target_error"] == pytest.approx(seq.error())


def test_sequence_rejects_foreign_mode():
    from cvqml.fock import DimensionError

    f = harmonic_rotation(0.1, 4, 5)
    with pytest.raises(DimensionError):
        GateSequence([f], (0,), (4,))
