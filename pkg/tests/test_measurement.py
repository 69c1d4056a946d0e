import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from cvqml.distributions import Distribution1D, total_variation
from cvqml.fock import FockCutoff, FockVector, make_coherent, make_fock, make_squeezed_ancilla, tensor
from cvqml.measurement import (
    MeasurementError,
    PostSelectionWindow,
    hermite_functions,
    homodyne_pdf,
    homodyne_sample,
    postselect,
    postselect_reduced,
    sample_outcomes,
    window_operator,
    window_probability,
)


def test_hermite_functions_orthonormal():
    x = np.linspace(-15, 15, 6001)
    h = hermite_functions(30, x)
    gram = h @ h.T * (x[1] - x[0])
    assert np.allclose(gram, np.eye(30), atol=1e-10)


def test_hermite_functions_large_order_stays_finite():
    h = hermite_functions(200, np.linspace(-25, 25, 11))
    assert np.all(np.isfinite(h))


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
@settings(max_examples=15, deadline=None)
def test_coherent_pdf_is_shifted_gaussian(re, im):
    v = make_coherent(complex(re, im), 70)
    grid = np.linspace(-9, 9, 1801)
    for quad, mean in (("q", math.sqrt(2) * re), ("p", math.sqrt(2) * im)):
        d = homodyne_pdf(v, 0, quad, grid)
        ref = np.exp(-(grid - mean) ** 2) / math.sqrt(math.pi)
        assert np.max(np.abs(d.density - ref)) < 1e-8


def test_squeezed_pdf_variances():
    v = make_squeezed_ancilla(4.0, 120)
    grid = np.linspace(-10, 10, 4001)
    assert homodyne_pdf(v, 0, "q", grid).variance() == pytest.approx(1 / 8, rel=1e-6)
    assert homodyne_pdf(v, 0, "p", grid).variance() == pytest.approx(2.0, rel=1e-6)


def test_narrow_grid_raises():
    with pytest.raises(MeasurementError):
        homodyne_pdf(make_coherent(2.0, 30), 0, "q", np.linspace(-1, 1, 101))


def test_marginal_of_product_state():
    a, b = make_coherent(0.5, 20), make_fock(1, 4)
    grid = np.linspace(-8, 8, 1601)
    d = homodyne_pdf(tensor(a, b), 0, "q", grid)
    assert total_variation(d, homodyne_pdf(a, 0, "q", grid)) < 1e-12


def test_vacuum_window_probability_is_erf():
    w = PostSelectionWindow(0.0, 0.1)
    assert window_probability(make_fock(0, 10), 0, "q", w) == pytest.approx(special.erf(0.1), abs=1e-12)


@given(st.floats(-3, 3), st.floats(0.05, 2.0))
@settings(max_examples=20, deadline=None)
def test_window_operator_is_a_positive_contraction(lo, width):
    e = window_operator(12, lo, lo + width)
    w = np.linalg.eigvalsh(e)
    assert w.min() > -1e-12 and w.max() < 1 + 1e-12


def test_partition_windows_sum_to_identity():
    edges = [-np.inf, -1.0, 0.0, 0.7, np.inf]
    tot = sum(window_operator(10, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    assert np.allclose(tot, np.eye(10), atol=1e-10)


def test_postselect_probability_and_collapse():
    v = tensor(make_coherent(0.3, 20), make_fock(0, 8))
    w = PostSelectionWindow(0.0, 0.2)
    out, p = postselect(v, 1, "q", w)
    assert p == pytest.approx(special.erf(0.2), abs=1e-10)
    assert out.dims == v.dims
    red, p2 = postselect_reduced(v, 1, "q", w)
    assert p2 == pytest.approx(p)
    assert np.allclose(red.mat, make_coherent(0.3, 20).dm().mat, atol=1e-10)


def test_postselect_empty_window_raises():
    with pytest.raises(MeasurementError):
        postselect(make_coherent(3.0, 40), 0, "q", PostSelectionWindow(-30.0, 0.1))


def test_window_validation():
    with pytest.raises(ValueError):
        PostSelectionWindow(0.0, 0.0)


def test_sampling_matches_distribution():
    grid = np.linspace(-6, 6, 1201)
    d = Distribution1D(grid, np.exp(-grid**2) / math.sqrt(math.pi))
    x = sample_outcomes(d, 200_000, np.random.default_rng(3))
    assert np.mean(x) == pytest.approx(0, abs=0.01)
    assert np.var(x) == pytest.approx(0.5, abs=0.01)


def test_homodyne_sample_is_reproducible():
    v = make_coherent(0.5, 20)
    x1, _ = homodyne_sample(v, 0, "q", 5)
    x2, _ = homodyne_sample(v, 0, "q", 5)
    assert x1 == x2


def test_distribution_csv_roundtrip():
    grid = np.linspace(-1, 1, 5)
    d = Distribution1D(grid, np.ones(5) / 2)
    back = Distribution1D.from_csv(d.to_csv())
    assert np.array_equal(back.grid, d.grid) and np.array_equal(back.density, d.density)
