import ast
import math
from pathlib import Path

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from cvqml import oracles


def test_oracles_module_is_independent_of_simulator():
    src = Path(oracles.__file__).read_text()
    names = set()
    for node in ast.walk(ast.parse(src)):
        if isinstance(node, ast.ImportFrom):
            names.add(node.module or "")
        elif isinstance(node, ast.Import):
            names.update(a.name for a in node.names)
    assert not any(n.split(".")[-1] in {"fock", "gates", "measurement", "channels", "qml"} for n in names)


@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0])
def test_sign_difference_against_mpmath(beta):
    mpmath.mp.dps = 30
    ref = mpmath.exp(-mpmath.mpf(beta) ** 2 / 2) * mpmath.erfi(mpmath.mpf(beta) / mpmath.sqrt(2))
    assert oracles.sign_difference(beta) == pytest.approx(float(ref), rel=1e-12)


@given(st.floats(0.0, 12.0))
@settings(max_examples=40, deadline=None)
def test_sign_difference_matches_quadrature(beta):
    assert oracles.sign_difference(beta) == pytest.approx(oracles.sign_difference_quad(beta), abs=1e-12)


def test_sign_difference_value_at_four():
    # frozen after computing it two independent ways
    assert oracles.sign_difference(4.0) == pytest.approx(0.2157450297, abs=1e-9)


def test_sign_difference_asymptote():
    b = 12.0
    assert oracles.sign_difference(b) == pytest.approx(oracles.sign_difference_asymptote(b), rel=0.01)


def test_sign_difference_domain():
    with pytest.raises(ValueError):
        oracles.sign_difference(-1.0)
    with pytest.raises(ValueError):
        oracles.sign_difference(12.5)


@given(st.floats(0.0, 1.0), st.floats(0.2, 6.0))
@settings(max_examples=25, deadline=None)
def test_pdist_curve_normalised_and_sign_law(r, beta):
    grid = np.linspace(-9, 9, 9001)
    d = oracles.pdist_curve(grid, beta, r)
    assert d.mass() == pytest.approx(1, abs=1e-9)
    assert oracles.curve_sign_difference(d) == pytest.approx(-oracles.sign_difference(beta) * r, abs=1e-3)


def test_pdist_curve_rejects_invalid_ratio():
    with pytest.raises(ValueError):
        oracles.pdist_curve(np.linspace(-1, 1, 11), 1.0, 1.5)


def test_amplitude_normalised_and_sign_free_modulus():
    q = np.linspace(-8, 8, 801)
    Q, QT = np.meshgrid(q, q, indexing="ij")
    for lam in (0.7, -0.7):
        a = oracles.amplitude_Ai(Q, QT, 1.5, lam, 3.0)
        assert np.sum(np.abs(a) ** 2) * (q[1] - q[0]) ** 2 == pytest.approx(1, abs=1e-8)
    assert np.allclose(np.abs(oracles.amplitude_Ai(Q, QT, 1.5, 0.7, 3.0)),
                       np.abs(oracles.amplitude_Ai(Q, QT, 1.5, -0.7, 3.0)))


def test_amplitude_matches_momentum_integral():
    gamma, lam, s = 1.2, 0.8, 2.0
    q, qt = 0.4, -0.3

    def f(p, pt, part):
        v = (np.exp(-(p * p + pt * pt) / (2 * s)) * np.exp(1j * (gamma * lam * p * pt + p * q + pt * qt))
             / (math.sqrt(math.pi * s) * 2 * math.pi))
        return v.real if part == 0 else v.imag

    lim = 12 * math.sqrt(s)
    re, _ = integrate.dblquad(lambda pt, p: f(p, pt, 0), -lim, lim, -lim, lim, epsabs=1e-10)
    im, _ = integrate.dblquad(lambda pt, p: f(p, pt, 1), -lim, lim, -lim, lim, epsabs=1e-10)
    assert complex(re, im) == pytest.approx(complex(oracles.amplitude_Ai(q, qt, gamma, lam, s)), abs=1e-7)


def test_amplitude_large_s_phase():
    q, qt, g, lam = 0.3, -0.2, 2.0, 1.0
    a = oracles.amplitude_Ai(q, qt, g, lam, 1e5)
    ph = a / abs(a)
    assert ph == pytest.approx(oracles.ideal_phase(q, qt, g, lam), abs=1e-4)


def test_amplitude_rejects_zero_eigenvalue():
    with pytest.raises(ZeroDivisionError):
        oracles.amplitude_Ai(0.0, 0.0, 1.0, 0.0, 1.0)


def test_peak_mixture():
    grid = np.linspace(-10, 10, 4001)
    d = oracles.peak_mixture(grid, [0.25, 0.75], [-1.0, 2.0], 2.0, 4.0)
    assert d.mass() == pytest.approx(1, abs=1e-9)
    assert d.mean() == pytest.approx(2.0 * (0.25 * -1 + 0.75 * 2), abs=1e-9)
    with pytest.raises(ValueError):
        oracles.peak_mixture(grid, [0.5, 0.6], [0, 1], 1, 1)


def test_resolved():
    assert oracles.resolved([-1, 1], 2.0, 4.0)
    assert not oracles.resolved([0.0, 0.1], 1.0, 1.0)


def test_distance_quantities():
    u, vs = [1, 0], [[0, 1]]
    assert oracles.classical_distance2(u, vs) == pytest.approx(2)
    assert oracles.distance_norm2(u, vs) == pytest.approx(2)


@pytest.mark.parametrize("window", ["product", "rectangular"])
def test_success_mass_monotone_in_eps(window):
    m = [oracles.success_mass(e, 5.0, [1.0, 2.0], [0.5, 0.5], 20.0, window) for e in (0.02, 0.05, 0.1)]
    assert 0 < m[0] < m[1] < m[2] < 1


def test_success_exponent_product_window():
    fit = oracles.success_rate_exponent(20.0, 5.0, [1.0, 2.0])
    # frozen after computing it; the shared-window product mass scales as eps^1.33
    assert fit.slope == pytest.approx(1.33989, abs=1e-4)


def test_success_exponent_needs_two_eps():
    with pytest.raises(ValueError):
        oracles.success_rate_exponent(20.0, 5.0, [1.0], eps_grid=(0.1, 0.1))


def test_curve_csv_format():
    text = oracles.curve_csv([0.0, 1.0], [0.5, 0.25])
    assert text.splitlines() == ["x,density", "0.0,0.5", "1.0,0.25"]
