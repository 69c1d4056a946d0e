"""Closed-form reference results, independent of the Fock-space simulator.

Everything here is written in the package quadrature convention
(``[q, p] = i``, vacuum variance 1/2, ``<q|p> = exp(i p q)/sqrt(2 pi)``).
This module must not import the state machinery; it only shares the
plain :class:`Distribution1D` container.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

from .distributions import Distribution1D

SIGN_DIFFERENCE_MAX_BETA = 12.0


# ---------------------------------------------------------------------------
# matrix-inversion resource amplitudes


def _D(gamma: float, lam: float, s: float) -> float:
    return 1.0 + (gamma * lam * s) ** 2


def amplitude_Ai(qR, qtR, gamma: float, lam: float, s: float):
    """Joint q-amplitude of two resource modes after exp(i gamma lam p_R p_S).

    Each resource starts as (pi s)^(-1/4) exp(-p^2/(2 s)).  Integrating over
    both momenta gives, with D = 1 + gamma^2 lam^2 s^2,

        A(q, q~) = sqrt(s / (pi D)) exp(-(s (q^2 + q~^2) + 2 i s^2 gamma lam q q~) / (2 D)),

    normalised so that the integral of |A|^2 over the plane is 1.  The
    prefactor is positive for either sign of lam.
    """
    if lam == 0:
        raise ZeroDivisionError("amplitude prefactor is singular at lambda = 0")
    if s <= 0:
        raise ValueError("s must be positive")
    q = np.asarray(qR, dtype=float)
    qt = np.asarray(qtR, dtype=float)
    d = _D(gamma, lam, s)
    expo = -(s * (q * q + qt * qt) + 2j * s * s * gamma * lam * q * qt) / (2 * d)
    return math.sqrt(s / (math.pi * d)) * np.exp(expo)


def ideal_phase(qR, qtR, gamma: float, lam: float):
    """Large-s limit of the amplitude phase: exp(-i q q~ / (gamma lam))."""
    return np.exp(-1j * np.asarray(qR) * np.asarray(qtR) / (gamma * lam))


def joint_density(qR, qtR, weights, lambdas, gamma: float, s: float):
    """sum_i |beta_i|^2 |A_i(q, q~)|^2 (branches are orthogonal in the data register)."""
    out = 0.0
    for w, lam in zip(weights, lambdas):
        out = out + w * np.abs(amplitude_Ai(qR, qtR, gamma, lam, s)) ** 2
    return out


# ---------------------------------------------------------------------------
# eigenvalue peaks


def peak_mixture(grid, weights, lambdas, gamma: float, s: float) -> Distribution1D:
    """Normalised sum_i w_i exp(-s (gamma lam_i - q)^2); each peak has variance 1/(2 s)."""
    weights = np.asarray(weights, dtype=float)
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise ValueError("empty spectrum")
    if weights.shape != lambdas.shape:
        raise ValueError("one weight per eigenvalue")
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to 1")
    grid = np.asarray(grid, dtype=float)
    norm = math.sqrt(s / math.pi)
    dens = sum(w * norm * np.exp(-s * (gamma * lam - grid) ** 2) for w, lam in zip(weights, lambdas))
    return Distribution1D(grid, dens)


def resolved(lambdas, gamma: float, s: float) -> bool:
    """False when adjacent peaks sit closer than 3/sqrt(2 s), i.e. three peak widths."""
    lam = np.sort(np.asarray(lambdas, dtype=float))
    if lam.size < 2:
        return True
    return bool(np.all(np.abs(gamma * np.diff(lam)) >= 3 / math.sqrt(2 * s)))


# ---------------------------------------------------------------------------
# distance swap test


def pdist_curve(grid, beta: float, d2_over_n2: float) -> Distribution1D:
    """Test-mode p density exp(-p^2) (2 - 2 sin(sqrt2 p beta) r) / (2 sqrt(pi)), r = D^2/N^2.

    ``beta`` is the q-mean of the bright test mode, so the vacuum-width
    Gaussian needs no rescaling in this convention.
    """
    r = float(d2_over_n2)
    if r < 0:
        raise ValueError("D^2/N^2 must be nonnegative")
    grid = np.asarray(grid, dtype=float)
    dens = np.exp(-grid**2) * (2 - 2 * np.sin(math.sqrt(2) * grid * beta) * r) / (2 * math.sqrt(math.pi))
    if dens.min() < -1e-15 or r > 1:
        raise ValueError(f"density turns negative for D^2/N^2 = {r} > 1")
    return Distribution1D(grid, np.clip(dens, 0, None))


def sign_difference(beta: float) -> float:
    """exp(-beta^2/2) erfi(beta/sqrt2) = (2/sqrt(pi)) F(beta/sqrt2), F the Dawson function.

    scipy's Dawson routine is a rational/continued-fraction scheme, so
    this stays accurate where erfi alone overflows; the product is only
    validated up to beta = 12.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if beta > SIGN_DIFFERENCE_MAX_BETA:
        raise ValueError(f"sign_difference validated only for beta <= {SIGN_DIFFERENCE_MAX_BETA}")
    return float(2 / math.sqrt(math.pi) * special.dawsn(beta / math.sqrt(2)))


def sign_difference_quad(beta: float) -> float:
    """Same quantity by direct integration of (2/sqrt(pi)) int_0^inf exp(-p^2) sin(sqrt2 beta p) dp."""
    # exp(-p^2) is below 1e-60 past p = 12, so a finite sine-weighted rule suffices for every beta
    val, _ = integrate.quad(lambda p: math.exp(-p * p), 0, 12.0, weight="sin", wvar=math.sqrt(2) * beta,
                            epsabs=1e-14, limit=200)
    return 2 / math.sqrt(math.pi) * val


def sign_difference_asymptote(beta: float) -> float:
    """Leading large-beta behaviour sqrt(2) / (sqrt(pi) beta)."""
    return math.sqrt(2) / (math.sqrt(math.pi) * beta)


def curve_sign_difference(dist: Distribution1D) -> float:
    """P(p > 0) - P(p < 0) from a gridded density."""
    w = dist.density * dist.step
    return float(w[dist.grid > 0].sum() - w[dist.grid < 0].sum())


def classical_distance2(u, vs) -> float:
    """|u - sum_i v_i / M|^2."""
    u = np.asarray(u, dtype=complex)
    vs = [np.asarray(v, dtype=complex) for v in vs]
    d = u - sum(vs) / len(vs)
    return float(np.vdot(d, d).real)


def distance_norm2(u, vs) -> float:
    """N^2 = |u|^2 + sum_i |v_i|^2 / M."""
    return float(np.vdot(u, u).real + sum(np.vdot(v, v).real for v in vs) / len(vs))


# ---------------------------------------------------------------------------
# post-selection success rate


def _branch_mass(eps: float, gamma: float, lam: float, s: float, window: str) -> float:
    d = _D(gamma, lam, s)
    sigma = math.sqrt(d / (2 * s))
    lam = abs(lam)
    if window == "rectangular":
        half = math.sqrt(eps * gamma * lam)
        return special.erf(half / (sigma * math.sqrt(2))) ** 2
    if window != "product":
        raise ValueError("window must be 'product' or 'rectangular'")
    c = eps * gamma * lam

    def integrand(q):
        if q == 0.0:
            return 2 / (sigma * math.sqrt(2 * math.pi))
        return 2 * math.exp(-q * q / (2 * sigma**2)) / (sigma * math.sqrt(2 * math.pi)) * \
            special.erf(c / (q * sigma * math.sqrt(2)))

    # the erf factor switches off around q ~ c / sigma; split there and at a few sigma
    knots = sorted({c / sigma, sigma, 4 * sigma})
    val, _ = integrate.quad(integrand, 0, knots[-1], limit=400, points=knots[:-1])
    tail, _ = integrate.quad(integrand, knots[-1], np.inf, limit=200)
    return val + tail


def success_mass(eps: float, gamma: float, lambdas, weights, s: float, window: str = "product",
                 min_lambda: bool = True) -> float:
    """Probability that (q_R, q~_R) falls in the acceptance window.

    ``product``: |q q~| <= eps gamma |lam|; ``rectangular``: both
    |q|, |q~| <= sqrt(eps gamma |lam|).  With ``min_lambda`` the window uses
    the smallest |lam| for every branch (one physical window for all).
    """
    lambdas = np.asarray(lambdas, dtype=float)
    lw = np.min(np.abs(lambdas)) if min_lambda else None
    total = 0.0
    for w, lam in zip(weights, lambdas):
        total += w * _branch_mass_window(eps, gamma, lam, lw, s, window)
    return float(total)


def _branch_mass_window(eps, gamma, lam, lam_window, s, window):
    if lam_window is None:
        return _branch_mass(eps, gamma, lam, s, window)
    # rescale eps so the window matches the shared |lam| while the spread follows lam
    return _branch_mass(eps * lam_window / abs(lam), gamma, lam, s, window)


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    eps: list
    mass: list
    window: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "eps": list(self.eps),
                "mass": list(self.mass), "window": self.window, "params": self.params}


def success_rate_exponent(s: float, gamma: float, lambdas, eps_grid=(0.02, 0.05, 0.1, 0.2),
                          weights=None, window: str = "product") -> ExponentFit:
    """Fit log(success mass) against log(eps) with gamma_eps = gamma / sqrt(eps).

    Scaling gamma this way keeps gamma |lam| s proportional to eps^(-1/2).
    """
    eps = np.asarray(eps_grid, dtype=float)
    if eps.size < 2 or np.unique(eps).size < 2 or np.any(eps <= 0):
        raise ValueError("need at least two distinct positive eps values")
    lambdas = np.asarray(lambdas, dtype=float)
    weights = np.full(lambdas.size, 1 / lambdas.size) if weights is None else np.asarray(weights, float)
    mass = [success_mass(e, gamma / math.sqrt(e), lambdas, weights, s, window) for e in eps]
    slope, icpt = np.polyfit(np.log(eps), np.log(mass), 1)
    return ExponentFit(float(slope), float(icpt), eps.tolist(), [float(m) for m in mass], window,
                       {"s": s, "gamma": gamma, "lambdas": lambdas.tolist(), "weights": weights.tolist()})


# ---------------------------------------------------------------------------
# curve records


@dataclass
class OracleCurve:
    """A named closed-form curve; ``evaluate`` maps a grid to a density or values."""

    name: str
    params: dict
    evaluate: Callable

    def on(self, grid) -> Distribution1D:
        out = self.evaluate(np.asarray(grid, dtype=float))
        if isinstance(out, Distribution1D):
            return out
        return Distribution1D(np.asarray(grid, float), np.asarray(out, float))

    def to_csv(self, grid, column: str = "density") -> str:
        d = self.on(grid)
        return curve_csv(d.grid, d.density, column)


def curve_csv(x: Sequence[float], y: Sequence[float], column: str = "density", xname: str = "x") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([xname, column])
    for a, b in zip(x, y):
        w.writerow([repr(float(a)), repr(float(b))])
    return buf.getvalue()


def fit_json(fit: ExponentFit) -> str:
    return json.dumps(fit.to_dict(), indent=2)
