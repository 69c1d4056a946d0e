"""Homodyne measurement on truncated Fock states.

Position wavefunctions of the number states are evaluated with the
normalised three-term recurrence

    psi_{n+1}(x) = sqrt(2/(n+1)) x psi_n(x) - sqrt(n/(n+1)) psi_{n-1}(x),

which stays finite far beyond the point where factorial prefactors overflow.
The momentum representation uses <p|n> = (-i)^n psi_n(p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Distribution1D, total_variation
from .fock import DensityMatrix, FockVector, ModeOperator, apply, partial_trace, quadrature

DEFAULT_POINTS = 2048
DEFAULT_SPAN = 8.0
MASS_TOL = 1e-3


class MeasurementError(ValueError):
    """Grid too narrow or a window without probability mass."""


def hermite_functions(dim: int, x) -> np.ndarray:
    """Array of shape (dim, len(x)) with psi_n(x) for n < dim."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty((dim, x.size))
    out[0] = math.pi ** -0.25 * np.exp(-x * x / 2)
    if dim > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, dim - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def _basis(dim: int, x, quadrature: str) -> np.ndarray:
    h = hermite_functions(dim, x).astype(complex)
    if quadrature == "p":
        h *= ((-1j) ** np.arange(dim))[:, None]
    elif quadrature != "q":
        raise ValueError("quadrature must be 'q' or 'p'")
    return h


@dataclass(frozen=True)
class PostSelectionWindow:
    center: float = 0.0
    half_width: float = 0.1

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def lo(self) -> float:
        return self.center - self.half_width

    @property
    def hi(self) -> float:
        return self.center + self.half_width


def reduced_mode(state, mode: int) -> DensityMatrix:
    return partial_trace(state, [mode])


def default_grid(rho: DensityMatrix, quadrature_name: str, points: int = DEFAULT_POINTS,
                 span: float = DEFAULT_SPAN) -> np.ndarray:
    """``points`` values covering mean +- span standard deviations of the quadrature."""
    dim = rho.dims[0]
    op = quadrature(dim, quadrature_name)
    m = rho.mat / rho.trace()
    mean = float(np.trace(m @ op).real)
    var = float(np.trace(m @ op @ op).real) - mean**2
    sd = math.sqrt(max(var, 1e-6))
    return np.linspace(mean - span * sd, mean + span * sd, points)


def homodyne_pdf(state, mode: int = 0, quadrature: str = "q", grid=None) -> Distribution1D:
    """Outcome density <x| rho_mode |x> on ``grid`` (default: see :func:`default_grid`)."""
    rho = reduced_mode(state, mode)
    if grid is None:
        grid = default_grid(rho, quadrature)
    grid = np.asarray(grid, dtype=float)
    phi = _basis(rho.dims[0], grid, quadrature)
    m = rho.mat / rho.trace()
    dens = np.einsum("mi,mn,ni->i", phi, m, phi.conj()).real
    dens = np.clip(dens, 0.0, None)
    dist = Distribution1D(grid, dens)
    mass = dist.mass()
    if abs(1.0 - mass) > MASS_TOL:
        raise MeasurementError(f"grid captures mass {mass:.6f}; widen or refine it")
    return Distribution1D(grid, dens / mass)


def _support(dim: int) -> float:
    # classical turning point of level dim-1 plus a wide evanescent margin
    return math.sqrt(2 * dim + 1) + 12.0


def window_operator(dim: int, lo: float, hi: float, quadrature: str = "q", nodes: int | None = None) -> np.ndarray:
    """Matrix of the projector onto [lo, hi] in the truncated number basis."""
    s = _support(dim)
    lo, hi = max(lo, -s), min(hi, s)
    if lo == -s and hi == s:
        return np.eye(dim, dtype=complex)
    if hi <= lo:
        return np.zeros((dim, dim), dtype=complex)
    # pieces no wider than the oscillation scale so Gauss-Legendre stays accurate
    pieces = max(1, int(math.ceil((hi - lo) / 0.5)))
    nodes = nodes or (2 * dim + 40)
    t, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, pieces + 1)
    out = np.zeros((dim, dim), dtype=complex)
    for a, b in zip(edges[:-1], edges[1:]):
        x = 0.5 * (b - a) * t + 0.5 * (a + b)
        phi = _basis(dim, x, quadrature)
        out += (phi * (0.5 * (b - a) * w)) @ phi.conj().T
    return 0.5 * (out + out.conj().T)


def _window_prob(state, mode: int, e: np.ndarray) -> float:
    """tr(E rho) on ``mode``; exact for the truncated state since E is the compressed projector."""
    rho = reduced_mode(state, mode)
    return float(np.trace(e @ rho.mat).real / rho.trace())


def _project(state, mode: int, e: np.ndarray):
    """Apply E to ``mode``; returns (normalised state or None, probability).

    The exact projection leaves the truncated space; E rho E keeps its
    in-cutoff part.  The discarded fraction is added to ``leakage``.
    """
    prob = _window_prob(state, mode, e)
    op = ModeOperator((mode,), (state.dims[mode],), e, False, "window")
    out = apply(op, state, renormalize=False)
    kept = out.norm2() / state.norm2() if isinstance(out, FockVector) else out.trace() / state.trace()
    if prob <= 0 or kept <= 0:
        return None, max(prob, 0.0)
    lost = max(0.0, 1.0 - kept / prob)
    leak = 1.0 - (1.0 - out.leakage) * (1.0 - lost)
    if isinstance(out, FockVector):
        return FockVector(out.cutoff, out.amps / math.sqrt(out.norm2()), leak), prob
    return DensityMatrix._trusted(out.cutoff, out.mat / out.trace(), leak), prob


def window_probability(state, mode: int, quadrature: str = "q",
                       window: PostSelectionWindow | None = None) -> float:
    """Probability that a homodyne outcome on ``mode`` lands in ``window``."""
    window = window or PostSelectionWindow()
    return _window_prob(state, mode, window_operator(state.dims[mode], window.lo, window.hi, quadrature))


def postselect_reduced(state, mode: int, quadrature: str = "q", window: PostSelectionWindow | None = None,
                       min_prob: float = 1e-14):
    """Conditional state of the other modes, tr_mode(E rho) / p, and the probability p.

    Unlike :func:`postselect` this is exact within the cutoff, because only
    matrix elements of the window projector between kept levels enter.
    """
    window = window or PostSelectionWindow()
    e = window_operator(state.dims[mode], window.lo, window.hi, quadrature)
    prob = _window_prob(state, mode, e)
    if prob <= min_prob:
        raise MeasurementError(f"window [{window.lo}, {window.hi}] has no probability mass")
    n = state.cutoff.n_modes
    rest = [m for m in range(n) if m != mode]
    if not rest:
        raise ValueError("no modes left after measuring the only mode")
    dims = state.dims
    if isinstance(state, FockVector):
        a = np.moveaxis(state.amps.reshape(dims), mode, 0).reshape(dims[mode], -1)
        red = a.T @ e.T @ a.conj()
    else:
        t = state.mat.reshape(dims + dims)
        t = np.moveaxis(t, [mode, n + mode], [0, 1])
        rd = math.prod(dims[m] for m in rest)
        t = t.reshape(dims[mode], dims[mode], rd, rd)
        red = np.einsum("nm,mnjk->jk", e, t)
    red = red / np.trace(red).real
    return DensityMatrix._trusted(state.cutoff.sub(rest), red, state.leakage), prob


def postselect(state, mode: int, quadrature: str = "q", window: PostSelectionWindow | None = None,
               min_prob: float = 1e-14):
    """Project ``mode`` onto the window and renormalise; returns (state, success probability)."""
    window = window or PostSelectionWindow()
    e = window_operator(state.dims[mode], window.lo, window.hi, quadrature)
    out, prob = _project(state, mode, e)
    if out is None or prob <= min_prob:
        raise MeasurementError(f"window [{window.lo}, {window.hi}] has no probability mass")
    return out, prob


def homodyne_sample(state, mode: int, quadrature: str = "q", rng=None, grid=None):
    """Draw one outcome by inverse CDF and collapse onto the grid cell containing it."""
    rng = np.random.default_rng(rng)
    dist = homodyne_pdf(state, mode, quadrature, grid)
    x = float(np.interp(rng.random(), dist.cdf(), dist.grid))
    h = dist.step / 2
    e = window_operator(state.dims[mode], x - h, x + h, quadrature)
    out, prob = _project(state, mode, e)
    if out is None:
        raise MeasurementError("sampled cell carries no probability")
    return x, out


def sample_outcomes(dist: Distribution1D, n: int, rng=None) -> np.ndarray:
    """Many i.i.d. outcomes from a distribution (no collapse)."""
    rng = np.random.default_rng(rng)
    return np.interp(rng.random(n), dist.cdf(), dist.grid)


__all__ = [
    "Distribution1D", "PostSelectionWindow", "MeasurementError", "hermite_functions",
    "homodyne_pdf", "homodyne_sample", "postselect", "postselect_reduced", "window_probability", "window_operator", "sample_outcomes",
    "total_variation", "default_grid",
]
