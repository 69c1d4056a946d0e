"""End-to-end subroutines: encoding, Grover primitives, eigenvalue
distinguishing, matrix inversion and the homodyne swap-test distance.

Matrix inversion at realistic squeezing (s ~ 20, gamma ~ 5) spreads the
resource quadratures over |q| ~ 100, far beyond any practical Fock cutoff.
Its direct path therefore represents the two resource modes on a momentum
grid, where exp(i gamma A p_R p_S) is diagonal per eigenvector of A, and
moves to position space with a 2-D FFT.  The Trotter path runs in the Fock
representation at small parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import oracles
from .channels import HermitianObservable, TrotterPlan, direct_expA, expA_pR, expA_pRpS
from .distributions import Distribution1D, total_variation
from .fock import (
    DimensionError,
    FockCutoff,
    FockVector,
    ModeOperator,
    apply,
    make_coherent,
    make_squeezed_ancilla,
    quad_p,
    tensor_all,
)
from .gates import beamsplitter_50_50, exp_multi_swap_sequence, plus_state
from .measurement import PostSelectionWindow, homodyne_pdf, postselect_reduced, sample_outcomes


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True, eq=False)
class ClassicalVector:
    entries: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        e = np.atleast_1d(np.asarray(self.entries, dtype=complex))
        if e.ndim != 1 or e.size == 0:
            raise ValueError("entries must be a nonempty 1-D array")
        if self.normalized and abs(np.vdot(e, e).real - 1) > 1e-12:
            raise ValueError("vector flagged normalized but |a|^2 != 1")
        object.__setattr__(self, "entries", e)

    @classmethod
    def unit(cls, entries) -> "ClassicalVector":
        e = np.asarray(entries, dtype=complex)
        return cls(e / np.linalg.norm(e), True)

    @property
    def N(self) -> int:
        return self.entries.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))

    def unit_vector(self) -> np.ndarray:
        return self.entries / self.norm


@dataclass(frozen=True)
class EncodingBasis:
    """Per-mode basis states: Fock levels 0..d-1, or the coherent pair {|alpha>, |-alpha>}.

    ``cutoff`` is the Fock dimension used to hold each mode (defaults to d
    for the Fock basis).
    """

    kind: str
    n_modes: int
    d: int = 2
    alpha: float = 0.0
    cutoff: int | None = None

    def __post_init__(self):
        if self.kind not in ("fock", "coherent"):
            raise ValueError("kind must be 'fock' or 'coherent'")
        if self.kind == "coherent" and self.d != 2:
            raise ValueError("a coherent pair has exactly two basis states")
        if self.n_modes < 1 or self.d < 1:
            raise ValueError("need at least one mode and one level")

    @property
    def capacity(self) -> int:
        return self.d**self.n_modes

    @property
    def mode_dim(self) -> int:
        if self.cutoff is not None:
            return self.cutoff
        if self.kind == "fock":
            return self.d
        raise ValueError("coherent encoding needs an explicit Fock cutoff")

    def mode_states(self) -> list[np.ndarray]:
        dim = self.mode_dim
        if self.kind == "fock":
            return [np.eye(dim)[k] for k in range(self.d)]
        return [make_coherent(self.alpha, dim).amps, make_coherent(-self.alpha, dim).amps]

    def gram(self) -> np.ndarray:
        """Single-mode Gram matrix of the basis states (exact, not truncated)."""
        if self.kind == "fock":
            return np.eye(self.d)
        o = math.exp(-2 * abs(self.alpha) ** 2)
        return np.array([[1.0, o], [o, 1.0]])


def _digits(x: int, d: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        out.append(x % d)
        x //= d
    return out[::-1]


def encode_vector(a: ClassicalVector, basis: EncodingBasis) -> FockVector:
    """sum_x a_x |x_1> ... |x_n> with x written in base d (most significant mode first)."""
    if a.N > basis.capacity:
        raise ValueError(f"{a.N} entries exceed capacity {basis.capacity} of the encoding basis")
    if not a.normalized and abs(a.norm - 1) > 1e-12:
        raise ValueError("encode_vector needs a normalized vector")
    states = basis.mode_states()
    dim = basis.mode_dim
    amps = np.zeros(dim**basis.n_modes, dtype=complex)
    for x, ax in enumerate(a.entries):
        if ax == 0:
            continue
        v = np.array([1.0 + 0j])
        for dig in _digits(x, basis.d, basis.n_modes):
            v = np.kron(v, states[dig])
        amps += ax * v
    amps /= np.linalg.norm(amps)
    return FockVector(FockCutoff((dim,) * basis.n_modes), amps)


def encoding_gram(a: ClassicalVector, b: ClassicalVector, basis: EncodingBasis) -> complex:
    """Exact <f_a|f_b> before renormalisation, from the single-mode Gram matrix."""
    g = basis.gram()
    out = 0j
    for x, ax in enumerate(a.entries):
        dx = _digits(x, basis.d, basis.n_modes)
        for y, by in enumerate(b.entries):
            dy = _digits(y, basis.d, basis.n_modes)
            out += np.conj(ax) * by * np.prod([g[i, j] for i, j in zip(dx, dy)])
    return complex(out)


def grover_reflection(psi0: FockVector) -> ModeOperator:
    """I - 2 |psi0><psi0| on all modes of psi0."""
    v = psi0.amps / math.sqrt(psi0.norm2())
    mat = np.eye(v.size) - 2 * np.outer(v, v.conj())
    return ModeOperator(tuple(range(psi0.cutoff.n_modes)), psi0.dims, mat, True, "reflection")


def phase_mark(x: int, phi: float, dims: Sequence[int]) -> ModeOperator:
    """I + (e^{i phi} - 1) |x><x| for flat basis index x."""
    dims = tuple(dims)
    n = math.prod(dims)
    if not 0 <= x < n:
        raise IndexError("basis index out of range")
    d = np.ones(n, dtype=complex)
    d[x] = np.exp(1j * phi)
    return ModeOperator(tuple(range(len(dims))), dims, np.diag(d), True, "phase_mark", {"x": x, "phi": phi})


def encoding_complexity_class(a: ClassicalVector, c: float = 2.0) -> str:
    """'PolyN_log' when max |a_x| <= c / sqrt(N), else 'SqrtN'."""
    u = a.unit_vector()
    return "PolyN_log" if np.max(np.abs(u)) <= c / math.sqrt(a.N) + 1e-15 else "SqrtN"


@dataclass(frozen=True, eq=False)
class DistanceProblem:
    u: ClassicalVector
    vs: tuple

    def __post_init__(self):
        vs = tuple(self.vs)
        if len(vs) < 1:
            raise ValueError("need at least one v_i")
        n = self.u.N
        if any(v.N != n for v in vs):
            raise DimensionError("u and every v_i must have the same length")
        object.__setattr__(self, "vs", vs)
        if self.norm2 <= 0:
            raise ValueError("normalisation must be positive")

    @property
    def M(self) -> int:
        return len(self.vs)

    @property
    def N(self) -> int:
        return self.u.N

    @property
    def norm2(self) -> float:
        return oracles.distance_norm2(self.u.entries, [v.entries for v in self.vs])

    @property
    def distance2(self) -> float:
        return oracles.classical_distance2(self.u.entries, [v.entries for v in self.vs])


@dataclass
class SubroutineReport:
    name: str
    estimates: dict = field(default_factory=dict)
    success_probability: float | None = None
    shots: int = 0
    residuals: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.residuals.items():
            if v < 0:
                raise ValueError(f"residual {k} is negative")

    def to_dict(self) -> dict:
        return _plain({
            "name": self.name,
            "estimates": self.estimates,
            "success_probability": self.success_probability,
            "shots": self.shots,
            "residuals": self.residuals,
            "details": self.details,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _as_observable(A) -> HermitianObservable:
    return A if isinstance(A, HermitianObservable) else HermitianObservable(np.asarray(A))


def _spectral_weights(A: HermitianObservable, b: np.ndarray, tol: float = 1e-9):
    """Distinct eigenvalues of A and the weight of b on each eigenspace."""
    w, v = A.eigh()
    c = np.abs(v.conj().T @ b) ** 2
    lams, wts = [], []
    for lam, cc in zip(w, c):
        if lams and abs(lam - lams[-1]) < tol:
            wts[-1] += cc
        else:
            lams.append(float(lam))
            wts.append(float(cc))
    keep = [i for i, x in enumerate(wts) if x > 1e-14]
    return np.array(lams)[keep], np.array(wts)[keep]


# ---------------------------------------------------------------------------
# eigenvalue distinguishing


def _peak_centres(dist: Distribution1D, sigma: float, rel: float = 0.05) -> list[float]:
    d, g = dist.density, dist.grid
    top = d.max()
    idx = [i for i in range(1, d.size - 1) if d[i] >= d[i - 1] and d[i] > d[i + 1] and d[i] > rel * top]
    centres = []
    for i in idx:
        sel = np.abs(g - g[i]) <= 2 * sigma
        centres.append(float((g[sel] * d[sel]).sum() / d[sel].sum()))
    return centres


def eigen_distinguish(A, b: ClassicalVector, gamma: float, s: float, path: str = "direct",
                      dim_R: int = 40, grid=None, epsilon: float = 0.05):
    """Phase-estimation style readout of eigenvalues on one squeezed resource mode.

    exp(i gamma A p_R) translates q_R by -gamma lam on each eigenspace, so
    the simulated density is compared with ``peak_mixture`` at -lam and the
    estimates are lam_hat = -centre / gamma.
    """
    A = _as_observable(A)
    if b.N != A.dim:
        raise DimensionError("b must match the dimension of A")
    bvec = b.unit_vector()
    res = make_squeezed_ancilla(s, dim_R)
    data = FockVector(FockCutoff((A.dim,)), bvec)
    state = tensor_all(data, res)
    copies = 0
    if path == "direct":
        w, v = A.eigh()
        wp, vp = np.linalg.eigh(quad_p(dim_R))
        big = np.kron(v, vp)
        u = (big * np.exp(1j * gamma * np.outer(w, wp).ravel())) @ big.conj().T
        out = apply(ModeOperator((0, 1), state.dims, u, True, "exp(i g A p_R)"), state)
    elif path == "trotter":
        r = expA_pR(TrotterPlan(gamma, epsilon), A, state)
        out, copies = r.state, r.copies
    else:
        raise ValueError("path must be 'direct' or 'trotter'")
    lams, wts = _spectral_weights(A, bvec)
    if grid is None:
        half = gamma * np.max(np.abs(lams)) + 8 / math.sqrt(2 * s)
        grid = np.linspace(-half, half, 2048)
    dist = homodyne_pdf(out, 1, "q", grid)
    ref = oracles.peak_mixture(grid, wts, -lams, gamma, s)
    ref = Distribution1D(ref.grid, ref.density / ref.mass())
    tv = total_variation(dist, ref)
    sigma = 1 / math.sqrt(2 * s)
    centres = _peak_centres(dist, sigma)
    estimates = sorted(-c / gamma for c in centres)
    ok = oracles.resolved(lams, gamma, s)
    valley = None
    if len(centres) >= 2:
        c = sorted(centres)
        sel = (dist.grid > c[0]) & (dist.grid < c[-1])
        valley = float(dist.density[sel].min() / dist.density.max())
    errs = [min(abs(e - l) for l in lams) for e in estimates] if estimates else [float("inf")]
    report = SubroutineReport(
        "eigen_distinguish",
        {"eigenvalues": estimates, "peak_centres": sorted(centres)},
        None, 0,
        {"total_variation": tv, "max_eigenvalue_error": float(max(errs))},
        {"gamma": gamma, "s": s, "path": path, "dim_R": dim_R, "true_eigenvalues": lams.tolist(),
         "weights": wts.tolist(), "resolved": ok, "valley_ratio": valley, "copies": copies,
         "tolerance": 1 / (gamma * math.sqrt(s))},
    )
    return dist, estimates, report


# ---------------------------------------------------------------------------
# matrix inversion


@dataclass
class ResourceGrid:
    """Momentum grid for the two resource modes and its FFT-conjugate position grid."""

    n: int
    dp: float

    @property
    def p(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dp

    @property
    def dq(self) -> float:
        return 2 * math.pi / (self.n * self.dp)

    @property
    def q(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dq

    @classmethod
    def for_params(cls, gamma: float, lam_max: float, s: float) -> "ResourceGrid":
        # cover 8.5 momentum widths and resolve the chirp exp(i g lam p p~) at the edge
        pmax = 8.5 * math.sqrt(s / 2)
        dp = min(0.5 / math.sqrt(s), math.pi / (1.2 * gamma * lam_max * pmax + 1e-300))
        n = int(2 * math.ceil(pmax / dp / 2) * 2)
        return cls(n, dp)


def resource_amplitude_grid(gamma_lam: float, s: float, rg: ResourceGrid) -> np.ndarray:
    """Position amplitude Psi(q, q~) after exp(i gamma lam p p~) on two (pi s)^(-1/4) e^{-p^2/2s} modes.

    Rows index q (first resource mode), columns q~.
    """
    p = rg.p
    phi = (math.pi * s) ** -0.25 * np.exp(-p * p / (2 * s))
    f = phi[:, None] * phi[None, :] * np.exp(1j * gamma_lam * p[:, None] * p[None, :])
    # psi(q) = (2 pi)^{-1/2} sum_p e^{i p q} f(p) dp ; ifft carries e^{+i}
    shifted = np.fft.ifftshift(f)
    g = np.fft.ifft2(shifted) * (rg.n**2) * rg.dp**2 / (2 * math.pi)
    g = np.fft.fftshift(g)
    # grid offset: p_k = (k - n/2) dp, q_j = (j - n/2) dq gives an extra phase that cancels for even n
    return g


def _classical_solution(A: HermitianObservable, b: np.ndarray) -> np.ndarray:
    w, v = A.eigh()
    c = v.conj().T @ b
    if np.any((np.abs(w) < 1e-12) & (np.abs(c) > 1e-12)):
        raise np.linalg.LinAlgError("A is singular on the support of b")
    y = v @ np.where(np.abs(c) > 1e-12, c / np.where(np.abs(w) < 1e-12, 1, w), 0)
    return y / np.linalg.norm(y)


def matrix_invert(A, b: ClassicalVector, gamma: float, s: float,
                  window: PostSelectionWindow | None = None, path: str = "direct",
                  q_r: float | None = 0.0, rng=None, epsilon: float = 0.05, dim_R: int = 14,
                  resource_grid: ResourceGrid | None = None):
    """Solve A y = b by exp(i gamma A p_R p_S), a q_R readout and a q~_R window at 0.

    ``q_r`` is the recorded outcome on the first resource mode.  ``None``
    draws it from its marginal with ``rng``.  The default 0 is the modal
    outcome.  Returns (conditional data state as a density matrix, report).
    """
    A = _as_observable(A)
    window = window or PostSelectionWindow(0.0, 0.1)
    if b.N != A.dim:
        raise DimensionError("b must match the dimension of A")
    bvec = b.unit_vector()
    y = _classical_solution(A, bvec)
    if path == "direct" and resource_grid is not False:
        return _invert_grid(A, bvec, y, gamma, s, window, q_r, rng, resource_grid)
    if path in ("direct", "trotter", "fock"):
        return _invert_fock(A, bvec, y, gamma, s, window, q_r, rng, epsilon, dim_R, path)
    raise ValueError("path must be 'direct' or 'trotter'")


def _invert_grid(A, bvec, y, gamma, s, window, q_r, rng, rg):
    w, v = A.eigh()
    beta = v.conj().T @ bvec
    lam_max = float(np.max(np.abs(w)))
    rg = rg or ResourceGrid.for_params(gamma, lam_max, s)
    q = rg.q
    dq = rg.dq
    amps = [resource_amplitude_grid(gamma * lam, s, rg) for lam in w]
    # joint density of the two outcomes, data register traced out
    joint = sum(abs(bi) ** 2 * np.abs(a) ** 2 for bi, a in zip(beta, amps))
    norm = joint.sum() * dq * dq
    lams, wts = _spectral_weights(A, bvec)
    ref = oracles.joint_density(q[:, None], q[None, :], wts, lams, gamma, s)
    tv = 0.5 * float(np.abs(joint / norm - ref / (ref.sum() * dq * dq)).sum() * dq * dq)

    win = (q >= window.lo) & (q <= window.hi)
    p_window = float(joint[:, win].sum() * dq * dq / norm)
    # conditional data states for every q_R row: rho(q_R) = sum_{q~ in win} chi chi^dag
    chi = np.stack([bi * a[:, win] for bi, a in zip(beta, amps)], axis=-1)  # (nq, nwin, N) eigenbasis
    rho_rows = np.einsum("rki,rkj->rij", chi, chi.conj()) * dq
    row_mass = np.einsum("rii->r", rho_rows).real
    yb = v.conj().T @ y
    fid_rows = np.einsum("i,rij,j->r", yb.conj(), rho_rows, yb).real / np.maximum(row_mass, 1e-300)
    row_p = row_mass / row_mass.sum()
    avg_infid = float(1 - (row_p * fid_rows).sum())

    if q_r is None:
        rng = np.random.default_rng(rng)
        marg = joint.sum(axis=1)
        q_r = float(np.interp(rng.random(), np.cumsum(marg) / marg.sum(), q))
    r = int(np.argmin(np.abs(q - q_r)))
    rho_e = rho_rows[r] / row_mass[r]
    rho = v @ rho_e @ v.conj().T
    infid = float(1 - np.real(np.vdot(y, rho @ y)))
    # oracle prediction for the same outcome, sampled on the same window points
    pred = np.stack([bi * oracles.amplitude_Ai(q[r], q[win], gamma, lam, s) for bi, lam in zip(beta, w)], -1)
    pred_rho = np.einsum("ki,kj->ij", pred, pred.conj())
    pred_rho /= np.trace(pred_rho).real
    oracle_gap = float(0.5 * np.abs(np.linalg.eigvalsh(rho_e - pred_rho)).sum())
    density_qr = float(joint[r].sum() * dq / norm)
    report = SubroutineReport(
        "matrix_invert",
        {"solution": rho @ y, "q_R": q[r]},
        p_window, 0,
        {"infidelity": max(infid, 0.0), "infidelity_outcome_averaged": max(avg_infid, 0.0),
         "joint_total_variation": tv, "oracle_state_trace_distance": oracle_gap},
        {"gamma": gamma, "s": s, "path": "direct", "representation": "momentum grid",
         "grid_points": rg.n, "dp": rg.dp, "dq": dq, "window": [window.lo, window.hi],
         "q_R_marginal_density": density_qr,
         "indefinite_A": bool(np.any(w < 0) and np.any(w > 0))},
    )
    from .fock import DensityMatrix

    return DensityMatrix._trusted(FockCutoff((A.dim,)), rho), report


def _scaled_decomposition(A: HermitianObservable) -> HermitianObservable:
    """A = tr(A) rho' for positive semidefinite A."""
    from .fock import DensityMatrix

    if np.linalg.eigvalsh(A.mat).min() < -1e-12:
        raise ValueError("Trotter path without a rho - sigma decomposition needs A >= 0")
    tr = float(np.trace(A.mat).real)
    return HermitianObservable.from_scaled(DensityMatrix(FockCutoff((A.dim,)), A.mat / tr), tr)


def _invert_fock(A, bvec, y, gamma, s, window, q_r, rng, epsilon, dim_R, path):
    from .fock import DensityMatrix

    res = make_squeezed_ancilla(s, dim_R, leakage_tol=1e-4)
    state = tensor_all(FockVector(FockCutoff((A.dim,)), bvec), res, res)
    copies = 0
    trotter_error = None
    if path == "trotter":
        if not A.has_decomposition:
            A = _scaled_decomposition(A)
        r = expA_pRpS(TrotterPlan(gamma, epsilon), A, state)
        out, copies, trotter_error = r.state, r.copies, r.trace_distance
    else:
        out = direct_expA(A, state, gamma)
    if q_r is None:
        rng = np.random.default_rng(rng)
        d = homodyne_pdf(out, 1, "q")
        q_r = float(sample_outcomes(d, 1, rng)[0])
    # first resource: narrow cell around the recorded outcome; second: the window at 0
    cell = PostSelectionWindow(q_r, window.half_width)
    mid, p1 = postselect_reduced(out, 1, "q", cell)
    fin, p2 = postselect_reduced(mid, 1, "q", window)
    rho = fin.mat
    infid = float(1 - np.real(np.vdot(y, rho @ y)))
    report = SubroutineReport(
        "matrix_invert",
        {"solution": rho @ y, "q_R": q_r},
        p1 * p2, 0,
        {"infidelity": max(infid, 0.0)},
        {"gamma": gamma, "s": s, "path": path, "representation": "fock", "dim_R": dim_R,
         "copies": copies, "trotter_trace_distance": trotter_error,
         "window": [window.lo, window.hi]},
    )
    return DensityMatrix._trusted(FockCutoff((A.dim,)), rho), report


# ---------------------------------------------------------------------------
# distance via homodyne swap test


def index_state(prob: DistanceProblem, dim_I: int) -> np.ndarray:
    """Amplitudes of |Psi> on (index, data): (|0>|u> + sum_i |i>|v_i>/sqrt(M)) / N."""
    if prob.M + 1 > dim_I:
        raise DimensionError(f"M + 1 = {prob.M + 1} exceeds index dimension {dim_I}")
    out = np.zeros((dim_I, prob.N), dtype=complex)
    out[0] = prob.u.entries
    for i, v in enumerate(prob.vs, start=1):
        out[i] = v.entries / math.sqrt(prob.M)
    return out.ravel() / math.sqrt(prob.norm2)


def reference_state(M: int, dim_I: int) -> np.ndarray:
    """(|0> - sum_i |i>/sqrt(M)) / sqrt(2)."""
    out = np.zeros(dim_I, dtype=complex)
    out[0] = 1
    out[1:M + 1] = -1 / math.sqrt(M)
    return out / math.sqrt(2)


def distance_pdf(prob: DistanceProblem, beta: float, dim_t: int = 30, grid=None) -> Distribution1D:
    """Exact p-quadrature density of test mode 1 after the full swap-test circuit."""
    dim_I = prob.M + 1
    N = prob.N
    # modes: anc1, anc2, t1, t2, I, R, data
    dims = (2, 2, dim_t, dim_t, dim_I, dim_I, N)
    t1 = make_coherent(beta / math.sqrt(2), dim_t)
    t2 = np.zeros(dim_t)
    t2[0] = 1
    psi = index_state(prob, dim_I).reshape(dim_I, N)
    phi = reference_state(prob.M, dim_I)
    # (I, data) amplitude with R inserted between them
    ird = np.einsum("id,r->ird", psi, phi).ravel()
    amps = np.kron(np.kron(np.kron(plus_state().amps, t1.amps), t2), ird)
    state = FockVector(FockCutoff(dims), amps, t1.leakage)
    seq = exp_multi_swap_sequence(math.pi / 4, [dim_t, dim_I], modes=(0, 1, 2, 3, 4, 5))
    state = seq.apply(state)
    state = apply(beamsplitter_50_50((dim_t, dim_t), (2, 3)), state)
    if grid is None:
        grid = np.linspace(-7, 7, 2801)
    return homodyne_pdf(state, 2, "p", grid)


def distance_estimate(prob: DistanceProblem, beta: float, shots: int = 100_000, rng=None,
                      dim_t: int = 30, calibration: str = "swap-test"):
    """Estimate D^2 = |u - sum v_i / M|^2 from signs of p on test mode 1.

    The circuit gives P(p>0) - P(p<0) = -sd(beta) <S> with swap expectation
    <S> = D^2 / (2 N^2), so D^2 = -2 N^2 (f+ - f-) / sd(beta) (``"swap-test"``).
    ``"unit-overlap"`` drops the factor 2, i.e. assumes <S> = D^2 / N^2.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    factors = {"swap-test": 2.0, "unit-overlap": 1.0}
    if calibration not in factors:
        raise ValueError(f"calibration must be one of {sorted(factors)}")
    factor = factors[calibration]
    dist = distance_pdf(prob, beta, dim_t)
    sd = oracles.sign_difference(beta)
    exact_diff = oracles.curve_sign_difference(dist)
    n2 = prob.norm2
    d2 = prob.distance2
    law_unit = -sd * d2 / n2
    law_swap = -sd * d2 / (2 * n2)
    est = se = None
    fp = fm = None
    if shots:
        rng = np.random.default_rng(rng)
        x = sample_outcomes(dist, shots, rng)
        fp = float(np.mean(x > 0))
        fm = float(np.mean(x < 0))
        m = fp - fm
        est = -factor * n2 * m / sd
        se = factor * n2 / sd * math.sqrt(max(1 - m * m, 0.0) / shots)
    report = SubroutineReport(
        "distance_estimate",
        {"D2": est, "D2_standard_error": se, "f_plus": fp, "f_minus": fm,
         "exact_sign_difference": exact_diff, "D2_exact_distribution": -factor * n2 * exact_diff / sd},
        None, shots,
        {"D2_abs_error": abs(est - d2) if est is not None else 0.0,
         "law_relative_error_unit_overlap": abs(exact_diff - law_unit) / abs(law_unit) if d2 > 0 else abs(exact_diff),
         "law_relative_error_swap_test": abs(exact_diff - law_swap) / abs(law_swap) if d2 > 0 else abs(exact_diff)},
        {"beta": beta, "dim_t": dim_t, "M": prob.M, "N": prob.N, "norm2": n2, "D2_classical": d2,
         "sign_difference": sd, "calibration": calibration},
    )
    return est, report
