"""Density-matrix exponentiation with the exponential-swap gadget.

A data register of dimension N is treated as one truncated mode.  Each
Trotter step tensors in a fresh copy of rho (or sigma), runs the ancilla
gadget C R(+-eps p_R) C with the dual-rail pair in |+>, checks that the
ancillas come back to |+>, and traces the ancillas and the copy away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fock import (
    DensityMatrix,
    DimensionError,
    FockCutoff,
    fidelity,
    partial_trace,
    quad_p,
    tensor_all,
    trace_distance,
)
from .gates import exp_multi_swap_sequence, plus_state, rotation_R_pR, rotation_R_pRpS, swap_matrix

MAX_STEPS = 100_000


@dataclass(frozen=True, eq=False)
class HermitianObservable:
    """A = rho - sigma, A = tr(A) rho', or a bare Hermitian matrix."""

    mat: np.ndarray
    rho: DensityMatrix | None = None
    sigma: DensityMatrix | None = None
    trace_scale: float | None = None

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("observable must be a square matrix")
        if np.max(np.abs(m - m.conj().T)) > 1e-10:
            raise ValueError("observable is not Hermitian")
        if self.rho is not None:
            ref = self.rho.mat - (self.sigma.mat if self.sigma is not None else 0)
            if self.sigma is None:
                ref = ref * (self.trace_scale if self.trace_scale is not None else 1.0)
            if ref.shape != m.shape or np.max(np.abs(ref - m)) > 1e-10:
                raise ValueError("matrix does not match its density-matrix decomposition")
        object.__setattr__(self, "mat", m)

    @classmethod
    def from_pair(cls, rho: DensityMatrix, sigma: DensityMatrix) -> "HermitianObservable":
        if rho.mat.shape != sigma.mat.shape:
            raise DimensionError("rho and sigma must share a dimension")
        return cls(rho.mat - sigma.mat, rho, sigma)

    @classmethod
    def from_scaled(cls, rho_prime: DensityMatrix, trace_a: float) -> "HermitianObservable":
        """A = trace_a * rho' for a positive semidefinite A."""
        return cls(trace_a * rho_prime.mat, rho_prime, None, float(trace_a))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def has_decomposition(self) -> bool:
        return self.rho is not None

    def eigh(self):
        return np.linalg.eigh(self.mat)


@dataclass(frozen=True)
class TrotterPlan:
    """Total strength gamma split into ceil(gamma / epsilon) steps; the last one is shortened."""

    gamma: float
    epsilon: float
    max_steps: int = MAX_STEPS

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    def strengths(self, scale: float = 1.0) -> list[float]:
        """Per-step strengths summing to gamma * scale, each of size <= epsilon."""
        total = abs(self.gamma * scale)
        if total == 0:
            return []
        n = math.ceil(total / self.epsilon - 1e-12)
        if n > self.max_steps:
            raise OverflowError(f"{n} Trotter steps exceed the limit {self.max_steps}")
        sign = math.copysign(1.0, self.gamma * scale)
        out = [self.epsilon] * (n - 1) + [total - self.epsilon * (n - 1)]
        return [sign * x for x in out]

    def steps(self, scale: float = 1.0) -> int:
        return len(self.strengths(scale))


@dataclass(eq=False)
class ChannelResult:
    state: DensityMatrix
    target: DensityMatrix
    trace_distance: float
    steps: int
    copies_rho: int
    copies_sigma: int
    min_ancilla_fidelity: float
    params: dict = field(default_factory=dict)

    @property
    def copies(self) -> int:
        return self.copies_rho + self.copies_sigma

    def to_dict(self) -> dict:
        return {
            "trace_distance": self.trace_distance,
            "steps": self.steps,
            "copies_rho": self.copies_rho,
            "copies_sigma": self.copies_sigma,
            "min_ancilla_fidelity": self.min_ancilla_fidelity,
            **self.params,
        }


# ---------------------------------------------------------------------------
# single exponential-swap channel


def eswap_channel(rho: DensityMatrix, rho_prime: DensityMatrix, delta: float) -> DensityMatrix:
    """tr_2[exp(i delta S) (rho x rho') exp(-i delta S)] computed with the full swap."""
    if rho.mat.shape != rho_prime.mat.shape:
        raise DimensionError("rho and rho' must have the same dimension")
    for r in (rho, rho_prime):
        if abs(r.trace() - 1) > 1e-9:
            raise ValueError("inputs must have unit trace")
    d = rho.mat.shape[0]
    u = math.cos(delta) * np.eye(d * d) + 1j * math.sin(delta) * swap_matrix(d)
    joint = u @ np.kron(rho.mat, rho_prime.mat) @ u.conj().T
    red = np.einsum("ajbj->ab", joint.reshape(d, d, d, d))
    return DensityMatrix._trusted(rho.cutoff, red)


def conjugate(rho: DensityMatrix, h: np.ndarray, t: float) -> DensityMatrix:
    """exp(i t H) rho exp(-i t H)."""
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(1j * t * w)) @ v.conj().T
    return DensityMatrix._trusted(rho.cutoff, u @ rho.mat @ u.conj().T)


def eswap_channel_error(rho: DensityMatrix, rho_prime: DensityMatrix, delta: float) -> float:
    return trace_distance(eswap_channel(rho, rho_prime, delta), conjugate(rho, rho_prime.mat, delta))


# ---------------------------------------------------------------------------
# Trotterised exp(i gamma A p_R) and exp(i gamma A p_R p_S)


def _direct_target(A: HermitianObservable, state: DensityMatrix, gamma: float, resource_dims) -> DensityMatrix:
    w, v = A.eigh()
    vs, ws = [v], [w]
    for d in resource_dims:
        wp, vp = np.linalg.eigh(quad_p(d))
        vs.append(vp)
        ws.append(wp)
    big_v = vs[0]
    lam = ws[0]
    for vv, ww in zip(vs[1:], ws[1:]):
        big_v = np.kron(big_v, vv)
        lam = np.multiply.outer(lam, ww).ravel()
    u = (big_v * np.exp(1j * gamma * lam)) @ big_v.conj().T
    return DensityMatrix._trusted(state.cutoff, u @ state.mat @ u.conj().T)


def _run_gadget_chain(plan: TrotterPlan, A: HermitianObservable, state: DensityMatrix, n_res: int,
                      rotation_factory) -> ChannelResult:
    if not A.has_decomposition:
        raise ValueError("Trotter path needs A = rho - sigma or A = tr(A) rho'")
    if state.cutoff.n_modes != 1 + n_res:
        raise DimensionError(f"state must be (data, {n_res} resource modes)")
    N = A.dim
    if state.dims[0] != N:
        raise DimensionError("data register dimension does not match A")
    res_dims = state.dims[1:]
    scale = A.trace_scale if A.sigma is None and A.trace_scale is not None else 1.0
    strengths = plan.strengths(scale)
    target = _direct_target(A, state, plan.gamma, res_dims)
    plus = plus_state().dm()
    cur = state
    fmin = 1.0
    n_rho = n_sigma = 0
    # register: anc1, anc2, copy, data, resources...
    res_modes = tuple(range(4, 4 + n_res))
    rot_cache: dict = {}
    for eps in strengths:
        branches = [(A.rho, eps)]
        if A.sigma is not None:
            branches.append((A.sigma, -eps))
        for copy, e in branches:
            if e not in rot_cache:
                rot_cache[e] = rotation_factory(e, res_dims, res_modes + (0, 1))
            rot = rot_cache[e]
            seq = exp_multi_swap_sequence(0.0, [N], modes=(0, 1, 2, 3), rotation=rot)
            joint = tensor_all(plus, copy, cur)
            joint = seq.apply(joint)
            fmin = min(fmin, fidelity(plus_state(), partial_trace(joint, [0, 1])))
            cur = partial_trace(joint, [3] + list(res_modes))
            if copy is A.rho:
                n_rho += 1
            else:
                n_sigma += 1
    return ChannelResult(
        cur, target, trace_distance(cur, target), len(strengths), n_rho, n_sigma, fmin,
        {"gamma": plan.gamma, "epsilon": plan.epsilon, "resources": n_res},
    )


def _rot_pR(e, res_dims, modes):
    return rotation_R_pR(e, res_dims[0], modes)


def _rot_pRpS(e, res_dims, modes):
    return rotation_R_pRpS(e, res_dims[0], res_dims[1], modes)


def expA_pR(plan: TrotterPlan, A: HermitianObservable, state) -> ChannelResult:
    """Approximate exp(i gamma A p_R) on a (data, resource) state with fresh copies of rho and sigma."""
    return _run_gadget_chain(plan, A, state.dm(), 1, _rot_pR)


def expA_pRpS(plan: TrotterPlan, A: HermitianObservable, state) -> ChannelResult:
    """Approximate exp(i gamma A p_R p_S) on a (data, R, S) state."""
    return _run_gadget_chain(plan, A, state.dm(), 2, _rot_pRpS)


def direct_expA(A: HermitianObservable, state, gamma: float) -> DensityMatrix:
    """Exact exp(i gamma A p_R [p_S]) applied to (data, resources...)."""
    st = state.dm()
    return _direct_target(A, st, gamma, st.dims[1:])


def random_density(dim: int, rank: int, rng) -> DensityMatrix:
    """Random rank-``rank`` density matrix from a complex Ginibre factor."""
    rng = np.random.default_rng(rng)
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(FockCutoff((dim,)), m / np.trace(m).real)


__all__ = [
    "HermitianObservable", "TrotterPlan", "ChannelResult", "eswap_channel", "eswap_channel_error",
    "conjugate", "expA_pR", "expA_pRpS", "direct_expA", "random_density",
]
