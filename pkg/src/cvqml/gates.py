"""Gates for the exponential-swap gadget and non-Gaussian phase-gate compilation.

Two construction routes exist for most gates.  The *direct* route
exponentiates the generator as a dense matrix; the *sequence* route returns
the elementary factors as a :class:`GateSequence`, which can be applied
factor by factor to registers too large for a dense product.

Number-conserving two-mode products (the controlled swap) are built sector
by sector: within a fixed total photon number the beamsplitter generator is
exponentiated on the complete, untruncated sector and only the final product
is compressed to the cutoff.  Because the conjugated parity is an exact swap,
the compressed operator stays exact for every state inside the cutoff.

Non-Gaussian compilation works with the position and momentum operators
``x = (a + a^dag)/2`` and ``p = (a - a^dag)/(2i)`` (so ``[x, p] = i/2`` and
``x^2 + p^2 = n + 1/2``).  The shift/quartic factorisation of
``exp(i t x1^2 xc^2)`` only closes with this normalisation; in terms of the
package quadratures ``x = q / sqrt(2)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fock import (
    DimensionError,
    FockCutoff,
    FockVector,
    ModeOperator,
    destroy,
    embed,
    expi_hermitian,
)


class RootFindingError(ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


# ---------------------------------------------------------------------------
# GateSequence


def low_energy_indices(dims: Sequence[int], levels: Sequence[int] | None = None) -> np.ndarray:
    """Flat indices of basis states with every mode below ``levels`` (default dim // 2)."""
    dims = tuple(dims)
    levels = tuple(max(1, d // 2) for d in dims) if levels is None else tuple(levels)
    grids = np.meshgrid(*[np.arange(l) for l in levels], indexing="ij")
    return np.ravel_multi_index([g.ravel() for g in grids], dims)


@dataclass
class GateSequence:
    """Ordered elementary factors, first element applied first.

    The block of ``factors`` is repeated ``K`` times; each repetition also
    carries the scalar ``scale`` (used by polynomial-phase blocks whose
    polynomial has a nonzero constant term).
    """

    factors: list
    modes: tuple
    dims: tuple
    K: int = 1
    target: ModeOperator | None = None
    scale: complex = 1.0
    kind: str = "sequence"
    params: dict = field(default_factory=dict)
    levels: tuple | None = None

    def __post_init__(self):
        self.modes = tuple(self.modes)
        self.dims = tuple(self.dims)
        if self.K < 1:
            raise ValueError("K must be >= 1")
        lookup = dict(zip(self.modes, self.dims))
        for f in self.factors:
            for m, d in zip(f.modes, f.dims):
                if lookup.get(m) != d:
                    raise DimensionError(f"factor {f.label} on mode {m} (dim {d}) outside register")
        if self.target is not None and (
            tuple(self.target.modes) != self.modes or tuple(self.target.dims) != self.dims
        ):
            raise DimensionError("target must act on the sequence register")

    def _local(self, op: ModeOperator) -> ModeOperator:
        pos = {m: i for i, m in enumerate(self.modes)}
        return op.on([pos[m] for m in op.modes])

    def block_matrix(self) -> np.ndarray:
        cut = FockCutoff(self.dims)
        out = np.eye(cut.total, dtype=complex)
        for f in self.factors:
            out = embed(self._local(f), cut) @ out
        return self.scale * out

    def product(self) -> np.ndarray:
        return np.linalg.matrix_power(self.block_matrix(), self.K)

    def as_operator(self) -> ModeOperator:
        return ModeOperator(self.modes, self.dims, self.product(), False, self.kind)

    def error(self, levels: Sequence[int] | None = None, product: np.ndarray | None = None) -> float:
        """Operator-norm distance to the target on the low-energy subspace.

        The subspace keeps Fock levels below ``levels`` on every mode
        (default: the sequence's own ``levels``, else dim // 2).
        """
        if self.target is None:
            raise ValueError("sequence has no reference target")
        prod = self.product() if product is None else product
        idx = low_energy_indices(self.dims, levels if levels is not None else self.levels)
        diff = (prod - self.target.mat)[np.ix_(idx, idx)]
        return float(np.linalg.norm(diff, 2))

    def apply(self, state, renormalize: bool = True):
        from .fock import apply

        for _ in range(self.K):
            for f in self.factors:
                state = apply(f, state, renormalize)
        return state

    def to_dict(self, with_error: bool = True) -> dict:
        doc = {
            "kind": self.kind,
            "params": _jsonable(self.params),
            "modes": list(self.modes),
            "dims": list(self.dims),
            "K": self.K,
            "scale": [float(np.real(self.scale)), float(np.imag(self.scale))],
            "factors": [
                {
                    "kind": f.label,
                    "modes": list(f.modes),
                    "dims": list(f.dims),
                    "unitary": bool(f.unitary),
                    "params": _jsonable(f.params),
                }
                for f in self.factors
            ],
        }
        if with_error and self.target is not None:
            doc["target"] = self.target.label
            doc["target_error"] = self.error()
            lv = self.levels or tuple(max(1, d // 2) for d in self.dims)
            doc["error_subspace"] = {"levels_per_mode": list(lv)}
        return doc

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# dual-rail control qubit


def plus_state() -> FockVector:
    """(|01> + |10>)/sqrt(2) on two modes of dimension 2."""
    amps = np.zeros(4, dtype=complex)
    amps[1] = amps[2] = 1 / math.sqrt(2)
    return FockVector(FockCutoff((2, 2)), amps)


def dual_rail_leakage(state, modes: tuple[int, int]) -> float:
    """Probability outside span{|01>, |10>} on the two control modes."""
    from .fock import partial_trace

    red = partial_trace(state.dm(), list(modes)).mat
    if red.shape != (4, 4):
        raise DimensionError("dual-rail modes must have dimension 2")
    return float(max(0.0, red.trace().real - red[1, 1].real - red[2, 2].real))


def _hop(dims: tuple[int, int]) -> np.ndarray:
    """a1 a2^dag + a1^dag a2 on two truncated modes."""
    a1 = np.kron(destroy(dims[0]), np.eye(dims[1]))
    a2 = np.kron(np.eye(dims[0]), destroy(dims[1]))
    return a1 @ a2.conj().T + a1.conj().T @ a2


def rotation_R(theta: float, dims=(2, 2), modes=(0, 1)) -> ModeOperator:
    """exp(i theta (a1 a2^dag + a1^dag a2)); a sigma_x rotation on the dual rail."""
    mat = expi_hermitian(_hop(tuple(dims)), theta)
    return ModeOperator(modes, dims, mat, True, "R", {"theta": theta})


def beamsplitter_50_50(dims=(2, 2), modes=(0, 1)) -> ModeOperator:
    """Balanced beamsplitter with |a, b> -> |(a - b)/sqrt2, (a + b)/sqrt2> on coherent inputs."""
    d1, d2 = dims
    a1 = np.kron(destroy(d1), np.eye(d2))
    a2 = np.kron(np.eye(d1), destroy(d2))
    # exp(pi/4 (a1 a2^dag - a1^dag a2)) = exp(i (pi/4) G) with G Hermitian
    g = -1j * (a1 @ a2.conj().T - a1.conj().T @ a2)
    return ModeOperator(modes, dims, expi_hermitian(g, math.pi / 4), True, "BS50")


# ---------------------------------------------------------------------------
# controlled swap


def _sector_generator(N: int) -> np.ndarray:
    """a_c a_c'^dag - a_c^dag a_c' on the full sector n_c + n_c' = N (basis |n, N-n>)."""
    g = np.zeros((N + 1, N + 1))
    for n in range(1, N + 1):
        # a_c a_c'^dag |n, N-n> = sqrt(n (N-n+1)) |n-1, N-n+1>
        v = math.sqrt(n * (N - n + 1))
        g[n - 1, n] += v
        g[n, n - 1] -= v
    return g


def _sector_rotation(N: int, angle: float) -> np.ndarray:
    # exp(angle * G) for real antisymmetric G, through the Hermitian iG
    return expi_hermitian(-1j * _sector_generator(N), angle)


def _conditional_swap_block(dim: int, control_level: int) -> np.ndarray:
    """exp(-pi/4 G) exp(i pi k n_c) exp(pi/4 G) on (c, c'), sector-exact, compressed."""
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for N in range(2 * dim - 1):
        n = np.arange(N + 1)
        b = _sector_rotation(N, math.pi / 4)
        par = np.exp(1j * math.pi * control_level * n)
        w = b.conj().T @ (par[:, None] * b)
        keep = (n < dim) & (N - n < dim)
        idx = n[keep] * dim + (N - n[keep])
        out[np.ix_(idx, idx)] = w[np.ix_(keep, keep)]
    return out


def controlled_swap(dims=(2, 2, 2), modes=(0, 1, 2)) -> ModeOperator:
    """Controlled swap of modes c, c' conditioned on the control photon number.

    ``dims``/``modes`` are ordered (control, c, c').  Odd control occupation
    swaps, even leaves (c, c') alone; the global phase of both branches is 1.
    """
    dctl, dc, dc2 = dims
    if len(set(modes)) != 3:
        raise DimensionError("control, c and c' must be distinct modes")
    if dc != dc2:
        raise DimensionError("swapped modes must share a Fock dimension")
    blocks = [_conditional_swap_block(dc, k) for k in range(dctl)]
    n = dc * dc
    mat = np.zeros((dctl * n, dctl * n), dtype=complex)
    for k, blk in enumerate(blocks):
        mat[k * n:(k + 1) * n, k * n:(k + 1) * n] = blk
    return ModeOperator(modes, dims, mat, True, "CSWAP")


def controlled_swap_factors(dims=(2, 2, 2), modes=(0, 1, 2)) -> GateSequence:
    """The three truncated factors of the controlled swap, applied in order."""
    dctl, dc, dc2 = dims
    ctl, c, c2 = modes
    a1 = np.kron(destroy(dc), np.eye(dc2))
    a2 = np.kron(np.eye(dc), destroy(dc2))
    g = -1j * (a1 @ a2.conj().T - a1.conj().T @ a2)  # Hermitian, exp(i t g) = exp(t G)
    b = ModeOperator((c, c2), (dc, dc2), expi_hermitian(g, math.pi / 4), True, "BS+", {"angle": math.pi / 4})
    bd = ModeOperator((c, c2), (dc, dc2), expi_hermitian(g, -math.pi / 4), True, "BS-", {"angle": -math.pi / 4})
    kerr = np.exp(1j * math.pi * np.outer(np.arange(dctl), np.arange(dc)).ravel())
    ck = ModeOperator((ctl, c), (dctl, dc), np.diag(kerr), True, "cross-Kerr", {"chi": math.pi})
    target = controlled_swap(dims, modes)
    return GateSequence([b, ck, bd], modes, dims, target=target, kind="controlled_swap_factors")


def swap_matrix(d: int) -> np.ndarray:
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


# ---------------------------------------------------------------------------
# exponential swap


def exp_swap_sequence(theta: float, dim: int, modes=(0, 1, 2, 3)) -> GateSequence:
    """C_S R(theta) C_S on (anc1, anc2, c, c'), as three factors."""
    return exp_multi_swap_sequence(theta, [dim], modes)


def exp_swap(theta: float, dim: int, modes=(0, 1, 2, 3)) -> ModeOperator:
    """Dense exp(i theta S) gadget on (anc1, anc2, c, c'), dims (2, 2, dim, dim)."""
    seq = exp_swap_sequence(theta, dim, modes)
    return ModeOperator(seq.modes, seq.dims, seq.product(), True, "expSWAP", {"theta": theta})


def exp_multi_swap_sequence(theta: float, pair_dims: Sequence[int], modes: Sequence[int] | None = None,
                            rotation: ModeOperator | None = None) -> GateSequence:
    """Gadget for exp(i theta S_cc' S_dd' ...).

    ``modes`` is (anc1, anc2, c, c', d, d', ...); default 0..(1 + 2 * pairs).
    ``rotation`` replaces R(theta) by an operator-valued ancilla rotation
    (it must act on the two ancilla modes, possibly with extra modes).
    """
    npairs = len(pair_dims)
    if modes is None:
        modes = tuple(range(2 + 2 * npairs))
    modes = tuple(modes)
    if len(modes) != 2 + 2 * npairs:
        raise DimensionError("need two ancilla modes plus two modes per pair")
    if len(set(modes)) != len(modes):
        raise ValueError("swap pairs must be disjoint from each other and the ancillas")
    anc1, anc2 = modes[:2]
    dims = [2, 2]
    cs = []
    for k, d in enumerate(pair_dims):
        c, c2 = modes[2 + 2 * k], modes[3 + 2 * k]
        dims += [d, d]
        cs.append(controlled_swap((2, d, d), (anc1, c, c2)))
    rot = rotation_R(theta, (2, 2), (anc1, anc2)) if rotation is None else rotation
    reg_modes, reg_dims = list(modes), list(dims)
    for m, d in zip(rot.modes, rot.dims):
        if m not in reg_modes:
            reg_modes.append(m)
            reg_dims.append(d)
    return GateSequence(cs + [rot] + cs, tuple(reg_modes), tuple(reg_dims),
                        kind="exp_swap", params={"theta": theta, "pairs": npairs})


def exp_multi_swap(theta: float, pair_dims: Sequence[int], modes: Sequence[int] | None = None) -> ModeOperator:
    seq = exp_multi_swap_sequence(theta, pair_dims, modes)
    return ModeOperator(seq.modes, seq.dims, seq.product(), True, "expMultiSWAP",
                        {"theta": theta, "pairs": len(pair_dims)})


def exp_swap_direct(theta: float, pair_dims: Sequence[int]) -> np.ndarray:
    """cos(theta) I + i sin(theta) S_1 (x) S_2 (x) ... on the swapped modes only.

    Basis ordering is (c, c', d, d', ...).
    """
    s = np.array([[1.0]])
    for d in pair_dims:
        s = np.kron(s, swap_matrix(d))
    return math.cos(theta) * np.eye(s.shape[0]) + 1j * math.sin(theta) * s


# ---------------------------------------------------------------------------
# operator-valued ancilla rotations


def _quad_p_eig(dim: int):
    a = destroy(dim)
    return np.linalg.eigh((a - a.T) / (1j * math.sqrt(2)))


def rotation_R_pR(delta: float, dim_R: int, modes=(0, 1, 2)) -> ModeOperator:
    """exp(i delta p_R (a1 a2^dag + a1^dag a2)) on (resource, anc1, anc2)."""
    wp, vp = _quad_p_eig(dim_R)
    wx, vx = np.linalg.eigh(_hop((2, 2)))
    v = np.kron(vp, vx)
    phase = np.exp(1j * delta * np.outer(wp, wx).ravel())
    mat = (v * phase) @ v.conj().T
    return ModeOperator(modes, (dim_R, 2, 2), mat, True, "R(p_R)", {"delta": delta})


def rotation_R_pRpS(gamma: float, dim_R: int, dim_S: int, modes=(0, 1, 2, 3)) -> ModeOperator:
    """exp(i gamma p_R p_S (a1 a2^dag + a1^dag a2)) on (R, S, anc1, anc2)."""
    wr, vr = _quad_p_eig(dim_R)
    ws, vs = _quad_p_eig(dim_S)
    wx, vx = np.linalg.eigh(_hop((2, 2)))
    v = np.kron(np.kron(vr, vs), vx)
    lam = np.multiply.outer(np.multiply.outer(wr, ws), wx).ravel()
    mat = (v * np.exp(1j * gamma * lam)) @ v.conj().T
    return ModeOperator(modes, (dim_R, dim_S, 2, 2), mat, True, "R(p_R p_S)", {"gamma": gamma})


def rotation_generator_pRpS(dim_R: int, dim_S: int) -> np.ndarray:
    """p_R (x) p_S (x) (a1 a2^dag + a1^dag a2), assembled as a dense Kronecker product."""
    a = destroy(dim_R)
    pr = (a - a.T) / (1j * math.sqrt(2))
    b = destroy(dim_S)
    ps = (b - b.T) / (1j * math.sqrt(2))
    return np.kron(np.kron(pr, ps), _hop((2, 2)))


# ---------------------------------------------------------------------------
# non-Gaussian phase gates


def x_op(dim: int) -> np.ndarray:
    """Position operator (a + a^dag)/2 used by the compiler."""
    a = destroy(dim)
    return (a + a.T) / 2


def p_op(dim: int) -> np.ndarray:
    a = destroy(dim)
    return (a - a.T) / 2j


@dataclass(frozen=True)
class PolyPhaseSpec:
    """exp(i gamma P(x)) with P given by ascending coefficients c0 + c1 x + ... ."""

    gamma: float
    coeffs: tuple
    K: int = 1

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if self.order not in (3, 4):
            raise ValueError(f"only cubic and quartic phase gates are supported, got order {self.order}")
        if self.K < 1:
            raise ValueError("K must be >= 1")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)


def _poly_matrix(coeffs, x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=complex)
    for c in reversed(coeffs):
        out = out @ x + c * np.eye(x.shape[0])
    return out


def poly_roots(asc_coeffs) -> np.ndarray:
    """Roots from the eigenvalues of the companion matrix, residual-checked."""
    c = np.asarray(asc_coeffs, dtype=complex)
    k = c.size - 1
    if k < 1 or c[-1] == 0:
        raise RootFindingError("leading coefficient must be nonzero")
    comp = np.zeros((k, k), dtype=complex)
    comp[1:, :-1] = np.eye(k - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    roots = np.linalg.eigvals(comp)
    # relative residual against the size of the individual terms
    powers = roots[:, None] ** np.arange(k + 1)[None, :]
    resid = np.abs(powers @ c) / (np.abs(powers) @ np.abs(c))
    if np.any(resid >= 1e-10):
        raise RootFindingError(f"root residuals too large: {resid}", resid)
    return roots[np.lexsort((roots.imag, roots.real))]


def compile_poly_phase(spec: PolyPhaseSpec, dim: int, mode: int = 0) -> GateSequence:
    """Decompose exp(i gamma P(x)) into K identical blocks of linear factors 1 + g_l x.

    1 + i (gamma/K) P(x) = Q(0) prod_l (1 + g_l x) with -1/g_l its roots.
    ``scale`` records Q(0), which is 1 when P has no constant term.
    """
    x = x_op(dim)
    w, v = np.linalg.eigh(x)
    pvals = np.polynomial.polynomial.polyval(w, spec.coeffs)
    target = ModeOperator((mode,), (dim,), (v * np.exp(1j * spec.gamma * pvals)) @ v.conj().T,
                          True, f"exp(i {spec.gamma} P(x))")
    params = {"gamma": spec.gamma, "coeffs": list(spec.coeffs), "K": spec.K, "x": "(a + a^dag)/2"}
    if spec.is_zero:
        return GateSequence([], (mode,), (dim,), spec.K, target, kind="poly_phase", params=params)
    q = 1j * spec.gamma / spec.K * np.asarray(spec.coeffs, dtype=complex)
    q[0] += 1.0
    roots = poly_roots(q)
    gammas = -1.0 / roots
    factors = [
        ModeOperator((mode,), (dim,), np.eye(dim) + g * x, False, "linear", {"gamma_l": complex(g)})
        for g in gammas
    ]
    params["roots"] = [complex(r) for r in roots]
    return GateSequence(factors, (mode,), (dim,), spec.K, target, complex(q[0]),
                        kind="poly_phase", params=params)


def block_polynomial(spec: PolyPhaseSpec, dim: int) -> np.ndarray:
    """1 + i (gamma/K) P(x) evaluated as a matrix polynomial."""
    return np.eye(dim) + 1j * spec.gamma / spec.K * _poly_matrix(spec.coeffs, x_op(dim))


# --- quartic U_S = exp(i pi H1 Hc), H = x^2 + p^2 = n + 1/2


def harmonic_rotation(angle: float, dim: int, mode: int) -> ModeOperator:
    """exp(i angle (x^2 + p^2)) = exp(i angle (n + 1/2)); angle pi/2 maps x -> p."""
    d = np.exp(1j * angle * (np.arange(dim) + 0.5))
    return ModeOperator((mode,), (dim,), np.diag(d), True, "rot", {"angle": angle})


def quartic_gate(t: float, dim: int, mode: int) -> ModeOperator:
    """exp(i t x^4)."""
    w, v = np.linalg.eigh(x_op(dim))
    return ModeOperator((mode,), (dim,), (v * np.exp(1j * t * w**4)) @ v.conj().T, True,
                        "quartic", {"t": t})


def shift_gate(c: float, dims: tuple[int, int], modes: tuple[int, int]) -> ModeOperator:
    """exp(i c p_1 x_c): translates x_1 by (c/2) x_c."""
    wp, vp = np.linalg.eigh(p_op(dims[0]))
    wx, vx = np.linalg.eigh(x_op(dims[1]))
    v = np.kron(vp, vx)
    mat = (v * np.exp(1j * c * np.outer(wp, wx).ravel())) @ v.conj().T
    return ModeOperator(modes, dims, mat, True, "shift", {"c": c})


def _xx_factor_ops(t: float, dim: int, modes=(0, 1)) -> list:
    """Factors of exp(i t x1^2 xc^2) in application order.

    exp(2i p1 xc) exp(i e x1^4) exp(-4i p1 xc) exp(i e x1^4) exp(2i p1 xc)
    exp(-2i e x1^4) exp(-2i e xc^4), e = t/12.
    """
    m1, mc = modes
    e = t / 12
    dims = (dim, dim)
    return [
        quartic_gate(-2 * e, dim, mc),
        quartic_gate(-2 * e, dim, m1),
        shift_gate(2.0, dims, modes),
        quartic_gate(e, dim, m1),
        shift_gate(-4.0, dims, modes),
        quartic_gate(e, dim, m1),
        shift_gate(2.0, dims, modes),
    ]


def _conjugated(inner: list, rots: list) -> list:
    # R ... R^dag as operators -> application order: R^dag first, R last
    return [r.dagger() for r in rots] + inner + list(reversed(rots))


def _quadratic_products(dim: int):
    x2 = x_op(dim) @ x_op(dim)
    p2 = p_op(dim) @ p_op(dim)
    return x2, p2


def compile_quartic_US(K: int, dim: int, modes=(0, 1), route: str = "compiled",
                       work_dim: int | None = None) -> GateSequence:
    """K-fold Trotter chain for U_S = exp(i pi H1 Hc).

    One block applies exp(i pi/K x1^2 xc^2), then the x1^2 pc^2, p1^2 xc^2 and
    p1^2 pc^2 factors.  With ``route="compiled"`` every factor is built from
    harmonic rotations, two-mode shifts and quartic gates; ``route="trotter"``
    uses the exact exponential of each cross-quadratic term instead.

    Factors are built at ``work_dim`` (default ``dim``); the error is always
    measured on Fock levels below ``dim // 2``.  The shifts displace x1 by
    multiples of xc, so the compiled route needs roughly ``3 * dim`` to keep
    truncation out of the low-energy block.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    w = dim if work_dim is None else int(work_dim)
    if w < dim:
        raise ValueError("work_dim must be >= dim")
    m1, mc = modes
    t = math.pi / K
    if route == "compiled":
        r1 = harmonic_rotation(math.pi / 2, w, m1)
        rc = harmonic_rotation(math.pi / 2, w, mc)
        xx = _xx_factor_ops(t, w, modes)
        block = xx + _conjugated(xx, [rc]) + _conjugated(xx, [r1]) + _conjugated(xx, [r1, rc])
    elif route == "trotter":
        x2, p2 = _quadratic_products(w)
        block = []
        for a, b, name in ((x2, x2, "x1^2 xc^2"), (x2, p2, "x1^2 pc^2"),
                           (p2, x2, "p1^2 xc^2"), (p2, p2, "p1^2 pc^2")):
            block.append(ModeOperator(modes, (w, w), expi_hermitian(np.kron(a, b), t), True,
                                      "cross-quadratic", {"term": name, "t": t}))
    else:
        raise ValueError("route must be 'compiled' or 'trotter'")
    h = np.arange(w) + 0.5
    target = ModeOperator(modes, (w, w), np.diag(np.exp(1j * math.pi * np.outer(h, h).ravel())),
                          True, "exp(i pi H1 Hc)")
    return GateSequence(block, modes, (w, w), K, target, kind="quartic_US",
                        params={"K": K, "route": route, "dim": dim, "work_dim": w,
                                "H": "x^2 + p^2 = n + 1/2"},
                        levels=(max(1, dim // 2),) * 2)


def fit_loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])
