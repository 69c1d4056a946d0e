"""Truncated Fock-space states and operators.

Quadrature convention used everywhere in the package::

    q = (a + a^dag) / sqrt(2),   p = (a - a^dag) / (i sqrt(2)),   [q, p] = i

so the vacuum has variance 1/2 in both quadratures.

States are immutable.  Every constructor that truncates an infinite Fock
expansion records the discarded probability mass as ``leakage`` and refuses
to build the state when the mass exceeds ``settings.leakage_threshold``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np


class TruncationError(ValueError):
    """Raised when a state loses too much weight above the Fock cutoff."""


class TruncationWarning(UserWarning):
    pass


class DimensionError(ValueError):
    pass


@dataclass
class Settings:
    dim_cap: int = 2**20
    leakage_threshold: float = 1e-6
    # "raise", "warn" or "ignore"
    leakage_action: str = "raise"


settings = Settings()


def check_leakage(leak: float, tol: float | None = None, what: str = "state") -> None:
    tol = settings.leakage_threshold if tol is None else tol
    if leak <= tol or settings.leakage_action == "ignore":
        return
    msg = f"{what}: truncation leakage {leak:.3e} exceeds threshold {tol:.1e}"
    if settings.leakage_action == "warn":
        warnings.warn(msg, TruncationWarning, stacklevel=3)
    else:
        raise TruncationError(msg)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockCutoff:
    """Per-mode Fock dimensions; mode ``k`` keeps ``|0>..|dims[k]-1>``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise DimensionError("a cutoff needs at least one mode")
        if any(d < 1 for d in dims):
            raise DimensionError(f"mode dimensions must be >= 1, got {dims}")
        if math.prod(dims) > settings.dim_cap:
            raise DimensionError(
                f"total dimension {math.prod(dims)} exceeds cap {settings.dim_cap}"
            )
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return math.prod(self.dims)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    def __add__(self, other: "FockCutoff") -> "FockCutoff":
        return FockCutoff(self.dims + other.dims)

    def sub(self, modes: Sequence[int]) -> "FockCutoff":
        return FockCutoff(tuple(self.dims[m] for m in modes))


def _as_cutoff(c) -> FockCutoff:
    if isinstance(c, FockCutoff):
        return c
    if isinstance(c, (int, np.integer)):
        return FockCutoff((int(c),))
    return FockCutoff(tuple(c))


@dataclass(frozen=True, eq=False)
class FockVector:
    """Pure state on a truncated multimode Fock space (row-major amplitudes)."""

    cutoff: FockCutoff
    amps: np.ndarray
    leakage: float = 0.0
    norm_factors: tuple = field(default=(), compare=False)

    def __post_init__(self):
        cutoff = _as_cutoff(self.cutoff)
        amps = _frozen(np.ravel(self.amps))
        if amps.size != cutoff.total:
            raise DimensionError(f"{amps.size} amplitudes for cutoff {cutoff.dims}")
        n2 = float(np.vdot(amps, amps).real)
        if not (0.0 < n2 <= 1.0 + 1e-9):
            raise ValueError(f"norm^2 must lie in (0, 1], got {n2}")
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "leakage", float(self.leakage))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.cutoff.dims

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def truncation_leakage(self) -> float:
        """Mass lost above the cutoff: recorded at construction plus norm deficit."""
        return self.leakage + max(0.0, 1.0 - self.norm2())

    def tensor_view(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def overlap(self, other: "FockVector") -> complex:
        if other.dims != self.dims:
            raise DimensionError("overlap between states with different cutoffs")
        return complex(np.vdot(self.amps, other.amps))

    def normalized(self) -> "FockVector":
        return FockVector(self.cutoff, self.amps / math.sqrt(self.norm2()), self.leakage)

    def dm(self) -> "DensityMatrix":
        return DensityMatrix._trusted(
            self.cutoff, np.outer(self.amps, self.amps.conj()), self.leakage
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    cutoff: FockCutoff
    mat: np.ndarray
    leakage: float = 0.0
    norm_factors: tuple = field(default=(), compare=False)

    def __post_init__(self):
        cutoff = _as_cutoff(self.cutoff)
        mat = _frozen(self.mat)
        if mat.shape != (cutoff.total, cutoff.total):
            raise DimensionError(f"matrix shape {mat.shape} for cutoff {cutoff.dims}")
        if np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        tr = float(np.trace(mat).real)
        if not (0.0 < tr <= 1.0 + 1e-9):
            raise ValueError(f"trace must lie in (0, 1], got {tr}")
        if np.linalg.eigvalsh(mat).min() < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def _trusted(cls, cutoff, mat, leakage=0.0, norm_factors=()) -> "DensityMatrix":
        # internal constructor for results of checked operations
        obj = object.__new__(cls)
        m = np.array(mat, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        m.setflags(write=False)
        object.__setattr__(obj, "cutoff", _as_cutoff(cutoff))
        object.__setattr__(obj, "mat", m)
        object.__setattr__(obj, "leakage", float(leakage))
        object.__setattr__(obj, "norm_factors", tuple(norm_factors))
        return obj

    @property
    def dims(self) -> tuple[int, ...]:
        return self.cutoff.dims

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def truncation_leakage(self) -> float:
        return self.leakage + max(0.0, 1.0 - self.trace())

    def normalized(self) -> "DensityMatrix":
        return DensityMatrix._trusted(self.cutoff, self.mat / self.trace(), self.leakage)

    def dm(self) -> "DensityMatrix":
        return self


State = Union[FockVector, DensityMatrix]


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Matrix acting on ``modes`` of a larger register (identity elsewhere)."""

    modes: tuple[int, ...]
    dims: tuple[int, ...]
    mat: np.ndarray
    unitary: bool = False
    label: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        modes = tuple(int(m) for m in self.modes)
        dims = tuple(int(d) for d in self.dims)
        if len(modes) != len(dims):
            raise DimensionError("one dimension per mode is required")
        if len(set(modes)) != len(modes):
            raise DimensionError(f"repeated mode index in {modes}")
        mat = _frozen(self.mat)
        n = math.prod(dims)
        if mat.shape != (n, n):
            raise DimensionError(f"operator shape {mat.shape} does not match dims {dims}")
        if self.unitary:
            defect = np.linalg.norm(mat.conj().T @ mat - np.eye(n))
            if defect >= 1e-9:
                raise ValueError(f"operator flagged unitary but ||U^dag U - I|| = {defect:.2e}")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", mat)

    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.modes, self.dims, self.mat.conj().T, self.unitary,
                            self.label + "^dag", dict(self.params))

    def on(self, modes: Sequence[int]) -> "ModeOperator":
        """Same matrix, relabelled to act on other mode indices."""
        return ModeOperator(tuple(modes), self.dims, self.mat, self.unitary, self.label, dict(self.params))

    def __matmul__(self, other: "ModeOperator") -> "ModeOperator":
        if self.modes != other.modes or self.dims != other.dims:
            raise DimensionError("operators must act on the same modes to be multiplied")
        return ModeOperator(
            self.modes, self.dims, self.mat @ other.mat,
            self.unitary and other.unitary, f"{self.label}*{other.label}",
        )


# ---------------------------------------------------------------------------
# single-mode ladder and quadrature matrices


def destroy(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def create(dim: int) -> np.ndarray:
    return destroy(dim).T.copy()


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def quad_q(dim: int) -> np.ndarray:
    a = destroy(dim)
    return (a + a.T) / math.sqrt(2)


def quad_p(dim: int) -> np.ndarray:
    a = destroy(dim)
    return (a - a.T) / (1j * math.sqrt(2))


def quadrature(dim: int, which: str) -> np.ndarray:
    if which == "q":
        return quad_q(dim)
    if which == "p":
        return quad_p(dim)
    raise ValueError(f"quadrature must be 'q' or 'p', got {which!r}")


# ---------------------------------------------------------------------------
# state constructors


def make_fock(n: int, dim: int) -> FockVector:
    if not 0 <= n < dim:
        raise IndexError(f"Fock level {n} outside cutoff {dim}")
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return FockVector(FockCutoff((dim,)), amps)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Unnormalised-by-truncation amplitudes e^{-|a|^2/2} a^n / sqrt(n!)."""
    amps = np.empty(dim, dtype=complex)
    amps[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def _renormalized(amps: np.ndarray, ideal_norm2: float, tol, what: str) -> FockVector:
    kept = float(np.vdot(amps, amps).real)
    leak = max(0.0, 1.0 - kept / ideal_norm2)
    check_leakage(leak, tol, what)
    return FockVector(FockCutoff((amps.size,)), amps / math.sqrt(kept), leak)


def make_coherent(alpha: complex, dim: int, leakage_tol: float | None = None) -> FockVector:
    if dim < 1:
        raise DimensionError("dim must be >= 1")
    return _renormalized(coherent_amplitudes(alpha, dim), 1.0, leakage_tol, f"coherent({alpha})")


def make_cat(alpha: complex, sign: int, dim: int, leakage_tol: float | None = None) -> FockVector:
    """(|alpha> + sign |-alpha>) normalised; ``sign`` is +1 (even) or -1 (odd)."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = coherent_amplitudes(alpha, dim) + sign * coherent_amplitudes(-alpha, dim)
    ideal = 2.0 + sign * 2.0 * math.exp(-2 * abs(alpha) ** 2)
    if ideal <= 0:
        raise ValueError("odd cat with alpha = 0 does not exist")
    return _renormalized(amps, ideal, leakage_tol, f"cat({alpha}, {sign:+d})")


def make_squeezed_ancilla(s: float, dim: int, leakage_tol: float | None = None) -> FockVector:
    """Gaussian resource with p-amplitude ~ exp(-p^2 / (2 s)).

    Probability variances are s/2 in p and 1/(2 s) in q; this is the squeezed
    vacuum with r = ln(s)/2.  ``s > 1`` approximates a q = 0 eigenstate.
    """
    if s <= 0:
        raise ValueError("squeezing scale s must be positive")
    t = math.tanh(math.log(s) / 2)  # = (s - 1) / (s + 1)
    amps = np.zeros(dim, dtype=complex)
    amps[0] = 1.0 / math.sqrt(math.cosh(math.log(s) / 2))
    for m in range(1, (dim + 1) // 2):
        amps[2 * m] = amps[2 * m - 2] * (-t) * math.sqrt((2 * m - 1) / (2 * m))
    return _renormalized(amps, 1.0, leakage_tol, f"squeezed(s={s})")


# ---------------------------------------------------------------------------
# composition


def tensor(a: State, b: State) -> State:
    cutoff = a.cutoff + b.cutoff
    leak = 1.0 - (1.0 - a.leakage) * (1.0 - b.leakage)
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return FockVector(cutoff, np.kron(a.amps, b.amps), leak)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix._trusted(cutoff, np.kron(a.mat, b.mat), leak)
    raise TypeError("tensor needs two states of the same kind")


def tensor_all(*states: State) -> State:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def partial_trace(rho: State, keep: Sequence[int]) -> DensityMatrix:
    """Reduce onto the modes in ``keep`` (output keeps their ascending order)."""
    n = rho.cutoff.n_modes
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one mode")
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"mode index out of range for {n}-mode state")
    if len(keep) == n:
        return rho.dm()
    if isinstance(rho, FockVector):
        # contract the vector with its conjugate; never forms the full projector
        dims = rho.dims
        traced = [m for m in range(n) if m not in keep]
        t = np.moveaxis(rho.amps.reshape(dims), keep, list(range(len(keep))))
        kd = math.prod(dims[k] for k in keep)
        t = t.reshape(kd, -1)
        return DensityMatrix._trusted(rho.cutoff.sub(keep), t @ t.conj().T, rho.leakage)
    rho = rho.dm()
    dims = rho.dims
    t = rho.mat.reshape(dims + dims)
    traced = [m for m in range(n) if m not in keep]
    letters = "abcdefghijklmnopqrstuvwxyz"
    left = list(letters[:n])
    right = list(letters[n:2 * n])
    for m in traced:
        right[m] = left[m]
    out = "".join(left[k] for k in keep) + "".join(right[k] for k in keep)
    red = np.einsum("".join(left) + "".join(right) + "->" + out, t)
    kd = math.prod(dims[k] for k in keep)
    return DensityMatrix._trusted(rho.cutoff.sub(keep), red.reshape(kd, kd), rho.leakage)


def _apply_left(mat: np.ndarray, op_dims, modes, t: np.ndarray, axes_offset: int = 0):
    """Contract ``mat`` into tensor ``t`` along ``modes`` (shifted by offset)."""
    k = len(modes)
    opt = mat.reshape(tuple(op_dims) + tuple(op_dims))
    axes = [m + axes_offset for m in modes]
    res = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(res, list(range(k)), axes)


def _check_op(op: ModeOperator, cutoff: FockCutoff):
    for m, d in zip(op.modes, op.dims):
        if m < 0 or m >= cutoff.n_modes:
            raise DimensionError(f"operator mode {m} not in a {cutoff.n_modes}-mode state")
        if cutoff.dims[m] != d:
            raise DimensionError(f"operator dim {d} != state dim {cutoff.dims[m]} on mode {m}")


def apply(op: ModeOperator, state: State, renormalize: bool = True) -> State:
    """Apply ``op`` (embedded by identity) to a vector or density matrix.

    Non-unitary operators change the norm; with ``renormalize`` the output is
    rescaled to unit norm/trace and the factor appended to ``norm_factors``.
    """
    _check_op(op, state.cutoff)
    dims = state.dims
    if isinstance(state, FockVector):
        t = _apply_left(op.mat, op.dims, op.modes, state.amps.reshape(dims)).ravel()
        n2 = float(np.vdot(t, t).real)
        factors = state.norm_factors
        if not op.unitary and renormalize:
            ref = state.norm2()
            scale = math.sqrt(n2 / ref)
            t = t / scale
            factors = factors + (scale,)
        out = object.__new__(FockVector)
        t.setflags(write=False)
        object.__setattr__(out, "cutoff", state.cutoff)
        object.__setattr__(out, "amps", t)
        object.__setattr__(out, "leakage", state.leakage)
        object.__setattr__(out, "norm_factors", factors)
        return out
    n = len(dims)
    t = state.mat.reshape(dims + dims)
    t = _apply_left(op.mat, op.dims, op.modes, t)
    t = _apply_left(op.mat.conj(), op.dims, op.modes, t, axes_offset=n)
    m = t.reshape(state.mat.shape)
    factors = state.norm_factors
    if not op.unitary and renormalize:
        scale = float(np.trace(m).real) / state.trace()
        m = m / scale
        factors = factors + (scale,)
    return DensityMatrix._trusted(state.cutoff, m, state.leakage, factors)


def apply_all(ops: Sequence[ModeOperator], state: State, renormalize: bool = True) -> State:
    for op in ops:
        state = apply(op, state, renormalize)
    return state


def embed(op: ModeOperator, cutoff) -> np.ndarray:
    """Full matrix of ``op`` on ``cutoff`` (identity on untouched modes)."""
    cutoff = _as_cutoff(cutoff)
    _check_op(op, cutoff)
    eye = np.eye(cutoff.total, dtype=complex).reshape(cutoff.dims + (cutoff.total,))
    return _apply_left(op.mat, op.dims, op.modes, eye).reshape(cutoff.total, cutoff.total)


def expi_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(i t H) for Hermitian H via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def fidelity(a: State, b: State) -> float:
    """Uhlmann fidelity; exact overlap formula when either state is pure."""
    if isinstance(a, FockVector) and isinstance(b, FockVector):
        return abs(a.overlap(b)) ** 2 / (a.norm2() * b.norm2())
    if isinstance(b, FockVector):
        a, b = b, a
    if isinstance(a, FockVector):
        return float(np.real(np.vdot(a.amps, b.mat @ a.amps))) / (a.norm2() * b.trace())
    ra = _sqrtm_psd(a.mat / a.trace())
    ev = np.linalg.eigvalsh(ra @ (b.mat / b.trace()) @ ra)
    return float(np.sum(np.sqrt(np.clip(ev, 0, None))) ** 2)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def trace_distance(a, b) -> float:
    ma = a.dm().mat if hasattr(a, "dm") else np.asarray(a)
    mb = b.dm().mat if hasattr(b, "dm") else np.asarray(b)
    d = ma - mb
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())
