"""Truncated single-mode Fock space: operators, states and expectations.

Every object here is immutable once built. Arrays are flagged read-only so a
state or operator can be shared between threads without copying.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammainc

from .errors import (
    DegenerateStateError,
    DimensionMismatchError,
    InvalidDimensionError,
    NonHermitianError,
    OutOfRangeError,
    TruncationError,
)

DEFAULT_DIM = 64
DEFAULT_HERM_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-10

NORM_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FockSpace:
    """Basis |0>, ..., |dim-1> plus the numeric tolerances used throughout."""

    dim: int = DEFAULT_DIM
    herm_tol: float = DEFAULT_HERM_TOL
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if not isinstance(self.dim, (int, np.integer)) or isinstance(self.dim, bool) \
                or self.dim < 4:
            raise InvalidDimensionError(f"dim must be an integer >= 4, got {self.dim!r}")
        if not self.herm_tol > 0:
            raise ValueError(f"herm_tol must be positive, got {self.herm_tol!r}")
        if not self.tail_tol > 0:
            raise ValueError(f"tail_tol must be positive, got {self.tail_tol!r}")

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.dim)


def make_space(dim: int = DEFAULT_DIM, herm_tol: float = DEFAULT_HERM_TOL,
               tail_tol: float = DEFAULT_TAIL_TOL) -> FockSpace:
    return FockSpace(dim, herm_tol, tail_tol)


def _check_same_space(*objs) -> FockSpace:
    space = objs[0].space
    for obj in objs[1:]:
        if obj.space.dim != space.dim:
            raise DimensionMismatchError(
                f"dimension mismatch: {space.dim} vs {obj.space.dim}")
    return space


@dataclass(frozen=True, eq=False)
class OpMatrix:
    mat: np.ndarray
    space: FockSpace
    hermitian_hint: bool = False

    def __post_init__(self):
        mat = _frozen(self.mat)
        if mat.shape != (self.space.dim, self.space.dim):
            raise DimensionMismatchError(
                f"operator shape {mat.shape} does not match dim {self.space.dim}")
        if self.hermitian_hint:
            dev = float(np.max(np.abs(mat - mat.conj().T)))
            if dev > self.space.herm_tol:
                raise NonHermitianError(f"operator flagged Hermitian deviates by {dev:.3e}")
        object.__setattr__(self, "mat", mat)

    def dag(self) -> OpMatrix:
        return OpMatrix(self.mat.conj().T, self.space, self.hermitian_hint)

    def __matmul__(self, other):
        if isinstance(other, Ket):
            _check_same_space(self, other)
            return Ket(self.mat @ other.amps, self.space, normalized=False)
        if isinstance(other, OpMatrix):
            _check_same_space(self, other)
            return OpMatrix(self.mat @ other.mat, self.space)
        return NotImplemented

    def __add__(self, other: OpMatrix) -> OpMatrix:
        _check_same_space(self, other)
        return OpMatrix(self.mat + other.mat, self.space,
                        self.hermitian_hint and other.hermitian_hint)

    def __sub__(self, other: OpMatrix) -> OpMatrix:
        _check_same_space(self, other)
        return OpMatrix(self.mat - other.mat, self.space,
                        self.hermitian_hint and other.hermitian_hint)

    def __mul__(self, scalar) -> OpMatrix:
        herm = self.hermitian_hint and complex(scalar).imag == 0
        return OpMatrix(self.mat * scalar, self.space, herm)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Ket:
    amps: np.ndarray
    space: FockSpace
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.shape != (self.space.dim,):
            raise DimensionMismatchError(
                f"ket length {amps.shape} does not match dim {self.space.dim}")
        if self.normalized:
            norm = float(np.linalg.norm(amps))
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"ket flagged normalized has norm {norm!r}")
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> Ket:
        norm = self.norm()
        if norm == 0:
            raise DegenerateStateError("cannot normalize the zero vector")
        return Ket(self.amps / norm, self.space)

    def overlap(self, other: Ket) -> complex:
        """<self|other>."""
        _check_same_space(self, other)
        return complex(np.vdot(self.amps, other.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def projector(self) -> DensityOp:
        return DensityOp(np.outer(self.amps, self.amps.conj()), self.space)


@dataclass(frozen=True, eq=False)
class DensityOp:
    mat: np.ndarray
    space: FockSpace
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = _frozen(self.mat)
        dim = self.space.dim
        if mat.shape != (dim, dim):
            raise DimensionMismatchError(
                f"density shape {mat.shape} does not match dim {dim}")
        if self.check:
            herm = float(np.max(np.abs(mat - mat.conj().T)))
            if herm > self.space.herm_tol:
                raise NonHermitianError(f"density matrix not Hermitian (dev {herm:.3e})")
            tr = complex(np.trace(mat))
            if abs(tr - 1.0) > TRACE_TOL:
                raise ValueError(f"density matrix trace {tr!r} != 1")
            lo = float(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0])
            if lo < -PSD_TOL:
                raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "mat", mat)

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.mat)).copy()


def as_density(state: Ket | DensityOp) -> DensityOp:
    return state.projector() if isinstance(state, Ket) else state


# --- operators ---------------------------------------------------------------

@lru_cache(maxsize=32)
def ladder_ops(space: FockSpace) -> tuple[OpMatrix, OpMatrix, OpMatrix]:
    """Annihilation, creation and number operators on the truncated basis."""
    a = np.diag(np.sqrt(np.arange(1, space.dim, dtype=float)), 1)
    adag = a.T.copy()
    n = np.diag(np.arange(space.dim, dtype=float))
    return OpMatrix(a, space), OpMatrix(adag, space), OpMatrix(n, space, True)


@lru_cache(maxsize=32)
def parity_op(space: FockSpace) -> OpMatrix:
    """(-1)^n as a diagonal matrix."""
    return OpMatrix(np.diag((-1.0) ** np.arange(space.dim)), space, True)


def identity(space: FockSpace) -> OpMatrix:
    return OpMatrix(np.eye(space.dim), space, True)


def diagonal_op(space: FockSpace, diag, hermitian_hint: bool = False) -> OpMatrix:
    return OpMatrix(np.diag(np.asarray(diag, dtype=complex)), space, hermitian_hint)


# --- truncation diagnostics -------------------------------------------------

def coherent_tail(alpha: complex, dim: int) -> float:
    """Mass of the untruncated coherent series on n >= dim (Poisson tail)."""
    lam = abs(alpha) ** 2
    if lam == 0:
        return 0.0
    return float(gammainc(dim, lam))


def min_coherent_dim(alpha: complex, tail_tol: float) -> int:
    dim = 1
    while coherent_tail(alpha, dim) > tail_tol:
        dim += 1
    return dim


def max_coherent_radius(dim: int, tail_tol: float) -> float:
    """Largest |alpha| whose coherent series fits in ``dim`` levels."""
    lo, hi = 0.0, math.sqrt(dim)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if coherent_tail(mid, dim) <= tail_tol:
            lo = mid
        else:
            hi = mid
    return lo


def tail_mass(state: Ket, k: int) -> float:
    """Probability carried by the top ``k`` basis levels."""
    if not 1 <= k < state.space.dim:
        raise OutOfRangeError(f"k must satisfy 1 <= k < dim, got {k}")
    return float(np.sum(np.abs(state.amps[-k:]) ** 2))


def unitarity_guard(beta: complex = 0.0, r: float = 0.0) -> int:
    """Rows near the cutoff excluded when checking D or S for unitarity."""
    return int(math.ceil(4 * abs(beta) ** 2 + 4 * math.sinh(r) ** 2 + 8))


# --- states -----------------------------------------------------------------

def fock_state(space: FockSpace, n: int) -> Ket:
    if not 0 <= n < space.dim:
        raise OutOfRangeError(f"Fock level {n} outside 0..{space.dim - 1}")
    amps = np.zeros(space.dim, dtype=complex)
    amps[n] = 1.0
    return Ket(amps, space)


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """exp(-|a|^2/2) a^n / sqrt(n!) for n < dim, no renormalization."""
    alpha = complex(alpha)
    amps = np.empty(dim, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps


def _require_coherent_fit(space: FockSpace, alpha: complex, tail_tol: float | None = None):
    tol = space.tail_tol if tail_tol is None else tail_tol
    tail = coherent_tail(alpha, space.dim)
    if tail > tol:
        need = min_coherent_dim(alpha, tol)
        raise TruncationError(
            f"|alpha|={abs(alpha):.4g} leaves tail mass {tail:.3e} > {tol:.1e} "
            f"beyond dim={space.dim}; need dim >= {need}", min_dim=need)


def coherent_state(space: FockSpace, alpha: complex) -> Ket:
    _require_coherent_fit(space, alpha)
    amps = coherent_amplitudes(alpha, space.dim)
    return Ket(amps / np.linalg.norm(amps), space)


def cat_state(space: FockSpace, alpha: complex, branch: str = "even") -> Ket:
    """Normalized |alpha> + |-alpha> (even) or |alpha> - |-alpha> (odd)."""
    sign = branch_sign(branch)
    alpha = complex(alpha)
    if sign < 0 and alpha == 0:
        raise DegenerateStateError("odd cat state vanishes at alpha = 0")
    lam = abs(alpha) ** 2
    # cat-normalized tail is bounded by the coherent tail over the branch weight
    weight = 0.5 * (1 + sign * math.exp(-2 * lam))
    tail = coherent_tail(alpha, space.dim) / weight if lam else 0.0
    if tail > space.tail_tol:
        need = space.dim
        while coherent_tail(alpha, need) / weight > space.tail_tol:
            need += 1
        raise TruncationError(
            f"cat with |alpha|={abs(alpha):.4g} does not fit in dim={space.dim}; "
            f"need dim >= {need}", min_dim=need)
    amps = coherent_amplitudes(alpha, space.dim)
    keep = (np.arange(space.dim) % 2) == (0 if sign > 0 else 1)
    amps = np.where(keep, amps, 0.0)
    return Ket(amps / np.linalg.norm(amps), space)


def branch_sign(branch: str) -> int:
    if branch in ("even", "+", "plus"):
        return 1
    if branch in ("odd", "-", "minus"):
        return -1
    raise ValueError(f"branch must be 'even' or 'odd', got {branch!r}")


def gaussian_amplitudes(dim: int, beta: complex, zeta: complex) -> np.ndarray:
    """Fock amplitudes of D(beta) S(zeta)|0>, exact up to truncation.

    Uses S(zeta) = exp((zeta* a^2 - zeta a^dag^2) / 2). The state is annihilated
    by cosh(r) a + e^{i theta} sinh(r) a^dag - lambda, which gives a three-term
    recursion seeded with the closed-form vacuum overlap.
    """
    beta = complex(beta)
    zeta = complex(zeta)
    r = abs(zeta)
    ph = cmath.exp(1j * cmath.phase(zeta)) if r > 0 else 1.0 + 0j
    ch, th = math.cosh(r), math.tanh(r)
    bc = beta.conjugate()
    lam = beta + bc * ph * th
    mu = ph * th
    c0 = cmath.exp(-0.5 * abs(beta) ** 2 - 0.5 * bc * bc * ph * th) / math.sqrt(ch)
    out = [0j] * dim
    out[0] = c0
    sq = _sqrt_table(dim)
    prev, cur = 0j, c0
    for k in range(dim - 1):
        nxt = (lam * cur - mu * sq[k] * prev) / sq[k + 1]
        out[k + 1] = nxt
        prev, cur = cur, nxt
    return np.array(out)


@lru_cache(maxsize=16)
def _sqrt_table(dim: int) -> tuple[float, ...]:
    return tuple(math.sqrt(k) for k in range(dim + 1))


def gaussian_tail(dim: int, beta: complex, zeta: complex) -> float:
    amps = gaussian_amplitudes(dim, beta, zeta)
    return max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))


def _require_gaussian_fit(space: FockSpace, beta: complex, zeta: complex) -> np.ndarray:
    amps = gaussian_amplitudes(space.dim, beta, zeta)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if tail > space.tail_tol:
        need = space.dim
        while gaussian_tail(need, beta, zeta) > space.tail_tol and need < 8 * space.dim:
            need *= 2
        raise TruncationError(
            f"Gaussian state (beta={beta:.4g}, |zeta|={abs(zeta):.4g}) leaves tail "
            f"{tail:.3e} beyond dim={space.dim}", min_dim=need)
    return amps


def gaussian_ket(space: FockSpace, beta: complex, zeta: complex) -> Ket:
    amps = _require_gaussian_fit(space, beta, zeta)
    return Ket(amps / np.linalg.norm(amps), space)


def displacement_op(space: FockSpace, beta: complex) -> OpMatrix:
    """exp(beta a^dag - beta* a) by dense scaling-and-squaring.

    Unitary only on the levels below ``dim - unitarity_guard(beta)``.
    """
    _require_coherent_fit(space, beta)
    a, adag, _ = ladder_ops(space)
    beta = complex(beta)
    return OpMatrix(expm(beta * adag.mat - beta.conjugate() * a.mat), space)


def squeeze_op(space: FockSpace, zeta: complex) -> OpMatrix:
    """exp((zeta* a^2 - zeta a^dag^2) / 2)."""
    _require_gaussian_fit(space, 0.0, zeta)
    a, adag, _ = ladder_ops(space)
    zeta = complex(zeta)
    gen = 0.5 * (zeta.conjugate() * a.mat @ a.mat - zeta * adag.mat @ adag.mat)
    return OpMatrix(expm(gen), space)


def squeezed_fock(space: FockSpace, n: int, zeta: complex) -> Ket:
    """S(zeta)|n>, built on a doubled cutoff and checked for leakage."""
    if not 0 <= n < space.dim / 4:
        raise OutOfRangeError(f"squeezed Fock level must satisfy n < dim/4, got {n}")
    _require_gaussian_fit(space, 0.0, zeta)
    big = FockSpace(2 * space.dim, space.herm_tol, space.tail_tol)
    a, adag, _ = ladder_ops(big)
    zeta = complex(zeta)
    gen = 0.5 * (zeta.conjugate() * a.mat @ a.mat - zeta * adag.mat @ adag.mat)
    col = expm(gen)[:, n]
    leak = float(np.sum(np.abs(col[space.dim:]) ** 2))
    if leak > space.tail_tol:
        raise TruncationError(
            f"S(zeta)|{n}> leaks {leak:.3e} beyond dim={space.dim}", min_dim=None)
    amps = col[: space.dim]
    return Ket(amps / np.linalg.norm(amps), space)


# --- expectations -----------------------------------------------------------

def expectation(op: OpMatrix, state: Ket | DensityOp) -> complex:
    """<psi|O|psi> for a ket, Tr[O rho] for a density operator."""
    _check_same_space(op, state)
    if isinstance(state, Ket):
        return complex(np.vdot(state.amps, op.mat @ state.amps))
    return complex(np.einsum("ij,ji->", op.mat, state.mat))
