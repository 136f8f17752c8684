"""Quadratic su(1,1) generators built from a single bosonic mode.

K+ = a^dag^2 / 2, K- = a^2 / 2, K0 = (n + 1/2) / 2. The commutation relations
hold exactly in the untruncated space; on the truncated basis they fail only
on the top rows, so every identity check takes an explicit guard band.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidDimensionError
from .fock import FockSpace, OpMatrix, diagonal_op, ladder_ops

CASIMIR_CLAIMED = 1.0 / 16.0


@dataclass(frozen=True, eq=False)
class Su11Set:
    k_plus: OpMatrix
    k_minus: OpMatrix
    k_zero: OpMatrix
    casimir: OpMatrix
    space: FockSpace


@dataclass(frozen=True)
class ClosureReport:
    guard: int
    res_k0_kp: float
    res_k0_km: float
    res_km_kp: float
    casimir_dev: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def max_commutator_residual(self) -> float:
        return max(self.res_k0_kp, self.res_k0_km, self.res_km_kp)


def build_su11(space: FockSpace) -> Su11Set:
    if space.dim < 8:
        raise InvalidDimensionError(f"su(1,1) generators need dim >= 8, got {space.dim}")
    _, _, n = ladder_ops(space)
    # a^dag^2 has <m+2|a^dag^2|m> = sqrt((m+1)(m+2)); one rounded sqrt per entry
    # instead of a product of two keeps the commutators at the 1e-13 level
    m = np.arange(space.dim - 2)
    kp = np.zeros((space.dim, space.dim))
    kp[m + 2, m] = 0.5 * np.sqrt((m + 1.0) * (m + 2.0))
    km = kp.conj().T
    k0 = 0.5 * (n.mat + 0.5 * np.eye(space.dim))
    # assembled from the generator matrices, never from a closed-form diagonal
    cas = k0 @ k0 - k0 - kp @ km
    return Su11Set(
        k_plus=OpMatrix(kp, space),
        k_minus=OpMatrix(km, space),
        k_zero=OpMatrix(k0, space, True),
        casimir=OpMatrix(cas, space, True),
        space=space,
    )


def _comm(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def closure_residuals(su: Su11Set, guard: int = 4,
                      casimir_target: float = CASIMIR_CLAIMED) -> ClosureReport:
    """Max-entry residuals of the su(1,1) relations below ``dim - guard``.

    ``casimir_dev`` is measured against ``casimir_target``; the default is the
    value 1/16 asserted for this representation.
    """
    dim = su.space.dim
    if guard < 0 or dim - guard < 4:
        raise ValueError(f"guard must satisfy 0 <= guard and dim - guard >= 4 (dim={dim}, guard={guard})")
    keep = slice(0, dim - guard)
    kp, km, k0 = su.k_plus.mat, su.k_minus.mat, su.k_zero.mat

    def res(m: np.ndarray) -> float:
        return float(np.max(np.abs(m[keep, keep])))

    cas_diag = np.real(np.diag(su.casimir.mat))[keep]
    return ClosureReport(
        guard=guard,
        res_k0_kp=res(_comm(k0, kp) - kp),
        res_k0_km=res(_comm(k0, km) + km),
        res_km_kp=res(_comm(km, kp) - 2 * k0),
        casimir_dev=float(np.max(np.abs(cas_diag - casimir_target))),
    )


def casimir_diagonal(su: Su11Set, guard: int = 0) -> np.ndarray:
    return np.real(np.diag(su.casimir.mat))[: su.space.dim - guard].copy()


def phase_rotation(space: FockSpace, phi: float) -> OpMatrix:
    """U(phi) = exp(i phi n), diagonal."""
    return diagonal_op(space, np.exp(1j * phi * np.arange(space.dim)))


def adjoint_action(u: OpMatrix, op: OpMatrix) -> OpMatrix:
    """U O U^dag."""
    return OpMatrix(u.mat @ op.mat @ u.mat.conj().T, op.space)


def parity_projectors(space: FockSpace) -> tuple[OpMatrix, OpMatrix]:
    even = (np.arange(space.dim) % 2 == 0).astype(float)
    return diagonal_op(space, even, True), diagonal_op(space, 1.0 - even, True)


def flux_to_phase(flux: float, flux_quantum: float = 1.0) -> float:
    """Aharonov-Bohm phase 2 pi flux / flux_quantum, reduced to [0, 2 pi)."""
    if not flux_quantum > 0:
        raise ValueError(f"flux_quantum must be positive, got {flux_quantum!r}")
    # reduce in flux units first so exact fractions of the quantum stay exact
    frac = (flux / flux_quantum) % 1.0
    phi = 2.0 * math.pi * frac
    return 0.0 if phi >= 2.0 * math.pi else phi


def commutes_exactly(x: OpMatrix, y: OpMatrix) -> float:
    return float(np.max(np.abs(_comm(x.mat, y.mat))))

