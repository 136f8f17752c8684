"""Equal-time correlation matrices on a discretized ring.

The lattice field Psi_j lives on M sites at angles 2 pi j / M and the angular
momentum modes are plane waves psi_m(theta_j) = exp(i m theta_j) / sqrt(M).
Correlations are stored as g[j, k] = <Psi_k^dag Psi_j>; four-point functions
follow from bosonic Wick pairing, so a correlation matrix describes a
number-conserving Gaussian state with zero displacement.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDimensionError,
    NonHermitianError,
    OutOfRangeError,
    TruncationError,
    UnsupportedStateError,
)
from .fock import DensityOp, FockSpace, OpMatrix, expectation, ladder_ops

GF_HERM_TOL = 1e-12
GF_PSD_TOL = 1e-10
WICK_MAX_SITES = 32
# coupling between the probed mode and the rest above this is unsupported
DECOUPLING_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class RingLattice:
    sites: int

    def __post_init__(self):
        m = self.sites
        if not isinstance(m, (int, np.integer)) or isinstance(m, bool) or m < 8 or m % 2:
            raise InvalidDimensionError(f"ring needs an even number of sites >= 8, got {m!r}")

    @property
    def thetas(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.sites) / self.sites


@dataclass(frozen=True, eq=False)
class ModeFunction:
    m: int
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class LesserGF:
    g: np.ndarray
    lattice: RingLattice

    def __post_init__(self):
        g = np.array(self.g, dtype=complex)
        size = self.lattice.sites
        if g.shape != (size, size):
            raise DimensionMismatchError(f"correlation matrix shape {g.shape} != ({size}, {size})")
        herm = float(np.max(np.abs(g - g.conj().T)))
        if herm > GF_HERM_TOL:
            raise NonHermitianError(f"correlation matrix not Hermitian (dev {herm:.3e})")
        g = 0.5 * (g + g.conj().T)
        lo = float(np.linalg.eigvalsh(g)[0])
        if lo < -GF_PSD_TOL:
            raise ValueError(f"correlation matrix has negative eigenvalue {lo:.3e}")
        g.flags.writeable = False
        object.__setattr__(self, "g", g)


def mode_function(lattice: RingLattice, m: int) -> ModeFunction:
    vals = np.exp(1j * m * lattice.thetas) / math.sqrt(lattice.sites)
    vals.flags.writeable = False
    return ModeFunction(int(m), vals)


def empty_gf(lattice: RingLattice) -> LesserGF:
    return LesserGF(np.zeros((lattice.sites, lattice.sites)), lattice)


def occupied_gf(lattice: RingLattice, occupations: dict[int, float]) -> LesserGF:
    """g = sum_m nu_m psi_m psi_m^dag, i.e. independent modes with mean occupation nu_m."""
    g = np.zeros((lattice.sites, lattice.sites), dtype=complex)
    for m, nu in occupations.items():
        if nu < 0:
            raise OutOfRangeError(f"occupation of mode {m} must be >= 0, got {nu}")
        psi = mode_function(lattice, m).values
        g += nu * np.outer(psi, psi.conj())
    return LesserGF(g, lattice)


def _check_mode(g: LesserGF, psi: ModeFunction):
    if psi.values.shape != (g.lattice.sites,):
        raise DimensionMismatchError(
            f"mode function length {psi.values.shape[0]} != {g.lattice.sites} sites")


def mode_occupation(g: LesserGF, psi: ModeFunction) -> float:
    """<c_m^dag c_m> = psi^dag g psi."""
    _check_mode(g, psi)
    val = complex(np.vdot(psi.values, g.g @ psi.values))
    if abs(val.imag) > GF_HERM_TOL:
        raise NonHermitianError(f"occupation has imaginary part {val.imag:.3e}")
    return val.real


def j0_from_green(g: LesserGF, psi: ModeFunction) -> float:
    """<J0> with J0 = (n + 1/2) / 2 on the projected mode."""
    return 0.5 * mode_occupation(g, psi) + 0.25


def wick_two_particle(g: LesserGF) -> np.ndarray:
    """G2[j, k, l, p] = <Psi_l^dag Psi_p^dag Psi_k Psi_j> = g[j,l] g[k,p] + g[j,p] g[k,l]."""
    if g.lattice.sites > WICK_MAX_SITES:
        raise OutOfRangeError(
            f"dense four-point tensor limited to M <= {WICK_MAX_SITES}, got {g.lattice.sites}")
    a = g.g
    return np.einsum("jl,kp->jklp", a, a) + np.einsum("jp,kl->jklp", a, a)


def pair_correlator(g2: np.ndarray, psi: ModeFunction) -> float:
    """<c^dag^2 c^2> contracted from the four-point tensor."""
    v = psi.values
    val = complex(np.einsum("j,k,jklp,l,p->", v.conj(), v.conj(), g2, v, v))
    return val.real


def thermal_density(space: FockSpace, nu: float) -> DensityOp:
    """Geometric number distribution with mean ``nu``."""
    if nu < 0:
        raise OutOfRangeError(f"mean occupation must be >= 0, got {nu}")
    q = nu / (1.0 + nu)
    probs = (1.0 - q) * q ** np.arange(space.dim)
    # the pair moment weighs the cut-off tail by ~n^2, so bound that rather than the mass
    tail = _tail_weight(q, space.dim)
    if tail > space.tail_tol:
        need = space.dim
        while _tail_weight(q, need) > space.tail_tol:
            need *= 2
        raise TruncationError(f"thermal tail {tail:.3e} exceeds tolerance at dim={space.dim}",
                              min_dim=need)
    return DensityOp(np.diag(probs / probs.sum()), space)


def _tail_weight(q: float, dim: int) -> float:
    return q ** dim * (dim + 1.0) ** 2 if q else 0.0


@dataclass(frozen=True)
class ProjectionReport:
    mode: int
    nu: float
    occupation_greens: float
    occupation_fock: float
    j0_greens: float
    j0_fock: float
    pair_greens: float
    pair_fock: float

    @property
    def max_dev(self) -> float:
        return max(abs(self.occupation_greens - self.occupation_fock),
                   abs(self.j0_greens - self.j0_fock),
                   abs(self.pair_greens - self.pair_fock))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_dev"] = self.max_dev
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def verify_projection(space: FockSpace, g: LesserGF, psi: ModeFunction) -> ProjectionReport:
    """Compare lattice-route moments of mode m with the single-mode Fock route.

    The single-mode reference is the zero-mean Gaussian state with the same
    occupation, a geometric number distribution, since that is the state the
    Wick pairing describes. The mode must be an eigenvector of g.
    """
    _check_mode(g, psi)
    v = psi.values
    gv = g.g @ v
    nu = float(np.vdot(v, gv).real)
    leak = float(np.linalg.norm(gv - nu * v))
    if leak > DECOUPLING_TOL:
        raise UnsupportedStateError(
            f"mode {psi.m} is correlated with other modes (residual {leak:.3e}); "
            "its marginal is not a diagonal single-mode state")
    rho = thermal_density(space, nu)
    a, adag, n = ladder_ops(space)
    k0 = OpMatrix(0.5 * (n.mat + 0.5 * np.eye(space.dim)), space, True)
    pair = adag @ adag @ a @ a
    return ProjectionReport(
        mode=psi.m,
        nu=nu,
        occupation_greens=mode_occupation(g, psi),
        occupation_fock=expectation(n, rho).real,
        j0_greens=j0_from_green(g, psi),
        j0_fock=expectation(k0, rho).real,
        pair_greens=pair_correlator(wick_two_particle(g), psi),
        pair_fock=expectation(pair, rho).real,
    )
