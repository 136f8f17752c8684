"""Exhaustive-grid reference values, kept separate from the optimizer code.

Nothing here calls the simplex search or the golden-section refinement: the
Gaussian family is sampled on fixed grids and the gamma minimization is a
plain scan. These routines produce the committed reference numbers the
optimizer is tested against.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateWitnessError
from .fock import DensityOp, FockSpace, Ket, as_density, branch_sign, ladder_ops

_CHUNK = 20000


@dataclass(frozen=True)
class PolarGrid:
    """(|beta|, arg beta, r, theta) grid; angles cover [0, 2 pi) uniformly."""

    beta_max: float = 2.5
    n_beta: int = 26
    n_beta_arg: int = 24
    r_max: float = 1.5
    n_r: int = 16
    n_theta: int = 24

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        mods = np.linspace(0.0, self.beta_max, self.n_beta)
        args = 2 * np.pi * np.arange(self.n_beta_arg) / self.n_beta_arg
        rs = np.linspace(0.0, self.r_max, self.n_r)
        ths = 2 * np.pi * np.arange(self.n_theta) / self.n_theta
        betas = np.unique(np.round((mods[:, None] * np.exp(1j * args[None, :])).ravel(), 15))
        zetas = np.unique(np.round((rs[:, None] * np.exp(1j * ths[None, :])).ravel(), 15))
        b, z = np.meshgrid(betas, zetas, indexing="ij")
        return b.ravel(), z.ravel()


def gaussian_amplitude_rows(dim: int, beta: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """Truncated Fock amplitudes of D(beta) S(zeta)|0>, one row per point."""
    beta = np.asarray(beta, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    r = np.abs(zeta)
    ph = np.where(r > 0, zeta / np.where(r > 0, r, 1.0), 1.0)
    th = np.tanh(r)
    mu = ph * th
    bc = beta.conj()
    lam = beta + bc * mu
    out = np.empty((beta.size, dim), dtype=complex)
    out[:, 0] = np.exp(-0.5 * np.abs(beta) ** 2 - 0.5 * bc * bc * mu) / np.sqrt(np.cosh(r))
    if dim > 1:
        out[:, 1] = lam * out[:, 0]
    for k in range(1, dim - 1):
        out[:, k + 1] = (lam * out[:, k] - mu * math.sqrt(k) * out[:, k - 1]) / math.sqrt(k + 1)
    return out


def _forms(space: FockSpace, mats, beta, zeta):
    """<psi|M|psi> for each matrix at each point, plus the kept mask."""
    vals = [np.empty(beta.size) for _ in mats]
    keep = np.empty(beta.size, dtype=bool)
    for s in range(0, beta.size, _CHUNK):
        sl = slice(s, s + _CHUNK)
        amps = gaussian_amplitude_rows(space.dim, beta[sl], zeta[sl])
        w = np.sum(np.abs(amps) ** 2, axis=1)
        keep[sl] = 1.0 - w <= space.tail_tol
        for out, m in zip(vals, mats):
            out[sl] = np.einsum("pi,ij,pj->p", amps.conj(), m, amps).real / w
    return vals, keep


def _witness_matrices(space: FockSpace, alpha: complex, branch: str):
    """(a^dag^2 - conj(alpha)^2)(a^2 - alpha^2) and 1 -/+ (-1)^n, built from scratch."""
    a = ladder_ops(space)[0].mat
    low = a @ a - complex(alpha) ** 2 * np.eye(space.dim)
    q = low.conj().T @ low
    p = np.diag(1.0 - branch_sign(branch) * (-1.0) ** np.arange(space.dim))
    return q, p


@dataclass(frozen=True)
class GridXi:
    xi: float
    gamma_star: float
    floor: float
    numerator: float
    beta_star: complex
    zeta_star: complex
    grid: dict
    gammas: int

    def to_dict(self) -> dict:
        return {
            "xi": self.xi, "gamma_star": self.gamma_star, "floor": self.floor,
            "numerator": self.numerator,
            "beta_re": self.beta_star.real, "beta_im": self.beta_star.imag,
            "zeta_re": self.zeta_star.real, "zeta_im": self.zeta_star.imag,
            "grid": self.grid, "gamma_points": self.gammas,
        }


def xi_double_grid(space: FockSpace, rho: Ket | DensityOp, alpha: complex, branch: str,
                   grid: PolarGrid | None = None, gamma_min: float = 1e-3,
                   gamma_max: float = 1e3, gamma_points: int = 25,
                   floor_min: float = 1e-12) -> GridXi:
    """xi from a gamma grid crossed with a Gaussian-parameter grid, no refinement."""
    grid = grid or PolarGrid()
    rho = as_density(rho)
    q, p = _witness_matrices(space, alpha, branch)
    nq = float(np.einsum("ij,ji->", q, rho.mat).real)
    npar = float(np.einsum("ij,ji->", p, rho.mat).real)
    beta, zeta = grid.points()
    (fq, fp), keep = _forms(space, (q, p), beta, zeta)
    fq, fp, beta, zeta = fq[keep], fp[keep], beta[keep], zeta[keep]

    best = None
    for g in map(float, np.geomspace(gamma_min, gamma_max, gamma_points)):
        vals = fq + g * fp
        i = int(np.argmin(vals))
        if vals[i] < floor_min:
            continue
        num = max(nq + g * npar, 0.0)
        ratio = num / float(vals[i])
        if best is None or ratio < best[0] * (1 - 1e-9):
            best = (ratio, g, float(vals[i]), num, complex(beta[i]), complex(zeta[i]))
    if best is None:
        raise DegenerateWitnessError("grid floor vanished at every gamma")
    return GridXi(*best, grid=asdict(grid), gammas=gamma_points)


def floor_zoom(space: FockSpace, mat: np.ndarray, beta_max: float = 3.0, r_max: float = 1.5,
               points: int = 9, levels: int = 12, keep_best: int = 4,
               shrink: float = 0.3) -> tuple[float, complex, complex]:
    """min <psi_G|M|psi_G> by a coarse polar grid and nested Cartesian zooms.

    The coarse level scans |beta| <= beta_max, r <= r_max. Each of the
    ``keep_best`` lowest coarse points seeds a sequence of 4-D boxes with
    ``points`` per axis, shrunk by ``shrink`` per level around the running
    minimum.
    """
    coarse = PolarGrid(beta_max, 31, 36, r_max, 16, 36)
    beta, zeta = coarse.points()
    (vals,), keep = _forms(space, (mat,), beta, zeta)
    vals = np.where(keep, vals, np.inf)
    order = np.argsort(vals, kind="stable")[:keep_best]

    best = (math.inf, 0j, 0j)
    for i in order:
        centre = np.array([beta[i].real, beta[i].imag, zeta[i].real, zeta[i].imag])
        half = np.array([beta_max / 30, beta_max / 30, r_max / 15, r_max / 15]) * 2
        cur = (vals[i], beta[i], zeta[i])
        for _ in range(levels):
            axes = [np.linspace(c - hw, c + hw, points) for c, hw in zip(centre, half)]
            cur = min(cur, _box_min(space, mat, axes, r_max), key=lambda t: t[0])
            centre = np.array([cur[1].real, cur[1].imag, cur[2].real, cur[2].imag])
            half = half * shrink
        if cur[0] < best[0]:
            best = cur
    return float(best[0]), complex(best[1]), complex(best[2])


def _box_min(space, mat, axes, r_max):
    """Minimum over a Cartesian 4-D box, sliced along the first axis."""
    best = (math.inf, 0j, 0j)
    bi, zr, zi = np.meshgrid(axes[1], axes[2], axes[3], indexing="ij")
    zeta = (zr + 1j * zi).ravel()
    inside = np.abs(zeta) <= r_max
    for br in axes[0]:
        beta = (br + 1j * bi).ravel()[inside]
        z = zeta[inside]
        (vals,), keep = _forms(space, (mat,), beta, z)
        vals = np.where(keep, vals, np.inf)
        j = int(np.argmin(vals))
        if vals[j] < best[0]:
            best = (float(vals[j]), complex(beta[j]), complex(z[j]))
    return best
