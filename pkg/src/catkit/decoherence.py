"""Pure photon loss, fidelity against pure targets and Wigner diagnostics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, fields

import numpy as np
from scipy.special import gammaln, xlogy

from ._parallel import ordered_map
from .catability import OptConfig, xi
from .errors import OutOfRangeError, TruncationError
from .fock import (
    DensityOp,
    FockSpace,
    Ket,
    OpMatrix,
    _check_same_space,
    as_density,
    cat_state,
)

# exp(-|2 beta|^2 / 2) must stay representable for the displacement columns
_WIGNER_EXP_FLOOR = -700.0


@dataclass(frozen=True, eq=False)
class LossChannel:
    tau: float
    kraus: tuple[OpMatrix, ...]
    space: FockSpace

    def completeness_residual(self, guard: int = 0) -> float:
        """max |sum_k K_k^dag K_k - I| on the levels below dim - guard."""
        dim = self.space.dim
        acc = sum(k.mat.conj().T @ k.mat for k in self.kraus)
        keep = slice(0, dim - guard)
        return float(np.max(np.abs(acc - np.eye(dim))[keep, keep]))


@dataclass(frozen=True)
class RobustnessRow:
    tau: float
    xi_even: float
    xi_odd: float
    infidelity: float
    wigner_min: float


@dataclass(frozen=True)
class WignerGrid:
    beta_max: float = 4.0
    h: float = 0.1

    def __post_init__(self):
        if not self.beta_max > 0 or not self.h > 0:
            raise ValueError("beta_max and h must be positive")

    def axis(self) -> np.ndarray:
        k = int(round(self.beta_max / self.h))
        return self.h * np.arange(-k, k + 1)

    def points(self) -> np.ndarray:
        x = self.axis()
        return (x[None, :] + 1j * x[:, None]).ravel()


def _check_tau(tau: float):
    if not 0.0 <= tau <= 1.0:
        raise OutOfRangeError(f"tau must lie in [0, 1], got {tau!r}")


def loss_kraus_matrices(dim: int, tau: float) -> np.ndarray:
    """Stack K[k] with <n-k|K_k|n> = sqrt(C(n,k) tau^(n-k) (1-tau)^k)."""
    _check_tau(tau)
    n = np.arange(dim)
    out = np.zeros((dim, dim, dim))
    for k in range(dim):
        m = n[k:]
        # xlogy keeps 0^0 = 1 at the endpoints tau = 0 and tau = 1
        logc = 0.5 * (gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
                      + xlogy(m - k, tau) + xlogy(k, 1.0 - tau))
        out[k, m - k, m] = np.exp(logc)
    return out


def loss_channel(space: FockSpace, tau: float) -> LossChannel:
    mats = loss_kraus_matrices(space.dim, float(tau))
    return LossChannel(float(tau), tuple(OpMatrix(m, space) for m in mats), space)


def apply_channel(rho: Ket | DensityOp, ch: LossChannel) -> DensityOp:
    rho = as_density(rho)
    _check_same_space(rho, ch)
    ks = np.stack([k.mat for k in ch.kraus])
    out = np.einsum("kij,jl,kml->im", ks, rho.mat, ks.conj(), optimize=True)
    return DensityOp(0.5 * (out + out.conj().T), rho.space)


def fidelity(rho: Ket | DensityOp, target: Ket) -> float:
    """<psi|rho|psi> for a pure target."""
    rho = as_density(rho)
    _check_same_space(rho, target)
    return float(np.vdot(target.amps, rho.mat @ target.amps).real)


def _displacement_columns(beta: np.ndarray, dim: int):
    """Yield column m of D(beta) for every grid point, m = 0..dim-1.

    Exact matrix elements of the untruncated operator, from
    D|m> = (a^dag - beta*) D|m-1> / sqrt(m).
    """
    lam = np.abs(beta) ** 2
    if np.any(-0.5 * lam < _WIGNER_EXP_FLOOR):
        raise TruncationError("displacement too large for the Wigner grid")
    col = np.empty((beta.size, dim), dtype=complex)
    col[:, 0] = np.exp(-0.5 * lam)
    for n in range(1, dim):
        col[:, n] = col[:, n - 1] * beta / math.sqrt(n)
    yield col
    sq = np.sqrt(np.arange(dim))
    bc = beta.conj()[:, None]
    for m in range(1, dim):
        nxt = -bc * col
        nxt[:, 1:] += sq[1:] * col[:, :-1]
        col = nxt / math.sqrt(m)
        yield col


def wigner_values(rho: Ket | DensityOp, betas) -> np.ndarray:
    """W(beta) = (2/pi) Tr[rho D(beta) Pi D(beta)^dag] at each point.

    Uses D(beta) Pi D(beta)^dag = D(2 beta) Pi.
    """
    rho = as_density(rho)
    betas = np.atleast_1d(np.asarray(betas, dtype=complex))
    acc = np.zeros(betas.size, dtype=complex)
    for m, col in enumerate(_displacement_columns(2.0 * betas, rho.space.dim)):
        acc += (-1) ** m * (col @ rho.mat[m, :])
    return (2.0 / math.pi) * acc.real


def wigner_point(rho: Ket | DensityOp, beta: complex) -> float:
    return float(wigner_values(rho, [beta])[0])


def wigner_min(rho: Ket | DensityOp, grid: WignerGrid | None = None) -> float:
    grid = grid or WignerGrid()
    return float(np.min(wigner_values(rho, grid.points())))


def wigner_integral(rho: Ket | DensityOp, grid: WignerGrid | None = None) -> float:
    """Riemann sum of W over the square grid; 1 for a state well inside it."""
    grid = grid or WignerGrid()
    return float(np.sum(wigner_values(rho, grid.points())) * grid.h ** 2)


def robustness_sweep(space: FockSpace, alpha: complex, tau_list, opt_cfg: OptConfig | None = None,
                     grid: WignerGrid | None = None) -> list[RobustnessRow]:
    """Lossy even and odd cats at each tau, largest tau first.

    Infidelity and the Wigner minimum refer to the even cat.
    """
    taus = sorted({float(t) for t in tau_list}, reverse=True)
    for t in taus:
        _check_tau(t)
    cfg = opt_cfg or OptConfig()
    even = cat_state(space, alpha, "even")
    odd = cat_state(space, alpha, "odd")

    def row(tau: float) -> RobustnessRow:
        ch = loss_channel(space, tau)
        rho_e = apply_channel(even, ch)
        rho_o = apply_channel(odd, ch)
        infid = min(max(1.0 - fidelity(rho_e, even), 0.0), 1.0)
        return RobustnessRow(
            tau=tau,
            xi_even=xi(space, rho_e, alpha, "even", cfg).xi,
            xi_odd=xi(space, rho_o, alpha, "odd", cfg).xi,
            infidelity=infid,
            wigner_min=wigner_min(rho_e, grid),
        )

    return ordered_map(row, taus)


def fmt_float(x: float) -> str:
    return format(float(x), ".12g")


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f.name for f in fields(RobustnessRow)])
    for r in rows:
        w.writerow([fmt_float(v) for v in astuple(r)])
    return buf.getvalue()
