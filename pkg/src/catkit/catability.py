"""Catability witness operators and the normalized catability value xi.

The witness for a target amplitude ``alpha`` is

    O(alpha, gamma) = (a^dag^2 - alpha*^2)(a^2 - alpha^2) + gamma (1 -/+ Pi)

whose ground state is the even (odd) cat of amplitude ``alpha``. Its value on a
state is normalized by the smallest value reachable with a Gaussian state and
the ratio is minimized over ``gamma``. The phase-dependent variant rotates the
target amplitude by ``exp(i phi)`` and dresses the parity.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from ._kernels import gaussian_quadratic_form
from .errors import DegenerateWitnessError, NonHermitianError
from .fock import (
    DensityOp,
    FockSpace,
    Ket,
    OpMatrix,
    as_density,
    branch_sign,
    expectation,
    gaussian_amplitudes,
    gaussian_ket,
    ladder_ops,
    max_coherent_radius,
)

PARITY_VARIANTS = ("phase_weighted", "conjugated")
DEGENERATE_FLOOR = 1e-12
TIE_RTOL = 1e-9
# stop the amplitude recursion once the remaining probability is below this
_RECURSION_CUTOFF = 1e-16


@dataclass(frozen=True)
class OptConfig:
    gamma_min: float = 1e-3
    gamma_max: float = 1e3
    gamma_points: int = 25
    gs_tol: float = 1e-4
    starts: int = 8
    r_max: float = 2.0
    seed: int = 42
    max_iters: int = 4000
    max_restarts: int = 3

    def __post_init__(self):
        for name in ("gamma_min", "gamma_max", "gs_tol", "r_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.gamma_max <= self.gamma_min:
            raise ValueError("gamma_max must exceed gamma_min")
        if self.gamma_points < 2 or self.starts < 1 or self.max_iters < 1:
            raise ValueError("gamma_points >= 2, starts >= 1 and max_iters >= 1 required")


@dataclass(frozen=True)
class CatParams:
    alpha: complex
    branch: str = "even"
    phi: float = 0.0
    parity_variant: str = "phase_weighted"

    def __post_init__(self):
        branch_sign(self.branch)
        if self.parity_variant not in PARITY_VARIANTS:
            raise ValueError(f"parity_variant must be one of {PARITY_VARIANTS}")
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))


@dataclass(frozen=True)
class GaussianParams:
    """Pure Gaussian state D(beta) S(zeta)|0>, zeta = r exp(i theta)."""

    beta: complex = 0j
    zeta: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))
        object.__setattr__(self, "zeta", complex(self.zeta))

    @property
    def r(self) -> float:
        return abs(self.zeta)

    @property
    def theta(self) -> float:
        return cmath.phase(self.zeta) % (2 * math.pi) if self.zeta else 0.0

    def to_dict(self) -> dict:
        return {"beta_re": self.beta.real, "beta_im": self.beta.imag,
                "r": self.r, "theta": self.theta}


@dataclass(frozen=True)
class GaussianMinimum:
    value: float
    g_star: GaussianParams
    converged: bool = True

    def __iter__(self):
        yield self.value
        yield self.g_star


@dataclass
class XiResult:
    xi: float
    gamma_star: float
    gaussian_star: GaussianParams
    numerator: float
    denominator: float
    optimizer_trace: list[tuple[float, float]] = field(default_factory=list)
    excluded_gammas: list[float] = field(default_factory=list)
    converged: bool = True
    light_norm: float | None = None

    def interpretation(self, tol: float = 1e-6) -> str:
        if self.xi <= tol:
            return "ideal-cat"
        return "partial-cat" if self.xi < 1 else "uninformative"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["gaussian_star"] = self.gaussian_star.to_dict()
        d["optimizer_trace"] = [[g, r] for g, r in self.optimizer_trace]
        d["interpretation"] = self.interpretation()
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


# --- witness operators -------------------------------------------------------

def _check_gamma(gamma: float):
    if gamma < 0:
        raise ValueError(f"gamma must be non-negative, got {gamma!r}")


def quadratic_part(space: FockSpace, alpha: complex, phi: float = 0.0) -> OpMatrix:
    """(a^dag^2 - conj(w))(a^2 - w) with w = alpha^2 exp(2 i phi)."""
    a, _, _ = ladder_ops(space)
    w = complex(alpha) ** 2 * cmath.exp(2j * phi)
    low = a.mat @ a.mat - w * np.eye(space.dim)
    q = low.conj().T @ low
    return OpMatrix(0.5 * (q + q.conj().T), space, True)


def rotated_parity(space: FockSpace, phi: float, variant: str = "phase_weighted") -> OpMatrix:
    """Phase-dressed parity.

    ``conjugated`` is exp(i phi n) (-1)^n exp(-i phi n), which is plain parity
    because every factor is diagonal. ``phase_weighted`` is (-1)^n exp(i phi n),
    not Hermitian for generic phi.
    """
    n = np.arange(space.dim)
    par = (-1.0) ** n
    if variant == "conjugated":
        # diagonal factors commute, so their phases add: phi n - phi n = 0
        diag = par * np.exp(1j * (phi * n - phi * n))
        return OpMatrix(np.diag(diag), space, True)
    if variant == "phase_weighted":
        return OpMatrix(np.diag(par * np.exp(1j * phi * n)), space)
    raise ValueError(f"unknown parity variant {variant!r}")


@lru_cache(maxsize=64)
def _witness_parts(space: FockSpace, alpha: complex, branch: str, phi: float,
                   variant: str) -> tuple[OpMatrix, OpMatrix]:
    """Hermitian (quadratic, parity) pieces with O(gamma) = Q + gamma P."""
    sign = branch_sign(branch)
    q = quadratic_part(space, alpha, phi)
    par = rotated_parity(space, phi, variant).mat
    par = 0.5 * (par + par.conj().T)
    p = np.eye(space.dim) - sign * par
    return q, OpMatrix(p, space, True)


def cat_operator(space: FockSpace, alpha: complex, gamma: float, branch: str = "even") -> OpMatrix:
    _check_gamma(gamma)
    q, p = _witness_parts(space, complex(alpha), branch, 0.0, "conjugated")
    return OpMatrix(q.mat + gamma * p.mat, space, True)


def phase_cat_operator(space: FockSpace, params: CatParams, gamma: float) -> OpMatrix:
    """Phase-dependent witness; the phase-weighted form is Hermitian-symmetrized."""
    _check_gamma(gamma)
    q, p = _witness_parts(space, params.alpha, params.branch, params.phi, params.parity_variant)
    return OpMatrix(q.mat + gamma * p.mat, space, True)


# --- Gaussian floor ----------------------------------------------------------

def gaussian_pure_state(space: FockSpace, g: GaussianParams) -> Ket:
    return gaussian_ket(space, g.beta, g.zeta)


class _FloorObjective:
    """<psi_G|O|psi_G> over (Re beta, Im beta, Re zeta, Im zeta)."""

    def __init__(self, space: FockSpace, mat: np.ndarray, r_max: float):
        self.dim = space.dim
        self.tail_tol = space.tail_tol
        self.mat = np.ascontiguousarray(mat, dtype=complex)
        self.r_max = r_max
        self.scale = 10.0 * max(1.0, float(np.max(np.abs(mat))))
        self.nfev = 0

    def point(self, x) -> tuple[complex, complex, float]:
        beta = complex(x[0], x[1])
        zeta = complex(x[2], x[3])
        excess = 0.0
        r = abs(zeta)
        if r > self.r_max:
            zeta *= self.r_max / r
            excess = r - self.r_max
        return beta, zeta, excess

    def __call__(self, x) -> float:
        self.nfev += 1
        beta, zeta, excess = self.point(x)
        val, w, full = gaussian_quadratic_form(self.mat, beta.real, beta.imag,
                                               zeta.real, zeta.imag, _RECURSION_CUTOFF)
        penalty = 0.0
        if excess:
            penalty += self.scale * (1.0 + excess)
        if full:
            tail = 1.0 - w
            if tail > self.tail_tol:
                penalty += self.scale * (1.0 + math.log10(tail / self.tail_tol))
        return val + penalty


def _nelder_mead(fun, x0, step, bounds, cfg: OptConfig, fscale: float):
    x0 = np.asarray(x0, dtype=float)
    simplex = np.vstack([x0, x0 + np.diag(step)])
    opts = {"initial_simplex": simplex, "xatol": 1e-6, "fatol": 1e-11 * fscale,
            "maxiter": cfg.max_iters, "maxfev": 2 * cfg.max_iters}
    res = minimize(fun, x0, method="Nelder-Mead", bounds=bounds, options=opts)
    restarts = 0
    while not res.success and restarts < cfg.max_restarts:
        opts["initial_simplex"] = np.vstack([res.x, res.x + 0.5 * np.diag(step)])
        res = minimize(fun, res.x, method="Nelder-Mead", bounds=bounds, options=opts)
        restarts += 1
    return res


def _start_points(seeds, cfg: OptConfig, rng_radius: float) -> list[np.ndarray]:
    pts = [np.zeros(4)]
    for g in seeds:
        pts.append(np.array([g.beta.real, g.beta.imag, g.zeta.real, g.zeta.imag]))
    rng = np.random.default_rng(cfg.seed)
    while len(pts) < cfg.starts:
        b = rng.uniform(-rng_radius, rng_radius, size=2)
        r = rng.uniform(0.0, min(cfg.r_max, 0.8))
        th = rng.uniform(0.0, 2 * math.pi)
        pts.append(np.array([b[0], b[1], r * math.cos(th), r * math.sin(th)]))
    return pts


def min_over_gaussians(space: FockSpace, op: OpMatrix, opt_cfg: OptConfig | None = None,
                       seeds: tuple[GaussianParams, ...] = ()) -> GaussianMinimum:
    """Smallest <psi_G|O|psi_G> over pure Gaussian states.

    Pure states suffice: the objective is linear in the density operator and
    every mixed Gaussian state is a mixture of pure ones. Nelder-Mead runs from
    the vacuum, each seed and seeded random points; the best run is polished
    once more from its endpoint. States whose truncation tail exceeds
    ``tail_tol`` are excluded through a penalty.
    """
    cfg = opt_cfg or OptConfig()
    mat = op.mat
    if float(np.max(np.abs(mat - mat.conj().T))) > space.herm_tol:
        raise NonHermitianError("Gaussian minimization needs a Hermitian operator")
    fun = _FloorObjective(space, 0.5 * (mat + mat.conj().T), cfg.r_max)
    bcap = max_coherent_radius(space.dim, space.tail_tol)
    bounds = [(-bcap, bcap), (-bcap, bcap), (-cfg.r_max, cfg.r_max), (-cfg.r_max, cfg.r_max)]
    radius = max([1.5] + [abs(g.beta) + 0.5 for g in seeds])
    step = np.array([0.3, 0.3, 0.2, 0.2])

    best = None
    converged = True
    for x0 in _start_points(seeds, cfg, min(radius, bcap)):
        fscale = max(1.0, abs(fun(x0)))
        res = _nelder_mead(fun, x0, step, bounds, cfg, fscale)
        converged &= bool(res.success)
        if best is None or res.fun < best.fun:
            best = res
    polish = _nelder_mead(fun, best.x, step / 8, bounds, cfg, max(1.0, abs(best.fun)))
    if polish.fun < best.fun:
        best = polish

    beta, zeta, _ = fun.point(best.x)
    g_star = GaussianParams(beta, zeta)
    # the optimum may sit on the tail-penalty boundary, so skip the fit check here
    amps = gaussian_amplitudes(space.dim, beta, zeta)
    amps = amps / np.linalg.norm(amps)
    value = float(np.vdot(amps, fun.mat @ amps).real)
    return GaussianMinimum(value, g_star, converged)


# --- catability ---------------------------------------------------------------

@lru_cache(maxsize=4096)
def _cached_floor(space: FockSpace, alpha: complex, branch: str, phi: float, variant: str,
                  gamma: float, cfg: OptConfig, seeds: tuple[GaussianParams, ...]) -> GaussianMinimum:
    q, p = _witness_parts(space, alpha, branch, phi, variant)
    op = OpMatrix(q.mat + gamma * p.mat, space, True)
    return min_over_gaussians(space, op, cfg, seeds)


def _select(trace: list[tuple[float, float]]) -> int:
    """Index of the smallest ratio; near-ties go to the smallest gamma."""
    best = min(r for _, r in trace)
    tol = TIE_RTOL * max(abs(best), 1e-300)
    ties = [i for i, (_, r) in enumerate(trace) if r - best <= tol]
    return min(ties, key=lambda i: trace[i][0])


def _search_gamma(space: FockSpace, rho: DensityOp, params: CatParams, cfg: OptConfig) -> XiResult:
    q, p = _witness_parts(space, params.alpha, params.branch, params.phi, params.parity_variant)
    num_q = float(expectation(q, rho).real)
    num_p = float(expectation(p, rho).real)

    def numerator(g: float) -> float:
        return max(num_q + g * num_p, 0.0)

    rot = params.alpha * cmath.exp(1j * params.phi)
    base_seeds = (GaussianParams(rot), GaussianParams(-rot)) if rot else ()

    # refinement points start only from the vacuum, the base seeds and the
    # neighbouring grid optima; random restarts are left to the grid pass
    warm_cfg = replace(cfg, starts=1)

    def floor(g: float, extra=()) -> GaussianMinimum:
        return _cached_floor(space, params.alpha, params.branch, params.phi, params.parity_variant,
                             float(g), warm_cfg if extra else cfg, base_seeds + tuple(extra))

    trace: list[tuple[float, float]] = []
    mins: dict[float, GaussianMinimum] = {}
    excluded: list[float] = []
    converged = True

    def visit(g: float, extra=()) -> float:
        nonlocal converged
        fm = floor(g, extra)
        converged &= fm.converged
        if fm.value < DEGENERATE_FLOOR:
            excluded.append(g)
            return math.inf
        mins[g] = fm
        ratio = numerator(g) / fm.value
        trace.append((g, ratio))
        return ratio

    grid = np.geomspace(cfg.gamma_min, cfg.gamma_max, cfg.gamma_points)
    for g in grid:
        visit(float(g))
    if not trace:
        raise DegenerateWitnessError("Gaussian floor vanished at every gamma on the grid")

    k = int(np.searchsorted(grid, trace[_select(trace)][0]))
    lo = float(grid[max(k - 1, 0)])
    hi = float(grid[min(k + 1, len(grid) - 1)])
    warm = tuple(mins[float(grid[j])].g_star for j in (k - 1, k, k + 1)
                 if 0 <= j < len(grid) and float(grid[j]) in mins)
    _golden(lambda u: visit(math.exp(u), warm), math.log(lo), math.log(hi), cfg.gs_tol)

    g_star, ratio = trace[_select(trace)]
    fm = mins[g_star]
    return XiResult(
        xi=ratio,
        gamma_star=g_star,
        gaussian_star=fm.g_star,
        numerator=numerator(g_star),
        denominator=fm.value,
        optimizer_trace=trace,
        excluded_gammas=excluded,
        converged=converged,
    )


def _golden(f, a: float, b: float, tol: float):
    """Golden-section descent on [a, b] in log-gamma; stops at relative width ``tol``."""
    if b - a <= tol:
        return
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)


def xi(space: FockSpace, rho: Ket | DensityOp, alpha: complex, branch: str = "even",
       opt_cfg: OptConfig | None = None) -> XiResult:
    """Catability of ``rho`` against the ``branch`` cat of amplitude ``alpha``."""
    params = CatParams(alpha, branch, 0.0, "conjugated")
    return _search_gamma(space, as_density(rho), params, opt_cfg or OptConfig())


def xi_phi(space: FockSpace, rho: Ket | DensityOp, params: CatParams,
           opt_cfg: OptConfig | None = None) -> XiResult:
    """Phase-dependent catability; also records <O_phi>/|alpha|^4 at gamma*."""
    rho = as_density(rho)
    res = _search_gamma(space, rho, params, opt_cfg or OptConfig())
    if abs(params.alpha) > 0:
        op = phase_cat_operator(space, params, res.gamma_star)
        res.light_norm = float(expectation(op, rho).real) / abs(params.alpha) ** 4
    return res
