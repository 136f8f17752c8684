"""Closed-form moment statements checked against dense-matrix evaluations.

Each claim pairs a stated closed form with an oracle that never touches the
formula: oracles build the operator as a matrix on the truncated basis and
take the expectation value on a state generated by recursion. Oracles are
also run on forced cases (vacuum, identity) stored in a fixture file before
any claim is judged, so a broken oracle cannot pass silently.
"""

from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .catability import CatParams, phase_cat_operator, rotated_parity
from .errors import TruncationError
from .fock import (
    FockSpace,
    OpMatrix,
    coherent_state,
    expectation,
    fock_state,
    ladder_ops,
    parity_op,
)
from .su11 import build_su11

SCHEMA = "claimcheck/1"
ABS_TOL = 1e-8
REL_TOL = 1e-6
FIXTURE_TOL = 1e-12
C11_MIN_DIM = 128

PHIS = tuple(k * math.pi / 4 for k in range(8))
ALPHAS = (0.5, 1.0, 1.5, 2.0)


# --- oracles: dense matrices only -------------------------------------------

def _pair(space: FockSpace) -> OpMatrix:
    a, adag, _ = ladder_ops(space)
    return adag @ adag @ a @ a


def _o_fock_pair(space, n):
    return expectation(_pair(space), fock_state(space, n))


def _o_coherent_pair(space, alpha):
    return expectation(_pair(space), coherent_state(space, alpha))


def _o_parity_pw(space, alpha, phi):
    return expectation(rotated_parity(space, phi, "phase_weighted"), coherent_state(space, alpha))


def _o_parity_conj(space, alpha, phi):
    return expectation(rotated_parity(space, phi, "conjugated"), coherent_state(space, alpha))


def _o_j_minus(space, alpha):
    return expectation(build_su11(space).k_minus, coherent_state(space, alpha))


def _o_j_zero(space, alpha):
    return expectation(build_su11(space).k_zero, coherent_state(space, alpha))


def _o_j0sq_minus_j0(space, alpha):
    k0 = build_su11(space).k_zero
    return expectation(k0 @ k0 - k0, coherent_state(space, alpha))


def _o_phase_operator(space, alpha, phi, gamma):
    op = phase_cat_operator(space, CatParams(alpha, "even", phi, "phase_weighted"), gamma)
    return expectation(op, coherent_state(space, alpha))


def _o_casimir(space, n):
    return complex(build_su11(space).casimir.mat[n, n])


def _o_parity(space, alpha):
    return expectation(parity_op(space), coherent_state(space, alpha))


ORACLES: dict[str, Callable[..., complex]] = {
    "fock_pair_moment": _o_fock_pair,
    "coherent_pair_moment": _o_coherent_pair,
    "coherent_parity_phase_weighted": _o_parity_pw,
    "coherent_parity_conjugated": _o_parity_conj,
    "coherent_j_minus": _o_j_minus,
    "coherent_j_zero": _o_j_zero,
    "coherent_j0sq_minus_j0": _o_j0sq_minus_j0,
    "coherent_phase_operator": _o_phase_operator,
    "casimir_diagonal": _o_casimir,
    "coherent_parity": _o_parity,
}


# --- claimed closed forms ---------------------------------------------------

def _poisson_series(alpha, phi, terms: int = 400) -> complex:
    """sum_n P_n (-1)^n exp(i phi n) with Poisson weights of mean |alpha|^2."""
    lam = abs(alpha) ** 2
    n = np.arange(terms)
    if lam == 0:
        return 1.0 + 0j
    logp = -lam + n * math.log(lam) - gammaln(n + 1)
    return complex(np.sum(np.exp(logp) * (-1.0) ** n * np.exp(1j * phi * n)))


def _coherent_phase_claim(alpha, phi) -> complex:
    lam = abs(alpha) ** 2
    return math.exp(-2 * lam * math.sin(phi / 2) ** 2) * cmath.exp(1j * lam * math.sin(phi))


def _quadratic_claim(alpha, phi) -> float:
    return 8 * abs(alpha) ** 4 * (1 - math.cos(2 * phi))


@dataclass(frozen=True)
class Claim:
    id: str
    description: str
    paper_ref: str
    analytic: Callable[..., complex]
    oracle: str
    domain: tuple[dict, ...]
    must_hold: bool = False
    min_dim: int = 0


@dataclass(frozen=True)
class ClaimVerdict:
    id: str
    description: str
    paper_ref: str
    max_abs_dev: float | None
    max_rel_dev: float | None
    verdict: str | None
    worst_point: dict | None
    skipped: bool = False
    must_hold: bool = False
    skip_reason: str | None = None
    worst_analytic: list | None = None
    worst_oracle: list | None = None

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _grid(**axes) -> tuple[dict, ...]:
    keys = list(axes)
    out = [{}]
    for k in keys:
        out = [dict(d, **{k: v}) for d in out for v in axes[k]]
    return tuple(out)


def builtin_claims() -> list[Claim]:
    coh = _grid(alpha=(0.5, 1.0, 1.5), phi=PHIS)
    return [
        Claim("C1", "pair moment on number states",
              "<c^dag^2 c^2> = n(n-1) on |n>",
              lambda n: n * (n - 1), "fock_pair_moment", _grid(n=range(11)), must_hold=True),
        Claim("C2.conj", "rotated parity series, conjugated operator",
              "<Pi_phi> = sum_n P_n (-1)^n exp(i phi n), Pi_phi = exp(i phi n) Pi exp(-i phi n)",
              _poisson_series, "coherent_parity_conjugated", coh),
        Claim("C2.pw", "rotated parity series, phase-weighted operator",
              "<Pi_phi> = sum_n P_n (-1)^n exp(i phi n), Pi_phi = (-1)^n exp(i phi n)",
              _poisson_series, "coherent_parity_phase_weighted", coh, must_hold=True),
        Claim("C3", "rotated parity of a coherent state in closed form",
              "<Pi_phi> = exp(-2|a|^2 sin^2(phi/2)) exp(i |a|^2 sin phi)",
              _coherent_phase_claim, "coherent_parity_phase_weighted", coh),
        Claim("C4", "pair moment of a coherent state",
              "<c^dag^2 c^2> = 2|a|^4 for a coherent state",
              lambda alpha: 2 * abs(alpha) ** 4, "coherent_pair_moment", _grid(alpha=ALPHAS)),
        Claim("C5", "lowering generator on a coherent state",
              "<J-> = a^2 with J- = c^2/2",
              lambda alpha: complex(alpha) ** 2, "coherent_j_minus", _grid(alpha=ALPHAS)),
        Claim("C6", "weight generator on a coherent state",
              "<J0> = |a|^2 + 1/4",
              lambda alpha: abs(alpha) ** 2 + 0.25, "coherent_j_zero", _grid(alpha=ALPHAS)),
        Claim("C7", "second weight moment on a coherent state",
              "<J0^2 - J0> = |a|^4 - |a|^2/4 - 3/16",
              lambda alpha: abs(alpha) ** 4 - 0.25 * abs(alpha) ** 2 - 3 / 16,
              "coherent_j0sq_minus_j0", _grid(alpha=ALPHAS)),
        Claim("C8", "phase-dependent witness on a coherent state",
              "<O_phi> = 8|a|^4 (1 - cos 2phi) + g [1 - exp(-2|a|^2 sin^2(phi/2)) cos(|a|^2 sin phi)]",
              lambda alpha, phi, gamma: _quadratic_claim(alpha, phi)
              + gamma * (1 - _coherent_phase_claim(alpha, phi).real),
              "coherent_phase_operator", _grid(alpha=(1.0, 1.5), phi=PHIS, gamma=(0.5, 2.0))),
        Claim("C9", "su(1,1) Casimir eigenvalue",
              "K0^2 - K0 - K+ K- = 1/16 on every level",
              lambda n: 1 / 16, "casimir_diagonal", (), must_hold=True),
        Claim("C10", "plain parity of a coherent state",
              "<(-1)^n> = exp(-2|a|^2)",
              lambda alpha: math.exp(-2 * abs(alpha) ** 2), "coherent_parity", _grid(alpha=ALPHAS),
              must_hold=True),
        Claim("C11", "large-amplitude witness value",
              "<O_phi> ~ 8|a|^4 (1 - cos 2phi) at large |a|",
              lambda alpha, phi, gamma: _quadratic_claim(alpha, phi), "coherent_phase_operator",
              _grid(alpha=(2.5,), phi=PHIS, gamma=(1.0,)), min_dim=C11_MIN_DIM),
    ]


def _domain(claim: Claim, space: FockSpace) -> tuple[dict, ...]:
    # the Casimir check runs over the basis itself
    if claim.id == "C9":
        return _grid(n=range(space.dim - 3))
    return claim.domain


def _cplx(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def evaluate_claim(space: FockSpace, claim: Claim) -> ClaimVerdict:
    base = dict(id=claim.id, description=claim.description, paper_ref=claim.paper_ref,
                must_hold=claim.must_hold)
    if space.dim < claim.min_dim:
        return ClaimVerdict(max_abs_dev=None, max_rel_dev=None, verdict=None, worst_point=None,
                            skipped=True, skip_reason=f"needs dim >= {claim.min_dim}", **base)
    oracle = ORACLES[claim.oracle]
    worst = None
    max_abs = max_rel = 0.0
    try:
        for pt in _domain(claim, space):
            ana = complex(claim.analytic(**pt))
            ora = complex(oracle(space, **pt))
            dev = abs(ana - ora)
            rel = dev / abs(ora) if ora != 0 else (0.0 if dev == 0 else math.inf)
            max_rel = max(max_rel, rel)
            if worst is None or dev > max_abs:
                max_abs = dev
                worst = (pt, ana, ora)
    except TruncationError as exc:
        return ClaimVerdict(max_abs_dev=None, max_rel_dev=None, verdict=None, worst_point=None,
                            skipped=True, skip_reason=str(exc), **base)
    ok = max_abs <= ABS_TOL or max_rel <= REL_TOL
    return ClaimVerdict(
        max_abs_dev=max_abs, max_rel_dev=max_rel,
        verdict="consistent" if ok else "discrepant",
        worst_point={k: float(v) for k, v in worst[0].items()},
        worst_analytic=_cplx(worst[1]), worst_oracle=_cplx(worst[2]), **base)


def _id_key(cid: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", cid)]


def run_claims(space: FockSpace, claims: list[Claim] | None = None) -> list[ClaimVerdict]:
    claims = builtin_claims() if claims is None else claims
    return [evaluate_claim(space, c) for c in sorted(claims, key=lambda c: _id_key(c.id))]


# --- oracle fixtures --------------------------------------------------------

@dataclass(frozen=True)
class FixtureCheck:
    oracle: str
    params: dict
    expected: float
    value: list
    deviation: float
    passed: bool

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def load_fixtures(path=None) -> list[dict]:
    if path is None:
        text = resources.files("catkit").joinpath("data/oracle_fixtures.json").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return json.loads(text)["fixtures"]


def check_oracle_fixtures(space: FockSpace, fixtures: list[dict] | None = None) -> list[FixtureCheck]:
    fixtures = load_fixtures() if fixtures is None else fixtures
    out = []
    for fx in fixtures:
        val = complex(ORACLES[fx["oracle"]](space, **fx["params"]))
        exp = complex(fx["expected"])
        dev = abs(val - exp)
        out.append(FixtureCheck(fx["oracle"], dict(fx["params"]), fx["expected"], _cplx(val),
                                dev, dev <= FIXTURE_TOL))
    return out


@dataclass
class ClaimReport:
    dim: int
    fixtures: list[FixtureCheck]
    verdicts: list[ClaimVerdict] = field(default_factory=list)

    @property
    def fixtures_ok(self) -> bool:
        return all(f.passed for f in self.fixtures)

    @property
    def must_hold_failures(self) -> list[str]:
        return [v.id for v in self.verdicts if v.must_hold and v.verdict == "discrepant"]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "dim": self.dim,
            "oracle_fixtures": [f.to_dict() for f in self.fixtures],
            "claims": [v.to_dict() for v in self.verdicts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def claim_report(space: FockSpace, fixtures: list[dict] | None = None) -> ClaimReport:
    """Fixture self-check first, then every built-in claim."""
    checks = check_oracle_fixtures(space, fixtures)
    return ClaimReport(space.dim, checks, run_claims(space))
