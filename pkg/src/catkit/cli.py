"""Command-line front end.

Subcommands: verify, xi, sweep-phase, sweep-loss, claims, greens-demo.
Exit codes: 0 success, 1 usage or runtime error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .bruteforce import xi_double_grid
from .catability import CatParams, XiResult, _witness_parts, xi, xi_phi
from .claimcheck import claim_report, load_fixtures
from .config import FIELD_TYPES, RunConfig, load_config
from .decoherence import apply_channel, fmt_float, loss_channel, robustness_sweep, rows_to_csv
from .errors import CatkitError, DegenerateWitnessError
from .fock import (
    cat_state,
    coherent_state,
    expectation,
    fock_state,
    ladder_ops,
    max_coherent_radius,
    parity_op,
    squeezed_fock,
)
from .greens import RingLattice, empty_gf, mode_function, occupied_gf, verify_projection
from .su11 import (
    CASIMIR_CLAIMED,
    build_su11,
    casimir_diagonal,
    closure_residuals,
    flux_to_phase,
    phase_rotation,
)

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

STATE_GRAMMAR = ("cat:ALPHA:even|odd, coherent:ALPHA, fock:N, squeezed_fock:N:R:THETA, "
                 "lossy_cat:ALPHA:even|odd:TAU")
XI_HEADER = ["state", "alpha_re", "alpha_im", "branch", "phi", "xi", "gamma_star",
             "beta_re", "beta_im", "r", "theta"]
PHASE_HEADER = ["phi", "flux_over_flux0", "xi_phi", "re_parity_term", "quadratic_term"]
VERIFY_TOL = 1e-12
WIGNER_POSITIVE = -1e-3

# config keys whose flag differs from --key-name
_FLAG_NAMES = {"h": "--wigner-h"}


class UsageError(CatkitError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# --- helpers ----------------------------------------------------------------

def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a complex number") from None


def parse_state(space, spec: str):
    """Build the state named by ``spec``; see STATE_GRAMMAR."""
    parts = spec.split(":")
    kind, args = parts[0], parts[1:]
    try:
        if kind == "cat" and len(args) == 2:
            return cat_state(space, parse_complex(args[0]), args[1])
        if kind == "coherent" and len(args) == 1:
            return coherent_state(space, parse_complex(args[0]))
        if kind == "fock" and len(args) == 1:
            return fock_state(space, int(args[0]))
        if kind == "squeezed_fock" and len(args) == 3:
            zeta = float(args[1]) * cmath.exp(1j * float(args[2]))
            return squeezed_fock(space, int(args[0]), zeta)
        if kind == "lossy_cat" and len(args) == 3:
            cat = cat_state(space, parse_complex(args[0]), args[1])
            return apply_channel(cat, loss_channel(space, float(args[2])))
    except CatkitError:
        raise
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad state spec {spec!r} ({exc}); grammar: {STATE_GRAMMAR}") from None
    raise UsageError(f"bad state spec {spec!r}; grammar: {STATE_GRAMMAR}")


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | None):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(x) -> str:
    return fmt_float(x) if isinstance(x, (float, int, np.floating)) else str(x)


# --- verify -----------------------------------------------------------------

def cmd_verify(cfg: RunConfig, guard: int = 4) -> int:
    space = cfg.space()
    su = build_su11(space)
    rep = closure_residuals(su, guard, CASIMIR_CLAIMED)
    rows = [
        ("[K0,K+] = K+", rep.res_k0_kp),
        ("[K0,K-] = -K-", rep.res_k0_km),
        ("[K-,K+] = 2 K0", rep.res_km_kp),
    ]
    cas = casimir_diagonal(su, guard)
    rows.append(("Casimir constant across levels", float(np.ptp(cas))))
    for phi in (0.1, 1.0, 2.5):
        u = phase_rotation(space, phi).mat
        dev_p = np.max(np.abs(u @ su.k_plus.mat @ u.conj().T - np.exp(2j * phi) * su.k_plus.mat))
        dev_m = np.max(np.abs(u @ su.k_minus.mat @ u.conj().T - np.exp(-2j * phi) * su.k_minus.mat))
        rows.append((f"U(phi) K+- U(phi)^dag, phi={phi}", float(max(dev_p, dev_m))))
    par = parity_op(space).mat
    rows.append(("Pi^2 = 1", float(np.max(np.abs(par @ par - np.eye(space.dim))))))
    rows.append(("[Pi,K+] = 0", float(np.max(np.abs(par @ su.k_plus.mat - su.k_plus.mat @ par)))))
    a, adag, _ = ladder_ops(space)
    ccr = a.mat @ adag.mat - adag.mat @ a.mat - np.eye(space.dim)
    rows.append(("[a,a^dag] = 1", float(np.max(np.abs(ccr[: space.dim - 1, : space.dim - 1])))))
    alpha = min(1.0, 0.5 * max_coherent_radius(space.dim, space.tail_tol))
    coh = coherent_state(space, alpha)
    low = (a @ coh).amps - alpha * coh.amps
    rows.append(("a|alpha> = alpha|alpha> (within tail)",
                 float(np.max(np.abs(low[: space.dim - 1])))))
    odd_mass = float(np.sum(np.abs(cat_state(space, alpha, "even").amps[1::2]) ** 2))
    rows.append(("even cat has no odd support", odd_mass))

    failed = 0
    lines = [f"verify dim={space.dim} guard={guard}", f"{'check':<44} {'value':>12}  status"]
    for name, val in rows:
        ok = val <= VERIFY_TOL
        failed += not ok
        lines.append(f"{name:<44} {val:>12.3e}  {'PASS' if ok else 'FAIL'}")
    lines.append(f"{'Casimir = 1/16 (stated value)':<44} {float(cas[0]):>12.6g}  "
                 f"CLAIM (informational; see 'claims')")
    lines.append(f"{len(rows) - failed}/{len(rows)} checks passed")
    print("\n".join(lines))
    if cfg.json:
        payload = {"dim": space.dim, "guard": guard, "closure": rep.to_dict(),
                   "checks": [{"name": n, "value": v, "pass": v <= VERIFY_TOL} for n, v in rows]}
        _emit(json.dumps(payload, indent=2) + "\n", cfg.json)
    return EXIT_FAIL if failed else EXIT_OK


# --- xi ---------------------------------------------------------------------

def _xi_row(spec: str, alpha: complex, branch: str, phi: float, res: XiResult) -> list[str]:
    g = res.gaussian_star
    vals = [alpha.real, alpha.imag, branch, phi, res.xi, res.gamma_star,
            g.beta.real, g.beta.imag, g.r, g.theta]
    return [spec] + [_fmt(v) for v in vals]


def cmd_xi(cfg: RunConfig, state: str, alpha: complex, branch: str = "even",
           phi: float | None = None, variant: str = "phase_weighted", oracle: bool = False) -> int:
    space = cfg.space()
    rho = parse_state(space, state)
    if oracle:
        if phi is not None:
            raise UsageError("--oracle evaluates the fixed-phase witness only; drop --phi")
        ref = xi_double_grid(space, rho, alpha, branch, gamma_min=cfg.gamma_min,
                             gamma_max=cfg.gamma_max, gamma_points=cfg.gamma_points)
        payload = {"state": state, "alpha": [alpha.real, alpha.imag], "branch": branch,
                   "dim": space.dim, "method": "double grid, no refinement", **ref.to_dict()}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", cfg.json or cfg.out)
        return EXIT_OK
    if phi is None:
        res = xi(space, rho, alpha, branch, cfg.opt())
        phi_col = 0.0
    else:
        params = CatParams(alpha, branch, phi, variant)
        res = xi_phi(space, rho, params, cfg.opt())
        phi_col = params.phi
    _emit(_csv_text(XI_HEADER, [_xi_row(state, alpha, branch, phi_col, res)]), cfg.out)
    if cfg.json:
        _emit(res.to_json(indent=2) + "\n", cfg.json)
    return EXIT_OK


# --- sweeps -----------------------------------------------------------------

def cmd_sweep_phase(cfg: RunConfig, alpha: complex, branch: str = "even", n_points: int | None = 9,
                    flux: list[float] | None = None, flux_quantum: float = 1.0,
                    state: str | None = None, variant: str = "phase_weighted") -> int:
    space = cfg.space()
    rho = parse_state(space, state or f"cat:{alpha}:{branch}")
    if flux is not None:
        points = [(flux_to_phase(f, flux_quantum), f / flux_quantum) for f in flux]
    else:
        if n_points is None or n_points < 2:
            raise UsageError("--n-points must be >= 2")
        points = [(2 * math.pi * k / n_points, k / n_points) for k in range(n_points)]
    opt = cfg.opt()

    def row(pt):
        phi, fl = pt
        params = CatParams(alpha, branch, phi, variant)
        try:
            val = xi_phi(space, rho, params, opt).xi
        except DegenerateWitnessError:
            # the dressed parity term can vanish identically (phase_weighted at phi = pi)
            val = math.nan
        q, p = _witness_parts(space, params.alpha, params.branch, params.phi, params.parity_variant)
        return [_fmt(phi), _fmt(fl), _fmt(val), _fmt(expectation(p, rho).real),
                _fmt(expectation(q, rho).real)]

    _emit(_csv_text(PHASE_HEADER, ordered_map(row, points)), cfg.out)
    return EXIT_OK


def cmd_sweep_loss(cfg: RunConfig, alpha: complex, taus: list[float]) -> int:
    space = cfg.space()
    rows = robustness_sweep(space, alpha, taus, cfg.opt(), cfg.wigner())
    _emit(rows_to_csv(rows), cfg.out)
    held = all(r.xi_odd <= r.xi_even for r in rows)
    cross = [r for r in rows if r.wigner_min >= WIGNER_POSITIVE and r.xi_even < 1]
    print(f"# CHECKED-CLAIM xi_odd <= xi_even at every tau: {'true' if held else 'false'}")
    if cross:
        r = cross[0]
        print(f"# CROSSOVER tau={_fmt(r.tau)} wigner_min={_fmt(r.wigner_min)} "
              f"xi_even={_fmt(r.xi_even)}: Wigner non-negative while xi < 1")
    else:
        print("# CROSSOVER none: no swept tau has a non-negative Wigner function with xi < 1")
    return EXIT_OK


# --- claims and greens ------------------------------------------------------

def cmd_claims(cfg: RunConfig, fixtures_path: str | None = None) -> int:
    space = cfg.space()
    fixtures = load_fixtures(fixtures_path) if fixtures_path else None
    report = claim_report(space, fixtures)
    target = cfg.json or cfg.out
    _emit(report.to_json(), target)
    if target is not None:
        for v in report.verdicts:
            state = "skipped" if v.skipped else v.verdict
            dev = "" if v.skipped else f" max_abs_dev={v.max_abs_dev:.6g}"
            print(f"{v.id:<8} {state}{dev}{' (must hold)' if v.must_hold else ''}")
    bad = [f.oracle for f in report.fixtures if not f.passed]
    if bad:
        print(f"oracle fixture mismatch: {', '.join(bad)}", file=sys.stderr)
    if report.must_hold_failures:
        print(f"must-hold claims discrepant: {', '.join(report.must_hold_failures)}",
              file=sys.stderr)
    return EXIT_FAIL if bad or report.must_hold_failures else EXIT_OK


def _occupation(lattice: RingLattice, spec: str):
    parts = spec.split(":")
    try:
        if parts[0] == "empty" and len(parts) == 2:
            return empty_gf(lattice), int(parts[1])
        if parts[0] == "single" and len(parts) == 2:
            m = int(parts[1])
            return occupied_gf(lattice, {m: 1.0}), m
        if parts[0] == "thermal" and len(parts) == 3:
            m = int(parts[1])
            return occupied_gf(lattice, {m: float(parts[2])}), m
    except ValueError:
        pass
    raise UsageError(f"bad occupation spec {spec!r}; grammar: empty:M0, single:M0, thermal:M0:NU")


def cmd_greens_demo(cfg: RunConfig, sites: int, occupation: str) -> int:
    lattice = RingLattice(sites)
    g, m0 = _occupation(lattice, occupation)
    rep = verify_projection(cfg.space(), g, mode_function(lattice, m0))
    for key, val in rep.to_dict().items():
        print(f"{key:<18} {_fmt(val)}")
    ok = rep.max_dev <= 1e-10
    print(f"projection consistency: {'PASS' if ok else 'FAIL'} (tolerance 1e-10)")
    if cfg.json:
        _emit(rep.to_json() + "\n", cfg.json)
    return EXIT_OK if ok else EXIT_FAIL


# --- argument parsing -------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    for key, kind in FIELD_TYPES.items():
        flag = _FLAG_NAMES.get(key, "--" + key.replace("_", "-"))
        conv = {"int": int, "float": float}.get(kind, str)
        p.add_argument(flag, dest=key, type=conv, default=None, metavar=key.upper())
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="catkit", description="Cat-state catability toolkit",
                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify", parents=[common], help="algebra and Fock-space invariants",
                       allow_abbrev=False)
    p.add_argument("--guard", type=int, default=4)

    p = sub.add_parser("xi", parents=[common], help="catability of one state", allow_abbrev=False)
    p.add_argument("--state", required=True, help=STATE_GRAMMAR)
    p.add_argument("--alpha", type=parse_complex, required=True)
    p.add_argument("--branch", choices=["even", "odd"], default="even")
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--variant", choices=["phase_weighted", "conjugated"], default="phase_weighted")
    p.add_argument("--oracle", action="store_true", help="brute-force grid reference only")

    p = sub.add_parser("sweep-phase", parents=[common], help="xi_phi over the phase",
                       allow_abbrev=False)
    p.add_argument("--alpha", type=parse_complex, required=True)
    p.add_argument("--branch", choices=["even", "odd"], default="even")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--n-points", type=int, default=None)
    grp.add_argument("--flux", type=parse_float_list, default=None)
    p.add_argument("--flux-quantum", type=float, default=1.0)
    p.add_argument("--state", default=None, help=STATE_GRAMMAR)
    p.add_argument("--variant", choices=["phase_weighted", "conjugated"], default="phase_weighted")

    p = sub.add_parser("sweep-loss", parents=[common], help="robustness under photon loss",
                       allow_abbrev=False)
    p.add_argument("--alpha", type=parse_complex, required=True)
    p.add_argument("--tau", type=parse_float_list, default=[1.0, 0.95, 0.9, 0.8])

    p = sub.add_parser("claims", parents=[common], help="adjudicate closed-form claims",
                       allow_abbrev=False)
    p.add_argument("--fixtures", metavar="PATH", default=None)

    p = sub.add_parser("greens-demo", parents=[common], help="lattice vs Fock projection",
                       allow_abbrev=False)
    p.add_argument("--sites", type=int, default=16)
    p.add_argument("--occupation", default="single:1")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        cfg = load_config(args.config, {k: getattr(args, k) for k in FIELD_TYPES})
        cmd = args.command
        if cmd == "verify":
            return cmd_verify(cfg, args.guard)
        if cmd == "xi":
            return cmd_xi(cfg, args.state, args.alpha, args.branch, args.phi, args.variant,
                          args.oracle)
        if cmd == "sweep-phase":
            return cmd_sweep_phase(cfg, args.alpha, args.branch, args.n_points or 9, args.flux,
                                   args.flux_quantum, args.state, args.variant)
        if cmd == "sweep-loss":
            return cmd_sweep_loss(cfg, args.alpha, args.tau)
        if cmd == "claims":
            return cmd_claims(cfg, args.fixtures)
        return cmd_greens_demo(cfg, args.sites, args.occupation)
    except (CatkitError, ValueError, OSError, KeyError) as exc:
        print(f"catkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
