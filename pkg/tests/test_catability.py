import cmath
import json
import math
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from catkit.catability import (
    CatParams,
    GaussianParams,
    OptConfig,
    XiResult,
    _select,
    cat_operator,
    gaussian_pure_state,
    min_over_gaussians,
    phase_cat_operator,
    quadratic_part,
    rotated_parity,
    xi,
    xi_phi,
)
from catkit.decoherence import apply_channel, loss_channel
from catkit.errors import DegenerateWitnessError, NonHermitianError
from catkit.fock import (
    Ket,
    OpMatrix,
    cat_state,
    coherent_state,
    expectation,
    fock_state,
    ladder_ops,
    make_space,
    squeezed_fock,
)


def golden():
    text = resources.files("catkit").joinpath("data/golden_xi.json").read_text()
    return json.loads(text)


# --- operators ---------------------------------------------------------------

def test_cat_annihilates_matching_operator(space):
    cat = cat_state(space, 1.2, "even")
    assert expectation(cat_operator(space, 1.2, 1.0, "even"), cat).real <= 1e-9


def test_zero_amplitude_operator_arithmetic(space):
    op = cat_operator(space, 0.0, 1.0, "even")
    assert expectation(op, fock_state(space, 1)).real == pytest.approx(2.0)
    assert expectation(op, fock_state(space, 0)).real == pytest.approx(0.0)


def test_negative_gamma_rejected(space):
    with pytest.raises(ValueError):
        cat_operator(space, 1.0, -0.1)
    with pytest.raises(ValueError):
        phase_cat_operator(space, CatParams(1.0), -1.0)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.2, 2.0])
@pytest.mark.parametrize("gamma", [0.01, 1.0, 100.0])
@pytest.mark.parametrize("branch", ["even", "odd"])
def test_cat_operator_psd(space, alpha, gamma, branch):
    op = cat_operator(space, alpha, gamma, branch)
    assert np.max(np.abs(op.mat - op.mat.conj().T)) == 0
    assert np.linalg.eigvalsh(op.mat)[0] >= -1e-9


@settings(max_examples=15)
@given(gamma=st.floats(min_value=0.1, max_value=10.0), alpha=st.sampled_from([0.8, 1.2]),
       branch=st.sampled_from(["even", "odd"]))
def test_ground_state_is_cat(gamma, alpha, branch):
    sp = make_space(64)
    w, v = np.linalg.eigh(cat_operator(sp, alpha, gamma, branch).mat)
    ground = Ket(v[:, 0], sp)
    assert abs(ground.overlap(cat_state(sp, alpha, branch))) ** 2 >= 1 - 1e-8


@pytest.mark.parametrize("variant", ["phase_weighted", "conjugated"])
@pytest.mark.parametrize("branch", ["even", "odd"])
def test_phase_operator_reduces_at_zero_phase(space, variant, branch):
    a = phase_cat_operator(space, CatParams(1.1, branch, 0.0, variant), 0.7).mat
    b = cat_operator(space, 1.1, 0.7, branch).mat
    assert np.max(np.abs(a - b)) <= 1e-13


@pytest.mark.parametrize("phi", [0.3, 1.0, math.pi / 2, 2.9])
def test_conjugated_parity_is_plain_parity(space, phi):
    assert np.array_equal(rotated_parity(space, phi, "conjugated").mat,
                          rotated_parity(space, 0.0, "conjugated").mat)


def test_phase_weighted_parity_term_series(space):
    frozen = oracles.FROZEN["pw_parity_term_a1_pi3"]
    assert oracles.phase_weighted_parity_term(1.0, math.pi / 3) == pytest.approx(frozen, rel=1e-14)
    params = CatParams(1.0, "even", math.pi / 3, "phase_weighted")
    psi = coherent_state(space, 1.0)
    total = expectation(phase_cat_operator(space, params, 1.0), psi).real
    quad = expectation(quadratic_part(space, 1.0, math.pi / 3), psi).real
    assert total - quad == pytest.approx(frozen, abs=1e-12)


@given(beta=st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False),
       alpha=st.floats(min_value=0.0, max_value=2.0),
       phi=st.floats(min_value=0.0, max_value=2 * math.pi, exclude_max=True),
       gamma=st.floats(min_value=0.0, max_value=5.0),
       branch=st.sampled_from(["even", "odd"]))
def test_phase_weighted_expectation_term_by_term(beta, alpha, phi, gamma, branch):
    sp = make_space(64)
    psi = coherent_state(sp, beta)
    op = phase_cat_operator(sp, CatParams(alpha, branch, phi, "phase_weighted"), gamma)
    sign = 1 if branch == "even" else -1
    lam = abs(beta) ** 2
    quad = abs(beta ** 2 - alpha ** 2 * cmath.exp(2j * phi)) ** 2
    series = sum(oracles.poisson(lam, n) * (-1) ** n * math.cos(n * phi) for n in range(64))
    expected = quad + gamma * (1 - sign * series)
    assert expectation(op, psi).real == pytest.approx(expected, abs=1e-9 * max(1, expected))


def test_phase_operator_is_hermitian(space):
    op = phase_cat_operator(space, CatParams(1.3, "odd", 0.9), 2.0)
    assert op.hermitian_hint
    assert np.max(np.abs(op.mat - op.mat.conj().T)) == 0


def test_cat_params_validation():
    assert CatParams(1, phi=2 * math.pi + 0.5).phi == pytest.approx(0.5)
    assert CatParams(1, phi=-0.5).phi == pytest.approx(2 * math.pi - 0.5)
    with pytest.raises(ValueError):
        CatParams(1, parity_variant="twisted")
    with pytest.raises(ValueError):
        CatParams(1, branch="up")


def test_opt_config_validation():
    with pytest.raises(ValueError):
        OptConfig(gamma_min=0)
    with pytest.raises(ValueError):
        OptConfig(gamma_min=10, gamma_max=1)
    with pytest.raises(ValueError):
        OptConfig(starts=0)


# --- Gaussian states and floors -------------------------------------------------

def test_gaussian_pure_state_examples(space):
    assert gaussian_pure_state(space, GaussianParams()).amps[0] == pytest.approx(1)
    psi = gaussian_pure_state(space, GaussianParams(1.0, 0))
    assert abs(psi.overlap(coherent_state(space, 1.0))) ** 2 >= 1 - 1e-9
    _, _, n = ladder_ops(space)
    sq = gaussian_pure_state(space, GaussianParams(0, 0.5))
    assert expectation(n, sq).real == pytest.approx(math.sinh(0.5) ** 2, rel=1e-10)


def test_gaussian_params_polar_view():
    g = GaussianParams(0.5j, 0.3 * cmath.exp(-1j))
    assert g.r == pytest.approx(0.3)
    assert g.theta == pytest.approx(2 * math.pi - 1)
    assert g.to_dict()["beta_im"] == 0.5


def test_floor_of_number_operator(space):
    _, _, n = ladder_ops(space)
    res = min_over_gaussians(space, n)
    assert res.value == pytest.approx(0.0, abs=1e-10)
    assert abs(res.g_star.beta) < 1e-4 and res.g_star.r < 1e-4


def test_floor_of_quadratic_part_at_zero(space):
    value, g = min_over_gaussians(space, quadratic_part(space, 0.0))
    assert value == pytest.approx(0.0, abs=1e-10)


def test_floor_is_strictly_positive_and_below_coherent_values(space):
    op = cat_operator(space, 1.5, 1.0, "even")
    res = min_over_gaussians(space, op)
    assert 0 < res.value
    for b in (1.5, -1.5, 0, 1.5j):
        assert res.value <= expectation(op, coherent_state(space, b)).real + 1e-12


def test_floor_rejects_non_hermitian(space):
    a, _, _ = ladder_ops(space)
    with pytest.raises(NonHermitianError):
        min_over_gaussians(space, a)


def test_floor_flags_unconverged(space):
    op = cat_operator(space, 1.5, 1.0, "even")
    res = min_over_gaussians(space, op, OptConfig(max_iters=3, max_restarts=0, starts=2))
    assert res.converged is False


# --- xi ---------------------------------------------------------------------

def _check_result(res: XiResult):
    assert res.xi >= 0 and res.denominator > 0
    assert res.xi == pytest.approx(res.numerator / res.denominator, rel=1e-9)
    assert (res.gamma_star, res.xi) in res.optimizer_trace


def test_xi_ideal_cat(space):
    res = xi(space, cat_state(space, 1.2, "even"), 1.2, "even")
    assert res.xi <= 1e-6
    assert res.interpretation() == "ideal-cat"
    _check_result(res)


def test_xi_coherent_is_uninformative(space):
    res = xi(space, coherent_state(space, 1.2), 1.2, "even")
    assert res.xi >= 1 - 1e-3
    assert res.interpretation() == "uninformative"
    _check_result(res)


def test_xi_fock_one_matches_grid_fixture(space):
    ref = golden()
    assert (ref["state"], ref["branch"], ref["alpha"]) == ("fock:1", "odd", [0.8, 0.0])
    res = xi(space, fock_state(space, 1), 0.8, "odd")
    assert 0 < res.xi < 1
    assert res.interpretation() == "partial-cat"
    assert res.xi == pytest.approx(ref["xi"], rel=2e-3)
    _check_result(res)


def test_xi_is_insensitive_to_global_phase(space):
    psi = squeezed_fock(space, 1, 0.3)
    shifted = Ket(psi.amps * cmath.exp(0.77j), space)
    assert xi(space, psi, 0.9, "odd").xi == pytest.approx(xi(space, shifted, 0.9, "odd").xi,
                                                          rel=1e-12)


def test_xi_result_json(space):
    res = xi(space, cat_state(space, 0.8, "odd"), 0.8, "odd")
    d = json.loads(res.to_json())
    assert {"xi", "gamma_star", "gaussian_star", "numerator", "denominator",
            "optimizer_trace", "excluded_gammas", "interpretation"} <= set(d)
    assert set(d["gaussian_star"]) == {"beta_re", "beta_im", "r", "theta"}


def test_xi_degenerate_witness(space):
    # the phase-weighted parity term vanishes at phi = pi, leaving a floor of 0
    params = CatParams(1.0, "even", math.pi, "phase_weighted")
    with pytest.raises(DegenerateWitnessError):
        xi_phi(space, cat_state(space, 1.0), params)


def test_select_breaks_ties_toward_small_gamma():
    trace = [(10.0, 0.5), (0.1, 0.5 * (1 + 1e-10)), (1.0, 0.7)]
    assert _select(trace) == 1
    assert _select([(2.0, 0.3), (3.0, 0.2)]) == 1


def test_xi_phi_reduces_to_xi(space):
    rho = apply_channel(cat_state(space, 1.2, "even"), loss_channel(space, 0.9))
    a = xi(space, rho, 1.2, "even")
    b = xi_phi(space, rho, CatParams(1.2, "even", 0.0, "phase_weighted"))
    assert abs(a.xi - b.xi) <= 1e-6
    assert b.light_norm == pytest.approx(
        expectation(cat_operator(space, 1.2, b.gamma_star, "even"), rho).real / 1.2 ** 4)


def test_xi_phi_of_cat_at_zero_phase(space):
    res = xi_phi(space, cat_state(space, 1.2, "even"), CatParams(1.2, "even", 0.0))
    assert res.xi <= 1e-6


def test_xi_phi_minimal_at_zero_phase(space):
    cat = cat_state(space, 1.2, "even")
    vals = [xi_phi(space, cat, CatParams(1.2, "even", k * math.pi / 8)).xi for k in range(8)]
    assert int(np.argmin(vals)) == 0
    assert all(v > 0.1 for v in vals[1:])
