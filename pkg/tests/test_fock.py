import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from catkit.errors import (
    DegenerateStateError,
    DimensionMismatchError,
    InvalidDimensionError,
    NonHermitianError,
    OutOfRangeError,
    TruncationError,
)
from catkit.fock import (
    DensityOp,
    Ket,
    OpMatrix,
    as_density,
    cat_state,
    coherent_state,
    displacement_op,
    expectation,
    fock_state,
    gaussian_ket,
    ladder_ops,
    make_space,
    max_coherent_radius,
    min_coherent_dim,
    parity_op,
    squeeze_op,
    squeezed_fock,
    tail_mass,
    unitarity_guard,
)

amplitudes = st.complex_numbers(max_magnitude=2.5, allow_nan=False, allow_infinity=False)


def test_make_space_defaults():
    sp = make_space()
    assert (sp.dim, sp.herm_tol, sp.tail_tol) == (64, 1e-10, 1e-10)


@pytest.mark.parametrize("dim", [0, 3, -5, 2.5, True])
def test_make_space_rejects_bad_dim(dim):
    with pytest.raises(InvalidDimensionError):
        make_space(dim)


def test_make_space_rejects_bad_tolerances():
    with pytest.raises(ValueError):
        make_space(16, herm_tol=0)
    with pytest.raises(ValueError):
        make_space(16, tail_tol=-1e-3)


def test_ladder_ops_entries(space):
    a, adag, n = ladder_ops(space)
    assert a.mat[0, 1] == 1.0
    assert a.mat[3, 4] == pytest.approx(2.0)
    assert np.array_equal(adag.mat, a.mat.T)
    assert np.array_equal(np.diag(n.mat).real, np.arange(64))


def test_ccr_holds_below_cutoff(space):
    a, adag, _ = ladder_ops(space)
    comm = a.mat @ adag.mat - adag.mat @ a.mat
    assert np.max(np.abs(comm[:-1, :-1] - np.eye(63))) < 1e-13
    # the top row carries the truncation artefact
    assert comm[-1, -1] == pytest.approx(-63)


def test_parity_op(space):
    par = parity_op(space).mat
    assert np.array_equal(par @ par, np.eye(64))
    assert par[1, 1] == -1 and par[2, 2] == 1


def test_fock_state_and_range(space):
    k = fock_state(space, 5)
    assert k.amps[5] == 1 and k.norm() == 1
    with pytest.raises(OutOfRangeError):
        fock_state(space, 64)
    with pytest.raises(OutOfRangeError):
        fock_state(space, -1)


def test_coherent_state_eigen_relation(space):
    alpha = 1.1 - 0.4j
    psi = coherent_state(space, alpha)
    a, _, n = ladder_ops(space)
    low = (a @ psi).amps
    assert np.max(np.abs(low[:-1] - alpha * psi.amps[:-1])) < 1e-14
    assert expectation(n, psi).real == pytest.approx(abs(alpha) ** 2, abs=1e-12)


def test_coherent_state_truncation_error_carries_min_dim():
    sp = make_space(16)
    with pytest.raises(TruncationError) as info:
        coherent_state(sp, 3.0)
    assert info.value.min_dim == min_coherent_dim(3.0, sp.tail_tol)
    assert coherent_state(make_space(info.value.min_dim), 3.0).norm() == pytest.approx(1)


def test_max_coherent_radius_is_consistent():
    r = max_coherent_radius(32, 1e-10)
    coherent_state(make_space(32), 0.999 * r)
    with pytest.raises(TruncationError):
        coherent_state(make_space(32), 1.01 * r)


@given(alpha=amplitudes)
def test_coherent_normalized_and_poisson(alpha):
    sp = make_space(64)
    psi = coherent_state(sp, alpha)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    lam = abs(alpha) ** 2
    assert psi.probabilities()[3] == pytest.approx(oracles.poisson(lam, 3), abs=1e-10)


@given(alpha=amplitudes.filter(lambda z: abs(z) > 0.05), branch=st.sampled_from(["even", "odd"]))
def test_cat_parity_support_is_exact(alpha, branch):
    sp = make_space(64)
    psi = cat_state(sp, alpha, branch)
    wrong = psi.amps[1::2] if branch == "even" else psi.amps[0::2]
    assert np.all(wrong == 0)
    par = expectation(parity_op(sp), psi).real
    assert par == pytest.approx(1.0 if branch == "even" else -1.0, abs=1e-14)


def test_cat_state_matches_superposition(space):
    alpha = 1.2
    plus = coherent_state(space, alpha).amps + coherent_state(space, -alpha).amps
    plus /= np.linalg.norm(plus)
    assert np.max(np.abs(cat_state(space, alpha, "even").amps - plus)) < 1e-14


def test_odd_cat_at_zero_is_degenerate(space):
    with pytest.raises(DegenerateStateError):
        cat_state(space, 0.0, "odd")
    assert cat_state(space, 0.0, "even").amps[0] == 1


def test_branch_names(space):
    assert np.array_equal(cat_state(space, 1, "+").amps, cat_state(space, 1, "even").amps)
    with pytest.raises(ValueError):
        cat_state(space, 1, "sideways")


def test_displacement_of_vacuum_is_coherent(space):
    beta = 0.7 + 0.2j
    d = displacement_op(space, beta)
    psi = Ket(d.mat[:, 0], space, normalized=False)
    assert abs(psi.overlap(coherent_state(space, beta))) == pytest.approx(1, abs=1e-12)
    g = unitarity_guard(beta)
    keep = slice(0, 64 - g)
    uu = d.mat.conj().T @ d.mat
    assert np.max(np.abs(uu[keep, keep] - np.eye(64 - g))) < 1e-10


def test_squeeze_op_matches_recursion(space):
    zeta = 0.4 * np.exp(0.9j)
    col = squeeze_op(space, zeta).mat[:, 0]
    ref = gaussian_ket(space, 0, zeta).amps
    assert np.max(np.abs(col - ref)) < 1e-12


def test_squeezed_vacuum_photon_number(space):
    psi = gaussian_ket(space, 0, 0.5)
    _, _, n = ladder_ops(space)
    frozen = oracles.FROZEN["squeezed_vacuum_n_r05"]
    assert oracles.squeezed_vacuum_mean_photons(0.5) == pytest.approx(frozen, rel=1e-14)
    assert expectation(n, psi).real == pytest.approx(frozen, rel=1e-10)


def test_squeezed_fock_number_one(space):
    r = 0.3
    psi = squeezed_fock(space, 1, r)
    _, _, n = ladder_ops(space)
    # S(r)^dag n S(r) = cosh 2r n + sinh^2 r + ... -> 3 sinh^2 r + 1 on |1>
    assert expectation(n, psi).real == pytest.approx(1 + 3 * math.sinh(r) ** 2, abs=1e-10)
    assert np.all(np.abs(psi.amps[0::2]) == 0)
    with pytest.raises(OutOfRangeError):
        squeezed_fock(space, 16, 0.1)


def test_tail_mass(space):
    psi = fock_state(space, 63)
    assert tail_mass(psi, 1) == 1
    assert tail_mass(coherent_state(space, 1.0), 8) < 1e-30
    with pytest.raises(OutOfRangeError):
        tail_mass(psi, 0)


def test_expectation_density_matches_ket(space):
    psi = coherent_state(space, 0.9j)
    a, adag, _ = ladder_ops(space)
    op = adag @ a @ a
    assert expectation(op, psi) == pytest.approx(expectation(op, as_density(psi)), abs=1e-13)


def test_density_validation(space):
    with pytest.raises(NonHermitianError):
        DensityOp(np.triu(np.ones((64, 64))) / 64, space)
    with pytest.raises(ValueError):
        DensityOp(np.eye(64), space)
    with pytest.raises(ValueError):
        DensityOp(np.diag([1.5, -0.5] + [0] * 62), space)


def test_dimension_mismatch():
    a = make_space(16)
    b = make_space(32)
    with pytest.raises(DimensionMismatchError):
        expectation(parity_op(a), fock_state(b, 0))
    with pytest.raises(DimensionMismatchError):
        OpMatrix(np.eye(4), a)


def test_objects_are_immutable(space):
    psi = fock_state(space, 1)
    with pytest.raises(ValueError):
        psi.amps[0] = 1
    with pytest.raises(NonHermitianError):
        OpMatrix(np.triu(np.ones((64, 64))), space, hermitian_hint=True)
