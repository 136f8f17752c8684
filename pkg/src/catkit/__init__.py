"""Catability of bosonic cat states in a truncated Fock space."""

from .catability import (
    CatParams,
    GaussianParams,
    OptConfig,
    XiResult,
    cat_operator,
    min_over_gaussians,
    phase_cat_operator,
    xi,
    xi_phi,
)
from .fock import (
    DensityOp,
    FockSpace,
    Ket,
    OpMatrix,
    cat_state,
    coherent_state,
    expectation,
    fock_state,
    make_space,
)

__version__ = "0.1.0"
