"""Compiled inner loop for the Gaussian-floor search.

Falls back to plain Python (same code, much slower) when numba is absent.
"""

import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def gaussian_quadratic_form(mat, beta_re, beta_im, z_re, z_im, cutoff):
    """<psi|M|psi> / <psi|psi> for psi = D(beta) S(zeta)|0> truncated to len(mat).

    The amplitude recursion stops once less than ``cutoff`` probability is left.
    Returns (value, captured probability, whether every level was generated).
    """
    dim = mat.shape[0]
    beta = complex(beta_re, beta_im)
    r = math.hypot(z_re, z_im)
    if r > 0.0:
        ph = complex(z_re / r, z_im / r)
        th = math.tanh(r)
        ch = math.cosh(r)
    else:
        ph = complex(1.0, 0.0)
        th = 0.0
        ch = 1.0
    bc = beta.conjugate()
    lam = beta + bc * ph * th
    mu = ph * th
    amps = np.zeros(dim, dtype=np.complex128)
    c0 = np.exp(-0.5 * (beta_re * beta_re + beta_im * beta_im) - 0.5 * bc * bc * mu) / math.sqrt(ch)
    amps[0] = c0
    w = c0.real * c0.real + c0.imag * c0.imag
    m = 1
    prev = complex(0.0, 0.0)
    cur = c0
    while m < dim and 1.0 - w > cutoff:
        k = m - 1
        nxt = (lam * cur - mu * math.sqrt(k) * prev) / math.sqrt(k + 1)
        amps[m] = nxt
        w += nxt.real * nxt.real + nxt.imag * nxt.imag
        prev = cur
        cur = nxt
        m += 1
    acc = complex(0.0, 0.0)
    for i in range(m):
        row = complex(0.0, 0.0)
        for j in range(m):
            row += mat[i, j] * amps[j]
        acc += amps[i].conjugate() * row
    return acc.real / w, w, m == dim and 1.0 - w > cutoff
