"""Independent reference computations, written before the library routes.

Each function uses plain Python arithmetic (math, fractions, explicit
sums) and none of catkit. The FROZEN table holds the values these produced
when first run; tests check both that the oracles still reproduce them and
that the library agrees.
"""

import cmath
import math


def poisson(lam, n):
    return math.exp(-lam + n * math.log(lam) - math.lgamma(n + 1)) if lam else float(n == 0)


def squeezed_vacuum_mean_photons(r, terms=200):
    """sum_n 2n P(2n) with P(2n) = (2n)! tanh^{2n} r / (4^n n!^2 cosh r)."""
    th = math.tanh(r)
    total = 0.0
    for n in range(terms):
        logp = (math.lgamma(2 * n + 1) + 2 * n * math.log(th) - n * math.log(4)
                - 2 * math.lgamma(n + 1) - math.log(math.cosh(r))) if n else -math.log(math.cosh(r))
        total += 2 * n * math.exp(logp)
    return total


def phase_weighted_parity_term(alpha, phi, terms=64):
    """Re[1 - sum_n P_n (-1)^n e^{i n phi}] for a coherent state, truncated series."""
    lam = abs(alpha) ** 2
    s = sum(poisson(lam, n) * (-1) ** n * cmath.exp(1j * n * phi) for n in range(terms))
    return (1 - s).real


def cat_amplitudes(alpha, sign, dim):
    amps = [math.exp(-alpha ** 2 / 2) * alpha ** n / math.sqrt(math.factorial(n))
            * (1 + sign * (-1) ** n) for n in range(dim)]
    norm = math.sqrt(sum(a * a for a in amps))
    return [a / norm for a in amps]


def lossy_cat_fidelity(alpha, tau, dim=64):
    """<cat| L_tau(|cat><cat|) |cat> from the closed-form loss matrix elements."""
    c = cat_amplitudes(alpha, 1, dim)
    total = 0.0
    for m in range(dim):
        for n in range(dim):
            if c[m] == 0 or c[n] == 0:
                continue
            rho = 0.0
            for k in range(dim - max(m, n)):
                rho += (c[m + k] * c[n + k]
                        * math.sqrt(math.comb(m + k, k) * math.comb(n + k, k))
                        * tau ** ((m + n) / 2) * (1 - tau) ** k)
            total += c[m] * rho * c[n]
    return total


def geometric_pair_moment(nu, terms=4000):
    """sum_n n(n-1) (1-q) q^n with q = nu / (1 + nu)."""
    q = nu / (1 + nu)
    return sum(n * (n - 1) * (1 - q) * q ** n for n in range(terms))


def coherent_normal_moment(alpha, terms=200):
    """<a^dag^2 a^2> = sum_n n(n-1) P_n."""
    lam = abs(alpha) ** 2
    return sum(n * (n - 1) * poisson(lam, n) for n in range(terms))


FROZEN = {
    "squeezed_vacuum_n_r05": 0.27154031740762197,
    "pw_parity_term_a1_pi3": 0.8554430406294145,
    "lossy_cat_fidelity_a12_t095": 0.9395934108084177,
    "geometric_pair_moment_nu05": 0.5,
    "coherent_normal_moment_a1": 0.9999999999999999,
}
