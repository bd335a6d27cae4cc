"""Independent test oracles.

Everything here deliberately avoids the code paths it checks: power
iteration instead of the linear solve, the explicit binomial summation
instead of the closed-form power, plain Monte Carlo with numpy's default
generator instead of quadrature, and central differences for derivatives.
"""

import math

import numpy as np
from scipy.special import expit


def power_iteration(matrix, tol=1e-12, max_iter=10**6):
    """Stationary distribution by left power iteration from uniform."""
    matrix = np.asarray(matrix, dtype=float)
    pi = np.full(matrix.shape[0], 1.0 / matrix.shape[0])
    for _ in range(max_iter):
        nxt = pi @ matrix
        if np.abs(nxt - pi).sum() < tol:
            return nxt / nxt.sum()
        pi = nxt
    raise RuntimeError("power iteration did not converge")


def binomial_sum_w(n, alpha, p_rej, p_rec):
    """All-reject probability as the explicit sum over rejective-group sizes."""
    total = 0.0
    for k in range(n + 1):
        total += (
            math.comb(n, k)
            * alpha**k
            * (1.0 - alpha) ** (n - k)
            * p_rej**k
            * p_rec ** (n - k)
        )
    return total


def mc_gaussian_w(n, u_minus, u_plus, beta, sigma, alpha, draws, seed):
    """(mean, standard error) of the shared-noise all-reject probability,
    straight Monte Carlo over the shared shift."""
    rng = np.random.default_rng(seed)
    xi = rng.normal(0.0, sigma, draws)
    mixture = alpha * expit(-beta * (u_minus + xi)) + (1.0 - alpha) * expit(
        -beta * (u_plus + xi)
    )
    values = mixture**n
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(draws))


def closed_form_pi(g, a, s):
    """Hand-solved stationary distribution for interior parameters.

    From the balance equations: pi1 = (g/a) pi0, pi2 = g pi0,
    pi3 = s g pi0 / (1 - g), then normalize.
    """
    pi0 = 1.0 / (1.0 + g / a + g + s * g / (1.0 - g))
    return np.array([pi0, g / a * pi0, g * pi0, s * g / (1.0 - g) * pi0])


def central_diff(f, x, h):
    return (f(x + h) - f(x - h)) / (2.0 * h)
