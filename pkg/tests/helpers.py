"""Shared oracles, independent of the library's circulant code paths.

The dense pipeline here recomputes entropy and mutual information from a
dense eigendecomposition with deliberately different numerics (nonsymmetric
eigensolve of A.D, slogdet instead of Cholesky log-space) so the two routes
cross-check each other.
"""

import numpy as np

from harment import build_coupling, dense_potential


def dense_matrix_power(spec, power):
    w, u = np.linalg.eigh(dense_potential(spec))
    return (u * w**power) @ u.T


def entropy_formula(mu):
    """Literal f(sqrt(mu)) summed; only valid away from mu = 1."""
    x = np.sqrt(mu)
    out = np.zeros_like(x)
    m = x > 1 + 1e-12
    xp, xm = (x[m] + 1) / 2, (x[m] - 1) / 2
    out[m] = xp * np.log(xp) - xm * np.log(xm)
    return float(out.sum())


def dense_pipeline(spec, n1):
    """(S, I) for the first-n1 block computed purely from dense functions."""
    sqrt_m = dense_matrix_power(spec, 0.5)
    inv_sqrt_m = dense_matrix_power(spec, -0.5)
    a = inv_sqrt_m[:n1, :n1]
    d = sqrt_m[:n1, :n1]
    mu = np.linalg.eigvals(a @ d).real
    s = entropy_formula(np.maximum(mu, 1.0))
    c = inv_sqrt_m[n1:, n1:]
    sign_a, ld_a = np.linalg.slogdet(a)
    sign_c, ld_c = np.linalg.slogdet(c)
    sign_v, ld_v = np.linalg.slogdet(inv_sqrt_m)
    assert sign_a == sign_c == sign_v == 1.0
    return s, 0.5 * (ld_a + ld_c - ld_v)


def dense_block_entropy(spec, start, n1):
    """Entropy of the block [start, start+n1) via the dense route."""
    sqrt_m = dense_matrix_power(spec, 0.5)
    inv_sqrt_m = dense_matrix_power(spec, -0.5)
    sel = [(start + i) % spec.n_sites for i in range(n1)]
    a = inv_sqrt_m[np.ix_(sel, sel)]
    d = sqrt_m[np.ix_(sel, sel)]
    mu = np.linalg.eigvals(a @ d).real
    return entropy_formula(np.maximum(mu, 1.0))


def eta_dense_term_by_term(eta, n):
    """Potential matrix assembled stencil by stencil from the Hamiltonian
    (1/2) sum_i (-2 eta q_i + q_{i+1} + q_{i-1})^2."""
    v = np.zeros((n, n))
    for i in range(n):
        stencil = np.zeros(n)
        stencil[i] = -2.0 * eta
        stencil[(i + 1) % n] += 1.0
        stencil[(i - 1) % n] += 1.0
        v += np.outer(stencil, stencil)
    return v


def random_valid_spec(rng, *, n_sites=None, max_range=5, dimension=1):
    """Random positive-definite finite-range coupling.

    The symbol is |h(z)|**2 for a random real polynomial h of degree
    < max_range, plus a small diagonal ridge, so positivity holds by
    construction and the conditioning stays moderate.
    """
    if n_sites is None:
        n_sites = int(rng.integers(4, 33)) * 8
    deg = int(rng.integers(1, max_range))
    h = rng.normal(size=deg + 1)
    auto = np.correlate(h, h, mode="full")  # lags -deg..deg
    coeffs = {k - deg: auto[k] for k in range(2 * deg + 1)}
    coeffs[0] += 1e-3 * float(np.dot(h, h)) + 1e-6
    scale = float(rng.uniform(0.25, 4.0))
    coeffs = {k: scale * v for k, v in coeffs.items()}
    if dimension == 1:
        return build_coupling(1, (n_sites,), coeffs)
    raise ValueError("only 1D random specs are generated here")
