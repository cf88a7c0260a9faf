"""Random instance generators used by tests, demos and the CLI test mode."""

import numpy as np

from .generators import offdiag_mask, zero_row_sums


def random_distribution(rng, d, concentration=1.0):
    """Dirichlet draw, floored away from zero so every state has mass."""
    pi = rng.dirichlet(np.full(d, concentration))
    pi = np.maximum(pi, 1e-3)
    return pi / pi.sum()


def random_generator(rng, d, scale=1.0, zero_prob=0.0):
    """Generator with exponential off-diagonal rates; entries are zeroed
    independently with probability ``zero_prob``."""
    A = rng.exponential(scale, size=(d, d))
    if zero_prob:
        A = np.where(rng.random((d, d)) < zero_prob, 0.0, A)
    A[~offdiag_mask(d)] = 0.0
    return zero_row_sums(A)


def random_family(rng, n, d, scale=1.0, zero_prob=0.0):
    return np.stack([random_generator(rng, d, scale, zero_prob) for _ in range(n)])


def random_reversible(rng, pi, scale=1.0):
    """pi-reversible generator: symmetric fluxes divided by ``pi``."""
    d = pi.size
    S = rng.exponential(scale, size=(d, d))
    S = np.triu(S, 1)
    S = S + S.T
    return zero_row_sums(S / pi[:, None])


def random_class_member(rng, d):
    """``P - I`` with ``P`` a random transition matrix of zero diagonal."""
    P = rng.exponential(size=(d, d))
    P[~offdiag_mask(d)] = 0.0
    P /= P.sum(axis=1, keepdims=True)
    return zero_row_sums(P - np.eye(d))
