"""Markov generators on a finite state space.

A generator is stored as a plain ``(d, d)`` float array.  Only the off-diagonal
rates carry information; diagonals are always recomputed as the negative row
sums of the off-diagonal part (see :func:`zero_row_sums`).  A family of ``n``
generators is a ``(n, d, d)`` array.
"""

import itertools
import math

import numpy as np

from .errors import (
    DegenerateFamilyError,
    DimensionMismatchError,
    DimensionTooLargeError,
    InvalidDistributionError,
    NegativeRateError,
    NonSquareError,
    RowSumError,
)

DEFAULT_TOL = 1e-12
MAX_PERMUTATION_DIM = 6


def offdiag_mask(d):
    return ~np.eye(d, dtype=bool)


def zero_row_sums(rates):
    """Return a copy of ``rates`` whose diagonal makes every row sum to zero.

    Works on a single ``(d, d)`` matrix or a stack ``(..., d, d)``.
    """
    out = np.array(rates, dtype=float, copy=True)
    d = out.shape[-1]
    idx = np.arange(d)
    out[..., idx, idx] = 0.0
    out[..., idx, idx] = -out.sum(axis=-1)
    return out


def validate_distribution(probs, tol=DEFAULT_TOL):
    """Check that ``probs`` is a strictly positive probability vector."""
    pi = np.asarray(probs, dtype=float)
    if pi.ndim != 1 or pi.size == 0:
        raise InvalidDistributionError("distribution must be a non-empty 1-D array")
    if not np.all(np.isfinite(pi)) or np.any(pi <= 0):
        raise InvalidDistributionError("distribution entries must be finite and > 0")
    total = pi.sum()
    if abs(total - 1.0) > max(tol, 4 * np.finfo(float).eps * pi.size):
        raise InvalidDistributionError(f"distribution sums to {float(total)!r}, expected 1")
    return pi


def validate_generator(rates, tol=DEFAULT_TOL):
    """Validate a rate matrix and return a clean generator.

    Off-diagonal entries in ``[-tol, 0)`` are clamped to zero and the diagonal
    is re-normalised so that rows sum to exactly zero.

    Raises
    ------
    NonSquareError, NegativeRateError, RowSumError
    """
    A = np.asarray(rates, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NonSquareError(f"generator must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NonSquareError("generator entries must be finite")
    d = A.shape[0]
    off = offdiag_mask(d)
    bad = np.argwhere(off & (A < -tol))
    if bad.size:
        x, y = (int(v) for v in bad[0])
        raise NegativeRateError(x, y, float(A[x, y]))
    row_sums = A.sum(axis=1)
    rows = np.flatnonzero(np.abs(row_sums) > tol)
    if rows.size:
        x = int(rows[0])
        raise RowSumError(x, float(row_sums[x]))
    return zero_row_sums(np.where(off, np.maximum(A, 0.0), 0.0))


def validate_family(generators, tol=DEFAULT_TOL, recompute_diagonal=False):
    """Validate a list of generators sharing one state space.

    With ``recompute_diagonal`` the input diagonals are ignored, which is how
    instance files are read.  At least one member must be non-zero.
    """
    mats = [np.asarray(g, dtype=float) for g in generators]
    if not mats:
        raise DegenerateFamilyError("family must contain at least one generator")
    d = mats[0].shape[0] if mats[0].ndim == 2 else -1
    out = []
    for G in mats:
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise NonSquareError(f"generator must be square, got shape {G.shape}")
        if G.shape[0] != d:
            raise DimensionMismatchError("all family members must share one state space")
        if recompute_diagonal:
            G = zero_row_sums(G)
        out.append(validate_generator(G, tol))
    family = np.stack(out)
    if not np.any(family[:, offdiag_mask(d)] > 0):
        raise DegenerateFamilyError("at least one family member must be non-zero")
    return family


def _check_dims(L, pi):
    L = np.asarray(L, dtype=float)
    pi = np.asarray(pi, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise NonSquareError(f"generator must be square, got shape {L.shape}")
    if pi.shape != (L.shape[0],):
        raise DimensionMismatchError(
            f"distribution of length {pi.size} does not match {L.shape[0]} states"
        )
    return L, pi


def pi_dual(L, pi):
    """The pi-dual: off-diagonals ``pi(y) / pi(x) * L(y, x)``."""
    L, pi = _check_dims(L, pi)
    return zero_row_sums(pi[None, :] / pi[:, None] * L.T)


def is_reversible(L, pi, tol=DEFAULT_TOL):
    """Detailed balance ``pi(x) L(x, y) == pi(y) L(y, x)`` up to ``tol``."""
    L, pi = _check_dims(L, pi)
    flux = pi[:, None] * L
    off = offdiag_mask(L.shape[0])
    return bool(np.max(np.abs(flux - flux.T)[off], initial=0.0) <= tol)


def power_mean(a, b, p):
    """Entrywise two-point power mean of nonnegative arrays.

    ``p`` may be any real or +-inf.  For ``p <= 0`` an entry is 0 whenever
    either input is 0, the limit of the formula.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if p == math.inf:
        return np.maximum(a, b)
    if p == -math.inf:
        return np.minimum(a, b)
    if p == 0:
        return np.sqrt(a * b)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if p > 0:
            return ((a**p + b**p) / 2.0) ** (1.0 / p)
        pos = (a > 0) & (b > 0)
        aa = np.where(pos, a, 1.0)
        bb = np.where(pos, b, 1.0)
        return np.where(pos, ((aa**p + bb**p) / 2.0) ** (1.0 / p), 0.0)


def power_mean_reversiblization(L, pi, p):
    """P_p reversiblization: entrywise p-power mean of ``L`` and its pi-dual.

    The result is pi-reversible for every ``p``.  ``p = 0`` is the geometric
    mean, ``p = +inf`` the entrywise max and ``p = -inf`` the entrywise min
    (the Metropolis-Hastings generator).
    """
    L, pi = _check_dims(L, pi)
    Lp = pi_dual(L, pi)
    out = power_mean(L, Lp, p)
    out[~offdiag_mask(L.shape[0])] = 0.0
    return zero_row_sums(out)


def permutation_family(dim):
    """All ``dim!`` generators ``P - I`` with ``P`` a permutation matrix.

    Their convex hull is the set of doubly stochastic generators.
    """
    if dim < 2:
        raise DimensionTooLargeError(f"dim must be at least 2, got {dim}")
    if dim > MAX_PERMUTATION_DIM:
        raise DimensionTooLargeError(
            f"dim={dim} would give {math.factorial(dim)} members; cap is {MAX_PERMUTATION_DIM}"
        )
    eye = np.eye(dim)
    return np.stack([eye[list(perm)] - eye for perm in itertools.permutations(range(dim))])


def uniformizable_basis(mu, lam):
    """Basis spanning the lambda-uniformizable mu-reversible generators.

    Returns ``m (m - 1) / 2`` generators ``L_{x,y}`` (pairs ``x < y`` in
    lexicographic order) followed by the all-zeros generator.
    """
    mu = validate_distribution(mu)
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    m = mu.size
    c = lam * m * (m - 1) / 2
    members = []
    for x, y in itertools.combinations(range(m), 2):
        B = np.zeros((m, m))
        B[x, y] = c
        B[y, x] = c * mu[x] / mu[y]
        members.append(zero_row_sums(B))
    members.append(np.zeros((m, m)))
    return np.stack(members)


def uniformizable_weights(L, mu, lam, tol=1e-10):
    """Convex weights expressing ``L`` in :func:`uniformizable_basis` coordinates.

    ``L`` must be mu-reversible with ``max |L(x, x)| <= lam``.  The last weight
    belongs to the all-zeros generator.
    """
    mu = validate_distribution(mu)
    L, _ = _check_dims(L, mu)
    L = zero_row_sums(L)
    if not is_reversible(L, mu, tol):
        raise ValueError("generator is not mu-reversible")
    if np.max(np.abs(np.diag(L))) > lam * (1 + tol):
        raise ValueError("generator is not lambda-uniformizable")
    m = mu.size
    c = lam * m * (m - 1) / 2
    w = np.array([L[x, y] / c for x, y in itertools.combinations(range(m), 2)])
    return np.append(w, 1.0 - w.sum())
