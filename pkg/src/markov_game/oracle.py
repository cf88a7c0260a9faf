"""Brute-force verifiers, deliberately independent of the solver path.

* :func:`oracle_dual_max` enumerates a barycentric grid on the simplex and
  evaluates the dual objective at every point;
* :func:`oracle_edge_scan` scans each pair objective on a dense 1-D grid
  using ``f`` itself (never its derivative);
* :func:`oracle_pure_values` computes the maximin value from closed-form
  projections only.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .centroid import _PairProblem, _assemble, as_family, check_hypotheses, f_projection, validate_weights
from .divergence import divergence, pointwise_terms
from .errors import TooManyMembersError, UnsupportedSpecError
from .generators import offdiag_mask
from .solver import _Game

MAX_ORACLE_MEMBERS = 3


@dataclass(frozen=True)
class GridSpec:
    resolution: float
    bounds: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("grid resolution must be positive")


def simplex_grid(n, resolution):
    """All points of the simplex whose coordinates are multiples of ``1/K``,
    ``K = round(1 / resolution)``, in lexicographic order."""
    K = max(1, int(round(1.0 / resolution)))
    if n > MAX_ORACLE_MEMBERS:
        raise TooManyMembersError(f"grid oracle supports at most {MAX_ORACLE_MEMBERS} members, got {n}")
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        i = np.arange(K + 1)
        return np.column_stack([i, K - i]) / K
    # n == 3: for each first coordinate i the second runs over 0..K-i
    i = np.repeat(np.arange(K + 1), np.arange(K + 1, 0, -1))
    start = np.cumsum(np.r_[0, np.arange(K + 1, 1, -1)])
    j = np.arange(i.size) - np.repeat(start, np.arange(K + 1, 0, -1))
    return np.column_stack([i, j, K - i - j]) / K


def _dual_values(game, W, chunk=20000):
    """Dual objective at each row of ``W``, vectorised over the closed form."""
    cf = game._closed
    out = np.empty(W.shape[0])
    if cf is None or not cf._positive:
        for k, w in enumerate(W):
            out[k] = game.evaluate(w)[2]
        return out
    q = cf.q
    for start in range(0, W.shape[0], chunk):
        Wc = W[start:start + chunk]
        s = Wc @ cf._powered
        m = np.exp(s) if q == 0 else s ** (1.0 / q)
        terms = pointwise_terms(game.spec, m[:, None, :], game.L_off[None, :, :])
        D = terms @ game.pi_off
        out[start:start + chunk] = np.sum(Wc * D, axis=1)
    return out


def oracle_dual_max(spec, family, pi, grid, tie_rtol=1e-12):
    """Best grid point of the dual objective; returns ``(weights, value)``.

    Values within ``tie_rtol`` (relative) of the best count as ties, which
    go to the first point in lexicographic grid order.
    """
    family = as_family(family)
    n = family.shape[0]
    if n > MAX_ORACLE_MEMBERS:
        raise TooManyMembersError(f"grid oracle supports at most {MAX_ORACLE_MEMBERS} members, got {n}")
    game = _Game(spec, family, pi)
    W = simplex_grid(n, grid.resolution)
    W = W[_feasible_rows(family, W)]
    vals = _dual_values(game, W)
    top = vals.max()
    k = int(np.argmax(vals >= top - tie_rtol * max(abs(top), 1.0)))
    return W[k], float(vals[k])


def oracle_primal_min(spec, family, pi, grid):
    """Smallest primal value ``max_i D(M(w) || L_i)`` over the grid.

    Any centroid's primal value bounds the game value from above, so this is
    a certified upper bound to pair with :func:`oracle_dual_max`.
    """
    family = as_family(family)
    n = family.shape[0]
    if n > MAX_ORACLE_MEMBERS:
        raise TooManyMembersError(f"grid oracle supports at most {MAX_ORACLE_MEMBERS} members, got {n}")
    game = _Game(spec, family, pi)
    W = simplex_grid(n, grid.resolution)
    W = W[_feasible_rows(family, W)]
    return float(min(game.evaluate(w)[3] for w in W))


def _feasible_rows(family, W):
    """Grid rows putting positive weight on some nonzero member."""
    d = family.shape[-1]
    nonzero = np.any(family[:, offdiag_mask(d)] > 0, axis=1)
    return np.any((W > 0) & nonzero[None, :], axis=1)


def _scan_grid(prob, col, resolution, bounds):
    if bounds is not None:
        lo, hi = bounds
    else:
        lo, hi = 0.0, float(prob.bracket(np.array([col]))[0])
    return np.arange(lo, hi + resolution / 2, resolution)


def oracle_edge_scan(spec, family, pi, w, grid, return_plateau=False, plateau_rtol=1e-12):
    """Grid argmin of every pair objective, assembled into a generator.

    The scan runs over the fluxes ``a = pi(x) M(x, y)`` in ``[0, a_hi]`` where
    ``a_hi`` is the solver's bracket (or ``grid.bounds``).  With
    ``return_plateau`` the lower and upper ends of the set of grid points
    within ``plateau_rtol`` of the minimum are also returned, which brackets a
    flat argmin such as the total variation one.
    """
    family = as_family(family)
    pi = np.asarray(pi, dtype=float)
    w = validate_weights(w, family.shape[0])
    check_hypotheses(family, w)
    prob = _PairProblem(spec, family, pi, w)
    P = prob.xs.size
    best = np.zeros(P)
    lo_end = np.zeros(P)
    hi_end = np.zeros(P)
    for col in range(P):
        a = _scan_grid(prob, col, grid.resolution, grid.bounds)
        vals = prob.value(a, cols=slice(col, col + 1))
        k = int(np.argmin(vals))
        best[col] = a[k]
        near = np.flatnonzero(vals <= vals[k] + plateau_rtol * max(abs(vals[k]), 1.0))
        lo_end[col], hi_end[col] = a[near[0]], a[near[-1]]
    M = _assemble(pi, prob.xs, prob.ys, best)
    if return_plateau:
        return M, (_assemble(pi, prob.xs, prob.ys, lo_end), _assemble(pi, prob.xs, prob.ys, hi_end))
    return M


def oracle_pure_values(spec, family, pi):
    """Maximin value ``max_i D(M^f(L_i) || L_i)`` and the per-member values."""
    if not spec.strictly_convex:
        raise UnsupportedSpecError("pure values need a strictly convex f")
    family = as_family(family)
    pi = np.asarray(pi, dtype=float)
    per = np.array([divergence(spec, f_projection(spec, L, pi), L, pi) for L in family])
    return float(per.max()), per
