"""The game layer: dual objective, projected subgradient solver, diagnostics.

The probabilist's mixed strategy is a weight vector ``w`` on the simplex.
Its payoff ``sum_i w_i D_f(M^f_n(w) || L_i)`` (the dual objective, a concave
function of ``w``) is maximised by projected subgradient steps on
``h(w) = -dual(w)``; the centroid at the maximiser is the Chebyshev center and
the optimal value is the Chebyshev radius.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .centroid import (
    CentroidResult,
    ClosedFormCentroid,
    as_family,
    check_hypotheses,
    f_projection,
    validate_weights,
    weighted_centroid,
    weighted_centroid_generic,
)
from .divergence import divergence, divergences_to_family, pointwise_terms, total_variation
from .errors import (
    ClassViolationError,
    EmptyInputError,
    InfiniteDivergenceError,
    NonFiniteIterateError,
    NotConvergedError,
    UnsupportedSpecError,
)
from .generators import _check_dims, offdiag_mask, zero_row_sums


def simplex_project(v):
    """Euclidean projection of ``v`` onto the probability simplex.

    Sort-and-threshold: with ``u`` sorted decreasingly, ``rho`` is the last
    index where ``u_j - (sum_{i<=j} u_i - 1) / j > 0`` and the result is
    ``max(v - theta, 0)`` with ``theta = (sum_{i<=rho} u_i - 1) / rho``.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise EmptyInputError("simplex projection needs a non-empty 1-D vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    # the condition holds on a prefix, so counting finds its last index
    rho = int(np.count_nonzero(u * k > css)) - 1
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


class _Game:
    """Cached per-instance state so the solver loop stays cheap."""

    def __init__(self, spec, family, pi, method="auto"):
        self.spec = spec
        self.family = as_family(family)
        self.pi = np.asarray(pi, dtype=float)
        _check_dims(self.family[0], self.pi)
        self.n = self.family.shape[0]
        d = self.pi.size
        self.off = offdiag_mask(d)
        self.L_off = self.family[:, self.off]
        self.pi_off = np.broadcast_to(self.pi[:, None], (d, d))[self.off]
        use_closed = method == "closed" or (method == "auto" and spec.projection_order is not None)
        self._closed = ClosedFormCentroid(spec, self.family, self.pi) if use_closed else None
        self._expanded = None
        if self._closed is not None and np.all(self.L_off > 0):
            self._expanded = _ExpandedDivergence(spec, self.L_off, self.pi_off)

    def centroid_entries(self, w):
        if self._closed is not None:
            return self._closed(w)
        return self.centroid_result(w).centroid[self.off]

    def centroid_result(self, w):
        if self._closed is not None:
            M = self.matrix(self._closed(w))
            return CentroidResult(M, self.divergences(M[self.off]))
        return weighted_centroid_generic(self.spec, self.family, self.pi, w)

    def divergences(self, entries):
        if self._expanded is not None and entries.min() > 0:
            return self._expanded(entries)
        return pointwise_terms(self.spec, entries[None, :], self.L_off) @ self.pi_off

    def divergences_exact(self, entries):
        """Entrywise sum without the expanded fast path (no cancellation)."""
        return pointwise_terms(self.spec, entries[None, :], self.L_off) @ self.pi_off

    def matrix(self, entries):
        d = self.pi.size
        M = np.zeros((d, d))
        M[self.off] = entries
        return zero_row_sums(M)

    def evaluate(self, w):
        """Return ``(entries, divergences, dual, primal)`` at weights ``w``."""
        m = self.centroid_entries(w)
        D = self.divergences(m)
        return m, D, float(w @ D), float(D.max())


class _ExpandedDivergence:
    """``M -> [D_f(M || L_i)]_i`` expanded into matrix products.

    Valid when every member rate and every centroid entry is positive; the
    member-only factors are computed once.
    """

    def __init__(self, spec, L_off, pi_off):
        self.kind, self.a = spec.kind, spec.param
        self.pi = pi_off
        self.mass = L_off @ pi_off
        if self.kind == "alpha":
            self.A = L_off ** (1.0 - self.a) * pi_off
        elif self.kind == "kl":
            self.A = np.log(L_off) * pi_off
        elif self.kind == "reverse-kl":
            self.A = L_off * pi_off
            self.c = (L_off * np.log(L_off)) @ pi_off
        else:
            self.A = np.sqrt(L_off) * pi_off

    def __call__(self, m):
        k, a = self.kind, self.a
        pm = self.pi @ m
        if k == "alpha":
            return (self.A @ m**a - a * pm - (1.0 - a) * self.mass) / (a * (a - 1.0))
        if k == "kl":
            return (self.pi * m) @ np.log(m) - self.A @ m - pm + self.mass
        if k == "reverse-kl":
            return -self.A @ np.log(m) + self.c + pm - self.mass
        return pm - 2.0 * (self.A @ np.sqrt(m)) + self.mass


@dataclass(frozen=True)
class DualObjectiveState:
    """Dual and primal values at a weight vector.

    ``dual_value = sum_i w_i D_f(centroid || L_i) = -h(w)``,
    ``primal_value = max_i D_f(centroid || L_i)`` and ``gap`` is their
    difference, a certificate of suboptimality for both.
    """

    weights: np.ndarray
    centroid: CentroidResult
    dual_value: float
    primal_value: float
    gap: float


def dual_objective(spec, family, pi, w, method="auto"):
    family = as_family(family)
    w = validate_weights(w, family.shape[0])
    check_hypotheses(family, w)
    res = weighted_centroid(spec, family, pi, w, method=method)
    D = res.per_member_divergence
    if not np.all(np.isfinite(D)):
        dual = float(w @ np.where(w > 0, D, 0.0))
    else:
        dual = float(w @ D)
    primal = float(D.max())
    return DualObjectiveState(w, res, dual, primal, primal - dual)


def _subgradient_from(D, ref_index):
    return D[ref_index] - D


def subgradient(spec, family, pi, v, ref_index=-1, method="auto"):
    """Subgradient of ``h`` at ``v``: ``g_i = D(M(v)||L_ref) - D(M(v)||L_i)``.

    ``ref_index`` is 0-based; the default uses the last member.  Any member
    gives a valid subgradient.
    """
    state = dual_objective(spec, family, pi, v, method=method)
    D = state.centroid.per_member_divergence
    if not np.all(np.isfinite(D)):
        raise InfiniteDivergenceError("centroid has infinite divergence to some member")
    return _subgradient_from(D, ref_index)


def estimate_B(spec, family, pi, w0, safety=4.0, method="auto"):
    """Empirical bound on ``||g||^2``: ``safety * n * (max_i D(M(w0)||L_i))^2``."""
    state = dual_objective(spec, family, pi, w0, method=method)
    if not math.isfinite(state.primal_value):
        raise InfiniteDivergenceError("divergence at w0 is infinite")
    n = as_family(family).shape[0]
    return safety * n * state.primal_value**2


@dataclass
class EquilibriumReport:
    """Outcome of :func:`solve_game`.

    ``value`` is the dual objective at the averaged weights ``weights_avg``
    and ``chebyshev_radius`` the primal value there; ``gap`` is their
    difference.  ``slackness[i] = D(centroid || L_i) - chebyshev_radius``.

    ``trace`` rows are ``(iteration, dual, primal, gap)``.  By default they
    are evaluated at the iterates ``w^(i)`` themselves (row 0 is ``w0``);
    with ``trace_mode="averaged"`` they are evaluated at the running average.
    ``best_*`` fields hold the smallest gap seen over all evaluated points
    (iterates and, if traced, averages) and the largest dual value, each a
    certified bound on the game value.
    """

    weights_avg: np.ndarray
    centroid: np.ndarray
    value: float
    chebyshev_radius: float
    gap: float
    slackness: np.ndarray
    divergences: np.ndarray
    iterations: int
    stepsize: float
    B_estimate: float
    initial_gap: float
    max_subgradient_sq: float = 0.0
    weights_last: Optional[np.ndarray] = None
    trace: List[Tuple[int, float, float, float]] = field(default_factory=list)
    best_gap: float = math.inf
    best_dual: float = -math.inf
    best_primal: float = math.inf
    best_weights: Optional[np.ndarray] = None


def _initial_weights(w0, n):
    if w0 is None:
        return np.full(n, 1.0 / n)
    return validate_weights(w0, n)


class _Best:
    def __init__(self):
        self.gap, self.dual, self.primal, self.w = math.inf, -math.inf, math.inf, None

    def update(self, w, dual, primal):
        self.dual = max(self.dual, dual)
        self.primal = min(self.primal, primal)
        if primal - dual < self.gap:
            self.gap, self.w = primal - dual, w.copy()


def solve_game(
    spec,
    family,
    pi,
    t,
    eta=None,
    w0=None,
    ref_index=-1,
    trace_every=1,
    epsilon=None,
    safety=4.0,
    method="auto",
    trace_mode="iterates",
):
    """Approximate mixed Nash equilibrium by projected subgradient ascent.

    Each iteration sets ``v = w - eta * g(w)`` and projects ``v`` onto the
    simplex; the report is built at the average of the ``t`` iterates.  With
    ``eta=None`` the stepsize is ``sqrt(n / (t * B))`` where ``B`` is the
    :func:`estimate_B` surrogate, doubled (and the stepsize re-derived)
    whenever an observed ``||g||^2`` exceeds it.

    Every iterate is evaluated anyway (its divergences give the subgradient),
    so the iterate gaps cost nothing; ``trace_every`` only thins what is
    stored.  ``epsilon`` stops the loop once an evaluated point has gap at
    most ``epsilon``.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if trace_mode not in ("iterates", "averaged"):
        raise ValueError(f"unknown trace_mode {trace_mode!r}")
    game = _Game(spec, family, pi, method)
    n = game.n
    w = _initial_weights(w0, n)
    check_hypotheses(game.family, w)

    if n == 1:
        M = f_projection(spec, game.family[0], game.pi)
        D = game.divergences(M[game.off])
        v = float(D[0])
        one = np.ones(1)
        return EquilibriumReport(
            one, M, v, v, 0.0, np.zeros(1), D, 0, 0.0, 0.0, 0.0, weights_last=one,
            trace=[(0, v, v, 0.0)], best_gap=0.0, best_dual=v, best_primal=v, best_weights=one,
        )

    m = game.centroid_entries(w)
    D = game.divergences_exact(m)
    if not np.all(np.isfinite(D)):
        raise NonFiniteIterateError("infinite divergence at the initial weights")
    dual, primal = float(w @ D), float(D.max())
    initial_gap = primal - dual
    best = _Best()
    best.update(w, dual, primal)
    trace = [(0, dual, primal, initial_gap)] if trace_every else []
    B = safety * n * primal**2
    if B == 0.0:
        return EquilibriumReport(
            w.copy(), game.matrix(m), dual, primal, initial_gap, D - primal, D, 0,
            0.0 if eta is None else float(eta), 0.0, initial_gap,
            weights_last=w.copy(), trace=trace, best_gap=best.gap, best_dual=best.dual,
            best_primal=best.primal, best_weights=best.w,
        )
    auto = eta is None
    step = math.sqrt(n / (t * B)) if auto else float(eta)
    averaged = trace_mode == "averaged"

    w_sum = np.zeros(n)
    max_g2 = 0.0
    done = 0
    for i in range(1, t + 1):
        g = D[ref_index] - D
        g2 = float(g @ g)
        max_g2 = max(max_g2, g2)
        while g2 > B:
            B *= 2.0
            if auto:
                step = math.sqrt(n / (t * B))
        w = simplex_project(w - step * g)
        w_sum += w
        done = i
        # divergences at the new iterate feed both its certificate and the next step
        m = game.centroid_entries(w)
        D = game.divergences(m)
        Dsum = D.sum()
        if not math.isfinite(Dsum):
            raise NonFiniteIterateError(f"infinite divergence at iteration {i}")
        dual, primal = float(w @ D), float(D.max())
        best.update(w, dual, primal)
        record = trace_every and (i % trace_every == 0 or i == t)
        if averaged and (record or epsilon is not None):
            _, _, adual, aprimal = game.evaluate(w_sum / i)
            best.update(w_sum / i, adual, aprimal)
            row = (i, adual, aprimal, aprimal - adual)
        else:
            row = (i, dual, primal, primal - dual)
        if record:
            trace.append(row)
        if epsilon is not None and best.gap <= epsilon:
            break

    w_avg = w_sum / done
    m, D, dual, primal = game.evaluate(w_avg)
    best.update(w_avg, dual, primal)
    return EquilibriumReport(
        weights_avg=w_avg,
        centroid=game.matrix(m),
        value=dual,
        chebyshev_radius=primal,
        gap=primal - dual,
        slackness=D - primal,
        divergences=D,
        iterations=done,
        stepsize=step,
        B_estimate=B,
        initial_gap=initial_gap,
        max_subgradient_sq=max_g2,
        weights_last=w.copy(),
        trace=trace,
        best_gap=best.gap,
        best_dual=best.dual,
        best_primal=best.primal,
        best_weights=best.w,
    )


def regret_check(report, B, eta, n, t, h_star, slack=1e-9):
    """Whether ``h(w_avg) - h_star <= n / (2 eta t) + eta B / 2`` holds."""
    h_avg = -report.value
    return bool(h_avg - h_star <= n / (2.0 * eta * t) + eta * B / 2.0 + slack)


def chebyshev_radius(report, epsilon=1e-6):
    """Primal value of a converged report; raises if the gap exceeds ``epsilon``."""
    if report.gap > epsilon:
        raise NotConvergedError(f"duality gap {report.gap:g} exceeds {epsilon:g}")
    return report.chebyshev_radius


@dataclass(frozen=True)
class PureNashResult:
    exists: bool
    saddle: Optional[Tuple[np.ndarray, int]]
    maximizers: List[int]
    v_lower: float
    v_upper: float
    self_divergences: np.ndarray


def pure_nash_check(spec, family, pi, tol=1e-6, t=1000, method="auto"):
    """Decide whether the pure-strategy game has a Nash equilibrium.

    ``v_lower = max_i D(M^f(L_i) || L_i)`` is the maximin value.  The minimax
    value is bounded above both by the primal value of a :func:`solve_game`
    run and by ``max_i D(M^f(L_l) || L_i)`` for each maximiser ``l``; a pure
    equilibrium exists iff the best bound is within ``tol`` of ``v_lower``.
    Indices in ``maximizers`` are 0-based.
    """
    if not spec.strictly_convex:
        raise UnsupportedSpecError("pure Nash characterisation needs a strictly convex f")
    family = as_family(family)
    pi = np.asarray(pi, dtype=float)
    n = family.shape[0]
    projections = [f_projection(spec, L, pi) for L in family]
    selfd = np.array([divergence(spec, P, L, pi) for P, L in zip(projections, family)])
    v_lower = float(selfd.max())
    maximizers = [int(i) for i in np.flatnonzero(selfd >= v_lower - tol)]
    if n == 1:
        return PureNashResult(True, (projections[0], 0), [0], v_lower, v_lower, selfd)
    bounds = {l: float(divergences_to_family(spec, projections[l], family, pi).max()) for l in maximizers}
    v_upper = min(bounds.values())
    if t:
        v_upper = min(v_upper, solve_game(spec, family, pi, t, trace_every=0, method=method).chebyshev_radius)
    exists = v_upper - v_lower <= tol
    saddle = None
    if exists:
        l = min(bounds, key=lambda k: (bounds[k], k))
        saddle = (projections[l], l)
    return PureNashResult(exists, saddle, maximizers, v_lower, v_upper, selfd)


def check_class(family, tol=1e-12):
    """Raise :class:`ClassViolationError` unless every member is ``P - I``
    with ``P`` a transition matrix having zero diagonal."""
    family = as_family(family)
    for i, L in enumerate(family):
        diag = np.diag(L)
        if np.any(np.abs(diag + 1.0) > tol):
            raise ClassViolationError(i, "diagonal must equal -1")


def tv_centroid_convergence_probe(spec, family, pi, t_list, t_ref=None, w0=None, method="auto"):
    """TV distance from the averaged-iterate centroid to a reference centroid.

    Runs :func:`solve_game` for each ``t`` in ``t_list`` with the automatic
    stepsize and compares ``M^f_n(w_avg)`` against the centroid of a long
    reference run (``t_ref``, default ``100 * max(t_list)``).  Returns a list
    of ``(t, distance)``.
    """
    if not spec.strictly_convex:
        raise UnsupportedSpecError("the centroid rate needs a strictly convex f")
    family = as_family(family)
    check_class(family)
    t_ref = t_ref or 100 * max(t_list)
    tv = total_variation(0.5)
    ref = solve_game(spec, family, pi, t_ref, w0=w0, trace_every=0, method=method).centroid
    out = []
    for t in t_list:
        M = solve_game(spec, family, pi, t, w0=w0, trace_every=0, method=method).centroid
        out.append((int(t), divergence(tv, M, ref, pi)))
    return out


def loglog_slope(pairs, floor=1e-12):
    """Least-squares slope of ``log(distance)`` against ``log(t)``.

    Returns ``None`` when a distance has hit ``floor`` (nothing left to fit).
    """
    t = np.array([p[0] for p in pairs], dtype=float)
    dist = np.array([p[1] for p in pairs], dtype=float)
    if np.any(dist <= floor):
        return None
    return float(np.polyfit(np.log(t), np.log(dist), 1)[0])
