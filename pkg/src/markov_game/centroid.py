"""f-projections and weighted information centroids.

The w-weighted f-centroid of a family ``L_1..L_n`` is the pi-reversible
generator minimising ``sum_i w_i D_f(M || L_i)``.  Reversibility couples
``M(x, y)`` and ``M(y, x)`` through the single flux ``a = pi(x) M(x, y)``, so
the problem splits into one convex scalar problem per unordered pair.

Two routes are provided:

* :func:`weighted_centroid_closed` -- weighted power means of the
  ``P_q``-reversiblizations, valid for the alpha family, KL, reverse KL and
  squared Hellinger;
* :func:`weighted_centroid_generic` -- bisection on the sign of the right
  derivative of the per-pair objective, valid for any spec in the catalog
  including total variation (whose minimiser may be an interval).
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .divergence import divergence, divergences_to_family
from .errors import (
    DegenerateFamilyError,
    InfiniteDivergenceError,
    InvalidWeightsError,
    ToleranceNotReachedError,
    UnsupportedSpecError,
)
from .generators import (
    _check_dims,
    is_reversible,
    offdiag_mask,
    power_mean_reversiblization,
    zero_row_sums,
)

MAX_BISECTION_ITER = 200
BISECTION_RTOL = 1e-12


@dataclass(frozen=True)
class CentroidResult:
    """A centroid with its divergence to every member.

    ``flat_interval`` holds the (lower, upper) generators bounding the argmin
    set when ``f`` is not strictly convex and some pair has a flat minimum;
    ``centroid`` is then the midpoint.
    """

    centroid: np.ndarray
    per_member_divergence: np.ndarray
    flat_interval: Optional[Tuple[np.ndarray, np.ndarray]] = None


def as_family(family):
    fam = np.asarray(family, dtype=float)
    if fam.ndim == 2:
        fam = fam[None]
    return fam


def validate_weights(w, n, tol=1e-12):
    w = np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise InvalidWeightsError(f"expected {n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise InvalidWeightsError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > max(tol, 8 * np.finfo(float).eps * n):
        raise InvalidWeightsError(f"weights sum to {float(w.sum())!r}, expected 1")
    return w


def check_hypotheses(family, w):
    """Raise unless some member is non-zero and carries positive weight."""
    d = family.shape[-1]
    nonzero = np.any(family[:, offdiag_mask(d)] > 0, axis=1)
    if not nonzero.any():
        raise DegenerateFamilyError("every family member is the zero generator")
    if not np.any(nonzero & (w > 0)):
        raise DegenerateFamilyError("all positive weight sits on zero generators")


def f_projection(spec, L, pi):
    """``argmin_{M reversible} D_f(M || L)``.

    Alpha, KL, reverse KL and Hellinger projections are ``P_q`` with
    ``q = spec.projection_order``.  For total variation the argmin is the
    segment between ``P_-inf`` and ``P_+inf``; ``P_-inf`` is returned (use
    :func:`weighted_centroid_generic` to get both endpoints).
    """
    L, pi = _check_dims(L, pi)
    q = spec.projection_order
    if q is not None:
        return power_mean_reversiblization(L, pi, q)
    if spec.kind == "tv":
        return power_mean_reversiblization(L, pi, -math.inf)
    raise UnsupportedSpecError(f"no projection rule for {spec.name}")


def weighted_power_mean(values, w, q):
    """Column-wise weighted power mean of order ``q`` over rows of ``values``.

    Rows with zero weight are ignored.  For ``q <= 0`` a zero in any weighted
    row forces the result to zero.
    """
    active = w > 0
    v = values[active]
    ww = w[active]
    if q > 0:
        return (ww @ v**q) ** (1.0 / q)
    has_zero = np.any(v <= 0, axis=0)
    safe = np.where(v > 0, v, 1.0)
    if q == 0:
        out = np.exp(ww @ np.log(safe))
    else:
        out = (ww @ safe**q) ** (1.0 / q)
    return np.where(has_zero, 0.0, out)


class ClosedFormCentroid:
    """Precomputed closed-form centroid map ``w -> M^f_n(w)``.

    Works on the flattened off-diagonal entries so it can be called inside
    the solver loop cheaply.
    """

    def __init__(self, spec, family, pi):
        q = spec.projection_order
        if q is None:
            raise UnsupportedSpecError(f"no closed-form centroid for {spec.name}")
        self.spec, self.q = spec, q
        self.family = as_family(family)
        self.pi = np.asarray(pi, dtype=float)
        d = self.pi.size
        self.off = offdiag_mask(d)
        self.projections = np.stack(
            [power_mean_reversiblization(L, self.pi, q)[self.off] for L in self.family]
        )
        # strictly positive projections allow a branch-free evaluation
        self._positive = bool(np.all(self.projections > 0))
        if self._positive:
            P = self.projections
            self._powered = np.log(P) if q == 0 else P**q

    def __call__(self, w):
        if not self._positive:
            return weighted_power_mean(self.projections, w, self.q)
        s = w @ self._powered
        return np.exp(s) if self.q == 0 else s ** (1.0 / self.q)

    def matrix(self, entries):
        d = self.pi.size
        M = np.zeros((d, d))
        M[self.off] = entries
        return zero_row_sums(M)


def weighted_centroid_closed(spec, family, pi, w):
    """Closed-form weighted f-centroid.

    Entrywise ``(sum_i w_i m_i^q)^(1/q)`` with ``m_i = P_q(L_i)`` and
    ``q = 1 - alpha``; ``q = 0`` (KL) is the weighted geometric mean and
    ``q = 1/2`` (Hellinger) gives ``(sum_i w_i sqrt(m_i))^2``.  The
    f*-centroid is obtained by passing ``spec.conjugate()``.
    """
    family = as_family(family)
    _check_dims(family[0], pi)
    w = validate_weights(w, family.shape[0])
    check_hypotheses(family, w)
    cf = ClosedFormCentroid(spec, family, pi)
    M = cf.matrix(cf(w))
    return CentroidResult(M, divergences_to_family(spec, M, family, pi))


# -- generic per-pair solver -------------------------------------------------


class _PairProblem:
    """Per-pair objectives ``Phi(a) = sum_i w_i [b_i f(a/b_i) + b'_i f(a/b'_i)]``.

    ``b_i = pi(x) L_i(x, y)`` and ``b'_i = pi(y) L_i(y, x)`` for every pair
    ``x < y``; all pairs are handled together as arrays of shape ``(n, P)``.
    """

    def __init__(self, spec, family, pi, w):
        self.spec = spec
        d = pi.size
        self.xs, self.ys = np.triu_indices(d, k=1)
        active = w > 0
        self.w = w[active]
        fam = family[active]
        self.b = pi[self.xs] * fam[:, self.xs, self.ys]
        self.b_rev = pi[self.ys] * fam[:, self.ys, self.xs]
        slope = spec.slope_at_infinity
        has_zero = np.any(self.b == 0, axis=0) | np.any(self.b_rev == 0, axis=0)
        empty = np.all(self.b == 0, axis=0) & np.all(self.b_rev == 0, axis=0)
        # an infinite marginal cost on a vanishing edge pins the flux at 0
        self.pinned = empty | (has_zero if math.isinf(slope) else False)

    def _side(self, a, b, fn, zero_value):
        pos = b > 0
        safe = np.where(pos, b, 1.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            vals = fn(a[None, :] / safe)
        return np.where(pos, vals, zero_value)

    def derivative(self, a, cols=slice(None)):
        """Right derivative of Phi at ``a`` for the pair columns ``cols``."""
        spec = self.spec
        slope = spec.slope_at_infinity
        out = 0.0
        for b in (self.b[:, cols], self.b_rev[:, cols]):
            out = out + self.w @ self._side(a, b, spec.right_derivative, slope)
        return out

    def value(self, a, cols=slice(None)):
        """Phi at ``a`` (``a`` broadcast against pair columns ``cols``)."""
        spec = self.spec
        a = np.asarray(a, dtype=float)
        out = 0.0
        for b in (self.b[:, cols], self.b_rev[:, cols]):
            pos = b > 0
            safe = np.where(pos, b, 1.0)
            with np.errstate(invalid="ignore", over="ignore"):
                inner = safe * spec.f(a[None, :] / safe)
                edge = np.where(a[None, :] > 0, a[None, :] * spec.slope_at_infinity, 0.0)
            out = out + self.w @ np.where(pos, inner, edge)
        return out

    def initial_upper(self, scale=1.0):
        top = np.maximum(self.b.max(axis=0, initial=0.0), self.b_rev.max(axis=0, initial=0.0))
        return scale * (top + 1.0)

    def bracket(self, cols, scale=1.0, strict=True):
        """Upper bracket where the derivative is positive (or >= 0 if not strict)."""
        hi = self.initial_upper(scale)[cols]
        for _ in range(2000):
            dv = self.derivative(hi, cols)
            grow = dv <= 0 if strict else dv < 0
            if not grow.any():
                return hi
            hi = np.where(grow, 2.0 * hi, hi)
        raise ToleranceNotReachedError(2000, float("inf"))

    def boundary(self, cols, strict, scale=1.0, max_iter=MAX_BISECTION_ITER, rtol=BISECTION_RTOL):
        """Bisection for ``sup{a : Phi'_+(a) < 0}`` (``<= 0`` when not strict).

        Returns 0 for pairs where the derivative already has the target sign
        at the origin.
        """
        n_cols = self.b[:, cols].shape[1]
        lo = np.zeros(n_cols)
        if n_cols == 0:
            return lo
        d0 = self.derivative(lo, cols)
        done_at_zero = d0 >= 0 if strict else d0 > 0
        hi = self.bracket(cols, scale, strict=not strict)
        hi = np.where(done_at_zero, 0.0, hi)
        for _ in range(max_iter):
            width = hi - lo
            if np.all(width <= rtol * hi):
                break
            mid = 0.5 * (lo + hi)
            dv = self.derivative(mid, cols)
            below = dv < 0 if strict else dv <= 0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        else:
            width = hi - lo
            if not np.all(width <= rtol * hi):
                raise ToleranceNotReachedError(max_iter, float(np.max(width)))
        return 0.5 * (lo + hi)


def _assemble(pi, xs, ys, flux):
    d = pi.size
    M = np.zeros((d, d))
    M[xs, ys] = flux / pi[xs]
    M[ys, xs] = flux / pi[ys]
    return zero_row_sums(M)


def weighted_centroid_generic(
    spec,
    family,
    pi,
    w,
    tol=BISECTION_RTOL,
    max_iter=MAX_BISECTION_ITER,
    bracket_scale=1.0,
):
    """Weighted f-centroid by per-pair bisection on the right derivative.

    For each pair ``x < y`` the optimal flux ``a*`` is the point where the
    right derivative of the pair objective changes sign; then
    ``M(x, y) = a* / pi(x)`` and ``M(y, x) = a* / pi(y)``.  When ``f`` is not
    strictly convex the derivative may vanish on an interval; the midpoint is
    returned and both endpoints are reported in ``flat_interval``.

    ``bracket_scale`` rescales the initial upper bracket; results must not
    depend on it.
    """
    family = as_family(family)
    pi = np.asarray(pi, dtype=float)
    _check_dims(family[0], pi)
    w = validate_weights(w, family.shape[0])
    check_hypotheses(family, w)
    prob = _PairProblem(spec, family, pi, w)
    free = np.flatnonzero(~prob.pinned)
    lower = np.zeros(prob.xs.size)
    upper = np.zeros(prob.xs.size)
    lower[free] = prob.boundary(free, strict=True, scale=bracket_scale, max_iter=max_iter, rtol=tol)
    if spec.strictly_convex:
        upper[free] = lower[free]
    else:
        upper[free] = prob.boundary(
            free, strict=False, scale=bracket_scale, max_iter=max_iter, rtol=tol
        )
    flux = 0.5 * (lower + upper)
    M = _assemble(pi, prob.xs, prob.ys, flux)
    flat = None
    if np.any(upper - lower > 1e3 * tol * np.maximum(upper, 1e-300)):
        flat = (_assemble(pi, prob.xs, prob.ys, lower), _assemble(pi, prob.xs, prob.ys, upper))
    return CentroidResult(M, divergences_to_family(spec, M, family, pi), flat)


def weighted_centroid(spec, family, pi, w, method="auto"):
    """Dispatch to the closed form when available, else the generic solver."""
    if method == "closed" or (method == "auto" and spec.projection_order is not None):
        return weighted_centroid_closed(spec, family, pi, w)
    return weighted_centroid_generic(spec, family, pi, w)


def pythagorean_residual(spec, M, L, pi, tol=1e-10):
    """``|D(M||L) - D(M^f||L) - D(M||M^f)|`` for reversible ``M``.

    ``M^f`` is the f-projection of ``L``.  The identity holds for the alpha
    family (KL and reverse KL being its limits).
    """
    if spec.kind not in ("alpha", "kl", "reverse-kl", "hellinger2"):
        raise UnsupportedSpecError("Pythagorean identity is checked for the alpha family only")
    M, pi = _check_dims(M, pi)
    if not is_reversible(M, pi, tol):
        raise ValueError("M must be pi-reversible")
    Mf = f_projection(spec, L, pi)
    parts = (divergence(spec, M, L, pi), divergence(spec, Mf, L, pi), divergence(spec, M, Mf, pi))
    if not all(math.isfinite(p) for p in parts):
        raise InfiniteDivergenceError(f"divergences not finite: {parts}")
    return abs(parts[0] - parts[1] - parts[2])
