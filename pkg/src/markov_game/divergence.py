"""f-divergences between Markov generators.

``D_f(M || L) = sum_x pi(x) sum_{y != x} L(x, y) f(M(x, y) / L(x, y))``

Entries with ``L(x, y) = 0`` use the perspective limit: the term is 0 when
``M(x, y) = 0`` too, and ``M(x, y) * lim_{t->inf} f(t) / t`` otherwise (which
is ``+inf`` for KL and alpha > 1).  With this convention
``D_f(M || L) = D_{f*}(L || M)`` holds on every pair, zeros included.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfiniteDivergenceError,
    NegativeArgumentError,
    UnsupportedSpecError,
)
from .generators import _check_dims, offdiag_mask

KINDS = ("alpha", "kl", "reverse-kl", "hellinger2", "tv")


@dataclass(frozen=True)
class DivergenceSpec:
    """A convex ``f`` with ``f(1) = 0`` and the metadata the solvers need.

    ``param`` is alpha for ``kind="alpha"`` and the scale for ``kind="tv"``
    (``|t - 1|`` at scale 1, the total variation distance at scale 1/2).
    Use the constructors :func:`alpha`, :func:`kl`, ... rather than building
    instances by hand.
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnsupportedSpecError(f"unknown divergence kind {self.kind!r}")
        if self.kind == "alpha" and self.param in (0.0, 1.0):
            raise UnsupportedSpecError("alpha must not be 0 or 1; use reverse_kl() or kl()")
        if self.kind == "tv" and not self.param > 0:
            raise UnsupportedSpecError("total variation scale must be positive")

    # -- metadata -----------------------------------------------------------

    @property
    def name(self):
        if self.kind == "alpha":
            return f"alpha:{self.param!r}"
        if self.kind == "tv":
            return "tv" if self.param == 1.0 else ("tv-half" if self.param == 0.5 else f"tv:{self.param!r}")
        return self.kind

    @property
    def strictly_convex(self):
        return self.kind != "tv"

    @property
    def f_at_0(self):
        if self.kind == "alpha":
            return math.inf if self.param < 0 else 1.0 / self.param
        if self.kind in ("kl", "hellinger2"):
            return 1.0
        if self.kind == "reverse-kl":
            return math.inf
        return self.param

    @property
    def slope_at_infinity(self):
        """``lim_{t -> inf} f(t) / t``, the cost of mass where L vanishes."""
        if self.kind == "alpha":
            return math.inf if self.param > 1 else 1.0 / (1.0 - self.param)
        if self.kind == "kl":
            return math.inf
        if self.kind in ("reverse-kl", "hellinger2"):
            return 1.0
        return self.param

    @property
    def projection_order(self):
        """Power-mean order ``p`` such that the f-projection is ``P_p``.

        ``None`` for total variation, whose projection is not unique.
        """
        if self.kind == "alpha":
            return 1.0 - self.param
        return {"kl": 0.0, "reverse-kl": 1.0, "hellinger2": 0.5}.get(self.kind)

    # -- function values ----------------------------------------------------

    def f(self, t):
        """Evaluate ``f`` elementwise; ``t`` must be nonnegative."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise NegativeArgumentError("f is defined on t >= 0 only")
        k, a = self.kind, self.param
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if k == "alpha":
                out = (t**a - a * t - (1.0 - a)) / (a * (a - 1.0))
            elif k == "kl":
                out = np.where(t > 0, t * np.log(np.where(t > 0, t, 1.0)), 0.0) - t + 1.0
            elif k == "reverse-kl":
                out = -np.log(t) + t - 1.0
            elif k == "hellinger2":
                out = (np.sqrt(t) - 1.0) ** 2
            else:
                out = a * np.abs(t - 1.0)
        out = np.where(t == 0, self.f_at_0, out)
        return out if out.ndim else float(out)

    def right_derivative(self, t):
        """Right derivative ``f'_+`` elementwise (``-inf`` allowed at 0)."""
        t = np.asarray(t, dtype=float)
        k, a = self.kind, self.param
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if k == "alpha":
                out = (t ** (a - 1.0) - 1.0) / (a - 1.0)
            elif k == "kl":
                out = np.log(t)
            elif k == "reverse-kl":
                out = 1.0 - 1.0 / t
            elif k == "hellinger2":
                out = 1.0 - 1.0 / np.sqrt(t)
            else:
                out = np.where(t < 1.0, -a, a)
        return out if out.ndim else float(out)

    def conjugate(self):
        """Spec of ``f*(t) = t f(1/t)``."""
        if self.kind == "alpha":
            return alpha(1.0 - self.param)
        if self.kind == "kl":
            return reverse_kl()
        if self.kind == "reverse-kl":
            return kl()
        return self


def alpha(a):
    """``f(t) = (t^a - a t - (1 - a)) / (a (a - 1))``."""
    return DivergenceSpec("alpha", float(a))


def kl():
    """``f(t) = t ln t - t + 1``."""
    return DivergenceSpec("kl")


def reverse_kl():
    """``f(t) = -ln t + t - 1``, the conjugate of KL."""
    return DivergenceSpec("reverse-kl")


def hellinger2():
    """Squared Hellinger, ``f(t) = (sqrt(t) - 1)^2``.  Self-conjugate."""
    return DivergenceSpec("hellinger2")


def total_variation(scale=1.0):
    """``f(t) = scale * |t - 1|``; scale 1/2 gives the usual TV distance."""
    return DivergenceSpec("tv", float(scale))


def chi2():
    return alpha(2.0)


def parse_divergence(text):
    """Parse a CLI name such as ``kl``, ``alpha:2`` or ``tv-half``."""
    text = text.strip().lower()
    simple = {
        "kl": kl,
        "reverse-kl": reverse_kl,
        "hellinger2": hellinger2,
        "tv": total_variation,
        "tv-half": lambda: total_variation(0.5),
        "chi2": chi2,
    }
    if text in simple:
        return simple[text]()
    head, _, value = text.partition(":")
    if head in ("alpha", "tv") and value:
        try:
            x = float(value)
        except ValueError:
            raise UnsupportedSpecError(f"bad numeric value in divergence {text!r}") from None
        return alpha(x) if head == "alpha" else total_variation(x)
    raise UnsupportedSpecError(f"unknown divergence {text!r}")


def pointwise_terms(spec, m, l):
    """Per-entry contributions ``l f(m / l)`` with the perspective convention."""
    m = np.asarray(m, dtype=float)
    l = np.asarray(l, dtype=float)
    if spec.kind == "hellinger2":
        # same value as the perspective, written so that swapping m and l is exact
        return (np.sqrt(m) - np.sqrt(l)) ** 2
    pos = l > 0
    safe_l = np.where(pos, l, 1.0)
    ratio = np.where(pos, m / safe_l, 1.0)
    with np.errstate(invalid="ignore", over="ignore"):
        inner = safe_l * spec.f(np.maximum(ratio, 0.0))
        edge = np.where(m > 0, m * spec.slope_at_infinity, 0.0)
    return np.where(pos, inner, edge)


def divergence(spec, M, L, pi):
    """``D_f(M || L)`` with respect to ``pi``; may be ``+inf``."""
    M, pi = _check_dims(M, pi)
    L, _ = _check_dims(L, pi)
    if M.shape != L.shape:
        raise DimensionMismatchError(f"shapes {M.shape} and {L.shape} differ")
    off = offdiag_mask(pi.size)
    terms = np.where(off, pointwise_terms(spec, np.where(off, M, 0.0), np.where(off, L, 0.0)), 0.0)
    return float(np.sum(pi[:, None] * terms))


def divergences_to_family(spec, M, family, pi):
    """Vector ``[D_f(M || L_i) for L_i in family]``."""
    family = np.asarray(family, dtype=float)
    pi = np.asarray(pi, dtype=float)
    off = offdiag_mask(pi.size)
    terms = pointwise_terms(spec, np.asarray(M, dtype=float)[off][None, :], family[:, off])
    weights = np.broadcast_to(pi[:, None], off.shape)[off]
    return terms @ weights


def conjugate_duality_check(spec, M, L, pi):
    """``|D_f(M || L) - D_{f*}(L || M)|``; both sides must be finite."""
    lhs = divergence(spec, M, L, pi)
    rhs = divergence(spec.conjugate(), L, M, pi)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise InfiniteDivergenceError(f"divergences not finite: {float(lhs)!r}, {float(rhs)!r}")
    return abs(lhs - rhs)
