"""Divergences, projections and weighted centroids on a small family.

Run with ``python3 demos/centroids.py``.
"""

import numpy as np

from markov_game import (
    alpha,
    divergence,
    f_projection,
    fixture,
    hellinger2,
    kl,
    pi_dual,
    power_mean_reversiblization,
    total_variation,
    weighted_centroid_closed,
    weighted_centroid_generic,
)

inst = fixture("dual-pair")
L, pi = inst.family[0], inst.pi
Lp = pi_dual(L, pi)
np.set_printoptions(precision=4, suppress=True)

print("generator L\n", L)
print("pi-dual of L\n", Lp)

# every reversible M sits at the same distance from L and from its dual
M = power_mean_reversiblization(L, pi, 1.0)
for spec in (kl(), alpha(2.0), hellinger2(), total_variation()):
    print(f"{spec.kind:>10}  D(M||L) = {divergence(spec, M, L, pi):.6f}  D(M||L_pi) = {divergence(spec, M, Lp, pi):.6f}")

# the projection under KL is the geometric mean of L and its dual
P = f_projection(kl(), L, pi)
print("KL projection equals P_0:", np.allclose(P, power_mean_reversiblization(L, pi, 0.0)))

# a two-member centroid, closed form against the per-pair solver
other = fixture("no-pure")
w = np.array([0.25, 0.75])
closed = weighted_centroid_closed(alpha(2.0), other.family, other.pi, w).centroid
generic = weighted_centroid_generic(alpha(2.0), other.family, other.pi, w).centroid
print("closed form vs generic centroid, max difference:", np.max(np.abs(closed - generic)))
