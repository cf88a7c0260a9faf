"""Small named game instances with known equilibrium structure.

Each fixture is an instance document (see :mod:`markov_game.documents`) so
it can be fed to the CLI with ``--fixture NAME`` or written to disk.

``two-state``
    A single non-reversible two-state generator under the uniform distribution.
``dual-pair``
    A non-reversible ``L`` and its pi-dual.  Every reversible ``M`` is
    equidistant from the two, so the dual objective is flat and every weight
    vector is optimal; both pure strategies are equilibria.
``unique-pure``
    A strongly non-reversible ``L1`` and a reversible ``L2`` close to the
    projection of ``L1``.  The projection of ``L1`` is closer to ``L2`` than
    to ``L1``, so ``(M^f(L1), L1)`` is the unique pure equilibrium.
``no-pure``
    ``L2`` is ``L1`` with states 0 and 1 relabelled, under the uniform
    distribution.  Self-distances agree, projections differ, no pure
    equilibrium exists and the mixed one sits at ``(1/2, 1/2)``.
``dominant-middle``
    Three members; the middle one is strongly non-reversible and the outer
    two are reversible and close to its projection, so the equilibrium puts
    all weight on the middle member.
``uniformizable``
    The basis generators (plus the zero generator) spanning the
    1-uniformizable mu-reversible generators on three states, played under a
    distribution pi different from mu.
"""

import copy

import numpy as np

from .documents import parse_instance
from .generators import pi_dual, uniformizable_basis, zero_row_sums

_L2 = [[-1.0, 1.0], [3.0, -3.0]]

_NONREV = [
    [0.0, 2.0, 0.2],
    [0.1, 0.0, 1.5],
    [1.8, 0.3, 0.0],
]
_PI3 = [0.5, 0.3, 0.2]


def _gen(rates):
    return zero_row_sums(np.array(rates, dtype=float))


def _dual_pair():
    L = _gen(_NONREV)
    pi = np.array(_PI3)
    return {
        "pi": _PI3,
        "generators": [L.tolist(), pi_dual(L, pi).tolist()],
        "labels": ["L", "L_pi"],
        "divergence": "kl",
        "options": {"iters": 1000},
    }


def _unique_pure():
    pi = np.array(_PI3)
    L1 = _gen(_NONREV)
    # reversible: symmetric fluxes over pi, near P_{-1}(L1) (the alpha=2 projection)
    S = np.array([[0.0, 0.1, 0.15], [0.1, 0.0, 0.08], [0.15, 0.08, 0.0]])
    L2 = zero_row_sums(S / pi[:, None])
    return {
        "pi": _PI3,
        "generators": [L1.tolist(), L2.tolist()],
        "labels": ["nonreversible", "reversible"],
        "divergence": "alpha:2",
        "options": {"iters": 10000},
    }


def _no_pure():
    L1 = _gen([[0.0, 3.0, 0.5], [0.2, 0.0, 2.0], [1.5, 0.1, 0.0]])
    P = np.eye(3)[[1, 0, 2]]
    L2 = P @ L1 @ P.T
    return {
        "pi": [1 / 3, 1 / 3, 1 / 3],
        "generators": [L1.tolist(), L2.tolist()],
        "labels": ["L", "L_swapped"],
        "divergence": "alpha:2",
        "options": {"iters": 10000},
    }


def _dominant_middle():
    pi = np.array(_PI3)
    L2 = _gen(_NONREV)
    near = []
    for S in (
        [[0.0, 0.09, 0.14], [0.09, 0.0, 0.09], [0.14, 0.09, 0.0]],
        [[0.0, 0.11, 0.16], [0.11, 0.0, 0.07], [0.16, 0.07, 0.0]],
    ):
        near.append(zero_row_sums(np.array(S) / pi[:, None]))
    return {
        "pi": _PI3,
        "generators": [near[0].tolist(), L2.tolist(), near[1].tolist()],
        "labels": ["reversible-a", "nonreversible", "reversible-b"],
        "divergence": "alpha:2",
        "options": {"iters": 10000},
    }


def _uniformizable():
    mu = np.array([0.2, 0.3, 0.5])
    basis = uniformizable_basis(mu, 1.0)
    return {
        "pi": [0.4, 0.35, 0.25],
        "generators": basis.tolist(),
        "labels": ["L_01", "L_02", "L_12", "zero"],
        "divergence": "hellinger2",
        "options": {"mu": mu.tolist(), "lambda": 1.0, "iters": 10000},
    }


def _two_state():
    return {
        "pi": [0.5, 0.5],
        "generators": [_L2],
        "labels": ["L"],
        "divergence": "kl",
        "options": {"m": "P1:0"},
    }


_BUILDERS = {
    "two-state": _two_state,
    "dual-pair": _dual_pair,
    "unique-pure": _unique_pure,
    "no-pure": _no_pure,
    "dominant-middle": _dominant_middle,
    "uniformizable": _uniformizable,
}

FIXTURES = tuple(_BUILDERS)


def fixture_document(name):
    """The instance document of fixture ``name`` (a fresh copy)."""
    try:
        return copy.deepcopy(_BUILDERS[name]())
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}") from None


def fixture(name):
    """Parsed :class:`~markov_game.documents.Instance` of fixture ``name``."""
    return parse_instance(fixture_document(name))
