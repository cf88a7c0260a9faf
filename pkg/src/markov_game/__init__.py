"""f-divergence games between Markov generators.

Nature picks a generator from a finite family, the probabilist answers with
a reversible generator, and the payoff is an f-divergence between the two.
The package provides the divergences, power-mean reversiblizations,
weighted information centroids, the Chebyshev center of the family and a
projected subgradient solver for the mixed-strategy equilibrium, together
with brute-force oracles for small instances.
"""

from .centroid import (
    CentroidResult,
    f_projection,
    pythagorean_residual,
    weighted_centroid,
    weighted_centroid_closed,
    weighted_centroid_generic,
)
from .divergence import (
    DivergenceSpec,
    alpha,
    chi2,
    conjugate_duality_check,
    divergence,
    hellinger2,
    kl,
    parse_divergence,
    reverse_kl,
    total_variation,
)
from .documents import Instance, load_instance, parse_instance
from .errors import GameError
from .fixtures import FIXTURES, fixture
from .generators import (
    is_reversible,
    permutation_family,
    pi_dual,
    power_mean_reversiblization,
    uniformizable_basis,
    uniformizable_weights,
    validate_distribution,
    validate_family,
    validate_generator,
)
from .oracle import GridSpec, oracle_dual_max, oracle_edge_scan, oracle_pure_values
from .solver import (
    DualObjectiveState,
    EquilibriumReport,
    PureNashResult,
    chebyshev_radius,
    dual_objective,
    estimate_B,
    pure_nash_check,
    regret_check,
    simplex_project,
    solve_game,
    subgradient,
    tv_centroid_convergence_probe,
)

__version__ = "0.1.0"
