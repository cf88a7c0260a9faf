import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from markov_game.centroid import (
    f_projection,
    pythagorean_residual,
    weighted_centroid,
    weighted_centroid_closed,
    weighted_centroid_generic,
)
from markov_game.divergence import (
    alpha,
    divergence,
    divergences_to_family,
    hellinger2,
    kl,
    reverse_kl,
    total_variation,
)
from markov_game.errors import DegenerateFamilyError, InvalidWeightsError, UnsupportedSpecError
from markov_game.generators import is_reversible, pi_dual, power_mean_reversiblization, zero_row_sums
from markov_game.oracle import GridSpec, oracle_edge_scan
from markov_game.random_instances import random_distribution, random_family, random_reversible

from .strategies import instances, reversible_pairs, seeds

CLOSED = [alpha(-1.0), alpha(0.5), alpha(2.0), alpha(3.0), kl(), hellinger2(), reverse_kl()]
ids = lambda s: s.name  # noqa: E731


def _weights(rng, n):
    return rng.dirichlet(np.ones(n))


class TestProjection:
    def test_kl_two_state(self, two_state):
        L, pi = two_state
        P = f_projection(kl(), L, pi)
        np.testing.assert_allclose(P[~np.eye(2, dtype=bool)], [math.sqrt(3)] * 2)

    def test_alpha_half_is_p_half(self, rng):
        pi = random_distribution(rng, 4)
        L = random_family(rng, 1, 4)[0]
        np.testing.assert_allclose(f_projection(alpha(0.5), L, pi), power_mean_reversiblization(L, pi, 0.5))
        np.testing.assert_allclose(f_projection(hellinger2(), L, pi), power_mean_reversiblization(L, pi, 0.5))

    @pytest.mark.parametrize("spec", CLOSED + [total_variation(0.5)], ids=ids)
    def test_reversible_input_is_fixed(self, spec, rng):
        pi = random_distribution(rng, 4)
        M = random_reversible(rng, pi)
        np.testing.assert_allclose(f_projection(spec, M, pi), M, rtol=1e-10)

    @pytest.mark.parametrize("spec", CLOSED, ids=ids)
    @given(inst=instances(n=st.just(1)))
    def test_projection_minimises_over_reversible(self, spec, inst):
        fam, pi = inst
        L = fam[0]
        P = f_projection(spec, L, pi)
        best = divergence(spec, P, L, pi)
        rng = np.random.default_rng(0)
        for _ in range(5):
            M = random_reversible(rng, pi)
            assert divergence(spec, M, L, pi) >= best - 1e-12

    def test_tv_flat_interval(self, rng):
        pi = random_distribution(rng, 4)
        L = random_family(rng, 1, 4)[0]
        res = weighted_centroid_generic(total_variation(), L[None], pi, np.ones(1))
        lo, hi = res.flat_interval
        np.testing.assert_allclose(lo, power_mean_reversiblization(L, pi, -math.inf), rtol=1e-9)
        np.testing.assert_allclose(hi, power_mean_reversiblization(L, pi, math.inf), rtol=1e-9)
        assert np.array_equal(f_projection(total_variation(), L, pi), power_mean_reversiblization(L, pi, -math.inf))


class TestClosedForm:
    @pytest.mark.parametrize("spec", CLOSED, ids=ids)
    def test_vertex_weights_give_projection(self, spec, rng):
        pi = random_distribution(rng, 3)
        fam = random_family(rng, 3, 3, zero_prob=0.2)
        for i in range(3):
            if not np.any(fam[i] > 0):
                continue
            res = weighted_centroid_closed(spec, fam, pi, np.eye(3)[i])
            np.testing.assert_allclose(res.centroid, f_projection(spec, fam[i], pi), rtol=1e-12, atol=1e-14)

    def test_kl_conjugate_centroid_is_arithmetic(self, rng):
        pi = random_distribution(rng, 4)
        fam = random_family(rng, 3, 4)
        w = _weights(rng, 3)
        res = weighted_centroid_closed(kl().conjugate(), fam, pi, w)
        expect = sum(wi * power_mean_reversiblization(L, pi, 1.0) for wi, L in zip(w, fam))
        np.testing.assert_allclose(res.centroid, expect, rtol=1e-12)

    @pytest.mark.parametrize("spec", CLOSED, ids=ids)
    @given(inst=instances(n=st.integers(1, 4)), wseed=seeds)
    def test_result_invariants(self, spec, inst, wseed):
        fam, pi = inst
        w = _weights(np.random.default_rng(wseed), fam.shape[0])
        res = weighted_centroid_closed(spec, fam, pi, w)
        assert is_reversible(res.centroid, pi, tol=1e-10)
        np.testing.assert_allclose(
            res.per_member_divergence, divergences_to_family(spec, res.centroid, fam, pi), rtol=1e-9
        )

    def test_unsupported(self, rng):
        pi = random_distribution(rng, 3)
        with pytest.raises(UnsupportedSpecError):
            weighted_centroid_closed(total_variation(), random_family(rng, 2, 3), pi, [0.5, 0.5])

    def test_degenerate(self):
        pi = np.ones(2) / 2
        fam = np.stack([np.zeros((2, 2)), [[-1.0, 1.0], [1.0, -1.0]]])
        with pytest.raises(DegenerateFamilyError):
            weighted_centroid_closed(kl(), fam, pi, [1.0, 0.0])
        with pytest.raises(DegenerateFamilyError):
            weighted_centroid_closed(kl(), fam[:1], pi, [1.0])

    def test_bad_weights(self, rng):
        pi = random_distribution(rng, 3)
        fam = random_family(rng, 2, 3)
        for w in ([0.5, 0.6], [1.2, -0.2], [1.0]):
            with pytest.raises(InvalidWeightsError):
                weighted_centroid_closed(kl(), fam, pi, w)

    def test_alpha_large_zero_entry_forces_zero(self):
        pi = np.ones(2) / 2
        fam = np.stack([[[-1.0, 1.0], [2.0, -2.0]], [[0.0, 0.0], [3.0, -3.0]]])
        res = weighted_centroid_closed(alpha(2.0), fam, pi, [0.5, 0.5])
        np.testing.assert_array_equal(res.centroid, np.zeros((2, 2)))


class TestGeneric:
    @pytest.mark.parametrize("spec", CLOSED, ids=ids)
    @given(inst=instances(n=st.integers(1, 4), d=st.integers(2, 4)), wseed=seeds)
    def test_matches_closed_form(self, spec, inst, wseed):
        fam, pi = inst
        w = _weights(np.random.default_rng(wseed), fam.shape[0])
        a = weighted_centroid_closed(spec, fam, pi, w).centroid
        b = weighted_centroid_generic(spec, fam, pi, w).centroid
        assert np.max(np.abs(a - b)) <= 1e-8 * max(1.0, np.max(np.abs(a)))

    @pytest.mark.parametrize("spec", CLOSED, ids=ids)
    def test_matches_closed_form_with_zeros(self, spec, rng):
        for _ in range(20):
            pi = random_distribution(rng, 3)
            fam = random_family(rng, 3, 3, zero_prob=0.3)
            if not np.any(fam > 0):
                continue
            w = _weights(rng, 3)
            a = weighted_centroid_closed(spec, fam, pi, w).centroid
            b = weighted_centroid_generic(spec, fam, pi, w).centroid
            np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-10)

    def test_all_zero_pair(self):
        pi = np.array([0.2, 0.3, 0.5])
        L = zero_row_sums(np.array([[0, 1.0, 0], [2.0, 0, 0], [0, 0, 0]]))
        for spec in (kl(), total_variation(0.5), alpha(2.0)):
            M = weighted_centroid_generic(spec, L[None], pi, np.ones(1)).centroid
            assert M[0, 2] == M[2, 0] == M[1, 2] == M[2, 1] == 0.0

    @pytest.mark.parametrize("spec", [kl(), alpha(2.0), alpha(-1.0), hellinger2()], ids=ids)
    @given(inst=instances(n=st.integers(1, 3), d=st.integers(2, 4)), wseed=seeds)
    def test_bracket_independent(self, spec, inst, wseed):
        fam, pi = inst
        w = _weights(np.random.default_rng(wseed), fam.shape[0])
        a = weighted_centroid_generic(spec, fam, pi, w, bracket_scale=1.0).centroid
        b = weighted_centroid_generic(spec, fam, pi, w, bracket_scale=1e-3).centroid
        c = weighted_centroid_generic(spec, fam, pi, w, bracket_scale=1e3).centroid
        assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.abs(a).max())
        assert np.max(np.abs(a - c)) <= 1e-10 * max(1.0, np.abs(a).max())

    @pytest.mark.parametrize("spec", [kl(), alpha(2.0), hellinger2(), total_variation(0.5)], ids=ids)
    @given(inst=instances(n=st.integers(1, 3), d=st.integers(3, 4)), wseed=seeds)
    def test_first_order_optimality(self, spec, inst, wseed):
        fam, pi = inst
        rng = np.random.default_rng(wseed)
        w = _weights(rng, fam.shape[0])
        M = weighted_centroid(spec, fam, pi, w).centroid

        def objective(G):
            return float(w @ divergences_to_family(spec, G, fam, pi))

        base = objective(M)
        eps = 1e-7
        for _ in range(10):
            S = np.triu(rng.normal(size=M.shape), 1)
            S = S + S.T
            # reversible M has a symmetric zero pattern; only push zeros upward
            S = np.where(M <= 0, np.abs(S), S)
            delta = zero_row_sums(S / pi[:, None])
            assert (objective(M + eps * delta) - base) / eps >= -1e-6 * max(1.0, abs(base))

    @given(seed=seeds, n=st.integers(1, 3))
    def test_oracle_edge_scan_agrees_two_state(self, seed, n):
        rng = np.random.default_rng(seed)
        pi = random_distribution(rng, 2)
        fam = random_family(rng, n, 2)
        w = _weights(rng, n)
        for spec in (kl(), alpha(2.0), hellinger2()):
            M = weighted_centroid_generic(spec, fam, pi, w).centroid
            S = oracle_edge_scan(spec, fam, pi, w, GridSpec(1e-5))
            # the scan works on fluxes pi(x) M(x, y): compare at that scale
            assert np.max(np.abs(pi[:, None] * (M - S))) <= 1e-4

    def test_tv_plateau_brackets_flat_interval(self, rng):
        pi = random_distribution(rng, 2)
        fam = random_family(rng, 1, 2)
        fam = np.stack([fam[0], pi_dual(fam[0], pi)])
        w = np.array([0.5, 0.5])
        res = weighted_centroid_generic(total_variation(0.5), fam, pi, w)
        _, (lo, hi) = oracle_edge_scan(total_variation(0.5), fam, pi, w, GridSpec(1e-4), return_plateau=True)
        lo_s, hi_s = res.flat_interval
        off = ~np.eye(2, dtype=bool)
        flux = lambda G: (pi[:, None] * G)[off]  # noqa: E731
        assert np.all(flux(lo) >= flux(lo_s) - 1e-4) and np.all(flux(lo) <= flux(lo_s) + 1e-4)
        assert np.all(flux(hi) >= flux(hi_s) - 1e-4) and np.all(flux(hi) <= flux(hi_s) + 1e-4)


class TestPythagorean:
    @given(pair=reversible_pairs(d=st.integers(3, 3)))
    def test_alpha_two(self, pair):
        M, L, pi = pair
        assert pythagorean_residual(alpha(2.0), M, L, pi) <= 1e-9 * max(1.0, divergence(alpha(2.0), M, L, pi))

    @given(pair=reversible_pairs(d=st.integers(2, 2)))
    def test_alpha_half(self, pair):
        M, L, pi = pair
        assert pythagorean_residual(alpha(0.5), M, L, pi) <= 1e-9

    def test_at_projection(self, rng):
        pi = random_distribution(rng, 3)
        L = random_family(rng, 1, 3)[0]
        spec = alpha(2.0)
        Mf = f_projection(spec, L, pi)
        assert pythagorean_residual(spec, Mf, L, pi) <= 1e-12
        assert divergence(spec, Mf, Mf, pi) == 0.0

    def test_requires_reversible(self, rng):
        pi = random_distribution(rng, 3)
        L = random_family(rng, 2, 3)
        with pytest.raises(ValueError):
            pythagorean_residual(alpha(2.0), L[0], L[1], pi)

    def test_rejects_tv(self, rng):
        pi = random_distribution(rng, 3)
        with pytest.raises(UnsupportedSpecError):
            pythagorean_residual(total_variation(), random_reversible(rng, pi), random_reversible(rng, pi), pi)
