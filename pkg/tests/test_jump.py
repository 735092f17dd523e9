import math
from fractions import Fraction

import numpy as np
import pytest

import maslovkit as mk
from conftest import random_descriptor
from maslovkit.errors import HypothesesNotMet, NoneFoundWithinBound


def turns(p, q=1):
    return mk.rotation_path(0.0, turns=Fraction(p, q))


class TestJumpInterval:
    def test_hyperbolic_interval_is_empty(self):
        g = mk.hyperbolic_path(1.0)
        j = mk.jump_interval(g, 3)
        assert (j.lo, j.hi) == (-1, 0)
        assert not j.contains_closed(0, 0)

    def test_half_turn_interval(self):
        g = mk.rotation_path(math.pi)
        j = mk.jump_interval(g, 1)
        assert (j.lo, j.hi) == (0, 3)
        assert j.contains_closed(1, 2)
        assert not j.contains_closed(0, 1)
        assert 2 in j
        assert 3 not in j

    def test_matches_index_pairs(self):
        g = turns(1)
        for m in (1, 2, 3):
            at_m = mk.index_pair(g, m)
            nxt = mk.index_pair(g, m + 2)
            j = mk.jump_interval(g, m)
            assert j.lo == at_m.i + at_m.nu - 1
            assert j.hi == nxt.i


class TestMinimalPeriodPredicate:
    def test_forcing_case(self):
        assert mk.minimal_period_forced(2, 1, 2, 1)

    def test_large_iterate_index_escapes(self):
        assert not mk.minimal_period_forced(5, 1, 2, 1)

    def test_nondegenerate_first_iterate_escapes(self):
        assert not mk.minimal_period_forced(2, 0, 2, 1)

    def test_small_initial_index_escapes(self):
        assert not mk.minimal_period_forced(2, 0, 1, 2)

    def test_no_counterexamples_on_iterates(self):
        # the predicate may only fire at m = 1, whatever the path
        rng = np.random.default_rng(911)
        paths = [
            turns(1, 2),
            turns(1),
            turns(3, 2),
            turns(1, 3),
            mk.hyperbolic_path(0.7),
            mk.diamond_sum(turns(1, 2), mk.hyperbolic_path(1.0)),
            mk.diamond_sum(turns(1), turns(1, 4)),
            mk.integrate(random_descriptor(rng, n=1)),
        ]
        for g in paths:
            pairs = mk.index_sequence(g, 10, check_attainment=False)
            for m in range(2, 11):
                assert not mk.minimal_period_forced(
                    pairs[m - 1].i, pairs[0].i, pairs[0].nu, g.n
                ), (g.provenance.get("family"), m)


class TestHypotheses:
    def test_full_turn_passes(self):
        report = mk.jump_hypotheses([turns(1)])
        assert report.passed
        entry = report.entries[0]
        assert entry.mean_positive and entry.initial_at_least_n

    def test_hyperbolic_fails_on_mean(self):
        report = mk.jump_hypotheses([mk.hyperbolic_path(1.0)])
        assert not report.passed
        assert not report.entries[0].mean_positive

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(ValueError):
            mk.jump_hypotheses([turns(1), mk.diamond_sum(turns(1), turns(1))])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            mk.jump_hypotheses([])


class TestSearchCommonJumps:
    def test_full_turn_tuples(self):
        found = mk.search_common_jumps([turns(1)], 8)
        assert [(t.N, t.m) for t in found] == [
            (2, (1,)), (4, (2,)), (6, (3,)), (8, (4,))
        ]
        for t in found:
            assert (t.kappa1, t.kappa2) == (1, 0)
            assert t.interval == (2 * t.N - 1, 2 * t.N)

    def test_tuple_iterates_as_flat_sequence(self):
        t = mk.search_common_jumps([turns(1)], 2)[0]
        assert tuple(t) == (2, 1)

    def test_duplicated_path_gets_equal_periods(self):
        g = turns(1)
        found = mk.search_common_jumps([g, g], 6)
        assert [(t.N, t.m) for t in found] == [
            (2, (1, 1)), (4, (2, 2)), (6, (3, 3))
        ]

    def test_distinct_mean_indices_mix(self):
        # the slow path needs twice the period of the fast one
        found = mk.search_common_jumps([turns(1), turns(1, 2)], 6)
        assert [(t.N, t.m) for t in found] == [
            (2, (1, 2)), (4, (2, 4)), (6, (3, 6))
        ]

    def test_count_truncates(self):
        found = mk.search_common_jumps([turns(1)], 40, count=3)
        assert len(found) == 3

    def test_linear_density(self):
        found = mk.search_common_jumps([turns(1)], 12)
        assert len(found) == 12 // 2

    def test_hyperbolic_raises_hypotheses(self):
        with pytest.raises(HypothesesNotMet):
            mk.search_common_jumps([mk.hyperbolic_path(1.0)], 10)

    def test_too_small_bound_raises_none_found(self):
        with pytest.raises(NoneFoundWithinBound):
            mk.search_common_jumps([turns(1)], 1)

    def test_intervals_actually_contain_the_band(self):
        for t in mk.search_common_jumps([turns(1), turns(1, 2)], 4):
            for g, m in zip([turns(1), turns(1, 2)], t.m):
                j = mk.jump_interval(g, 2 * m - 1, check_attainment=False)
                assert j.contains_closed(*t.interval)
