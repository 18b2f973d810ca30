"""Multi-index set enumeration: counts, ordering, nesting, lookup."""

import itertools

import numpy as np
import pytest

from powlim import count_fixed_weight, count_multi_indices, enumerate_multi_indices


def brute_count(max_weight, dim):
    return sum(
        1
        for k in itertools.product(range(max_weight + 1), repeat=dim)
        if sum(k) <= max_weight
    )


class TestCounts:
    def test_matches_brute_force_enumeration(self):
        for m in range(0, 7):
            for d in range(1, 7):
                assert count_multi_indices(m, d) == brute_count(m, d)

    def test_known_cardinalities(self):
        assert count_multi_indices(1, 10) == 11
        assert count_multi_indices(10, 2) == 66
        assert count_multi_indices(3, 10) == 286
        assert count_multi_indices(3, 14) == 680

    def test_fixed_weight_is_stars_and_bars(self):
        # C(p + d - 1, d - 1); the m=3, d=14 level has C(16, 13) = 560 entries
        assert count_fixed_weight(3, 14) == 560
        assert count_fixed_weight(0, 5) == 1
        assert count_fixed_weight(4, 1) == 1

    def test_levels_sum_to_total(self):
        for m, d in [(4, 3), (6, 2), (2, 8)]:
            assert count_multi_indices(m, d) == sum(
                count_fixed_weight(p, d) for p in range(m + 1)
            )

    def test_overflow_past_int64_raises(self):
        with pytest.raises(OverflowError):
            count_multi_indices(64, 64)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            count_multi_indices(-1, 2)
        with pytest.raises(ValueError):
            count_multi_indices(2, 0)
        with pytest.raises(ValueError):
            count_fixed_weight(-1, 2)


class TestEnumeration:
    def test_first_index_is_zero(self):
        for m, d in [(1, 1), (3, 2), (2, 5)]:
            ks = enumerate_multi_indices(m, d)
            assert ks[0] == (0,) * d

    def test_graded_order_with_lex_within_level(self):
        ks = enumerate_multi_indices(3, 3)
        weights = ks.indices.sum(axis=1)
        assert np.all(np.diff(weights) >= 0)
        for p in range(4):
            level = ks.indices[weights == p]
            for a, b in zip(level[:-1], level[1:]):
                assert tuple(a) < tuple(b)

    def test_set_is_exactly_the_weight_ball(self):
        ks = enumerate_multi_indices(2, 3)
        expected = {
            k for k in itertools.product(range(3), repeat=3) if sum(k) <= 2
        }
        assert set(iter(ks)) == expected
        assert len(ks) == len(expected)

    def test_nesting_smaller_m_is_a_prefix(self):
        small = enumerate_multi_indices(2, 3)
        large = enumerate_multi_indices(4, 3)
        np.testing.assert_array_equal(large.indices[: len(small)], small.indices)

    def test_position_inverts_getitem(self):
        ks = enumerate_multi_indices(3, 2)
        for i in range(len(ks)):
            assert ks.position(ks[i]) == i

    def test_position_rejects_foreign_indices(self):
        ks = enumerate_multi_indices(2, 2)
        with pytest.raises(KeyError):
            ks.position((3, 0))
        with pytest.raises(ValueError):
            ks.position((1, 0, 0))

    def test_indices_are_read_only(self):
        ks = enumerate_multi_indices(2, 2)
        with pytest.raises(ValueError):
            ks.indices[0, 0] = 5
