import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kquant import (
    DiscreteMeasure,
    RangeSet,
    discretize_quantile,
    essential_range,
    from_samples,
    moment_p,
    pushforward,
    read_csv,
    write_csv,
)


class TestFromSamples:
    def test_sort_and_merge(self):
        m = from_samples([1, 0, 1], [1, 2, 3])
        assert np.array_equal(m.atoms, [0, 1])
        assert np.array_equal(m.weights, [2, 4])
        assert not m.infinite_complement

    def test_singleton(self):
        m = from_samples([5], [2])
        assert np.array_equal(m.atoms, [5])
        assert np.array_equal(m.weights, [2])

    def test_three_level_step_function(self):
        m = from_samples([-1, 0, 1], [1 / 3, 1 / 3, 1 / 3])
        assert np.array_equal(m.atoms, [-1, 0, 1])
        assert np.allclose(m.weights, 1 / 3)

    def test_errors(self):
        with pytest.raises(ValueError):
            from_samples([], [])
        with pytest.raises(ValueError):
            from_samples([1], [0])
        with pytest.raises(ValueError):
            from_samples([1], [-2])
        with pytest.raises(ValueError):
            from_samples([math.nan], [1])
        with pytest.raises(ValueError):
            from_samples([math.inf], [1])

    @given(
        st.lists(st.floats(-50, 50), min_size=1, max_size=20),
        st.data(),
    )
    @settings(max_examples=80, deadline=None)
    def test_idempotent(self, values, data):
        weights = data.draw(
            st.lists(st.floats(0.01, 5), min_size=len(values), max_size=len(values))
        )
        m = from_samples(values, weights)
        again = from_samples(list(m.atoms), list(m.weights))
        assert again == m


class TestPushforward:
    def test_identity_relabel(self):
        m = pushforward([0.25, 0.75], [0.25, 0.75], [0.5, 0.5])
        assert np.array_equal(m.atoms, [0.25, 0.75])
        assert np.array_equal(m.weights, [0.5, 0.5])

    def test_constant_merges(self):
        m = pushforward([0.1, 0.5, 0.9], [3.0, 3.0, 3.0], [0.2, 0.3, 0.5])
        assert np.array_equal(m.atoms, [3.0])
        assert np.isclose(m.total_mass, 1.0)

    def test_three_step_function(self):
        # -1 on [0,1/3), 0 on [1/3,2/3), 1 on [2/3,1] with exact cell weights
        m = pushforward([0.1, 0.5, 0.9], [-1, 0, 1], [1 / 3, 1 / 3, 1 / 3])
        assert np.array_equal(m.atoms, [-1, 0, 1])
        assert np.allclose(m.weights, 1 / 3)

    def test_mass_conservation(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 40))
            f = rng.normal(size=n)
            w = rng.uniform(0.1, 3, n)
            assert np.isclose(pushforward(np.arange(n), f, w).total_mass, w.sum())

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pushforward([1, 2], [1], [1])


class TestDiscretizeQuantile:
    def test_uniform_two_atoms(self):
        m = discretize_quantile(lambda q: q, 2)
        assert np.allclose(m.atoms, [0.25, 0.75])
        assert np.allclose(m.weights, [0.5, 0.5])

    def test_uniform_four_atoms(self):
        m = discretize_quantile(lambda q: q, 4)
        assert np.allclose(m.atoms, [1 / 8, 3 / 8, 5 / 8, 7 / 8])
        assert np.allclose(m.weights, 0.25)

    def test_uniform_mean_and_mass(self):
        for n in (1, 2, 3, 7, 100):
            m = discretize_quantile(lambda q: q, n)
            assert np.isclose(m.total_mass, 1.0)
            assert np.isclose(float(np.sum(m.atoms * m.weights)), 0.5)

    def test_normal_second_moment(self):
        from statistics import NormalDist

        nd = NormalDist()
        m = discretize_quantile(nd.inv_cdf, 10 ** 5)
        assert np.isclose(m.total_mass, 1.0)
        # analytic second moment of the standard normal is 1
        assert abs(moment_p(m, 2.0) - 1.0) < 1e-3

    def test_monotonicity_check(self):
        with pytest.raises(ValueError):
            discretize_quantile(lambda q: -q, 3)
        with pytest.raises(ValueError):
            discretize_quantile(lambda q: q, 0)


class TestEssentialRange:
    def test_zero_tolerance_degenerate(self):
        r = essential_range(from_samples([0, 1], [1, 1]), 0.0)
        assert r.intervals() == [(0.0, 0.0), (1.0, 1.0)]

    def test_fusion(self):
        r = essential_range(from_samples([0, 0.001, 1], [1, 1, 1]), 0.01)
        assert r.intervals() == [(0.0, 0.001), (1.0, 1.0)]

    def test_plateau_function_grid(self):
        # f(x) = x outside (1/3, 2/3), 1/3 inside, on an n = 300 grid
        n = 300
        h = 1.0 / n
        xs = (np.arange(n) + 0.5) * h
        fv = np.where((xs > 1 / 3) & (xs < 2 / 3), 1 / 3, xs)
        m = pushforward(xs, fv, np.full(n, h))
        r = essential_range(m, 2 * h)
        assert r.count == 2
        (l1, u1), (l2, u2) = r.intervals()
        assert abs(l1 - 0.0) <= 2 * h and abs(u1 - 1 / 3) <= 2 * h
        assert abs(l2 - 2 / 3) <= 2 * h and abs(u2 - 1.0) <= 2 * h

    def test_interval_count_nonincreasing_in_tol(self, rng):
        for _ in range(20):
            x = np.unique(rng.normal(size=rng.integers(2, 30)))
            m = from_samples(x, np.ones(x.size))
            counts = [essential_range(m, tol).count
                      for tol in (0.0, 0.01, 0.1, 0.5, 2.0)]
            assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestMomentP:
    def test_examples(self):
        assert np.isclose(
            moment_p(from_samples([-1, 0, 1], [1 / 3, 1 / 3, 1 / 3]), 2.0), 2 / 3)
        assert moment_p(from_samples([2], [3]), 1.0) == 6
        assert moment_p(from_samples([0.25, 0.75], [0.5, 0.5]), 2.0) == 0.3125

    def test_p_below_one(self):
        with pytest.raises(ValueError):
            moment_p(from_samples([1], [1]), 0.5)


class TestCsv:
    def test_round_trip(self, tmp_path):
        m = from_samples([-1.5, 0.25, 7.125], [0.1, 2.25, 3.5])
        path = tmp_path / "m.csv"
        write_csv(m, path)
        assert read_csv(path) == m

    def test_header_optional_and_default_weight(self):
        m = read_csv(io.StringIO("1.5\n2.5,2\n"))
        assert np.array_equal(m.atoms, [1.5, 2.5])
        assert np.array_equal(m.weights, [1.0, 2.0])
        m2 = read_csv(io.StringIO("value,weight\n1.5,1\n2.5,2\n"))
        assert np.array_equal(m2.atoms, [1.5, 2.5])

    def test_parse_error(self):
        with pytest.raises(ValueError):
            read_csv(io.StringIO("value,weight\nbogus,1\n"))
        with pytest.raises(ValueError):
            read_csv(io.StringIO(""))


class TestTypes:
    def test_measure_validation(self):
        with pytest.raises(ValueError):
            DiscreteMeasure(np.array([1.0, 1.0]), np.array([1.0, 1.0]))
        with pytest.raises(ValueError):
            DiscreteMeasure(np.array([2.0, 1.0]), np.array([1.0, 1.0]))

    def test_measure_immutable(self):
        m = from_samples([1, 2], [1, 1])
        with pytest.raises(ValueError):
            m.atoms[0] = 5.0

    def test_rangeset_validation(self):
        with pytest.raises(ValueError):
            RangeSet(np.array([0.0, 0.5]), np.array([0.6, 1.0]))  # overlap
        with pytest.raises(ValueError):
            RangeSet(np.array([0.0]), np.array([-1.0]))

    def test_rangeset_with_point(self):
        r = RangeSet.from_intervals([(1.0, 2.0)])
        assert r.with_point(1.5) is r
        assert r.with_point(0.0).intervals() == [(0.0, 0.0), (1.0, 2.0)]
