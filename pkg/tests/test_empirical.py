import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coxtest.core import TrajectorySet, concat_events, step_weighted_integral
from coxtest.empirical import empirical_curves, i_hat
from coxtest.errors import InvalidSampleError
from coxtest.simulate import CoxModel1, HomPoisson

from .oracles import grid_counts


def random_sample(seed, n, rate=2.0, rounding=None):
    rng = np.random.default_rng(seed)
    paths = []
    for _ in range(n):
        ev = rng.uniform(0, 1, rng.poisson(rate))
        if rounding:
            ev = np.round(ev, rounding)  # forces ties across and within paths
            ev = ev[ev > 0]
        paths.append(np.sort(ev))
    return concat_events(paths, 1.0)


class TestFixtureF1:
    def test_values_at_04(self, f1):
        c = empirical_curves(f1)
        assert c.mean(0.4) == pytest.approx(2 / 3, abs=1e-15)
        assert c.variance(0.4) == pytest.approx(4 / 3, abs=1e-15)
        assert c.diff(0.4) == pytest.approx(2 / 3, abs=1e-15)

    def test_before_any_event(self, f1):
        c = empirical_curves(f1)
        assert (c.mean(0.1), c.variance(0.1), c.diff(0.1)) == (0, 0, 0)

    def test_breakpoints(self, f1):
        c = empirical_curves(f1)
        assert list(c.diff.breakpoints) == [0, 0.2, 0.3, 0.5]
        assert c.diff.values[0] == 0

    def test_i_hat(self, f1):
        assert i_hat(f1) == pytest.approx(np.sqrt(14 / 75), abs=1e-12)
        assert step_weighted_integral(empirical_curves(f1).mean) == pytest.approx(14 / 75, abs=1e-12)

    def test_i_hat_grid_oracle(self, f1):
        m = 10**6
        t = (np.arange(m) + 0.5) / m
        mean = grid_counts(f1, t).mean(axis=0)
        assert np.sum((1 - t) * mean**2) / m == pytest.approx(14 / 75, abs=1e-9)


def test_two_paths_single_event():
    c = empirical_curves(concat_events([[0.5], []], 1.0))
    assert (c.mean(0.8), c.variance(0.8), c.diff(0.8)) == (0.5, 0.5, 0.0)


def test_no_events():
    s = concat_events([[], [], []], 1.0)
    c = empirical_curves(s)
    assert list(c.diff.values) == [0.0]
    assert i_hat(s) == 0.0


def test_rejects_non_sample():
    with pytest.raises(InvalidSampleError):
        empirical_curves([[0.1], [0.2]])


@pytest.mark.parametrize("seed,n,rounding", [(0, 5, None), (1, 40, None), (2, 30, 2), (3, 200, 3)])
def test_against_grid_oracle(seed, n, rounding):
    s = random_sample(seed, n, rounding=rounding)
    c = empirical_curves(s)
    grid = np.linspace(0, 1, 10**5)
    counts = grid_counts(s, grid)
    mean = counts.mean(axis=0)
    var = counts.var(axis=0, ddof=1)
    np.testing.assert_allclose(c.mean(grid), mean, atol=1e-10, rtol=0)
    np.testing.assert_allclose(c.variance(grid), var, atol=1e-10, rtol=0)
    np.testing.assert_allclose(c.diff(grid), var - mean, atol=1e-10, rtol=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.sampled_from([None, 1, 2]))
def test_permutation_invariance(seed, n, rounding):
    s = random_sample(seed, n, rounding=rounding)
    perm = np.random.default_rng(seed).permutation(n)
    s2 = TrajectorySet([s[i] for i in perm])
    a, b = empirical_curves(s), empirical_curves(s2)
    for name in ("mean", "variance", "diff"):
        fa, fb = getattr(a, name), getattr(b, name)
        assert np.array_equal(fa.breakpoints, fb.breakpoints)
        assert np.array_equal(fa.values, fb.values)
    assert i_hat(s) == i_hat(s2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40))
def test_curve_invariants(seed, n):
    s = random_sample(seed, n)
    c = empirical_curves(s)
    assert c.diff.values[0] == 0
    assert np.all(np.diff(c.mean.values) >= 0)
    assert np.all(c.variance.values >= 0)
    # n * m_hat(T) is the total event count
    assert c.mean_at_horizon * n == pytest.approx(s.total_events, abs=1e-9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 20))
def test_identical_paths_have_zero_variance(seed, n):
    ev = np.sort(np.random.default_rng(seed).uniform(0, 1, 5))
    c = empirical_curves(concat_events([ev] * n, 1.0))
    assert np.all(c.variance.values == 0)
    np.testing.assert_array_equal(c.diff.values, -c.mean.values)


def test_doubling_counts_quadruples_i_hat_squared():
    base = random_sample(7, 10)
    doubled = TrajectorySet.from_flat(
        np.concatenate([np.repeat(tr.events, 2) for tr in base]), 2 * base.counts, 1.0
    )
    np.testing.assert_allclose(empirical_curves(doubled).mean.values, 2 * empirical_curves(base).mean.values)
    assert i_hat(doubled) ** 2 == pytest.approx(4 * i_hat(base) ** 2, rel=1e-12)


def test_batch_samples_feed_through():
    for model in (HomPoisson(3.0), CoxModel1(0.5)):
        s = model.sample(50, np.random.default_rng(0))
        c = empirical_curves(s)
        assert c.diff.breakpoints.size == np.unique(s.times).size + 1
