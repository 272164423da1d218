import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lcdsym.errors import ConfigError
from lcdsym.mixture import (
    DiracMixture,
    SymmetricSampleSet,
    double_factorial,
    expand,
    raw_moment,
    sample_covariance,
    sample_mean,
    true_normal_moment,
)
from oracles import normal_moment

finite = st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False)


def test_symmetric_set_counts():
    s = SymmetricSampleSet(np.ones((4, 3)), includes_center=True)
    assert (s.dim, s.half_count, s.total_samples) == (3, 4, 9)
    assert expand(s).size == 9


def test_symmetric_set_is_read_only():
    s = SymmetricSampleSet(np.zeros((2, 2)) + 1)
    with pytest.raises(ValueError):
        s.half_positions[0, 0] = 5.0


@pytest.mark.parametrize("bad", [np.zeros((0, 2)), np.array([[np.nan, 1.0]]), np.ones(3)])
def test_symmetric_set_rejects_bad_input(bad):
    with pytest.raises(ConfigError):
        SymmetricSampleSet(bad)


def test_mixture_weight_sum_checked():
    with pytest.raises(ConfigError):
        DiracMixture(np.zeros((2, 1)), np.array([0.5, 0.6]))


def test_mixture_allows_negative_weights():
    mix = DiracMixture(np.array([[0.0], [1.0], [-1.0]]), np.array([1.2, -0.1, -0.1]))
    assert mix.size == 3


@settings(max_examples=100, deadline=None)
@given(hnp.arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 4)), elements=finite),
       st.booleans())
def test_expanded_sets_have_zero_odd_moments(half, center):
    mix = expand(SymmetricSampleSet(half, center))
    assert np.all(sample_mean(mix) == 0.0)
    dim = half.shape[1]
    odd = [(1,) + (0,) * (dim - 1), (3,) + (0,) * (dim - 1), (0,) * (dim - 1) + (5,)]
    if dim >= 2:
        odd.append((2, 1) + (0,) * (dim - 2))
    for exps in odd:
        assert raw_moment(mix, exps) == 0.0


def test_sample_covariance_about_mean():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.0, -2.0]])
    mix = DiracMixture(pts, np.full(4, 0.25))
    np.testing.assert_allclose(sample_covariance(mix), np.diag([0.5, 2.0]))


def test_double_factorial():
    assert [double_factorial(n) for n in (-1, 0, 1, 2, 5, 6)] == [1, 1, 1, 2, 15, 48]


@pytest.mark.parametrize("exps", [(0,), (2,), (4,), (6,), (8,), (2, 2), (4, 2, 0), (1, 1), (3, 1)])
def test_true_normal_moment_matches_reference(exps):
    assert true_normal_moment(exps) == pytest.approx(normal_moment(exps), abs=1e-12)
