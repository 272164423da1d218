import numpy as np
import pytest

from lcdsym import cache, distance
from lcdsym.errors import ConfigError
from lcdsym.schemes import CacheMissError, RUKFSampler, S2KFSampler, make_sampler, obtain


def test_obtain_caches(cache_dir):
    s, rep = obtain(2, 6)
    assert rep is not None and rep.converged
    before = distance.evaluation_count()
    s2, rep2 = obtain(2, 6)
    assert rep2 is None and distance.evaluation_count() == before
    np.testing.assert_array_equal(s.half_positions, s2.half_positions)
    _, rep3 = obtain(2, 6, force_recompute=True)
    assert rep3 is not None


def test_obtain_no_compute(cache_dir):
    with pytest.raises(CacheMissError):
        obtain(2, 6, allow_compute=False)


def test_s2kf_sampler_memoizes(cache_dir):
    smp = S2KFSampler(7)
    a = smp(3)
    assert a is smp(3) and a.size == 7
    assert cache.lookup(cache.CacheKey(3, 7)) is not None


def test_rukf_sampler_fresh_but_reproducible():
    a, b = RUKFSampler(2, seed=1), RUKFSampler(2, seed=1)
    x1, x2 = a(3), a(3)
    assert not np.array_equal(x1.positions, x2.positions)
    np.testing.assert_array_equal(b(3).positions, x1.positions)


@pytest.mark.parametrize("spec,size", [("ukf", 6), ("ukf-odd", 7), ("ckf5", 19), ("ghkf", 8), ("rukf:3", 19), ("RUKF", 31), ("rukf:", 31)])
def test_make_sampler(spec, size):
    assert make_sampler(spec)(3).size == size


@pytest.mark.parametrize("spec", ["foo", "s2kf:x", "ukf:3", "rukf:two"])
def test_make_sampler_rejects(spec):
    with pytest.raises(ConfigError):
        make_sampler(spec)
