"""Sampling-scheme providers for the filters: ``dim -> DiracMixture``.

:class:`S2KFSampler` goes through the Sample Cache; the others build their
sets on demand.  Scheme strings such as ``"s2kf:25"`` or ``"rukf:5"`` are
parsed by :func:`make_sampler`.
"""
from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import cache
from .baselines import ckf5, ghkf, rukf, ukf_equal
from .errors import ConfigError
from .mixture import DiracMixture, SymmetricSampleSet, expand
from .optimizer import OptimizerConfig, optimize

log = logging.getLogger(__name__)


class CacheMissError(ConfigError):
    pass


def seed_root(root, seed: int, base_seed: int) -> Optional[Path]:
    """Cache directory for a seeded variant; the base seed uses ``root`` itself."""
    root = cache._resolve(root)
    return root if seed == base_seed else root / f"seed-{seed}"


def obtain(dim: int, total: int, cfg: OptimizerConfig = OptimizerConfig(), root=None,
           force_recompute: bool = False, allow_compute: bool = True):
    """Cached set for ``(dim, total)``, optimizing and storing it on a miss.

    Returns ``(set, report)``; ``report`` is None for a cache hit.
    """
    key = cache.CacheKey(dim, total)
    if not force_recompute:
        hit = cache.lookup(key, root)
        if hit is not None:
            return hit, None
    if not allow_compute:
        raise CacheMissError(f"no cached sample set for N={dim}, M={total} under {cache._resolve(root)}")
    sset, report = optimize(dim, total, cfg)
    log.info("optimized N=%d M=%d: %s", dim, total, report)
    cache.store(sset, root)
    return sset, report


def symmetric_set(dim: int, total: int, cfg: OptimizerConfig = OptimizerConfig(), root=None,
                  force_recompute: bool = False, allow_compute: bool = True) -> SymmetricSampleSet:
    return obtain(dim, total, cfg, root, force_recompute, allow_compute)[0]


class S2KFSampler:
    """Optimal symmetric sets with a fixed total sample count."""

    def __init__(self, total_samples: int, cfg: OptimizerConfig = OptimizerConfig(), root=None,
                 force_recompute: bool = False, allow_compute: bool = True):
        self.total_samples = total_samples
        self.cfg = cfg
        self.root = root
        self.force_recompute = force_recompute
        self.allow_compute = allow_compute
        self._sets = {}

    def __call__(self, dim: int) -> DiracMixture:
        if dim not in self._sets:
            sset = symmetric_set(dim, self.total_samples, self.cfg, self.root,
                                 self.force_recompute, self.allow_compute)
            self._sets[dim] = expand(sset)
        return self._sets[dim]


class RUKFSampler:
    """Fresh randomized UKF set on every call, reproducible from ``seed``."""

    def __init__(self, iterations: int, seed: int = 0):
        self.iterations = iterations
        self.seed = seed
        self.calls = 0

    def __call__(self, dim: int) -> DiracMixture:
        call_seed = int(np.random.SeedSequence([self.seed, self.calls]).generate_state(1, np.uint64)[0])
        self.calls += 1
        return rukf(dim, self.iterations, call_seed)


class _Memo:
    def __init__(self, build):
        self.build = build
        self._sets = {}

    def __call__(self, dim: int) -> DiracMixture:
        if dim not in self._sets:
            self._sets[dim] = self.build(dim)
        return self._sets[dim]


def make_sampler(spec: str, seed: int = 0, cfg: OptimizerConfig = OptimizerConfig(), root=None,
                 force_recompute: bool = False, allow_compute: bool = True):
    """Build a sampler from ``name[:arg]``: ``s2kf:M``, ``rukf:iterations``,
    ``ukf``, ``ukf-odd``, ``ckf5``, ``ghkf``."""
    name, _, arg = spec.strip().partition(":")
    name = name.lower()
    try:
        if name == "s2kf":
            return S2KFSampler(int(arg), replace(cfg, seed=seed), root, force_recompute, allow_compute)
        if name == "rukf":
            return RUKFSampler(int(arg) if arg else 5, seed)
    except ValueError:
        raise ConfigError(f"bad scheme argument in {spec!r}") from None
    if arg:
        raise ConfigError(f"scheme {name!r} takes no argument")
    if name == "ukf":
        return _Memo(lambda d: ukf_equal(d, "even"))
    if name == "ukf-odd":
        return _Memo(lambda d: ukf_equal(d, "odd"))
    if name == "ckf5":
        return _Memo(ckf5)
    if name == "ghkf":
        return _Memo(ghkf)
    raise ConfigError(f"unknown scheme {spec!r}")
