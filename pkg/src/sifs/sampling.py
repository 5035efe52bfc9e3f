"""Finite samples of a space, described by short spec strings.

``all`` (finite spaces), ``grid:N``, ``random:N`` and ``points`` (explicit
points listed in the space document) are understood.
"""
from __future__ import annotations

import numpy as np


class SampleSpecError(ValueError):
    pass


def box(space):
    if space.bounds is not None:
        return space.bounds
    return np.zeros(space.dimension), np.ones(space.dimension)


def grid_sample(space, n):
    """About ``n`` points on a regular grid over the space's bounds.

    In d dimensions each axis gets ``round(n ** (1/d))`` points (at least 2).
    """
    if space.is_finite:
        return np.arange(space.size)
    lo, hi = box(space)
    per_axis = max(2, int(round(n ** (1.0 / space.dimension))))
    axes = [np.linspace(lo[j], hi[j], per_axis) for j in range(space.dimension)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def random_sample(space, n, seed=0):
    rng = np.random.default_rng(seed)
    if space.is_finite:
        k = min(n, space.size)
        return np.sort(rng.choice(space.size, size=k, replace=False))
    lo, hi = box(space)
    return lo + (hi - lo) * rng.random((n, space.dimension))


def parse_sample(space, spec, seed=0, points=None):
    """Resolve a sample spec into ``(points, description)``."""
    if spec is None:
        spec = "all" if space.is_finite else "grid:100"
    name, _, arg = spec.partition(":")
    if name == "all":
        if not space.is_finite:
            raise SampleSpecError("'all' sampling needs a finite space")
        return np.arange(space.size), "all"
    if name == "points":
        if points is None:
            raise SampleSpecError("'points' sampling needs a 'points' list in the space document")
        return space.as_points(points), "points"
    if name in ("grid", "random"):
        try:
            n = int(arg)
        except ValueError:
            raise SampleSpecError(f"bad sample size in {spec!r}") from None
        if n < 1:
            raise SampleSpecError("sample size must be positive")
        if name == "grid":
            return grid_sample(space, n), f"grid:{n}"
        return random_sample(space, n, seed), f"random:{n}:seed={seed}"
    raise SampleSpecError(f"unknown sample spec {spec!r}")
