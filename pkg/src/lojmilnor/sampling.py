"""Seeded sampling of balls around a base point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


def make_rng(seed: int) -> np.random.Generator:
    # any Python int is accepted; negative seeds wrap into the 64-bit range
    return np.random.default_rng(int(seed) % 2**64)


def unit_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``count`` uniform points on S^(n-1)."""
    U = rng.standard_normal((count, n))
    norms = np.sqrt(np.sum(U * U, axis=1))
    # a zero Gaussian draw has probability zero, but keep the vector on the sphere
    bad = norms == 0.0
    U[bad] = 0.0
    U[bad, 0] = 1.0
    norms[bad] = 1.0
    return U / norms[:, None]


@dataclass(frozen=True)
class RegionSpec:
    """A sampled ball around ``center``: radii ε·2⁻ʲ for j < radial_levels,
    ``directions_per_level`` seeded directions at each radius."""

    center: tuple[float, ...]
    radius: float = 0.5
    radial_levels: int = 8
    directions_per_level: int = 64
    seed: int = 0

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(np.asarray(self.center, dtype=float)))
        object.__setattr__(self, "center", c)
        if not c or not all(np.isfinite(c)):
            raise InputError("region center must be a non-empty finite point")
        if not (self.radius > 0 and np.isfinite(self.radius)):
            raise InputError("region radius must be positive")
        if self.radial_levels < 1 or self.directions_per_level < 1:
            raise InputError("radial_levels and directions_per_level must be >= 1")

    @classmethod
    def at_origin(cls, n: int, **kw) -> RegionSpec:
        return cls(center=(0.0,) * n, **kw)

    @property
    def dim(self) -> int:
        return len(self.center)

    def radii(self) -> np.ndarray:
        return self.radius * np.exp2(-np.arange(self.radial_levels, dtype=float))

    def to_dict(self) -> dict:
        return {"center": list(self.center), "radius": self.radius,
                "radial_levels": self.radial_levels,
                "directions_per_level": self.directions_per_level, "seed": self.seed}


def sample_region(region: RegionSpec) -> np.ndarray:
    """All sample points, level by level; shape (levels·directions, n)."""
    rng = make_rng(region.seed)
    p = np.asarray(region.center)
    blocks = []
    for r in region.radii():
        U = unit_vectors(rng, region.directions_per_level, region.dim)
        blocks.append(p + r * U)
    return np.vstack(blocks)
