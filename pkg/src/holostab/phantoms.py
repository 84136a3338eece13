"""Synthetic phantom generation and exact-norm noise injection.

All randomness flows through explicit seeds; repeated calls with the same
spec are bitwise identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .fields import REAL_SPACE, GridSpec, SampledField, SupportSpec, norm

_KINDS = ("gauss_blobs", "disk", "rings")
_TARGETS = ("phi", "mu", "complex_h")


@dataclass(frozen=True)
class PhantomSpec:
    """Phantom family, its parameters and the generated quantity.

    params (by kind):
        gauss_blobs: count, amplitude, width, seed
        disk:        radius, amplitude
        rings:       count, amplitude, width
    target "complex_h" combines two independent draws as ``-i*phi - mu``.
    """

    kind: str = "gauss_blobs"
    target: str = "phi"
    support: SupportSpec = dataclass_field(default_factory=SupportSpec)
    params: dict = dataclass_field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.target not in _TARGETS:
            raise ValueError(f"target must be one of {_TARGETS}, got {self.target!r}")


def _real_phantom(spec: PhantomSpec, grid: GridSpec, seed_shift: int) -> np.ndarray:
    p = spec.params
    r2 = grid.radius_sq(REAL_SPACE)
    half = 0.5 * spec.support.diameter
    if spec.kind == "disk":
        radius = float(p.get("radius", 0.25))
        amp = float(p.get("amplitude", 1.0))
        vals = np.where(r2 <= radius**2, amp, 0.0)
    elif spec.kind == "rings":
        count = int(p.get("count", 3))
        if count < 1:
            raise ValueError("rings phantom needs count >= 1")
        amp = float(p.get("amplitude", 1.0))
        width = float(p.get("width", 0.05))
        r = np.sqrt(r2)
        vals = np.zeros(grid.shape)
        for k in range(1, count + 1):
            vals += amp * np.exp(-((r - k * half / (count + 1)) ** 2) / (2.0 * width**2))
    else:
        count = int(p.get("count", 4))
        if count < 1:
            raise ValueError("gauss_blobs phantom needs count >= 1")
        amp = float(p.get("amplitude", 1.0))
        width = float(p.get("width", 0.1))
        seed = int(p.get("seed", 0)) + seed_shift
        rng = np.random.default_rng(seed)
        grids = grid.coord_grids()
        vals = np.zeros(grid.shape)
        for _ in range(count):
            center = rng.uniform(-0.6 * half, 0.6 * half, size=grid.dim)
            w = width * rng.uniform(0.5, 1.5)
            a = amp * rng.uniform(0.5, 1.5)
            d2 = np.zeros(grid.shape)
            for g, c in zip(grids, center):
                d2 = d2 + (g - c) ** 2
            vals = vals + a * np.exp(-d2 / (2.0 * w**2))
    return np.where(spec.support.mask(grid), vals, 0.0)


def make_phantom(spec: PhantomSpec, grid: GridSpec) -> SampledField:
    """Generate a supported phantom field; deterministic for a fixed spec."""
    if not spec.support.fits(grid):
        raise ValueError("support does not fit inside the grid")
    if spec.target == "complex_h":
        phi = _real_phantom(spec, grid, seed_shift=0)
        mu = _real_phantom(spec, grid, seed_shift=1)
        vals = -1j * phi - 0.5 * mu
    else:
        vals = _real_phantom(spec, grid, seed_shift=0)
    field = SampledField(grid, vals, REAL_SPACE)
    if norm(field) == 0.0:
        raise ValueError("phantom parameters produced an identically zero field")
    return field


def add_noise(contrast: SampledField, level: float, seed: int) -> SampledField:
    """Add white Gaussian noise rescaled to exact L2 size ``level``.

    The perturbation norm equals ``level`` up to roundoff, matching a
    deterministic noise-level model rather than a stochastic variance one.
    """
    if level < 0:
        raise ValueError("noise level must be nonnegative")
    if level == 0.0:
        return contrast
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(contrast.grid.shape)
    e_norm = float(np.sqrt(np.sum(e**2) * contrast.grid.cell(contrast.domain_tag)))
    e = e * (level / e_norm)
    return contrast.with_values(contrast.values + e)
