"""Uniform grids, sampled complex fields and the unitary Fourier transform.

Conventions used throughout the package:

* Grids are centered: sample coordinates are ``x_j = (j - n/2) * dx`` with
  ``dx = extent / n``, so ``x = 0`` is always a sample and coordinates cover
  ``[-extent/2, extent/2)``.  Frequency grids are centered the same way with
  spacing ``dxi = 2*pi / extent``, hence ``dx * dxi * n = 2*pi`` exactly.
* The Fourier transform is unitary in angular frequency,

      F(h)(xi) = (2*pi)**(-m/2) * integral h(x) exp(-i x.xi) dx,

  discretized as a scaled, center-shifted DFT with factor
  ``dx**m * (2*pi)**(-m/2)``.  Parseval then holds exactly on the grid.
* Norms and inner products carry the grid measure (``dx**m`` in real space,
  ``dxi**m`` in frequency space), so ``norm(unitary_ft(h)) == norm(h)`` up to
  roundoff.
* Support membership is decided per sample center: half-open intervals
  ``[-d/2, d/2)`` per axis for stripe and box supports, closed Euclidean
  balls for ball supports.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

REAL_SPACE = "real-space"
FREQUENCY_SPACE = "frequency-space"

_STRIPE = "stripe"
_BOX = "box"
_BALL = "ball"
_SHAPES = (_STRIPE, _BOX, _BALL)


class DomainError(ValueError):
    """A field was passed to an operation expecting the other domain tag."""


class GridError(ValueError):
    """Invalid grid construction or grid mismatch between operands."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform centered discretization of ``[-extent/2, extent/2)**dim``.

    Parameters
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    n_per_axis : int
        Samples per axis; must be even and >= 2 (powers of two recommended).
    extent : float
        Physical side length in dimensionless units (support diameter = 1).
    """

    dim: int
    n_per_axis: int
    extent: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if self.n_per_axis < 2 or self.n_per_axis % 2 != 0:
            raise GridError(f"n_per_axis must be even and >= 2, got {self.n_per_axis}")
        if not self.extent > 0:
            raise GridError(f"extent must be positive, got {self.extent}")

    @property
    def dx(self) -> float:
        return self.extent / self.n_per_axis

    @property
    def dxi(self) -> float:
        return 2.0 * np.pi / self.extent

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.dim

    @property
    def size(self) -> int:
        return self.n_per_axis**self.dim

    @property
    def xi_max(self) -> float:
        """Largest frequency magnitude representable per axis (pi / dx)."""
        return np.pi / self.dx

    def axis_coords(self) -> np.ndarray:
        n = self.n_per_axis
        return (np.arange(n) - n // 2) * self.dx

    def axis_freqs(self) -> np.ndarray:
        n = self.n_per_axis
        return (np.arange(n) - n // 2) * self.dxi

    def coord_grids(self) -> tuple[np.ndarray, ...]:
        """Open (broadcastable) meshgrid of sample coordinates."""
        ax = self.axis_coords()
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True))

    def freq_grids(self) -> tuple[np.ndarray, ...]:
        ax = self.axis_freqs()
        return tuple(np.meshgrid(*([ax] * self.dim), indexing="ij", sparse=True))

    def radius_sq(self, domain_tag: str = REAL_SPACE) -> np.ndarray:
        """|x|^2 (or |xi|^2) sampled on the grid."""
        grids = self.coord_grids() if domain_tag == REAL_SPACE else self.freq_grids()
        out = np.zeros(self.shape)
        for g in grids:
            out = out + g**2
        return out

    def cell(self, domain_tag: str) -> float:
        """Quadrature cell volume of the grid in the given domain."""
        step = self.dx if domain_tag == REAL_SPACE else self.dxi
        return float(step**self.dim)


@dataclass(frozen=True)
class SampledField:
    """Complex-valued function sampled on a :class:`GridSpec`.

    Values are stored as a read-only complex128 array of shape
    ``grid.shape``; operations return new fields, so instances are safe to
    share between threads.
    """

    grid: GridSpec
    values: np.ndarray
    domain_tag: str = REAL_SPACE

    def __post_init__(self) -> None:
        if self.domain_tag not in (REAL_SPACE, FREQUENCY_SPACE):
            raise DomainError(f"unknown domain tag {self.domain_tag!r}")
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise GridError(
                f"values shape {vals.shape} does not match grid shape {self.grid.shape}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def with_values(self, values: np.ndarray, domain_tag: str | None = None) -> "SampledField":
        return SampledField(self.grid, values, domain_tag or self.domain_tag)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class SupportSpec:
    """Support domain: a stripe, box or ball of given diameter.

    The stripe constrains only the first axis; box and ball constrain all
    axes.  ``scaled(s)`` gives the geometrically scaled domain
    ``{s*x : x in Omega}``, used for frequency-domain images of the support.
    """

    shape: str = _STRIPE
    diameter: float = 1.0
    center: tuple[float, ...] = dataclass_field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.shape not in _SHAPES:
            raise ValueError(f"shape must be one of {_SHAPES}, got {self.shape!r}")
        if not self.diameter > 0:
            raise ValueError(f"diameter must be positive, got {self.diameter}")

    def scaled(self, factor: float) -> "SupportSpec":
        center = tuple(factor * c for c in self.center)
        return SupportSpec(self.shape, self.diameter * factor, center)

    def _centers(self, dim: int) -> np.ndarray:
        c = np.zeros(dim)
        if self.center:
            got = np.asarray(self.center, dtype=float)
            if got.size != dim:
                raise GridError(f"center has {got.size} entries for a dim-{dim} grid")
            c[:] = got
        return c

    def mask(self, grid: GridSpec, domain_tag: str = REAL_SPACE) -> np.ndarray:
        """Boolean indicator of the domain on the grid's sample centers."""
        grids = grid.coord_grids() if domain_tag == REAL_SPACE else grid.freq_grids()
        c = self._centers(grid.dim)
        half = 0.5 * self.diameter
        if self.shape == _BALL:
            r2 = np.zeros(grid.shape)
            for g, ci in zip(grids, c):
                r2 = r2 + (g - ci) ** 2
            return r2 <= half**2
        n_ax = 1 if self.shape == _STRIPE else grid.dim
        out = np.ones(grid.shape, dtype=bool)
        for g, ci in list(zip(grids, c))[:n_ax]:
            out = out & (g - ci >= -half) & (g - ci < half)
        return out

    def fits(self, grid: GridSpec) -> bool:
        c = self._centers(grid.dim)
        lo, hi = -0.5 * grid.extent, 0.5 * grid.extent
        return bool(np.all(c - 0.5 * self.diameter >= lo) and np.all(c + 0.5 * self.diameter <= hi))


def make_grid(dim: int, n: int, extent: float) -> GridSpec:
    """Build a centered uniform grid.

    Parameters
    ----------
    dim : int
        1 or 2.
    n : int
        Samples per axis, even, >= 2.
    extent : float
        Side length; the grid then has ``dx = extent/n`` and
        ``dxi = 2*pi/extent``.
    """
    return GridSpec(dim=dim, n_per_axis=n, extent=extent)


def _ft_values(values: np.ndarray, grid: GridSpec, forward: bool) -> np.ndarray:
    axes = tuple(range(grid.dim))
    scale = (grid.dx / np.sqrt(2.0 * np.pi)) ** grid.dim
    shifted = np.fft.ifftshift(values, axes=axes)
    if forward:
        out = np.fft.fftn(shifted, axes=axes)
        out = np.fft.fftshift(out, axes=axes)
        return out * scale
    out = np.fft.ifftn(shifted, axes=axes)
    out = np.fft.fftshift(out, axes=axes)
    return out / scale


def unitary_ft(field: SampledField) -> SampledField:
    """Unitary Fourier transform of a real-space field.

    Approximates ``F(h)(xi) = (2*pi)**(-m/2) int h(x) exp(-i x.xi) dx`` by a
    scaled centered DFT; the grid L2 norm is preserved exactly.

    Returns
    -------
    SampledField
        Frequency-space field on the same grid.
    """
    if field.domain_tag != REAL_SPACE:
        raise DomainError("unitary_ft expects a real-space field")
    vals = _ft_values(field.values, field.grid, forward=True)
    return SampledField(field.grid, vals, FREQUENCY_SPACE)


def unitary_ift(field: SampledField) -> SampledField:
    """Inverse of :func:`unitary_ft`; expects a frequency-space field."""
    if field.domain_tag != FREQUENCY_SPACE:
        raise DomainError("unitary_ift expects a frequency-space field")
    vals = _ft_values(field.values, field.grid, forward=False)
    return SampledField(field.grid, vals, REAL_SPACE)


def norm(field: SampledField) -> float:
    """Grid L2 norm, with the measure of the field's domain."""
    cell = field.grid.cell(field.domain_tag)
    return float(np.sqrt(np.sum(np.abs(field.values) ** 2) * cell))


def inner(a: SampledField, b: SampledField) -> complex:
    """Grid L2 inner product <a, b> (conjugate-linear in b)."""
    if a.grid != b.grid or a.domain_tag != b.domain_tag:
        raise GridError("inner product requires matching grid and domain")
    cell = a.grid.cell(a.domain_tag)
    return complex(np.sum(a.values * np.conj(b.values)) * cell)


def real_inner(a: SampledField, b: SampledField) -> float:
    """Real inner product Re <a, b>, the pairing for R-linear operators."""
    return inner(a, b).real


def apply_support(field: SampledField, support: SupportSpec, complement: bool = False) -> SampledField:
    """Multiply pointwise by the indicator of the support (or its complement).

    The operation is an orthogonal projection: idempotent, self-adjoint and
    norm non-increasing.
    """
    if field.domain_tag != REAL_SPACE:
        raise DomainError("apply_support expects a real-space field")
    if not support.fits(field.grid):
        raise GridError(
            f"support (diameter {support.diameter}) exceeds grid extent {field.grid.extent}"
        )
    m = support.mask(field.grid)
    if complement:
        m = ~m
    return field.with_values(np.where(m, field.values, 0.0))
