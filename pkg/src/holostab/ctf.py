"""Linearized forward operators of propagation-based phase contrast.

For a complex object image ``h = -i*phi - mu`` (``phi`` real phase shifts,
``mu`` real absorption) the linearized hologram contrast is

    linear_forward(h) = 2 * Re(D(h)),

with ``D`` the unitary Fresnel propagator.  In Fourier space this is the
contrast-transfer-function (CTF) form

    F(linear_forward(-i*phi - mu)) = -2 sin(k) F(phi) - 2 cos(k) F(mu),
    k(xi) = |xi|^2 / (2 f).

Sign convention: with the propagation multiplier ``exp(-i|xi|^2/(2f))`` the
sine term carries a minus sign; the homogeneous-object operator defined by
``homogeneous_forward(phi) = linear_forward(-i * exp(-i*alpha) * phi)`` is
then multiplication by ``-2 * sin(k + alpha)`` exactly.  Only the modulus of
the CTF enters any stability statement, and all inverses in
:mod:`holostab.recon` use the same convention, so the overall sign is
consistent throughout the package.  ``ctf_multiplier`` returns the positive
convention value ``sin(k + alpha)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    FREQUENCY_SPACE,
    REAL_SPACE,
    DomainError,
    GridError,
    GridSpec,
    SampledField,
    unitary_ft,
    unitary_ift,
)
from .fresnel import FresnelNumber, _as_f, check_sampling, propagation_multiplier


@dataclass(frozen=True)
class CtfSpec:
    """Fresnel number plus homogeneity angle alpha in [0, pi/2].

    ``alpha = 0`` is a pure phase object; ``alpha = pi/2`` a pure absorber.
    The CTF ``sin(|xi|^2/(2f) + alpha)`` vanishes on spheres of radius
    ``xi_j = sqrt(2 f (j*pi - alpha))`` for integer ``j`` with
    ``j*pi > alpha`` (plus ``xi = 0`` when ``alpha = 0``).
    """

    f: FresnelNumber
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= np.pi / 2.0:
            raise ValueError(f"alpha must lie in [0, pi/2], got {self.alpha}")

    def phase(self, grid: GridSpec) -> np.ndarray:
        """k(xi) = |xi|^2/(2f) sampled on the frequency grid."""
        return grid.radius_sq(FREQUENCY_SPACE) / (2.0 * self.f.f)

    def ctf_values(self, grid: GridSpec) -> np.ndarray:
        return np.sin(self.phase(grid) + self.alpha)

    def zero_radii(self, xi_max: float) -> np.ndarray:
        """Radii of the CTF zero manifolds up to xi_max, ascending.

        Includes the central zero at 0 when ``alpha == 0``.
        """
        f = self.f.f
        radii = []
        j = 0
        while True:
            arg = j * np.pi - self.alpha
            if arg >= 0.0:
                r = np.sqrt(2.0 * f * arg)
                if r > xi_max:
                    break
                radii.append(r)
            j += 1
        return np.asarray(radii)


@dataclass(frozen=True)
class TwoDistanceSpec:
    """Pair of distinct Fresnel numbers and the derived difference number.

    ``1/f_minus = 1/f1 - 1/f2``; only the magnitude of the difference enters
    the stability analysis, but the signed value is kept for the inversion
    algebra.
    """

    f1: FresnelNumber
    f2: FresnelNumber

    def __post_init__(self) -> None:
        if self.f1.f == self.f2.f:
            raise ValueError("two-distance spec requires f1 != f2")

    @property
    def f_minus(self) -> float:
        return 1.0 / (1.0 / self.f1.f - 1.0 / self.f2.f)

    def phases(self, grid: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(k1, k2, k_minus) on the frequency grid, k_j = |xi|^2/(2 f_j)."""
        r2 = grid.radius_sq(FREQUENCY_SPACE)
        return (
            r2 / (2.0 * self.f1.f),
            r2 / (2.0 * self.f2.f),
            r2 / (2.0 * self.f_minus),
        )


def ctf_multiplier(spec: CtfSpec, grid: GridSpec) -> SampledField:
    """Sample ``sin(|xi|^2/(2f) + alpha)`` on the frequency grid."""
    return SampledField(grid, spec.ctf_values(grid), FREQUENCY_SPACE)


def linear_forward(h: SampledField, f: "FresnelNumber | float") -> SampledField:
    """Linearized contrast ``2*Re(D(h))`` of a complex image.

    R-linear but not C-linear; returns a real-valued real-space field.
    """
    if h.domain_tag != REAL_SPACE:
        raise DomainError("linear_forward expects a real-space field")
    grid = h.grid
    check_sampling(grid, f)
    mult = propagation_multiplier(grid, f)
    spec = unitary_ft(h)
    prop = unitary_ift(spec.with_values(spec.values * mult))
    return h.with_values(2.0 * prop.values.real)


def linear_adjoint(g: SampledField, f: "FresnelNumber | float") -> SampledField:
    """Adjoint of :func:`linear_forward` for the real pairing Re<.,.>.

    For real-valued data ``g`` the adjoint is twice the back-propagated
    field, ``2 * D^{-1}(g)``.
    """
    if g.domain_tag != REAL_SPACE:
        raise DomainError("linear_adjoint expects a real-space field")
    grid = g.grid
    check_sampling(grid, f)
    mult = propagation_multiplier(grid, f, inverse=True)
    spec = unitary_ft(g.with_values(g.values.real))
    back = unitary_ift(spec.with_values(spec.values * mult))
    return g.with_values(2.0 * back.values)


def ctf_forward(phi: SampledField, mu: SampledField, f: "FresnelNumber | float") -> SampledField:
    """CTF-form contrast of real (phi, mu): avoids the propagator entirely.

    Multiplies the spectra by ``-2 sin(k)`` and ``-2 cos(k)``; identical to
    ``linear_forward(-i*phi - mu)`` up to roundoff.
    """
    if phi.grid != mu.grid:
        raise GridError("phi and mu must share a grid")
    grid = phi.grid
    k = grid.radius_sq(FREQUENCY_SPACE) / (2.0 * _as_f(f))
    p = unitary_ft(phi.with_values(phi.values.real))
    m = unitary_ft(mu.with_values(mu.values.real))
    contrast = -2.0 * (np.sin(k) * p.values + np.cos(k) * m.values)
    out = unitary_ift(p.with_values(contrast))
    return out.with_values(out.values.real)


def homogeneous_forward(phi: SampledField, spec: CtfSpec) -> SampledField:
    """Forward operator for a homogeneous object, ``h = -i e^{-i alpha} phi``.

    Fourier multiplier ``-2 sin(|xi|^2/(2f) + alpha)`` applied to a real
    field; coincides with ``linear_forward(-i*exp(-i*alpha)*phi, f)``.
    """
    if phi.domain_tag != REAL_SPACE:
        raise DomainError("homogeneous_forward expects a real-space field")
    grid = phi.grid
    mult = -2.0 * spec.ctf_values(grid)
    p = unitary_ft(phi.with_values(phi.values.real))
    out = unitary_ift(p.with_values(mult * p.values))
    return out.with_values(out.values.real)


def two_distance_forward(
    phi: SampledField, mu: SampledField, spec: TwoDistanceSpec
) -> tuple[SampledField, SampledField]:
    """Contrast pair at two Fresnel numbers for independent real (phi, mu).

    Row ``j`` equals ``linear_forward(-i*phi - mu, f_j)``.
    """
    if phi.grid != mu.grid:
        raise GridError("phi and mu must share a grid")
    grid = phi.grid
    k1, k2, _ = spec.phases(grid)
    p = unitary_ft(phi.with_values(phi.values.real))
    m = unitary_ft(mu.with_values(mu.values.real))
    rows = []
    for k in (k1, k2):
        contrast = -2.0 * (np.sin(k) * p.values + np.cos(k) * m.values)
        out = unitary_ift(p.with_values(contrast))
        rows.append(out.with_values(out.values.real))
    return rows[0], rows[1]


def nonlinear_intensity(h: SampledField, f: "FresnelNumber | float") -> SampledField:
    """Exact hologram intensity ``|D(exp(h))|^2`` for synthetic data.

    Nonnegative by construction; never inverted by this package.
    """
    if h.domain_tag != REAL_SPACE:
        raise DomainError("nonlinear_intensity expects a real-space field")
    grid = h.grid
    check_sampling(grid, f)
    wave = h.with_values(np.exp(h.values))
    mult = propagation_multiplier(grid, f)
    spec = unitary_ft(wave)
    prop = unitary_ift(spec.with_values(spec.values * mult))
    return h.with_values(np.abs(prop.values) ** 2)
