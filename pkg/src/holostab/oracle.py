"""Dense reference matrices built from the explicit transform kernel.

These are deliberately FFT-free: every entry comes from the defining
exponential sum, so they provide an independent route against which the
matrix-free operators are validated.  Only practical for small grids.
"""

from __future__ import annotations

import numpy as np

from .fields import FREQUENCY_SPACE, GridSpec, SupportSpec
from .spectral import scaled_band_mask


def dense_dft_matrix(grid: GridSpec) -> np.ndarray:
    """Unitary transform matrix F[k, j] = dx/sqrt(2 pi) * exp(-i x_j xi_k).

    One-dimensional grids only; multi-dimensional transforms factor as
    tensor products of this matrix.
    """
    if grid.dim != 1:
        raise ValueError("dense transform matrix is built for 1-d grids")
    x = grid.axis_coords()
    xi = grid.axis_freqs()
    return (grid.dx / np.sqrt(2.0 * np.pi)) * np.exp(-1j * np.outer(xi, x))


def dense_inverse_dft_matrix(grid: GridSpec) -> np.ndarray:
    x = grid.axis_coords()
    xi = grid.axis_freqs()
    return (grid.dxi / np.sqrt(2.0 * np.pi)) * np.exp(1j * np.outer(x, xi))


def dense_gram_matrix(grid: GridSpec, f: float, support: SupportSpec) -> np.ndarray:
    """Restricted-Fourier Gram operator on the support samples."""
    fmat = dense_dft_matrix(grid)
    finv = dense_inverse_dft_matrix(grid)
    band = scaled_band_mask(grid, f, support).astype(float)
    idx = np.flatnonzero(support.mask(grid))
    g = finv @ (band[:, None] * fmat)
    return g[np.ix_(idx, idx)]


def dense_propagator_matrix(grid: GridSpec, f: float, inverse: bool = False) -> np.ndarray:
    fmat = dense_dft_matrix(grid)
    finv = dense_inverse_dft_matrix(grid)
    phase = grid.radius_sq(FREQUENCY_SPACE) / (2.0 * f)
    mult = np.exp((1j if inverse else -1j) * phase)
    return finv @ (mult[:, None] * fmat)


def dense_linear_forward_matrix(grid: GridSpec, f: float, support: SupportSpec) -> np.ndarray:
    """Real matrix of the supported forward map on (Re, Im) components.

    Output samples are real; the column block [0:ns] acts on the real part
    of the image, [ns:2ns] on the imaginary part.
    """
    d = dense_propagator_matrix(grid, f)
    idx = np.flatnonzero(support.mask(grid))
    re_block = 2.0 * d.real[:, idx]
    im_block = -2.0 * d.imag[:, idx]
    return np.hstack([re_block, im_block])


def dense_kernel_quadrature_matrix(coords: np.ndarray, c: float, weight: float) -> np.ndarray:
    """Sinc concentration kernel sampled at coordinates with uniform weights.

    ``coords`` live on the unit interval [-1/2, 1/2]; the kernel argument is
    doubled to match the [-1, 1] normalization, and ``weight`` is the
    associated quadrature step on the unit interval.
    """
    y = 2.0 * np.asarray(coords)
    d = y[:, None] - y[None, :]
    kern = np.where(d == 0.0, c / np.pi, np.sin(c * d) / (np.pi * np.where(d == 0.0, 1.0, d)))
    return kern * (2.0 * weight)
