"""Numerical spectra of the supported forward operators.

Three interlocking computations:

* ``gram_apply`` / ``stability_constant``: the restricted-Fourier Gram
  operator ``G = P F^{-1} 1_B F P`` with ``P`` the support projection and
  ``B`` the support scaled by ``f/2`` in frequency space.  Its largest
  eigenvalue ``lam`` sits in (0, 1) and the single-hologram stability
  constant is ``sqrt(1 - lam)``, evaluated as a complement-band norm of the
  maximizer so no ``1 - lam`` cancellation occurs.
* ``prolate_eigs``: eigenpairs of the sinc-kernel concentration operator
  ``(K v)(x) = int_{-1}^{1} sin(c(x-y))/(pi (x-y)) v(y) dy`` by a
  Gauss-Legendre Nystrom discretization.  These are the classical bandwidth
  concentration eigenfunctions; the Gram operator above reproduces them with
  ``c = f/8`` for a unit stripe support.
* ``smallest_singular_value``: the smallest singular value of the linearized
  forward map restricted to supported images, with its minimizing mode.

Solver choices: ``method="dense"`` assembles the operator on the support
degrees of freedom only (a few hundred at the standard grids) and
diagonalizes exactly; ``"power"`` is plain power iteration with Rayleigh
stopping (monotone for these positive operators); ``"lanczos"`` wraps
ARPACK.  ``"auto"`` picks dense whenever the support is small enough,
falling back to Lanczos.

Exponentially small quantities are trustworthy in double precision only up
to roughly ``fbar = f/(2*pi) <= 12``; above that a precision note is placed
in the report and the analytic asymptotics should be preferred.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .fields import (
    FREQUENCY_SPACE,
    REAL_SPACE,
    GridError,
    GridSpec,
    SampledField,
    SupportSpec,
    norm,
    unitary_ft,
)
from .fresnel import FresnelNumber, _as_f, check_sampling, propagation_multiplier

PRECISION_FBAR_LIMIT = 12.0
_DENSE_LIMIT = 768


class SamplingError(ValueError):
    """Frequency band or chirp not representable on the grid."""


class ConvergenceError(RuntimeError):
    """Iterative eigensolver failed to reach the requested tolerance."""


# ---------------------------------------------------------------------------
# matrix-free kernels on raw arrays (support-restricted vectors)
# ---------------------------------------------------------------------------


def _ft_raw(vals: np.ndarray, grid: GridSpec, forward: bool) -> np.ndarray:
    axes = tuple(range(grid.dim))
    scale = (grid.dx / np.sqrt(2.0 * np.pi)) ** grid.dim
    shifted = np.fft.ifftshift(vals, axes=axes)
    if forward:
        return np.fft.fftshift(np.fft.fftn(shifted, axes=axes), axes=axes) * scale
    return np.fft.fftshift(np.fft.ifftn(shifted, axes=axes), axes=axes) / scale


def scaled_band_mask(grid: GridSpec, f: "FresnelNumber | float", support: SupportSpec) -> np.ndarray:
    """Indicator of the support scaled by f/2, on the frequency grid."""
    fval = _as_f(f)
    band = support.scaled(0.5 * fval)
    if 0.5 * band.diameter > grid.xi_max:
        raise SamplingError(
            f"scaled support radius {0.5 * band.diameter:.3g} exceeds the "
            f"frequency range {grid.xi_max:.3g}"
        )
    return band.mask(grid, FREQUENCY_SPACE)


def gram_apply(
    h: SampledField, f: "FresnelNumber | float", support: SupportSpec
) -> SampledField:
    """Apply ``P F^{-1} 1_B F P`` to a real-space field.

    Self-adjoint, positive, with spectrum inside (0, 1); the input is
    projected onto the support first, so the operator is well defined on
    arbitrary fields.
    """
    grid = h.grid
    band = scaled_band_mask(grid, f, support)
    mask = support.mask(grid)
    vals = np.where(mask, h.values, 0.0)
    spec = _ft_raw(vals, grid, forward=True)
    out = _ft_raw(np.where(band, spec, 0.0), grid, forward=False)
    return h.with_values(np.where(mask, out, 0.0))


@dataclass
class EigenReport:
    """Converged spectral quantity with solver diagnostics."""

    quantity: str
    value: float
    iterations: int
    residual: float
    f: float
    grid: GridSpec | None = None
    mode: SampledField | None = None
    method: str = "dense"
    note: str = ""

    def to_json(self) -> str:
        rec = {
            "quantity": self.quantity,
            "value": self.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "f": self.f,
            "fbar": self.f / (2.0 * np.pi),
            "method": self.method,
            "note": self.note,
        }
        if self.grid is not None:
            rec["grid"] = {
                "dim": self.grid.dim,
                "n_per_axis": self.grid.n_per_axis,
                "extent": self.grid.extent,
            }
        return json.dumps(rec, sort_keys=True)


@dataclass
class ProlateEigenSystem:
    """Leading eigenpairs of the sinc-kernel concentration operator.

    ``nodes``/``weights`` are the Gauss-Legendre rule on [-1, 1] used by the
    Nystrom discretization; ``vectors[j]`` holds the j-th eigenfunction at
    the nodes, normalized to unit quadrature L2 norm on [-1, 1].
    ``sample(j, x)`` evaluates the eigenfunction scaled to the unit interval
    [-1/2, 1/2] (unit L2 norm there) at arbitrary points via the Nystrom
    extension.
    """

    c: float
    eigenvalues: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    vectors: np.ndarray = dataclass_field(repr=False)

    def sample(self, j: int, x: np.ndarray) -> np.ndarray:
        y = 2.0 * np.asarray(x, dtype=float)
        d = y[..., None] - self.nodes
        kern = np.where(
            d == 0.0, self.c / np.pi, np.sin(self.c * d) / (np.pi * np.where(d == 0.0, 1.0, d))
        )
        vals = kern @ (self.weights * self.vectors[j]) / self.eigenvalues[j]
        return np.sqrt(2.0) * vals

    def node_count(self, j: int) -> int:
        """Number of sign changes of the j-th eigenfunction on (-1, 1)."""
        v = self.vectors[j]
        s = np.sign(v[np.abs(v) > 1e-9 * np.max(np.abs(v))])
        return int(np.sum(s[1:] != s[:-1]))


def prolate_eigs(c: float, n_modes: int, grid_n: int = 1024) -> ProlateEigenSystem:
    """Leading concentration eigenpairs by Gauss-Legendre Nystrom.

    Parameters
    ----------
    c : float
        Bandwidth parameter of the kernel ``sin(c(x-y))/(pi(x-y))``.
    n_modes : int
        Number of leading eigenpairs to keep.
    grid_n : int
        Quadrature size; the kernel is entire, so the rule converges
        spectrally and the default is far in the converged regime for
        ``c <= 100``.

    Raises
    ------
    ValueError
        If the requested trailing eigenvalue is at or below the double
        precision noise floor, or the computed spectrum is not strictly
        decreasing in (0, 1).
    """
    if not c > 0:
        raise ValueError("bandwidth parameter c must be positive")
    if n_modes < 1:
        raise ValueError("need at least one mode")
    if grid_n < max(4 * n_modes, 64):
        raise ValueError("quadrature grid too small for the requested modes")
    y, w = np.polynomial.legendre.leggauss(grid_n)
    d = y[:, None] - y[None, :]
    kern = np.where(d == 0.0, c / np.pi, np.sin(c * d) / (np.pi * np.where(d == 0.0, 1.0, d)))
    sw = np.sqrt(w)
    sym = sw[:, None] * kern * sw[None, :]
    sym = 0.5 * (sym + sym.T)
    vals, vecs = np.linalg.eigh(sym)
    vals = vals[::-1]
    vecs = vecs[:, ::-1]
    lam = vals[:n_modes].copy()
    floor = 64 * np.finfo(float).eps
    if lam[-1] <= floor:
        raise ValueError(
            f"eigenvalue {n_modes - 1} is {lam[-1]:.3e}, below the numerical floor"
        )
    if np.any(np.diff(lam) >= 0) or lam[0] >= 1.0 or lam[-1] <= 0.0:
        raise ValueError("computed eigenvalues are not strictly decreasing in (0, 1)")
    vectors = (vecs[:, :n_modes] / sw[:, None]).T.copy()
    return ProlateEigenSystem(c=c, eigenvalues=lam, nodes=y, weights=w, vectors=vectors)


def modal_constants(indices: list[tuple[int, ...]], eigensystem: ProlateEigenSystem) -> list[float]:
    """Per-mode stability constants ``sqrt(1 - prod_l lambda_{j_l})``.

    Strictly increasing under componentwise increase of the multi-index.
    """
    lam = eigensystem.eigenvalues
    out = []
    for idx in indices:
        idx_t = tuple(int(i) for i in (idx if isinstance(idx, (tuple, list)) else (idx,)))
        if any(i < 0 or i >= lam.size for i in idx_t):
            raise IndexError(f"multi-index {idx_t} beyond computed spectrum of size {lam.size}")
        prod = float(np.prod([lam[i] for i in idx_t]))
        out.append(float(np.sqrt(max(1.0 - prod, 0.0))))
    return out


# ---------------------------------------------------------------------------
# support-restricted linear algebra
# ---------------------------------------------------------------------------


def _support_indices(grid: GridSpec, support: SupportSpec) -> np.ndarray:
    mask = support.mask(grid)
    idx = np.flatnonzero(mask.reshape(-1))
    if idx.size == 0:
        raise GridError("support contains no grid samples")
    return idx


def _embed(vec: np.ndarray, idx: np.ndarray, grid: GridSpec) -> np.ndarray:
    full = np.zeros(grid.size, dtype=np.complex128)
    full[idx] = vec
    return full.reshape(grid.shape)


class _GramOnSupport:
    """C-linear Gram operator acting on support-restricted vectors."""

    def __init__(self, grid: GridSpec, f: float, support: SupportSpec):
        self.grid = grid
        self.idx = _support_indices(grid, support)
        self.band = scaled_band_mask(grid, f, support)

    @property
    def dim(self) -> int:
        return self.idx.size

    def apply(self, vec: np.ndarray) -> np.ndarray:
        full = _embed(vec, self.idx, self.grid)
        spec = _ft_raw(full, self.grid, forward=True)
        out = _ft_raw(np.where(self.band, spec, 0.0), self.grid, forward=False)
        return out.reshape(-1)[self.idx]

    def apply_batch(self, mat: np.ndarray) -> np.ndarray:
        """Apply to the columns of ``mat`` using batched FFTs.

        The unitary scale factors of the forward and inverse transform
        cancel, so raw fftn/ifftn pairs are used directly.
        """
        ncol = mat.shape[1]
        full = np.zeros((ncol, self.grid.size), dtype=np.complex128)
        full[:, self.idx] = mat.T
        full = full.reshape((ncol,) + self.grid.shape)
        axes = tuple(range(1, self.grid.dim + 1))
        spec = np.fft.fftshift(
            np.fft.fftn(np.fft.ifftshift(full, axes=axes), axes=axes), axes=axes
        )
        spec *= self.band
        out = np.fft.fftshift(
            np.fft.ifftn(np.fft.ifftshift(spec, axes=axes), axes=axes), axes=axes
        )
        return out.reshape(ncol, self.grid.size)[:, self.idx].T

    def dense(self) -> np.ndarray:
        g = np.empty((self.dim, self.dim), dtype=np.complex128)
        # bounded working set: ~16M complex samples per FFT batch
        chunk = max(1, (1 << 24) // self.grid.size)
        for lo in range(0, self.dim, chunk):
            hi = min(lo + chunk, self.dim)
            eye = np.zeros((self.dim, hi - lo), dtype=np.complex128)
            eye[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
            g[:, lo:hi] = self.apply_batch(eye)
        return 0.5 * (g + g.conj().T)


class _ForwardNormalOnSupport:
    """R-linear normal operator of the supported forward map.

    Vectors are real arrays of length ``2*ns`` holding (Re, Im) parts of the
    supported image; the operator is ``P T^* T P`` with
    ``T h = D h + D^{-1} conj(h)``.
    """

    def __init__(self, grid: GridSpec, f: float, support: SupportSpec):
        self.grid = grid
        self.f = f
        self.idx = _support_indices(grid, support)
        # T^*T h = 2 P (h + D^{-2} conj(h)); D^{-2} is back-propagation at f/2
        check_sampling(grid, 0.5 * f)
        self.mult_back2 = propagation_multiplier(grid, 0.5 * f, inverse=True)

    @property
    def dim(self) -> int:
        return 2 * self.idx.size

    def _normal_complex(self, vec: np.ndarray) -> np.ndarray:
        full = _embed(vec, self.idx, self.grid)
        spec = _ft_raw(np.conj(full), self.grid, forward=True)
        back = _ft_raw(self.mult_back2 * spec, self.grid, forward=False)
        return 2.0 * (vec + back.reshape(-1)[self.idx])

    def apply(self, x: np.ndarray) -> np.ndarray:
        ns = self.idx.size
        vec = x[:ns] + 1j * x[ns:]
        out = self._normal_complex(vec)
        return np.concatenate([out.real, out.imag])

    def dense(self) -> np.ndarray:
        n = self.dim
        mat = np.empty((n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            mat[:, k] = self.apply(e)
        return 0.5 * (mat + mat.T)


def power_iteration(
    apply_fn,
    start: np.ndarray,
    tol: float,
    max_iter: int,
    inner=np.vdot,
) -> tuple[float, np.ndarray, int, float, list[float]]:
    """Plain power iteration with Rayleigh-quotient convergence control.

    Returns (rayleigh, unit vector, iterations, residual, rayleigh history).
    Residual is ``||A v - r v||`` for the unit iterate ``v``; for
    self-adjoint positive operators the Rayleigh history is nondecreasing.
    """
    v = start / np.sqrt(np.real(inner(start, start)))
    history: list[float] = []
    residual = np.inf
    rayleigh = 0.0
    for it in range(1, max_iter + 1):
        av = apply_fn(v)
        rayleigh = float(np.real(inner(av, v)))
        residual = float(np.sqrt(max(np.real(inner(av, av)) - rayleigh**2, 0.0)))
        history.append(rayleigh)
        if residual <= tol:
            return rayleigh, v, it, residual, history
        nrm = np.sqrt(np.real(inner(av, av)))
        if nrm == 0.0:
            return 0.0, v, it, 0.0, history
        v = av / nrm
    return rayleigh, v, max_iter, residual, history


def _precision_note(fval: float) -> str:
    fbar = fval / (2.0 * np.pi)
    if fbar > PRECISION_FBAR_LIMIT:
        return (
            f"fbar={fbar:.3g} exceeds the double-precision window "
            f"(fbar <= {PRECISION_FBAR_LIMIT:g}); prefer the analytic asymptotics"
        )
    return ""


def stability_constant(
    f: "FresnelNumber | float",
    support: SupportSpec,
    grid: GridSpec,
    tol: float = 1e-12,
    method: str = "auto",
    max_iter: int = 200000,
    seed: int = 0,
) -> EigenReport:
    """Single-hologram stability constant on the given grid.

    Computes the largest eigenvalue of the restricted-Fourier Gram operator
    and evaluates the constant as the complement-band norm of the maximizer,

        C = || F(h*) restricted outside the scaled support band ||,

    a forward-stable sum of small squares (no ``1 - lam`` cancellation).
    """
    fval = _as_f(f)
    note = _precision_note(fval)
    if note:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    op = _GramOnSupport(grid, fval, support)
    if method == "auto":
        method = "dense" if op.dim <= _DENSE_LIMIT else "lanczos"

    if method == "dense":
        mat = op.dense()
        vals, vecs = np.linalg.eigh(mat)
        vec = vecs[:, -1]
        iters = op.dim
        resid = float(np.linalg.norm(op.apply(vec) - vals[-1] * vec))
    elif method == "power":
        rng = np.random.default_rng(seed)
        start = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
        _, vec, iters, resid, _ = power_iteration(op.apply, start, tol, max_iter)
        if resid > tol:
            raise ConvergenceError(
                f"power iteration residual {resid:.3e} > tol {tol:.3e} after {iters} iterations"
            )
    elif method == "lanczos":
        lin = LinearOperator(
            (op.dim, op.dim), matvec=op.apply, dtype=np.complex128
        )
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
        vals, vecs = eigsh(lin, k=1, which="LA", tol=tol, v0=v0, maxiter=max_iter)
        vec = vecs[:, 0]
        iters = -1
        resid = float(np.linalg.norm(op.apply(vec) - vals[0] * vec))
    else:
        raise ValueError(f"unknown method {method!r}")

    full = _embed(vec, op.idx, grid)
    mode = SampledField(grid, full, REAL_SPACE)
    mode = mode.with_values(mode.values / norm(mode))
    spec = unitary_ft(mode)
    outside = ~op.band
    cell = grid.cell(FREQUENCY_SPACE)
    c_val = float(np.sqrt(np.sum(np.abs(spec.values[outside]) ** 2) * cell))
    return EigenReport(
        quantity="c_ip1",
        value=c_val,
        iterations=iters,
        residual=resid,
        f=fval,
        grid=grid,
        mode=mode,
        method=method,
        note=note,
    )


def gram_lambda_max(
    f: "FresnelNumber | float",
    support: SupportSpec,
    grid: GridSpec,
    tol: float = 1e-12,
    method: str = "auto",
) -> EigenReport:
    """Largest Gram eigenvalue (the band concentration of the worst mode)."""
    rep = stability_constant(f, support, grid, tol=tol, method=method)
    lam = 1.0 - rep.value**2
    return EigenReport(
        quantity="lambda_max_gram",
        value=lam,
        iterations=rep.iterations,
        residual=rep.residual,
        f=rep.f,
        grid=grid,
        mode=rep.mode,
        method=rep.method,
        note=rep.note,
    )


def smallest_singular_value(
    f: "FresnelNumber | float",
    support: SupportSpec,
    grid: GridSpec,
    tol: float = 1e-10,
    method: str = "auto",
    max_iter: int = 500000,
    shift: float = 4.0,
    seed: int = 0,
) -> EigenReport:
    """Smallest singular value of the supported linearized forward map.

    ``method="power"`` runs shifted power iteration on ``shift*I - T^*T``
    (the operator norm of the forward map is at most 2, so ``shift=4``
    guarantees positivity); ``"dense"`` diagonalizes the normal operator on
    the support degrees of freedom; ``"lanczos"`` asks ARPACK for the top of
    the shifted operator.
    """
    fval = _as_f(f)
    note = _precision_note(fval)
    if note:
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    op = _ForwardNormalOnSupport(grid, fval, support)
    if method == "auto":
        method = "dense" if op.dim <= 2 * _DENSE_LIMIT else "lanczos"

    if method == "dense":
        mat = op.dense()
        vals, vecs = np.linalg.eigh(mat)
        sig_sq = max(float(vals[0]), 0.0)
        vec = vecs[:, 0]
        iters = op.dim
        resid = float(np.linalg.norm(op.apply(vec) - vals[0] * vec))
    else:
        def shifted(x: np.ndarray) -> np.ndarray:
            return shift * x - op.apply(x)

        if method == "power":
            rng = np.random.default_rng(seed)
            start = rng.standard_normal(op.dim)
            nu, vec, iters, resid, _ = power_iteration(
                shifted, start, tol, max_iter, inner=np.dot
            )
            if resid > tol:
                raise ConvergenceError(
                    f"shifted power iteration residual {resid:.3e} > tol {tol:.3e}"
                )
            sig_sq = max(shift - nu, 0.0)
        elif method == "lanczos":
            lin = LinearOperator((op.dim, op.dim), matvec=shifted, dtype=float)
            rng = np.random.default_rng(seed)
            vals, vecs = eigsh(
                lin, k=1, which="LA", tol=tol, v0=rng.standard_normal(op.dim), maxiter=max_iter
            )
            vec = vecs[:, 0]
            sig_sq = max(shift - float(vals[0]), 0.0)
            iters = -1
            resid = float(np.linalg.norm(shifted(vec) - vals[0] * vec))
        else:
            raise ValueError(f"unknown method {method!r}")

    ns = op.idx.size
    mode_vec = vec[:ns] + 1j * vec[ns:]
    full = _embed(mode_vec, op.idx, grid)
    mode = SampledField(grid, full, REAL_SPACE)
    nrm = norm(mode)
    if nrm > 0:
        mode = mode.with_values(mode.values / nrm)
    return EigenReport(
        quantity="sigma_min_T",
        value=float(np.sqrt(sig_sq)),
        iterations=iters,
        residual=resid,
        f=fval,
        grid=grid,
        mode=mode,
        method=method,
        note=note,
    )


@dataclass
class ModeComparison:
    """Least stable mode with its overlap against the concentration mode."""

    mode: SampledField
    chirp_corrected: SampledField
    correlation: float
    sigma_min: float
    report: EigenReport


def least_stable_mode(
    f: "FresnelNumber | float",
    support: SupportSpec,
    grid: GridSpec,
    tol: float = 1e-10,
    method: str = "auto",
) -> ModeComparison:
    """Minimizing mode of the forward map and its chirp-corrected overlap.

    Multiplying the mode by ``exp(i f |x|^2 / 4)`` removes the quadratic
    chirp; the result is compared against the zeroth concentration
    eigenfunction at ``c = f/8`` (tensorized over axes for box supports).
    """
    fval = _as_f(f)
    rep = smallest_singular_value(f, support, grid, tol=tol, method=method)
    mode = rep.mode
    r2 = grid.radius_sq(REAL_SPACE)
    corrected = mode.with_values(np.exp(1j * fval * r2 / 4.0) * mode.values)

    system = prolate_eigs(fval / 8.0, 1, grid_n=max(512, int(8 * fval / 8.0)))
    ax = grid.axis_coords()
    inside = np.abs(ax) <= 0.5
    psi_ax = np.zeros_like(ax)
    psi_ax[inside] = system.sample(0, ax[inside])
    if grid.dim == 1:
        psi = psi_ax
    else:
        psi = np.outer(psi_ax, psi_ax)
    cell = grid.cell(REAL_SPACE)
    num = abs(np.sum(corrected.values * np.conj(psi)) * cell)
    den = norm(corrected) * float(np.sqrt(np.sum(psi**2) * cell))
    corr = float(num / den) if den > 0 else 0.0
    return ModeComparison(
        mode=mode,
        chirp_corrected=corrected,
        correlation=corr,
        sigma_min=rep.value,
        report=rep,
    )
