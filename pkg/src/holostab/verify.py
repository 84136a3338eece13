"""Self-contained property suites aggregated by the ``verify`` command.

Each suite checks one family of operator identities or inequalities on
small grids and returns :class:`PropertyCheck` records; a build is healthy
iff every record passes.  The suites deliberately route through the public
API so that a regression anywhere in the operator chain is caught by the
corresponding identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bounds, ctf, fields, fresnel, phantoms, recon, spectral
from .fields import REAL_SPACE, SampledField, SupportSpec, make_grid


@dataclass
class PropertyCheck:
    module: str
    name: str
    passed: bool
    observed: float
    required: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return (
            f"[{status}] {self.module}: {self.name} "
            f"observed={self.observed:.3e} required={self.required:.3e}{extra}"
        )


def _rand_field(grid, rng, supported=None) -> SampledField:
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if supported is not None:
        vals = np.where(supported.mask(grid), vals, 0.0)
    return SampledField(grid, vals, REAL_SPACE)


def suite_fourier_unitarity(seed: int = 0) -> list[PropertyCheck]:
    grid = make_grid(1, 512, 8.0)
    rng = np.random.default_rng(seed)
    worst_iso, worst_rt = 0.0, 0.0
    for _ in range(100):
        h = _rand_field(grid, rng)
        spec = fields.unitary_ft(h)
        worst_iso = max(worst_iso, abs(fields.norm(spec) - fields.norm(h)) / fields.norm(h))
        back = fields.unitary_ift(spec)
        worst_rt = max(worst_rt, fields.norm(back.with_values(back.values - h.values)) / fields.norm(h))
    return [
        PropertyCheck("field-core", "transform isometry", worst_iso <= 1e-12, worst_iso, 1e-12),
        PropertyCheck("field-core", "transform round trip", worst_rt <= 1e-12, worst_rt, 1e-12),
    ]


def suite_support_projection(seed: int = 1) -> list[PropertyCheck]:
    grid = make_grid(1, 512, 8.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("stripe", 1.0)
    h = _rand_field(grid, rng)
    g = _rand_field(grid, rng)
    ph = fields.apply_support(h, sup)
    pph = fields.apply_support(ph, sup)
    idem = float(np.max(np.abs(pph.values - ph.values)))
    pg = fields.apply_support(g, sup)
    self_adj = abs(fields.inner(ph, g) - fields.inner(h, pg))
    duality = abs(grid.dx * grid.dxi * grid.n_per_axis - 2.0 * np.pi)
    return [
        PropertyCheck("field-core", "projection idempotent", idem == 0.0, idem, 0.0),
        PropertyCheck("field-core", "projection self-adjoint", self_adj <= 1e-12, self_adj, 1e-12),
        PropertyCheck("field-core", "grid duality dx*dxi*n=2pi", duality <= 1e-12, duality, 1e-12),
    ]


def suite_propagator(seed: int = 2) -> list[PropertyCheck]:
    grid = make_grid(1, 2048, 32.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("stripe", 1.0)
    f = fresnel.FresnelNumber(2.0 * np.pi * 10.0)
    worst_unit, worst_group, worst_semi = 0.0, 0.0, 0.0
    for _ in range(100):
        h = _rand_field(grid, rng, sup)
        n0 = fields.norm(h)
        d = fresnel.propagate(h, f)
        worst_unit = max(worst_unit, abs(fields.norm(d) - n0) / n0)
        back = fresnel.propagate(d, f, inverse=True)
        worst_group = max(worst_group, fields.norm(back.with_values(back.values - h.values)) / n0)
        dd = fresnel.propagate(d, f)
        half = fresnel.propagate(h, fresnel.FresnelNumber(f.f / 2.0))
        worst_semi = max(worst_semi, fields.norm(dd.with_values(dd.values - half.values)) / n0)
    one = fresnel.propagate(SampledField(grid, np.ones(grid.shape)), f)
    const_dev = float(np.max(np.abs(one.values - 1.0)))
    return [
        PropertyCheck("fresnel", "unitarity", worst_unit <= 1e-12, worst_unit, 1e-12),
        PropertyCheck("fresnel", "inverse composition", worst_group <= 1e-12, worst_group, 1e-12),
        PropertyCheck("fresnel", "two passes equal half f", worst_semi <= 1e-12, worst_semi, 1e-12),
        PropertyCheck("fresnel", "constant preserved", const_dev <= 1e-12, const_dev, 1e-12),
    ]


def suite_chirp_equivalence(seed: int = 3) -> list[PropertyCheck]:
    grid = make_grid(1, 2048, 16.0)
    x = grid.axis_coords()
    bump = np.exp(-(x**2) / 0.02) * (np.abs(x) <= 0.5)
    h = SampledField(grid, bump)
    f = fresnel.FresnelNumber(20.0 * np.pi)
    ref = fresnel.propagate(h, f)
    alt = fresnel.propagate_chirp(h, f, pad_factor=4)
    central = np.abs(x) <= grid.extent / 4.0
    dev = float(np.max(np.abs(alt.values[central] - ref.values[central])))
    return [PropertyCheck("fresnel", "chirp/multiplier equivalence", dev <= 1e-6, dev, 1e-6)]


def suite_linear_operator(seed: int = 4) -> list[PropertyCheck]:
    grid = make_grid(1, 1024, 16.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("stripe", 1.0)
    f = fresnel.FresnelNumber(2.0 * np.pi * 8.0)
    worst_norm = 0.0
    for _ in range(100):
        h = _rand_field(grid, rng, sup)
        worst_norm = max(worst_norm, fields.norm(ctf.linear_forward(h, f)) / fields.norm(h))
    h = _rand_field(grid, rng, sup)
    th = ctf.linear_forward(h, f)
    tih = ctf.linear_forward(h.with_values(1j * h.values), f)
    not_clinear = fields.norm(tih.with_values(tih.values - 1j * th.values)) / fields.norm(th)
    g = _rand_field(grid, rng)
    g_real = g.with_values(g.values.real)
    back = fresnel.propagate(g_real, f, inverse=True)
    null = ctf.linear_forward(back.with_values(1j * back.values), f)
    null_ratio = fields.norm(null) / fields.norm(g_real)
    return [
        PropertyCheck("ctf-forward", "operator norm <= 2", worst_norm <= 2.0 + 1e-12, worst_norm, 2.0),
        PropertyCheck("ctf-forward", "not C-linear", not_clinear > 1e-3, not_clinear, 1e-3,
                      "must differ from i*T(h)"),
        PropertyCheck("ctf-forward", "null space witness", null_ratio <= 1e-10, null_ratio, 1e-10),
    ]


def suite_ctf_equivalence(seed: int = 5) -> list[PropertyCheck]:
    grid = make_grid(1, 1024, 16.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("stripe", 1.0)
    f = fresnel.FresnelNumber(2.0 * np.pi * 8.0)
    spec = ctf.CtfSpec(f, 0.35)
    worst_ctf, worst_hom, worst_adj = 0.0, 0.0, 0.0
    for _ in range(50):
        phi = _rand_field(grid, rng, sup).with_values(
            _rand_field(grid, rng, sup).values.real
        )
        mu = _rand_field(grid, rng, sup).with_values(
            _rand_field(grid, rng, sup).values.real
        )
        h = phi.with_values(-1j * phi.values - mu.values)
        a = ctf.linear_forward(h, f)
        b = ctf.ctf_forward(phi, mu, f)
        worst_ctf = max(worst_ctf, fields.norm(a.with_values(a.values - b.values)) / fields.norm(a))
        s = ctf.homogeneous_forward(phi, spec)
        t = ctf.linear_forward(
            phi.with_values(-1j * np.exp(-1j * spec.alpha) * phi.values), f
        )
        worst_hom = max(worst_hom, fields.norm(s.with_values(s.values - t.values)) / max(fields.norm(s), 1e-300))
        g = _rand_field(grid, rng).with_values(np.real(_rand_field(grid, rng).values))
        lhs = fields.inner(ctf.linear_forward(h, f), g).real
        rhs = fields.real_inner(h, ctf.linear_adjoint(g, f))
        worst_adj = max(
            worst_adj, abs(lhs - rhs) / (fields.norm(h) * fields.norm(g))
        )
    return [
        PropertyCheck("ctf-forward", "real-part vs CTF form", worst_ctf <= 1e-12, worst_ctf, 1e-12),
        PropertyCheck("ctf-forward", "homogeneous vs modulated image", worst_hom <= 1e-12, worst_hom, 1e-12),
        PropertyCheck("ctf-forward", "adjoint identity", worst_adj <= 1e-10, worst_adj, 1e-10),
    ]


def suite_gram_spectrum(seed: int = 6) -> list[PropertyCheck]:
    grid = make_grid(1, 2048, 32.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("stripe", 1.0)
    f = 2.0 * np.pi * 4.0
    h = _rand_field(grid, rng, sup)
    g = _rand_field(grid, rng, sup)
    sa = abs(
        fields.inner(spectral.gram_apply(h, f, sup), g)
        - fields.inner(h, spectral.gram_apply(g, f, sup))
    ) / (fields.norm(h) * fields.norm(g))
    rep = spectral.stability_constant(f, sup, grid, method="dense")
    lam = 1.0 - rep.value**2
    op = spectral._GramOnSupport(grid, f, sup)
    start = rng.standard_normal(op.dim) + 1j * rng.standard_normal(op.dim)
    _, _, _, _, history = spectral.power_iteration(op.apply, start, 1e-9, 300)
    drops = max(
        (history[i] - history[i + 1] for i in range(len(history) - 1)), default=0.0
    )
    return [
        PropertyCheck("spectral", "gram self-adjoint", sa <= 1e-10, sa, 1e-10),
        PropertyCheck("spectral", "gram spectrum below one", lam < 1.0, lam, 1.0),
        PropertyCheck("spectral", "gram spectrum positive", lam > 0.0, lam, 0.0),
        PropertyCheck("spectral", "power iteration monotone", drops <= 1e-14, drops, 1e-14),
    ]


def suite_dense_oracle(seed: int = 7) -> list[PropertyCheck]:
    from .oracle import dense_gram_matrix, dense_linear_forward_matrix

    grid = make_grid(1, 128, 4.0)
    sup = SupportSpec("stripe", 1.0)
    f = 60.0
    op = spectral._GramOnSupport(grid, f, sup)
    free = op.dense()
    oracle = dense_gram_matrix(grid, f, sup)
    dev_g = float(
        np.linalg.norm(free - oracle, 2) / np.linalg.norm(oracle, 2)
    )
    free_t = _matrix_free_linear_forward_matrix(grid, f, sup)
    oracle_t = dense_linear_forward_matrix(grid, f, sup)
    dev_t = float(np.linalg.norm(free_t - oracle_t, 2) / np.linalg.norm(oracle_t, 2))
    return [
        PropertyCheck("spectral", "gram matches dense transform matrix", dev_g <= 1e-10, dev_g, 1e-10),
        PropertyCheck("spectral", "forward matches dense transform matrix", dev_t <= 1e-10, dev_t, 1e-10),
    ]


def _matrix_free_linear_forward_matrix(grid, f, support) -> np.ndarray:
    """Columns of the supported forward map via the public operator."""
    idx = np.flatnonzero(support.mask(grid).reshape(-1))
    cols = np.empty((grid.size, 2 * idx.size))
    for k, j in enumerate(idx):
        for part in (0, 1):
            e = np.zeros(grid.size, dtype=np.complex128)
            e[j] = 1.0 if part == 0 else 1j
            h = SampledField(grid, e.reshape(grid.shape), REAL_SPACE)
            cols[:, k + part * idx.size] = ctf.linear_forward(h, f).values.real.reshape(-1)
    return cols


def suite_prolate(seed: int = 8) -> list[PropertyCheck]:
    system = spectral.prolate_eigs(5.0, 6, grid_n=512)
    lam = system.eigenvalues
    decreasing = float(np.max(np.diff(lam)))
    gram = np.array(
        [
            [np.sum(system.weights * system.vectors[i] * system.vectors[j]) for j in range(6)]
            for i in range(6)
        ]
    )
    ortho = float(np.max(np.abs(gram - np.eye(6))))
    nodes_ok = all(system.node_count(j) == j for j in range(6))
    return [
        PropertyCheck("spectral", "prolate eigenvalues decreasing", decreasing < 0.0, decreasing, 0.0),
        PropertyCheck("spectral", "prolate eigenvectors orthonormal", ortho <= 1e-8, ortho, 1e-8),
        PropertyCheck("spectral", "prolate node counts", nodes_ok, float(nodes_ok), 1.0),
    ]


def suite_uncertainty(seed: int = 9) -> list[PropertyCheck]:
    grid = make_grid(1, 512, 8.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("ball", 1.0)
    worst = -np.inf
    for _ in range(100):
        g = _rand_field(grid, rng, sup)
        lo = rng.uniform(0.0, 0.5 * grid.xi_max)
        hi = lo + rng.uniform(0.1, 0.5) * grid.xi_max
        r = np.sqrt(grid.radius_sq(fields.FREQUENCY_SPACE))
        region = (r >= lo) & (r <= hi)
        lhs, rhs = bounds.uncertainty_check(g, 0.5, region)
        worst = max(worst, (lhs - rhs) / rhs)
    return [
        PropertyCheck("bounds", "uncertainty inequality (2% slack)", worst <= 0.02, worst, 0.02)
    ]


def suite_lower_bounds(seed: int = 10) -> list[PropertyCheck]:
    grid = make_grid(1, 512, 8.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("ball", 1.0)
    f = fresnel.FresnelNumber(2.0 * np.pi * 10.0)
    spec = ctf.CtfSpec(f, 0.0)
    rep = bounds.empirical_ip2_check(sup, spec, 50, grid, seed=seed)
    worst_opt = -np.inf
    for _ in range(50):
        phi = phantoms.make_phantom(
            phantoms.PhantomSpec("gauss_blobs", "phi", sup, {"seed": int(rng.integers(1 << 30))}),
            grid,
        )
        lhs, rhs = bounds.optimality_check(phi, f.f)
        worst_opt = max(worst_opt, lhs - rhs)
    spec2 = ctf.TwoDistanceSpec(f, fresnel.FresnelNumber(2.0 * np.pi * 30.0))
    worst_pair = -np.inf
    for _ in range(50):
        phi = _rand_field(grid, rng, sup).with_values(np.real(_rand_field(grid, rng, sup).values))
        mu = _rand_field(grid, rng, sup).with_values(np.real(_rand_field(grid, rng, sup).values))
        r1, r2 = ctf.two_distance_forward(phi, mu, spec2)
        lhs = np.sqrt(fields.norm(r1) ** 2 + fields.norm(r2) ** 2)
        s0 = ctf.homogeneous_forward(
            phi.with_values(phi.values + 1j * mu.values),
            ctf.CtfSpec(fresnel.FresnelNumber(abs(spec2.f_minus)), 0.0),
        )
        rhs = fields.norm(s0) / np.sqrt(2.0)
        worst_pair = max(worst_pair, rhs - lhs)
    return [
        PropertyCheck(
            "bounds", "empirical IP2 lower bound", rep.violations == 0, float(rep.violations), 0.0,
            f"min ratio {rep.min_ratio:.3e} vs bound {rep.bound:.3e}",
        ),
        PropertyCheck("bounds", "optimality ceiling", worst_opt <= 1e-12, worst_opt, 1e-12),
        PropertyCheck("bounds", "two-distance vs difference CTF", worst_pair <= 1e-10, worst_pair, 1e-10),
    ]


def suite_twin_image(seed: int = 11) -> list[PropertyCheck]:
    grid = make_grid(1, 2048, 32.0)
    rng = np.random.default_rng(seed)
    sup = SupportSpec("stripe", 1.0)
    f = fresnel.FresnelNumber(2.0 * np.pi * 8.0)
    worst_elim, worst_norm = 0.0, -np.inf
    for _ in range(100):
        h = _rand_field(grid, rng, sup)
        data = ctf.linear_forward(h, f)
        cleaned = recon.twin_free_data(data, f, sup)
        dd = fresnel.propagate(fresnel.propagate(h, f), f)
        ref = fields.apply_support(dd, sup, complement=True)
        worst_elim = max(
            worst_elim,
            fields.norm(cleaned.with_values(cleaned.values - ref.values)) / fields.norm(h),
        )
        worst_norm = max(worst_norm, fields.norm(ref) - fields.norm(data))
    return [
        PropertyCheck("recon", "twin image eliminated", worst_elim <= 1e-12, worst_elim, 1e-12),
        PropertyCheck("recon", "restriction norm-decreasing", worst_norm <= 1e-12, worst_norm, 1e-12),
    ]


def suite_two_distance_roundtrip(seed: int = 12) -> list[PropertyCheck]:
    grid = make_grid(1, 512, 8.0)
    sup = SupportSpec("ball", 1.0)
    spec2 = ctf.TwoDistanceSpec(
        fresnel.FresnelNumber(2.0 * np.pi * 10.0), fresnel.FresnelNumber(2.0 * np.pi * 30.0)
    )
    phi = phantoms.make_phantom(phantoms.PhantomSpec("gauss_blobs", "phi", sup, {"seed": 1}), grid)
    mu = phantoms.make_phantom(phantoms.PhantomSpec("gauss_blobs", "mu", sup, {"seed": 2}), grid)
    c1, c2 = ctf.two_distance_forward(phi, mu, spec2)
    config = recon.ReconConfig(spec=spec2, reg=1e-10)
    phir, mur = recon.invert_two_distance(c1, c2, config)
    err = recon.masked_spectral_error(phi, phir, spec2)
    return [
        PropertyCheck("recon", "two-distance round trip (masked)", err <= 1e-4, err, 1e-4)
    ]


def suite_phantom_io(tmpdir, seed: int = 13) -> list[PropertyCheck]:
    from . import fieldio

    grid = make_grid(1, 256, 4.0)
    sup = SupportSpec("ball", 1.0)
    spec = phantoms.PhantomSpec("gauss_blobs", "phi", sup, {"seed": 5})
    a = phantoms.make_phantom(spec, grid)
    b = phantoms.make_phantom(spec, grid)
    det = float(np.max(np.abs(a.values - b.values)))
    noisy = phantoms.add_noise(a, 0.125, seed=9)
    lvl = abs(fields.norm(noisy.with_values(noisy.values - a.values)) - 0.125)
    path = tmpdir / "roundtrip.fld"
    fieldio.write_field(a, path)
    back = fieldio.read_field(path)
    bitexact = float(np.max(np.abs(back.values - a.values)))
    return [
        PropertyCheck("phantoms-io", "seed determinism", det == 0.0, det, 0.0),
        PropertyCheck("phantoms-io", "noise level exact", lvl <= 1e-12, lvl, 1e-12),
        PropertyCheck("phantoms-io", "field round trip bit-exact", bitexact == 0.0, bitexact, 0.0),
    ]


def run_all(tmpdir) -> list[PropertyCheck]:
    """Run every suite; ``tmpdir`` is used for I/O round-trip checks."""
    checks: list[PropertyCheck] = []
    checks += suite_fourier_unitarity()
    checks += suite_support_projection()
    checks += suite_propagator()
    checks += suite_chirp_equivalence()
    checks += suite_linear_operator()
    checks += suite_ctf_equivalence()
    checks += suite_gram_spectrum()
    checks += suite_dense_oracle()
    checks += suite_prolate()
    checks += suite_uncertainty()
    checks += suite_lower_bounds()
    checks += suite_twin_image()
    checks += suite_two_distance_roundtrip()
    checks += suite_phantom_io(tmpdir)
    return checks


SUITE_COUNT = 14
