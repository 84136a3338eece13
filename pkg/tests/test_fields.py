import numpy as np
import pytest

from holostab import (
    FREQUENCY_SPACE,
    REAL_SPACE,
    SampledField,
    SupportSpec,
    apply_support,
    inner,
    make_grid,
    norm,
    unitary_ft,
    unitary_ift,
)
from holostab.fields import DomainError, GridError

from oracles import dft_quadrature, idft_quadrature


def rand_field(grid, rng, real=False):
    vals = rng.standard_normal(grid.shape)
    if not real:
        vals = vals + 1j * rng.standard_normal(grid.shape)
    return SampledField(grid, vals)


class TestMakeGrid:
    def test_basic_spacings(self):
        g = make_grid(1, 8, 1.0)
        assert g.dx == 0.125
        assert g.dxi == pytest.approx(2.0 * np.pi, rel=0, abs=0)

    def test_full_scale_grid_support_window(self):
        g = make_grid(1, 262144, 512.0)
        x = g.axis_coords()
        inside = (x >= -0.5) & (x < 0.5)
        assert inside.sum() == 512
        # the window is the central block of samples
        idx = np.flatnonzero(inside)
        assert idx[0] == 262144 // 2 - 256 and idx[-1] == 262144 // 2 + 255

    def test_2d_spacings(self):
        g = make_grid(2, 256, 4.0)
        assert g.dx == 0.015625
        assert g.dxi == pytest.approx(np.pi / 2.0)

    @pytest.mark.parametrize(
        "dim,n,extent",
        [(1, 7, 1.0), (1, 0, 1.0), (1, 8, 0.0), (1, 8, -2.0), (3, 8, 1.0)],
    )
    def test_rejects_invalid(self, dim, n, extent):
        with pytest.raises(GridError):
            make_grid(dim, n, extent)

    def test_duality_exact(self):
        for n, extent in [(8, 1.0), (64, 3.0), (4096, 512.0)]:
            g = make_grid(1, n, extent)
            assert g.dx * g.dxi * g.n_per_axis == pytest.approx(2.0 * np.pi, abs=1e-12)


class TestUnitaryTransform:
    def test_zero_maps_to_zero(self):
        g = make_grid(1, 64, 1.0)
        z = unitary_ft(SampledField(g, np.zeros(64)))
        assert np.all(z.values == 0.0)
        assert z.domain_tag == FREQUENCY_SPACE

    def test_unitarity_100_random_fields(self):
        g = make_grid(1, 256, 4.0)
        rng = np.random.default_rng(0)
        for _ in range(100):
            h = rand_field(g, rng)
            assert abs(norm(unitary_ft(h)) - norm(h)) / norm(h) <= 1e-12

    def test_delta_transforms_to_constant(self):
        g = make_grid(1, 64, 1.0)
        vals = np.zeros(64, dtype=complex)
        vals[32] = 1.0 / g.dx  # unit-weight discrete delta at x = 0
        spec = unitary_ft(SampledField(g, vals))
        assert np.allclose(spec.values, 1.0 / np.sqrt(2.0 * np.pi), atol=1e-12)

    def test_matches_dense_quadrature_oracle(self):
        g = make_grid(1, 64, 2.0)
        rng = np.random.default_rng(1)
        h = rand_field(g, rng)
        expected = dft_quadrature(h.values, g.axis_coords(), g.axis_freqs())
        got = unitary_ft(h).values
        assert np.max(np.abs(got - expected)) <= 1e-12 * np.max(np.abs(expected))

    def test_round_trip(self):
        g = make_grid(1, 256, 4.0)
        rng = np.random.default_rng(2)
        for _ in range(10):
            h = rand_field(g, rng)
            back = unitary_ift(unitary_ft(h))
            assert norm(back.with_values(back.values - h.values)) / norm(h) <= 1e-12

    def test_single_bin_spike_is_complex_exponential(self):
        g = make_grid(1, 64, 2.0)
        vals = np.zeros(64, dtype=complex)
        k0 = 40
        vals[k0] = 1.0
        spike = SampledField(g, vals, FREQUENCY_SPACE)
        got = unitary_ift(spike).values
        expected = idft_quadrature(vals, g.axis_freqs(), g.axis_coords())
        assert np.max(np.abs(got - expected)) <= 1e-13
        # single spike -> unimodular complex exponential shape
        mag = np.abs(got)
        assert np.max(mag) - np.min(mag) <= 1e-13 * np.max(mag)

    def test_domain_tag_mismatch(self):
        g = make_grid(1, 8, 1.0)
        f = SampledField(g, np.zeros(8))
        with pytest.raises(DomainError):
            unitary_ift(f)
        with pytest.raises(DomainError):
            unitary_ft(unitary_ft(f.with_values(np.ones(8))))

    def test_2d_unitarity_and_round_trip(self):
        g = make_grid(2, 64, 4.0)
        rng = np.random.default_rng(3)
        h = rand_field(g, rng)
        spec = unitary_ft(h)
        assert abs(norm(spec) - norm(h)) / norm(h) <= 1e-12
        back = unitary_ift(spec)
        assert norm(back.with_values(back.values - h.values)) / norm(h) <= 1e-12


class TestSupport:
    def test_idempotent_on_supported_field(self):
        g = make_grid(1, 256, 4.0)
        sup = SupportSpec("stripe", 1.0)
        rng = np.random.default_rng(4)
        h = apply_support(rand_field(g, rng), sup)
        again = apply_support(h, sup)
        assert np.array_equal(again.values, h.values)

    def test_norm_non_increasing(self):
        g = make_grid(1, 256, 4.0)
        sup = SupportSpec("stripe", 1.0)
        rng = np.random.default_rng(5)
        for _ in range(20):
            h = rand_field(g, rng)
            assert norm(apply_support(h, sup)) <= norm(h) + 1e-15

    def test_stripe_zeroes_three_quarters_of_bins(self):
        g = make_grid(1, 256, 4.0)
        sup = SupportSpec("stripe", 1.0)
        kept = sup.mask(g).sum()
        assert kept == 64  # one quarter of 256

    def test_projection_self_adjoint_elementwise(self):
        g = make_grid(1, 128, 4.0)
        sup = SupportSpec("box", 1.0)
        rng = np.random.default_rng(6)
        h, w = rand_field(g, rng), rand_field(g, rng)
        lhs = inner(apply_support(h, sup), w)
        rhs = inner(h, apply_support(w, sup))
        assert abs(lhs - rhs) <= 1e-12 * norm(h) * norm(w)

    def test_complement_partitions_field(self):
        g = make_grid(2, 64, 4.0)
        sup = SupportSpec("ball", 1.0)
        rng = np.random.default_rng(7)
        h = rand_field(g, rng)
        a = apply_support(h, sup)
        b = apply_support(h, sup, complement=True)
        assert np.array_equal(a.values + b.values, h.values)

    def test_support_larger_than_grid_rejected(self):
        g = make_grid(1, 64, 1.0)
        with pytest.raises(GridError):
            apply_support(SampledField(g, np.zeros(64)), SupportSpec("stripe", 2.0))

    def test_values_are_read_only(self):
        g = make_grid(1, 8, 1.0)
        f = SampledField(g, np.zeros(8))
        with pytest.raises(ValueError):
            f.values[0] = 1.0
