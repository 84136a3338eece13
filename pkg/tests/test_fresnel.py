import numpy as np
import pytest

from holostab import SampledField, SupportSpec, make_grid, norm, propagate, propagate_chirp
from holostab.fresnel import AliasingError, FresnelNumber, ResamplingError

from oracles import chirp_propagation_quadrature


@pytest.fixture(scope="module")
def grid():
    return make_grid(1, 2048, 32.0)


@pytest.fixture(scope="module")
def support():
    return SupportSpec("stripe", 1.0)


def supported_field(grid, support, rng):
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    return SampledField(grid, np.where(support.mask(grid), vals, 0.0))


class TestFresnelNumber:
    def test_reduced_form(self):
        f = FresnelNumber(2.0 * np.pi * 7.0)
        assert f.fbar == pytest.approx(7.0, abs=1e-14)
        assert FresnelNumber.from_fbar(7.0).f == pytest.approx(f.f)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            FresnelNumber(0.0)
        with pytest.raises(ValueError):
            FresnelNumber(-1.0)


class TestPropagate:
    def test_constant_is_fixed_point(self, grid):
        one = SampledField(grid, np.ones(grid.shape))
        out = propagate(one, FresnelNumber(2.0 * np.pi * 10.0))
        assert np.max(np.abs(out.values - 1.0)) <= 1e-12

    def test_unitary_on_100_random_fields(self, grid, support):
        rng = np.random.default_rng(0)
        f = FresnelNumber(2.0 * np.pi * 10.0)
        for _ in range(100):
            h = supported_field(grid, support, rng)
            assert abs(norm(propagate(h, f)) - norm(h)) / norm(h) <= 1e-12

    def test_double_pass_equals_half_fresnel_number(self, grid, support):
        rng = np.random.default_rng(1)
        f = FresnelNumber(2.0 * np.pi * 10.0)
        for _ in range(10):
            h = supported_field(grid, support, rng)
            twice = propagate(propagate(h, f), f)
            half = propagate(h, FresnelNumber(f.f / 2.0))
            assert norm(twice.with_values(twice.values - half.values)) / norm(h) <= 1e-12

    def test_inverse_composition_is_identity(self, grid, support):
        rng = np.random.default_rng(2)
        f = FresnelNumber(2.0 * np.pi * 6.0)
        h = supported_field(grid, support, rng)
        back = propagate(propagate(h, f), f, inverse=True)
        assert norm(back.with_values(back.values - h.values)) / norm(h) <= 1e-12

    def test_reciprocal_semigroup(self, grid, support):
        # 1/f1 + 1/f2 = 1/f3: successive passes equal the direct pass
        rng = np.random.default_rng(3)
        f1, f2 = 2.0 * np.pi * 12.0, 2.0 * np.pi * 24.0
        f3 = 1.0 / (1.0 / f1 + 1.0 / f2)
        h = supported_field(grid, support, rng)
        two = propagate(propagate(h, FresnelNumber(f1)), FresnelNumber(f2))
        one = propagate(h, FresnelNumber(f3))
        assert norm(two.with_values(two.values - one.values)) / norm(h) <= 1e-12

    def test_infinite_fresnel_number_is_identity(self, grid, support):
        rng = np.random.default_rng(4)
        h = supported_field(grid, support, rng)
        out = propagate(h, float("inf"))
        assert np.array_equal(out.values, h.values)

    def test_sampling_guard(self):
        coarse = make_grid(1, 512, 4.0)  # xi_max*dxi is large
        h = SampledField(coarse, np.ones(coarse.shape))
        with pytest.raises(AliasingError):
            propagate(h, 1.0)


class TestChirpForm:
    def test_zero_field(self, grid):
        z = propagate_chirp(SampledField(grid, np.zeros(grid.shape)), 20.0 * np.pi)
        assert np.all(z.values == 0.0)

    def test_gaussian_matches_multiplier_form(self):
        grid = make_grid(1, 2048, 16.0)
        x = grid.axis_coords()
        h = SampledField(grid, np.where(np.abs(x) <= 0.5, np.exp(-(x**2) / 0.02), 0.0))
        f = 20.0 * np.pi
        ref = propagate(h, f)
        alt = propagate_chirp(h, f, pad_factor=4)
        central = np.abs(x) <= grid.extent / 4.0
        assert np.max(np.abs(alt.values[central] - ref.values[central])) <= 1e-6

    def test_matches_direct_quadrature_oracle(self):
        grid = make_grid(1, 4096, 16.0)
        x = grid.axis_coords()
        h = SampledField(grid, np.where(np.abs(x) <= 0.5, np.exp(-(x**2) / 0.02), 0.0))
        f = 20.0 * np.pi
        out = propagate_chirp(h, f, pad_factor=4)
        targets = x[np.abs(x) <= 2.0]
        expected = chirp_propagation_quadrature(h.values, x, f, targets)
        got = out.values[np.abs(x) <= 2.0]
        assert np.max(np.abs(got - expected)) <= 1e-6

    def test_modulus_ignores_unimodular_prefactors(self):
        grid = make_grid(1, 2048, 16.0)
        x = grid.axis_coords()
        h = SampledField(grid, np.where(np.abs(x) <= 0.5, np.exp(-(x**2) / 0.05), 0.0))
        f = 20.0 * np.pi
        out = propagate_chirp(h, f, pad_factor=4)
        targets = x[np.abs(x) <= 1.0]
        spectrum_only = np.abs(chirp_propagation_quadrature(h.values, x, f, targets))
        assert np.max(np.abs(np.abs(out.values[np.abs(x) <= 1.0]) - spectrum_only)) <= 1e-6

    def test_out_of_range_region_rejected(self):
        grid = make_grid(1, 512, 8.0)
        h = SampledField(grid, np.zeros(grid.shape))
        with pytest.raises(ResamplingError):
            propagate_chirp(h, 200.0, region_halfwidth=4.0)

    def test_2d_agrees_with_multiplier_form(self):
        grid = make_grid(2, 256, 8.0)
        xs, ys = grid.coord_grids()
        r2 = xs**2 + ys**2
        h = SampledField(grid, np.where(r2 <= 0.25, np.exp(-r2 / 0.02), 0.0))
        f = 16.0 * np.pi
        ref = propagate(h, f)
        alt = propagate_chirp(h, f, pad_factor=4)
        central = r2 <= (grid.extent / 4.0) ** 2
        assert np.max(np.abs(alt.values[central] - ref.values[central])) <= 1e-5
