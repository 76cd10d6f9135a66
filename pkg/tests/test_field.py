import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itersplit.errors import NonFiniteStateError, UnstableStepError
from itersplit.field import (
    Grid,
    NormKind,
    State,
    apply_multiplier,
    build_grid,
    eval_on_grid,
    forward_transform,
    load_state,
    modal_l2_norm,
    norm,
    save_state,
)


class TestGrid:
    def test_unit_interval_eight_points(self):
        g = build_grid(1, 8, (0.0, 1.0))
        assert g.spacing == (1 / 8,)
        np.testing.assert_allclose(g.wavenumbers[0], 2 * np.pi * np.array([0, 1, 2, 3, -4, -3, -2, -1]), rtol=0, atol=1e-12)

    def test_kdv_domain_spacing(self):
        g = build_grid(1, 1024, (-20.0, 20.0))
        assert g.spacing[0] == pytest.approx(40 / 1024, rel=1e-15)
        assert g.axes[0][0] == -20.0
        assert g.axes[0][-1] == pytest.approx(20 - 40 / 1024)

    def test_full_scale_brusselator_dof(self):
        g = build_grid(2, 1024, (0.0, 1.0))
        assert 2 * g.size == 2**21
        assert len(g.wavenumbers[1]) == 1024

    def test_per_dimension_extent(self):
        g = build_grid(2, 16, [(0.0, 1.0), (-1.0, 3.0)])
        assert g.lengths == (1.0, 4.0)
        assert g.cell_volume == pytest.approx(1 / 16 * 4 / 16)
        assert g.coordinates[0].shape == (16, 16)

    @pytest.mark.parametrize("n", [0, 4, 12, 100, 7])
    def test_rejects_bad_point_counts(self, n):
        with pytest.raises(ValueError):
            build_grid(1, n, (0.0, 1.0))

    @pytest.mark.parametrize("extent", [(1.0, 1.0), (2.0, 1.0), (0.0, np.inf), (np.nan, 1.0)])
    def test_rejects_degenerate_extent(self, extent):
        with pytest.raises(ValueError):
            build_grid(1, 8, extent)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            build_grid(3, 8, (0.0, 1.0))

    def test_refined_doubles_points(self):
        g = build_grid(2, 16, (0.0, 1.0)).refined(2)
        assert g.points == (32, 32)
        assert g.extent == ((0.0, 1.0), (0.0, 1.0))


class TestState:
    def test_constant_one(self):
        g = build_grid(2, 8, (0.0, 1.0))
        s = eval_on_grid(lambda x, y: np.ones_like(x), g)
        assert s.data.dtype == np.complex128
        assert np.all(s.data == 1 + 0j)

    def test_soliton_profile_peak(self):
        g = build_grid(1, 1024, (-20.0, 20.0))
        s = eval_on_grid(lambda x: 12 / np.cosh(x) ** 2, g)
        assert np.max(s.data.real) == 12.0
        assert np.all(s.data.imag == 0)

    def test_multi_component_list(self):
        g = build_grid(2, 8, (0.0, 1.0))
        s = eval_on_grid([lambda x, y: x, lambda x, y: 27 * x * (1 - x) ** 1.5 * (1 + np.sin(10 * np.pi * x))], g, 2)
        assert s.n_components == 2
        np.testing.assert_array_equal(s.data[0].real, g.coordinates[0])

    def test_non_finite_rejected(self):
        g = build_grid(1, 8, (0.0, 1.0))
        with pytest.raises(NonFiniteStateError):
            eval_on_grid(lambda x: np.full_like(x, np.inf), g)
        with pytest.raises(NonFiniteStateError):
            State(g, np.full(8, np.nan))

    def test_immutable(self):
        g = build_grid(1, 8, (0.0, 1.0))
        s = State(g, np.arange(8))
        with pytest.raises(ValueError):
            s.data[0] = 5
        with pytest.raises(AttributeError):
            s.grid = g

    def test_arithmetic_and_real_projection(self):
        g = build_grid(1, 8, (0.0, 1.0))
        a = State(g, np.arange(8) + 1j)
        b = State(g, np.ones(8))
        np.testing.assert_array_equal((a - b).data[0], np.arange(8) - 1 + 1j)
        np.testing.assert_array_equal((2 * a).data, (a + a).data)
        np.testing.assert_array_equal(a.real().data[0], np.arange(8))

    def test_mismatched_grids(self):
        a = State(build_grid(1, 8, (0.0, 1.0)), np.ones(8))
        b = State(build_grid(1, 8, (0.0, 2.0)), np.ones(8))
        with pytest.raises(ValueError):
            a - b

    def test_save_load_round_trip(self, tmp_path):
        g = build_grid(2, 8, [(0.0, 1.0), (-2.0, 2.0)])
        s = State(g, np.random.default_rng(3).normal(size=(2, 8, 8)) + 1j)
        save_state(s, tmp_path / "s.npz")
        t = load_state(tmp_path / "s.npz")
        assert t.grid == g
        np.testing.assert_array_equal(t.data, s.data)


class TestNorm:
    def test_zero_state(self):
        s = State(build_grid(1, 8, (0.0, 1.0)), np.zeros(8))
        assert norm(s, NormKind.INF) == 0.0
        assert norm(s, NormKind.L2) == 0.0

    def test_unit_interval_constant(self):
        s = State(build_grid(1, 64, (0.0, 1.0)), np.ones(64))
        assert norm(s, "l2") == pytest.approx(1.0, rel=1e-15)

    def test_single_mode_inf(self):
        g = build_grid(1, 32, (0.0, 2 * np.pi))
        s = eval_on_grid(lambda x: np.exp(3j * x), g)
        assert norm(s, "inf") == pytest.approx(1.0, rel=1e-15)

    def test_over_all_components(self):
        g = build_grid(1, 8, (0.0, 1.0))
        s = State(g, np.stack([np.ones(8), 3 * np.ones(8)]))
        assert norm(s, "inf") == 3.0
        assert norm(s, "l2") == pytest.approx(np.sqrt(10))

    def test_parse(self):
        assert NormKind.parse("INF") is NormKind.INF
        with pytest.raises(ValueError):
            NormKind.parse("l1")


def _random_state(grid, seed, comps=1):
    rng = np.random.default_rng(seed)
    shape = (comps,) + grid.shape
    return State(grid, rng.normal(size=shape) + 1j * rng.normal(size=shape))


class TestMultiplier:
    grid = build_grid(1, 64, (0.0, 2 * np.pi))

    def test_identity_round_trip(self):
        s = _random_state(self.grid, 0)
        out = apply_multiplier(s, np.ones(64))
        assert norm(out - s) / norm(s) <= 1e-13

    def test_single_mode_eigenfunction(self):
        s = eval_on_grid(lambda x: np.exp(5j * x), self.grid)
        out = apply_multiplier(s, lambda k: 1 + k**2)
        np.testing.assert_allclose(out.data, 26 * s.data, rtol=0, atol=26 * 1e-13)

    def test_heat_semigroup(self):
        s = _random_state(self.grid, 1)
        tau, alpha = 0.3, 1e-2
        half = lambda k: np.exp(-tau / 2 * alpha * k**2)
        once = apply_multiplier(s, lambda k: np.exp(-tau * alpha * k**2))
        twice = apply_multiplier(apply_multiplier(s, half), half)
        assert norm(once - twice) / norm(once) <= 1e-13

    def test_two_dimensional(self):
        g = build_grid(2, 16, (0.0, 2 * np.pi))
        s = eval_on_grid(lambda x, y: np.exp(1j * (2 * x - 3 * y)), g)
        out = apply_multiplier(s, lambda kx, ky: -(kx**2 + ky**2))
        np.testing.assert_allclose(out.data, -13 * s.data, atol=1e-11)

    def test_overflowing_symbol_reported(self):
        s = _random_state(self.grid, 2)
        with pytest.raises(UnstableStepError):
            apply_multiplier(s, lambda k: np.exp(1e3 * k**2))

    def test_linear(self):
        u, v = _random_state(self.grid, 3), _random_state(self.grid, 4)
        sym = np.exp(1j * self.grid.wavenumbers[0] ** 3 * 1e-3)
        lhs = apply_multiplier(2 * u + (1 - 3j) * v, sym)
        rhs = 2 * apply_multiplier(u, sym) + (1 - 3j) * apply_multiplier(v, sym)
        assert norm(lhs - rhs) <= 1e-13 * norm(lhs)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.sampled_from([8, 16, 64]), dim=st.sampled_from([1, 2]))
def test_parseval(seed, n, dim):
    g = build_grid(dim, n, (0.0, 3.0))
    s = _random_state(g, seed, comps=2)
    assert modal_l2_norm(s) == pytest.approx(norm(s, "l2"), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(s1=st.floats(0, 5), s2=st.floats(0, 5), seed=st.integers(0, 1000))
def test_exponential_multiplier_semigroup(s1, s2, seed):
    g = build_grid(1, 32, (-4.0, 4.0))
    u = _random_state(g, seed)
    k = g.wavenumbers[0]
    sym = lambda s: np.exp(1j * s * k**3 * 1e-3 - s * 1e-2 * k**2)
    a = apply_multiplier(apply_multiplier(u, sym(s1)), sym(s2))
    b = apply_multiplier(u, sym(s1 + s2))
    assert norm(a - b) <= 1e-12 * max(norm(b), 1e-300)


def test_forward_transform_shape():
    g = build_grid(2, 8, (0.0, 1.0))
    assert forward_transform(_random_state(g, 0, comps=2)).shape == (2, 8, 8)


def test_grid_is_hashable_value_object():
    assert Grid((8,), ((0.0, 1.0),)) == build_grid(1, 8, (0.0, 1.0))
