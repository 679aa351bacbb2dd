import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iga_sipg.exceptions import ConfigurationError, DomainError
from iga_sipg.splines import (
    SplineSpace1D,
    TensorSplineSpace,
    basis_derivs,
    boundary_trace_indices,
    collocation_matrix,
    eval_basis,
    eval_spline,
    eval_tensor_basis,
    interpolate,
    tensor_basis_derivs,
)
from oracles import all_basis, bspline

degrees = st.integers(1, 6)
intervals = st.integers(1, 9)
params = st.floats(0.0, 1.0, allow_nan=False)


class TestSpace:
    def test_knots_and_dimension(self):
        s = SplineSpace1D(3, 4)
        assert s.dim == 7
        assert s.h == 0.25
        np.testing.assert_allclose(s.knots, [0, 0, 0, 0, .25, .5, .75, 1, 1, 1, 1])

    def test_greville_are_knot_averages(self):
        s = SplineSpace1D(2, 2)
        np.testing.assert_allclose(s.greville, [0, 0.25, 0.75, 1])

    @pytest.mark.parametrize("p,n", [(0, 2), (2, 0)])
    def test_invalid(self, p, n):
        with pytest.raises((ConfigurationError, DomainError, ValueError)):
            SplineSpace1D(p, n)

    def test_refine_halves_h(self):
        s = SplineSpace1D(2, 3).refine(2)
        assert s.num_intervals == 12 and s.degree == 2

    def test_span_convention_half_open(self):
        s = SplineSpace1D(2, 4)
        # (ih, (i+1)h]: the knot 0.5 belongs to the span left of it
        assert s.find_span(np.array([0.5]))[0] == 1
        assert s.find_span(np.array([0.0]))[0] == 0
        assert s.find_span(np.array([1.0]))[0] == 3


class TestEvalBasis:
    def test_hat_peak(self):
        first, vals = eval_basis(SplineSpace1D(1, 2), 0.5)
        full = np.zeros(3)
        full[first:first + 2] = vals
        np.testing.assert_allclose(full, [0.0, 1.0, 0.0], atol=1e-15)

    def test_quadratic_midpoint(self):
        first, vals = eval_basis(SplineSpace1D(2, 2), 0.5)
        full = np.zeros(4)
        full[first:first + 3] = vals
        np.testing.assert_allclose(full, [0.0, 0.5, 0.5, 0.0], atol=1e-15)
        np.testing.assert_allclose(full, all_basis(2, 2, 0.5), atol=1e-15)

    @pytest.mark.parametrize("t", [-1e-9, 1.0 + 1e-9, np.nan])
    def test_outside_raises(self, t):
        with pytest.raises(DomainError):
            eval_basis(SplineSpace1D(2, 3), t)

    def test_partition_of_unity_random(self):
        rng = np.random.default_rng(1)
        for p in range(1, 7):
            s = SplineSpace1D(p, 7)
            _, ders = basis_derivs(s, rng.uniform(size=1000), 1)
            assert np.abs(ders[0].sum(axis=1) - 1).max() <= 1e-13
            assert np.abs(ders[1].sum(axis=1)).max() <= 1e-10

    @settings(max_examples=60, deadline=None)
    @given(degrees, intervals, params, st.integers(0, 2))
    def test_matches_recursive_oracle(self, p, n, t, k):
        s = SplineSpace1D(p, n)
        full = collocation_matrix(s, [t], k)[0]
        ref = all_basis(p, n, t, k) if k <= p else np.zeros(s.dim)
        np.testing.assert_allclose(full, ref, atol=1e-10 * max(1, n**k))

    def test_derivative_finite_differences(self):
        s = SplineSpace1D(4, 5)
        d = 1e-5
        for t in np.linspace(0.03, 0.97, 15):
            fd = (collocation_matrix(s, [t + d]) - collocation_matrix(s, [t - d]))[0] / (2 * d)
            exact = collocation_matrix(s, [t], 1)[0]
            assert np.abs(fd - exact).max() <= 1e-6 * np.abs(exact).max()

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_smooth_across_knots(self, p):
        s = SplineSpace1D(p, 4)
        coefs = np.random.default_rng(p).standard_normal(s.dim)
        for knot in (0.25, 0.5, 0.75):
            for k in range(2):
                lo = eval_spline(s, coefs, [knot - 1e-13], k)
                hi = eval_spline(s, coefs, [knot + 1e-13], k)
                assert abs(lo - hi)[0] <= 1e-9 * (1 + abs(lo[0]))

    def test_active_window_matches_dense_sum(self):
        s = SplineSpace1D(3, 5)
        coefs = np.random.default_rng(2).standard_normal(s.dim)
        t = np.linspace(0, 1, 41)
        dense = np.array([coefs @ all_basis(3, 5, x) for x in t])
        np.testing.assert_allclose(eval_spline(s, coefs, t), dense, atol=1e-13)


def test_interpolation_reproduces_splines():
    s = SplineSpace1D(3, 6)
    c = np.random.default_rng(3).standard_normal(s.dim)
    vals = eval_spline(s, c, s.greville)
    np.testing.assert_allclose(interpolate(s, vals), c, atol=1e-12)


class TestTensor:
    def test_dimension_and_flat_index(self):
        ts = TensorSplineSpace(SplineSpace1D(2, 2), SplineSpace1D(3, 1))
        assert (ts.dim_x, ts.dim_y, ts.dim) == (4, 4, 16)
        assert ts.flat_index(1, 2) == 2 * 4 + 1

    def test_partition_of_unity(self):
        ts = TensorSplineSpace.uniform(3, 4)
        rng = np.random.default_rng(0)
        for _ in range(20):
            pt = rng.uniform(size=2)
            _, v = eval_tensor_basis(ts, pt, (0, 0))
            _, dx = eval_tensor_basis(ts, pt, (1, 0))
            assert abs(v.sum() - 1) <= 1e-13 and abs(dx.sum()) <= 1e-11

    def test_outer_product_of_univariate(self):
        ts = TensorSplineSpace.uniform(2, 2)
        idx, vals = eval_tensor_basis(ts, (0.5, 0.5))
        full = np.zeros(ts.dim)
        full[idx] = vals
        b = all_basis(2, 2, 0.5)
        np.testing.assert_allclose(full.reshape(4, 4), np.outer(b, b), atol=1e-15)

    def test_mixed_derivative_against_oracle(self):
        ts = TensorSplineSpace(SplineSpace1D(2, 3), SplineSpace1D(3, 2))
        x, y = 0.41, 0.77
        idx, ders = tensor_basis_derivs(ts, [x], [y], 2)
        for d in [(1, 0), (0, 1), (1, 1), (2, 0), (0, 2)]:
            full = np.zeros(ts.dim)
            full[idx[0]] = ders[d][0]
            ref = np.outer(all_basis(3, 2, y, d[1]), all_basis(2, 3, x, d[0])).ravel()
            np.testing.assert_allclose(full, ref, atol=1e-11)

    def test_outside_square_raises(self):
        with pytest.raises(DomainError):
            eval_tensor_basis(TensorSplineSpace.uniform(2, 2), (0.5, 1.5))


class TestBoundaryTrace:
    ts = TensorSplineSpace.uniform(2, 2)

    def test_indices(self):
        np.testing.assert_array_equal(boundary_trace_indices(self.ts, "x=0"), [0, 4, 8, 12])
        np.testing.assert_array_equal(boundary_trace_indices(self.ts, "y=0"), [0, 1, 2, 3])
        np.testing.assert_array_equal(boundary_trace_indices(self.ts, "x=1"), [3, 7, 11, 15])
        np.testing.assert_array_equal(boundary_trace_indices(self.ts, "y=1"), [12, 13, 14, 15])

    def test_bad_edge(self):
        with pytest.raises(ValueError):
            boundary_trace_indices(self.ts, "z=0")

    @pytest.mark.parametrize("j", range(4))
    def test_trace_is_univariate_basis(self, j):
        c = np.zeros(self.ts.dim)
        c[self.ts.flat_index(0, j)] = 1.0
        t = np.linspace(0, 1, 9)
        idx, ders = tensor_basis_derivs(self.ts, np.zeros_like(t), t, 0)
        trace = np.einsum("ml,ml->m", ders[(0, 0)], c[idx])
        kv = np.array([0, 0, 0, .5, 1, 1, 1])
        np.testing.assert_allclose(trace, [bspline(kv, 2, j, x) for x in t], atol=1e-14)
