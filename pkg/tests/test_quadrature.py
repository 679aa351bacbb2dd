import numpy as np
import pytest

from iga_sipg.exceptions import DomainError
from iga_sipg.quadrature import element_rule, gauss_rule, interface_rule, merged_breakpoints
from iga_sipg.splines import SplineSpace1D, TensorSplineSpace, eval_spline, tensor_basis_derivs
from oracles import composite_gauss, gauss


class TestGaussRule:
    def test_examples(self):
        assert gauss_rule(2).integrate(lambda t: t**2) == pytest.approx(1 / 3, abs=1e-15)
        assert gauss_rule(3).integrate(lambda t: t**5) == pytest.approx(1 / 6, abs=1e-15)
        assert gauss_rule(1).integrate(lambda t: t) == pytest.approx(0.5, abs=1e-16)

    @pytest.mark.parametrize("n", [0, -1])
    def test_invalid(self, n):
        with pytest.raises(DomainError):
            gauss_rule(n)

    def test_weights_positive_and_sum_to_one(self):
        for n in range(1, 15):
            r = gauss_rule(n)
            assert np.all(r.weights > 0) and abs(r.weights.sum() - 1) <= 1e-14
            assert np.all((r.nodes > 0) & (r.nodes < 1))

    @pytest.mark.parametrize("n", range(1, 11))
    def test_exactness_degree(self, n):
        r = gauss_rule(n)
        for d in range(2 * n):
            assert abs(r.integrate(lambda t: t**d) - 1 / (d + 1)) <= 1e-14
        assert abs(r.integrate(lambda t: t ** (2 * n)) - 1 / (2 * n + 1)) > 1e-16

    @pytest.mark.parametrize("n", [1, 4, 9, 16])
    def test_matches_numpy_legendre(self, n):
        x, w = gauss(n)
        r = gauss_rule(n)
        np.testing.assert_allclose(r.nodes, x, atol=2e-15)
        np.testing.assert_allclose(r.weights, w, atol=2e-15)

    def test_rule_is_read_only(self):
        with pytest.raises(ValueError):
            gauss_rule(3).nodes[0] = 0.0


class TestElementRule:
    def test_counts(self):
        rule = element_rule(TensorSplineSpace.uniform(2, 2))
        assert rule.num_cells == 4 and rule.points_per_cell == 9
        assert element_rule(TensorSplineSpace.uniform(2, 2), extra=1).points_per_cell == 16

    def test_area(self):
        assert element_rule(TensorSplineSpace.uniform(3, 5)).integrate(lambda x, y: 1.0 + 0 * x) \
            == pytest.approx(1.0, abs=1e-14)

    def test_random_spline_vs_oracle(self, rng):
        ts = TensorSplineSpace.uniform(3, 4)
        c = rng.standard_normal(ts.dim)

        def f(X, Y):
            idx, d = tensor_basis_derivs(ts, X.ravel(), Y.ravel(), 0)
            return np.einsum("ml,ml->m", d[(0, 0)], c[idx]).reshape(X.shape)

        x, w = composite_gauss(np.linspace(0, 1, 5), 20)
        XX, YY = np.meshgrid(x, x)
        ref = np.sum(np.outer(w, w) * f(XX, YY))
        assert element_rule(ts).integrate(f) == pytest.approx(ref, abs=1e-13)


class TestInterfaceRule:
    def test_matching(self):
        s = SplineSpace1D(2, 2)
        rule = interface_rule((s, False), (s, False))
        np.testing.assert_allclose(rule.segments, [[0, .5], [.5, 1]])
        assert rule.nodes.shape == (2, 3)

    def test_union_of_knots(self):
        rule = interface_rule((SplineSpace1D(2, 2), False), (SplineSpace1D(2, 3), False))
        np.testing.assert_allclose(rule.breakpoints, [0, 1 / 3, 1 / 2, 2 / 3, 1], atol=1e-15)

    def test_reversed_union(self):
        b = merged_breakpoints(SplineSpace1D(2, 1), SplineSpace1D(2, 3), True)
        np.testing.assert_allclose(b, [0, 1 / 3, 2 / 3, 1], atol=1e-15)

    @pytest.mark.parametrize("rev", [False, True])
    @pytest.mark.parametrize("pk,nk,pl,nl", [(2, 3, 3, 5), (4, 2, 2, 7), (3, 4, 3, 4)])
    def test_products_exact(self, rng, rev, pk, nk, pl, nl):
        sk, sl = SplineSpace1D(pk, nk), SplineSpace1D(pl, nl)
        ck, cl = rng.standard_normal(sk.dim), rng.standard_normal(sl.dim)

        def prod(t):
            tl = 1 - t if rev else t
            return eval_spline(sk, ck, t) * eval_spline(sl, cl, np.clip(tl, 0, 1))

        rule = interface_rule((sk, False), (sl, rev))
        approx = np.sum(rule.weights * prod(rule.nodes.ravel()).reshape(rule.nodes.shape))
        kn = np.linspace(0, 1, nk + 1)
        ln = np.linspace(0, 1, nl + 1)
        x, w = composite_gauss(np.unique(np.round(np.concatenate([kn, ln]), 14)), 30)
        assert approx == pytest.approx(np.sum(w * prod(x)), abs=1e-13)
