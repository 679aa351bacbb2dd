import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from iga_sipg.assembly import SipgParameters, SparseSymmetricMatrix, assemble_matrix, assemble_qh_gram
from iga_sipg.domains import builtin_domain
from iga_sipg.exceptions import ConfigurationError, SolverError
from iga_sipg.solutions import builtin_solution
from iga_sipg.solver import SolverSettings, cg, extremal_rayleigh, solve
from iga_sipg.space import build_space
from iga_sipg.study import solve_manufactured


def random_spd(rng, n, cond=100.0):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (Q * np.geomspace(1, cond, n)) @ Q.T


class TestSettings:
    @pytest.mark.parametrize("kw", [{"method": "lu"}, {"tol": 0.0}, {"tol": 1.5},
                                    {"max_iter": 0}, {"preconditioner": "ilu"}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigurationError):
            SolverSettings(**kw)


class TestSolve:
    def test_diagonal(self):
        A = sp.diags([2.0, 3.0, 4.0])
        np.testing.assert_allclose(solve(A, [1.0, 0, 0]), [0.5, 0, 0])

    @pytest.mark.parametrize("method", ["direct", "cg"])
    def test_random_spd_against_dense(self, rng, method):
        A = random_spd(rng, 10)
        b = rng.standard_normal(10)
        x = solve(SparseSymmetricMatrix.from_full(A), b, SolverSettings(method=method))
        np.testing.assert_allclose(x, sla.solve(A, b), rtol=1e-10, atol=1e-10)

    def test_zero_rhs(self):
        assert not np.any(solve(sp.eye(4), np.zeros(4)))

    def test_direct_and_cg_agree_on_sipg(self):
        d = builtin_domain("footprint12", 2, 2)
        sol = builtin_solution("sine")
        a = solve_manufactured(d, sol, settings=SolverSettings("direct")).field.coefs
        b = solve_manufactured(d, sol, settings=SolverSettings("cg")).field.coefs
        assert a.size > 1000
        assert np.linalg.norm(a - b) <= 1e-8 * np.linalg.norm(a)

    def test_cg_reports_iterations(self, rng):
        A = random_spd(rng, 30, 1e6)
        b = rng.standard_normal(30)
        with pytest.raises(SolverError, match="3 iterations"):
            cg(A, b, tol=1e-14, max_iter=3)

    def test_cg_rejects_indefinite(self):
        with pytest.raises(SolverError):
            cg(np.diag([1.0, -1.0]), np.ones(2), precondition=False)

    def test_singular_direct(self):
        with pytest.raises(SolverError):
            solve(sp.csr_matrix(np.ones((3, 3))), np.array([1.0, 0, 0]))

    def test_bordered_system(self, rng):
        A = random_spd(rng, 6)
        A[:, 0] = A[0, :] = 0.0  # singular block, fixed by the border
        A[0, 0] = 0.0
        m = np.ones(6)
        K = np.block([[A + np.outer(np.eye(6)[0], np.eye(6)[0]), m[:, None]], [m[None], np.zeros((1, 1))]])
        b = rng.standard_normal(7)
        x = solve(SparseSymmetricMatrix.from_full(K), b)
        np.testing.assert_allclose(K @ x, b, atol=1e-10)


class TestRayleigh:
    def test_multiple_of_gram(self, rng):
        M = random_spd(rng, 20)
        for which in ("min", "max"):
            assert extremal_rayleigh(2 * M, M, which) == pytest.approx(2.0, rel=1e-6)

    def test_two_by_two(self):
        A = np.array([[2.0, 1.0], [1.0, 3.0]])
        M = np.array([[1.0, 0.0], [0.0, 2.0]])
        # det(A - l M) = 2 l^2 - 7 l + 5 = 0
        assert extremal_rayleigh(A, M, "min") == pytest.approx(1.0)
        assert extremal_rayleigh(A, M, "max") == pytest.approx(2.5)

    def test_diagonal_pencil_iterative(self):
        n = 50
        A = sp.diags(np.arange(1.0, n + 1))
        M = sp.diags(np.full(n, 2.0))
        assert extremal_rayleigh(A, M, "min") == pytest.approx(0.5, rel=1e-6)
        assert extremal_rayleigh(A, M, "max") == pytest.approx(n / 2, rel=1e-6)

    @pytest.mark.parametrize("name,p", [("square2", 2), ("square2-nonmatch", 3), ("lshape3", 2)])
    def test_sipg_pencil_against_dense(self, name, p):
        d = builtin_domain(name, 1, p)
        s = build_space(d)
        A = assemble_matrix(d, s).submatrix(s.free)
        Q = assemble_qh_gram(d, s).submatrix(s.free)
        assert A.n <= 400
        ev = sla.eigh(A.toarray(), Q.toarray(), eigvals_only=True)
        lo, hi = extremal_rayleigh(A, Q, "min"), extremal_rayleigh(A, Q, "max")
        assert lo == pytest.approx(ev[0], rel=1e-5)
        assert hi == pytest.approx(ev[-1], rel=1e-5)
        if name == "square2" and p == 2:
            assert 0 < lo <= 1 <= hi <= 2

    def test_bad_which(self):
        with pytest.raises(ConfigurationError):
            extremal_rayleigh(np.eye(3), np.eye(3), "mid")

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            extremal_rayleigh(np.eye(5), np.eye(4), "min")

    def test_penalty_too_small_loses_coercivity(self):
        # sanity: with a tiny penalty the SIPG form is no longer positive on V_h
        d = builtin_domain("square2", 1, 3)
        s = build_space(d)
        A = assemble_matrix(d, s, SipgParameters(sigma0=0.05)).submatrix(s.free)
        Q = assemble_qh_gram(d, s, SipgParameters(sigma0=0.05)).submatrix(s.free)
        ev = sla.eigh(A.toarray(), Q.toarray(), eigvals_only=True)
        assert ev[0] < 0.25
