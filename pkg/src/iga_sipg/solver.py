"""Linear solvers and extremal generalized Rayleigh quotients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import SparseSymmetricMatrix
from .exceptions import ConfigurationError, SolverError


@dataclass(frozen=True)
class SolverSettings:
    method: str = "direct"
    tol: float = 1e-12
    max_iter: int | None = None
    preconditioner: str = "diagonal"

    def __post_init__(self):
        if self.method not in ("direct", "cg"):
            raise ConfigurationError(f"unknown solver method {self.method!r}")
        if not 0.0 < self.tol < 1.0:
            raise ConfigurationError("tolerance must lie in (0, 1)")
        if self.max_iter is not None and self.max_iter < 1:
            raise ConfigurationError("max_iter must be >= 1")
        if self.preconditioner not in ("none", "diagonal"):
            raise ConfigurationError(f"unknown preconditioner {self.preconditioner!r}")


def _as_csr(A) -> sp.csr_matrix:
    if isinstance(A, SparseSymmetricMatrix):
        return A.to_csr()
    if sp.issparse(A):
        return sp.csr_matrix(A)
    return sp.csr_matrix(np.asarray(A, dtype=float))


def factorize(A):
    """Sparse LU factorization with a symmetric fill-reducing ordering."""
    M = _as_csr(A).tocsc()
    try:
        return spla.splu(M, permc_spec="MMD_AT_PLUS_A",
                         options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SolverError(f"direct factorization failed: {exc}") from exc


def cg(A, b, tol: float = 1e-12, max_iter: int | None = None, precondition: bool = True):
    """Preconditioned conjugate gradients for SPD A.

    Returns ``(x, iterations)``; stops when ``||b - A x|| <= tol * ||b||``.
    """
    A = _as_csr(A)
    b = np.asarray(b, dtype=float)
    n = b.size
    max_iter = 20 * n if max_iter is None else max_iter
    if precondition:
        d = A.diagonal()
        if np.any(d <= 0):
            raise SolverError("diagonal preconditioner needs a positive diagonal")
        dinv = 1.0 / d
    else:
        dinv = np.ones(n)
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, 0
    r = b.copy()
    z = dinv * r
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise SolverError(f"matrix is not positive definite (CG breakdown at iteration {it})")
        a = rz / pAp
        x += a * p
        r -= a * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            return x, it
        z = dinv * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"CG did not converge in {max_iter} iterations "
                      f"(relative residual {np.linalg.norm(r) / bnorm:.3e})")


def solve(A, rhs, settings: SolverSettings = SolverSettings()) -> np.ndarray:
    """Solve ``A u = rhs`` for symmetric A (SPD for CG, possibly bordered for direct)."""
    rhs = np.asarray(rhs, dtype=float)
    if not np.any(rhs):
        return np.zeros_like(rhs)
    if settings.method == "cg":
        x, _ = cg(A, rhs, settings.tol, settings.max_iter,
                  precondition=settings.preconditioner == "diagonal")
        return x
    lu = factorize(A)
    x = lu.solve(rhs)
    res = np.linalg.norm(_as_csr(A) @ x - rhs) / np.linalg.norm(rhs)
    if not np.isfinite(res) or res > 1e-8:
        raise SolverError(f"direct solve inaccurate (relative residual {res:.3e})")
    return x


def extremal_rayleigh(A, M, which: str = "min", tol: float = 1e-6, max_iter: int = 1000,
                      seed: int = 0) -> float:
    """Extreme eigenvalue of the pencil (A, M), both SPD.

    Locally optimal preconditioned iteration: each step performs a
    Rayleigh-Ritz projection onto span{x, T r, p} with M-orthonormalized
    basis, where r is the eigen-residual and T = A^-1 (inverse iteration,
    ``which="min"``) or T = M^-1 (power iteration, ``which="max"``).
    """
    if which not in ("min", "max"):
        raise ConfigurationError("which must be 'min' or 'max'")
    A = _as_csr(A)
    M = _as_csr(M)
    n = A.shape[0]
    if M.shape != A.shape:
        raise ConfigurationError("A and M must have the same shape")
    if n <= 3:
        vals = sla.eigh(A.toarray(), M.toarray(), eigvals_only=True)
        return float(vals[0] if which == "min" else vals[-1])
    T = factorize(A if which == "min" else M)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.sqrt(x @ (M @ x))
    rho = x @ (A @ x)
    p = None
    history = []
    for _ in range(max_iter):
        r = A @ x - rho * (M @ x)
        w = T.solve(r)
        # eigenvalue error is of order eta^2 * rho
        eta2 = abs(r @ w) / (rho * rho if which == "max" else abs(rho))
        if eta2 <= 1e-2 * tol:
            return float(rho)
        S = np.column_stack([x, w] if p is None else [x, w, p])
        G = S.T @ (M @ S)
        d, V = np.linalg.eigh(0.5 * (G + G.T))
        keep = d > 1e-14 * d.max()
        Q = S @ (V[:, keep] / np.sqrt(d[keep]))
        Ar = Q.T @ (A @ Q)
        vals, vecs = np.linalg.eigh(0.5 * (Ar + Ar.T))
        j = 0 if which == "min" else -1
        xn = Q @ vecs[:, j]
        xn /= np.sqrt(xn @ (M @ xn))
        p = xn - x * (x @ (M @ xn))
        pn = np.sqrt(abs(p @ (M @ p)))
        p = p / pn if pn > 1e-300 else None
        x, rho = xn, float(vals[j])
        history.append(rho)
        if len(history) > 20 and abs(history[-1] - history[-21]) <= 1e-14 * abs(rho):
            return float(rho)
    raise SolverError(f"Rayleigh quotient iteration stagnated after {max_iter} steps "
                      f"(estimate {rho:.6g})")
