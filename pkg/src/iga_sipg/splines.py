"""Univariate B-splines of maximum smoothness on uniform open knot vectors,
and their tensor products on the unit square.

Basis evaluation follows the usual Cox-de Boor triangular scheme with
derivatives, vectorized over evaluation points.  Only the ``p + 1`` basis
functions that are active on the knot span of each point are returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial

import numpy as np

from .exceptions import DomainError

EDGES = ("x=0", "x=1", "y=0", "y=1")

# parameter-domain outward normals of the four edges
EDGE_NORMALS = {
    "x=0": (-1.0, 0.0),
    "x=1": (1.0, 0.0),
    "y=0": (0.0, -1.0),
    "y=1": (0.0, 1.0),
}


def check_edge(edge: str) -> str:
    if edge not in EDGES:
        raise DomainError(f"unknown edge tag {edge!r}; expected one of {EDGES}")
    return edge


@dataclass(frozen=True)
class SplineSpace1D:
    """Splines of degree ``degree`` on a uniform grid of ``num_intervals``
    cells of [0, 1], with simple interior knots (C^{p-1} smoothness).

    Attributes
    ----------
    degree : int
        Polynomial degree p >= 1.
    num_intervals : int
        Number of knot spans n >= 1, grid size h = 1/n.
    """

    degree: int
    num_intervals: int

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 1:
            raise DomainError(f"degree must be an integer >= 1, got {self.degree}")
        if int(self.num_intervals) != self.num_intervals or self.num_intervals < 1:
            raise DomainError(f"num_intervals must be an integer >= 1, got {self.num_intervals}")

    @property
    def dim(self) -> int:
        return self.num_intervals + self.degree

    @property
    def h(self) -> float:
        return 1.0 / self.num_intervals

    @cached_property
    def breakpoints(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.num_intervals + 1)

    @cached_property
    def knots(self) -> np.ndarray:
        p = self.degree
        return np.concatenate([np.zeros(p), self.breakpoints, np.ones(p)])

    @cached_property
    def greville(self) -> np.ndarray:
        """Knot averages, one per basis function."""
        p, kv = self.degree, self.knots
        return np.array([kv[i + 1:i + p + 1].mean() for i in range(self.dim)])

    def refine(self, times: int = 1) -> "SplineSpace1D":
        return SplineSpace1D(self.degree, self.num_intervals * 2**times)

    def find_span(self, t) -> np.ndarray:
        """Index of the knot span containing each t.

        Spans are taken half-open on the left, ``(ih, (i+1)h]``; t = 0 is put
        into the first span.
        """
        t = np.asarray(t, dtype=float)
        n = self.num_intervals
        s = np.ceil(t * n - 1e-12).astype(int) - 1
        return np.clip(s, 0, n - 1)


def _check_unit_interval(t: np.ndarray, tol: float = 1e-12) -> None:
    if t.size and (np.any(t < -tol) or np.any(t > 1.0 + tol) or np.any(~np.isfinite(t))):
        bad = t[(t < -tol) | (t > 1.0 + tol) | ~np.isfinite(t)][0]
        raise DomainError(f"evaluation point {bad!r} outside [0, 1]")


def basis_derivs(space: SplineSpace1D, t, nder: int = 0):
    """Active basis functions and derivatives at an array of points.

    Parameters
    ----------
    space : SplineSpace1D
    t : array_like
        Evaluation points in [0, 1].
    nder : int
        Highest derivative order requested.

    Returns
    -------
    first : ndarray of int, shape (m,)
        Index of the first active basis function for each point.
    ders : ndarray, shape (nder + 1, m, p + 1)
        ``ders[k, i, a]`` is the k-th derivative of basis function
        ``first[i] + a`` at ``t[i]``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    _check_unit_interval(t)
    t = np.clip(t, 0.0, 1.0)
    p = space.degree
    kv = space.knots
    span = space.find_span(t)
    mu = span + p
    m = t.size

    ndu = np.zeros((p + 1, p + 1, m))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, m))
    right = np.zeros((p + 1, m))
    for j in range(1, p + 1):
        left[j] = t - kv[mu + 1 - j]
        right[j] = kv[mu + j] - t
        saved = np.zeros(m)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    nd = min(nder, p)
    ders = np.zeros((nder + 1, m, p + 1))
    for j in range(p + 1):
        ders[0, :, j] = ndu[j, p]

    a = np.zeros((2, p + 1, m))
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[:] = 0.0
        a[0, 0] = 1.0
        for k in range(1, nd + 1):
            d = np.zeros(m)
            rk, pk = r - k, p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d += a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, :, r] = d
            s1, s2 = s2, s1

    for k in range(1, nd + 1):
        ders[k] *= factorial(p) / factorial(p - k)
    return span, ders


def eval_basis(space: SplineSpace1D, t: float, deriv_order: int = 0):
    """Evaluate the ``p + 1`` active basis functions (or a derivative) at t.

    Returns ``(first_active_index, values)``.
    """
    if deriv_order < 0 or deriv_order > 2:
        raise DomainError(f"deriv_order must be 0, 1 or 2, got {deriv_order}")
    t = float(t)
    first, ders = basis_derivs(space, [t], deriv_order)
    return int(first[0]), ders[deriv_order, 0].copy()


def collocation_matrix(space: SplineSpace1D, t, deriv_order: int = 0) -> np.ndarray:
    """Dense matrix ``C[i, j] = D^k B_j(t_i)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    first, ders = basis_derivs(space, t, deriv_order)
    C = np.zeros((t.size, space.dim))
    rows = np.repeat(np.arange(t.size), space.degree + 1)
    cols = (first[:, None] + np.arange(space.degree + 1)).ravel()
    C[rows, cols] = ders[deriv_order].ravel()
    return C


def eval_spline(space: SplineSpace1D, coefs, t, deriv_order: int = 0) -> np.ndarray:
    """Evaluate ``sum_j coefs[j] D^k B_j`` at the points t."""
    coefs = np.asarray(coefs, dtype=float)
    first, ders = basis_derivs(space, t, deriv_order)
    idx = first[:, None] + np.arange(space.degree + 1)
    return np.einsum("ma,ma->m", ders[deriv_order], coefs[idx])


def interpolate(space: SplineSpace1D, values) -> np.ndarray:
    """Coefficients of the spline interpolating ``values`` at the Greville points."""
    C = collocation_matrix(space, space.greville)
    return np.linalg.solve(C, np.asarray(values, dtype=float))


@dataclass(frozen=True)
class TensorSplineSpace:
    """Tensor product ``space_x (x) space_y`` on the unit square.

    Basis function (i, j) has flat index ``j * dim_x + i``.
    """

    space_x: SplineSpace1D
    space_y: SplineSpace1D

    @classmethod
    def uniform(cls, degree: int, num_intervals: int) -> "TensorSplineSpace":
        s = SplineSpace1D(degree, num_intervals)
        return cls(s, s)

    @property
    def dim_x(self) -> int:
        return self.space_x.dim

    @property
    def dim_y(self) -> int:
        return self.space_y.dim

    @property
    def dim(self) -> int:
        return self.dim_x * self.dim_y

    @property
    def degree(self) -> int:
        return max(self.space_x.degree, self.space_y.degree)

    @property
    def h(self) -> float:
        return max(self.space_x.h, self.space_y.h)

    @property
    def num_local(self) -> int:
        return (self.space_x.degree + 1) * (self.space_y.degree + 1)

    def flat_index(self, i, j):
        return np.asarray(j) * self.dim_x + np.asarray(i)

    def refine(self, times: int = 1) -> "TensorSplineSpace":
        return TensorSplineSpace(self.space_x.refine(times), self.space_y.refine(times))

    def edge_space(self, edge: str) -> SplineSpace1D:
        """The univariate space of traces on ``edge``."""
        return self.space_y if check_edge(edge).startswith("x") else self.space_x


def tensor_basis_derivs(space: TensorSplineSpace, x, y, nder: int = 1):
    """Active tensor basis functions and all partial derivatives up to ``nder``.

    Returns
    -------
    idx : ndarray of int, shape (m, L)
        Flat indices of the active functions, L = (p_x+1)(p_y+1), ordered
        with the x-index running fastest.
    ders : dict
        ``ders[(dx, dy)]`` is an (m, L) array for all dx + dy <= nder.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    fx, bx = basis_derivs(space.space_x, x, nder)
    fy, by = basis_derivs(space.space_y, y, nder)
    px, py = space.space_x.degree, space.space_y.degree
    ix = fx[:, None] + np.arange(px + 1)
    iy = fy[:, None] + np.arange(py + 1)
    idx = (iy[:, :, None] * space.dim_x + ix[:, None, :]).reshape(x.size, -1)
    ders = {}
    for dx in range(nder + 1):
        for dy in range(nder + 1 - dx):
            ders[(dx, dy)] = (by[dy][:, :, None] * bx[dx][:, None, :]).reshape(x.size, -1)
    return idx, ders


def eval_tensor_basis(space: TensorSplineSpace, point, deriv=(0, 0)):
    """Active flat indices and values of ``D^dx B_i(x) D^dy B_j(y)`` at one point."""
    dx, dy = deriv
    if not (0 <= dx <= 2 and 0 <= dy <= 2):
        raise DomainError(f"derivative orders must lie in 0..2, got {deriv}")
    x, y = point
    idx, ders = tensor_basis_derivs(space, [x], [y], dx + dy)
    return idx[0], ders[(dx, dy)][0]


def boundary_trace_indices(space: TensorSplineSpace, edge: str) -> np.ndarray:
    """Flat indices of the basis functions that do not vanish on ``edge``.

    Listed in the order of the trace parameter t, so that the trace of
    ``sum_j c[idx[j]] B_idx[j]`` is the univariate spline ``sum_j c[idx[j]] B_j(t)``.
    """
    check_edge(edge)
    nx, ny = space.dim_x, space.dim_y
    if edge == "x=0":
        return np.arange(ny) * nx
    if edge == "x=1":
        return np.arange(ny) * nx + nx - 1
    if edge == "y=0":
        return np.arange(nx)
    return (ny - 1) * nx + np.arange(nx)


def edge_points(edge: str, t) -> tuple[np.ndarray, np.ndarray]:
    """Parameter-domain points of the edge parameterization at t."""
    t = np.asarray(t, dtype=float)
    s = np.full_like(t, float(check_edge(edge)[-1]))
    return (s, t) if edge.startswith("x") else (t, s)
