"""Patch geometry maps: tensor B-spline maps from the unit square to a patch."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, GeometryError, InversionError
from .splines import (
    EDGE_NORMALS,
    SplineSpace1D,
    TensorSplineSpace,
    collocation_matrix,
    edge_points,
    tensor_basis_derivs,
)


@dataclass(frozen=True)
class MapDerivatives:
    """Values and derivatives of a geometry map at m points.

    ``jac[m, i, a] = dG_i / dxhat_a`` and
    ``hess[m, i, a, b] = d^2 G_i / dxhat_a dxhat_b``.
    """

    value: np.ndarray
    jac: np.ndarray
    hess: np.ndarray | None = None

    @property
    def det(self) -> np.ndarray:
        J = self.jac
        return J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

    @property
    def inv(self) -> np.ndarray:
        J = self.jac
        d = self.det
        out = np.empty_like(J)
        out[:, 0, 0] = J[:, 1, 1] / d
        out[:, 1, 1] = J[:, 0, 0] / d
        out[:, 0, 1] = -J[:, 0, 1] / d
        out[:, 1, 0] = -J[:, 1, 0] / d
        return out


class GeometryMap:
    """Polynomial tensor B-spline map ``G : [0,1]^2 -> R^2``.

    Parameters
    ----------
    space : TensorSplineSpace
        Spline space of the map (degree >= 1 in each direction).
    control_points : array_like, shape (space.dim, 2)
        Control net, flat index ``j * dim_x + i``.  A (dim_y, dim_x, 2)
        grid is accepted as well.
    """

    def __init__(self, space: TensorSplineSpace, control_points):
        cp = np.asarray(control_points, dtype=float)
        if cp.ndim == 3:
            cp = cp.reshape(-1, 2)
        if cp.shape != (space.dim, 2):
            raise GeometryError(
                f"control net has shape {cp.shape}, expected ({space.dim}, 2)")
        cp.setflags(write=False)
        self.space = space
        self.control_points = cp

    def __repr__(self):
        sx, sy = self.space.space_x, self.space.space_y
        return (f"GeometryMap(p=({sx.degree},{sy.degree}), "
                f"n=({sx.num_intervals},{sy.num_intervals}))")

    @classmethod
    def bilinear(cls, corners) -> "GeometryMap":
        """Bilinear map with corners G(0,0), G(1,0), G(0,1), G(1,1)."""
        corners = np.asarray(corners, dtype=float).reshape(4, 2)
        return cls(TensorSplineSpace.uniform(1, 1), corners)

    @classmethod
    def affine(cls, matrix=((1.0, 0.0), (0.0, 1.0)), shift=(0.0, 0.0)) -> "GeometryMap":
        A = np.asarray(matrix, dtype=float)
        b = np.asarray(shift, dtype=float)
        hat = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
        return cls.bilinear(hat @ A.T + b)

    @classmethod
    def identity(cls) -> "GeometryMap":
        return cls.affine()

    @classmethod
    def from_function(cls, fun, degree: int, num_intervals: int) -> "GeometryMap":
        """Spline interpolant of ``fun(x, y) -> (X, Y)`` at the Greville grid."""
        s = SplineSpace1D(degree, num_intervals)
        g = s.greville
        XX, YY = np.meshgrid(g, g)
        X, Y = fun(XX, YY)
        C = collocation_matrix(s, g)
        cx = np.linalg.solve(C, np.linalg.solve(C, np.asarray(X, float)).T).T
        cy = np.linalg.solve(C, np.linalg.solve(C, np.asarray(Y, float)).T).T
        return cls(TensorSplineSpace(s, s), np.stack([cx, cy], axis=-1))

    def evaluate(self, x, y, nder: int = 1) -> MapDerivatives:
        """Vectorized evaluation of G and its derivatives up to order ``nder``."""
        idx, ders = tensor_basis_derivs(self.space, x, y, max(nder, 1))
        P = self.control_points[idx]
        value = np.einsum("ml,mld->md", ders[(0, 0)], P)
        jac = np.stack([np.einsum("ml,mld->md", ders[(1, 0)], P),
                        np.einsum("ml,mld->md", ders[(0, 1)], P)], axis=-1)
        hess = None
        if nder >= 2:
            hxx = np.einsum("ml,mld->md", ders[(2, 0)], P)
            hxy = np.einsum("ml,mld->md", ders[(1, 1)], P)
            hyy = np.einsum("ml,mld->md", ders[(0, 2)], P)
            hess = np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -1)
        return MapDerivatives(value, jac, hess)

    def __call__(self, x, y) -> np.ndarray:
        return self.evaluate(x, y, nder=0).value

    @property
    def diameter(self) -> float:
        cp = self.control_points
        return float(np.linalg.norm(cp.max(axis=0) - cp.min(axis=0)))


def _check_point(point) -> tuple[float, float]:
    x, y = (float(c) for c in point)
    tol = 1e-12
    if not (-tol <= x <= 1 + tol and -tol <= y <= 1 + tol):
        raise DomainError(f"point {point!r} outside the unit square")
    return x, y


def eval_map(G: GeometryMap, point) -> np.ndarray:
    x, y = _check_point(point)
    return G.evaluate([x], [y], nder=0).value[0]


def jacobian(G: GeometryMap, point) -> np.ndarray:
    x, y = _check_point(point)
    return G.evaluate([x], [y], nder=1).jac[0]


def hessian(G: GeometryMap, point) -> np.ndarray:
    """``H[i, a, b] = d^2 G_i / dxhat_a dxhat_b``."""
    x, y = _check_point(point)
    return G.evaluate([x], [y], nder=2).hess[0]


def edge_frames(G: GeometryMap, edge: str, t) -> tuple[np.ndarray, np.ndarray, MapDerivatives]:
    """Unit outward normals and arc-length speed along an edge.

    Returns ``(normals (m, 2), speed (m,), derivatives)``.
    """
    x, y = edge_points(edge, np.atleast_1d(t))
    d = G.evaluate(x, y, nder=1)
    tangent = d.jac[:, :, 1] if edge.startswith("x") else d.jac[:, :, 0]
    speed = np.linalg.norm(tangent, axis=1)
    if np.any(speed < 1e-12):
        raise GeometryError(f"degenerate tangent on edge {edge}")
    # outward normal is the covariant image of the reference normal
    nhat = np.asarray(EDGE_NORMALS[edge])
    n = np.einsum("mab,a->mb", d.inv, nhat)
    n /= np.linalg.norm(n, axis=1)[:, None]
    return n, speed, d


def edge_normal(G: GeometryMap, edge: str, t: float) -> np.ndarray:
    if not 0.0 < t < 1.0:
        raise DomainError(f"edge parameter must lie in (0, 1), got {t}")
    n, _, _ = edge_frames(G, edge, [t])
    return n[0]


def invert_point(G: GeometryMap, target, guess=None, tol: float = 1e-12,
                 maxiter: int = 50) -> np.ndarray:
    """Parameter point q with G(q) = target, by damped projected Newton."""
    target = np.asarray(target, dtype=float)
    scale = max(1.0, G.diameter)
    if guess is None:
        s = np.linspace(0.0, 1.0, 5)
        XX, YY = np.meshgrid(s, s)
        vals = G(XX.ravel(), YY.ravel())
        i = np.argmin(np.linalg.norm(vals - target, axis=1))
        q = np.array([XX.ravel()[i], YY.ravel()[i]])
    else:
        q = np.clip(np.asarray(guess, dtype=float), 0.0, 1.0)
    d = G.evaluate([q[0]], [q[1]])
    res = d.value[0] - target
    for _ in range(maxiter):
        rn = np.linalg.norm(res)
        if rn <= tol * scale:
            return q
        try:
            step = np.linalg.solve(d.jac[0], res)
        except np.linalg.LinAlgError as exc:
            raise InversionError("singular Jacobian during point inversion") from exc
        lam = 1.0
        while True:
            qn = np.clip(q - lam * step, 0.0, 1.0)
            dn = G.evaluate([qn[0]], [qn[1]])
            rnew = dn.value[0] - target
            if np.linalg.norm(rnew) < rn or lam < 1e-4:
                break
            lam *= 0.5
        q, d, res = qn, dn, rnew
    if np.linalg.norm(res) <= tol * scale:
        return q
    raise InversionError(
        f"point inversion did not converge in {maxiter} iterations "
        f"(residual {np.linalg.norm(res):.3e})")


@dataclass(frozen=True)
class GeometryRegularity:
    """Sampled bounds of a geometry map.

    ``sup_grad`` is the larger of the sampled maxima of ``||grad G||`` and
    ``||grad^2 G||``; ``sup_inv_grad`` the sampled maximum of ``||(grad G)^-1||``.
    """

    sup_grad: float
    sup_inv_grad: float
    sup_jacobian: float
    sup_hessian: float
    min_det: float


def estimate_regularity(G: GeometryMap, density: int = 20) -> GeometryRegularity:
    if density < 10:
        raise DomainError("sample density must be at least 10 per direction")
    s = np.linspace(0.0, 1.0, density)
    XX, YY = np.meshgrid(s, s)
    d = G.evaluate(XX.ravel(), YY.ravel(), nder=2)
    det = d.det
    if np.min(det) <= 1e-10:
        raise GeometryError(
            f"geometry map is singular or folded (min det = {np.min(det):.3e})")
    sup_j = float(np.max(np.linalg.norm(d.jac, ord=2, axis=(1, 2))))
    sup_inv = float(np.max(np.linalg.norm(d.inv, ord=2, axis=(1, 2))))
    sup_h = float(np.max(np.sqrt(np.sum(d.hess**2, axis=(1, 2, 3)))))
    return GeometryRegularity(max(sup_j, sup_h), sup_inv, sup_j, sup_h, float(np.min(det)))
