"""Error norms, patchwise spline projectors and convergence rates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .assembly import SipgParameters, element_blocks, interface_data
from .exceptions import RateError
from .quadrature import element_rule, mapped_rule
from .space import DgSpace, DiscreteField
from .splines import SplineSpace1D, TensorSplineSpace, collocation_matrix, tensor_basis_derivs
from .topology import MultiPatchDomain, alpha_max, global_mesh_quantities


@dataclass(frozen=True)
class ErrorReport:
    """Norms of ``u_h - u``.

    ``qh**2 == broken_h1_alpha**2 + jump_penalty**2`` and
    ``qh_plus**2 == qh**2 + (h / sigma)**2 * broken_h2_alpha**2``.
    """

    broken_h1_alpha: float
    jump_penalty: float
    qh: float
    qh_plus: float
    broken_h2_alpha: float
    l2: float


def error_vs_exact(domain: MultiPatchDomain, space: DgSpace, params: SipgParameters,
                   field: DiscreteField | None, exact, extra: int = 2) -> ErrorReport:
    """Measure ``u_h - u`` in the dG norms by element and interface quadrature.

    ``exact`` supplies ``value``, ``gradient`` and ``hessian`` as functions of
    ``(x, y, k)`` with physical coordinates and patch index.  ``field=None``
    measures u itself.
    """
    coefs = np.zeros(space.N) if field is None else field.coefs
    h1 = h2 = l2 = 0.0
    for k, patch in enumerate(domain.patches):
        for blk in element_blocks(space, k, extra, nder=2):
            c = coefs[blk.dofs]
            x, y = blk.xy[..., 0], blk.xy[..., 1]
            ev = np.einsum("eql,el->eq", blk.values, c) - exact.value(x, y, k)
            eg = np.einsum("eqld,el->eqd", blk.grad, c) - exact.gradient(x, y, k)
            eh = np.einsum("eqlab,el->eqab", blk.hess, c) - exact.hessian(x, y, k)
            l2 += np.sum(blk.wdet * ev**2)
            h1 += patch.alpha * np.sum(blk.wdet * np.sum(eg**2, axis=-1))
            h2 += patch.alpha * np.sum(blk.wdet * np.sum(eh**2, axis=(-1, -2)))
    sigma = params.penalty(domain)
    jp = 0.0
    for iface in domain.interfaces:
        data = interface_data(space, iface, params.interface_extra + extra)
        xk, xl = data.k.xy, data.l.xy
        ek = np.einsum("ml,ml->m", data.k.values, coefs[data.k.dofs]) - exact.value(xk[:, 0], xk[:, 1], iface.k)
        el = np.einsum("ml,ml->m", data.l.values, coefs[data.l.dofs]) - exact.value(xl[:, 0], xl[:, 1], iface.l)
        c = sigma / params.interface_h(domain, iface) * alpha_max(domain, iface)
        jp += c * np.sum(data.weights * (ek - el) ** 2)
    h = global_mesh_quantities(domain, ratio_threshold=np.inf).h
    qh2 = h1 + jp
    return ErrorReport(
        broken_h1_alpha=float(np.sqrt(h1)),
        jump_penalty=float(np.sqrt(jp)),
        qh=float(np.sqrt(qh2)),
        qh_plus=float(np.sqrt(qh2 + (h / sigma) ** 2 * h2)),
        broken_h2_alpha=float(np.sqrt(h2)),
        l2=float(np.sqrt(l2)),
    )


def convergence_rates(errors: Sequence[float]) -> list[float]:
    """Ratios ``e[l-1] / e[l]`` of consecutive errors."""
    e = np.asarray(errors, dtype=float)
    if e.size < 2:
        raise RateError("at least two errors are needed for a rate")
    if np.any(~np.isfinite(e)) or np.any(e <= 0):
        raise RateError(f"rates are undefined for non-positive errors: {errors}")
    return list(e[:-1] / e[1:])


class Projector1D:
    """Orthogonal projection into a spline space w.r.t. the inner product
    ``(u, v) = (u', v')_{L2(0,1)} + u(0) v(0)``.

    Integrals use ``2p + 4`` Gauss points per knot span.  For p >= 2 the
    load functional is integrated by parts so that only values of u are
    needed: ``(u', B') = u(1) B'(1) - u(0) B'(0) - (u, B'')``.
    """

    def __init__(self, space: SplineSpace1D, num_points: int | None = None):
        p = space.degree
        nq = 2 * p + 4 if num_points is None else num_points
        nodes, weights = mapped_rule(space.breakpoints, nq)
        self.space = space
        self.nodes = nodes.ravel()
        self.weights = weights.ravel()
        B1 = collocation_matrix(space, self.nodes, 1)
        self._B1w = (B1 * self.weights[:, None]).T
        e0 = collocation_matrix(space, [0.0])[0]
        self._e0 = e0
        G = self._B1w @ B1 + np.outer(e0, e0)
        self._chol = cho_factor(G)
        if p >= 2:
            B2 = collocation_matrix(space, self.nodes, 2)
            d0 = collocation_matrix(space, [0.0], 1)[0]
            d1 = collocation_matrix(space, [1.0], 1)[0]
            # acts on samples [u(nodes)..., u(0), u(1)]
            self.sample_points = np.concatenate([self.nodes, [0.0, 1.0]])
            self.load_matrix = np.hstack([-(B2 * self.weights[:, None]).T,
                                          (e0 - d0)[:, None], d1[:, None]])
        else:
            self.sample_points = None
            self.load_matrix = None

    @property
    def gram(self) -> np.ndarray:
        c, lower = self._chol
        U = np.triu(c) if not lower else np.tril(c).T
        return U.T @ U

    def solve(self, rhs) -> np.ndarray:
        return cho_solve(self._chol, rhs)

    def operator(self) -> np.ndarray:
        """Matrix mapping samples at ``sample_points`` to coefficients."""
        if self.load_matrix is None:
            raise ValueError("sample-based projection needs degree >= 2")
        return self.solve(self.load_matrix)


def project_1d(proj: Projector1D, u: Callable, du: Callable | None = None) -> np.ndarray:
    """Coefficients of the projection of u; uses u' when it is supplied."""
    if du is not None:
        rhs = proj._B1w @ np.asarray(du(proj.nodes), dtype=float) + proj._e0 * float(u(0.0))
        return proj.solve(rhs)
    if proj.load_matrix is None:
        raise ValueError("projection without the derivative of u needs degree >= 2")
    vals = np.broadcast_to(u(proj.sample_points), proj.sample_points.shape)
    return proj.solve(proj.load_matrix @ vals)


def project_patch(space: TensorSplineSpace, u: Callable) -> np.ndarray:
    """Tensor projection ``Pi^x Pi^y u`` on the unit square (flat coefficients).

    Applies the univariate projector along y-fibers and then x-fibers of
    ``u(x, y)`` sampled on the tensor grid of projector sample points.
    """
    Px = Projector1D(space.space_x).operator()
    Py = Projector1D(space.space_y).operator()
    tx = Projector1D(space.space_x).sample_points
    ty = Projector1D(space.space_y).sample_points
    XX, YY = np.meshgrid(tx, ty)
    U = np.broadcast_to(u(XX, YY), XX.shape)
    C = Py @ U @ Px.T
    return C.ravel()


def project_field(space: DgSpace, u) -> DiscreteField:
    """Patchwise projection ``(Pi u)|_k = Pi_k (u o G_k) o G_k^-1``.

    ``u`` provides ``value(x, y, k)``.
    """
    blocks = []
    for k, patch in enumerate(space.domain.patches):
        def pulled(xh, yh, k=k, G=patch.geometry):
            xy = G(np.ravel(xh), np.ravel(yh))
            return u.value(xy[:, 0], xy[:, 1], k).reshape(np.shape(xh))
        blocks.append(project_patch(patch.space, pulled))
    return DiscreteField(space, np.concatenate(blocks))


@dataclass(frozen=True)
class UnitSquareErrors:
    h1_seminorm: float
    l2: float
    mean: float


def unit_square_errors(space: TensorSplineSpace, coefs, u: Callable, grad: Callable,
                       extra: int = 3) -> UnitSquareErrors:
    """Errors of a tensor spline against u on the parameter domain.

    Returns ``|u - s|_{H^1}``, ``||u - s||_{L2}`` and ``(u - s, 1)``.
    """
    rule = element_rule(space, extra)
    X = rule.nodes_x.ravel()
    Y = rule.nodes_y.ravel()
    XX, YY = np.meshgrid(X, Y)
    W = np.outer(rule.weights_y.ravel(), rule.weights_x.ravel())
    idx, ders = tensor_basis_derivs(space, XX.ravel(), YY.ravel(), 1)
    c = np.asarray(coefs)[idx]
    s = np.einsum("ml,ml->m", ders[(0, 0)], c).reshape(XX.shape)
    sx = np.einsum("ml,ml->m", ders[(1, 0)], c).reshape(XX.shape)
    sy = np.einsum("ml,ml->m", ders[(0, 1)], c).reshape(XX.shape)
    gx, gy = grad(XX, YY)
    e = u(XX, YY) - s
    return UnitSquareErrors(
        h1_seminorm=float(np.sqrt(np.sum(W * ((gx - sx) ** 2 + (gy - sy) ** 2)))),
        l2=float(np.sqrt(np.sum(W * e**2))),
        mean=float(np.sum(W * e)),
    )


def fitted_slope(h: Sequence[float], err: Sequence[float]) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])
