"""The discontinuous multipatch spline space and fields living in it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .exceptions import ConfigurationError
from .geometry import GeometryMap
from .splines import (
    TensorSplineSpace,
    boundary_trace_indices,
    collocation_matrix,
    interpolate,
    tensor_basis_derivs,
)
from .topology import MultiPatchDomain

MODES = ("dirichlet", "zero-mean")

PatchFunction = Union[Callable, Sequence[Callable]]


def patch_function(fun: PatchFunction, k: int) -> Callable:
    """Callable for patch k from either one callable or one per patch."""
    if callable(fun):
        return fun
    return fun[k]


@dataclass(frozen=True)
class DgSpace:
    """Concatenation of the patch spline spaces, no inter-patch continuity.

    Attributes
    ----------
    domain : MultiPatchDomain
    mode : str
        ``"dirichlet"`` (boundary DOFs are constrained) or ``"zero-mean"``.
    offsets : ndarray of int, shape (K + 1,)
        Patch k owns global indices ``offsets[k]:offsets[k+1]``.
    constrained : ndarray of int
        Sorted global indices fixed by Dirichlet data (empty in zero-mean mode).
    """

    domain: MultiPatchDomain
    mode: str
    offsets: np.ndarray
    constrained: np.ndarray

    @property
    def N(self) -> int:
        return int(self.offsets[-1])

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.N, dtype=bool)
        mask[self.constrained] = False
        return np.flatnonzero(mask)

    def patch_space(self, k: int) -> TensorSplineSpace:
        return self.domain.patches[k].space

    def block(self, k: int) -> slice:
        return slice(int(self.offsets[k]), int(self.offsets[k + 1]))


def build_space(domain: MultiPatchDomain, mode: str = "dirichlet", min_degree: int = 2) -> DgSpace:
    if mode not in MODES:
        raise ConfigurationError(f"unknown constraint mode {mode!r}; expected one of {MODES}")
    for k, p in enumerate(domain.patches):
        if min(p.space.space_x.degree, p.space.space_y.degree) < min_degree:
            raise ConfigurationError(
                f"patch {k} has spline degree < {min_degree}; the discretization needs p >= 2")
    dims = [p.space.dim for p in domain.patches]
    offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    constrained = np.array([], dtype=int)
    if mode == "dirichlet":
        idx = [offsets[k] + boundary_trace_indices(domain.patches[k].space, e)
               for k, e in domain.boundary_edges]
        if idx:
            constrained = np.unique(np.concatenate(idx)).astype(int)
    return DgSpace(domain, mode, offsets, constrained)


@dataclass(frozen=True)
class DiscreteField:
    space: DgSpace
    coefs: np.ndarray

    def __post_init__(self):
        if np.shape(self.coefs) != (self.space.N,):
            raise ValueError(f"coefficient vector must have length {self.space.N}")

    def patch_coefs(self, k: int) -> np.ndarray:
        return self.coefs[self.space.block(k)]


def eval_field(field: DiscreteField, k: int, x, y, deriv=(0, 0)) -> np.ndarray:
    """Parametric derivative ``D^deriv (u_h o G_k)`` at parameter points."""
    tspace = field.space.patch_space(k)
    idx, ders = tensor_basis_derivs(tspace, x, y, sum(deriv))
    return np.einsum("ml,ml->m", ders[tuple(deriv)], field.patch_coefs(k)[idx])


def field_gradient(field: DiscreteField, k: int, x, y) -> np.ndarray:
    """Physical gradient of u_h on patch k at parameter points, shape (m, 2)."""
    tspace = field.space.patch_space(k)
    idx, ders = tensor_basis_derivs(tspace, x, y, 1)
    c = field.patch_coefs(k)[idx]
    ghat = np.stack([np.einsum("ml,ml->m", ders[(1, 0)], c),
                     np.einsum("ml,ml->m", ders[(0, 1)], c)], axis=-1)
    d = field.space.domain.patches[k].geometry.evaluate(x, y, nder=1)
    return np.einsum("mab,ma->mb", d.inv, ghat)


def interpolate_boundary(space: DgSpace, g: PatchFunction) -> np.ndarray:
    """Values of the constrained DOFs from Dirichlet data g.

    On every boundary edge, ``g o G_k o gamma`` is interpolated at the
    Greville points of the edge space.  Returns an array aligned with
    ``space.constrained``.
    """
    if space.mode != "dirichlet":
        raise ConfigurationError("boundary interpolation requires dirichlet mode")
    full = np.zeros(space.N)
    for k, edge in space.domain.boundary_edges:
        patch = space.domain.patches[k]
        es = patch.space.edge_space(edge)
        t = es.greville
        xy = patch.edge_curve(edge, t)
        vals = patch_function(g, k)(xy[:, 0], xy[:, 1])
        coefs = interpolate(es, np.broadcast_to(vals, t.shape))
        full[space.offsets[k] + boundary_trace_indices(patch.space, edge)] = coefs
    return full[space.constrained]


def interpolate_patch(tspace: TensorSplineSpace, geometry: GeometryMap, fun: Callable) -> np.ndarray:
    """Tensor Greville interpolant of ``fun o G`` (flat coefficients)."""
    gx, gy = tspace.space_x.greville, tspace.space_y.greville
    XX, YY = np.meshgrid(gx, gy)
    phys = geometry(XX.ravel(), YY.ravel())
    V = np.broadcast_to(fun(phys[:, 0], phys[:, 1]), (XX.size,)).reshape(XX.shape)
    Cx = collocation_matrix(tspace.space_x, gx)
    Cy = collocation_matrix(tspace.space_y, gy)
    C = np.linalg.solve(Cy, np.linalg.solve(Cx, V.T).T)
    return C.ravel()


def interpolate_field(space: DgSpace, fun: PatchFunction) -> DiscreteField:
    coefs = np.concatenate([
        interpolate_patch(p.space, p.geometry, patch_function(fun, k))
        for k, p in enumerate(space.domain.patches)])
    return DiscreteField(space, coefs)
