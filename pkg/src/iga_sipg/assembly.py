"""Assembly of the symmetric interior penalty (SIPG) multipatch system.

The bilinear form is

    a(u, v) = sum_k alpha_k (grad u, grad v)_{Omega_k}
              - b(u, v) - b(v, u) + c(u, v)

with ``b(u, v) = sum_I ([u], {alpha grad v} . n_k)_I`` and
``c(u, v) = sigma / h sum_I alpha_kl ([u], [v])_I`` over all interfaces
I = I_kl, k < l, where [v] = v_k - v_l and {w} = (w_k + w_l) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .exceptions import ConfigurationError, GeometryError
from .geometry import edge_frames
from .quadrature import element_rule, interface_rule
from .space import DgSpace, PatchFunction, interpolate_boundary, patch_function
from .splines import basis_derivs, edge_points, tensor_basis_derivs
from .topology import Interface, MultiPatchDomain, alpha_max, global_mesh_quantities

# target number of (element, point, basis) entries per assembly chunk
_CHUNK_ENTRIES = 2_000_000


@dataclass(frozen=True)
class SipgParameters:
    """Penalty and quadrature settings.

    ``sigma`` overrides the default penalty ``sigma0 * p**2`` and must not
    be smaller than it.  ``local_h`` replaces the global grid size in the
    penalty prefactor by ``min(h_k, h_l)`` of each interface.
    """

    sigma0: float = 4.0
    sigma: float | None = None
    local_h: bool = False
    element_extra: int = 1
    interface_extra: int = 0

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ConfigurationError("sigma0 must be positive")

    def penalty(self, domain: MultiPatchDomain) -> float:
        p = global_mesh_quantities(domain, ratio_threshold=np.inf).p
        base = self.sigma0 * p * p
        if self.sigma is None:
            return base
        if self.sigma < base * (1 - 1e-14):
            raise ConfigurationError(
                f"sigma = {self.sigma} is below sigma0 * p^2 = {base}")
        return float(self.sigma)

    def interface_h(self, domain: MultiPatchDomain, iface: Interface) -> float:
        if self.local_h:
            return min(domain.patches[iface.k].space.h, domain.patches[iface.l].space.h)
        return global_mesh_quantities(domain, ratio_threshold=np.inf).h


class SparseSymmetricMatrix:
    """Symmetric sparse matrix stored as its lower triangle (with diagonal).

    ``asymmetry`` records ``max|A - A^T| / max|A|`` of the contributions
    before they were folded into single-triangle storage.
    """

    def __init__(self, lower: sp.spmatrix, asymmetry: float = 0.0):
        lower = sp.csr_matrix(lower)
        if lower.shape[0] != lower.shape[1]:
            raise ValueError("matrix must be square")
        self.lower = sp.tril(lower, format="csr")
        self.asymmetry = float(asymmetry)
        self._full = None

    @classmethod
    def from_full(cls, full) -> "SparseSymmetricMatrix":
        full = sp.csr_matrix(full)
        full.sum_duplicates()
        scale = abs(full).max() if full.nnz else 0.0
        diff = abs(full - full.T).max() if full.nnz else 0.0
        asym = diff / scale if scale > 0 else 0.0
        return cls(sp.tril(0.5 * (full + full.T)), asym)

    @classmethod
    def from_triplets(cls, rows, cols, vals, n: int) -> "SparseSymmetricMatrix":
        full = sp.coo_matrix((np.ravel(vals), (np.ravel(rows), np.ravel(cols))), shape=(n, n))
        return cls.from_full(full.tocsr())

    @property
    def shape(self) -> tuple[int, int]:
        return self.lower.shape

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def nnz(self) -> int:
        return self.lower.nnz

    def to_csr(self) -> sp.csr_matrix:
        if self._full is None:
            L = self.lower
            self._full = (L + L.T - sp.diags(L.diagonal())).tocsr()
        return self._full

    def toarray(self) -> np.ndarray:
        return self.to_csr().toarray()

    def __matmul__(self, x):
        return self.to_csr() @ x

    def quadratic_form(self, v) -> float:
        v = np.asarray(v, dtype=float)
        return float(v @ (self.to_csr() @ v))

    def __add__(self, other: "SparseSymmetricMatrix") -> "SparseSymmetricMatrix":
        return SparseSymmetricMatrix(self.lower + other.lower, max(self.asymmetry, other.asymmetry))

    def __rmul__(self, s: float) -> "SparseSymmetricMatrix":
        return SparseSymmetricMatrix(float(s) * self.lower, self.asymmetry)

    __mul__ = __rmul__

    def submatrix(self, idx) -> "SparseSymmetricMatrix":
        A = self.to_csr()[idx][:, idx]
        return SparseSymmetricMatrix(sp.tril(A), self.asymmetry)

    def export_triplets(self, path) -> None:
        """Write ``N nnz`` then ``row col value`` lines (0-based, lower triangle)."""
        L = self.lower.tocoo()
        order = np.lexsort((L.col, L.row))
        with open(path, "w") as fh:
            fh.write(f"{self.n} {L.nnz}\n")
            for r, c, v in zip(L.row[order], L.col[order], L.data[order]):
                fh.write(f"{r} {c} {v:.17g}\n")


def read_triplets(path) -> SparseSymmetricMatrix:
    with open(path) as fh:
        n, nnz = (int(v) for v in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    if data.shape[0] != nnz:
        raise ValueError(f"expected {nnz} entries, found {data.shape[0]}")
    L = sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(n, n))
    return SparseSymmetricMatrix(L)


# --------------------------------------------------------------------------
# quadrature point data

@dataclass
class ElementBlock:
    """Basis data on a batch of E cells with Q points and L local functions."""

    dofs: np.ndarray        # (E, L) global indices
    values: np.ndarray      # (E, Q, L)
    grad: np.ndarray        # (E, Q, L, 2) physical gradients
    wdet: np.ndarray        # (E, Q) weight * |det grad G|
    xy: np.ndarray          # (E, Q, 2) physical points
    hess: np.ndarray | None = None   # (E, Q, L, 2, 2) physical Hessians


def _physical_hessian(inv, ghat, hhat, grad, ghess):
    # grad^2 v = J^-T (hess_hat v - sum_m (grad v)_m hess_hat G_m) J^-1
    corr = hhat - np.einsum("eqlm,eqmab->eqlab", grad, ghess)
    return np.einsum("eqac,eqlab,eqbd->eqlcd", inv, corr, inv)


def element_blocks(space: DgSpace, k: int, extra: int = 1, nder: int = 1) -> Iterator[ElementBlock]:
    """Yield basis/geometry data of patch k in batches of element rows."""
    patch = space.domain.patches[k]
    ts = patch.space
    rule = element_rule(ts, extra)
    sx, sy = ts.space_x, ts.space_y
    nx, qx = rule.nodes_x.shape
    ny, qy = rule.nodes_y.shape
    px, py = sx.degree, sy.degree
    _, bx = basis_derivs(sx, rule.nodes_x.ravel(), nder)
    _, by = basis_derivs(sy, rule.nodes_y.ravel(), nder)
    bx = bx.reshape(nder + 1, nx, qx, px + 1)
    by = by.reshape(nder + 1, ny, qy, py + 1)
    L = (px + 1) * (py + 1)
    Q = qx * qy
    rows_per_chunk = max(1, _CHUNK_ENTRIES // (nx * Q * L))
    offset = space.offsets[k]
    ax = np.arange(px + 1)
    ay = np.arange(py + 1)

    for e0 in range(0, ny, rows_per_chunk):
        eys = np.arange(e0, min(ny, e0 + rows_per_chunk))
        E = eys.size * nx

        def combine(dx, dy):
            # [ey, ex, qy, qx, b, a] -> (E, Q, L)
            arr = by[dy][eys][:, None, :, None, :, None] * bx[dx][None, :, None, :, None, :]
            return arr.reshape(E, Q, L)

        dofs = ((eys[:, None, None, None] + ay[None, None, :, None]) * ts.dim_x
                + (np.arange(nx)[None, :, None, None] + ax[None, None, None, :]))
        dofs = dofs.reshape(E, L) + offset

        X = np.broadcast_to(rule.nodes_x[None, :, None, :], (eys.size, nx, qy, qx)).reshape(-1)
        Y = np.broadcast_to(rule.nodes_y[eys][:, None, :, None], (eys.size, nx, qy, qx)).reshape(-1)
        W = (rule.weights_y[eys][:, None, :, None] * rule.weights_x[None, :, None, :]).reshape(E, Q)

        d = patch.geometry.evaluate(X, Y, nder=2 if nder >= 2 else 1)
        det = d.det.reshape(E, Q)
        if np.any(np.abs(det) < 1e-14):
            raise GeometryError(f"singular Jacobian at a quadrature point of patch {k}")
        inv = d.inv.reshape(E, Q, 2, 2)
        ghat = np.stack([combine(1, 0), combine(0, 1)], axis=-1)
        grad = np.einsum("eqab,eqla->eqlb", inv, ghat)
        hess = None
        if nder >= 2:
            hhat = np.empty((E, Q, L, 2, 2))
            hhat[..., 0, 0] = combine(2, 0)
            hhat[..., 0, 1] = hhat[..., 1, 0] = combine(1, 1)
            hhat[..., 1, 1] = combine(0, 2)
            ghess = d.hess.reshape(E, Q, 2, 2, 2)
            hess = _physical_hessian(inv, ghat, hhat, grad, ghess)
        yield ElementBlock(dofs, combine(0, 0), grad, W * np.abs(det),
                           d.value.reshape(E, Q, 2), hess)


@dataclass
class SideData:
    dofs: np.ndarray     # (M, L)
    values: np.ndarray   # (M, L)
    grad: np.ndarray     # (M, L, 2)
    xy: np.ndarray       # (M, 2)
    alpha: float


@dataclass
class InterfaceData:
    """Quadrature data on one interface, both sides at the same points."""

    iface: Interface
    k: SideData
    l: SideData
    normal: np.ndarray   # (M, 2), outward from patch k
    weights: np.ndarray  # (M,), Gauss weight times arc-length speed
    t: np.ndarray        # (M,), common parameter
    num_segments: int


def _side_data(space: DgSpace, k: int, x, y) -> SideData:
    patch = space.domain.patches[k]
    idx, ders = tensor_basis_derivs(patch.space, x, y, 1)
    d = patch.geometry.evaluate(x, y, nder=1)
    ghat = np.stack([ders[(1, 0)], ders[(0, 1)]], axis=-1)
    grad = np.einsum("mab,mla->mlb", d.inv, ghat)
    return SideData(idx + space.offsets[k], ders[(0, 0)], grad, d.value, patch.alpha)


def interface_data(space: DgSpace, iface: Interface, extra: int = 0) -> InterfaceData:
    dom = space.domain
    pk, pl = dom.patches[iface.k], dom.patches[iface.l]
    rule = interface_rule((pk.space.edge_space(iface.edge_k), False),
                          (pl.space.edge_space(iface.edge_l), iface.reversed), extra)
    t = rule.nodes.ravel()
    normal, speed, _ = edge_frames(pk.geometry, iface.edge_k, t)
    side_k = _side_data(space, iface.k, *edge_points(iface.edge_k, t))
    side_l = _side_data(space, iface.l, *edge_points(iface.edge_l, iface.t_on_l(t)))
    return InterfaceData(iface, side_k, side_l, normal, rule.weights.ravel() * speed, t,
                         rule.nodes.shape[0])


def _jump_and_flux(data: InterfaceData):
    """Jump ``[phi]`` and averaged flux ``{alpha grad phi} . n_k`` of the
    combined local basis (side k first), shapes (M, Lk + Ll)."""
    jump = np.concatenate([data.k.values, -data.l.values], axis=1)
    fk = 0.5 * data.k.alpha * np.einsum("mld,md->ml", data.k.grad, data.normal)
    fl = 0.5 * data.l.alpha * np.einsum("mld,md->ml", data.l.grad, data.normal)
    flux = np.concatenate([fk, fl], axis=1)
    dofs = np.concatenate([data.k.dofs, data.l.dofs], axis=1)
    return jump, flux, dofs


def _local_triplets(dofs, local):
    # dofs (E, L) shared by rows and cols, local (E, L, L)
    L = dofs.shape[1]
    rows = np.repeat(dofs, L, axis=1)
    cols = np.tile(dofs, (1, L))
    return rows.ravel(), cols.ravel(), local.reshape(-1)


def _sum_triplets(parts, n, symmetric=True):
    if not parts:
        empty = sp.csr_matrix((n, n))
        return SparseSymmetricMatrix(empty) if symmetric else empty
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    if symmetric:
        return SparseSymmetricMatrix.from_triplets(rows, cols, vals, n)
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


# --------------------------------------------------------------------------
# bilinear forms

def _volume_triplets(space: DgSpace, extra: int, order: int = 1):
    parts = []
    for k, patch in enumerate(space.domain.patches):
        for blk in element_blocks(space, k, extra, nder=order):
            if order == 1:
                loc = np.einsum("eq,eqld,eqmd->elm", blk.wdet, blk.grad, blk.grad)
            else:
                loc = np.einsum("eq,eqlab,eqmab->elm", blk.wdet, blk.hess, blk.hess)
            parts.append(_local_triplets(blk.dofs, patch.alpha * loc))
    return parts


def assemble_volume(domain: MultiPatchDomain, space: DgSpace, extra: int = 1) -> SparseSymmetricMatrix:
    """alpha-weighted broken stiffness matrix; no cross-patch entries."""
    _check(domain, space)
    return _sum_triplets(_volume_triplets(space, extra), space.N)


def assemble_h2(domain: MultiPatchDomain, space: DgSpace, extra: int = 1) -> SparseSymmetricMatrix:
    """alpha-weighted broken H^2 seminorm Gram matrix (physical Hessians)."""
    _check(domain, space)
    return _sum_triplets(_volume_triplets(space, extra, order=2), space.N)


def _segment_triplets(data: "InterfaceData", dofs, local):
    # points of one segment share their active functions on both sides
    S = data.num_segments
    M, L, _ = local.shape
    seg_local = local.reshape(S, M // S, L, L).sum(axis=1)
    return _local_triplets(dofs.reshape(S, M // S, L)[:, 0], seg_local)


def _penalty_triplets(domain, space, params):
    sigma = params.penalty(domain)
    parts = []
    for iface in domain.interfaces:
        data = interface_data(space, iface, params.interface_extra)
        jump, _, dofs = _jump_and_flux(data)
        c = sigma / params.interface_h(domain, iface) * alpha_max(domain, iface)
        loc = (c * data.weights)[:, None, None] * jump[:, :, None] * jump[:, None, :]
        parts.append(_segment_triplets(data, dofs, loc))
    return parts


def assemble_penalty(domain: MultiPatchDomain, space: DgSpace,
                     params: SipgParameters = SipgParameters()) -> SparseSymmetricMatrix:
    """Interface jump penalty ``sigma / h * alpha_kl * ([u], [v])``."""
    _check(domain, space)
    return _sum_triplets(_penalty_triplets(domain, space, params), space.N)


def _consistency_triplets(domain, space, params):
    parts = []
    for iface in domain.interfaces:
        data = interface_data(space, iface, params.interface_extra)
        jump, flux, dofs = _jump_and_flux(data)
        # B[i, j] = ([phi_j], {alpha grad phi_i} . n)
        loc = data.weights[:, None, None] * flux[:, :, None] * jump[:, None, :]
        parts.append(_segment_triplets(data, dofs, loc))
    return parts


def assemble_consistency(domain: MultiPatchDomain, space: DgSpace,
                         params: SipgParameters = SipgParameters()) -> sp.csr_matrix:
    """Non-symmetric matrix ``B[i, j] = (phi_j, phi_i)_B``."""
    _check(domain, space)
    return _sum_triplets(_consistency_triplets(domain, space, params), space.N, symmetric=False)


def assemble_matrix(domain: MultiPatchDomain, space: DgSpace,
                    params: SipgParameters = SipgParameters()) -> SparseSymmetricMatrix:
    """The SIPG matrix ``A = volume - B - B^T + C`` on all N DOFs."""
    _check(domain, space)
    parts = _volume_triplets(space, params.element_extra)
    parts += _penalty_triplets(domain, space, params)
    for r, c, v in _consistency_triplets(domain, space, params):
        parts.append((r, c, -v))
        parts.append((c, r, -v))
    return _sum_triplets(parts, space.N)


def assemble_qh_gram(domain: MultiPatchDomain, space: DgSpace,
                     params: SipgParameters = SipgParameters(), plus: bool = False) -> SparseSymmetricMatrix:
    """Gram matrix of the dG norm (volume + penalty), optionally with the
    scaled broken H^2 term ``(h / sigma)^2 |u|^2_{H^2_alpha}``."""
    _check(domain, space)
    parts = _volume_triplets(space, params.element_extra)
    parts += _penalty_triplets(domain, space, params)
    if plus:
        h = global_mesh_quantities(domain, ratio_threshold=np.inf).h
        s = (h / params.penalty(domain)) ** 2
        parts += [(r, c, s * v) for r, c, v in _volume_triplets(space, params.element_extra, 2)]
    return _sum_triplets(parts, space.N)


# --------------------------------------------------------------------------
# right-hand sides and functionals

def assemble_load(domain: MultiPatchDomain, space: DgSpace, f: PatchFunction,
                  extra: int = 1) -> np.ndarray:
    """``b_i = (f, phi_i)_{L2(Omega)}``."""
    _check(domain, space)
    b = np.zeros(space.N)
    for k in range(domain.num_patches):
        fk = patch_function(f, k)
        for blk in element_blocks(space, k, extra):
            fv = np.broadcast_to(fk(blk.xy[..., 0], blk.xy[..., 1]), blk.wdet.shape)
            np.add.at(b, blk.dofs, np.einsum("eq,eql->el", blk.wdet * fv, blk.values))
    return b


def assemble_mean(domain: MultiPatchDomain, space: DgSpace, extra: int = 1) -> np.ndarray:
    """``m_i = (1, phi_i)_{L2(Omega)}``."""
    return assemble_load(domain, space, lambda x, y: 1.0, extra)


def assemble_form_action(domain: MultiPatchDomain, space: DgSpace, params: SipgParameters,
                         u) -> np.ndarray:
    """``r_i = (u, phi_i)_{A_h}`` for an analytic, patchwise defined u.

    ``u`` provides ``value(x, y, k)`` and ``gradient(x, y, k)``; its exact
    values and gradients enter the jump and flux slots.
    """
    _check(domain, space)
    r = np.zeros(space.N)
    for k, patch in enumerate(domain.patches):
        for blk in element_blocks(space, k, params.element_extra):
            gu = u.gradient(blk.xy[..., 0], blk.xy[..., 1], k)
            loc = patch.alpha * np.einsum("eq,eqd,eqld->el", blk.wdet, gu, blk.grad)
            np.add.at(r, blk.dofs, loc)
    sigma = params.penalty(domain)
    for iface in domain.interfaces:
        data = interface_data(space, iface, params.interface_extra)
        jump, flux, dofs = _jump_and_flux(data)
        xk, xl = data.k.xy, data.l.xy
        ujump = u.value(xk[:, 0], xk[:, 1], iface.k) - u.value(xl[:, 0], xl[:, 1], iface.l)
        uflux = 0.5 * (data.k.alpha * np.einsum("md,md->m", u.gradient(xk[:, 0], xk[:, 1], iface.k), data.normal)
                       + data.l.alpha * np.einsum("md,md->m", u.gradient(xl[:, 0], xl[:, 1], iface.l), data.normal))
        c = sigma / params.interface_h(domain, iface) * alpha_max(domain, iface)
        w = data.weights
        loc = (-(w * ujump)[:, None] * flux
               - (w * uflux)[:, None] * jump
               + c * (w * ujump)[:, None] * jump)
        np.add.at(r, dofs, loc)
    return r


# --------------------------------------------------------------------------
# the linear system

@dataclass
class SipgSystem:
    """Assembled system with Dirichlet elimination or zero-mean bordering.

    ``lhs @ x = rhs`` is the system actually solved; :meth:`expand` maps its
    solution back to the N coefficients of u_h.
    """

    space: DgSpace
    matrix: SparseSymmetricMatrix
    load: np.ndarray
    lifting: np.ndarray
    lhs: SparseSymmetricMatrix
    rhs: np.ndarray

    def expand(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.space.mode == "zero-mean":
            return x[:self.space.N].copy()
        u = self.lifting.copy()
        u[self.space.free] = x
        return u


def assemble_system(domain: MultiPatchDomain, space: DgSpace, params: SipgParameters,
                    f: PatchFunction, g: PatchFunction | None = None) -> SipgSystem:
    """Assemble A_h and the load vector and apply the constraint mode.

    In dirichlet mode the boundary DOFs receive the Greville interpolant of
    g (zero if g is None) and are eliminated; in zero-mean mode the system
    is bordered by the mean-value row.
    """
    A = assemble_matrix(domain, space, params)
    b = assemble_load(domain, space, f, params.element_extra)
    lifting = np.zeros(space.N)
    if space.mode == "dirichlet":
        if g is not None and space.constrained.size:
            lifting[space.constrained] = interpolate_boundary(space, g)
        free = space.free
        Afull = A.to_csr()
        rhs = b[free] - Afull[free] @ lifting
        lhs = A.submatrix(free)
    else:
        m = assemble_mean(domain, space, params.element_extra)
        N = space.N
        border = sp.csr_matrix((m, (np.full(N, N), np.arange(N))), shape=(N + 1, N + 1))
        lower = sp.bmat([[A.lower, None], [None, sp.csr_matrix((1, 1))]]).tocsr() + border
        lhs = SparseSymmetricMatrix(lower, A.asymmetry)
        rhs = np.concatenate([b, [0.0]])
    return SipgSystem(space, A, b, lifting, lhs, rhs)


def _check(domain: MultiPatchDomain, space: DgSpace) -> None:
    if space.domain is not domain:
        raise ConfigurationError("space was built on a different domain")
