"""Multipatch domains: patches, coefficients and interfaces."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import ConfigurationError, TopologyError
from .geometry import GeometryMap
from .splines import EDGES, TensorSplineSpace, check_edge, edge_points

NUM_SAMPLES = 33
DEFAULT_TOL = 1e-10


class QuasiUniformityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Patch:
    geometry: GeometryMap
    space: TensorSplineSpace
    alpha: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(f"patch coefficient must be positive, got {self.alpha}")

    def edge_curve(self, edge: str, t) -> np.ndarray:
        x, y = edge_points(edge, np.asarray(t, dtype=float))
        return self.geometry(x, y)


@dataclass(frozen=True)
class Interface:
    """Common edge of patches k < l.

    The common parameter t runs along ``edge_k`` of patch k; on patch l the
    same physical point has edge parameter t (same) or 1 - t (reversed).
    """

    k: int
    l: int
    edge_k: str
    edge_l: str
    reversed: bool = False

    def __post_init__(self):
        check_edge(self.edge_k)
        check_edge(self.edge_l)

    @property
    def orientation(self) -> str:
        return "reversed" if self.reversed else "same"

    def t_on_l(self, t):
        t = np.asarray(t, dtype=float)
        return 1.0 - t if self.reversed else t

    def canonical(self) -> "Interface":
        if self.k < self.l:
            return self
        return Interface(self.l, self.k, self.edge_l, self.edge_k, self.reversed)


def sample_params(num: int = NUM_SAMPLES) -> np.ndarray:
    """Chebyshev--Lobatto points on [0, 1] (symmetric under t -> 1 - t)."""
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(num) / (num - 1)))


def trace_deviation(pk: Patch, edge_k: str, pl: Patch, edge_l: str,
                    reversed_: bool, t=None) -> float:
    t = sample_params() if t is None else np.asarray(t, dtype=float)
    a = pk.edge_curve(edge_k, t)
    b = pl.edge_curve(edge_l, 1.0 - t if reversed_ else t)
    return float(np.max(np.linalg.norm(a - b, axis=1)))


def _dist_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    ap = points[:, None, :] - a[None, :, :]
    s = np.clip(np.sum(ap * ab[None], axis=2) / L2[None], 0.0, 1.0)
    proj = a[None] + s[..., None] * ab[None]
    return np.min(np.linalg.norm(points[:, None, :] - proj, axis=2), axis=1)


class _EdgeTrace:
    """Sampled physical trace of one patch edge."""

    def __init__(self, patch: Patch, edge: str):
        t = sample_params()
        self.points = patch.edge_curve(edge, t)
        self.reversed_points = self.points[::-1]
        self.interior = self.points[1:-1]
        self.dense = patch.edge_curve(edge, np.linspace(0.0, 1.0, 257))
        self.lo = self.dense.min(axis=0)
        self.hi = self.dense.max(axis=0)
        self.diameter = patch.geometry.diameter


def _partial_overlap(a: _EdgeTrace, b: _EdgeTrace, tol_abs: float) -> bool:
    tol_on = max(tol_abs, 1e-6 * max(a.diameter, b.diameter))
    if np.any(a.lo > b.hi + tol_on) or np.any(b.lo > a.hi + tol_on):
        return False
    on_b = _dist_to_polyline(a.interior, b.dense) <= tol_on
    on_a = _dist_to_polyline(b.interior, a.dense) <= tol_on
    return on_b.sum() >= 2 or on_a.sum() >= 2


def _domain_diameter(patches: Sequence[Patch]) -> float:
    cp = np.concatenate([p.geometry.control_points for p in patches])
    return float(np.linalg.norm(cp.max(axis=0) - cp.min(axis=0)))


def discover_interfaces(patches: Sequence[Patch], tol: float = DEFAULT_TOL) -> list[Interface]:
    """Find all common edges by comparing sampled physical edge traces.

    Raises
    ------
    TopologyError
        On partial edge overlaps (T-junctions) or when one patch edge
        matches several other edges.
    """
    if len(patches) < 1:
        raise ConfigurationError("a domain needs at least one patch")
    tol_abs = tol * _domain_diameter(patches)
    traces = [{e: _EdgeTrace(p, e) for e in EDGES} for p in patches]
    found = []
    for k, l in combinations(range(len(patches)), 2):
        for ek in EDGES:
            a = traces[k][ek]
            for el in EDGES:
                b = traces[l][el]
                if np.max(np.linalg.norm(a.points - b.points, axis=1)) <= tol_abs:
                    found.append(Interface(k, l, ek, el, False))
                elif np.max(np.linalg.norm(a.points - b.reversed_points, axis=1)) <= tol_abs:
                    found.append(Interface(k, l, ek, el, True))
                elif _partial_overlap(a, b, tol_abs):
                    raise TopologyError(
                        f"edge {ek} of patch {k} partially overlaps edge {el} of patch {l} "
                        "(T-junction or non-matching patch layout)")
    _check_unique_edges(found)
    return found


def _check_unique_edges(interfaces: Sequence[Interface]) -> None:
    seen: dict[tuple[int, str], Interface] = {}
    for iface in interfaces:
        for key in ((iface.k, iface.edge_k), (iface.l, iface.edge_l)):
            if key in seen:
                raise TopologyError(
                    f"edge {key[1]} of patch {key[0]} matches more than one other edge")
            seen[key] = iface


def validate_interface(patches: Sequence[Patch], iface: Interface, tol: float = DEFAULT_TOL) -> None:
    tol_abs = tol * _domain_diameter(patches)
    dev = trace_deviation(patches[iface.k], iface.edge_k, patches[iface.l], iface.edge_l,
                          iface.reversed)
    if dev > tol_abs:
        raise TopologyError(
            f"patches {iface.k} ({iface.edge_k}) and {iface.l} ({iface.edge_l}) do not agree "
            f"on the interface with orientation {iface.orientation}: deviation {dev:.3e}")


def _vertex_contacts(patches, interfaces, tol_abs):
    corners = [p.geometry(np.array([0.0, 1.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0, 1.0]))
               for p in patches]
    linked = {(i.k, i.l) for i in interfaces}
    out = []
    for k, l in combinations(range(len(patches)), 2):
        if (k, l) in linked:
            continue
        d = np.linalg.norm(corners[k][:, None, :] - corners[l][None, :, :], axis=2)
        if np.any(d <= tol_abs):
            out.append((k, l))
    return out


@dataclass(frozen=True)
class MultiPatchDomain:
    """Patches with coefficients, their interfaces and boundary edges."""

    patches: tuple[Patch, ...]
    interfaces: tuple[Interface, ...]
    boundary_edges: tuple[tuple[int, str], ...]
    vertex_contacts: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def build(cls, patches: Sequence[Patch], interfaces: Sequence[Interface] | None = None,
              tol: float = DEFAULT_TOL) -> "MultiPatchDomain":
        """Assemble a domain, discovering interfaces unless they are given.

        Explicitly given interfaces are canonicalized (k < l) and validated.
        """
        patches = tuple(patches)
        if not patches:
            raise ConfigurationError("a domain needs at least one patch")
        if interfaces is None:
            ifaces = discover_interfaces(patches, tol)
        else:
            ifaces = [i.canonical() for i in interfaces]
            for i in ifaces:
                if not (0 <= i.k < len(patches) and 0 <= i.l < len(patches)) or i.k == i.l:
                    raise TopologyError(f"invalid patch indices in interface {i}")
                validate_interface(patches, i, tol)
            _check_unique_edges(ifaces)
        ifaces = sorted(ifaces, key=lambda i: (i.k, i.l, i.edge_k))
        used = {(i.k, i.edge_k) for i in ifaces} | {(i.l, i.edge_l) for i in ifaces}
        boundary = tuple((k, e) for k in range(len(patches)) for e in EDGES if (k, e) not in used)
        tol_abs = tol * _domain_diameter(patches)
        vertices = tuple(_vertex_contacts(patches, ifaces, tol_abs))
        return cls(patches, tuple(ifaces), boundary, vertices)

    @property
    def num_patches(self) -> int:
        return len(self.patches)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([p.alpha for p in self.patches])

    def neighbors(self, k: int) -> set[int]:
        out = {i.l for i in self.interfaces if i.k == k}
        return out | {i.k for i in self.interfaces if i.l == k}

    @property
    def pairs(self) -> set[tuple[int, int]]:
        return {(i.k, i.l) for i in self.interfaces}

    @property
    def pairs_star(self) -> set[tuple[int, int]]:
        return {(i.l, i.k) for i in self.interfaces}

    def with_spaces(self, spaces: Sequence[TensorSplineSpace]) -> "MultiPatchDomain":
        patches = tuple(replace(p, space=s) for p, s in zip(self.patches, spaces))
        return replace(self, patches=patches)

    def with_alphas(self, alphas: Sequence[float]) -> "MultiPatchDomain":
        patches = tuple(replace(p, alpha=float(a)) for p, a in zip(self.patches, alphas))
        return replace(self, patches=patches)

    def refine(self, times: int = 1) -> "MultiPatchDomain":
        return self.with_spaces([p.space.refine(times) for p in self.patches])


def alpha_max(domain: MultiPatchDomain, interface: Interface) -> float:
    return max(domain.patches[interface.k].alpha, domain.patches[interface.l].alpha)


class MeshQuantities(NamedTuple):
    p: int
    p_min: int
    h: float
    quasi_uniformity: float


def global_mesh_quantities(domain: MultiPatchDomain, ratio_threshold: float = 4.0) -> MeshQuantities:
    """Largest degree, smallest degree, largest grid size and max h/h_k."""
    if not domain.patches:
        raise ConfigurationError("empty domain")
    degs = [(p.space.space_x.degree, p.space.space_y.degree) for p in domain.patches]
    hs = np.array([p.space.h for p in domain.patches])
    h = float(hs.max())
    ratio = h / float(hs.min())
    if ratio > ratio_threshold:
        warnings.warn(f"grid sizes are not quasi-uniform: h / h_k = {ratio:g} > {ratio_threshold:g}",
                      QuasiUniformityWarning, stacklevel=2)
    return MeshQuantities(max(max(d) for d in degs), min(min(d) for d in degs), h, ratio)
