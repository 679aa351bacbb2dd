"""Built-in multipatch test domains.

Every domain starts with 2 intervals per direction on level 0 and each
level halves the grid size.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError
from .geometry import GeometryMap
from .splines import TensorSplineSpace
from .topology import MultiPatchDomain, Patch

BASE_INTERVALS = 2
BUILTIN_DOMAINS = ("square1", "square2", "square2-nonmatch", "lshape3", "ring4", "footprint12")


def _squares(origins) -> list[GeometryMap]:
    return [GeometryMap.affine(shift=o) for o in origins]


def _ring_patch(k: int) -> Callable:
    def fun(x, y):
        r = 1.0 + x
        theta = 0.5 * np.pi * (k + y)
        return r * np.cos(theta), r * np.sin(theta)
    return fun


def footprint_vertices() -> np.ndarray:
    """Perturbed 5 x 4 vertex grid of the 12-patch polygon, shape (4, 5, 2)."""
    xs, ys = np.meshgrid(np.arange(5.0), np.arange(4.0))
    # fixed, reproducible perturbation; keeps every quadrilateral convex
    dx = 0.22 * np.sin(1.7 * xs + 2.3 * ys) * np.cos(0.9 * ys)
    dy = 0.22 * np.cos(1.3 * xs - 1.1 * ys) * np.sin(1.9 * xs + 0.4)
    return np.stack([xs + dx, 0.8 * ys + dy], axis=-1)


# corners of a quad given CCW vertices (v00, v10, v11, v01), rotated r times;
# returns the order G(0,0), G(1,0), G(0,1), G(1,1)
def _rotated_corners(v00, v10, v11, v01, r: int):
    ring = [v00, v10, v11, v01]
    ring = ring[r:] + ring[:r]
    a, b, c, d = ring
    return [a, b, d, c]


def _footprint() -> list[GeometryMap]:
    V = footprint_vertices()
    maps = []
    for j in range(3):
        for i in range(4):
            rot = (i + 2 * j) % 4 if (i + j) % 2 else 0
            maps.append(GeometryMap.bilinear(_rotated_corners(
                V[j, i], V[j, i + 1], V[j + 1, i + 1], V[j + 1, i], rot)))
    return maps


def builtin_geometry(name: str) -> list[GeometryMap]:
    """Patch geometry maps of a built-in domain."""
    if name == "square1":
        return _squares([(0.0, 0.0)])
    if name in ("square2", "square2-nonmatch"):
        return _squares([(0.0, 0.0), (1.0, 0.0)])
    if name == "lshape3":
        return _squares([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    if name == "ring4":
        return [GeometryMap.from_function(_ring_patch(k), 2, 4) for k in range(4)]
    if name == "footprint12":
        return _footprint()
    raise ConfigurationError(f"unknown built-in domain {name!r}; choose from {BUILTIN_DOMAINS}")


def _per_patch(value, num: int, what: str) -> list:
    if np.ndim(value) == 0:
        return [value] * num
    value = list(value)
    if len(value) != num:
        raise ConfigurationError(f"expected {num} {what} values, got {len(value)}")
    return value


def uniform_spaces(num: int, degree, level: int, n0: int = BASE_INTERVALS) -> list[TensorSplineSpace]:
    degrees = _per_patch(degree, num, "degree")
    n = n0 * 2**level
    return [TensorSplineSpace.uniform(int(p), n) for p in degrees]


def build_domain(geometries: Sequence[GeometryMap], spaces: Sequence[TensorSplineSpace],
                 alphas=1.0, interfaces=None) -> MultiPatchDomain:
    alphas = _per_patch(alphas, len(geometries), "alpha")
    patches = [Patch(G, s, float(a)) for G, s, a in zip(geometries, spaces, alphas)]
    return MultiPatchDomain.build(patches, interfaces)


def builtin_domain(name: str, level: int = 0, degree=2, alphas=1.0) -> MultiPatchDomain:
    """Built-in domain refined ``level`` times.

    ``degree`` is one spline degree for all patches or one per patch.  On
    ``square2-nonmatch`` the second patch uses degree ``p + 1`` and half the
    grid size of the first.
    """
    if level < 0:
        raise ConfigurationError("level must be non-negative")
    geoms = builtin_geometry(name)
    if name == "square2-nonmatch":
        if np.ndim(degree) == 0:
            degree = [int(degree), int(degree) + 1]
        p0, p1 = _per_patch(degree, 2, "degree")
        n = BASE_INTERVALS * 2**level
        spaces = [TensorSplineSpace.uniform(int(p0), n), TensorSplineSpace.uniform(int(p1), 2 * n)]
    else:
        spaces = uniform_spaces(len(geoms), degree, level)
    return build_domain(geoms, spaces, alphas)

