"""Gauss--Legendre rules on [0, 1], per-element tensor rules and merged
interface rules for non-matching knot vectors."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import ceil

import numpy as np

from .exceptions import DomainError, IgaError
from .splines import SplineSpace1D, TensorSplineSpace


@dataclass(frozen=True)
class QuadratureRule1D:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def __len__(self):
        return self.nodes.size


@lru_cache(maxsize=None)
def _legendre_gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Newton iteration on P_n, starting from the Tricomi-type guesses
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        p0, p1 = np.ones_like(x), x.copy()
        for k in range(2, n + 1):
            p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
        dp = n * (x * p1 - p0) / (x * x - 1.0)
        dx = p1 / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p0, p1 = np.ones_like(x), x.copy()
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    dp = n * (x * p1 - p0) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def gauss_rule(n: int) -> QuadratureRule1D:
    """n-point Gauss--Legendre rule mapped to [0, 1]."""
    if int(n) != n or n < 1:
        raise DomainError(f"number of Gauss points must be >= 1, got {n}")
    x, w = _legendre_gauss(int(n))
    nodes = 0.5 * (x + 1.0)
    nodes.setflags(write=False)
    weights = 0.5 * w
    weights.setflags(write=False)
    return QuadratureRule1D(nodes, weights)


def mapped_rule(breaks, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule on each interval [breaks[i], breaks[i+1]].

    Returns nodes and weights of shape (len(breaks) - 1, n).
    """
    breaks = np.asarray(breaks, dtype=float)
    rule = gauss_rule(n)
    a, b = breaks[:-1, None], breaks[1:, None]
    return a + (b - a) * rule.nodes, (b - a) * rule.weights


@dataclass(frozen=True)
class ElementRule:
    """Tensor Gauss rule on every knot-span cell of a tensor space.

    ``nodes_x[e, q]`` / ``weights_x[e, q]`` hold the rule of the e-th span
    in x, likewise for y; cell (ex, ey) uses their outer product.
    """

    nodes_x: np.ndarray
    weights_x: np.ndarray
    nodes_y: np.ndarray
    weights_y: np.ndarray

    @property
    def num_cells(self) -> int:
        return self.nodes_x.shape[0] * self.nodes_y.shape[0]

    @property
    def points_per_cell(self) -> int:
        return self.nodes_x.shape[1] * self.nodes_y.shape[1]

    def integrate(self, f) -> float:
        X = self.nodes_x.ravel()
        Y = self.nodes_y.ravel()
        W = np.outer(self.weights_y.ravel(), self.weights_x.ravel())
        XX, YY = np.meshgrid(X, Y)
        return float(np.sum(W * f(XX, YY)))


def element_rule(space: TensorSplineSpace, extra: int = 0) -> ElementRule:
    """Gauss rule with ``p + 1 + extra`` points per direction on every cell."""
    if extra < 0:
        raise DomainError("extra quadrature points must be non-negative")
    sx, sy = space.space_x, space.space_y
    nx, wx = mapped_rule(sx.breakpoints, sx.degree + 1 + extra)
    ny, wy = mapped_rule(sy.breakpoints, sy.degree + 1 + extra)
    return ElementRule(nx, wx, ny, wy)


@dataclass(frozen=True)
class InterfaceRule:
    """Composite Gauss rule on the common interface parameter t in [0, 1].

    ``segments`` are the cells between consecutive knot images of both sides;
    ``nodes``/``weights`` have shape (num_segments, points_per_segment).
    """

    segments: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def breakpoints(self) -> np.ndarray:
        return np.concatenate([self.segments[:, 0], self.segments[-1:, 1]])


def merged_breakpoints(space_k: SplineSpace1D, space_l: SplineSpace1D,
                       reversed_: bool = False, tol: float = 1e-13) -> np.ndarray:
    bl = space_l.breakpoints
    if reversed_:
        bl = 1.0 - bl[::-1]
    pts = np.sort(np.concatenate([space_k.breakpoints, bl]))
    if pts.size == 0:
        raise IgaError("empty knot union on interface")
    keep = np.concatenate([[True], np.diff(pts) > tol])
    pts = pts[keep]
    pts[0], pts[-1] = 0.0, 1.0
    return pts


def interface_rule(side_k, side_l, extra: int = 0) -> InterfaceRule:
    """Rule exact for products of traces from both sides of an interface.

    Parameters
    ----------
    side_k, side_l : tuple (SplineSpace1D, bool)
        Edge space of each side and whether its parameter runs reversed
        relative to the common parameter t.  Normally side k is the
        reference side and is not reversed.
    extra : int
        Additional Gauss points per segment beyond ``ceil((p_k + p_l + 2)/2)``.
    """
    (sk, rk), (sl, rl) = side_k, side_l
    breaks = merged_breakpoints(sk, sl, bool(rk) != bool(rl))
    n = ceil((sk.degree + sl.degree + 2) / 2) + extra
    nodes, weights = mapped_rule(breaks, n)
    segs = np.column_stack([breaks[:-1], breaks[1:]])
    return InterfaceRule(segs, nodes, weights)
