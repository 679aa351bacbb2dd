"""Manufactured solutions of ``-div(alpha grad u) = f`` with analytic derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError
from .geometry import edge_frames
from .topology import MultiPatchDomain

BUILTIN_SOLUTIONS = ("sine", "alpha-jump", "poly", "cosine")

PI = np.pi


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution ``u`` given patchwise as ``u_k = scale_k * w``.

    ``w`` is a smooth function of physical coordinates with gradient and
    Hessian; ``scale_k`` lets a solution jump by coefficient ratios.  The
    source is ``f = -alpha_k * scale_k * laplace(w)``.
    """

    id: str
    alphas: tuple[float, ...]
    w: Callable
    w_grad: Callable
    w_hess: Callable
    scales: tuple[float, ...] | None = None

    def alpha(self, k: int) -> float:
        return self.alphas[k] if len(self.alphas) > 1 else self.alphas[0]

    def scale(self, k: int) -> float:
        if self.scales is None:
            return 1.0
        return self.scales[k] if len(self.scales) > 1 else self.scales[0]

    def value(self, x, y, k: int = 0) -> np.ndarray:
        return self.scale(k) * self.w(np.asarray(x, float), np.asarray(y, float))

    def gradient(self, x, y, k: int = 0) -> np.ndarray:
        return self.scale(k) * self.w_grad(np.asarray(x, float), np.asarray(y, float))

    def hessian(self, x, y, k: int = 0) -> np.ndarray:
        return self.scale(k) * self.w_hess(np.asarray(x, float), np.asarray(y, float))

    def source(self, x, y, k: int = 0) -> np.ndarray:
        H = self.hessian(x, y, k)
        return -self.alpha(k) * (H[..., 0, 0] + H[..., 1, 1])

    def sources(self, num_patches: int) -> list[Callable]:
        return [lambda x, y, k=k: self.source(x, y, k) for k in range(num_patches)]

    def boundary(self, num_patches: int) -> list[Callable]:
        return [lambda x, y, k=k: self.value(x, y, k) for k in range(num_patches)]


def _stack2(a, b):
    return np.stack(np.broadcast_arrays(a, b), axis=-1)


def _hess(xx, xy, yy):
    xx, xy, yy = np.broadcast_arrays(xx, xy, yy)
    return np.stack([np.stack([xx, xy], -1), np.stack([xy, yy], -1)], -1)


def _sine():
    w = lambda x, y: np.sin(PI * x) * np.sin(PI * y)
    g = lambda x, y: PI * _stack2(np.cos(PI * x) * np.sin(PI * y), np.sin(PI * x) * np.cos(PI * y))
    H = lambda x, y: PI**2 * _hess(-np.sin(PI * x) * np.sin(PI * y), np.cos(PI * x) * np.cos(PI * y),
                                   -np.sin(PI * x) * np.sin(PI * y))
    return w, g, H


def _cosine():
    w = lambda x, y: np.cos(PI * x) * np.cos(PI * y)
    g = lambda x, y: -PI * _stack2(np.sin(PI * x) * np.cos(PI * y), np.cos(PI * x) * np.sin(PI * y))
    H = lambda x, y: PI**2 * _hess(-np.cos(PI * x) * np.cos(PI * y), np.sin(PI * x) * np.sin(PI * y),
                                   -np.cos(PI * x) * np.cos(PI * y))
    return w, g, H


def _strip():
    w = lambda x, y: np.sin(PI * x) + 0.0 * y
    g = lambda x, y: _stack2(PI * np.cos(PI * x), 0.0 * x * y)
    z = lambda x, y: 0.0 * x * y
    H = lambda x, y: _hess(-PI**2 * np.sin(PI * x) + z(x, y), z(x, y), z(x, y))
    return w, g, H


def _poly():
    w = lambda x, y: x**2 * y**2 + x
    g = lambda x, y: _stack2(2 * x * y**2 + 1.0, 2 * x**2 * y)
    H = lambda x, y: _hess(2 * y**2, 4 * x * y, 2 * x**2)
    return w, g, H


def builtin_solution(id: str, alphas: Sequence[float] | float = 1.0) -> ManufacturedSolution:
    """Manufactured solution by id.

    ``sine``
        ``u = sin(pi x) sin(pi y)``.
    ``alpha-jump``
        ``u_k = sin(pi x) / alpha_k`` so that ``f = pi^2 sin(pi x)`` on every
        patch; continuous with continuous flux across the line ``x = 1``.
    ``poly``
        ``u = x^2 y^2 + x``, a member of V_h for p >= 2 on affine patches.
    ``cosine``
        ``u = cos(pi x) cos(pi y)``, zero mean with zero normal derivative on
        axis-aligned integer rectangles (pure Neumann test).

    ``alphas`` holds one coefficient per patch (or one for all); the source
    of the smooth solutions is ``-alpha_k laplace(u)``.
    """
    alphas = tuple(float(a) for a in np.atleast_1d(alphas))
    if any(a <= 0 for a in alphas):
        raise ConfigurationError("coefficients must be positive")
    makers = {"sine": _sine, "cosine": _cosine, "poly": _poly, "alpha-jump": _strip}
    if id not in makers:
        raise ConfigurationError(f"unknown solution {id!r}; choose from {BUILTIN_SOLUTIONS}")
    w, g, H = makers[id]()
    scales = tuple(1.0 / a for a in alphas) if id == "alpha-jump" else None
    return ManufacturedSolution(id, alphas, w, g, H, scales)


@dataclass(frozen=True)
class SolutionCheck:
    pde_residual: float
    derivative_error: float
    interface_jump: float
    flux_jump: float


def check_solution(sol: ManufacturedSolution, domain: MultiPatchDomain,
                   num_points: int = 100, seed: int = 0) -> SolutionCheck:
    """Spot-check the PDE, the derivatives and interface/flux continuity.

    ``pde_residual`` is ``max|-alpha_k tr(hess u_k) - f_k| / max|f_k|`` with
    the coefficients of ``domain``; ``derivative_error`` compares gradient and
    Hessian with central differences of value and gradient (relative to
    their maxima).  Jumps are absolute maxima over interface samples.
    """
    rng = np.random.default_rng(seed)
    res = der = 0.0
    d = 1e-5
    for k, patch in enumerate(domain.patches):
        xy = patch.geometry(*rng.uniform(0.05, 0.95, size=(2, num_points)))
        x, y = xy[:, 0], xy[:, 1]
        H = sol.hessian(x, y, k)
        f = sol.source(x, y, k)
        lhs = -patch.alpha * (H[:, 0, 0] + H[:, 1, 1])
        res = max(res, float(np.max(np.abs(lhs - f)) / max(np.max(np.abs(f)), 1e-300)))
        g = sol.gradient(x, y, k)
        fd_g = np.stack([sol.value(x + d, y, k) - sol.value(x - d, y, k),
                         sol.value(x, y + d, k) - sol.value(x, y - d, k)], -1) / (2 * d)
        fd_H = np.stack([sol.gradient(x + d, y, k) - sol.gradient(x - d, y, k),
                         sol.gradient(x, y + d, k) - sol.gradient(x, y - d, k)], -1) / (2 * d)
        der = max(der,
                  float(np.max(np.abs(fd_g - g)) / max(np.max(np.abs(g)), 1.0)),
                  float(np.max(np.abs(fd_H - H)) / max(np.max(np.abs(H)), 1.0)))
    jump = flux = 0.0
    t = np.linspace(0.02, 0.98, 25)
    for iface in domain.interfaces:
        pk, pl = domain.patches[iface.k], domain.patches[iface.l]
        n, _, dk = edge_frames(pk.geometry, iface.edge_k, t)
        x, y = dk.value[:, 0], dk.value[:, 1]
        vk, vl = sol.value(x, y, iface.k), sol.value(x, y, iface.l)
        qk = pk.alpha * np.einsum("md,md->m", sol.gradient(x, y, iface.k), n)
        ql = pl.alpha * np.einsum("md,md->m", sol.gradient(x, y, iface.l), n)
        jump = max(jump, float(np.max(np.abs(vk - vl))))
        flux = max(flux, float(np.max(np.abs(qk - ql))))
    return SolutionCheck(res, der, jump, flux)
