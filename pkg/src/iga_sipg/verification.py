"""Numerical acceptance checks of the discretization.

Each check returns a :class:`CheckResult` with a one-line summary.  A
check passes when its numerical condition holds and it finished within
its time budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analysis import (
    Projector1D,
    convergence_rates,
    error_vs_exact,
    fitted_slope,
    project_1d,
    project_patch,
    unit_square_errors,
)
from .assembly import (
    SipgParameters,
    assemble_form_action,
    assemble_load,
    assemble_matrix,
    assemble_penalty,
    assemble_qh_gram,
    assemble_volume,
)
from .domains import BUILTIN_DOMAINS, builtin_domain
from .solutions import builtin_solution
from .solver import extremal_rayleigh
from .space import build_space, interpolate_field
from .splines import SplineSpace1D, TensorSplineSpace, eval_spline
from .study import solve_manufactured


@dataclass(frozen=True)
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] criterion {self.number:2d} {self.title}: {self.detail} "
                f"({self.seconds:.1f}s of {self.budget:.0f}s)")


def _run(number: int, title: str, budget: float, body: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = body()
    dt = time.perf_counter() - t0
    return CheckResult(number, title, bool(ok) and dt <= budget, detail, dt, budget)


# ---------------------------------------------------------------------------

def check_symmetry() -> CheckResult:
    """A_h symmetric to 1e-12 on every built-in domain (level 2, p = 3), < 5 s each."""
    def body():
        worst, slowest = 0.0, 0.0
        for name in BUILTIN_DOMAINS:
            t0 = time.perf_counter()
            d = builtin_domain(name, 2, 3)
            A = assemble_matrix(d, build_space(d))
            F = A.to_csr()
            stored = abs(F - F.T).max() / abs(F).max()
            worst = max(worst, A.asymmetry, stored)
            slowest = max(slowest, time.perf_counter() - t0)
        return worst <= 1e-12 and slowest < 5.0, \
            f"max asymmetry {worst:.2e}, slowest domain {slowest:.2f}s"
    return _run(1, "symmetry", 6 * 5.0, body)


def coercivity_bounds(name: str, p: int, level: int, params=SipgParameters()) -> tuple[float, float]:
    d = builtin_domain(name, level, p)
    s = build_space(d)
    A = assemble_matrix(d, s, params).submatrix(s.free)
    Q = assemble_qh_gram(d, s, params).submatrix(s.free)
    return extremal_rayleigh(A, Q, "min"), extremal_rayleigh(A, Q, "max")


def check_coercivity() -> CheckResult:
    def body():
        lo, hi, drift = np.inf, 0.0, 0.0
        for name in ("square2", "square2-nonmatch"):
            for p in (2, 3, 4):
                b1 = coercivity_bounds(name, p, 1)
                b2 = coercivity_bounds(name, p, 2)
                lo = min(lo, b1[0], b2[0])
                hi = max(hi, b1[1], b2[1])
                drift = max(drift, abs(b1[0] - b2[0]) / max(b1[0], b2[0]))
        return lo >= 0.25 and hi <= 2.0 and drift < 0.25, \
            f"lambda_min {lo:.4f} >= 0.25, lambda_max {hi:.4f} <= 2, level drift {drift:.1%} < 25%"
    return _run(2, "coercivity/boundedness", 60.0, body)


def consistency_residual(level: int, p: int, raise_by: int) -> float:
    sol = builtin_solution("sine")
    d = builtin_domain("square2", level, p)
    s = build_space(d)
    params = SipgParameters(element_extra=1 + raise_by, interface_extra=raise_by)
    r = assemble_form_action(d, s, params, sol) - assemble_load(d, s, sol.sources(2), params.element_extra)
    return float(np.abs(r[s.free]).max())


def check_consistency() -> CheckResult:
    def body():
        worst = np.inf
        parts = []
        for level, p in ((1, 2), (1, 3), (2, 2)):
            r0, r3 = consistency_residual(level, p, 0), consistency_residual(level, p, 3)
            ratio = r0 / max(r3, 1e-300)
            worst = min(worst, ratio)
            parts.append(f"{r0:.1e}->{r3:.1e}")
        return worst >= 10.0, f"residual drops {', '.join(parts)}; smallest factor {worst:.1e} >= 10"
    return _run(3, "consistency", 30.0, body)


def check_h_convergence() -> CheckResult:
    def body():
        sol = builtin_solution("sine")
        errs = [solve_manufactured(builtin_domain("square2-nonmatch", l, 2), sol).errors.qh
                for l in range(1, 6)]
        rates = convergence_rates(errs)
        ok = min(rates[-2:]) >= 3.5 and min(rates) >= 2.0
        return ok, "rates " + ", ".join(f"{r:.2f}" for r in rates) + " (last two >= 3.5)"
    return _run(4, "h-convergence", 120.0, body)


def check_p_robustness() -> CheckResult:
    def body():
        sol = builtin_solution("sine")
        errs = {p: solve_manufactured(builtin_domain("square2", 3, p), sol).errors.qh
                for p in (2, 4, 6, 8)}
        ratio = max(errs.values()) / min(errs.values())
        listing = ", ".join(f"p={p}: {e:.3e}" for p, e in errs.items())
        return ratio <= 3.0, f"{listing}; max/min {ratio:.3e} <= 3"
    return _run(5, "p-robustness", 180.0, body)


def alpha_study(ratio: float, levels=range(1, 5), p: int = 2) -> list[float]:
    """Q_h error of the alpha-jump solution normalized by ``|u|_{H^2_alpha}``."""
    out = []
    for level in levels:
        alphas = (1.0, ratio)
        d = builtin_domain("square2", level, p, alphas)
        sol = builtin_solution("alpha-jump", alphas)
        res = solve_manufactured(d, sol)
        norm = error_vs_exact(d, res.field.space, SipgParameters(), None, sol).broken_h2_alpha
        out.append(res.errors.qh / norm)
    return out


def check_alpha_robustness() -> CheckResult:
    def body():
        table = {a: alpha_study(a) for a in (1.0, 1e3, 1e6)}
        E = np.array(list(table.values()))
        R = np.array([convergence_rates(e) for e in E])
        spread = float(np.max(E.max(axis=0) / E.min(axis=0)))
        rate_dev = float(np.max((R.max(axis=0) - R.min(axis=0)) / R.min(axis=0)))
        return spread <= 2.0 and rate_dev <= 0.10, \
            f"normalized error spread {spread:.3f} <= 2, rate deviation {rate_dev:.2%} <= 10%"
    return _run(6, "alpha-robustness", 120.0, body)


def check_patch_test() -> CheckResult:
    def body():
        worst = 0.0
        for name in ("square1", "square2"):
            for p in (2, 3):
                d = builtin_domain(name, 1, p)
                worst = max(worst, solve_manufactured(d, builtin_solution("poly")).errors.qh)
        return worst <= 1e-8, f"max Q_h error {worst:.2e} <= 1e-8"
    return _run(7, "patch test", 10.0, body)


SMOOTH_1D = (
    (lambda t: np.sin(np.pi * t), lambda t: np.pi * np.cos(np.pi * t)),
    (lambda t: np.exp(t), lambda t: np.exp(t)),
    (lambda t: 1.0 / (1.0 + t * t), lambda t: -2 * t / (1.0 + t * t) ** 2),
    (lambda t: np.cos(3 * t) + t**7, lambda t: -3 * np.sin(3 * t) + 7 * t**6),
    (lambda t: np.log(2.0 + t), lambda t: 1.0 / (2.0 + t)),
)


def projector_identities(p: int, n: int, u: Callable) -> tuple[float, float]:
    """Endpoint interpolation error and ``|(u - Pi u, 1)|`` of the 1D projector."""
    space = SplineSpace1D(p, n)
    proj = Projector1D(space)
    c = project_1d(proj, u)
    ends = np.abs(eval_spline(space, c, [0.0, 1.0]) - u(np.array([0.0, 1.0]))).max()
    nodes, weights = proj.nodes, proj.weights
    mean = abs(np.sum(weights * (u(nodes) - eval_spline(space, c, nodes))))
    return float(ends), float(mean)


def projector_h1_slope(p: int = 2, ns=(4, 8, 16, 32)) -> float:
    u = lambda x, y: np.sin(np.pi * x) * np.exp(y) + x * x * y
    grad = lambda x, y: (np.pi * np.cos(np.pi * x) * np.exp(y) + 2 * x * y,
                         np.sin(np.pi * x) * np.exp(y) + x * x)
    errs = []
    for n in ns:
        space = TensorSplineSpace.uniform(p, n)
        errs.append(unit_square_errors(space, project_patch(space, u), u, grad).h1_seminorm)
    return fitted_slope([1.0 / n for n in ns], errs)


def check_projectors() -> CheckResult:
    def body():
        ends = mean = 0.0
        for p in range(2, 7):
            for u, _ in SMOOTH_1D:
                e, m = projector_identities(p, 8, u)
                ends, mean = max(ends, e), max(mean, m)
        slope = min(projector_h1_slope(2), projector_h1_slope(3))
        ok = ends <= 1e-11 and mean <= 1e-10 and slope >= 0.9
        return ok, (f"endpoint error {ends:.1e} <= 1e-11, mean defect {mean:.1e} <= 1e-10, "
                    f"H1 slope {slope:.2f} >= 0.9")
    return _run(8, "projector identities", 30.0, body)


def random_continuous_functions(num: int = 10, seed: int = 0) -> list[Callable]:
    rng = np.random.default_rng(seed)
    funs = []
    for _ in range(num):
        a, b, c, d, e = rng.uniform(-2, 2, size=5)
        funs.append(lambda x, y, a=a, b=b, c=c, d=d, e=e:
                    np.sin(a * x + b * y + c) + d * x * y + np.exp(e * x * y / 4))
    return funs


def check_jump_annihilation() -> CheckResult:
    def body():
        worst = 0.0
        for p in (2, 3):
            d = builtin_domain("square2", 1, p)
            s = build_space(d)
            C = assemble_penalty(d, s)
            V = assemble_volume(d, s)
            for f in random_continuous_functions():
                v = interpolate_field(s, f).coefs
                worst = max(worst, C.quadratic_form(v) / V.quadratic_form(v))
        return worst <= 1e-10, f"max penalty / H1 ratio {worst:.1e} <= 1e-10"
    return _run(9, "jump annihilation", 10.0, body)


# ---------------------------------------------------------------------------
# brute-force oracle for translated unit squares

def _oracle_basis(knots: np.ndarray, p: int, i: int, t: float) -> float:
    """Recursive Cox-de Boor value of B_{i,p}; right end closed on the last span."""
    if p == 0:
        a, b = knots[i], knots[i + 1]
        if a < b and (a <= t < b or (t == knots[-1] and b == knots[-1])):
            return 1.0
        return 0.0
    out = 0.0
    da = knots[i + p] - knots[i]
    if da > 0:
        out += (t - knots[i]) / da * _oracle_basis(knots, p - 1, i, t)
    db = knots[i + p + 1] - knots[i + 1]
    if db > 0:
        out += (knots[i + p + 1] - t) / db * _oracle_basis(knots, p - 1, i + 1, t)
    return out


def _oracle_tables(p: int, n: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    knots = np.concatenate([np.zeros(p), np.linspace(0, 1, n + 1), np.ones(p)])
    dim = n + p
    B = np.array([[_oracle_basis(knots, p, i, x) for i in range(dim)] for x in t])
    # derivative from the degree p-1 basis
    D = np.zeros_like(B)
    for r, x in enumerate(t):
        for i in range(dim):
            v = 0.0
            if knots[i + p] > knots[i]:
                v += p / (knots[i + p] - knots[i]) * _oracle_basis(knots, p - 1, i, x)
            if knots[i + p + 1] > knots[i + 1]:
                v -= p / (knots[i + p + 1] - knots[i + 1]) * _oracle_basis(knots, p - 1, i + 1, x)
            D[r, i] = v
    return B, D


def oracle_matrix(p: int, n: int, alphas=(1.0, 1.0), sigma0: float = 4.0) -> np.ndarray:
    """Dense SIPG matrix of the two unit squares ``[0,1]^2`` and ``[1,2] x [0,1]``.

    Every integral sums over all basis functions with 20 Gauss points per
    knot span; the interface is the line ``x = 1`` with normal ``(1, 0)``.
    """
    g, w = np.polynomial.legendre.leggauss(20)
    br = np.linspace(0, 1, n + 1)
    t = np.concatenate([(a + b) / 2 + (b - a) / 2 * g for a, b in zip(br[:-1], br[1:])])
    wt = np.concatenate([(b - a) / 2 * w for a, b in zip(br[:-1], br[1:])])
    B, D = _oracle_tables(p, n, t)
    dim = n + p
    nloc = dim * dim
    # tensor index j * dim + i
    Bx, By = B, B
    gx = np.einsum("qi,rj->qrji", D, By).reshape(len(t), len(t), nloc)
    gy = np.einsum("qi,rj->qrji", Bx, D).reshape(len(t), len(t), nloc)
    W = np.outer(wt, wt)
    K = np.einsum("qr,qra,qrb->ab", W, gx, gx) + np.einsum("qr,qra,qrb->ab", W, gy, gy)
    N = 2 * nloc
    A = np.zeros((N, N))
    A[:nloc, :nloc] = alphas[0] * K
    A[nloc:, nloc:] = alphas[1] * K
    # traces on x = 1 (patch 0, x-index dim-1) and x = 0 (patch 1, x-index 0)
    e0 = np.array([_oracle_basis(np.concatenate([np.zeros(p), br, np.ones(p)]), p, i, 0.0)
                   for i in range(dim)])
    e1 = np.array([_oracle_basis(np.concatenate([np.zeros(p), br, np.ones(p)]), p, i, 1.0)
                   for i in range(dim)])
    _, Dend = _oracle_tables(p, n, np.array([0.0, 1.0]))
    jump = np.zeros((len(t), N))
    flux = np.zeros((len(t), N))
    for j in range(dim):
        for i in range(dim):
            jump[:, j * dim + i] = e1[i] * B[:, j]
            jump[:, nloc + j * dim + i] = -e0[i] * B[:, j]
            flux[:, j * dim + i] = 0.5 * alphas[0] * Dend[1, i] * B[:, j]
            flux[:, nloc + j * dim + i] = 0.5 * alphas[1] * Dend[0, i] * B[:, j]
    Bm = np.einsum("q,qi,qj->ij", wt, flux, jump)
    sigma = sigma0 * p * p
    C = sigma / (1.0 / n) * max(alphas) * np.einsum("q,qi,qj->ij", wt, jump, jump)
    return A - Bm - Bm.T + C


def check_oracle() -> CheckResult:
    def body():
        d = builtin_domain("square2", 0, 2)
        A = assemble_matrix(d, build_space(d)).toarray()
        ref = oracle_matrix(2, 2)
        diff = float(np.abs(A - ref).max())
        return diff <= 1e-10, f"max entry difference {diff:.1e} <= 1e-10 (N = {A.shape[0]})"
    return _run(10, "oracle equivalence", 30.0, body)


CHECKS = (check_symmetry, check_coercivity, check_consistency, check_h_convergence,
          check_p_robustness, check_alpha_robustness, check_patch_test, check_projectors,
          check_jump_annihilation, check_oracle)


def run_all(callback: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        res = check()
        if callback is not None:
            callback(res)
        results.append(res)
    return results
