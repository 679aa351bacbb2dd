"""Refinement and degree sweeps with manufactured solutions."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import ErrorReport, convergence_rates, error_vs_exact
from .assembly import SipgParameters, SipgSystem, assemble_system
from .domains import builtin_domain
from .exceptions import ConfigurationError, IgaError
from .solutions import ManufacturedSolution, builtin_solution
from .solver import SolverSettings, solve
from .space import MODES, DiscreteField, build_space
from .topology import MultiPatchDomain

log = logging.getLogger(__name__)

CSV_HEADER = ("level", "p", "N", "e", "rate", "seconds")


@dataclass(frozen=True)
class StudyConfig:
    """One refinement/degree sweep.

    ``domain`` is a built-in name unless ``geometry`` names a geometry file.
    ``alphas`` of None keeps the coefficients of the domain (1 for built-ins
    or the file values).  ``timings=False`` writes 0 in the seconds column
    so that repeated runs produce identical files.
    """

    domain: str = "square2"
    geometry: str | None = None
    degrees: tuple[int, ...] = (2,)
    levels: tuple[int, ...] = (1, 2, 3)
    alphas: tuple[float, ...] | None = None
    sigma0: float = 4.0
    sigma: float | None = None
    local_h: bool = False
    element_extra: int = 1
    interface_extra: int = 0
    mode: str = "dirichlet"
    solution: str = "sine"
    solver: SolverSettings = field(default_factory=SolverSettings)
    output: str | None = None
    timings: bool = True

    def __post_init__(self):
        if not self.levels or any(int(l) != l or l < 0 for l in self.levels):
            raise ConfigurationError("levels must be a non-empty list of integers >= 0")
        if list(self.levels) != sorted(set(self.levels)):
            raise ConfigurationError("levels must be strictly increasing")
        if not self.degrees or any(int(p) != p or p < 2 for p in self.degrees):
            raise ConfigurationError("degrees must be integers >= 2")
        if self.alphas is not None and any(not a > 0 for a in self.alphas):
            raise ConfigurationError("coefficients must be positive")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}; expected one of {MODES}")

    @property
    def params(self) -> SipgParameters:
        return SipgParameters(sigma0=self.sigma0, sigma=self.sigma, local_h=self.local_h,
                              element_extra=self.element_extra,
                              interface_extra=self.interface_extra)


@dataclass
class StudyRow:
    level: int
    p: int
    N: int
    e: float
    rate: float | None
    seconds: float


@dataclass
class StudyResult:
    config: StudyConfig
    rows: list[StudyRow]
    failures: dict[int, str]

    def errors(self, p: int) -> list[float]:
        return [r.e for r in self.rows if r.p == p]

    def rates(self, p: int) -> list[float]:
        return [r.rate for r in self.rows if r.p == p and r.rate is not None]


@dataclass(frozen=True)
class Solution:
    domain: MultiPatchDomain
    system: SipgSystem
    field: DiscreteField
    errors: ErrorReport


def solve_manufactured(domain: MultiPatchDomain, sol: ManufacturedSolution,
                       params: SipgParameters = SipgParameters(), mode: str = "dirichlet",
                       settings: SolverSettings = SolverSettings()) -> Solution:
    """Assemble, solve and measure the error against the exact solution.

    Zero-mean mode assumes a solution with vanishing mean and zero normal
    flux on the boundary (``cosine`` on integer rectangles).
    """
    space = build_space(domain, mode)
    K = domain.num_patches
    g = sol.boundary(K) if mode == "dirichlet" else None
    system = assemble_system(domain, space, params, sol.sources(K), g)
    x = solve(system.lhs, system.rhs, settings)
    uh = DiscreteField(space, system.expand(x))
    return Solution(domain, system, uh, error_vs_exact(domain, space, params, uh, sol))


def study_domain(config: StudyConfig, level: int, p: int) -> MultiPatchDomain:
    if config.geometry is not None:
        from .io import load_geometry
        domain = load_geometry(config.geometry, degree=p, level=level)
    else:
        domain = builtin_domain(config.domain, level, p)
    if config.alphas is not None:
        alphas = config.alphas
        if len(alphas) == 1:
            alphas = alphas * domain.num_patches
        if len(alphas) != domain.num_patches:
            raise ConfigurationError(
                f"{len(alphas)} coefficients given for {domain.num_patches} patches")
        domain = domain.with_alphas(alphas)
    return domain


def run_study(config: StudyConfig) -> StudyResult:
    """Solve on every (p, level) and collect Q_h errors and rates.

    A failing cell ends its degree column; the reason is logged and kept
    in ``failures``.
    """
    rows: list[StudyRow] = []
    failures: dict[int, str] = {}
    for p in config.degrees:
        col: list[StudyRow] = []
        for level in config.levels:
            t0 = time.perf_counter()
            try:
                domain = study_domain(config, level, p)
                sol = builtin_solution(config.solution, tuple(domain.alphas))
                res = solve_manufactured(domain, sol, config.params, config.mode, config.solver)
            except IgaError as exc:
                failures[p] = f"level {level}: {exc}"
                log.warning("degree %d aborted at level %d: %s", p, level, exc)
                break
            seconds = time.perf_counter() - t0 if config.timings else 0.0
            rate = None
            if col:
                try:
                    rate = convergence_rates([col[-1].e, res.errors.qh])[0]
                except IgaError:
                    rate = None
            col.append(StudyRow(level, p, res.field.space.N, res.errors.qh, rate, seconds))
            log.info("p=%d level=%d N=%d e=%.6e", p, level, col[-1].N, col[-1].e)
        rows.extend(col)
    result = StudyResult(config, rows, failures)
    if config.output:
        write_csv(result, config.output)
    return result


def write_csv(result: StudyResult, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in result.rows:
            w.writerow([r.level, r.p, r.N, f"{r.e:.6e}",
                        "" if r.rate is None else f"{r.rate:.6e}", f"{r.seconds:.6e}"])


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def degree_sweep(domain_name: str, level: int, degrees: Sequence[int],
                 solution: str = "sine", **kwargs) -> dict[int, float]:
    """Q_h errors for several degrees at one level."""
    cfg = StudyConfig(domain=domain_name, degrees=tuple(degrees), levels=(level,),
                      solution=solution, timings=False, **kwargs)
    res = run_study(cfg)
    return {r.p: r.e for r in res.rows}


def error_ratio(errors: Sequence[float]) -> float:
    e = np.asarray(errors, dtype=float)
    return float(e.max() / e.min())
