"""Exact reference mass matrices, percent-error statistics, mesh studies and timing."""
from __future__ import annotations

import csv
import io
import statistics
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .hex8 import Hex8, metric_polynomial
from .mesh import Mesh, mesh_validity
from .polycube import Polynomial3, integrate_cube
from .quadrature import BUILTIN_RULES, QuadratureRule, builtin_rule, mass_conventional
from .semianalytic import (
    BUILTIN_SA_RULES,
    SemiAnalyticRule,
    builtin_sa_rule,
    mass_semianalytic,
    shape_product_moments,
    shape_product_moments_float,
)

ALL_RULES = BUILTIN_RULES + BUILTIN_SA_RULES
EXCLUDE_RELATIVE = 1e-9


def _as_density(rho) -> Polynomial3:
    return rho if isinstance(rho, Polynomial3) else Polynomial3.constant(rho)


def mass_exact(h: Hex8, rho=1) -> np.ndarray:
    """Reference mass matrix ``int N_i N_j rho J`` by analytic integration.

    ``rho * J`` is expanded as a polynomial and each monomial is integrated
    against ``N_i N_j`` with exactly precomputed tables.
    """
    integrand = metric_polynomial(h).poly * _as_density(rho)
    m = np.zeros((8, 8))
    for (a, b, c), coef in integrand.items():
        m += float(coef) * shape_product_moments_float(a, b, c)
    return m


def mass_exact_rational(h: Hex8, rho=1) -> list[list[Fraction]]:
    """Same as :func:`mass_exact` but entirely in rationals (needs rational nodes and density)."""
    if h.exact_nodes is None:
        raise ValueError("element has floating-point nodes; build it from ints or Fractions")
    rho = _as_density(rho)
    if not rho.is_exact:
        raise ValueError("density must have rational coefficients")
    integrand = metric_polynomial(h).poly * rho
    out = [[Fraction(0)] * 8 for _ in range(8)]
    for (a, b, c), coef in integrand.items():
        mom = shape_product_moments(a, b, c)
        for i in range(8):
            for j in range(8):
                out[i][j] += coef * mom[i][j]
    return out


def total_mass_exact(h: Hex8, rho=1):
    return integrate_cube(metric_polynomial(h).poly * _as_density(rho))


@dataclass(frozen=True)
class EntryErrors:
    per_entry: np.ndarray  # percent, NaN where excluded
    average: float
    excluded: int


class UndefinedAverageError(ValueError):
    pass


def error_stats(est, exact) -> EntryErrors:
    """Entrywise ``|100 (est - exact) / exact|`` and its element average.

    Entries with ``|exact| < 1e-9 * max|exact|`` are left out of the average
    (and counted) instead of dividing by a vanishing reference.
    """
    est = np.asarray(est, dtype=float)
    exact = np.asarray(exact, dtype=float)
    scale = np.abs(exact).max()
    keep = np.abs(exact) >= EXCLUDE_RELATIVE * scale
    if scale == 0 or not keep.any():
        raise UndefinedAverageError("every reference entry is (near) zero; average undefined")
    pct = np.full(exact.shape, np.nan)
    pct[keep] = np.abs(100.0 * (est[keep] - exact[keep]) / exact[keep])
    return EntryErrors(pct, float(pct[keep].mean()), int((~keep).sum()))


# rules ---------------------------------------------------------------------

Rule = QuadratureRule | SemiAnalyticRule


def resolve_rule(name_or_rule) -> Rule:
    if isinstance(name_or_rule, (QuadratureRule, SemiAnalyticRule)):
        return name_or_rule
    if name_or_rule in BUILTIN_RULES:
        return builtin_rule(name_or_rule)
    if name_or_rule in BUILTIN_SA_RULES:
        return builtin_sa_rule(name_or_rule)
    raise KeyError(f"unknown rule {name_or_rule!r}; valid names: {', '.join(ALL_RULES)}")


def estimate(h: Hex8, rho, rule: Rule) -> np.ndarray:
    if isinstance(rule, SemiAnalyticRule):
        return mass_semianalytic(h, rho, rule)
    return mass_conventional(h, rho, rule)


# study ---------------------------------------------------------------------

@dataclass(frozen=True)
class RuleStats:
    rule: str
    element_avg: np.ndarray  # percent, indexed like the studied elements
    excluded: int

    @property
    def min(self) -> float:
        return float(self.element_avg.min())

    @property
    def avg(self) -> float:
        return float(self.element_avg.mean())

    @property
    def max(self) -> float:
        return float(self.element_avg.max())


@dataclass(frozen=True)
class ErrorReport:
    label: str
    n_elements: int
    rules: dict[str, RuleStats]
    elements: list[int] = field(default_factory=list)
    negative_elements: list[int] = field(default_factory=list)

    def __getitem__(self, rule: str) -> RuleStats:
        return self.rules[rule]


def study(m: Mesh, rho=1, rules: Sequence = ("g1", "g4", "g6", "cmd", "lmd"), *,
          policy: str = "warn", grid_n: int = 11, threads: int = 1) -> ErrorReport:
    """Per-element average percent errors of each rule against :func:`mass_exact`.

    ``policy`` governs elements whose metric goes negative somewhere:
    ``"warn"`` keeps them and warns, ``"keep"`` keeps them silently,
    ``"drop"`` leaves them out.
    """
    if m.n_elements == 0:
        raise ValueError("cannot study an empty mesh")
    if policy not in ("warn", "keep", "drop"):
        raise ValueError(f"unknown validity policy {policy!r}")
    rho = _as_density(rho)
    resolved = [resolve_rule(r) for r in rules]
    negative = mesh_validity(m, grid_n).negative_elements
    elements = list(range(m.n_elements))
    if negative and policy == "warn":
        warnings.warn(f"{len(negative)} element(s) with negative metric kept in the study: {negative}", RuntimeWarning)
    if policy == "drop":
        elements = [k for k in elements if k not in set(negative)]
        if not elements:
            raise ValueError("every element was dropped by the validity policy")

    def one(k):
        h = m.element(k)
        exact = mass_exact(h, rho)
        out = []
        for r in resolved:
            e = error_stats(estimate(h, rho, r), exact)
            out.append((e.average, e.excluded))
        return out

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(one, elements))
    else:
        rows = [one(k) for k in elements]

    stats = {}
    for c, r in enumerate(resolved):
        avgs = np.array([row[c][0] for row in rows])
        stats[r.name] = RuleStats(r.name, avgs, int(sum(row[c][1] for row in rows)))
    return ErrorReport(m.label, len(elements), stats, elements, negative)


def report_csv(report: ErrorReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "rule", "n_elements", "avg_pct", "min_pct", "max_pct", "excluded"])
    for s in report.rules.values():
        w.writerow([report.label, s.rule, report.n_elements, f"{s.avg:.6g}", f"{s.min:.6g}", f"{s.max:.6g}", s.excluded])
    return buf.getvalue()


def report_markdown(report: ErrorReport) -> str:
    lines = [
        f"**{report.label}** ({report.n_elements} elements"
        + (f", {len(report.negative_elements)} with negative metric" if report.negative_elements else "")
        + ")",
        "",
        "| rule | avg % | max % | min % | excluded |",
        "|---|---:|---:|---:|---:|",
    ]
    for s in report.rules.values():
        lines.append(f"| {s.rule} | {s.avg:.4g} | {s.max:.4g} | {s.min:.4g} | {s.excluded} |")
    return "\n".join(lines) + "\n"


# timing --------------------------------------------------------------------

@dataclass(frozen=True)
class BenchRecord:
    rule: str
    n_points: int
    stored_weights: int
    seconds_per_element: float
    repeat: int


def bench(m: Mesh, rules: Sequence = ("g4", "lmd"), repeat: int = 20, rho=1,
          clock: Callable[[], float] = time.perf_counter) -> list[BenchRecord]:
    """Median wall time per element of assembling every element of ``m`` with each rule."""
    if repeat < 1:
        raise ValueError("repeat must be at least 1")
    rho = _as_density(rho)
    hexes = m.hexes()
    if not hexes:
        raise ValueError("cannot time an empty mesh")
    n = len(hexes)
    out = []
    for r in (resolve_rule(r) for r in rules):
        estimate(hexes[0], rho, r)  # warm caches
        samples = []
        for _ in range(repeat):
            t0 = clock()
            for h in hexes:
                estimate(h, rho, r)
            samples.append((clock() - t0) / n)
        out.append(BenchRecord(r.name, r.n_points, r.stored_weights, statistics.median(samples), repeat))
    return out


def bench_table(records: Sequence[BenchRecord]) -> str:
    lines = ["| rule | points | stored weights | us / element |", "|---|---:|---:|---:|"]
    for b in records:
        lines.append(f"| {b.rule} | {b.n_points} | {b.stored_weights} | {1e6 * b.seconds_per_element:.2f} |")
    return "\n".join(lines) + "\n"
