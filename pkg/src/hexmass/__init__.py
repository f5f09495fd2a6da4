"""Consistent mass matrices of 8-node hexahedra by cubature and by semi-analytical rules."""
from .analysis import (
    BenchRecord,
    ErrorReport,
    bench,
    bench_table,
    error_stats,
    estimate,
    mass_exact,
    mass_exact_rational,
    report_csv,
    report_markdown,
    resolve_rule,
    study,
)
from .hex8 import Hex8, metric_at, metric_polynomial, shape_gradients, shape_values, validity_scan
from .mesh import AnnulusSpec, GridSpec, Mesh, PerturbedSpec, generate, mesh_validity, parse_inp, read_mesh
from .polycube import ETA, ONE, XI, ZETA, Polynomial3, integrate_cube, monomial_integral, parse_polynomial
from .quadrature import QuadratureRule, apply_rule, builtin_rule, mass_conventional
from .semianalytic import (
    SemiAnalyticRule,
    UnisolvenceError,
    builtin_sa_rule,
    derive_rule,
    lump,
    mass_semianalytic,
)

__version__ = "0.1.0"
