"""Eight-node trilinear brick: shape functions, Jacobian determinant, metric polynomial.

Node ordering follows the ABAQUS C3D8 convention::

    node   1   2   3   4   5   6   7   8
    xi    -1  +1  +1  -1  -1  +1  +1  -1
    eta   -1  -1  +1  +1  -1  -1  +1  +1
    zeta  -1  -1  -1  -1  +1  +1  +1  +1
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational

import numpy as np

from .polycube import ETA, ONE, XI, ZETA, Polynomial3

CORNERS = np.array(
    [
        [-1, -1, -1],
        [+1, -1, -1],
        [+1, +1, -1],
        [-1, +1, -1],
        [-1, -1, +1],
        [+1, -1, +1],
        [+1, +1, +1],
        [-1, +1, +1],
    ],
    dtype=float,
)

# The 20 monomials a trilinear brick's metric can contain.
METRIC_MONOMIALS: tuple[tuple[int, int, int], ...] = (
    (0, 0, 0),
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (1, 1, 0), (1, 0, 1), (0, 1, 1), (2, 0, 0), (0, 2, 0), (0, 0, 2),
    (1, 1, 1), (2, 1, 0), (1, 2, 0), (2, 0, 1), (0, 2, 1), (1, 0, 2), (0, 1, 2),
    (2, 1, 1), (1, 2, 1), (1, 1, 2),
)

_METRIC_CLEANUP = 1e-12


def _shape_polynomials() -> tuple[Polynomial3, ...]:
    out = []
    for s, t, u in CORNERS.astype(int):
        out.append((ONE + s * XI) * (ONE + t * ETA) * (ONE + u * ZETA) / 8)
    return tuple(out)


SHAPE_POLYNOMIALS = _shape_polynomials()


def _as_points(x) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


def shape_values(x) -> np.ndarray:
    """Shape function values ``N_1..N_8`` at one point ``(3,)`` or many ``(n, 3)``."""
    pts, single = _as_points(x)
    f = 1.0 + pts[:, None, :] * CORNERS[None, :, :]
    out = f.prod(axis=2) / 8.0
    return out[0] if single else out


def shape_gradients(x) -> np.ndarray:
    """Derivatives ``dN_i/d(xi, eta, zeta)``; shape ``(8, 3)`` or ``(n, 8, 3)``."""
    pts, single = _as_points(x)
    f = 1.0 + pts[:, None, :] * CORNERS[None, :, :]
    out = np.empty((len(pts), 8, 3))
    out[..., 0] = CORNERS[:, 0] * f[..., 1] * f[..., 2] / 8.0
    out[..., 1] = CORNERS[:, 1] * f[..., 0] * f[..., 2] / 8.0
    out[..., 2] = CORNERS[:, 2] * f[..., 0] * f[..., 1] / 8.0
    return out[0] if single else out


def _is_rational(v) -> bool:
    return isinstance(v, (int, Rational)) and not isinstance(v, bool)


@dataclass(frozen=True, eq=False)
class Hex8:
    """Brick element given by its eight nodal positions.

    Nodes given as ints or Fractions are also kept exactly, so that the
    metric polynomial (and from it the exact mass matrix) can be formed in
    rational arithmetic.  Inverted or degenerate elements are allowed.
    """

    nodes: np.ndarray
    exact_nodes: tuple | None = None

    def __init__(self, nodes):
        rows = [tuple(r) for r in nodes] if not isinstance(nodes, np.ndarray) else None
        arr = np.array(nodes, dtype=float)
        if arr.shape != (8, 3):
            raise ValueError(f"Hex8 needs 8 nodes of 3 coordinates, got shape {arr.shape}")
        arr.setflags(write=False)
        exact = None
        if rows is not None and all(_is_rational(v) for r in rows for v in r):
            exact = tuple(tuple(Fraction(v) for v in r) for r in rows)
        object.__setattr__(self, "nodes", arr)
        object.__setattr__(self, "exact_nodes", exact)

    @classmethod
    def reference(cls) -> "Hex8":
        return cls([[int(v) for v in c] for c in CORNERS])

    @classmethod
    def box(cls, lo=(0, 0, 0), hi=(1, 1, 1)) -> "Hex8":
        """Axis-aligned box; exact if the bounds are rational."""
        nodes = []
        for c in CORNERS:
            nodes.append([lo[k] if c[k] < 0 else hi[k] for k in range(3)])
        return cls(nodes)

    @classmethod
    def parallelepiped(cls, origin, u, v, w) -> "Hex8":
        """Parallelepiped spanned by edge vectors ``u, v, w`` from node 1."""
        nodes = []
        for c in CORNERS:
            a, b, d = ((int(k) + 1) // 2 for k in c)
            nodes.append([origin[m] + a * u[m] + b * v[m] + d * w[m] for m in range(3)])
        return cls(nodes)

    def map_points(self, x) -> np.ndarray:
        """Global positions ``X = N_i X_i`` of natural points."""
        return shape_values(x) @ self.nodes

    @cached_property
    def metric(self) -> "MetricPolynomial":
        return metric_polynomial(self)


def metric_at(h: Hex8, x) -> np.ndarray | float:
    """Jacobian determinant at one point (returns float) or at ``(n, 3)`` points."""
    pts, single = _as_points(x)
    out = metric_from_gradients(h.nodes, shape_gradients(pts))
    return float(out[0]) if single else out


def metric_from_gradients(nodes: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Determinants of ``X_,xi  X_,eta  X_,zeta`` given precomputed ``(n, 8, 3)`` gradients."""
    # rows of j[p] are X_,xi  X_,eta  X_,zeta; det of the transpose is the same
    return np.linalg.det(np.matmul(grads.transpose(0, 2, 1), nodes))


@dataclass(frozen=True)
class MetricPolynomial:
    """Expanded Jacobian determinant of one element."""

    poly: Polynomial3

    @property
    def coefficients(self) -> tuple:
        """The 20 coefficients in the order of :data:`METRIC_MONOMIALS`."""
        return tuple(self.poly.coefficient(*m) for m in METRIC_MONOMIALS)

    def __call__(self, xi, eta=None, zeta=None):
        return self.poly(xi, eta, zeta)


def _det3(m) -> Polynomial3:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


_SHAPE_GRADIENT_POLYS = tuple(
    tuple(n.derivative(a) for a in range(3)) for n in SHAPE_POLYNOMIALS
)


def metric_polynomial(h: Hex8) -> MetricPolynomial:
    """Symbolic expansion of the Jacobian determinant.

    Exact when the element was built from rational coordinates.  On the float
    path, cancellation is only up to round-off, so coefficients below 1e-12
    of the largest one are dropped.
    """
    exact = h.exact_nodes is not None
    coords = h.exact_nodes if exact else h.nodes.tolist()
    jac = [[Polynomial3() for _ in range(3)] for _ in range(3)]
    for i in range(8):
        for m in range(3):
            x = coords[i][m]
            if x == 0:
                continue
            for a in range(3):
                jac[m][a] = jac[m][a] + _SHAPE_GRADIENT_POLYS[i][a] * x
    det = _det3(jac)
    if exact:
        return MetricPolynomial(det)
    allowed = set(METRIC_MONOMIALS)
    scale = max((abs(c) for c in det.terms.values()), default=0.0)
    tol = _METRIC_CLEANUP * max(scale, 1e-300)
    kept = {}
    for e, c in det.items():
        if abs(c) <= tol:
            continue
        if e not in allowed:
            raise ArithmeticError(f"metric monomial {e} did not cancel (coefficient {c!r})")
        kept[e] = c
    return MetricPolynomial(Polynomial3(kept))


@dataclass(frozen=True)
class ValidityScan:
    min_J: float
    argmin: tuple[float, float, float]
    negative_count: int
    samples: int

    @property
    def valid(self) -> bool:
        return self.negative_count == 0 and self.min_J > 0


def lattice(grid_n: int) -> np.ndarray:
    """Uniform ``grid_n^3`` lattice over ``[-1, 1]^3``, endpoints included."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    t = np.linspace(-1.0, 1.0, grid_n)
    g = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1)
    return g.reshape(-1, 3)


_LATTICE_GRADIENTS: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _lattice_with_gradients(grid_n: int):
    if grid_n not in _LATTICE_GRADIENTS:
        pts = lattice(grid_n)
        _LATTICE_GRADIENTS[grid_n] = (pts, shape_gradients(pts))
    return _LATTICE_GRADIENTS[grid_n]


def validity_scan(h: Hex8, grid_n: int = 11) -> ValidityScan:
    """Sample the metric on a lattice; report its minimum and negative samples."""
    pts, grads = _lattice_with_gradients(grid_n)
    J = metric_from_gradients(h.nodes, grads)
    k = int(np.argmin(J))
    return ValidityScan(
        min_J=float(J[k]),
        argmin=tuple(float(v) for v in pts[k]),
        negative_count=int(np.count_nonzero(J < 0)),
        samples=len(pts),
    )
