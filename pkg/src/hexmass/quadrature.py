"""Conventional cubature on the reference cube and mass assembly with scalar weights."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .hex8 import Hex8, metric_from_gradients, shape_gradients, shape_values
from .polycube import Polynomial3, poly_eval_points

BUILTIN_RULES = ("g1", "g4", "g6", "tensor2", "tensor3", "tensor4")


class UnknownRuleError(KeyError):
    def __str__(self):
        return str(self.args[0])


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    name: str
    points: np.ndarray
    weights: np.ndarray
    nominal_degree: int = -1
    notes: str = field(default="", compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if len(pts) != len(w):
            raise ValueError(f"rule {self.name!r}: {len(pts)} points but {len(w)} weights")
        if np.any(np.abs(pts) > 1.0 + 1e-14):
            raise ValueError(f"rule {self.name!r}: points must lie in [-1, 1]^3")
        if abs(w.sum() - 8.0) > 1e-12:
            raise ValueError(f"rule {self.name!r}: weights sum to {w.sum()!r}, expected 8")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n_points(self) -> int:
        return len(self.weights)

    @property
    def stored_weights(self) -> int:
        # w_p plus N_i at every point
        return self.n_points + 8 * self.n_points

    @cached_property
    def shape_values(self) -> np.ndarray:
        return shape_values(self.points)

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        return shape_gradients(self.points)


def gauss_tensor_rule(n: int) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(n)
    g = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    wg = np.einsum("i,j,k->ijk", w, w, w).reshape(-1)
    return QuadratureRule(f"tensor{n}", g, wg, nominal_degree=2 * n - 1)


def tetrahedral_four_point_rule() -> QuadratureRule:
    """Degree-2 rule on the tetrahedral pattern ``(a, a, a)``, ``(a, -a, -a)``,
    ``(-a, a, -a)``, ``(-a, -a, a)`` with ``a = 1/sqrt(3)`` and weight 2.

    Not the ``g4`` of the rule registry; kept for comparison since it is a
    common alternative with the same point count.
    """
    a = 1.0 / np.sqrt(3.0)
    pts = a * np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return QuadratureRule("g4-tet", pts, [2.0] * 4, nominal_degree=2)


def builtin_rule(name: str) -> QuadratureRule:
    """Look up one of :data:`BUILTIN_RULES`.

    ``g4`` is Stroud's degree-2 four-point rule for the cube: weight 2 at
    ``(+-r, 0, -s)`` and ``(0, +-r, +s)`` with ``r = sqrt(2/3)``,
    ``s = 1/sqrt(3)`` (exact surds).  ``g6`` puts weight 4/3 at the six face
    centres and is exact to degree 3.  ``tensorN`` is the ``N^3`` Gauss-Legendre
    product rule, exact to degree ``2N - 1``.
    """
    if name == "g1":
        return QuadratureRule("g1", [[0.0, 0.0, 0.0]], [8.0], nominal_degree=1)
    if name == "g4":
        r, s = np.sqrt(2.0 / 3.0), 1.0 / np.sqrt(3.0)
        pts = [[r, 0.0, -s], [-r, 0.0, -s], [0.0, r, s], [0.0, -r, s]]
        return QuadratureRule("g4", pts, [2.0] * 4, nominal_degree=2)
    if name == "g6":
        pts = np.vstack([np.eye(3), -np.eye(3)])
        return QuadratureRule("g6", pts, [4.0 / 3.0] * 6, nominal_degree=3)
    if name.startswith("tensor") and name in BUILTIN_RULES:
        return gauss_tensor_rule(int(name[len("tensor"):]))
    raise UnknownRuleError(f"unknown quadrature rule {name!r}; valid names: {', '.join(BUILTIN_RULES)}")


def rule_from_dict(data: dict) -> QuadratureRule:
    try:
        return QuadratureRule(
            str(data["name"]),
            data["points"],
            data["weights"],
            nominal_degree=int(data.get("nominal_degree", -1)),
        )
    except KeyError as exc:
        raise ValueError(f"rule file lacks field {exc.args[0]!r}") from None


def load_rule(path) -> QuadratureRule:
    """Read a user rule from JSON ``{"name", "points": [[xi, eta, zeta], ...], "weights"}``."""
    return rule_from_dict(json.loads(Path(path).read_text()))


def rule_to_dict(rule: QuadratureRule) -> dict:
    return {
        "name": rule.name,
        "points": rule.points.tolist(),
        "weights": rule.weights.tolist(),
        "nominal_degree": rule.nominal_degree,
    }


def apply_rule(r: QuadratureRule, p: Polynomial3) -> float:
    return float(np.dot(r.weights, poly_eval_points(p, r.points)))


def density_at(rho, points: np.ndarray) -> np.ndarray:
    if isinstance(rho, Polynomial3):
        if len(rho) == 1 and rho.degrees == (0, 0, 0):
            return np.full(len(points), float(rho.coefficient(0, 0, 0)))
        return poly_eval_points(rho, points)
    return np.full(len(points), float(rho))


_LOWER = np.tril_indices(8, -1)


def symmetrize_upper(m: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one so ``m`` is symmetric bit for bit."""
    out = m.copy()
    out[_LOWER] = m.T[_LOWER]
    return out


def mass_conventional(h: Hex8, rho, r: QuadratureRule) -> np.ndarray:
    """``M_ij = sum_p w_p N_i N_j rho J`` at the rule points."""
    rv = density_at(rho, r.points)
    if np.any(rv <= 0):
        warnings.warn(f"density is not positive at every point of rule {r.name!r}", RuntimeWarning)
    J = metric_from_gradients(h.nodes, r.shape_gradients)
    N = r.shape_values
    m = (N.T * (r.weights * rv * J)) @ N
    return symmetrize_upper(m)
