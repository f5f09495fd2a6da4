"""Hexahedral meshes: ABAQUS ``.inp`` ingestion, JSON I/O, generators and validity screening."""
from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .hex8 import Hex8, validity_scan


class MeshError(ValueError):
    pass


class InpParseError(MeshError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InpWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    """Nodes (dense 0-based ids), C3D8-ordered connectivity and a label.

    ``meta`` carries provenance such as the original ``.inp`` node ids or the
    generator and PRNG seed.
    """

    nodes: np.ndarray
    elements: np.ndarray
    label: str = ""
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).reshape(-1, 3)
        elements = np.array(self.elements, dtype=np.int64).reshape(-1, 8)
        if elements.size:
            if elements.min() < 0 or elements.max() >= len(nodes):
                bad = int(np.argmax((elements < 0).any(axis=1) | (elements >= len(nodes)).any(axis=1)))
                raise MeshError(
                    f"element {bad} references a node index outside 0..{len(nodes) - 1}"
                )
            srt = np.sort(elements, axis=1)
            dup = (srt[:, 1:] == srt[:, :-1]).any(axis=1)
            if dup.any():
                raise MeshError(f"element {int(np.argmax(dup))} repeats a node")
        nodes.setflags(write=False)
        elements.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def element(self, k: int) -> Hex8:
        return Hex8(self.nodes[self.elements[k]])

    def hexes(self) -> list[Hex8]:
        return [self.element(k) for k in range(self.n_elements)]

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.elements, other.elements)
            and dict(self.meta) == dict(other.meta)
        )


# JSON ----------------------------------------------------------------------

def mesh_to_dict(m: Mesh) -> dict:
    out = {
        "label": m.label,
        "nodes": m.nodes.tolist(),
        "elements": m.elements.tolist(),
    }
    if m.meta:
        out["meta"] = dict(m.meta)
    return out


def mesh_from_dict(data: dict) -> Mesh:
    if not isinstance(data, dict) or "nodes" not in data or "elements" not in data:
        raise MeshError("mesh JSON needs 'nodes' and 'elements'")
    nodes = data["nodes"]
    elements = data["elements"]
    if any(len(n) != 3 for n in nodes):
        raise MeshError("every node needs three coordinates")
    if any(len(e) != 8 for e in elements):
        raise MeshError("every element needs eight node indices")
    return Mesh(nodes, elements, str(data.get("label", "")), data.get("meta", {}))


def dumps_mesh(m: Mesh) -> str:
    return json.dumps(mesh_to_dict(m))


def loads_mesh(text: str) -> Mesh:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeshError(f"malformed mesh JSON: {exc}") from None
    return mesh_from_dict(data)


def read_mesh(path) -> Mesh:
    """Load a mesh, choosing the reader from the extension (``.inp`` or ``.json``)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".inp":
        return parse_inp(text, label=path.stem)
    if path.suffix.lower() == ".json":
        return loads_mesh(text)
    raise MeshError(f"cannot tell the mesh format of {path.name!r} (expected .inp or .json)")


def write_mesh(m: Mesh, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".inp":
        path.write_text(to_inp(m))
    else:
        path.write_text(dumps_mesh(m))


# ABAQUS .inp ---------------------------------------------------------------

_FORTRAN_EXP = re.compile(r"(?<=[0-9.])[dD](?=[+-]?\d)")


def _parse_float(token: str, line: int) -> float:
    try:
        return float(_FORTRAN_EXP.sub("E", token))
    except ValueError:
        raise InpParseError(f"bad coordinate {token!r}", line) from None


def _parse_int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise InpParseError(f"bad integer {token!r}", line) from None


def _keyword(line: str) -> tuple[str, dict[str, str]]:
    parts = [p.strip() for p in line[1:].split(",")]
    params = {}
    for p in parts[1:]:
        if not p:
            continue
        k, _, v = p.partition("=")
        params[k.strip().upper()] = v.strip()
    return parts[0].upper(), params


def parse_inp(text: str, label: str = "inp") -> Mesh:
    """Read ``*NODE`` and C3D8-family ``*ELEMENT`` blocks from ABAQUS input text.

    Node ids are remapped to dense 0-based indices in order of appearance; the
    original ids are kept in ``meta["node_ids"]``.  Element blocks of other
    types are skipped with an :class:`InpWarning` each, and counted in
    ``meta["skipped_blocks"]``.
    """
    node_ids: list[int] = []
    coords: list[list[float]] = []
    elements: list[tuple[int, list[int]]] = []  # (source line, node ids)
    skipped = 0
    mode = None
    pending: list[str] = []
    pending_line = 0

    def flush_element():
        nonlocal pending
        if pending:
            if len(pending) != 9:
                raise InpParseError(f"C3D8 element needs id + 8 nodes, got {len(pending)} fields", pending_line)
            ids = [_parse_int(t, pending_line) for t in pending]
            elements.append((pending_line, ids[1:]))
            pending = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("**"):
            continue
        if line.startswith("*"):
            if mode == "element":
                flush_element()
            name, params = _keyword(line)
            if name == "NODE":
                mode = "node"
            elif name == "ELEMENT":
                etype = params.get("TYPE", "").upper()
                if "C3D8" in etype:
                    mode = "element"
                else:
                    mode = None
                    skipped += 1
                    warnings.warn(f"line {lineno}: skipping *ELEMENT block of type {etype or '?'}", InpWarning)
            else:
                mode = None
            continue
        if mode == "node":
            fields = [t.strip() for t in line.split(",") if t.strip()]
            if len(fields) < 4:
                raise InpParseError("node line needs id, x, y, z", lineno)
            node_ids.append(_parse_int(fields[0], lineno))
            coords.append([_parse_float(t, lineno) for t in fields[1:4]])
        elif mode == "element":
            fields = [t.strip() for t in line.split(",") if t.strip()]
            if not pending:
                pending_line = lineno
            pending.extend(fields)
            if not line.rstrip().endswith(",") and len(pending) >= 9:
                flush_element()
    if mode == "element":
        flush_element()

    index = {}
    for k, nid in enumerate(node_ids):
        if nid in index:
            raise InpParseError(f"duplicate node id {nid}")
        index[nid] = k
    conn = []
    for lineno, ids in elements:
        row = []
        for nid in ids:
            if nid not in index:
                raise InpParseError(f"element references unknown node id {nid}", lineno)
            row.append(index[nid])
        conn.append(row)
    meta = {"source": "inp", "node_ids": node_ids, "skipped_blocks": skipped}
    return Mesh(coords, np.array(conn, dtype=np.int64).reshape(-1, 8), label, meta)


def to_inp(m: Mesh) -> str:
    """Write a minimal ``*NODE`` / ``*ELEMENT, TYPE=C3D8`` deck (1-based ids)."""
    lines = [f"** {m.label}" if m.label else "** hexmass mesh", "*NODE"]
    for k, (x, y, z) in enumerate(m.nodes, start=1):
        lines.append(f"{k}, {x:.17g}, {y:.17g}, {z:.17g}")
    lines.append("*ELEMENT, TYPE=C3D8")
    for k, row in enumerate(m.elements, start=1):
        lines.append(", ".join(str(v) for v in [k, *(row + 1)]))
    return "\n".join(lines) + "\n"


# generators ----------------------------------------------------------------

PRNG_NAME = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class GridSpec:
    """Structured block of parallelepiped cells.

    ``edges`` are the three edge vectors of the whole block, split into
    ``divisions`` cells along each direction.  A right-handed edge triple
    gives positive metrics.
    """

    divisions: tuple[int, int, int] = (1, 1, 1)
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)
    edges: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    kind = "grid"


@dataclass(frozen=True)
class PerturbedSpec:
    """A grid whose interior nodes are shifted by ``amplitude * h_min * U(-1, 1)^3``."""

    grid: GridSpec = GridSpec()
    amplitude: float = 0.3
    seed: int = 0
    kind = "perturbed"


@dataclass(frozen=True)
class AnnulusSpec:
    """Sector of a thick ring: radii, height, angular span in degrees."""

    r_inner: float = 1.0
    r_outer: float = 2.0
    height: float = 1.0
    span_deg: float = 90.0
    divisions: tuple[int, int, int] = (4, 4, 1)  # (n_r, n_theta, n_z)
    kind = "annulus"


def _check_divisions(div: Sequence[int]) -> tuple[int, int, int]:
    div = tuple(int(d) for d in div)
    if len(div) != 3 or min(div) < 1:
        raise MeshError(f"divisions must be three positive integers, got {div}")
    return div


def _structured_connectivity(nx: int, ny: int, nz: int) -> np.ndarray:
    def nid(i, j, k):
        return i + j * (nx + 1) + k * (nx + 1) * (ny + 1)

    conn = []
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                conn.append([
                    nid(i, j, k), nid(i + 1, j, k), nid(i + 1, j + 1, k), nid(i, j + 1, k),
                    nid(i, j, k + 1), nid(i + 1, j, k + 1), nid(i + 1, j + 1, k + 1), nid(i, j + 1, k + 1),
                ])
    return np.array(conn, dtype=np.int64)


def _grid_nodes(spec: GridSpec) -> np.ndarray:
    nx, ny, nz = _check_divisions(spec.divisions)
    edges = np.array(spec.edges, dtype=float).reshape(3, 3)
    if np.any(np.linalg.norm(edges, axis=1) <= 0):
        raise MeshError("grid edge vectors must be non-zero")
    i, j, k = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), np.arange(nz + 1), indexing="ij")
    # node order: i fastest, then j, then k
    idx = np.stack([i.T.ravel() / nx, j.T.ravel() / ny, k.T.ravel() / nz], axis=1)
    return np.asarray(spec.origin, dtype=float) + idx @ edges


def generate(spec) -> Mesh:
    """Build a mesh from a :class:`GridSpec`, :class:`PerturbedSpec` or :class:`AnnulusSpec`.

    A plain dict with a ``"kind"`` key and the matching fields is accepted too.
    """
    if isinstance(spec, dict):
        spec = spec_from_dict(spec)
    if isinstance(spec, GridSpec):
        nodes = _grid_nodes(spec)
        conn = _structured_connectivity(*spec.divisions)
        meta = {"generator": "grid", "divisions": list(spec.divisions)}
        return Mesh(nodes, conn, f"grid {spec.divisions[0]}x{spec.divisions[1]}x{spec.divisions[2]}", meta)
    if isinstance(spec, PerturbedSpec):
        return _perturbed(spec)
    if isinstance(spec, AnnulusSpec):
        return _annulus(spec)
    raise MeshError(f"unknown mesh spec {spec!r}")


def _perturbed(spec: PerturbedSpec) -> Mesh:
    if not 0.0 <= spec.amplitude < 1.0:
        raise MeshError("amplitude must lie in [0, 1)")
    g = spec.grid
    nx, ny, nz = _check_divisions(g.divisions)
    nodes = _grid_nodes(g)
    edges = np.array(g.edges, dtype=float).reshape(3, 3)
    h_min = float(min(np.linalg.norm(edges, axis=1) / np.array([nx, ny, nz])))
    rng = np.random.default_rng(spec.seed)
    shift = rng.uniform(-1.0, 1.0, size=nodes.shape) * spec.amplitude * h_min
    i, j, k = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), np.arange(nz + 1), indexing="ij")
    i, j, k = i.T.ravel(), j.T.ravel(), k.T.ravel()
    interior = (i > 0) & (i < nx) & (j > 0) & (j < ny) & (k > 0) & (k < nz)
    if spec.amplitude > 0:
        nodes = nodes + shift * interior[:, None]
    meta = {
        "generator": "perturbed",
        "divisions": [nx, ny, nz],
        "amplitude": spec.amplitude,
        "seed": spec.seed,
        "prng": PRNG_NAME,
    }
    label = f"perturbed {nx}x{ny}x{nz} a={spec.amplitude} seed={spec.seed} ({PRNG_NAME})"
    return Mesh(nodes, _structured_connectivity(nx, ny, nz), label, meta)


def _annulus(spec: AnnulusSpec) -> Mesh:
    nr, nt, nz = _check_divisions(spec.divisions)
    if spec.r_inner <= 0 or spec.r_outer <= spec.r_inner:
        raise MeshError("need 0 < r_inner < r_outer")
    if spec.height <= 0 or not 0 < spec.span_deg <= 360:
        raise MeshError("need a positive height and a span in (0, 360] degrees")
    r = np.linspace(spec.r_inner, spec.r_outer, nr + 1)
    th = np.radians(np.linspace(0.0, spec.span_deg, nt + 1))
    z = np.linspace(0.0, spec.height, nz + 1)
    R, T, Z = np.meshgrid(r, th, z, indexing="ij")
    R, T, Z = R.T.ravel(), T.T.ravel(), Z.T.ravel()
    nodes = np.stack([R * np.cos(T), R * np.sin(T), Z], axis=1)
    conn = _structured_connectivity(nr, nt, nz)
    if math.isclose(spec.span_deg, 360.0):
        # close the ring: last angular layer reuses the first
        stride = nr + 1
        layer = (nr + 1) * (nt + 1)
        remap = np.arange(len(nodes))
        for k in range(nz + 1):
            for i in range(nr + 1):
                remap[k * layer + nt * stride + i] = k * layer + i
        conn = remap[conn]
        used = np.unique(conn)
        dense = -np.ones(len(nodes), dtype=np.int64)
        dense[used] = np.arange(len(used))
        nodes, conn = nodes[used], dense[conn]
    meta = {
        "generator": "annulus",
        "divisions": [nr, nt, nz],
        "radii": [spec.r_inner, spec.r_outer],
        "height": spec.height,
        "span_deg": spec.span_deg,
    }
    return Mesh(nodes, conn, f"annulus {nr}x{nt}x{nz} span={spec.span_deg}", meta)


def spec_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "grid":
        return GridSpec(**_tuplify(d))
    if kind == "perturbed":
        grid = d.pop("grid", {})
        return PerturbedSpec(grid=GridSpec(**_tuplify(grid)), **d)
    if kind == "annulus":
        return AnnulusSpec(**_tuplify(d))
    raise MeshError(f"unknown mesh kind {kind!r}; expected grid, perturbed or annulus")


def _tuplify(d: dict) -> dict:
    return {k: tuple(map(tuple, v)) if k == "edges" else (tuple(v) if isinstance(v, list) else v) for k, v in d.items()}


# validity ------------------------------------------------------------------

@dataclass(frozen=True)
class MeshValidity:
    min_J: np.ndarray
    negative_elements: list[int]
    grid_n: int

    @property
    def ok(self) -> bool:
        return not self.negative_elements


def mesh_validity(m: Mesh, grid_n: int = 11) -> MeshValidity:
    """Run :func:`~hexmass.hex8.validity_scan` on every element, in index order."""
    mins = np.empty(m.n_elements)
    negative = []
    for k in range(m.n_elements):
        scan = validity_scan(m.element(k), grid_n)
        mins[k] = scan.min_J
        if scan.negative_count:
            negative.append(k)
    return MeshValidity(mins, negative, grid_n)
