"""Command line front end: ``hexmass {weights,mesh,mass,study,bench}``."""
from __future__ import annotations

import argparse
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import analysis
from .mesh import (
    AnnulusSpec,
    GridSpec,
    MeshError,
    PerturbedSpec,
    dumps_mesh,
    generate,
    mesh_validity,
    read_mesh,
    to_inp,
)
from .polycube import PolynomialSyntaxError, parse_polynomial
from .semianalytic import BUILTIN_SA_RULES, UnisolvenceError, builtin_sa_rule, dumps_rule, lump, rule_to_csv


def _density(text: str):
    try:
        return parse_polynomial(text)
    except PolynomialSyntaxError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rule_name(text: str) -> str:
    if text not in analysis.ALL_RULES:
        raise argparse.ArgumentTypeError(
            f"unknown rule {text!r}; choose from {', '.join(analysis.ALL_RULES)}"
        )
    return text


def _mass_rule_name(text: str) -> str:
    return text if text == "exact" else _rule_name(text)


def _rule_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty rule list")
    return [_rule_name(n) for n in names]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hexmass", description="Mass matrices of 8-node bricks.")
    sub = p.add_subparsers(dest="command", required=True)

    w = sub.add_parser("weights", help="print a semi-analytic weight tensor")
    w.add_argument("--rule", required=True, choices=BUILTIN_SA_RULES)
    w.add_argument("--format", default="json", choices=("json", "csv"))
    w.add_argument("-o", "--output")

    m = sub.add_parser("mesh", help="generate, import or check meshes")
    msub = m.add_subparsers(dest="mesh_command", required=True)

    gen = msub.add_parser("gen", help="generate a grid, perturbed grid or annulus sector")
    gen.add_argument("--kind", required=True, choices=("grid", "perturbed", "annulus"))
    gen.add_argument("--divisions", type=int, nargs=3, default=(4, 4, 4), metavar=("N1", "N2", "N3"))
    gen.add_argument("--origin", type=float, nargs=3, default=(0.0, 0.0, 0.0))
    gen.add_argument("--edges", type=float, nargs=9, default=(1, 0, 0, 0, 1, 0, 0, 0, 1),
                     help="three block edge vectors, row by row")
    gen.add_argument("--amplitude", type=float, default=0.3)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--r-inner", type=float, default=1.0)
    gen.add_argument("--r-outer", type=float, default=2.0)
    gen.add_argument("--height", type=float, default=1.0)
    gen.add_argument("--span", type=float, default=90.0, help="angular span in degrees")
    gen.add_argument("-o", "--output", help=".json or .inp; JSON on stdout if omitted")

    imp = msub.add_parser("import", help="convert an ABAQUS .inp file to mesh JSON")
    imp.add_argument("inp")
    imp.add_argument("-o", "--output")

    chk = msub.add_parser("check", help="scan element metrics for negative values")
    chk.add_argument("--mesh", required=True)
    chk.add_argument("--grid-n", type=int, default=11)

    mass = sub.add_parser("mass", help="print one element's 8x8 mass matrix")
    mass.add_argument("--mesh", required=True)
    mass.add_argument("--element", type=int, required=True)
    mass.add_argument("--rule", required=True, type=_mass_rule_name, help="rule name or 'exact'")
    mass.add_argument("--density", type=_density, default=parse_polynomial("1"))
    mass.add_argument("--lump", action="store_true", help="row-sum lump the result")
    mass.add_argument("-o", "--output")

    st = sub.add_parser("study", help="percent-error study of rules against exact integration")
    st.add_argument("--mesh", required=True)
    st.add_argument("--rules", type=_rule_list, default=["g1", "g4", "g6", "cmd", "lmd"])
    st.add_argument("--density", type=_density, default=parse_polynomial("1"))
    st.add_argument("--format", default="md", choices=("md", "csv"))
    st.add_argument("--policy", default="warn", choices=("warn", "keep", "drop"))
    st.add_argument("--grid-n", type=int, default=11)
    st.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    st.add_argument("-o", "--output")

    b = sub.add_parser("bench", help="time per-element assembly")
    b.add_argument("--mesh", required=True)
    b.add_argument("--rules", type=_rule_list, default=["g4", "lmd"])
    b.add_argument("--repeat", type=int, default=20)
    b.add_argument("-o", "--output")
    return p


def _format_matrix(m: np.ndarray) -> str:
    return "\n".join(" ".join(f"{v:.17g}" for v in row) for row in m) + "\n"


def _run(args, parser) -> int:
    if args.command == "weights":
        rule = builtin_sa_rule(args.rule)
        _emit(rule_to_csv(rule) if args.format == "csv" else dumps_rule(rule) + "\n", args.output)
        return 0

    if args.command == "mesh":
        if args.mesh_command == "gen":
            grid = GridSpec(tuple(args.divisions), tuple(args.origin),
                            tuple(tuple(args.edges[3 * k:3 * k + 3]) for k in range(3)))
            if args.kind == "grid":
                spec = grid
            elif args.kind == "perturbed":
                spec = PerturbedSpec(grid, args.amplitude, args.seed)
            else:
                spec = AnnulusSpec(args.r_inner, args.r_outer, args.height, args.span, tuple(args.divisions))
            mesh = generate(spec)
        elif args.mesh_command == "import":
            mesh = read_mesh(args.inp)
        else:
            mesh = read_mesh(args.mesh)
            if args.grid_n < 2:
                parser.error("--grid-n must be at least 2")
            rep = mesh_validity(mesh, args.grid_n)
            print(f"elements: {mesh.n_elements}")
            print(f"lattice: {args.grid_n}^3 samples per element")
            if mesh.n_elements:
                print(f"min metric: {rep.min_J.min():.6g} (element {int(np.argmin(rep.min_J))})")
            print(f"negative-metric elements: {len(rep.negative_elements)}")
            for k in rep.negative_elements:
                print(f"  {k}: min J = {rep.min_J[k]:.6g}")
            return 0
        if args.output and args.output.lower().endswith(".inp"):
            _emit(to_inp(mesh), args.output)
        else:
            _emit(dumps_mesh(mesh) + "\n", args.output)
        return 0

    if args.command == "mass":
        mesh = read_mesh(args.mesh)
        if not 0 <= args.element < mesh.n_elements:
            raise MeshError(f"element {args.element} out of range (mesh has {mesh.n_elements})")
        h = mesh.element(args.element)
        if args.rule == "exact":
            m = analysis.mass_exact(h, args.density)
        else:
            m = analysis.estimate(h, args.density, analysis.resolve_rule(args.rule))
        if args.lump:
            m = lump(m)
        _emit(_format_matrix(m), args.output)
        return 0

    if args.command == "study":
        mesh = read_mesh(args.mesh)
        rep = analysis.study(mesh, args.density, args.rules, policy=args.policy,
                             grid_n=args.grid_n, threads=max(1, args.threads))
        text = analysis.report_csv(rep) if args.format == "csv" else analysis.report_markdown(rep)
        _emit(text, args.output)
        return 0

    if args.command == "bench":
        if args.repeat < 1:
            parser.error("--repeat must be at least 1")
        mesh = read_mesh(args.mesh)
        recs = analysis.bench(mesh, args.rules, args.repeat)
        _emit(analysis.bench_table(recs), args.output)
        return 0
    parser.error(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _show_warning
        try:
            return _run(args, parser)
        except (MeshError, UnisolvenceError, ValueError, KeyError, OSError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
            print(f"hexmass: error: {msg}", file=sys.stderr)
            return 1


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"hexmass: warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
