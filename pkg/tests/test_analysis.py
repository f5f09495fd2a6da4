import warnings
from fractions import Fraction

import numpy as np
import pytest

from hexmass.analysis import (
    BenchRecord,
    UndefinedAverageError,
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
    total_mass_exact,
)
from hexmass.hex8 import CORNERS, Hex8, metric_polynomial
from hexmass.mesh import GridSpec, Mesh, PerturbedSpec, generate
from hexmass.polycube import ETA, ONE, XI, ZETA, integrate_cube
from hexmass.quadrature import builtin_rule, mass_conventional

from conftest import random_hex, rel_err
from reference_tables import CMD_27


def test_reference_cube_gives_cmd_table():
    exact = mass_exact_rational(Hex8.reference())
    assert exact == [[Fraction(v, 27) for v in r] for r in CMD_27]
    np.testing.assert_allclose(mass_exact(Hex8.reference()), np.array(CMD_27) / 27, rtol=1e-15)


def test_linear_density_corner_entry():
    m = mass_exact_rational(Hex8.reference(), ONE + XI / 2)
    assert m[0][0] == Fraction(2, 9)


def test_float_and_rational_agree(rng):
    nodes = [[int(v) for v in c] for c in CORNERS]
    nodes[6] = [Fraction(7, 5), Fraction(6, 5), 1]
    h = Hex8(nodes)
    rho = 2 + XI - ETA * ZETA / 3
    exact = np.array(mass_exact_rational(h, rho), dtype=float)
    assert rel_err(mass_exact(h, rho), exact) < 1e-15


def test_rational_requires_rational_nodes():
    with pytest.raises(ValueError):
        mass_exact_rational(Hex8(np.asarray(CORNERS) * 0.5))


def test_matches_tensor3(rng):
    r = builtin_rule("tensor3")
    for _ in range(20):
        h = random_hex(rng, 0.4)
        assert rel_err(mass_conventional(h, ONE, r), mass_exact(h)) < 1e-12


def test_total_mass_identity():
    nodes = [[int(v) for v in c] for c in CORNERS]
    nodes[2] = [Fraction(3, 2), 1, Fraction(-1, 2)]
    h = Hex8(nodes)
    rho = ONE + ZETA / 4
    m = mass_exact_rational(h, rho)
    assert sum(map(sum, m)) == integrate_cube(metric_polynomial(h).poly * rho)
    assert total_mass_exact(h, rho) == sum(map(sum, m))


def test_positive_definite(rng):
    for _ in range(100):
        h = random_hex(rng, 0.3)
        rho = 0.1 + 0.05 * (ONE + XI)  # at least 0.1 on the cube
        np.linalg.cholesky(mass_exact(h, rho))


def test_error_stats_identical():
    m = mass_exact(Hex8.box())
    e = error_stats(m, m)
    assert e.average == 0 and e.excluded == 0
    assert np.all(e.per_entry == 0)


def test_unit_cube_g1_error():
    h = Hex8.box()
    e = error_stats(estimate(h, ONE, builtin_rule("g1")), mass_exact(h))
    assert e.average == pytest.approx(35100 / 512, abs=1e-10)
    row = sorted(e.per_entry[0])
    assert row == pytest.approx(sorted([100 * 37 / 64] + [100 * 5 / 32] * 3 + [100 * 11 / 16] * 3 + [100 * 19 / 8]))


def test_zero_reference_entry_excluded():
    exact = np.eye(8)
    exact[0, 1] = 0.0
    est = exact.copy()
    est[0, 1] = 0.5
    e = error_stats(est, exact)
    assert e.excluded == 64 - 8
    assert np.isnan(e.per_entry[0, 1])
    assert e.average == 0


def test_all_zero_reference():
    with pytest.raises(UndefinedAverageError):
        error_stats(np.ones((8, 8)), np.zeros((8, 8)))


def test_resolve_rule():
    assert resolve_rule("g6").name == "g6"
    assert resolve_rule("lmd").name == "lmd"
    with pytest.raises(KeyError):
        resolve_rule("g5")


def test_study_grid_semianalytic_exact():
    m = generate(GridSpec((3, 3, 2), edges=((2, 0, 0), (0.5, 1, 0), (0, 0.3, 1))))
    rep = study(m, 1, ["cmd", "lmd", "g1"])
    for name in ("cmd", "lmd"):
        assert rep[name].max < 1e-10
        assert rep[name].avg < 1e-10
    assert 65 <= rep["g1"].avg <= 75


def test_study_ordering_on_perturbed_mesh():
    m = generate(PerturbedSpec(GridSpec((4, 4, 4)), 0.3, seed=42))
    rep = study(m)
    assert list(rep.rules) == ["g1", "g4", "g6", "cmd", "lmd"]
    assert rep["lmd"].avg < rep["cmd"].avg < rep["g4"].avg
    assert 65 <= rep["g1"].avg <= 75
    for s in rep.rules.values():
        assert 0 <= s.min <= s.avg <= s.max


def test_study_is_deterministic_and_thread_independent():
    m = generate(PerturbedSpec(GridSpec((3, 3, 3)), 0.3, seed=1))
    a = report_csv(study(m))
    assert a == report_csv(study(m))
    assert a == report_csv(study(m, threads=4))


def test_scale_equivariance():
    m = generate(PerturbedSpec(GridSpec((2, 2, 2)), 0.3, seed=3))
    s = 2.5
    big = Mesh(m.nodes * s, m.elements, m.label)
    for k in range(m.n_elements):
        h, H = m.element(k), big.element(k)
        assert rel_err(mass_exact(H), s**3 * mass_exact(h)) < 1e-13
        for name in ("g4", "lmd"):
            r = resolve_rule(name)
            assert rel_err(estimate(H, ONE, r), s**3 * estimate(h, ONE, r)) < 1e-13
    a, b = study(m), study(big)
    for name in a.rules:
        np.testing.assert_allclose(a[name].element_avg, b[name].element_avg, rtol=0, atol=1e-10)


def test_validity_policies():
    m = generate(GridSpec((2, 1, 1)))
    conn = m.elements.copy()
    conn[0, [0, 1]] = conn[0, [1, 0]]
    bad = Mesh(m.nodes, conn, "bad")
    with pytest.warns(RuntimeWarning, match="negative metric"):
        rep = study(bad, rules=["g1"])
    assert rep.n_elements == 2 and rep.negative_elements == [0]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert study(bad, rules=["g1"], policy="keep").n_elements == 2
        dropped = study(bad, rules=["g1"], policy="drop")
    assert dropped.n_elements == 1 and dropped.elements == [1]
    with pytest.raises(ValueError):
        study(bad, policy="strict")


def test_empty_mesh_rejected():
    with pytest.raises(ValueError):
        study(Mesh(np.zeros((0, 3)), np.zeros((0, 8), dtype=int)))


def test_report_emitters():
    rep = study(generate(GridSpec((2, 2, 1))), rules=["g1", "cmd"])
    lines = report_csv(rep).splitlines()
    assert lines[0] == "label,rule,n_elements,avg_pct,min_pct,max_pct,excluded"
    assert len(lines) == 3 and lines[1].split(",")[1] == "g1"
    md = report_markdown(rep)
    assert "| rule | avg % | max % | min % | excluded |" in md
    assert "| cmd |" in md


def test_bench_records():
    m = generate(GridSpec((3, 3, 3)))
    recs = bench(m, ["g1", "g4", "lmd", "tensor3"], repeat=3)
    by = {r.rule: r for r in recs}
    assert by["g4"].stored_weights == 36
    assert by["lmd"].stored_weights == 144
    assert by["g1"].stored_weights == 9
    assert all(r.seconds_per_element > 0 and r.repeat == 3 for r in recs)
    assert "| lmd | 4 | 144 |" in bench_table(recs)
    with pytest.raises(ValueError):
        bench(m, repeat=0)


def test_bench_uses_clock_median():
    ticks = iter(np.arange(0.0, 100.0, 1.0))
    recs = bench(generate(GridSpec((2, 1, 1))), ["g1"], repeat=5, clock=lambda: next(ticks))
    assert recs == [BenchRecord("g1", 1, 9, 0.5, 5)]
