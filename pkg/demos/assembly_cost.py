"""
Assembly cost per element
=========================

Time per-element mass assembly for conventional and semi-analytic rules
with the same number of points, and report how many numbers each rule keeps.
"""

from hexmass import GridSpec, PerturbedSpec, bench, bench_table, generate

mesh = generate(PerturbedSpec(GridSpec((7, 7, 7)), amplitude=0.3, seed=1))
records = bench(mesh, ["g1", "cmd", "g4", "lmd", "g6", "tensor3", "qmd20"], repeat=10)
print(bench_table(records))

by = {r.rule: r for r in records}
print("lmd / g4 time: %.2f" % (by["lmd"].seconds_per_element / by["g4"].seconds_per_element))
