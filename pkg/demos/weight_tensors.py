"""
Semi-analytic weight tensors
============================

Derive the one-point and four-point weight tensors in exact rationals and
look at a few of their properties.
"""

from fractions import Fraction

import numpy as np

from hexmass import builtin_sa_rule, derive_rule
from hexmass.polycube import ONE, XI, ETA, ZETA, format_polynomial

# The one-point rule samples rho*J at the centre only.
cmd = builtin_sa_rule("cmd")
print("cmd weights x 27:")
print(np.array([[int(27 * v) for v in row] for row in cmd.weight_matrix(0)]))

# Four points, linear ansatz.  The cardinal functions come out of an exact
# Vandermonde inverse.
lmd = builtin_sa_rule("lmd")
for p, a in zip(lmd.points, lmd.ansatz):
    print(tuple(str(v) for v in p), "->", format_polynomial(a))

# Summing the four LMD matrices collapses back onto the CMD matrix,
# since the ansatz functions add up to one.
collapsed = [[sum(lmd.weights[i][j]) for j in range(8)] for i in range(8)]
print("collapse equals cmd:", collapsed == cmd.weight_matrix(0))

# Entries can be negative; the far corner of the first point's matrix is:
print("M_771 =", lmd.weights[6][6][0])

# Any unisolvent point set works.  Moving the offsets from 1/10 to 1/2:
alt = derive_rule(
    [(0, 0, 0), (Fraction(1, 2), 0, 0), (0, Fraction(1, 2), 0), (0, 0, Fraction(1, 2))],
    [ONE, XI, ETA, ZETA],
    name="lmd-half",
)
print("M_111 with offset 1/2:", alt.weights[0][0][0])

# Storage: 36 distinct values per sampling point.
for r in (cmd, lmd, builtin_sa_rule("qmd20")):
    print(f"{r.name:6s} points={r.n_points:2d} stored={r.stored_weights}")
