"""
Which rules are exact for which elements
========================================

Compare each rule against analytic integration on three kinds of brick:
a parallelepiped, a parallelepiped with linearly varying density, and a
generally distorted brick.
"""

import numpy as np

from hexmass import Hex8, estimate, mass_exact, resolve_rule
from hexmass.hex8 import CORNERS
from hexmass.polycube import ONE, XI, ETA

rng = np.random.default_rng(0)


def rel(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


para = Hex8.parallelepiped((0, 0, 0), (2.0, 0.1, 0), (0.4, 1.0, 0), (0.2, -0.3, 1.5))
warped = Hex8((CORNERS + rng.uniform(-0.3, 0.3, (8, 3))) * 0.5)

cases = [
    ("parallelepiped, rho=1", para, ONE),
    ("parallelepiped, rho linear", para, ONE + XI / 3 - ETA / 4),
    ("distorted, rho=1", warped, ONE),
]

rules = ["g1", "g4", "g6", "tensor2", "tensor3", "cmd", "lmd", "qmd20"]
print(f"{'':30s}" + "".join(f"{r:>10s}" for r in rules))
for label, h, rho in cases:
    ref = mass_exact(h, rho)
    errs = [rel(estimate(h, rho, resolve_rule(r)), ref) for r in rules]
    print(f"{label:30s}" + "".join(f"{e:10.1e}" for e in errs))

# cmd is exact on the first row, lmd on the first two, qmd20 and tensor3
# on all three.  tensor2 only fails once the metric stops being constant.
