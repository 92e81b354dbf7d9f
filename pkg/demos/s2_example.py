"""Walk around the sphere of complex structures on R^4 and watch the leaves change.

Q = {J,phi}({J,phi} - 2 e0) vanishes exactly where {J,K} has eigenvalue 0 or
2 e0.  Writing K = aI + bJ + cL, that happens on the equator b = 0 and on the
latitude b = -e0.  Those points are leaves of their own; everywhere else the
distribution is the whole tangent plane.
"""

import numpy as np

from twistorlab.distributions import DistributionSpec, distribution_basis
from twistorlab.leaves import repro_s2, s2_frame
from twistorlab.sections import QPolynomial

E0 = 0.5

j, i, l = s2_frame()
spec = DistributionSpec(j, QPolynomial.from_roots([0.0, 2 * E0]))

print(f"e0 = {E0}")
print(" latitude b   leaf dim")
for b in (1.0, 0.6, 0.2, 0.0, -0.25, -0.5, -0.75, -1.0):
    r = np.sqrt(1 - b * b)
    k = r * i + b * j
    print(f"  {b:+.2f}        {len(distribution_basis(spec, k))}")

rep = repro_s2(E0, grid_size=64)
counts = {}
for row in rep.rows:
    counts[row["case"]] = counts.get(row["case"], 0) + 1
print(f"\nfull sweep: {len(rep.rows)} points, consistent = {rep.consistent}")
for case in sorted(counts):
    print(f"  case {case}: {counts[case]} points")
