"""Leaf models for Q = {J,phi} - tr{J,phi}/4 in dimension 12.

For each case a base point with a prescribed spectrum of {J,K} is built,
the unitary distribution is solved for, and its rank is compared with the
homogeneous model of the leaf.
"""

from twistorlab.leaves import DIM12_CASES, repro_dim12

print(f"{'case':8} {'spectrum of {J,K}/2':34} {'model':26} {'dim':>4} {'solver':>7}")
for case in sorted(DIM12_CASES):
    rep = repro_dim12(case)
    spec = ", ".join(f"{e:+.1f}^{m}" for e, m in sorted(rep.spectrum.items()))
    r = rep.report
    print(f"{case:8} {spec:34} {r.model:26} {r.dim:>4} {r.distribution_dim:>7}"
          + ("" if rep.passed else "   MISMATCH"))
