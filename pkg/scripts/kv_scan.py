"""Kipnis-Varadhan partial sums for a Diophantine and a Liouville angle.

    python scripts/kv_scan.py [--levels 5]

Prints kv_partial at the convergent denominators. For the golden conjugate with
geometric amplitudes the sums settle; for the Liouville angle with the matching
smooth observable they blow up at every resonant level.
"""

import argparse
from fractions import Fraction

from rotclt.construct import liouville_observable
from rotclt.diophantine import Angle, build_liouville
from rotclt.observable import CosineSeries
from rotclt.spectral import kv_partial

ap = argparse.ArgumentParser()
ap.add_argument("--levels", type=int, default=5)
args = ap.parse_args()

gold = Angle.golden_conjugate()
geo = CosineSeries(tuple((j, Fraction(1, 2**j)) for j in range(1, 1200)))
print("golden conjugate, a_j = 2^-j")
for k in range(2, 18, 3):
    q = gold.convergent(k)[1]
    print(f"  q={q:6d}  kv={kv_partial(geo, gold, q):.15g}")

a = build_liouville(lambda k: k, args.levels)
obs = liouville_observable(a, lambda k: k, args.levels)
print(f"liouville e_k = k, {args.levels} levels")
for k in range(1, args.levels + 1):
    q = a.convergent(k)[1]
    print(f"  q={q}  kv={kv_partial(obs, a, q):.6g}")
