"""Random rotations of the circle: CLT diagnostics, Diophantine angles and counterexample builders."""

import sys as _sys

# ledgers carry integers with tens of thousands of digits
if hasattr(_sys, "set_int_max_str_digits"):
    _sys.set_int_max_str_digits(0)

from .circle import CirclePoint, GoodSet, circle_dist, grid_dist, in_good_set, reduce
from .diophantine import Angle, ApproxWitness, build_liouville, continued_fraction, convergents, witness_exponent
from .observable import CosineSeries, cr_norm_bound, evaluate, fourier_coeff, t1_term, t2_term

__version__ = "0.1.0"
