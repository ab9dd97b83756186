"""
Curvature depends on the units
==============================

The point of maximum convexity scales with the distribution; the point of
maximum curvature does not, but approaches it as the scale grows.
"""

import math

import numpy as np

from tailpoint import Side, make_bundle, pmcurv
from tailpoint.dist import exponential, gaussian

sigmas = np.geomspace(0.1, 100, 13)
for s in sigmas:
    x = pmcurv(make_bundle(gaussian(0, s)), Side.RIGHT)
    print(f"sigma={s:8.3f}  pmcurv/sigma={x / s:.6f}  pmconv/sigma={math.sqrt(3):.6f}")

# Exponential: the curvature peak leaves the origin once the rate is large enough
for lam in (0.5, 0.8, 0.85, 0.9, 1.0, 2.0, 5.0):
    x = pmcurv(make_bundle(exponential(lam)), Side.RIGHT)
    closed = math.log(2 * lam**4) / (2 * lam) if lam > 2**-0.25 else 0.0
    print(f"rate={lam:4.2f}  pmcurv={x:.6f}  log(2 rate^4)/(2 rate)={closed:.6f}")
