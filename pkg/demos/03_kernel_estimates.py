"""
Estimating the points from a sample
===================================

Gaussian-kernel estimates of f' and f'' locate the sample inflection point
and the sample point of maximum convexity.
"""

import math

import numpy as np

from tailpoint import KdeModel, amise_bandwidth, make_bundle, sample_delimiting_points, studentt, true_roughness

nu, n = 5.0, 2000
bundle = make_bundle(studentt(nu))
data = bundle.sample(n, seed=2024)

# bandwidths from the exact roughness of the generating density
h1 = amise_bandwidth(1, n, true_roughness(bundle, 3))
h2 = amise_bandwidth(2, n, true_roughness(bundle, 4))
print(f"h1={h1:.4f}  h2={h2:.4f}")

pts = sample_delimiting_points(data, 0.0, "right", h1, h2)
print(f"pinf_n={pts.pinf_n:.4f}   true {math.sqrt(nu / (nu + 2)):.4f}")
print(f"pmconv_n={pts.pmconv_n:.4f} true {math.sqrt(3 * nu / (nu + 2)):.4f}")

# the smoothed second derivative next to the exact one
x = np.linspace(0, 3, 7)
f2n = KdeModel(data, 2, h2)(x)
print(np.column_stack([x, f2n, bundle.d2pdf(x)]).round(4))
