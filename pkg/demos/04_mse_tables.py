"""
Monte Carlo error of the sample points
======================================

Mean squared error of the sample inflection point and the sample point of
maximum convexity for Student-t data. Pass the number of replications as the
first argument (default 100; the full study uses 1000).
"""

import sys

import numpy as np

from tailpoint.sim import MseStudyConfig, Target, run_mse_studies

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 100
config = MseStudyConfig(replications=reps, base_seed=1)
results = run_mse_studies(config)

np.set_printoptions(precision=3, suppress=True)
for target in Target:
    print(f"\n{target.value}: rows n={config.n_values}, columns nu={config.nu_values}")
    print(results[target].table())
