"""The scenery process: a simple random walk summing IID signs attached to
the levels it visits, rescaled by n^(3/4).

Its variance approaches 8 / (3 sqrt(2 pi)), and doubling time stretches the
distribution by 2^(3/4).
"""

import numpy as np

from oriented_walks import DELTA_VARIANCE, delta_draws, selfsimilarity_record

d = delta_draws("discrete", 3000, [0.5, 1.0, 2.0], seed=4, n=2048)
print("sample variances at t = 0.5, 1, 2:", np.round(d.var(axis=0), 3))
print("limit variance at t = 1:", round(DELTA_VARIANCE, 4), " scaling t^(3/2) predicts",
      np.round(DELTA_VARIANCE * np.array([0.5, 1.0, 2.0]) ** 1.5, 3))

c = delta_draws("continuum", 1000, [1.0], seed=4)[:, 0]
print("continuum sampler variance at t = 1:", round(float(c.var()), 3))

for rescale in (True, False):
    rec = selfsimilarity_record(2.0, 2000, seed=4, n=2048, rescale=rescale)
    label = "rescaled" if rescale else "raw"
    print(f"KS Delta_1 vs Delta_2 ({label}): D = {rec.value:.3f}, p = {rec.extra['p_value']:.3g}")
