"""Estimators built on the embedding: return probabilities, second moments
against their exact values, the Ising covariance bound and the rescaled
full walk against the scenery limit.
"""

from oriented_walks import (
    estimate_return_probability,
    flt_check,
    loglog_slope,
    newman_records,
    variance_scaling,
)

grid = [4, 8, 16, 32, 64]
rows = estimate_return_probability("iid", {}, grid, 20_000, seed=6)
slope, se = loglog_slope(grid, [r.value for r in rows])
print("P(X_n = 0, Y_n = 0):", [f"{r.value:.4f}" for r in rows], f" log-log slope {slope:.2f}")

for r in variance_scaling("ising-nn", {"beta_J": 0.5}, [128], (0.0, 1.0), 5000, seed=6):
    if r.estimator_id == "second_moment":
        print(f"E[X_128^2] = {r.value:.1f} +/- {r.stderr:.1f}, exact {r.extra['exact']:.1f}")

rows = newman_records([0.5], [6], [0.1, 1.0], seed=6)
for r in rows:
    print(f"t = {r.extra['t']}: |cf gap| {r.value:.2e} <= bound {r.extra['rhs']:.2e}")

for r in flt_check("iid", {}, 10 ** 4, 2000, seed=6, delta_draws_count=2000, delta_n=1024):
    print(r.estimator_id, round(r.value, 4), {k: round(v, 4) for k, v in r.extra.items()
                                              if isinstance(v, float)})
