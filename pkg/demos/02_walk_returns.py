"""Returns to the origin of the walk on an oriented lattice.

With alternating orientations the walk keeps coming back; with random
orientations the returns dry up. Counts are averaged over independent walks,
each with its own environment.
"""

from oriented_walks import growth_ratio, make_environment, return_contrast, simulate_walk
from oriented_walks.randomness import derive_stream

env = make_environment("iid", 3)
state, stats, path = simulate_walk(env, 50, derive_stream(3, "walk"), record_path=50)
print("first 12 positions of one walk:", list(zip(path.x[:12].tolist(), path.y[:12].tolist())))
print("position after 50 steps:", (state.x, state.y))

steps = 10 ** 5
rows = return_contrast(["alternate", "iid", ("ising-nn", {"beta_J": 0.5})], 100, steps, seed=1)
print(f"\nmean number of returns over {steps} steps (100 walks per law)")
for r in rows:
    if r.n in (10 ** 3, steps):
        print(f"  {r.law:>9}  by {r.n:>7}: {r.value:6.3f} +/- {r.stderr:.3f}")
for law in ("alternate", "iid", "ising-nn"):
    print(f"  growth {law:>9} from 10^3 to 10^5 steps: x{growth_ratio(rows, law, 10 ** 3, steps):.2f}")
