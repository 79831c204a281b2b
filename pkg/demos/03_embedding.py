"""Watching the walk only at its vertical moves.

Between two vertical moves the walk makes a geometric number of horizontal
moves along the orientation of its level. The embedded walk is rebuilt into
the full walk and checked step by step, and the clock T_n/n settles at 3/2.
"""

from oriented_walks import embed_check, embedded_trajectory, make_environment, tn_ratio
from oriented_walks.embedding import expand_to_full_walk
from oriented_walks.randomness import derive_stream

env = make_environment("ising-nn", 8, beta_J=0.5)
traj = embedded_trajectory(env, 6, derive_stream(8, "walk"))
print("run lengths xi:", traj.xi.tolist())
print("embedded (X, Y, T):", list(zip(traj.X.tolist(), traj.Y.tolist(), traj.T.tolist())))
x, y, _ = expand_to_full_walk(traj, env)
print("full walk:", list(zip(x.tolist(), y.tolist())))

for law in ("iid", "alternate", "constant"):
    ok = embed_check(law, {}, 2000, 50, seed=1)
    print(f"coupling holds for {sum(ok)}/{len(ok)} {law} replicates")

rec = tn_ratio(10 ** 4, 400, seed=2)
print(f"T_n / n at n = 10^4: {rec.value:.4f} +/- {rec.stderr:.4f}")
