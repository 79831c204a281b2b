"""Vertical/horizontal decomposition of the oriented-lattice walk.

The full walk is observed just after each vertical move. Between vertical
moves ``k`` and ``k + 1`` it makes ``xi_k`` horizontal moves on level
``Y_k``, where the ``xi_k`` are independent with ``P(xi = j) = (2/3)(1/3)^j``.
Grouping the runs by level gives

    X_n = sum_y eps_y * (sum of the xi over the first eta_{n-1}(y) visits to y)
    T_n = n + sum_k xi_k

and the decomposition ``X_n = X1_n + X2_n`` with ``X2_n = m * sum_y eps_y eta_{n-1}(y)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import Law, OrientationEnvironment, make_environment
from .errors import InvariantViolation
from .parallel import replicate_map
from .randomness import StreamKey, derive_stream
from .records import EstimateRecord, mean_record

# mean of the horizontal run length
M = 0.5
GEOMETRIC_P = 1.0 / 3.0
GEOMETRIC_VAR = GEOMETRIC_P / (1.0 - GEOMETRIC_P) ** 2


@dataclass
class VerticalPath:
    positions: np.ndarray

    @property
    def n(self) -> int:
        return self.positions.size - 1


class LocalTimeTable:
    """Visit counts ``eta(y)`` of a level path over a range of times.

    Stored as an offset plus a count array spanning the visited levels only.
    """

    def __init__(self, offset: int, counts: np.ndarray, n: int):
        self.offset = int(offset)
        self.counts = counts
        self.n = n

    @classmethod
    def from_positions(cls, positions: np.ndarray, n: int | None = None) -> "LocalTimeTable":
        """Local time of ``positions[0..n]`` (all of them by default)."""
        if n is None:
            n = positions.size - 1
        visited = positions[: n + 1]
        if visited.size == 0:
            return cls(0, np.zeros(0, dtype=np.int64), n)
        lo = int(visited.min())
        return cls(lo, np.bincount(visited - lo), n)

    def __getitem__(self, level: int) -> int:
        i = int(level) - self.offset
        return int(self.counts[i]) if 0 <= i < self.counts.size else 0

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.counts.size)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict[int, int]:
        return {int(y): int(c) for y, c in zip(self.levels, self.counts) if c}

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Counts at levels ``lo..hi`` (zeros outside the visited range)."""
        out = np.zeros(hi - lo + 1, dtype=np.int64)
        a, b = max(lo, self.offset), min(hi, self.offset + self.counts.size - 1)
        if a <= b:
            out[a - lo: b - lo + 1] = self.counts[a - self.offset: b - self.offset + 1]
        return out


@dataclass
class EmbeddedState:
    X: int
    Y: int
    T: int
    X1: float
    X2: float
    m: float = M


@dataclass
class EmbeddedTrajectory:
    """``(X_j, Y_j, T_j)`` for ``j = 0..n`` plus the randomness that built them."""

    X: np.ndarray
    Y: np.ndarray
    T: np.ndarray
    xi: np.ndarray
    eps: np.ndarray  # orientation at Y_k, k = 0..n-1


def vertical_steps(n: int, stream: np.random.Generator) -> np.ndarray:
    return np.where(stream.random(n) < 0.5, -1, 1).astype(np.int64)


def simulate_vertical(n: int, stream: np.random.Generator):
    """Simple symmetric walk ``Y_0..Y_n`` and its local time ``eta_{n-1}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pos = np.concatenate([[0], np.cumsum(vertical_steps(n, stream))])
    return VerticalPath(pos), LocalTimeTable.from_positions(pos, n - 1)


def sample_geometric(stream: np.random.Generator, size=None):
    """Horizontal run length: ``P(xi = k) = (2/3) (1/3)^k``, ``k >= 0``."""
    # numpy counts trials to the first success, support starting at 1
    return stream.geometric(1.0 - GEOMETRIC_P, size) - 1


def _orientations(env: OrientationEnvironment, levels: np.ndarray) -> np.ndarray:
    lo, hi = int(levels.min()), int(levels.max())
    return env.window(lo, hi).astype(np.int64)[levels - lo]


def embedded_trajectory(env: OrientationEnvironment, n: int,
                        stream: np.random.Generator) -> EmbeddedTrajectory:
    """Embedded walk at every vertical-move time ``0..n``.

    Draw order on ``stream``: ``n`` vertical signs, then ``n`` run lengths.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        z = np.zeros(1, dtype=np.int64)
        return EmbeddedTrajectory(z, z.copy(), z.copy(), z[:0], z[:0])
    y = np.concatenate([[0], np.cumsum(vertical_steps(n, stream))])
    xi = sample_geometric(stream, n)
    eps = _orientations(env, y[:-1])
    x = np.concatenate([[0], np.cumsum(eps * xi)])
    t = np.arange(n + 1) + np.concatenate([[0], np.cumsum(xi)])
    return EmbeddedTrajectory(x, y, t, xi, eps)


def embed(env: OrientationEnvironment, n: int, stream: np.random.Generator) -> EmbeddedState:
    """``(X_n, Y_n, T_n)`` and the decomposition parts, summed level by level."""
    if n == 0:
        return EmbeddedState(0, 0, 0, 0.0, 0.0)
    y = np.concatenate([[0], np.cumsum(vertical_steps(n, stream))])
    xi = sample_geometric(stream, n)
    eta = LocalTimeTable.from_positions(y, n - 1)
    # jump totals per level over its first eta(y) visits
    per_level = np.bincount(y[:-1] - eta.offset, weights=xi, minlength=eta.counts.size)
    eps = env.window(eta.offset, eta.offset + eta.counts.size - 1).astype(np.int64)
    x = int(eps @ per_level.astype(np.int64))
    x2 = M * float(eps @ eta.counts)
    return EmbeddedState(x, int(y[-1]), n + int(xi.sum()), x - x2, x2)


def expand_to_full_walk(traj: EmbeddedTrajectory, env: OrientationEnvironment):
    """Rebuild the full walk from the embedding's randomness.

    Visit ``k`` contributes ``xi_k`` horizontal moves followed by the
    vertical move ``Y_{k+1} - Y_k``. Each horizontal move is applied with the
    orientation of the level the rebuilt walk currently occupies.
    Returns ``(x, y, horizontal)`` with positions ``M_0..M_{T_n}``.
    """
    n = traj.xi.size
    total = int(traj.T[-1])
    dy = np.zeros(total, dtype=np.int64)
    vertical_at = traj.T[1:] - 1
    dy[vertical_at] = np.diff(traj.Y)
    horizontal = np.ones(total, dtype=bool)
    horizontal[vertical_at] = False
    y = np.concatenate([[0], np.cumsum(dy)])
    if n and horizontal.any():
        lo, hi = int(y.min()), int(y.max())
        eps = env.window(lo, hi).astype(np.int64)
        dx = np.where(horizontal, eps[y[:-1] - lo], 0)
    else:
        dx = np.zeros(total, dtype=np.int64)
    x = np.concatenate([[0], np.cumsum(dx)])
    return x, y, horizontal


def coupled_check(env: OrientationEnvironment, n: int, stream: np.random.Generator) -> bool:
    """True iff the rebuilt full walk sits at ``(X_j, Y_j)`` at every time ``T_j``.

    Also checks that every rebuilt move is a lattice edge and that the clock
    counts exactly the horizontal moves.
    """
    traj = embedded_trajectory(env, n, stream)
    x, y, horizontal = expand_to_full_walk(traj, env)
    t = traj.T
    if not (np.array_equal(x[t], traj.X) and np.array_equal(y[t], traj.Y)):
        return False
    if int(t[-1]) - n != int(horizontal.sum()):
        return False
    dx, dy = np.diff(x), np.diff(y)
    if np.any(np.abs(dx) + np.abs(dy) != 1):
        return False
    if horizontal.any():
        lo, hi = int(y.min()), int(y.max())
        eps = env.window(lo, hi).astype(np.int64)
        if np.any(dx[horizontal] != eps[y[:-1][horizontal] - lo]):
            return False
    # level-by-level formula at the final time, an independent route to X_n
    if n:
        eta = LocalTimeTable.from_positions(traj.Y, n - 1)
        per_level = np.bincount(traj.Y[:-1] - eta.offset, weights=traj.xi,
                                minlength=eta.counts.size).astype(np.int64)
        eps = env.window(eta.offset, eta.offset + eta.counts.size - 1).astype(np.int64)
        if int(eps @ per_level) != int(traj.X[-1]):
            return False
    return True


def embed_check(law, params: dict | None, n: int, replicates: int, seed: int = 0,
                threads: int = 1) -> list[bool]:
    """Run :func:`coupled_check` on fresh environments; one boolean per replicate."""
    law = Law.parse(law)
    base = StreamKey(seed, ("embed-check", law.value))

    def one(r):
        key = base.child(r)
        env = make_environment(law, key.child("env"), **(params or {}))
        return coupled_check(env, n, derive_stream(key.child("walk")))

    return replicate_map(one, replicates, threads)


def require_coupling(results: list[bool]) -> None:
    failed = [i for i, ok in enumerate(results) if not ok]
    if failed:
        raise InvariantViolation(f"coupling identity failed in replicates {failed[:10]}")


def x1_variance_probe(n: int, replicates: int, seed: int = 0, threads: int = 1) -> EstimateRecord:
    """Estimate ``E[(X1_n)^2] / n`` under an IID environment."""
    if n < 1:
        raise ValueError("n must be >= 1")
    base = StreamKey(seed, ("x1-variance",))

    def one(r):
        key = base.child(r)
        env = make_environment(Law.IID, key.child("env"))
        return embed(env, n, derive_stream(key.child("walk"))).X1 ** 2 / n

    values = replicate_map(one, replicates, threads)
    return mean_record("x1_variance", values, law="iid", n=n, seed=seed,
                       extra={"target": GEOMETRIC_VAR})
