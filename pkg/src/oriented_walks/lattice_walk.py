"""Simple random walk on a horizontally oriented lattice.

From ``(x, y)`` the walk moves with probability 1/3 each to ``(x, y + 1)``,
``(x, y - 1)`` or ``(x + eps_y, y)``. Paths are generated in chunks: the
move types are drawn in bulk, the level path is a cumulative sum of the
vertical moves, and each horizontal move reads the orientation of the level
the walk is on when it moves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .environment import Law, OrientationEnvironment, make_environment, validate_params
from .parallel import replicate_map
from .randomness import StreamKey, derive_stream
from .records import EstimateRecord

UP, DOWN, HORIZONTAL = 0, 1, 2
CHUNK = 1 << 16
CHECKPOINTS = tuple(10 ** k for k in range(1, 10))


@dataclass(frozen=True)
class WalkState:
    x: int = 0
    y: int = 0
    step: int = 0


@dataclass
class ReturnStats:
    """Visits to the origin at times ``1..horizon``."""

    horizon: int
    returns_to_origin: int = 0
    first_return_time: int | None = None
    checkpoint_counts: dict[int, int] = field(default_factory=dict)


@dataclass
class WalkPath:
    """Positions ``M_0..M_k`` of a recorded walk."""

    x: np.ndarray
    y: np.ndarray


def step_walk(state: WalkState, env: OrientationEnvironment,
              stream: np.random.Generator) -> WalkState:
    """One transition of the walk."""
    move = int(stream.integers(3))
    if move == UP:
        return WalkState(state.x, state.y + 1, state.step + 1)
    if move == DOWN:
        return WalkState(state.x, state.y - 1, state.step + 1)
    return WalkState(state.x + env.value(state.y), state.y, state.step + 1)


def _chunk(env, x0, y0, moves):
    dy = np.where(moves == UP, 1, np.where(moves == DOWN, -1, 0))
    y = y0 + np.cumsum(dy)
    y_before = np.empty_like(y)
    y_before[0] = y0
    y_before[1:] = y[:-1]
    horizontal = moves == HORIZONTAL
    if horizontal.any():
        lo, hi = int(y_before[horizontal].min()), int(y_before[horizontal].max())
        eps = env.window(lo, hi).astype(np.int64)
        dx = np.where(horizontal, eps[np.clip(y_before - lo, 0, hi - lo)], 0)
    else:
        dx = np.zeros_like(y)
    x = x0 + np.cumsum(dx)
    return x, y


def simulate_walk(env: OrientationEnvironment, n_steps: int, stream: np.random.Generator,
                  record_path: int | None = None, start: WalkState = WalkState()):
    """Run ``n_steps`` transitions, counting visits to the origin.

    Parameters
    ----------
    record_path : int, optional
        If given, keep positions ``M_0..M_k`` with ``k = min(n_steps, record_path)``.

    Returns
    -------
    (WalkState, ReturnStats, WalkPath or None)
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    x0, y0, done = start.x, start.y, start.step
    stats = ReturnStats(horizon=n_steps)
    marks = [h for h in CHECKPOINTS if h <= n_steps]
    keep = None if record_path is None else min(n_steps, int(record_path))
    px, py = ([x0], [y0]) if keep is not None else (None, None)
    t = 0
    while t < n_steps:
        k = min(CHUNK, n_steps - t)
        x, y = _chunk(env, x0, y0, stream.integers(0, 3, size=k))
        hits = np.flatnonzero((x == 0) & (y == 0)) + t + 1  # times in 1..n_steps
        if hits.size:
            if stats.first_return_time is None:
                stats.first_return_time = int(hits[0])
            for h in marks:
                if t < h <= t + k:
                    stats.checkpoint_counts[h] = stats.returns_to_origin + int(np.sum(hits <= h))
            stats.returns_to_origin += hits.size
        else:
            for h in marks:
                if t < h <= t + k:
                    stats.checkpoint_counts[h] = stats.returns_to_origin
        if keep is not None and t < keep:
            take = min(k, keep - t)
            px.append(x[:take])
            py.append(y[:take])
        x0, y0 = int(x[-1]), int(y[-1])
        t += k
    path = None
    if keep is not None:
        path = WalkPath(np.concatenate([np.atleast_1d(a) for a in px]).astype(np.int64),
                        np.concatenate([np.atleast_1d(a) for a in py]).astype(np.int64))
    return WalkState(x0, y0, done + n_steps), stats, path


def _walk_returns(law, params, n_steps, key: StreamKey):
    env = make_environment(law, key.child("env"), **params)
    _, stats, _ = simulate_walk(env, n_steps, derive_stream(key.child("walk")))
    return stats


def return_contrast(env_laws: Sequence, walks_per_law: int, n_steps: int, seed: int = 0,
                    threads: int = 1) -> list[EstimateRecord]:
    """Mean number of returns to the origin per law and checkpoint horizon.

    ``env_laws`` holds ``(law, params)`` pairs or bare law names. Each walk
    gets a fresh environment. Rows carry the per-walk counts' standard error;
    the row at the largest horizon also records the growth ratio against the
    smallest horizon in ``extra``.
    """
    rows = []
    for spec in env_laws:
        law, params = (spec, {}) if isinstance(spec, (str, Law)) else spec
        law = Law.parse(law)
        base = StreamKey(seed, ("returns", law.value))
        results = replicate_map(
            lambda r: _walk_returns(law, params, n_steps, base.child(r)), walks_per_law, threads)
        horizons = sorted(results[0].checkpoint_counts) if results else []
        if not horizons or horizons[-1] != n_steps:
            horizons.append(n_steps)
        counts = {h: np.array([res.checkpoint_counts.get(h, res.returns_to_origin)
                               for res in results], dtype=float) for h in horizons}
        env_params = validate_params(law, params)
        for h in horizons:
            c = counts[h]
            se = float(c.std(ddof=1) / np.sqrt(c.size)) if c.size > 1 else 0.0
            rows.append(EstimateRecord("walk_returns", law.value, env_params, h, c.size,
                                       float(c.mean()), se, seed, {"horizon": h}))
    return rows


def growth_ratio(rows: Sequence[EstimateRecord], law: str, small: int, large: int) -> float:
    """``mean_returns(large) / mean_returns(small)`` from :func:`return_contrast` rows."""
    by_h = {r.n: r.value for r in rows if r.law == Law.parse(law).value}
    return by_h[large] / by_h[small] if by_h[small] > 0 else float("inf")
