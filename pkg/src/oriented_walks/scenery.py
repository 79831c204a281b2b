"""Samplers for the Kesten-Spitzer scenery process and its self-similarity.

The limit process is ``Delta_t = int L_t(x) dZ(x)``: Brownian local time
integrated against an independent two-sided Brownian scenery. Two
approximations are provided:

* discrete: ``n^{-3/4} sum_y s_y eta_{[nt]-1}(y)`` for a simple random walk and
  IID fair signs ``s_y`` (the primary sampler);
* continuum: Brownian motion on a time grid, occupation time binned into
  spatial cells, one Gaussian scenery increment per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .embedding import vertical_steps
from .parallel import replicate_map
from .randomness import StreamKey, derive_stream
from .records import EstimateRecord

SELF_SIMILARITY_INDEX = 0.75
# E[Delta_1^2] = E int L_1(x)^2 dx = 2 int_0^1 (1 - r) (2 pi r)^{-1/2} dr
DELTA_VARIANCE = 8.0 / (3.0 * math.sqrt(2.0 * math.pi))


@dataclass
class DeltaSample:
    values: np.ndarray
    times: np.ndarray
    config: dict = field(default_factory=dict)
    seed: int | None = None


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be nonempty, nonnegative and sorted")
    return times


def sample_delta_discrete(n: int, times: Sequence[float], stream: np.random.Generator) -> DeltaSample:
    """One draw of the rescaled random walk in random scenery at ``times``."""
    times = _check_times(times)
    if n < 100 or times[-1] * n < 1:
        raise ValueError("need n >= 100 and max(times) * n >= 1")
    length = math.ceil(n * times[-1])
    y = np.concatenate([[0], np.cumsum(vertical_steps(length, stream))])
    lo = int(y.min())
    signs = np.where(stream.random(int(y.max()) - lo + 1) < 0.5, -1, 1)
    # sum_y s_y eta_{k-1}(y) = sum_{i<k} s_{Y_i}
    partial = np.concatenate([[0], np.cumsum(signs[y - lo])])
    k = np.floor(n * times).astype(np.int64)
    values = partial[k] / n ** 0.75
    return DeltaSample(values.astype(float), times, {"mode": "discrete", "n": n})


def sample_delta_continuum(dt: float, dx: float, times: Sequence[float],
                           stream: np.random.Generator) -> DeltaSample:
    """One draw of ``Delta`` from a gridded Brownian path and binned local time."""
    times = _check_times(times)
    if dt <= 0 or dx <= 0:
        raise ValueError("dt and dx must be positive")
    steps = max(1, math.ceil(times[-1] / dt - 1e-9))
    w = np.concatenate([[0.0], np.cumsum(math.sqrt(dt) * stream.standard_normal(steps))])
    cells = np.floor(w[:-1] / dx).astype(np.int64)
    lo = int(cells.min())
    g = stream.standard_normal(int(cells.max()) - lo + 1)
    # each step adds dt of occupation to its cell: L ~ occupation / dx,
    # and the scenery increment over a cell is sqrt(dx) * G
    partial = np.concatenate([[0.0], np.cumsum(g[cells - lo])]) * (dt / math.sqrt(dx))
    k = np.minimum(np.round(times / dt).astype(np.int64), steps)
    return DeltaSample(partial[k], times, {"mode": "continuum", "dt": dt, "dx": dx})


def delta_draws(mode: str, draws: int, times: Sequence[float], seed: int, *, n: int = 4096,
                dt: float = 1e-4, dx: float = 1e-2, role="delta", threads: int = 1) -> np.ndarray:
    """``draws`` independent samples; returns an array of shape ``(draws, len(times))``."""
    base = StreamKey(seed, (role, mode))

    if mode == "discrete":
        def one(i):
            return sample_delta_discrete(n, times, derive_stream(base.child(i))).values
    elif mode == "continuum":
        def one(i):
            return sample_delta_continuum(dt, dx, times, derive_stream(base.child(i))).values
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return np.array(replicate_map(one, draws, threads))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic with its asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = a.size * b.size / (a.size + b.size)
    return d, float(special.kolmogorov(math.sqrt(en) * d))


def check_selfsimilarity(samples_a, samples_b, c: float) -> float:
    """KS p-value of ``Delta_t`` draws against ``c^{-3/4} Delta_{ct}`` draws."""
    a, b = np.asarray(samples_a, dtype=float), np.asarray(samples_b, dtype=float)
    if a.size < 100 or b.size < 100:
        raise ValueError("need at least 100 draws per sample")
    return ks_two_sample(a, b * c ** -SELF_SIMILARITY_INDEX)[1]


def selfsimilarity_record(c: float, draws: int, seed: int, t: float = 1.0, n: int = 4096,
                          threads: int = 1, rescale: bool = True) -> EstimateRecord:
    """KS comparison of ``Delta_t`` and ``Delta_{ct}`` from independent draws."""
    a = delta_draws("discrete", draws, [t], seed, n=n, role="selfsim-a", threads=threads)[:, 0]
    b = delta_draws("discrete", draws, [c * t], seed, n=n, role="selfsim-b", threads=threads)[:, 0]
    scale = c ** -SELF_SIMILARITY_INDEX if rescale else 1.0
    stat, p = ks_two_sample(a, b * scale)
    return EstimateRecord("delta_selfsim", "iid", {"c": c, "t": t, "rescale": rescale}, n, draws,
                          stat, 0.0, seed, {"p_value": p})
