"""Orientation fields: the +/-1 direction assigned to every horizontal level.

Five laws are supported:

``iid``        independent fair signs
``alternate``  +1 on even levels, -1 on odd levels
``constant``   +1 everywhere
``ising-nn``   nearest-neighbour ferromagnetic Ising chain, sampled exactly
               as a stationary two-state Markov chain started from a fair sign
``ising-lr``   long-range ferromagnetic Ising chain with couplings
               ``J * |i - j| ** -alpha``, sampled on a finite window by
               heat-bath Glauber sweeps

The lazy laws (``iid``, ``ising-nn``) are generated in fixed blocks of levels,
each block drawing from its own derived stream, so the value at a level is a
pure function of the seed and does not depend on the query order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numba
import numpy as np
from scipy import stats

from .errors import (
    MalformedFunctionError,
    NonpositiveCorrelationError,
    OutOfWindowError,
    ValidationError,
)
from .parallel import replicate_map
from .randomness import StreamKey, derive_stream

BLOCK = 1024
# replicates per stream in the batched samplers
BATCH = 1 << 15


class Law(str, Enum):
    IID = "iid"
    ALTERNATE = "alternate"
    CONSTANT = "constant"
    ISING_NN = "ising-nn"
    ISING_LR = "ising-lr"

    @classmethod
    def parse(cls, value) -> "Law":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower().replace("_", "-")
        for law in cls:
            if law.value == text or law.name.lower().replace("_", "-") == text:
                return law
        raise ValidationError(f"unknown environment law {value!r}")


def validate_params(law: Law, params: dict) -> dict:
    """Fill defaults and range-check the parameters of ``law``."""
    law = Law.parse(law)
    p = dict(params)
    if law is Law.ISING_NN:
        p.setdefault("beta_J", 0.0)
        if not p["beta_J"] >= 0:
            raise ValidationError("ising-nn needs beta_J >= 0")
        p["beta_J"] = float(p["beta_J"])
        return {"beta_J": p["beta_J"]}
    if law is Law.ISING_LR:
        p.setdefault("beta", 1.0)
        p.setdefault("J", 0.0)
        p.setdefault("alpha", 2.0)
        p.setdefault("window_halfwidth", 1024)
        p.setdefault("burnin_sweeps", 200)
        if p.get("truncation_radius") is None:
            p["truncation_radius"] = p["window_halfwidth"]
        if not p["alpha"] > 1:
            raise ValidationError(f"alpha must be > 1 for summable decay, got {p['alpha']}")
        if not (p["beta"] >= 0 and p["J"] >= 0):
            raise ValidationError("ising-lr needs beta >= 0 and J >= 0 (ferromagnetic)")
        for name in ("window_halfwidth", "burnin_sweeps", "truncation_radius"):
            if int(p[name]) < 1:
                raise ValidationError(f"{name} must be a positive integer")
        if int(p["truncation_radius"]) > 2 * int(p["window_halfwidth"]):
            raise ValidationError("truncation_radius exceeds the window width")
        return {
            "beta": float(p["beta"]), "J": float(p["J"]), "alpha": float(p["alpha"]),
            "window_halfwidth": int(p["window_halfwidth"]),
            "burnin_sweeps": int(p["burnin_sweeps"]),
            "truncation_radius": int(p["truncation_radius"]),
        }
    return {}


def nn_flip_probability(beta_J: float) -> float:
    """P(eps_{y+1} != eps_y) for the nearest-neighbour chain."""
    # 1 / (1 + e^{2 beta J}), written to stay finite for large beta_J
    return 0.5 * (1.0 - math.tanh(beta_J))


def nn_correlation(beta_J: float, lag) -> np.ndarray | float:
    """Two-point function E[eps_0 eps_lag] = tanh(beta_J) ** |lag|."""
    return np.tanh(beta_J) ** np.abs(lag)


def _nn_extend(start: int, uniforms: np.ndarray, q: float) -> np.ndarray:
    flips = np.where(uniforms < q, -1, 1).astype(np.int8)
    return (start * np.cumprod(flips, axis=-1)).astype(np.int8)


# ---------------------------------------------------------------------------
# long-range heat bath


@numba.njit(cache=True)
def _local_field(spins, kernel):
    n = spins.size
    r = kernel.size
    field = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for d in range(1, r + 1):
            if i - d >= 0:
                acc += kernel[d - 1] * spins[i - d]
            if i + d < n:
                acc += kernel[d - 1] * spins[i + d]
        field[i] = acc
    return field


@numba.njit(cache=True)
def _heat_bath_sweep(spins, field, kernel, beta, uniforms):
    n = spins.size
    r = kernel.size
    for i in range(n):
        p_up = 1.0 / (1.0 + math.exp(-2.0 * beta * field[i]))
        new = 1 if uniforms[i] < p_up else -1
        if new != spins[i]:
            delta = new - spins[i]
            spins[i] = new
            for d in range(1, r + 1):
                if i - d >= 0:
                    field[i - d] += kernel[d - 1] * delta
                if i + d < n:
                    field[i + d] += kernel[d - 1] * delta


def heat_bath_chain(n_sites, beta, J, alpha, truncation_radius, sweeps, stream):
    """Run ``sweeps`` sequential heat-bath sweeps from an IID start.

    Couplings are ``J * d ** -alpha`` for ``1 <= d <= truncation_radius``
    with free boundaries. Returns the final configuration as int8.
    """
    spins = np.where(stream.random(n_sites) < 0.5, -1, 1).astype(np.int64)
    radius = min(int(truncation_radius), n_sites - 1)
    kernel = J * np.arange(1, radius + 1, dtype=float) ** (-alpha)
    if radius < 1 or beta * J == 0:
        # zero interaction: every heat-bath update is a fair coin
        for _ in range(sweeps):
            spins = np.where(stream.random(n_sites) < 0.5, -1, 1)
        return spins.astype(np.int8)
    field = _local_field(spins, kernel)
    for _ in range(sweeps):
        _heat_bath_sweep(spins, field, kernel, float(beta), stream.random(n_sites))
    return spins.astype(np.int8)


# ---------------------------------------------------------------------------


class OrientationEnvironment:
    """Lazily evaluated orientation field ``level -> +/-1``.

    Parameters
    ----------
    law : Law or str
    params : dict
        Law-specific parameters, see :func:`validate_params`.
    key : StreamKey or int
        Seed (or seed plus path) from which all randomness is derived.
    """

    def __init__(self, law, params: dict | None = None, key: StreamKey | int = 0):
        self.law = Law.parse(law)
        self.params = validate_params(self.law, params or {})
        self.key = key if isinstance(key, StreamKey) else StreamKey(key)
        self._up = np.zeros(0, dtype=np.int8)    # levels 0, 1, 2, ...
        self._down = np.zeros(0, dtype=np.int8)  # levels -1, -2, ...
        self._lo = self._hi = 0
        if self.law is Law.ISING_NN:
            self._q = nn_flip_probability(self.params["beta_J"])
            first = derive_stream(self.key.child("origin")).random()
            self._origin = np.int8(1 if first < 0.5 else -1)
        elif self.law is Law.ISING_LR:
            h = self.params["window_halfwidth"]
            spins = heat_bath_chain(
                2 * h + 1, self.params["beta"], self.params["J"], self.params["alpha"],
                self.params["truncation_radius"], self.params["burnin_sweeps"],
                derive_stream(self.key.child("glauber")),
            )
            self._up = spins[h:].copy()
            self._down = spins[:h][::-1].copy()
            self._lo, self._hi = -h, h

    def __repr__(self):
        return f"OrientationEnvironment({self.law.value!r}, {self.params!r})"

    @property
    def name(self) -> str:
        return self.law.value

    # -- lazy generation ---------------------------------------------------

    def _uniforms(self, direction: str, start: int, stop: int) -> np.ndarray:
        """Uniforms ``start..stop-1`` of the block-addressed ``direction`` sequence."""
        blocks = range(start // BLOCK, -(-stop // BLOCK))
        u = np.concatenate([
            derive_stream(self.key.child(direction, b)).random(BLOCK) for b in blocks
        ])
        offset = (start // BLOCK) * BLOCK
        return u[start - offset: stop - offset]

    def _grow(self, memo: np.ndarray, direction: str, length: int) -> np.ndarray:
        size = memo.size
        if length <= size:
            return memo
        if self.law is Law.IID:
            u = self._uniforms(direction, size, length)
            vals = np.where(u < 0.5, -1, 1).astype(np.int8)
        elif direction == "up":
            # level k >= 1 is level k-1 times the flip driven by uniform k-1
            if size == 0:
                memo = np.array([self._origin], dtype=np.int8)
                size = 1
                if length == 1:
                    return memo
            u = self._uniforms(direction, size - 1, length - 1)
            vals = _nn_extend(int(memo[-1]), u, self._q)
        else:
            # level -k is level -(k-1) times the flip driven by uniform k-1
            prev = self._origin if size == 0 else memo[-1]
            vals = _nn_extend(int(prev), self._uniforms(direction, size, length), self._q)
        return np.concatenate([memo, vals])

    def _ensure(self, lo: int, hi: int) -> None:
        if self.law is Law.ISING_LR:
            if lo < self._lo or hi > self._hi:
                bad = lo if lo < self._lo else hi
                raise OutOfWindowError(bad, self._lo, self._hi)
            return
        if hi >= self._up.size:
            self._up = self._grow(self._up, "up", _round_up(hi + 1))
        if lo < 0 and -lo > self._down.size:
            self._down = self._grow(self._down, "down", _round_up(-lo))
        self._lo = min(self._lo, -self._down.size)
        self._hi = max(self._hi, self._up.size - 1)

    # -- queries -----------------------------------------------------------

    def value(self, level: int) -> int:
        """Orientation at ``level``."""
        level = int(level)
        if self.law is Law.CONSTANT:
            return 1
        if self.law is Law.ALTERNATE:
            return 1 if level % 2 == 0 else -1
        self._ensure(level, level)
        return int(self._up[level] if level >= 0 else self._down[-level - 1])

    __getitem__ = value

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Orientations at levels ``lo..hi`` (inclusive) as an int8 array."""
        lo, hi = int(lo), int(hi)
        if hi < lo:
            return np.zeros(0, dtype=np.int8)
        if self.law is Law.CONSTANT:
            return np.ones(hi - lo + 1, dtype=np.int8)
        if self.law is Law.ALTERNATE:
            return np.where(np.arange(lo, hi + 1) % 2 == 0, 1, -1).astype(np.int8)
        self._ensure(lo, hi)
        parts = []
        if lo < 0:
            parts.append(self._down[-min(hi, -1) - 1: -lo][::-1])
        if hi >= 0:
            parts.append(self._up[max(lo, 0): hi + 1])
        return np.concatenate(parts)


def _round_up(n: int) -> int:
    return -(-n // BLOCK) * BLOCK


def make_environment(law, seed: int | StreamKey = 0, path: Sequence = (), **params):
    """Build an environment for ``law`` keyed by ``seed`` and ``path``."""
    key = seed.child(*path) if isinstance(seed, StreamKey) else StreamKey(seed, tuple(path))
    return OrientationEnvironment(law, params, key)


def sample_ising_nn(beta_J: float, seed: int | StreamKey = 0, range: tuple[int, int] = (0, 0),
                    path: Sequence = ()) -> OrientationEnvironment:
    """Exact nearest-neighbour Ising field, materialised on ``range``.

    The origin is a fair sign; each further level copies its inner
    neighbour with probability ``e^{bJ} / (e^{bJ} + e^{-bJ})``. Levels outside
    ``range`` are still available lazily.
    """
    lo, hi = range
    if not lo <= 0 <= hi:
        raise ValueError("range must contain level 0")
    env = make_environment(Law.ISING_NN, seed, path, beta_J=beta_J)
    env.window(lo, hi)
    return env


def sample_ising_lr(beta: float, J: float, alpha: float, window_halfwidth: int,
                    burnin_sweeps: int = 200, truncation_radius: int | None = None,
                    seed: int | StreamKey = 0, path: Sequence = ()) -> OrientationEnvironment:
    """Long-range Ising field on ``[-window_halfwidth, window_halfwidth]``."""
    return make_environment(
        Law.ISING_LR, seed, path, beta=beta, J=J, alpha=alpha,
        window_halfwidth=window_halfwidth, burnin_sweeps=burnin_sweeps,
        truncation_radius=truncation_radius,
    )


def sample_levels(law, params: dict, lo: int, hi: int, reps: int,
                  key: StreamKey) -> np.ndarray:
    """Draw ``reps`` independent fields restricted to levels ``lo..hi``.

    Returns an int8 array of shape ``(reps, hi - lo + 1)``. The fast laws are
    vectorised over replicates with one stream for the whole batch; ``ising-lr``
    runs one Glauber chain per replicate.
    """
    law = Law.parse(law)
    params = validate_params(law, params)
    width = hi - lo + 1
    if law is Law.CONSTANT:
        return np.ones((reps, width), dtype=np.int8)
    if law is Law.ALTERNATE:
        return np.broadcast_to(np.where(np.arange(lo, hi + 1) % 2 == 0, 1, -1),
                               (reps, width)).astype(np.int8)
    if law is Law.ISING_LR:
        return np.stack([
            OrientationEnvironment(law, params, key.child(r)).window(lo, hi) for r in range(reps)
        ])
    rng = derive_stream(key)
    if law is Law.IID:
        return np.where(rng.random((reps, width)) < 0.5, -1, 1).astype(np.int8)
    q = nn_flip_probability(params["beta_J"])
    origin = np.where(rng.random(reps) < 0.5, -1, 1).astype(np.int8)
    up = _nn_extend(1, rng.random((reps, max(hi, 0))), q) * origin[:, None]
    down = _nn_extend(1, rng.random((reps, max(-lo, 0))), q) * origin[:, None]
    full = np.concatenate([down[:, ::-1], origin[:, None], up], axis=1)  # levels min(lo,0)..max(hi,0)
    start = lo - min(lo, 0)
    return full[:, start: start + width].astype(np.int8)


def _batched(law, params, lo, hi, replicates, seed, role, threads, reduce):
    """Apply ``reduce`` to batches of sampled fields; results in batch order."""
    law = Law.parse(law)
    size = 1 if law is Law.ISING_LR else BATCH
    n_batches = -(-replicates // size)
    base = StreamKey(seed, (role,))

    def work(b):
        count = min(size, replicates - b * size)
        return reduce(sample_levels(law, params, lo, hi, count, base.child(b)))

    return replicate_map(work, n_batches, threads)


@dataclass
class CorrelationProfile:
    """Estimates of ``E[eps_a eps_{a+lag}]`` per lag."""

    lags: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    sample_count: int
    anchor: int = 0


def empirical_correlation(law, params: dict | None, lags: Sequence[int], replicates: int,
                          seed: int = 0, anchor: int = 0, threads: int = 1) -> CorrelationProfile:
    """Average ``eps_anchor * eps_{anchor+lag}`` over independent fields."""
    if replicates < 2:
        raise ValueError("need at least two replicates")
    lags = np.asarray(lags, dtype=int)
    lo = min(anchor, anchor + int(lags.min()))
    hi = max(anchor, anchor + int(lags.max()))

    def reduce(fields):
        prod = fields[:, anchor - lo][:, None].astype(np.int64) * fields[:, anchor + lags - lo]
        return prod.sum(axis=0)

    # products are +/-1, so sum of squares equals the count
    sums = np.sum(_batched(law, params or {}, lo, hi, replicates, seed, "corr", threads, reduce),
                  axis=0)
    mean = sums / replicates
    var = (1.0 - mean ** 2) * replicates / (replicates - 1)
    se = np.sqrt(np.maximum(var, 0.0) / replicates)
    return CorrelationProfile(lags, mean, se, replicates, anchor)


@dataclass(frozen=True)
class MonotoneFunction:
    """Coordinatewise nondecreasing function of finitely many orientations.

    ``kind`` is one of:

    * ``"coord"``: ``eps_y`` for the single level in ``levels``
    * ``"sum"``: ``sum(eps_y for y in levels)``
    * ``"min"``: ``1{min(eps_y for y in levels) >= threshold}``
    """

    kind: str
    levels: tuple[int, ...]
    threshold: float = 1.0

    def __call__(self, fields: np.ndarray, lo: int) -> np.ndarray:
        cols = fields[:, np.asarray(self.levels) - lo].astype(np.int64)
        if self.kind == "coord":
            return cols[:, 0].astype(float)
        if self.kind == "sum":
            return cols.sum(axis=1).astype(float)
        return (cols.min(axis=1) >= self.threshold).astype(float)


def monotone_function(spec) -> MonotoneFunction:
    """Parse ``spec`` into a :class:`MonotoneFunction`.

    Accepted forms: an int ``y`` (coordinate), ``("coord", y)``,
    ``("sum", levels)``, ``("min", levels[, threshold])`` or an existing
    :class:`MonotoneFunction`.
    """
    if isinstance(spec, MonotoneFunction):
        return spec
    if isinstance(spec, (int, np.integer)) and not isinstance(spec, bool):
        return MonotoneFunction("coord", (int(spec),))
    try:
        kind, levels, *rest = spec
    except (TypeError, ValueError):
        raise MalformedFunctionError(f"cannot parse function spec {spec!r}") from None
    if kind not in ("coord", "sum", "min"):
        raise MalformedFunctionError(f"unsupported function kind {kind!r}")
    levels = (levels,) if isinstance(levels, (int, np.integer)) else tuple(levels)
    if not levels or not all(isinstance(y, (int, np.integer)) for y in levels):
        raise MalformedFunctionError(f"levels must be a nonempty set of integers: {spec!r}")
    if kind == "coord" and len(levels) != 1:
        raise MalformedFunctionError("coord takes exactly one level")
    if len(rest) > (1 if kind == "min" else 0):
        raise MalformedFunctionError(f"too many fields in {spec!r}")
    threshold = float(rest[0]) if rest else 1.0
    return MonotoneFunction(kind, tuple(int(y) for y in levels), threshold)


def check_association(law, params: dict | None, f_spec, g_spec, replicates: int,
                      seed: int = 0, threads: int = 1) -> tuple[float, float]:
    """Monte Carlo estimate of ``Cov[f(eps), g(eps)]`` and its standard error."""
    f, g = monotone_function(f_spec), monotone_function(g_spec)
    levels = f.levels + g.levels
    lo, hi = min(levels), max(levels)

    def reduce(fields):
        a, b = f(fields, lo), g(fields, lo)
        return np.array([a.sum(), b.sum(), (a * b).sum(), (a * a).sum(), (b * b).sum(),
                         (a * a * b * b).sum(), (a * a * b).sum(), (a * b * b).sum()])

    s = np.sum(_batched(law, params or {}, lo, hi, replicates, seed, "assoc", threads, reduce),
               axis=0) / replicates
    ea, eb, eab, eaa, ebb, eaabb, eaab, eabb = s
    cov = eab - ea * eb
    # variance of (a - Ea)(b - Eb) expanded in raw moments
    second = (eaabb - 2 * eb * eaab - 2 * ea * eabb + eb * eb * eaa + ea * ea * ebb
              + 4 * ea * eb * eab - 3 * ea * ea * eb * eb)
    var = max(second - cov * cov, 0.0)
    return float(cov * replicates / (replicates - 1)), math.sqrt(var / replicates)


def fit_decay_exponent(profile: CorrelationProfile, lag_range: tuple[int, int]) -> tuple[float, float]:
    """Power-law exponent of the correlation decay over ``lag_range`` (inclusive).

    Least-squares slope of ``log(estimate)`` against ``log(lag)``, sign-flipped,
    with the regression standard error.
    """
    lags = np.asarray(profile.lags)
    mask = (lags >= lag_range[0]) & (lags <= lag_range[1])
    if mask.sum() < 2:
        raise ValueError("need at least two lags in range")
    est = np.asarray(profile.estimates, dtype=float)[mask]
    if np.any(est <= 0):
        raise NonpositiveCorrelationError(
            "nonpositive correlation in fit range; more replicates or a non-FKG law"
        )
    x, y = np.log(lags[mask].astype(float)), np.log(est)
    if mask.sum() == 2:
        slope = (y[1] - y[0]) / (x[1] - x[0])
        return float(-slope), 0.0
    fit = stats.linregress(x, y)
    return float(-fit.slope), float(fit.stderr)
