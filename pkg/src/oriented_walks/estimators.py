"""Monte Carlo experiments and exact finite-size oracles.

Covers return probabilities of the embedded walk, an exact check of the
characteristic-function bound for associated orientations, second-moment
scaling of the horizontal coordinate, the functional limit constant of the
full walk and the clock ratio ``T_n / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .embedding import GEOMETRIC_VAR, M, embed, embedded_trajectory, simulate_vertical
from .environment import Law, make_environment, nn_correlation, validate_params
from .errors import WindowTooLargeError
from .lattice_walk import simulate_walk
from .parallel import replicate_map
from .randomness import StreamKey, derive_stream
from .records import EstimateRecord, mean_record, variance_with_stderr
from .scenery import DELTA_VARIANCE, delta_draws, ks_two_sample

MAX_NEWMAN_SITES = 21
# m / (1 + m)^{3/4}
FLT_CONSTANT = M / (1.0 + M) ** 0.75


def _env(law, params, key):
    return make_environment(law, key.child("env"), **(params or {}))


# ---------------------------------------------------------------------------
# return probabilities


def estimate_return_probability(law, params: dict | None, n_grid: Sequence[int], replicates: int,
                                seed: int = 0, threads: int = 1) -> list[EstimateRecord]:
    """Estimate ``P[X_{2n} = 0, Y_{2n} = 0]`` for each ``n`` in ``n_grid``.

    Each replicate draws a fresh environment and one embedded trajectory of
    length ``2 * max(n_grid)``. ``extra["p_return_by"]`` is the fraction of
    replicates whose embedded walk has visited the origin at some time in
    ``1..2n``.
    """
    law = Law.parse(law)
    params = validate_params(law, params or {})
    grid = np.asarray(sorted(set(int(n) for n in n_grid)))
    if np.any(grid < 0):
        raise ValueError("n must be >= 0")
    horizon = 2 * int(grid.max())
    base = StreamKey(seed, ("returns-embedded", law.value))

    def one(r):
        key = base.child(r)
        traj = embedded_trajectory(_env(law, params, key), horizon, derive_stream(key.child("walk")))
        at_origin = (traj.X == 0) & (traj.Y == 0)
        at_origin[0] = False
        first = np.flatnonzero(at_origin)
        first = first[0] if first.size else horizon + 1
        idx = 2 * grid
        return at_origin[idx] | (idx == 0), first <= idx

    out = replicate_map(one, replicates, threads)
    hits = np.array([o[0] for o in out], dtype=float)
    ever = np.array([o[1] for o in out], dtype=float)
    rows = []
    for j, n in enumerate(grid):
        p = hits[:, j].mean()
        se = math.sqrt(p * (1 - p) / replicates)
        rows.append(EstimateRecord("return_probability", law.value, params, int(n), replicates,
                                   float(p), se, seed, {"p_return_by": float(ever[:, j].mean())}))
    return rows


def loglog_slope(xs, ys) -> tuple[float, float]:
    """Least-squares slope of ``log y`` on ``log x`` and its standard error."""
    fit = stats.linregress(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)))
    return float(fit.slope), float(fit.stderr)


# ---------------------------------------------------------------------------
# characteristic-function bound, exact


@dataclass
class NewmanCheckReport:
    window: tuple[int, int]
    beta_J: float
    eta: np.ndarray
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    holds: np.ndarray

    @property
    def all_hold(self) -> bool:
        return bool(np.all(self.holds))


def nn_gibbs_enumeration(beta_J: float, sites: int):
    """All ``2**sites`` configurations of the free nearest-neighbour chain.

    Returns ``(spins, probabilities)`` with ``spins`` of shape ``(2**sites, sites)``
    and weights proportional to ``exp(beta_J * sum_i s_i s_{i+1})``.
    """
    if sites > MAX_NEWMAN_SITES:
        raise WindowTooLargeError(f"{sites} sites is too many for exact enumeration")
    codes = np.arange(1 << sites, dtype=np.int64)
    spins = (((codes[:, None] >> np.arange(sites)) & 1) * 2 - 1).astype(np.int8)
    bonds = np.sum(spins[:, 1:].astype(np.int16) * spins[:, :-1], axis=1)
    logw = beta_J * (bonds - (sites - 1))
    w = np.exp(logw)
    return spins, w / w.sum()


def verify_newman_bound(beta_J: float, window_halfwidth: int, eta, t_grid) -> NewmanCheckReport:
    """Compare the joint characteristic function of ``sum_y eps_y eta(y)`` with
    the product of marginals, exactly, for the nearest-neighbour Ising law.

    ``eta`` lists the local times at levels ``-window_halfwidth..window_halfwidth``.
    The bound checked is ``|joint - product| <= t^2/2 sum_{x != y} eta(x) eta(y) E[eps_x eps_y]``.
    """
    sites = 2 * int(window_halfwidth) + 1
    if sites > MAX_NEWMAN_SITES:
        raise WindowTooLargeError(f"window of {sites} sites exceeds {MAX_NEWMAN_SITES}")
    eta = np.asarray(eta, dtype=float)
    if eta.size != sites:
        raise ValueError(f"eta must have {sites} entries")
    t_grid = np.asarray(t_grid, dtype=float)
    spins, prob = nn_gibbs_enumeration(beta_J, sites)
    s = spins @ eta
    joint = np.exp(1j * np.outer(t_grid, s)) @ prob
    # marginals are fair signs: E[exp(i t eps eta)] = cos(t eta)
    product = np.prod(np.cos(np.outer(t_grid, eta)), axis=1)
    lhs = np.abs(joint - product)
    lags = np.abs(np.subtract.outer(np.arange(sites), np.arange(sites)))
    corr = nn_correlation(beta_J, lags)
    np.fill_diagonal(corr, 0.0)
    rhs = 0.5 * t_grid ** 2 * float(eta @ corr @ eta)
    return NewmanCheckReport((-window_halfwidth, window_halfwidth), beta_J, eta, t_grid,
                             lhs, rhs, lhs <= rhs + 1e-12)


def local_time_in_window(window_halfwidth: int, n: int, stream: np.random.Generator,
                         max_tries: int = 10_000) -> np.ndarray:
    """Local time ``eta_n`` of a simple walk path that stays inside the window.

    Paths leaving ``[-h, h]`` are redrawn from the same stream.
    """
    h = int(window_halfwidth)
    for _ in range(max_tries):
        path, _ = simulate_vertical(n + 1, stream)
        pos = path.positions[: n + 1]
        if np.abs(pos).max() <= h:
            return np.bincount(pos + h, minlength=2 * h + 1)
    raise RuntimeError("could not draw a path inside the window")


def newman_records(beta_Js: Sequence[float], halfwidths: Sequence[int], t_grid: Sequence[float],
                   seed: int = 0, path_length: int | None = None) -> list[EstimateRecord]:
    """Exact bound checks over a grid of couplings and windows, one row per point."""
    rows = []
    for bj in beta_Js:
        for h in halfwidths:
            n = 2 * h if path_length is None else path_length
            eta = local_time_in_window(h, n, derive_stream(seed, "newman", h))
            report = verify_newman_bound(bj, h, eta, t_grid)
            for t, lhs, rhs, ok in zip(report.t_grid, report.lhs, report.rhs, report.holds):
                rows.append(EstimateRecord(
                    "newman_bound", "ising-nn", {"beta_J": float(bj)}, 2 * h + 1, 1,
                    float(lhs), 0.0, seed,
                    {"t": float(t), "rhs": float(rhs), "holds": bool(ok),
                     "window": [-h, h], "eta": eta.tolist()},
                ))
    return rows


# ---------------------------------------------------------------------------
# second moments


def correlation_ratio(law, params: dict | None) -> float | None:
    """``r`` such that ``E[eps_x eps_y] = r ** |x - y|``, or None if not geometric."""
    law = Law.parse(law)
    if law is Law.IID:
        return 0.0
    if law is Law.CONSTANT:
        return 1.0
    if law is Law.ALTERNATE:
        return -1.0
    if law is Law.ISING_NN:
        return float(np.tanh(validate_params(law, params or {})["beta_J"]))
    return None


def expected_scenery_moment(n: int, r: float) -> float:
    """``E[sum_{k,l<n} r^{|Y_k - Y_l|}]`` for a simple walk, exactly.

    Uses stationarity of increments: the sum equals
    ``n + 2 sum_{j=1}^{n-1} (n - j) E[r^{|Y_j|}]``. For ``r = 0`` this is the
    expected sum of squared local times ``E[sum_y eta_{n-1}(y)^2]``.
    """
    if n <= 0:
        return 0.0
    total = float(n)
    for j in range(1, n):
        if r == 0.0:
            if j % 2:
                continue
            e = math.exp(math.lgamma(j + 1) - 2 * math.lgamma(j // 2 + 1) - j * math.log(2))
        else:
            i = np.arange(j + 1)
            e = float(stats.binom.pmf(i, j, 0.5) @ (r ** np.abs(2 * i - j).astype(float)))
        total += 2.0 * (n - j) * e
    return total


def exact_second_moment(n: int, law="iid", params: dict | None = None) -> float:
    """``E[X_n^2]`` of the embedded horizontal walk.

    ``X_n = sum_k eps_{Y_k} xi_k``; the run lengths are independent of
    everything else, so ``E[X_n^2] = n Var(xi) + m^2 E[sum_{k,l} eps_{Y_k} eps_{Y_l}]``.
    """
    r = correlation_ratio(law, params)
    if r is None:
        raise ValueError(f"no closed form for law {law!r}")
    return GEOMETRIC_VAR * n + M * M * expected_scenery_moment(n, r)


def variance_scaling(law, params: dict | None, n_grid: Sequence[int], t_pair=(0.0, 1.0),
                     replicates: int = 1000, seed: int = 0, threads: int = 1) -> list[EstimateRecord]:
    """Increment and second moments of ``X`` across sizes.

    Per ``n`` two rows: ``increment_moment`` estimates
    ``E|X_{[n t2]} - X_{[n t1]}|^2 / n^{3/2}`` and ``second_moment`` estimates
    ``E[X_n^2]`` (with the exact value in ``extra["exact"]`` where one
    exists). A final ``second_moment_slope`` row holds the log-log slope of
    ``E[X_n^2]`` against ``n``.
    """
    law = Law.parse(law)
    params = validate_params(law, params or {})
    t1, t2 = sorted(t_pair)
    r = correlation_ratio(law, params)
    rows, means = [], []
    for n in n_grid:
        if n < 16:
            raise ValueError("n must be >= 16")
        k1, k2 = int(math.floor(n * t1)), int(math.floor(n * t2))
        length = max(n, k2)
        base = StreamKey(seed, ("scaling", law.value, n))

        def one(i):
            key = base.child(i)
            traj = embedded_trajectory(_env(law, params, key), length, derive_stream(key.child("walk")))
            return float(traj.X[k2] - traj.X[k1]) ** 2 / n ** 1.5, float(traj.X[n]) ** 2

        vals = np.array(replicate_map(one, replicates, threads))
        rows.append(mean_record("increment_moment", vals[:, 0], law=law.value, params=params, n=n,
                                seed=seed, extra={"t1": t1, "t2": t2}))
        extra = {}
        if r is not None:
            extra["exact"] = exact_second_moment(n, law, params)
        rec = mean_record("second_moment", vals[:, 1], law=law.value, params=params, n=n,
                          seed=seed, extra=extra)
        rows.append(rec)
        means.append(rec.value)
    if len(n_grid) >= 2:
        slope, se = loglog_slope(n_grid, means)
        rows.append(EstimateRecord("second_moment_slope", law.value, params, int(max(n_grid)),
                                   replicates, slope, se, seed, {"n_grid": list(map(int, n_grid))}))
    return rows


# ---------------------------------------------------------------------------
# functional limit of the full walk


def flt_check(law, params: dict | None, n: int, replicates: int, t: float = 1.0, seed: int = 0,
              delta_draws_count: int = 5000, delta_n: int = 4096, vertical_bound: float = 0.2,
              threads: int = 1) -> list[EstimateRecord]:
    """Compare the rescaled full walk at time ``[n t]`` with the scaled scenery process.

    Rows:

    * ``flt_variance``: sample variance of ``M_x / n^{3/4}``, target
      ``(m / (1+m)^{3/4})^2 Var(Delta_t)`` in ``extra``;
    * ``flt_ks``: KS statistic against ``m / (1+m)^{3/4} * Delta_t`` draws;
    * ``flt_vertical``: fraction of replicates with ``|M_y| / n^{3/4} <= vertical_bound``.
    """
    if n < 10 ** 4 or replicates < 2000:
        raise ValueError("flt_check needs n >= 10^4 and at least 2000 replicates")
    law = Law.parse(law)
    params = validate_params(law, params or {})
    steps = int(math.floor(n * t))
    base = StreamKey(seed, ("flt", law.value))

    def one(i):
        key = base.child(i)
        state, _, _ = simulate_walk(_env(law, params, key), steps, derive_stream(key.child("walk")))
        return state.x, state.y

    pos = np.array(replicate_map(one, replicates, threads), dtype=float) / n ** 0.75
    target = FLT_CONSTANT ** 2 * DELTA_VARIANCE * t ** 1.5
    var, var_se = variance_with_stderr(pos[:, 0])
    limit = FLT_CONSTANT * delta_draws("discrete", delta_draws_count, [t], seed, n=delta_n,
                                       role="flt-delta", threads=threads)[:, 0]
    d, p = ks_two_sample(pos[:, 0], limit)
    inside = np.abs(pos[:, 1]) <= vertical_bound
    frac = float(inside.mean())
    return [
        EstimateRecord("flt_variance", law.value, params, n, replicates, var, var_se, seed,
                       {"t": t, "target": target, "relative_error": var / target - 1.0}),
        EstimateRecord("flt_ks", law.value, params, n, replicates, d, 0.0, seed,
                       {"t": t, "p_value": p, "delta_draws": delta_draws_count, "delta_n": delta_n}),
        EstimateRecord("flt_vertical", law.value, params, n, replicates, frac,
                       math.sqrt(frac * (1 - frac) / replicates), seed,
                       {"t": t, "bound": vertical_bound}),
    ]


# ---------------------------------------------------------------------------
# clock


def tn_ratio(n: int, replicates: int, seed: int = 0, law="iid", params: dict | None = None,
             threads: int = 1) -> EstimateRecord:
    """Mean of ``T_n / n`` with ``Var(T_n) / n`` recorded in ``extra``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    law = Law.parse(law)
    params = validate_params(law, params or {})
    base = StreamKey(seed, ("tn-ratio", law.value))

    def one(i):
        key = base.child(i)
        return embed(_env(law, params, key), n, derive_stream(key.child("walk"))).T

    clocks = np.array(replicate_map(one, replicates, threads), dtype=float)
    extra = {"limit": 1.0 + M}
    if replicates > 1:
        v, v_se = variance_with_stderr(clocks)
        extra.update(var_ratio=v / n, var_ratio_stderr=v_se / n)
    return mean_record("tn_ratio", clocks / n, law=law.value, params=params, n=n, seed=seed,
                       extra=extra)
