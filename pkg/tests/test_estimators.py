import itertools
import math

import numpy as np
import pytest

from conftest import assert_within_sigma, enumerate_nn_chain
from oriented_walks.errors import WindowTooLargeError
from oriented_walks.estimators import (
    FLT_CONSTANT,
    exact_second_moment,
    expected_scenery_moment,
    estimate_return_probability,
    flt_check,
    local_time_in_window,
    loglog_slope,
    newman_records,
    tn_ratio,
    variance_scaling,
    verify_newman_bound,
)
from oriented_walks.randomness import derive_stream
from oriented_walks.scenery import DELTA_VARIANCE

GEOM = lambda k: (2 / 3) * (1 / 3) ** k  # noqa: E731


def brute_second_moment(n, r):
    """E[X_n^2] by enumerating every level path, with E[eps_x eps_y] = r^|x-y|."""
    total = 0.0
    for steps in itertools.product((-1, 1), repeat=n - 1):
        y = np.concatenate([[0], np.cumsum(steps)])
        total += np.sum(float(r) ** np.abs(np.subtract.outer(y, y)))
    return 0.75 * n + 0.25 * total / 2 ** (n - 1)


@pytest.mark.parametrize("n", [1, 2, 5, 9, 12])
@pytest.mark.parametrize("r", [0.0, math.tanh(0.5), 1.0, -1.0])
def test_second_moment_formula_against_enumeration(n, r):
    law, params = {0.0: ("iid", {}), 1.0: ("constant", {}), -1.0: ("alternate", {})}.get(
        r, ("ising-nn", {"beta_J": 0.5}))
    assert exact_second_moment(n, law, params) == pytest.approx(brute_second_moment(n, r), rel=1e-12)


def test_scenery_moment_limit():
    n = 4096
    assert abs(expected_scenery_moment(n, 0.0) / n ** 1.5 / DELTA_VARIANCE - 1) < 0.02


def test_return_probability_small_n():
    rows = estimate_return_probability("alternate", {}, [0, 1], 40_000, seed=1)
    assert rows[0].value == 1.0 and rows[0].stderr == 0.0
    assert_within_sigma(rows[1].value, 0.25, rows[1].stderr)


def test_return_probability_iid_two_steps():
    # Y goes up-down or down-up (prob 1/2); X = e0 xi0 + e1 xi1 vanishes when both
    # runs are empty, or the signs differ and the runs match
    k = np.arange(100)
    same = np.sum(GEOM(k) ** 2)
    oracle = 0.5 * (GEOM(0) ** 2 + 0.5 * (same - GEOM(0) ** 2))
    assert oracle == pytest.approx(17 / 72)
    rows = estimate_return_probability("iid", {}, [1], 40_000, seed=2)
    assert_within_sigma(rows[0].value, oracle, rows[0].stderr)


def test_return_probability_decay_and_monotone_horizon():
    grid = [4, 8, 16, 32, 64, 128]
    rows = estimate_return_probability("iid", {}, grid, 40_000, seed=3)
    assert all(0 <= r.value <= 1 for r in rows)
    slope, _ = loglog_slope(grid, [r.value for r in rows])
    assert slope <= -1
    by = [r.extra["p_return_by"] for r in rows]
    assert by == sorted(by)


def test_newman_trivial_cases():
    zero = verify_newman_bound(0.5, 4, np.zeros(9), [0.1, 1.0])
    assert np.all(zero.lhs < 1e-12) and np.all(zero.rhs == 0) and zero.all_hold
    eta = local_time_in_window(4, 8, derive_stream(1))
    indep = verify_newman_bound(0.0, 4, eta, [0.01, 0.5, 1.0])
    assert np.all(indep.lhs < 1e-12) and np.all(indep.rhs == 0) and indep.all_hold


def test_newman_joint_cf_matches_itertools_enumeration():
    bj, h = 0.7, 3
    eta = np.array([0, 1, 3, 2, 2, 1, 0])
    configs, p = enumerate_nn_chain(bj, 2 * h + 1)
    for t in (0.1, 0.7):
        joint = p @ np.exp(1j * t * configs @ eta)
        product = np.prod(np.cos(t * eta))
        report = verify_newman_bound(bj, h, eta, [t])
        assert report.lhs[0] == pytest.approx(abs(joint - product), abs=1e-12)
        corr = sum(eta[i] * eta[j] * (p @ (configs[:, i] * configs[:, j]))
                   for i in range(7) for j in range(7) if i != j)
        assert report.rhs[0] == pytest.approx(0.5 * t * t * corr, rel=1e-10)


def test_newman_bound_holds_on_simulated_paths():
    eta = local_time_in_window(8, 16, derive_stream(2))
    assert eta.sum() == 17
    report = verify_newman_bound(0.5, 8, eta, [0.01, 0.1, 0.5, 1.0])
    assert report.all_hold
    assert np.all(report.lhs >= 0) and np.all(report.rhs >= 0)
    np.testing.assert_array_equal(report.holds, report.lhs <= report.rhs + 1e-12)


def test_newman_records_and_window_limit():
    rows = newman_records([0.2, 1.0], [4, 6], [0.1, 1.0], seed=3)
    assert len(rows) == 8 and all(r.extra["holds"] for r in rows)
    with pytest.raises(WindowTooLargeError):
        verify_newman_bound(0.5, 11, np.ones(23), [0.1])


def test_variance_scaling_matches_exact_iid():
    rows = variance_scaling("iid", {}, [256], (0.0, 1.0), 20_000, seed=4)
    second = next(r for r in rows if r.estimator_id == "second_moment")
    assert_within_sigma(second.value, second.extra["exact"], second.stderr)
    assert second.extra["exact"] == pytest.approx(exact_second_moment(256))


def test_variance_scaling_matches_exact_ising():
    rows = variance_scaling("ising-nn", {"beta_J": 0.5}, [64], (0.0, 1.0), 20_000, seed=5)
    second = next(r for r in rows if r.estimator_id == "second_moment")
    assert_within_sigma(second.value, second.extra["exact"], second.stderr)


def test_increment_moment_degenerate():
    rows = variance_scaling("iid", {}, [32], (0.5, 0.5), 50, seed=6)
    inc = next(r for r in rows if r.estimator_id == "increment_moment")
    assert inc.value == 0.0 and inc.stderr == 0.0


def test_second_moment_slope():
    rows = variance_scaling("iid", {}, [64, 128, 256, 512, 1024, 2048], (0.0, 1.0), 2000, seed=7)
    slope = next(r for r in rows if r.estimator_id == "second_moment_slope")
    assert 1.4 <= slope.value <= 1.6
    with pytest.raises(ValueError):
        variance_scaling("iid", {}, [8], (0, 1), 10)


def test_flt_constant():
    assert FLT_CONSTANT == pytest.approx(0.368894, abs=1e-6)
    assert FLT_CONSTANT ** 2 * DELTA_VARIANCE == pytest.approx(0.14477, abs=1e-5)


def test_flt_check_small():
    rows = {r.estimator_id: r for r in flt_check("iid", {}, 10 ** 4, 2000, seed=8,
                                                 delta_draws_count=2000, delta_n=1024)}
    assert abs(rows["flt_variance"].extra["relative_error"]) < 0.15
    # the full walk's level after n steps has variance 2n/3
    z = 0.2 * 10 ** 3 / math.sqrt(2 * 10 ** 4 / 3)
    vertical = rows["flt_vertical"]
    assert_within_sigma(vertical.value, math.erf(z / math.sqrt(2)), vertical.stderr)
    assert rows["flt_ks"].extra["p_value"] > 0.001
    with pytest.raises(ValueError):
        flt_check("iid", {}, 1000, 2000)


def test_tn_ratio_small_n():
    rec = tn_ratio(1, 40_000, seed=9)
    assert_within_sigma(rec.value, 1.5, rec.stderr)
    assert_within_sigma(rec.extra["var_ratio"], 0.75, rec.extra["var_ratio_stderr"])


def test_tn_ratio_variance():
    rec = tn_ratio(2000, 4000, seed=10)
    assert_within_sigma(rec.value, 1.5, rec.stderr)
    assert_within_sigma(rec.extra["var_ratio"], 0.75, rec.extra["var_ratio_stderr"])
