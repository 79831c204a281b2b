import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import assert_within_sigma, enumerate_nn_chain
from oriented_walks.environment import (
    CorrelationProfile,
    Law,
    MonotoneFunction,
    OrientationEnvironment,
    check_association,
    empirical_correlation,
    fit_decay_exponent,
    make_environment,
    monotone_function,
    sample_ising_lr,
    sample_ising_nn,
    sample_levels,
)
from oriented_walks.errors import (
    MalformedFunctionError,
    NonpositiveCorrelationError,
    OutOfWindowError,
    ValidationError,
)
from oriented_walks.randomness import StreamKey

TANH = np.tanh(0.5)


def test_nn_oracle_matches_enumeration():
    # exact 10-site enumeration gives the two-point function independently
    configs, p = enumerate_nn_chain(0.5, 10)
    for lag in range(1, 6):
        exact = p @ (configs[:, 2] * configs[:, 2 + lag])
        assert exact == pytest.approx(TANH ** lag, abs=1e-12)
    assert TANH == pytest.approx(0.462117, abs=1e-6)
    assert TANH ** 3 == pytest.approx(0.0986862, abs=1e-7)
    assert TANH ** 2 == pytest.approx(0.213552, abs=1e-6)


def test_alternate_and_constant_values():
    alt = make_environment("alternate")
    assert [alt.value(y) for y in (0, 1, -1, 2, -2)] == [1, -1, -1, 1, 1]
    const = make_environment("constant")
    assert {const.value(y) for y in range(-50, 50)} == {1}


def test_values_are_signs_and_memoised():
    env = make_environment("iid", 3)
    w = env.window(-3000, 3000)
    assert set(np.unique(w)) <= {-1, 1}
    assert env.value(-1234) == env.value(-1234) == w[-1234 + 3000]


@pytest.mark.parametrize("law,params", [("iid", {}), ("ising-nn", {"beta_J": 0.7})])
def test_query_order_does_not_matter(law, params):
    a = make_environment(law, 5, (1,), **params)
    b = make_environment(law, 5, (1,), **params)
    forward = a.window(-2500, 2500)
    backward = [b.value(y) for y in range(2500, -2501, -1)][::-1]
    np.testing.assert_array_equal(forward, backward)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3000, 3000), min_size=1, max_size=20), st.integers(0, 2 ** 32))
def test_pure_function_of_seed(levels, seed):
    a = make_environment("ising-nn", seed, beta_J=0.3)
    b = make_environment("ising-nn", seed, beta_J=0.3)
    vals_a = [a.value(y) for y in levels]
    vals_b = [b.value(y) for y in reversed(levels)][::-1]
    assert vals_a == vals_b
    assert all(v in (-1, 1) for v in vals_a)


def test_large_coupling_freezes_chain():
    env = sample_ising_nn(50.0, seed=1, range=(-200, 200))
    w = env.window(-200, 200)
    assert np.all(w == w[200])


def test_sample_ising_nn_requires_origin_in_range():
    with pytest.raises(ValueError):
        sample_ising_nn(0.5, range=(1, 5))


def test_zero_coupling_is_iid():
    prof = empirical_correlation("ising-nn", {"beta_J": 0.0}, [1], 10 ** 6, seed=4)
    assert_within_sigma(prof.estimates[0], 0.0, prof.stderrs[0])


@pytest.mark.parametrize("lag", [1, 2, 3])
def test_nn_correlation_oracle(lag):
    prof = empirical_correlation("ising-nn", {"beta_J": 0.5}, [lag], 10 ** 6, seed=10 + lag)
    assert_within_sigma(prof.estimates[0], TANH ** lag, prof.stderrs[0])


def test_iid_correlations_vanish():
    prof = empirical_correlation("iid", {}, [1, 2, 5, 9], 10 ** 5, seed=2)
    for est, se in zip(prof.estimates, prof.stderrs):
        assert_within_sigma(est, 0.0, se)


def test_constant_correlation_exact():
    prof = empirical_correlation("constant", {}, [1, 3, 7], 100, seed=0)
    np.testing.assert_array_equal(prof.estimates, 1.0)
    np.testing.assert_array_equal(prof.stderrs, 0.0)


def test_profile_ranges():
    prof = empirical_correlation("ising-nn", {"beta_J": 0.2}, [1, 2], 1000, seed=1)
    assert np.all(np.abs(prof.estimates) <= 1) and np.all(prof.stderrs >= 0)
    with pytest.raises(ValueError):
        empirical_correlation("iid", {}, [1], 1)


@pytest.mark.parametrize("law,params", [("iid", {}), ("ising-nn", {"beta_J": 0.5})])
def test_symmetry_of_marginals(law, params):
    fields = sample_levels(law, params, -5, 5, 200_000, StreamKey(8, ("sym",)))
    means = fields.mean(axis=0)
    se = 1 / np.sqrt(fields.shape[0])
    assert np.all(np.abs(means) <= 4 * se)


def test_nn_stationarity_across_anchors():
    k = 2
    fields = sample_levels("ising-nn", {"beta_J": 0.5}, -10, 10 + k, 200_000,
                           StreamKey(12, ("stat",)))
    corr = (fields[:, :21].astype(int) * fields[:, k:21 + k]).mean(axis=0)
    se = np.sqrt((1 - corr ** 2) / fields.shape[0])
    assert np.all(np.abs(corr - TANH ** k) <= 4 * se)
    assert np.ptp(corr) <= 4 * np.sqrt(2) * se.max()


def test_nn_joint_law_total_variation():
    sites = 6
    configs, p = enumerate_nn_chain(0.5, sites)
    fields = sample_levels("ising-nn", {"beta_J": 0.5}, -2, 3, 10 ** 6, StreamKey(21, ("tv",)))
    codes = ((fields > 0).astype(int) * (1 << np.arange(sites - 1, -1, -1))).sum(axis=1)
    freq = np.bincount(codes, minlength=1 << sites) / fields.shape[0]
    # itertools.product orders configurations as big-endian bit codes
    assert 0.5 * np.abs(freq - p).sum() < 0.005


def test_nn_joint_law_chi_square_12_sites():
    from scipy import stats
    sites = 12
    configs, p = enumerate_nn_chain(0.5, sites)
    fields = sample_levels("ising-nn", {"beta_J": 0.5}, -6, 5, 10 ** 6, StreamKey(22, ("chi",)))
    codes = ((fields > 0).astype(int) * (1 << np.arange(sites - 1, -1, -1))).sum(axis=1)
    counts = np.bincount(codes, minlength=1 << sites)
    assert stats.chisquare(counts, p * counts.sum()).pvalue > 1e-3


def test_lr_out_of_window():
    env = sample_ising_lr(1.0, 0.3, 3.0, window_halfwidth=20, burnin_sweeps=5, seed=1)
    assert env.window(-20, 20).size == 41
    with pytest.raises(OutOfWindowError):
        env.value(21)
    with pytest.raises(OutOfWindowError):
        env.window(-25, 0)


def test_lr_default_truncation_is_halfwidth():
    env = sample_ising_lr(1.0, 0.1, 2.0, window_halfwidth=10, burnin_sweeps=2, seed=1)
    assert env.params["truncation_radius"] == 10


def test_lr_validation():
    with pytest.raises(ValidationError):
        sample_ising_lr(1.0, 0.3, 0.9, window_halfwidth=10)
    with pytest.raises(ValidationError):
        sample_ising_lr(1.0, -0.3, 2.0, window_halfwidth=10)


def test_lr_zero_beta_is_iid():
    params = dict(beta=0.0, J=1.0, alpha=3.0, window_halfwidth=16, burnin_sweeps=3)
    prof = empirical_correlation("ising-lr", params, [1], 4000, seed=3)
    assert_within_sigma(prof.estimates[0], 0.0, prof.stderrs[0])


def test_lr_correlations_nonnegative():
    # spatial averages inside each field, then across fields
    params = dict(beta=1.0, J=0.3, alpha=3.0, window_halfwidth=256, burnin_sweeps=200,
                  truncation_radius=64)
    lags = np.array([1, 2, 4, 8, 16, 32])
    per_env = []
    for r in range(60):
        w = OrientationEnvironment("ising-lr", params, StreamKey(30, (r,))).window(-200, 200)
        w = w.astype(float)
        per_env.append([np.mean(w[:-lag] * w[lag:]) for lag in lags])
    per_env = np.array(per_env)
    mean = per_env.mean(axis=0)
    se = per_env.std(axis=0, ddof=1) / np.sqrt(per_env.shape[0])
    assert np.all(mean >= -4 * se)
    assert mean[0] > 4 * se[0]  # genuinely correlated at lag 1


def test_association_self_covariance():
    for law, params in [("iid", {}), ("ising-nn", {"beta_J": 0.5})]:
        cov, se = check_association(law, params, 0, 0, 10 ** 5, seed=1)
        assert_within_sigma(cov, 1.0, max(se, 1e-3))


def test_association_iid_independent():
    cov, se = check_association("iid", {}, ("coord", 0), ("coord", 1), 10 ** 5, seed=2)
    assert_within_sigma(cov, 0.0, se)


def test_association_nn_oracle():
    cov, se = check_association("ising-nn", {"beta_J": 0.5}, 0, 1, 10 ** 6, seed=3)
    assert_within_sigma(cov, TANH, se)


@pytest.mark.parametrize("f,g", [
    (("min", [0, 1, 2]), ("sum", [1, 4])),
    (("sum", [-2, -1]), ("min", [3, 4], 1)),
    (("coord", -3), ("sum", [0, 1, 2, 3])),
])
def test_fkg_positivity(f, g):
    cov, se = check_association("ising-nn", {"beta_J": 0.4}, f, g, 200_000, seed=5)
    assert cov >= -4 * se


def test_malformed_functions():
    for bad in [("max", [0]), ("sum", []), ("coord", [0, 1]), ("sum", [0.5]), "eps0",
                ("sum", [0], 1)]:
        with pytest.raises(MalformedFunctionError):
            monotone_function(bad)
    assert monotone_function(3) == MonotoneFunction("coord", (3,))


def test_fit_exact_power_law():
    lags = np.arange(2, 33)
    prof = CorrelationProfile(lags, 0.7 * lags ** -2.0, np.zeros(lags.size), 1)
    exponent, se = fit_decay_exponent(prof, (2, 32))
    assert exponent == pytest.approx(2.0, abs=1e-9)
    assert se == pytest.approx(0.0, abs=1e-9)


def test_fit_constant():
    lags = np.arange(1, 10)
    prof = CorrelationProfile(lags, np.ones(lags.size), np.zeros(lags.size), 1)
    assert fit_decay_exponent(prof, (1, 9))[0] == pytest.approx(0.0, abs=1e-9)


def test_fit_exponential_decay_is_not_a_power_law():
    # exponential decay: the fitted exponent keeps growing with the window
    lags = np.arange(1, 65)
    prof = CorrelationProfile(lags, TANH ** lags, np.zeros(lags.size), 1)
    exps = [fit_decay_exponent(prof, (lo, 2 * lo))[0] for lo in (2, 4, 8, 16, 32)]
    assert np.all(np.diff(exps) > 0)


def test_fit_rejects_nonpositive():
    prof = CorrelationProfile(np.array([1, 2, 3]), np.array([0.5, 0.0, 0.1]), np.zeros(3), 1)
    with pytest.raises(NonpositiveCorrelationError):
        fit_decay_exponent(prof, (1, 3))


def test_law_parse():
    assert Law.parse("ISING_NN") is Law.ISING_NN
    with pytest.raises(ValidationError):
        Law.parse("potts")
