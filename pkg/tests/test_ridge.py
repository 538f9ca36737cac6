import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dgsbandit import ConfidenceParams, ConfigError, InputError, NumericalError, RidgeState, alpha, tree_levels
from dgsbandit.ridge import ellipsoid_log_argument, noise_alpha_term


def test_fresh_state_is_scaled_identity():
    s = RidgeState(2, 1.0)
    assert np.array_equal(s.A, np.eye(2))
    assert np.array_equal(s.theta_hat, np.zeros(2))
    assert s.t == 0

    s = RidgeState(3, 0.5)
    assert np.allclose(s.A_inv, 2.0 * np.eye(3))

    s = RidgeState(1, 2.0)
    assert np.array_equal(s.A, [[2.0]])
    assert np.array_equal(s.b, [0.0])


@pytest.mark.parametrize("d,lam", [(0, 1.0), (-3, 1.0), (2, 0.0), (2, -1.0), (2, math.inf)])
def test_fresh_state_rejects_bad_params(d, lam):
    with pytest.raises(ConfigError):
        RidgeState(d, lam)


def test_update_rank_one_on_identity():
    s = RidgeState(2, 1.0)
    s.update(np.array([1.0, 0.0]), 1.0)
    assert np.allclose(s.A_inv, np.diag([0.5, 1.0]))
    assert np.allclose(s.b, [1.0, 0.0])
    assert np.allclose(s.theta_hat, [0.5, 0.0])
    assert s.t == 1


def test_update_zero_vector_changes_only_the_counter():
    s = RidgeState(2, 1.0)
    s.update(np.zeros(2), 5.0)
    assert np.array_equal(s.A, np.eye(2))
    assert np.array_equal(s.b, np.zeros(2))
    assert s.t == 1


def test_update_rejects_bad_inputs():
    s = RidgeState(2, 1.0)
    with pytest.raises(InputError):
        s.update(np.array([np.nan, 0.0]), 1.0)
    with pytest.raises(InputError):
        s.update(np.array([1.0, 0.0]), math.inf)
    with pytest.raises(InputError):
        s.update(np.ones(3), 1.0)


def test_maintained_inverse_matches_direct_inversion():
    rng = np.random.default_rng(0)
    s = RidgeState(10, 1.0)
    for _ in range(1000):
        x = rng.normal(size=10)
        x /= max(1.0, np.linalg.norm(x))
        s.update(x, rng.normal())
    direct = np.linalg.inv(s.A)
    assert np.max(np.abs(s.A_inv - direct)) < 1e-8


def test_theta_hat_is_recomputed_from_the_inverse():
    rng = np.random.default_rng(1)
    s = RidgeState(4, 0.7)
    for _ in range(50):
        s.update(rng.normal(size=4) / 3.0, rng.normal())
    assert np.array_equal(s.theta_hat, s.A_inv @ s.b)
    assert np.allclose(s.theta_hat, np.linalg.solve(s.A, s.b), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(1, 60), st.integers(0, 10_000))
def test_sherman_morrison_equivalence_property(d, n, seed):
    rng = np.random.default_rng(seed)
    s = RidgeState(d, float(rng.uniform(0.2, 3.0)))
    for _ in range(n):
        x = rng.normal(size=d)
        x /= max(1.0, np.linalg.norm(x))
        s.update(x, rng.normal())
    assert np.max(np.abs(s.A_inv - np.linalg.inv(s.A))) < 1e-8


def test_width_examples():
    s = RidgeState(2, 1.0)
    assert s.width(np.array([1.0, 0.0])) == pytest.approx(1.0)
    s4 = RidgeState(2, 4.0)
    assert s4.width(np.array([2.0, 0.0])) == pytest.approx(1.0)
    s.update(np.array([1.0, 0.0]), 0.0)
    assert s.width(np.array([1.0, 0.0])) == pytest.approx(math.sqrt(0.5))


def test_width_matches_vectorised_widths():
    rng = np.random.default_rng(2)
    s = RidgeState(5, 1.0)
    for _ in range(30):
        s.update(rng.normal(size=5) / 3.0, rng.normal())
    X = rng.normal(size=(7, 5))
    assert np.allclose(s.widths(X), [s.width(x) for x in X])


def test_width_clamps_tiny_negative_quadratic_forms():
    s = RidgeState(2, 1.0)
    s.A_inv = -1e-13 * np.eye(2)
    assert s.width(np.array([1.0, 0.0])) == 0.0


def test_width_raises_on_inverse_drift():
    s = RidgeState(2, 1.0)
    s.A_inv = -np.eye(2)
    with pytest.raises(NumericalError):
        s.width(np.array([1.0, 0.0]))


@settings(max_examples=40, deadline=None)
@given(st.floats(-50, 50).filter(lambda c: abs(c) > 1e-6), st.integers(0, 10_000))
def test_width_is_absolutely_homogeneous(c, seed):
    rng = np.random.default_rng(seed)
    s = RidgeState(3, 1.0)
    for _ in range(5):
        s.update(rng.normal(size=3) / 2.0, rng.normal())
    x = rng.normal(size=3)
    assert s.width(c * x) == pytest.approx(abs(c) * s.width(x), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_width_never_grows_with_more_data(seed):
    rng = np.random.default_rng(seed)
    s = RidgeState(3, 1.0)
    x = rng.normal(size=3)
    for _ in range(10):
        before = s.width(x)
        s.update(rng.normal(size=3) / 2.0, rng.normal())
        assert s.width(x) <= before + 1e-12


def test_ellipsoid_log_argument_value():
    assert ellipsoid_log_argument(1, 1.0, 1.0, math.exp(-1)) == pytest.approx(2.0 * math.e)
    assert ellipsoid_log_argument(50, 2.0, 4.0, 0.1) == pytest.approx((1 + 50 * 4 / 4) / 0.1)


def test_alpha_non_private_example():
    params = ConfidenceParams(zeta=math.exp(-1), S=1.0, L=1.0, epsilon=1.0, T=2)
    assert alpha(1, params, 1.0, 1) == pytest.approx(math.sqrt(math.log(2 * math.e)) + 1.0)


def test_alpha_private_equals_non_private_at_round_one():
    base = dict(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=1024)
    on = ConfidenceParams(private_mode=True, **base)
    off = ConfidenceParams(private_mode=False, **base)
    assert alpha(1, on, 1.0, 3) == alpha(1, off, 1.0, 3)


def test_noise_term_frozen_values_and_decay():
    # Hand arithmetic: (L/eps) * levels * sqrt(log t) * log(1/zeta) / sqrt(t)
    # with L=1, eps=2, T=1024 (10 levels), zeta=0.1.
    params = ConfidenceParams(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=1024, private_mode=True)
    assert noise_alpha_term(16, params) == pytest.approx(4.792570, abs=1e-5)
    assert noise_alpha_term(256, params) == pytest.approx(1.694429, abs=1e-5)
    assert noise_alpha_term(256, params) < noise_alpha_term(16, params)


def test_alpha_is_nondecreasing_without_noise_term():
    params = ConfidenceParams(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=1024)
    values = [alpha(t, params, 1.0, 5) for t in range(1, 200)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_alpha_rejects_round_zero():
    params = ConfidenceParams(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=16)
    with pytest.raises(InputError):
        alpha(0, params, 1.0, 2)


@pytest.mark.parametrize("kwargs", [
    dict(zeta=0.0), dict(zeta=1.0), dict(S=0.0), dict(L=-1.0),
    dict(epsilon=0.0), dict(alpha_scale=0.0), dict(T=1),
])
def test_confidence_params_validation(kwargs):
    base = dict(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=16)
    base.update(kwargs)
    with pytest.raises(ConfigError):
        ConfidenceParams(**base)


def test_alpha_scale_multiplies_the_whole_radius():
    base = dict(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=1024, private_mode=True)
    one = ConfidenceParams(alpha_scale=1.0, **base)
    fifth = ConfidenceParams(alpha_scale=0.2, **base)
    assert alpha(37, fifth, 1.0, 4) == pytest.approx(0.2 * alpha(37, one, 1.0, 4))


def test_tree_levels():
    assert tree_levels(2) == 1
    assert tree_levels(1024) == 10
    assert tree_levels(1025) == 11
    with pytest.raises(ConfigError):
        tree_levels(1)
