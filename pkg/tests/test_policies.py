import numpy as np
import pytest

from dgsbandit import (Arm, ConfidenceParams, ConstantPrivateLinUcbPolicy, DgsLinUcbPolicy,
                       InputError, LinUcbPolicy, PolicyKind, PrivacyParams, RandomPolicy,
                       SensitivitySchedule, SyntheticEnv, SyntheticEnvConfig, TreeMechanism,
                       pseudo_regret, simulate)
from conftest import ZeroNoiseMechanism, bounded_reward_tape

CONF = ConfidenceParams(zeta=0.1, S=1.0, L=1.0, epsilon=2.0, T=1024)


def arms(*vectors):
    return [Arm(id=i, x=np.asarray(v, dtype=float)) for i, v in enumerate(vectors)]


def make_mech(d, seed=0, mode="exact", T=1024):
    params = PrivacyParams(epsilon=2.0, delta=0.1, T=T)
    return TreeMechanism(params, SensitivitySchedule(params, mode), d,
                         np.random.default_rng(seed))


def test_select_exploits_when_alpha_is_zero():
    policy = LinUcbPolicy(2, CONF, 1.0)
    policy._alpha = lambda t: 0.0
    policy.ridge.theta_hat = np.array([1.0, 0.0])
    assert policy.select(arms([1.0, 0.0], [0.0, 1.0]), 1) == 0


def test_select_explores_by_width_on_a_fresh_state():
    policy = LinUcbPolicy(2, CONF, 1.0)
    assert policy.select(arms([1.0, 0.0], [0.5, 0.0]), 1) == 0


def test_select_breaks_ties_by_lowest_index():
    policy = LinUcbPolicy(2, CONF, 1.0)
    assert policy.select(arms([0.5, 0.5], [0.5, 0.5], [0.5, 0.5]), 1) == 0


def test_select_validates_inputs():
    policy = LinUcbPolicy(2, CONF, 1.0)
    with pytest.raises(InputError):
        policy.select([], 1)
    with pytest.raises(InputError):
        policy.select(arms([1.0, 0.0]), 0)
    with pytest.raises(InputError):
        policy.select(arms([1.1, 0.9]), 1)  # norm above L


def test_argmax_is_scale_invariant():
    # Scaling both the exploitation and the exploration term by the same
    # positive constant must not move the argmax.
    rng = np.random.default_rng(8)
    policy = LinUcbPolicy(3, CONF, 1.0)
    for _ in range(20):
        policy.observe(rng.normal(size=3) / 3.0, rng.normal(), 1)
    pool = arms(*(rng.normal(size=3) / 3.0 for _ in range(6)))
    plain = policy.select(pool, 5)
    c = 7.3
    a5 = policy._alpha(5)
    policy._alpha = lambda t: c * a5
    policy.ridge.theta_hat = c * policy.ridge.theta_hat
    assert policy.select(pool, 5) == plain


def test_observe_updates_the_ridge_state():
    policy = LinUcbPolicy(2, CONF, 1.0)
    policy.observe(np.array([1.0, 0.0]), 1.0, 1)
    assert policy.ridge.t == 1
    assert np.allclose(policy.point_estimate(), [0.5, 0.0])


def fixed_sequence(d=4, n=60, seed=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    X /= np.maximum(1.0, np.linalg.norm(X, axis=1, keepdims=True))
    r = np.clip(rng.normal(scale=0.4, size=n), -1.0, 1.0)
    return X, r


def test_dgs_noise_enters_theta_and_replays_exactly():
    X, r = fixed_sequence()
    policy = DgsLinUcbPolicy(4, CONF, 1.0, make_mech(4, seed=21))
    replay = make_mech(4, seed=21)
    for t in range(1, len(r) + 1):
        policy.observe(X[t - 1], r[t - 1], t)
        eta = replay.noise(t)
        assert np.allclose(policy.theta_private - policy.ridge.theta_hat, eta)
        assert np.array_equal(policy.point_estimate(), policy.theta_private)


def test_constant_baseline_solves_from_the_noisy_statistic():
    X, r = fixed_sequence(seed=4)
    policy = ConstantPrivateLinUcbPolicy(4, CONF, 1.0, make_mech(4, seed=22, mode="constant"))
    replay = make_mech(4, seed=22, mode="constant")
    for t in range(1, len(r) + 1):
        policy.observe(X[t - 1], r[t - 1], t)
        eta = replay.noise(t)
        expect = policy.ridge.A_inv @ (policy.ridge.b + eta)
        assert np.allclose(policy.theta_private, expect)


def test_zero_noise_stubs_reduce_both_private_policies_to_linucb():
    X, r = fixed_sequence(seed=5)
    linucb = LinUcbPolicy(4, CONF, 1.0)
    dgs = DgsLinUcbPolicy(4, CONF, 1.0, ZeroNoiseMechanism(4))
    const = ConstantPrivateLinUcbPolicy(4, CONF, 1.0, ZeroNoiseMechanism(4))
    pool_rng = np.random.default_rng(6)
    for t in range(1, len(r) + 1):
        draws = [pool_rng.normal(size=4) for _ in range(5)]
        pool = arms(*(v / max(1.0, np.linalg.norm(v)) for v in draws))
        picks = {p.select(pool, t) for p in (linucb, dgs, const)}
        assert len(picks) == 1
        for p in (linucb, dgs, const):
            p.observe(X[t - 1], r[t - 1], t)
        assert np.allclose(dgs.theta_private, linucb.ridge.theta_hat)
        assert np.allclose(const.theta_private, linucb.ridge.theta_hat)


def test_zero_noise_reduction_on_a_simulated_environment():
    cfg = SyntheticEnvConfig(K=50, d=6, pool_size=8, sigma=0.4, seed=12)
    tape = bounded_reward_tape(SyntheticEnv(cfg), 300, seed=13)
    runs = {}
    for name, policy in (
        ("linucb", LinUcbPolicy(6, CONF, 1.0)),
        ("dgs", DgsLinUcbPolicy(6, CONF, 1.0, ZeroNoiseMechanism(6))),
        ("const", ConstantPrivateLinUcbPolicy(6, CONF, 1.0, ZeroNoiseMechanism(6))),
    ):
        env = SyntheticEnv(cfg)
        env.set_tape(tape)
        runs[name] = simulate(env, policy, 300, theta_star=env.theta_star)["selected"]
    assert np.array_equal(runs["linucb"], runs["dgs"])
    assert np.array_equal(runs["linucb"], runs["const"])


def test_private_policies_clip_rewards_and_count_events():
    policy = DgsLinUcbPolicy(2, CONF, 1.0, ZeroNoiseMechanism(2))
    policy.observe(np.array([1.0, 0.0]), 2.5, 1)
    policy.observe(np.array([0.0, 1.0]), -3.0, 2)
    policy.observe(np.array([0.0, 1.0]), 0.5, 3)
    assert policy.clip_events == 2
    assert np.allclose(policy.ridge.b, [1.0, -0.5])  # clipped to 1 and -1


def test_linucb_does_not_clip():
    policy = LinUcbPolicy(2, CONF, 1.0)
    policy.observe(np.array([1.0, 0.0]), 2.5, 1)
    assert np.allclose(policy.ridge.b, [2.5, 0.0])


def test_one_mechanism_call_per_round():
    mech = make_mech(3, seed=2)
    policy = DgsLinUcbPolicy(3, CONF, 1.0, mech)
    X, r = fixed_sequence(d=3, n=40, seed=9)
    for t in range(1, 41):
        policy.observe(X[t - 1], r[t - 1], t)
    assert mech.calls == 40


def test_pseudo_regret_examples():
    assert pseudo_regret(1.0, 0.0) == 1.0
    assert pseudo_regret(0.7, 0.7) == 0.0
    assert pseudo_regret(0.9, 0.5) == pytest.approx(0.4)
    assert pseudo_regret(0.5, 0.6) == 0.0  # clamped against float noise


def test_random_policy_is_uniform_and_stateless():
    policy = RandomPolicy(np.random.default_rng(31))
    pool = arms([1.0, 0.0], [0.0, 1.0], [0.5, 0.5])
    picks = np.array([policy.select(pool, t) for t in range(1, 3001)])
    freqs = np.bincount(picks, minlength=3) / 3000.0
    assert np.all((freqs > 0.28) & (freqs < 0.39))
    with pytest.raises(InputError):
        policy.point_estimate()
    with pytest.raises(InputError):
        policy.select([], 1)
    again = RandomPolicy(np.random.default_rng(31))
    assert [again.select(pool, t) for t in range(1, 21)] == list(picks[:20])


def test_policy_kind_serialized_names():
    assert {k.value for k in PolicyKind} == {
        "linucb", "private-linucb", "private-linucb-dgs", "random"}
