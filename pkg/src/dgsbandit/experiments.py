"""Benchmark harness: seeded experiment runners and CSV/metadata output.

Every experiment derives child seeds from a master seed with a stable
hash, so reruns are byte-identical.  Within one run id all policies face
identical candidate pools and an identical feedback-noise tape; policy
noise streams are separate.  Each CSV gets a sidecar metadata JSON whose
`config` section is itself a loadable configuration, making every output
reproducible from the sidecar alone.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import warnings

import numpy as np

from . import __version__
from .envs import (PerturbationConfig, PerturbedEnv, ReplayEnv, ReplayEnvConfig,
                   SyntheticEnv, SyntheticEnvConfig, estimate_lambda0, fixed_noise_tape)
from .errors import ConfigError, DataError
from .policies import (ConstantPrivateLinUcbPolicy, DgsLinUcbPolicy, LinUcbPolicy,
                       PolicyKind, RandomPolicy, pseudo_regret)
from .privacy import (NOISE_SHAPES, SCHEDULE_MODES, PrivacyParams, SensitivitySchedule,
                      TreeMechanism)
from .ridge import ConfidenceParams

EXPERIMENTS = ("regret", "replay-reward", "param-error", "eps-sweep", "arm-change")
DEFAULT_POLICIES = ("linucb", "private-linucb", "private-linucb-dgs")
SYNTHETIC_CHANGE_POINTS = (0, 100, 200)
REPLAY_CHANGE_POINTS = (0, 1000, 2000)


def child_seed(master_seed: int, *parts) -> int:
    """Deterministic 63-bit child seed: SHA-256 over the master seed and
    the stream name parts, joined with '|'."""
    text = "|".join([str(master_seed)] + [str(p) for p in parts])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclasses.dataclass
class ExperimentConfig:
    experiment: str = "regret"
    T: int = 5000
    runs: int = 10
    master_seed: int = 0
    policies: list = dataclasses.field(default_factory=lambda: list(DEFAULT_POLICIES))
    epsilon: float = 2.0
    delta: float = 0.1
    lam: float = 1.0
    lambda0: float | None = None  # None: estimate from pool features
    schedule: str = "simplified"
    noise_shape: str = "per_coordinate"
    strict_shape: bool = False
    store_tree: bool = False
    zeta: float = 0.1
    S: float = 1.0
    alpha_scale: float = 1.0
    eps_grid: list = dataclasses.field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0, 4.0, 5.0])
    change_points: list | None = None
    change_delta: float = 0.5
    out_dir: str = "results"
    env: dict = dataclasses.field(default_factory=lambda: {
        "kind": "synthetic", "K": 100, "d": 10, "pool_size": 10, "sigma": 0.5, "L": 1.0})

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError("experiment must be one of %r, got %r"
                              % (EXPERIMENTS, self.experiment))
        if self.T < 2:
            raise ConfigError("T must be >= 2, got %r" % (self.T,))
        if self.runs < 1:
            raise ConfigError("runs must be >= 1, got %r" % (self.runs,))
        if self.schedule not in SCHEDULE_MODES:
            raise ConfigError("schedule must be one of %r, got %r"
                              % (SCHEDULE_MODES, self.schedule))
        if self.noise_shape not in NOISE_SHAPES:
            raise ConfigError("noise_shape must be one of %r, got %r"
                              % (NOISE_SHAPES, self.noise_shape))
        kinds = {k.value for k in PolicyKind}
        for p in self.policies:
            if p not in kinds:
                raise ConfigError("unknown policy %r, valid: %r" % (p, sorted(kinds)))

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["env"] = dict(self.env)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ConfigError("unknown config keys: %r" % (sorted(unknown),))
        return cls(**data)


def build_env(env_cfg: dict, seed: int):
    kind = env_cfg.get("kind", "synthetic")
    if kind == "synthetic":
        cfg = SyntheticEnvConfig(
            K=env_cfg.get("K", 1000), d=env_cfg.get("d", 10),
            pool_size=env_cfg.get("pool_size", 10), sigma=env_cfg.get("sigma", 0.5),
            L=env_cfg.get("L", 1.0), seed=seed)
        env = SyntheticEnv(cfg)
    elif kind == "replay":
        cfg = ReplayEnvConfig(
            features_path=env_cfg["features_path"],
            interactions_path=env_cfg["interactions_path"],
            pool_size=env_cfg.get("pool_size", 25),
            user_id=env_cfg.get("user_id"), seed=seed)
        env = ReplayEnv(cfg)
    else:
        raise ConfigError("env kind must be 'synthetic' or 'replay', got %r" % (kind,))
    sigma_ctx = float(env_cfg.get("sigma_ctx", 0.0))
    if sigma_ctx > 0.0:
        env = PerturbedEnv(env, PerturbationConfig(sigma_ctx), seed=child_seed(seed, "perturb"))
    return env


def resolve_lambda0(config: ExperimentConfig) -> float:
    """Configured lambda0, or a deterministic estimate from pool features."""
    if config.lambda0 is not None:
        return float(config.lambda0)
    probe = build_env(config.env, child_seed(config.master_seed, "lambda0-probe"))
    return estimate_lambda0(probe, rounds=50)


def make_policy(kind: str, config: ExperimentConfig, d: int, L: float, lambda0: float,
                noise_seed: int, epsilon: float | None = None):
    eps = config.epsilon if epsilon is None else float(epsilon)
    if kind == PolicyKind.RANDOM.value:
        return RandomPolicy(np.random.default_rng(noise_seed))
    private_kinds = (PolicyKind.PRIVATE_LINUCB_DGS.value, PolicyKind.PRIVATE_LINUCB.value)
    conf = ConfidenceParams(zeta=config.zeta, S=config.S, L=L, epsilon=eps, T=config.T,
                            private_mode=(kind in private_kinds),
                            alpha_scale=config.alpha_scale)
    if kind == PolicyKind.LINUCB.value:
        return LinUcbPolicy(d, conf, config.lam)
    params = PrivacyParams(epsilon=eps, delta=config.delta, T=config.T, L=L,
                           lambda0=lambda0, lam=config.lam)
    rng = np.random.default_rng(noise_seed)
    if kind == PolicyKind.PRIVATE_LINUCB_DGS.value:
        schedule = SensitivitySchedule(params, config.schedule)
        mech = TreeMechanism(params, schedule, d, rng, noise_shape=config.noise_shape,
                             strict=config.strict_shape, store_tree=config.store_tree)
        return DgsLinUcbPolicy(d, conf, config.lam, mech)
    if kind == PolicyKind.PRIVATE_LINUCB.value:
        schedule = SensitivitySchedule(params, "constant")
        mech = TreeMechanism(params, schedule, d, rng, noise_shape=config.noise_shape,
                             strict=config.strict_shape, store_tree=config.store_tree)
        return ConstantPrivateLinUcbPolicy(d, conf, config.lam, mech)
    raise ConfigError("unknown policy kind %r" % (kind,))


def simulate(env, policy, T: int, theta_star=None, flip_round: int | None = None):
    """Drive one policy for T rounds.  Returns per-round selections,
    cumulative pseudo-regret (when theta_star is known), parameter error,
    and cumulative realized reward."""
    synthetic = theta_star is not None
    selected = np.empty(T, dtype=np.int64)
    cum_regret = np.empty(T) if synthetic else None
    param_error = np.empty(T) if synthetic else None
    cum_reward = np.empty(T)
    has_estimate = not isinstance(policy, RandomPolicy)
    regret = 0.0
    reward_total = 0.0
    for t in range(1, T + 1):
        pool = env.pool(t)
        j = policy.select(pool, t)
        arm = pool[j]
        r = env.reward(arm, t)
        if flip_round == t:
            r = 1.0 - r
        policy.observe(arm.x, r, t)
        selected[t - 1] = arm.id
        reward_total += r
        cum_reward[t - 1] = reward_total
        if synthetic:
            regret += pseudo_regret(env.best_mean(pool), env.true_mean(arm))
            cum_regret[t - 1] = regret
            if has_estimate:
                param_error[t - 1] = float(np.linalg.norm(policy.point_estimate() - theta_star))
            else:
                param_error[t - 1] = np.nan
    return {"selected": selected, "cum_regret": cum_regret,
            "param_error": param_error, "cum_reward": cum_reward}


def _warn_on_clipping(policy, kind: str, run_id, counters: dict) -> None:
    events = getattr(policy, "clip_events", 0)
    if events:
        counters[kind] = counters.get(kind, 0) + events
        warnings.warn("policy %s clipped %d rewards to [-1, 1] in run %r"
                      % (kind, events, run_id), stacklevel=2)


def _require_synthetic(config: ExperimentConfig, what: str) -> None:
    if config.env.get("kind", "synthetic") != "synthetic":
        raise ConfigError("%s needs a synthetic environment with known theta*" % (what,))


def run_regret(config: ExperimentConfig) -> dict:
    """Cumulative pseudo-regret (and parameter error) per policy per run."""
    _require_synthetic(config, "the regret experiment")
    lambda0 = resolve_lambda0(config)
    clip_counters: dict = {}
    rows = []
    finals: dict = {}
    for run in range(config.runs):
        tape = None
        for kind in config.policies:
            env = build_env(config.env, child_seed(config.master_seed, run, "env"))
            if tape is None:
                tape = fixed_noise_tape(env.config, config.T,
                                        child_seed(config.master_seed, run, "tape"))
            env.set_tape(tape)
            policy = make_policy(kind, config, env.d, env.feature_bound, lambda0,
                                 child_seed(config.master_seed, run, kind, "policy"))
            out = simulate(env, policy, config.T, theta_star=env.theta_star)
            _warn_on_clipping(policy, kind, run, clip_counters)
            for t in range(1, config.T + 1):
                pe = out["param_error"][t - 1]
                rows.append((run, kind, t, out["cum_regret"][t - 1],
                             None if math.isnan(pe) else pe, int(out["selected"][t - 1])))
            finals.setdefault(kind, []).append(float(out["cum_regret"][-1]))
    summary = {k: {"mean": float(np.mean(v)), "std": float(np.std(v))}
               for k, v in finals.items()}
    return {"rows": rows, "columns": ("run_id", "policy", "t", "cum_regret",
                                      "param_error", "selected_arm"),
            "summary": {"final_cum_regret": summary}, "lambda0": lambda0,
            "clip_events": clip_counters}


def run_param_error(config: ExperimentConfig) -> dict:
    """Same long-format table as run_regret; kept as its own entry point
    because it is a distinct benchmark axis."""
    _require_synthetic(config, "the parameter-error experiment")
    result = run_regret(dataclasses.replace(config, experiment="regret"))
    per_policy: dict = {}
    for run, kind, t, _, pe, _ in result["rows"]:
        if t == config.T and pe is not None:
            per_policy.setdefault(kind, []).append(pe)
    result["summary"] = {"final_param_error": {
        k: {"mean": float(np.mean(v)), "std": float(np.std(v))} for k, v in per_policy.items()}}
    return result


def run_replay_reward(config: ExperimentConfig) -> dict:
    """Cumulative reward and its ratio to a random run on the same pools.
    The normalizer shares the random policy's seed stream, so a listed
    random policy is its own normalizer (ratio exactly 1).  The ratio
    column is empty until the normalizer has collected a nonzero reward."""
    if config.env.get("kind") != "replay":
        raise ConfigError("the replay-reward experiment needs a replay environment")
    lambda0 = resolve_lambda0(config)
    clip_counters: dict = {}
    rows = []
    finals: dict = {}
    for run in range(config.runs):
        env = build_env(config.env, child_seed(config.master_seed, run, "env"))
        normalizer = RandomPolicy(np.random.default_rng(
            child_seed(config.master_seed, run, PolicyKind.RANDOM.value, "policy")))
        norm_out = simulate(env, normalizer, config.T)
        norm_cum = norm_out["cum_reward"]
        for kind in config.policies:
            env = build_env(config.env, child_seed(config.master_seed, run, "env"))
            policy = make_policy(kind, config, env.d, env.feature_bound, lambda0,
                                 child_seed(config.master_seed, run, kind, "policy"))
            out = simulate(env, policy, config.T)
            _warn_on_clipping(policy, kind, run, clip_counters)
            for t in range(1, config.T + 1):
                denom = norm_cum[t - 1]
                ratio = out["cum_reward"][t - 1] / denom if denom > 0 else None
                rows.append((run, kind, t, out["cum_reward"][t - 1], ratio,
                             int(out["selected"][t - 1])))
            finals.setdefault(kind, []).append(
                float(out["cum_reward"][-1] / norm_cum[-1]) if norm_cum[-1] > 0 else None)
    summary = {k: {"mean": float(np.mean([x for x in v if x is not None])),
                   "std": float(np.std([x for x in v if x is not None]))}
               for k, v in finals.items()}
    return {"rows": rows, "columns": ("run_id", "policy", "t", "cum_reward",
                                      "reward_ratio", "selected_arm"),
            "summary": {"final_reward_ratio": summary}, "lambda0": lambda0,
            "clip_events": clip_counters}


def run_eps_sweep(config: ExperimentConfig) -> dict:
    """Final cumulative regret of the decaying-sensitivity policy across a
    grid of privacy budgets.  Policy noise seeds are shared across the
    grid so budgets are compared on coupled draws."""
    _require_synthetic(config, "the epsilon sweep")
    lambda0 = resolve_lambda0(config)
    kind = PolicyKind.PRIVATE_LINUCB_DGS.value
    clip_counters: dict = {}
    rows = []
    finals: dict = {}
    for eps in config.eps_grid:
        if not (isinstance(eps, (int, float)) and math.isfinite(eps) and eps > 0):
            raise ConfigError("eps_grid values must be finite and > 0, got %r" % (eps,))
        for run in range(config.runs):
            env = build_env(config.env, child_seed(config.master_seed, run, "env"))
            env.set_tape(fixed_noise_tape(env.config, config.T,
                                          child_seed(config.master_seed, run, "tape")))
            policy = make_policy(kind, config, env.d, env.feature_bound, lambda0,
                                 child_seed(config.master_seed, run, kind, "policy"),
                                 epsilon=eps)
            out = simulate(env, policy, config.T, theta_star=env.theta_star)
            _warn_on_clipping(policy, kind, run, clip_counters)
            final = float(out["cum_regret"][-1])
            rows.append((run, kind, float(eps), final))
            finals.setdefault(float(eps), []).append(final)
    summary = {str(e): {"mean": float(np.mean(v)), "std": float(np.std(v))}
               for e, v in finals.items()}
    return {"rows": rows, "columns": ("run_id", "policy", "epsilon", "final_regret"),
            "summary": {"final_cum_regret_by_epsilon": summary}, "lambda0": lambda0,
            "clip_events": clip_counters}


def run_arm_change(config: ExperimentConfig) -> dict:
    """Neighboring-sequence experiment: rerun each policy on a reward
    sequence whose single realized value at the change round is modified
    (+change_delta on synthetic tapes, a label flip on replay), and count
    rounds whose selections differ."""
    kind_env = config.env.get("kind", "synthetic")
    cps = config.change_points
    if cps is None:
        cps = list(SYNTHETIC_CHANGE_POINTS if kind_env == "synthetic" else REPLAY_CHANGE_POINTS)
    for cp in cps:
        if not (0 <= cp < config.T):
            raise ConfigError("change point %r outside [0, T)" % (cp,))
    lambda0 = resolve_lambda0(config)
    rows = []
    stats: dict = {}
    clip_counters: dict = {}
    for kind in config.policies:
        if kind == PolicyKind.RANDOM.value:
            continue  # reward-blind, trivially zero changes
        reps = 1 if kind == PolicyKind.LINUCB.value else 5
        for rep in range(reps):
            noise_seed = child_seed(config.master_seed, rep, kind, "policy")
            env = build_env(config.env, child_seed(config.master_seed, rep, "env"))
            tape = None
            if kind_env == "synthetic":
                tape = fixed_noise_tape(env.config, config.T,
                                        child_seed(config.master_seed, rep, "tape"))
                env.set_tape(tape)
            theta = env.theta_star if kind_env == "synthetic" else None
            policy = make_policy(kind, config, env.d, env.feature_bound, lambda0, noise_seed)
            base = simulate(env, policy, config.T, theta_star=theta)
            _warn_on_clipping(policy, kind, rep, clip_counters)
            for cp in cps:
                t_star = cp + 1
                env = build_env(config.env, child_seed(config.master_seed, rep, "env"))
                flip = None
                if kind_env == "synthetic":
                    env.set_tape(tape.bumped(t_star, int(base["selected"][t_star - 1]),
                                             config.change_delta))
                else:
                    flip = t_star
                policy = make_policy(kind, config, env.d, env.feature_bound, lambda0, noise_seed)
                other = simulate(env, policy, config.T, theta_star=theta, flip_round=flip)
                changed = int(np.sum(base["selected"] != other["selected"]))
                rows.append((kind, cp, rep, changed))
                stats.setdefault(kind, {}).setdefault(cp, []).append(changed)
    summary = {k: {str(cp): {"mean": float(np.mean(v)), "std": float(np.std(v))}
                   for cp, v in by_cp.items()}
               for k, by_cp in stats.items()}
    return {"rows": rows, "columns": ("policy", "change_point", "rep", "changed_arms"),
            "summary": {"changed_arms": summary}, "lambda0": lambda0,
            "clip_events": clip_counters}


RUNNERS = {"regret": run_regret, "param-error": run_param_error,
           "replay-reward": run_replay_reward, "eps-sweep": run_eps_sweep,
           "arm-change": run_arm_change}


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def write_outputs(config: ExperimentConfig, result: dict) -> tuple[str, str]:
    """Write <experiment>.csv plus a metadata sidecar and return both paths."""
    os.makedirs(config.out_dir, exist_ok=True)
    csv_path = os.path.join(config.out_dir, config.experiment + ".csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(result["columns"])
        for row in result["rows"]:
            writer.writerow([_format_cell(v) for v in row])
    meta_cfg = config.to_dict()
    if "lambda0" in result:
        meta_cfg["lambda0"] = result["lambda0"]
    meta = {"package": "dgsbandit", "version": __version__, "config": meta_cfg,
            "summary": result.get("summary", {}),
            "clip_events": result.get("clip_events", {})}
    meta_path = os.path.join(config.out_dir, config.experiment + ".meta.json")
    with open(meta_path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, meta_path


def run_experiment(config: ExperimentConfig) -> tuple[str, str]:
    runner = RUNNERS.get(config.experiment)
    if runner is None:
        raise ConfigError("no runner for experiment %r" % (config.experiment,))
    return write_outputs(config, runner(config))
