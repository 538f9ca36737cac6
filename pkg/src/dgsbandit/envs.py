"""Bandit environments: a synthetic linear world and an offline replay stream.

The synthetic environment draws K feature vectors with U(0,1) coordinates,
rescales every vector to norm at most L, and pays x^T theta* plus Gaussian
feedback noise.  Feedback noise can come from a pre-drawn (T x K) tape so
that paired executions share every draw; bumping one tape entry yields a
neighboring reward sequence that differs in exactly one realized value.

The replay environment serves one user's logged interactions: each round's
pool holds one positively rated item and pool_size - 1 unrated ones, with
binary rewards by membership.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, InputError
from .policies import Arm


def _capped(X: np.ndarray, L: float) -> np.ndarray:
    """Rescale rows of X to norm at most L (rows already inside are kept)."""
    norms = np.linalg.norm(X, axis=-1, keepdims=True)
    return X / np.maximum(1.0, norms / L)


class NoiseTape:
    """Pre-drawn feedback noise, one entry per (round, arm)."""

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ConfigError("noise tape must be 2-dimensional, got shape %r" % (values.shape,))
        self.values = values

    @property
    def horizon(self) -> int:
        return self.values.shape[0]

    def bumped(self, t_star: int, arm_id: int, delta: float) -> "NoiseTape":
        """Copy of the tape with entry (t_star, arm_id) shifted by delta."""
        if not (1 <= t_star <= self.horizon):
            raise InputError("t_star %r outside [1, %d]" % (t_star, self.horizon))
        out = self.values.copy()
        out[t_star - 1, arm_id] += delta
        return NoiseTape(out)


@dataclass
class SyntheticEnvConfig:
    K: int = 1000
    d: int = 10
    pool_size: int = 10
    sigma: float = 0.5
    L: float = 1.0
    seed: int = 0
    theta_star: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.K < self.pool_size or self.pool_size < 1:
            raise ConfigError("need 1 <= pool_size <= K, got pool_size=%r K=%r"
                              % (self.pool_size, self.K))
        if self.d < 1:
            raise ConfigError("d must be >= 1, got %r" % (self.d,))
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise ConfigError("sigma must be finite and >= 0, got %r" % (self.sigma,))
        if self.L <= 0:
            raise ConfigError("L must be > 0, got %r" % (self.L,))


class SyntheticEnv:
    """Linear payoff world with a fixed arm universe.

    Three independent seeded streams: one that materializes the universe
    (features and theta*), one that samples candidate pools, one that
    draws feedback noise when no tape is attached.
    """

    def __init__(self, config: SyntheticEnvConfig):
        self.config = config
        ss = np.random.SeedSequence(config.seed)
        s_universe, s_pool, s_feedback = ss.spawn(3)
        rng = np.random.default_rng(s_universe)
        self.features = _capped(rng.random((config.K, config.d)), config.L)
        if config.theta_star is not None:
            theta = np.asarray(config.theta_star, dtype=float)
            if theta.shape != (config.d,):
                raise ConfigError("theta_star has shape %r, expected (%d,)"
                                  % (theta.shape, config.d))
            self.theta_star = theta
        else:
            self.theta_star = _capped(rng.random(config.d), config.L)
        self._pool_rng = np.random.default_rng(s_pool)
        self._feedback_rng = np.random.default_rng(s_feedback)
        self.tape: NoiseTape | None = None

    @property
    def d(self) -> int:
        return self.config.d

    @property
    def feature_bound(self) -> float:
        return self.config.L

    def clone(self) -> "SyntheticEnv":
        return SyntheticEnv(self.config)

    def set_tape(self, tape: NoiseTape | None) -> None:
        if tape is not None and tape.values.shape[1] != self.config.K:
            raise ConfigError("tape has %d arm columns, universe has %d"
                              % (tape.values.shape[1], self.config.K))
        self.tape = tape

    def pool(self, t: int):
        ids = self._pool_rng.choice(self.config.K, size=self.config.pool_size, replace=False)
        return [Arm(id=int(i), x=self.features[i]) for i in ids]

    def true_mean(self, arm: Arm) -> float:
        return float(arm.x @ self.theta_star)

    def best_mean(self, pool) -> float:
        return max(self.true_mean(a) for a in pool)

    def reward(self, arm: Arm, t: int) -> float:
        mean = self.true_mean(arm)
        if self.tape is not None:
            if not (1 <= t <= self.tape.horizon):
                raise InputError("round %r outside tape horizon %d" % (t, self.tape.horizon))
            return mean + float(self.tape.values[t - 1, arm.id])
        return mean + float(self._feedback_rng.normal(0.0, self.config.sigma))


def fixed_noise_tape(config: SyntheticEnvConfig, T: int, seed: int) -> NoiseTape:
    """(T x K) Gaussian feedback-noise table, deterministic in the seed."""
    if T < 1:
        raise ConfigError("T must be >= 1, got %r" % (T,))
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return NoiseTape(rng.normal(0.0, config.sigma, size=(T, config.K)))


@dataclass
class PerturbationConfig:
    sigma_ctx: float = 0.0

    def __post_init__(self):
        if self.sigma_ctx < 0 or not math.isfinite(self.sigma_ctx):
            raise ConfigError("sigma_ctx must be finite and >= 0, got %r" % (self.sigma_ctx,))


class PerturbedEnv:
    """Wrapper that adds spherical Gaussian noise to every pool feature and
    re-caps norms, leaving arm identities and the payoff rule unchanged."""

    def __init__(self, base, pconfig: PerturbationConfig, seed: int = 0):
        self.base = base
        self.pconfig = pconfig
        self._rng = np.random.default_rng(np.random.SeedSequence(seed))

    def __getattr__(self, name):
        return getattr(self.base, name)

    def pool(self, t: int):
        arms = self.base.pool(t)
        sigma = self.pconfig.sigma_ctx
        L = self.base.feature_bound
        out = []
        for a in arms:
            x = a.x + self._rng.normal(0.0, sigma, size=a.x.shape)
            out.append(Arm(id=a.id, x=_capped(x, L)))
        return out


@dataclass
class ReplayEnvConfig:
    features_path: str
    interactions_path: str
    pool_size: int = 25
    seed: int = 0
    user_id: int | None = None

    def __post_init__(self):
        if self.pool_size < 2:
            raise ConfigError("pool_size must be >= 2, got %r" % (self.pool_size,))


class ReplayEnv:
    """One user's logged feedback replayed as a bandit stream.

    Features load from a CSV with header id,f1..fd; rows are rescaled to
    norm at most 1.  Interactions load from a CSV with header
    user_id,item_id listing positively rated items.  Every pool mixes one
    positive (uniform from the user's history, fresh each round) with
    pool_size - 1 unrated items, in shuffled order.  Rewards are binary.
    """

    def __init__(self, config: ReplayEnvConfig):
        self.config = config
        self.features, self.d = _load_features(config.features_path)
        interactions = _load_interactions(config.interactions_path)
        if config.user_id is not None:
            user = config.user_id
            if user not in interactions:
                raise DataError("user %r has no interactions" % (user,))
        else:
            # Deterministic default: the user with the most positives.
            user = max(sorted(interactions), key=lambda u: len(interactions[u]))
        self.user = user
        positives = interactions[user]
        unknown = positives - set(self.features)
        if unknown:
            raise DataError("interactions reference unknown items, e.g. %r" % (sorted(unknown)[0],))
        self.positives = sorted(positives)
        self.negatives = sorted(set(self.features) - positives)
        if not self.positives:
            raise DataError("user %r has no positively rated items" % (user,))
        if len(self.negatives) < config.pool_size - 1:
            raise DataError("need %d unrated items, only %d available"
                            % (config.pool_size - 1, len(self.negatives)))
        ss = np.random.SeedSequence(config.seed)
        (s_pool,) = ss.spawn(1)
        self._pool_rng = np.random.default_rng(s_pool)
        self._pos_set = positives

    @property
    def feature_bound(self) -> float:
        return 1.0

    def clone(self) -> "ReplayEnv":
        return ReplayEnv(self.config)

    def pool(self, t: int):
        rng = self._pool_rng
        pos = self.positives[int(rng.integers(len(self.positives)))]
        neg_idx = rng.choice(len(self.negatives), size=self.config.pool_size - 1, replace=False)
        ids = [pos] + [self.negatives[i] for i in neg_idx]
        order = rng.permutation(len(ids))
        return [Arm(id=ids[i], x=self.features[ids[i]]) for i in order]

    def reward(self, arm: Arm, t: int) -> float:
        return 1.0 if arm.id in self._pos_set else 0.0


def _load_features(path: str):
    if not os.path.exists(path):
        raise DataError("features file not found: %s" % (path,))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id":
            raise DataError("features file must start with an 'id' column: %s" % (path,))
        d = len(header) - 1
        if d < 1:
            raise DataError("features file has no feature columns: %s" % (path,))
        feats = {}
        for row in reader:
            if not row:
                continue
            if len(row) != d + 1:
                raise DataError("row with %d fields, expected %d: %r" % (len(row), d + 1, row))
            item = int(row[0])
            if item in feats:
                raise DataError("duplicate item id %r in %s" % (item, path))
            feats[item] = _capped(np.array([float(v) for v in row[1:]]), 1.0)
    if not feats:
        raise DataError("features file is empty: %s" % (path,))
    return feats, d


def _load_interactions(path: str):
    if not os.path.exists(path):
        raise DataError("interactions file not found: %s" % (path,))
    users: dict[int, set[int]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["user_id", "item_id"]:
            raise DataError("interactions file needs header user_id,item_id: %s" % (path,))
        for row in reader:
            if not row:
                continue
            if len(row) != 2:
                raise DataError("malformed interaction row %r" % (row,))
            users.setdefault(int(row[0]), set()).add(int(row[1]))
    if not users:
        raise DataError("interactions file is empty: %s" % (path,))
    return users


def generate_fixture(out_dir: str, seed: int = 0, n_items: int = 300, n_users: int = 20,
                     d: int = 25, min_positives: int = 25, max_positives: int = 60):
    """Write a small synthetic replay dataset (features.csv, interactions.csv)."""
    if n_items <= max_positives:
        raise ConfigError("need n_items > max_positives")
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    features = _capped(rng.normal(0.0, 0.5, size=(n_items, d)), 1.0)
    fpath = os.path.join(out_dir, "features.csv")
    with open(fpath, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + ["f%d" % (j + 1) for j in range(d)])
        for i in range(n_items):
            writer.writerow([i] + ["%.12g" % v for v in features[i]])
    ipath = os.path.join(out_dir, "interactions.csv")
    with open(ipath, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "item_id"])
        for u in range(n_users):
            k = int(rng.integers(min_positives, max_positives + 1))
            items = rng.choice(n_items, size=k, replace=False)
            for it in sorted(int(v) for v in items):
                writer.writerow([u, it])
    return fpath, ipath


def estimate_lambda0(env, rounds: int = 100) -> float:
    """Minimum eigenvalue of the sample second-moment matrix of pool
    features, gathered from a fresh clone so the env's streams stay put."""
    if rounds < 1:
        raise ConfigError("rounds must be >= 1, got %r" % (rounds,))
    probe = env.clone()
    rows = []
    for t in range(1, rounds + 1):
        rows.extend(a.x for a in probe.pool(t))
    X = np.stack(rows)
    second_moment = (X.T @ X) / len(rows)
    return float(np.linalg.eigvalsh(second_moment)[0])
