"""Bandit policies: LinUCB and two privatized variants.

All policies score a candidate pool with x^T theta + alpha_t * ||x||_{A^-1}
and pick the first maximizer.  The private variants differ in where the
release noise enters: the decaying-sensitivity policy adds tree noise to
theta_hat itself, the constant-sensitivity baseline adds tree noise to the
reward statistic b before solving.  Rewards fed to the private variants
are clipped to [-1, 1]; `clip_events` counts how often that bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .privacy import TreeMechanism
from .ridge import ConfidenceParams, RidgeState, alpha, tree_levels


@dataclass
class Arm:
    id: int
    x: np.ndarray = field(repr=False)


class PolicyKind(enum.Enum):
    LINUCB = "linucb"
    PRIVATE_LINUCB = "private-linucb"
    PRIVATE_LINUCB_DGS = "private-linucb-dgs"
    RANDOM = "random"


def pseudo_regret(best_mean: float, chosen_mean: float) -> float:
    """Per-round pseudo-regret, clamped at zero."""
    return max(float(best_mean) - float(chosen_mean), 0.0)


class _UcbBase:
    """Shared pool scoring for the UCB family."""

    def __init__(self, d: int, conf: ConfidenceParams, lam: float):
        self.d = int(d)
        self.conf = conf
        self.ridge = RidgeState(d, lam)

    def point_estimate(self) -> np.ndarray:
        return self.ridge.theta_hat

    def _scores(self, pool, t):
        if not pool:
            raise InputError("candidate pool is empty")
        if t < 1:
            raise InputError("round index must be >= 1, got %r" % (t,))
        X = np.stack([arm.x for arm in pool])
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms > self.conf.L + 1e-9):
            raise InputError("arm feature norm %.6g exceeds bound L=%.6g"
                             % (float(norms.max()), self.conf.L))
        a_t = self._alpha(t)
        return X @ self.point_estimate() + a_t * self.ridge.widths(X)

    def _alpha(self, t: int) -> float:
        return alpha(t, self.conf, self.ridge.lam, self.d)

    def select(self, pool, t: int) -> int:
        """Index of the highest-scoring arm; ties go to the lowest index."""
        return int(np.argmax(self._scores(pool, t)))


class LinUcbPolicy(_UcbBase):
    kind = PolicyKind.LINUCB

    def observe(self, x, r, t: int) -> None:
        self.ridge.update(x, r)


class _PrivateBase(_UcbBase):
    def __init__(self, d, conf, lam, mechanism: TreeMechanism):
        super().__init__(d, conf, lam)
        self.mechanism = mechanism
        self.clip_events = 0

    def _clip(self, r: float) -> float:
        c = min(max(float(r), -1.0), 1.0)
        if c != float(r):
            self.clip_events += 1
        return c


class DgsLinUcbPolicy(_PrivateBase):
    """LinUCB with tree noise added to theta_hat, rescaled every round by
    the decaying sensitivity schedule."""

    kind = PolicyKind.PRIVATE_LINUCB_DGS

    def __init__(self, d, conf, lam, mechanism):
        super().__init__(d, conf, lam, mechanism)
        self.theta_private = np.zeros(self.d)

    def point_estimate(self) -> np.ndarray:
        return self.theta_private

    def observe(self, x, r, t: int) -> None:
        self.ridge.update(x, self._clip(r))
        eta = self.mechanism.noise(t)
        self.theta_private = self.ridge.theta_hat + eta


class ConstantPrivateLinUcbPolicy(_PrivateBase):
    """Baseline that noises the reward statistic b with a constant
    (non-decaying) sensitivity and solves theta from the noisy b.  Its
    radius replaces the decaying noise term with the matching constant
    one."""

    kind = PolicyKind.PRIVATE_LINUCB

    def __init__(self, d, conf, lam, mechanism):
        super().__init__(d, conf, lam, mechanism)
        self.theta_private = np.zeros(self.d)

    def point_estimate(self) -> np.ndarray:
        return self.theta_private

    def _alpha(self, t: int) -> float:
        c = self.conf
        base = alpha(t, ConfidenceParams(zeta=c.zeta, S=c.S, L=c.L, epsilon=c.epsilon,
                                         T=c.T, private_mode=False, alpha_scale=c.alpha_scale),
                     self.ridge.lam, self.d)
        if not c.private_mode:
            return base
        noise = (c.L / c.epsilon) * tree_levels(c.T) * math.sqrt(max(math.log(t), 0.0)) \
            * math.log(1.0 / c.zeta)
        return base + c.alpha_scale * noise

    def observe(self, x, r, t: int) -> None:
        self.ridge.update(x, self._clip(r))
        eta = self.mechanism.noise(t)
        self.theta_private = self.ridge.A_inv @ (self.ridge.b + eta)


class RandomPolicy:
    """Uniform arm selection from its own random stream."""

    kind = PolicyKind.RANDOM

    def __init__(self, rng):
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)

    def point_estimate(self) -> np.ndarray:
        raise InputError("random policy keeps no model estimate")

    def select(self, pool, t: int) -> int:
        if not pool:
            raise InputError("candidate pool is empty")
        return int(self.rng.integers(len(pool)))

    def observe(self, x, r, t: int) -> None:
        pass
