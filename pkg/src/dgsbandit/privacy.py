"""Tree-based Laplace mechanism with a decaying sensitivity schedule.

A binary-counter tree releases a private statistic every round.  At round
t the released noise is a sum of one Laplace term per set bit of t; the
term for bit i is calibrated to the sensitivity at index t - 2^i + 1.
Sensitivities come from a schedule with three modes:

  exact        2L / max(lam, lambda_prime(t)), where lambda_prime is a
               high-probability lower bound on the minimum eigenvalue of
               the design matrix (minus the ridge term),
  simplified   2L/lam up to a burn-in threshold, then 32L/(lambda0 * t),
  constant     L, the non-decaying baseline.

The per-level budget is eps' = eps / ceil(log2 T) and likewise for delta.
Noise is resampled every round by default; `store_tree` switches to a
persistent tree where each node keeps one unit-scale draw that is
rescaled by the current round's calibration, so per-round marginal
scales are identical in both variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .ridge import tree_levels

NOISE_SHAPES = ("per_coordinate", "l2_spherical")
SCHEDULE_MODES = ("exact", "simplified", "constant")


@dataclass(frozen=True)
class PrivacyParams:
    """Budget and problem constants for the release mechanism.

    epsilon, delta: total privacy budget over the horizon
    T:              horizon (number of rounds), >= 2
    L:              bound on ||x||_2
    lambda0:        assumed minimum eigenvalue of E[x x^T] (> 0)
    lam:            ridge parameter, floors the exact schedule
    """

    epsilon: float
    delta: float
    T: int
    L: float = 1.0
    lambda0: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigError("epsilon must be finite and > 0, got %r" % (self.epsilon,))
        if not (0.0 < self.delta < 1.0):
            raise ConfigError("delta must be in (0, 1), got %r" % (self.delta,))
        if not isinstance(self.T, (int, np.integer)) or self.T < 2:
            raise ConfigError("T must be an integer >= 2, got %r" % (self.T,))
        for name in ("L", "lambda0", "lam"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError("%s must be finite and > 0, got %r" % (name, v))

    @property
    def levels(self) -> int:
        return tree_levels(self.T)

    @property
    def epsilon_level(self) -> float:
        """Per-level budget eps' = eps / ceil(log2 T)."""
        return self.epsilon / self.levels

    @property
    def delta_level(self) -> float:
        return self.delta / self.levels


def lambda_prime(t: int, params: PrivacyParams) -> float:
    """High-probability lower bound on the design matrix's minimum
    eigenvalue after t rounds, excluding the ridge term.  Negative for
    small t; grows like lambda0 * t / 4."""
    if t < 1:
        raise InputError("t must be >= 1, got %r" % (t,))
    a = math.log((t + 3) / params.delta_level)
    return params.lambda0 * t / 4.0 - 8.0 * a - 2.0 * math.sqrt(t * a)


class SensitivitySchedule:
    """Per-round L2 sensitivity of the released statistic."""

    def __init__(self, params: PrivacyParams, mode: str = "exact"):
        if mode not in SCHEDULE_MODES:
            raise ConfigError("schedule mode must be one of %r, got %r" % (SCHEDULE_MODES, mode))
        self.params = params
        self.mode = mode
        # Burn-in threshold of the simplified mode.
        self._threshold = 32.0 * math.log(1.0 / params.delta_level) / params.lambda0

    def sensitivity(self, t: int) -> float:
        if not isinstance(t, (int, np.integer)) or t < 1:
            raise InputError("t must be an integer >= 1, got %r" % (t,))
        p = self.params
        if self.mode == "constant":
            return p.L
        if self.mode == "exact":
            return 2.0 * p.L / max(p.lam, lambda_prime(t, p))
        if t <= self._threshold:
            return 2.0 * p.L / p.lam
        # The min keeps the schedule nonincreasing even when the ridge
        # floor is tighter than the decayed bound at the crossover.
        return min(2.0 * p.L / p.lam, 32.0 * p.L / (p.lambda0 * t))

    __call__ = sensitivity


def laplace(scale: float, rng: np.random.Generator) -> float:
    """One centered Laplace draw with the given scale."""
    if not (math.isfinite(scale) and scale > 0):
        raise InputError("scale must be finite and > 0, got %r" % (scale,))
    return float(rng.laplace(0.0, scale))


def vector_noise(d: int, scale: float, shape: str, rng: np.random.Generator) -> np.ndarray:
    """d-dimensional noise with per-coordinate Laplace marginals or with
    an L2 magnitude Gamma(d, scale) spread uniformly over directions.
    Both coincide with a scalar Laplace draw at d = 1."""
    if d < 1:
        raise InputError("d must be >= 1, got %r" % (d,))
    if not (math.isfinite(scale) and scale > 0):
        raise InputError("scale must be finite and > 0, got %r" % (scale,))
    if shape == "per_coordinate":
        return rng.laplace(0.0, scale, size=d)
    if shape == "l2_spherical":
        magnitude = rng.gamma(shape=d, scale=scale)
        direction = rng.normal(size=d)
        norm = float(np.linalg.norm(direction))
        while norm == 0.0:  # pragma: no cover - probability zero
            direction = rng.normal(size=d)
            norm = float(np.linalg.norm(direction))
        return (magnitude / norm) * direction
    raise ConfigError("noise shape must be one of %r, got %r" % (NOISE_SHAPES, shape))


class TreeMechanism:
    """Binary-counter release tree.

    noise(t) returns the total noise vector for round t: one term per set
    bit i of t, each drawn at scale sensitivity(t - 2^i + 1) / eps'.  With
    `strict=True` the per-coordinate scale carries an extra sqrt(d) factor.
    `calls` counts noise() invocations so a harness can audit that each
    round consumes exactly one release.
    """

    def __init__(self, params: PrivacyParams, schedule: SensitivitySchedule, d: int,
                 rng, noise_shape: str = "per_coordinate", strict: bool = False,
                 store_tree: bool = False):
        if noise_shape not in NOISE_SHAPES:
            raise ConfigError("noise shape must be one of %r, got %r" % (NOISE_SHAPES, noise_shape))
        if d < 1:
            raise ConfigError("d must be >= 1, got %r" % (d,))
        if schedule.params is not params:
            # Both views must agree on the budget split.
            if schedule.params != params:
                raise ConfigError("schedule was built for different privacy parameters")
        self.params = params
        self.schedule = schedule
        self.d = int(d)
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.noise_shape = noise_shape
        self.strict = bool(strict)
        self.store_tree = bool(store_tree)
        self.depth = params.levels + 1
        self.calls = 0
        self._nodes = {}

    def term_scales(self, t: int) -> list[float]:
        """Calibrated scales of the Laplace terms composing noise(t)."""
        self._check_round(t)
        eps_l = self.params.epsilon_level
        coord = math.sqrt(self.d) if (self.strict and self.noise_shape == "per_coordinate") else 1.0
        return [self.schedule.sensitivity(t - 2 ** i + 1) / eps_l * coord
                for i in range(self.depth) if (t >> i) & 1]

    def noise(self, t: int) -> np.ndarray:
        self._check_round(t)
        eps_l = self.params.epsilon_level
        coord = math.sqrt(self.d) if (self.strict and self.noise_shape == "per_coordinate") else 1.0
        total = np.zeros(self.d)
        for i in range(self.depth):
            if not (t >> i) & 1:
                continue
            scale = self.schedule.sensitivity(t - 2 ** i + 1) / eps_l * coord
            if self.store_tree:
                node = (i, (t >> i) << i)  # level and dyadic block end
                unit = self._nodes.get(node)
                if unit is None:
                    unit = vector_noise(self.d, 1.0, self.noise_shape, self.rng)
                    self._nodes[node] = unit
                total += scale * unit
            else:
                total += vector_noise(self.d, scale, self.noise_shape, self.rng)
        self.calls += 1
        return total

    def _check_round(self, t) -> None:
        if not isinstance(t, (int, np.integer)) or not (1 <= t <= self.params.T):
            raise InputError("round %r outside [1, %d]" % (t, self.params.T))


def utility_bound(t: int, params: PrivacyParams, zeta: float) -> float:
    """Magnitude the released noise stays below with probability 1 - zeta
    (up to constants), decaying like sqrt(log t) / t."""
    if t < 1:
        raise InputError("t must be >= 1, got %r" % (t,))
    if not (0.0 < zeta < 1.0):
        raise ConfigError("zeta must be in (0, 1), got %r" % (zeta,))
    log_t = max(math.log(t), 0.0)
    return (32.0 * params.L / params.lambda0) * math.log(1.0 / zeta) \
        * params.levels / (t * params.epsilon) * math.sqrt(2.0 * log_t + 2.0)
