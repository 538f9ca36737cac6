"""Ridge regression state and UCB confidence radius.

Keeps the sufficient statistics of a d-dimensional ridge regression

    A = lam * I + sum_s x_s x_s^T        b = sum_s r_s x_s

together with an incrementally maintained inverse of A (rank-one
Sherman-Morrison updates) and the current estimate theta_hat = A^-1 b.
The confidence radius alpha(t) is the standard ellipsoid radius plus an
optional privacy-noise term that decays like 1/sqrt(t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError, NumericalError


def tree_levels(horizon: int) -> int:
    """Number of levels a binary-counter release tree uses over `horizon` rounds."""
    if horizon < 2:
        raise ConfigError("horizon must be >= 2, got %r" % (horizon,))
    return int(math.ceil(math.log2(horizon)))


def ellipsoid_log_argument(t: int, L: float, lam: float, zeta: float) -> float:
    # Argument of the log in the ellipsoid radius. Kept in one place so the
    # exact expression is easy to audit and to change.
    return (1.0 + t * L * L / lam) / zeta


class RidgeState:
    """Mutable sufficient statistics of an online ridge regression."""

    def __init__(self, d: int, lam: float):
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ConfigError("dimension d must be a positive integer, got %r" % (d,))
        if not (math.isfinite(lam) and lam > 0):
            raise ConfigError("ridge parameter lam must be finite and > 0, got %r" % (lam,))
        self.d = int(d)
        self.lam = float(lam)
        self.A = lam * np.eye(self.d)
        self.A_inv = np.eye(self.d) / lam
        self.b = np.zeros(self.d)
        self.theta_hat = np.zeros(self.d)
        self.t = 0

    def update(self, x, r) -> None:
        """Absorb one observation (x, r). A never loses rank, so the
        Sherman-Morrison denominator 1 + x^T A^-1 x stays >= 1."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise InputError("feature vector has shape %r, expected (%d,)" % (x.shape, self.d))
        if not np.all(np.isfinite(x)) or not math.isfinite(r):
            raise InputError("non-finite feature or reward in update")
        u = self.A_inv @ x
        denom = 1.0 + float(x @ u)
        self.A_inv -= np.outer(u, u) / denom
        self.A += np.outer(x, x)
        self.b += float(r) * x
        self.theta_hat = self.A_inv @ self.b
        self.t += 1

    def width(self, x) -> float:
        """Confidence width ||x||_{A^-1} = sqrt(x^T A^-1 x)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise InputError("feature vector has shape %r, expected (%d,)" % (x.shape, self.d))
        q = float(x @ self.A_inv @ x)
        if q < -1e-12:
            raise NumericalError("negative quadratic form %r in width" % (q,))
        return math.sqrt(max(q, 0.0))

    def widths(self, X) -> np.ndarray:
        """Vectorised `width` over the rows of X."""
        X = np.asarray(X, dtype=float)
        q = np.einsum("ij,ij->i", X @ self.A_inv, X)
        if np.any(q < -1e-12):
            raise NumericalError("negative quadratic form in widths")
        return np.sqrt(np.clip(q, 0.0, None))


@dataclass(frozen=True)
class ConfidenceParams:
    """Parameters of the confidence radius.

    zeta:        failure probability of the radius
    S:           bound on ||theta*||_2
    L:           bound on ||x||_2
    epsilon:     privacy budget (enters the noise term only)
    T:           horizon (the noise term carries a log2(T) factor)
    private_mode: include the decaying privacy-noise term
    alpha_scale: uniform multiplier applied to the whole radius
    """

    zeta: float
    S: float
    L: float
    epsilon: float
    T: int
    private_mode: bool = False
    alpha_scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.zeta < 1.0):
            raise ConfigError("zeta must be in (0, 1), got %r" % (self.zeta,))
        for name in ("S", "L", "epsilon", "alpha_scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError("%s must be finite and > 0, got %r" % (name, v))
        if self.T < 2:
            raise ConfigError("T must be >= 2, got %r" % (self.T,))


def noise_alpha_term(t: int, params: ConfidenceParams) -> float:
    """Decaying contribution of the injected privacy noise to the radius."""
    log_t = max(math.log(t), 0.0)
    return (params.L / params.epsilon) * tree_levels(params.T) * math.sqrt(log_t) \
        * math.log(1.0 / params.zeta) / math.sqrt(t)


def alpha(t: int, params: ConfidenceParams, lam: float, d: int) -> float:
    """Confidence radius at round t (natural logs except the level count)."""
    if t < 1:
        raise InputError("round index t must be >= 1, got %r" % (t,))
    base = math.sqrt(d * math.log(ellipsoid_log_argument(t, params.L, lam, params.zeta))) \
        + math.sqrt(lam) * params.S
    noise = noise_alpha_term(t, params) if params.private_mode else 0.0
    return params.alpha_scale * (noise + base)
