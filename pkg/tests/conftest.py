"""Shared test doubles and helpers."""

import numpy as np

from dgsbandit import NoiseTape, fixed_noise_tape


class RecordingRng:
    """Stands in for a numpy Generator: logs every Laplace scale, emits zeros."""

    def __init__(self):
        self.scales = []

    def laplace(self, loc, scale, size=None):
        self.scales.append(float(scale))
        return np.zeros(size) if size is not None else 0.0


class ZeroNoiseMechanism:
    """Mechanism stand-in whose release is exactly zero."""

    def __init__(self, d):
        self.d = d
        self.calls = 0

    def noise(self, t):
        self.calls += 1
        return np.zeros(self.d)


def bounded_reward_tape(env, T, seed):
    """Feedback tape whose realized rewards all land in [-1, 1], so the
    reward-clipping inside the private policies never fires."""
    tape = fixed_noise_tape(env.config, T, seed)
    means = env.features @ env.theta_star
    values = np.clip(means[None, :] + tape.values, -1.0, 1.0) - means[None, :]
    return NoiseTape(values)
