"""Cosine noise schedule and the forward corruption process."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from ..geometry import ValidationError


@dataclass(frozen=True)
class NoiseSchedule:
    """beta/alpha/alpha_bar sequences; index i holds step t = i + 1, t in [1, T]."""

    T: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    def _check_t(self, t: int) -> int:
        if not 1 <= t <= self.T:
            raise ValidationError(f"step {t} outside [1, {self.T}]")
        return t - 1

    def beta_at(self, t: int) -> float:
        return float(self.beta[self._check_t(t)])

    def alpha_at(self, t: int) -> float:
        return float(self.alpha[self._check_t(t)])

    def alpha_bar_at(self, t: int) -> float:
        return float(self.alpha_bar[self._check_t(t)])


def cosine_schedule(T: int, s: float = 0.008) -> NoiseSchedule:
    """Cosine alpha_bar profile f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2) / f(0)."""
    if T < 2:
        raise ValidationError("schedule needs at least 2 steps")
    t = np.arange(T + 1, dtype=np.float64)
    f = np.cos(((t / T + s) / (1.0 + s)) * (math.pi / 2.0)) ** 2
    beta = np.clip(1.0 - f[1:] / f[:-1], 1e-8, 0.999)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(alpha)
    return NoiseSchedule(T=T, beta=beta, alpha=alpha, alpha_bar=alpha_bar)


def forward_noise(p0: np.ndarray, t: int, eps: np.ndarray, schedule: NoiseSchedule) -> np.ndarray:
    """q(p_t | p_0): sqrt(alpha_bar_t) * p0 + sqrt(1 - alpha_bar_t) * eps."""
    ab = schedule.alpha_bar_at(t)
    return math.sqrt(ab) * p0 + math.sqrt(1.0 - ab) * eps


def schedule_fingerprint(schedule: NoiseSchedule) -> str:
    h = hashlib.sha256()
    h.update(str(schedule.T).encode())
    h.update(np.ascontiguousarray(schedule.beta, dtype=np.float64).tobytes())
    return h.hexdigest()[:16]
