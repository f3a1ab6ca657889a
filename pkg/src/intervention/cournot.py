"""Shared-channel congestion example: a Cournot duopoly with an interfering device.

Quality of service falls linearly with total usage, ``[q - b * total]^+``;
each user earns quality times its own usage, and the system objective is the
sum of user payoffs.  With the device silent this is the zero-cost linear
Cournot duopoly.  The closed forms below (best responses, thresholds,
continuous sustainability) are the oracles the grid solver is checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import bisect

from .game_core import ActionGrid, InterventionGameModel


class UnsupportedError(ValueError):
    """Closed form requested for a game it was never derived for."""


@dataclass(frozen=True)
class CournotParams:
    q: float = 12.0
    b: float = 1.0
    a0_max: float = 0.0
    a_max: tuple[float, ...] = field(default=(12.0, 12.0))
    grid_step: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "a_max", tuple(float(a) for a in self.a_max))
        if self.q <= 0 or self.b <= 0:
            raise ValueError("q and b must be positive")
        if self.a0_max < 0:
            raise ValueError("a0_max must be nonnegative")
        if not self.a_max or any(a <= 0 for a in self.a_max):
            raise ValueError("user caps must be positive and at least one user is required")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")

    @property
    def n_users(self) -> int:
        return len(self.a_max)


def quality(params: CournotParams, a0, profile: Sequence):
    """``[q - b(a0 + sum(profile))]^+``; broadcasts over arrays."""
    users = profile[0]
    for a in profile[1:]:
        users = users + a
    # users' total first so two-user welfare is exactly symmetric
    return np.maximum(params.q - params.b * (a0 + users), 0.0)


@dataclass(frozen=True)
class CournotPayoff:
    params: CournotParams

    def __call__(self, i: int, a0, actions: Sequence):
        quality_level = quality(self.params, a0, actions)
        if i:
            return quality_level * actions[i - 1]
        total = quality_level * actions[0]
        for a in actions[1:]:
            total = total + quality_level * a
        return total


def make_game(params: CournotParams) -> InterventionGameModel:
    step = params.grid_step
    return InterventionGameModel(
        user_grids=tuple(ActionGrid.interval(0.0, cap, step) for cap in params.a_max),
        device_grid=ActionGrid.interval(0.0, params.a0_max, step),
        payoff=CournotPayoff(params),
        min_intervention=0.0,
        max_intervention=params.a0_max,
    )


class Thresholds(NamedTuple):
    social_optimum: float  # symmetric per-user usage maximizing welfare
    nash: float  # symmetric Nash usage without intervention
    optimum_sustaining_a0: float  # device cap from which the optimum is sustainable


def _require_duopoly(params: CournotParams) -> None:
    if params.n_users != 2:
        raise UnsupportedError(f"closed forms need exactly 2 users, got {params.n_users}")


def analytic_thresholds(params: CournotParams) -> Thresholds:
    _require_duopoly(params)
    q, b = params.q, params.b
    root2 = math.sqrt(2.0)
    return Thresholds(q / (4 * b), q / (3 * b), (3 * root2 - 4) * q / (4 * root2 * b))


def analytic_best_response(
    params: CournotParams, a_other: float, a0: float, user: int = 1
) -> float:
    """Continuous maximizer of ``[q - b(a0 + x + a_other)]^+ * x`` over ``[0, cap]``."""
    _require_duopoly(params)
    x = (params.q - params.b * (a0 + a_other)) / (2 * params.b)
    return min(max(x, 0.0), params.a_max[user - 1])


def analytic_is_sustainable(
    params: CournotParams, profile: Sequence[float], tol: float = 0.0
) -> bool:
    """Sustainability over continuous actions, with the device punishing at ``a0_max``."""
    _require_duopoly(params)
    payoff = CournotPayoff(params)
    for user in (1, 2):
        other = profile[2 - user]
        reward = float(payoff(user, 0.0, tuple(profile)))
        dev = analytic_best_response(params, other, params.a0_max, user)
        deviated = (dev, other) if user == 1 else (other, dev)
        if reward < float(payoff(user, params.a0_max, deviated)) - tol:
            return False
    return True


def sustaining_threshold(
    params: CournotParams,
    profile: Sequence[float] | None = None,
    xtol: float = 1e-12,
) -> float:
    """Smallest device cap that makes ``profile`` analytically sustainable.

    Bisects the boolean test over ``[0, q/b]``; defaults to the symmetric
    social optimum.
    """
    if profile is None:
        opt = analytic_thresholds(params).social_optimum
        profile = (opt, opt)

    def sign(a0_max: float) -> float:
        ok = analytic_is_sustainable(replace(params, a0_max=a0_max), profile)
        return 1.0 if ok else -1.0

    hi = params.q / params.b
    if sign(0.0) > 0:
        return 0.0
    return bisect(sign, 0.0, hi, xtol=xtol)
