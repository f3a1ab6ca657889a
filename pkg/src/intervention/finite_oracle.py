"""Exhaustive rule enumeration for tiny games.

Nothing here uses the extreme-rule characterization: every total mapping
from profiles to device actions is generated and the Nash condition of the
induced game is checked directly.  Rules are scored in batches against a
precomputed payoff tensor, which is the same arithmetic as
:func:`game_core.sustains` applied one rule at a time.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .game_core import (
    DEFAULT_TOL,
    ActionGrid,
    BudgetExceededError,
    EquilibriumResult,
    InterventionGameModel,
    InterventionRule,
    RegionMask,
    SolverError,
)

DEFAULT_RULE_CAP = 10**6
_CHUNK = 4096

RuleTable = InterventionRule


def rule_space_size(game: InterventionGameModel) -> int:
    return len(game.device_grid) ** game.n_profiles


def _check_cap(game: InterventionGameModel, cap: int) -> int:
    size = rule_space_size(game)
    if size > cap:
        raise BudgetExceededError(
            f"rule space has {size} rules "
            f"({len(game.device_grid)}^{game.n_profiles}), cap is {cap}"
        )
    return size


def enumerate_rules(
    game: InterventionGameModel, cap: int = DEFAULT_RULE_CAP
) -> Iterator[RuleTable]:
    """Every total rule exactly once, first profile most significant."""
    _check_cap(game, cap)
    for entries in itertools.product(game.device_grid.points, repeat=game.n_profiles):
        yield RuleTable(game.shape, entries)


def _rule_codes(n_actions: int, n_profiles: int, start: int, stop: int) -> np.ndarray:
    """Device-action indices for rules ``start..stop-1`` (same order as enumerate_rules)."""
    k = np.arange(start, stop, dtype=np.int64)
    codes = np.empty((stop - start, n_profiles), dtype=np.int64)
    for p in range(n_profiles - 1, -1, -1):
        codes[:, p] = k % n_actions
        k //= n_actions
    return codes


def _payoff_tensor(game: InterventionGameModel) -> np.ndarray:
    """``[participant, device action, flat profile]`` table of raw payoffs."""
    profiles = list(game.profiles())
    cols = [np.array([p[d] for p in profiles], dtype=float) for d in range(game.n_users)]
    table = np.empty((game.n_users + 1, len(game.device_grid), len(profiles)))
    for i in range(game.n_users + 1):
        for k, a0 in enumerate(game.device_grid.points):
            table[i, k] = np.broadcast_to(game.payoff(i, a0, cols), len(profiles))
    return table


def _deviation_sets(game: InterventionGameModel) -> list[list[np.ndarray]]:
    """For user i and flat profile p, the flat indices of all unilateral deviations."""
    shape = game.shape
    out = []
    for user in range(game.n_users):
        per_profile = []
        for idx in itertools.product(*(range(n) for n in shape)):
            devs = []
            for k in range(shape[user]):
                alt = list(idx)
                alt[user] = k
                devs.append(np.ravel_multi_index(alt, shape))
            per_profile.append(np.array(devs))
        out.append(per_profile)
    return out


def scan_attainable(
    game: InterventionGameModel, tol: float = DEFAULT_TOL, cap: int = DEFAULT_RULE_CAP
) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Stream ``(rule codes, sustains mask, device payoff)`` batches.

    ``sustains[r, p]`` says rule ``r`` of the batch sustains flat profile ``p``;
    ``device payoff[r, p]`` is the system objective under that rule there.
    """
    total = _check_cap(game, cap)
    table = _payoff_tensor(game)
    devs = _deviation_sets(game)
    n_profiles = game.n_profiles
    flat = np.arange(n_profiles)
    for start in range(0, total, _CHUNK):
        codes = _rule_codes(len(game.device_grid), n_profiles, start, min(total, start + _CHUNK))
        induced = table[:, codes, flat]  # [participant, rule, profile]
        ok = np.ones(codes.shape, dtype=bool)
        for user in range(1, game.n_users + 1):
            v = induced[user]
            for p in range(n_profiles):
                best = v[:, devs[user - 1][p]].max(axis=1)
                ok[:, p] &= v[:, p] >= best - tol
        yield codes, ok, induced[0]


def _grid_points(game: InterventionGameModel) -> tuple[tuple[float, ...], ...]:
    return tuple(g.points for g in game.user_grids)


def _welfare_at_min(game: InterventionGameModel) -> np.ndarray:
    values = [game.payoff(0, game.min_intervention, p) for p in game.profiles()]
    return np.asarray(values, dtype=float).reshape(game.shape)


def sustainable_set_bruteforce(
    game: InterventionGameModel, tol: float = DEFAULT_TOL, cap: int = DEFAULT_RULE_CAP
) -> RegionMask:
    found = np.zeros(game.n_profiles, dtype=bool)
    for _, ok, _ in scan_attainable(game, tol, cap):
        found |= ok.any(axis=0)
        if found.all():
            break
    return RegionMask(_grid_points(game), found.reshape(game.shape), _welfare_at_min(game))


def equilibrium_bruteforce(
    game: InterventionGameModel, tol: float = DEFAULT_TOL, cap: int = DEFAULT_RULE_CAP
) -> EquilibriumResult:
    """Best attainable (rule, profile) pair for the system objective, by full scan."""
    per_profile = np.full(game.n_profiles, -np.inf)
    for _, ok, v0 in scan_attainable(game, tol, cap):
        attained = np.where(ok, v0, -np.inf).max(axis=0)
        per_profile = np.maximum(per_profile, attained)
    best_value = per_profile.max()
    if not np.isfinite(best_value):
        raise SolverError("no attainable rule/profile pair")
    hits = np.flatnonzero(per_profile >= best_value - tol)
    maximizers = tuple(
        game.profile_at(np.unravel_index(int(p), game.shape)) for p in hits
    )
    return EquilibriumResult(maximizers, maximizers[0], float(best_value))


def random_finite_game(
    rng: np.random.Generator,
    n_users: int = 2,
    max_actions: int = 3,
    max_device_actions: int = 3,
    integer_payoffs: bool = False,
) -> InterventionGameModel:
    """Random table game whose designated device extremes bracket every other action.

    With ``integer_payoffs`` the payoffs are small integers, which makes
    exact ties (the hard case for weak inequalities) common.
    """
    from .tables import TablePayoff

    user_sizes = [int(rng.integers(1, max_actions + 1)) for _ in range(n_users)]
    n_dev = int(rng.integers(1, max_device_actions + 1))
    user_grids = tuple(ActionGrid.explicit(range(n)) for n in user_sizes)
    device_grid = ActionGrid.explicit(range(n_dev))
    order = rng.permutation(n_dev)
    best_k, worst_k = int(order[0]), int(order[-1])

    shape = (n_users + 1, n_dev, *user_sizes)
    if integer_payoffs:
        top = rng.integers(0, 5, size=(n_users + 1, *user_sizes)).astype(float)
        gap = rng.integers(0, 4, size=top.shape).astype(float)
        frac = rng.integers(0, 3, size=shape) / 2.0
    else:
        top = rng.normal(size=(n_users + 1, *user_sizes))
        gap = rng.exponential(size=top.shape)
        frac = rng.uniform(size=shape)
    table = top[:, None] - frac * gap[:, None]
    table[:, best_k] = top
    table[:, worst_k] = top - gap
    return InterventionGameModel(
        user_grids,
        device_grid,
        TablePayoff(user_grids, device_grid, table),
        min_intervention=float(best_k),
        max_intervention=float(worst_k),
    )
