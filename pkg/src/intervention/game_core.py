"""Intervention games with perfect monitoring.

A manager commits to an intervention rule mapping the users' observed action
profile to a device action; the users then play the induced simultaneous
game.  Everything here works on discretized action spaces (``ActionGrid``),
so every "for all deviations" quantifier is a finite check.

Payoff evaluators must be pure and must broadcast over numpy arrays:
``payoff(i, a0, actions)`` where ``a0`` is a scalar or array and ``actions``
is a sequence of ``n_users`` scalars/arrays.  Index 0 is the device (system
objective), indices ``1..n_users`` are the users.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

DEFAULT_TOL = 1e-9
DEFAULT_PROFILE_BUDGET = 10**7

# membership slack for matching a float against a grid point
_GRID_ATOL = 1e-9

Profile = tuple[float, ...]
PayoffFn = Callable[..., "float | np.ndarray"]


class InterventionError(Exception):
    """Base class for errors raised by the solver."""


class OffGridError(InterventionError, ValueError):
    pass


class BudgetExceededError(InterventionError, RuntimeError):
    pass


class SolverError(InterventionError, RuntimeError):
    pass


# ---------------------------------------------------------------------------
# action spaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionGrid:
    """A finite, ascending set of actions for one player.

    Build with :meth:`interval` or :meth:`explicit`.  Interval grids always
    contain ``upper`` as their last point, even if ``step`` overshoots it.
    """

    kind: str
    lower: float | None = None
    upper: float | None = None
    step: float | None = None
    points: tuple[float, ...] = ()
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "interval":
            lo, hi, step = float(self.lower), float(self.upper), float(self.step)
            if not np.isfinite([lo, hi, step]).all():
                raise ValueError("interval bounds and step must be finite")
            if step <= 0:
                raise ValueError(f"grid step must be > 0, got {step}")
            if lo > hi:
                raise ValueError(f"grid lower {lo} exceeds upper {hi}")
            n = int(np.floor((hi - lo) / step + 1e-9))
            # rounding keeps 0.1-style grids on their shortest decimal repr
            pts = [round(lo + k * step, 12) for k in range(n + 1)]
            pts = [p for p in pts if p < hi - _GRID_ATOL]
            pts.append(hi)
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
            object.__setattr__(self, "step", step)
            object.__setattr__(self, "points", tuple(pts))
        elif self.kind == "explicit":
            pts = tuple(float(p) for p in self.points)
            if not pts:
                raise ValueError("explicit grid needs at least one point")
            if any(b <= a for a, b in zip(pts, pts[1:])):
                raise ValueError("explicit grid points must be strictly increasing")
            object.__setattr__(self, "points", pts)
        else:
            raise ValueError(f"unknown grid kind {self.kind!r}")
        arr = np.asarray(self.points, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "_array", arr)

    @classmethod
    def interval(cls, lower: float, upper: float, step: float) -> "ActionGrid":
        return cls("interval", lower=lower, upper=upper, step=step)

    @classmethod
    def explicit(cls, points: Sequence[float]) -> "ActionGrid":
        return cls("explicit", points=tuple(points))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[float]:
        return iter(self.points)

    @property
    def array(self) -> np.ndarray:
        return self._array

    def indices_of(self, values) -> np.ndarray:
        """Vectorized :meth:`index_of`."""
        v = np.asarray(values, dtype=float)
        pos = np.searchsorted(self._array, v)
        lo = np.clip(pos - 1, 0, len(self) - 1)
        hi = np.clip(pos, 0, len(self) - 1)
        nearest = np.where(
            np.abs(self._array[hi] - v) <= np.abs(self._array[lo] - v), hi, lo
        )
        off = np.abs(self._array[nearest] - v) > _GRID_ATOL * np.maximum(1.0, np.abs(v))
        if np.any(off):
            bad = v[off] if v.ndim else v
            raise OffGridError(f"value(s) {np.atleast_1d(bad)[:3].tolist()} not on grid")
        return nearest

    def index_of(self, value: float) -> int:
        return int(self.indices_of(value))

    def __contains__(self, value) -> bool:
        try:
            self.index_of(value)
        except OffGridError:
            return False
        return True


# ---------------------------------------------------------------------------
# the game
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InterventionGameModel:
    user_grids: tuple[ActionGrid, ...]
    device_grid: ActionGrid
    payoff: PayoffFn
    min_intervention: float
    max_intervention: float

    def __post_init__(self):
        object.__setattr__(self, "user_grids", tuple(self.user_grids))
        if not self.user_grids:
            raise ValueError("a game needs at least one user")
        for name in ("min_intervention", "max_intervention"):
            value = getattr(self, name)
            if value not in self.device_grid:
                raise OffGridError(f"{name}={value} is not a device grid point")
            snapped = self.device_grid.points[self.device_grid.index_of(value)]
            object.__setattr__(self, name, snapped)

    @property
    def n_users(self) -> int:
        return len(self.user_grids)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.user_grids)

    @property
    def n_profiles(self) -> int:
        return int(np.prod(self.shape, dtype=object))

    def profile_index(self, profile: Sequence[float]) -> tuple[int, ...]:
        if len(profile) != self.n_users:
            raise OffGridError(
                f"profile has {len(profile)} entries, game has {self.n_users} users"
            )
        return tuple(g.index_of(a) for g, a in zip(self.user_grids, profile))

    def profile_at(self, index: Sequence[int]) -> Profile:
        return tuple(g.points[k] for g, k in zip(self.user_grids, index))

    def snap(self, profile: Sequence[float]) -> Profile:
        """Replace each entry by the grid point it matches."""
        return self.profile_at(self.profile_index(profile))

    def snap_device(self, a0: float) -> float:
        return self.device_grid.points[self.device_grid.index_of(a0)]

    def profiles(self) -> Iterator[Profile]:
        """All grid profiles in ascending lexicographic order."""
        return itertools.product(*(g.points for g in self.user_grids))

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*(g.array for g in self.user_grids), indexing="ij"))

    def u(self, i: int, a0: float, profile: Sequence[float]) -> float:
        """Raw payoff of participant ``i`` at a grid point."""
        self._check_index(i, allow_device=True)
        a0 = self.snap_device(a0)
        return float(self.payoff(i, a0, self.snap(profile)))

    def _check_index(self, i: int, allow_device: bool) -> None:
        lo = 0 if allow_device else 1
        if not (lo <= i <= self.n_users):
            raise IndexError(f"participant index {i} outside {lo}..{self.n_users}")


# ---------------------------------------------------------------------------
# intervention rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterventionRule:
    """An arbitrary rule stored as a total table over grid profiles.

    ``entries`` lists one device action per profile in ascending (C-order)
    profile enumeration.
    """

    shape: tuple[int, ...]
    entries: tuple[float, ...]
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.entries) != int(np.prod(self.shape)):
            raise ValueError(
                f"rule has {len(self.entries)} entries for {int(np.prod(self.shape))} profiles"
            )
        object.__setattr__(self, "_array", np.asarray(self.entries, dtype=float))

    @classmethod
    def constant(cls, game: InterventionGameModel, a0: float) -> "InterventionRule":
        a0 = game.snap_device(a0)
        return cls(game.shape, (a0,) * game.n_profiles)

    @classmethod
    def from_function(
        cls, game: InterventionGameModel, fn: Callable[[Profile], float]
    ) -> "InterventionRule":
        return cls(game.shape, tuple(game.snap_device(fn(p)) for p in game.profiles()))

    def actions_at(self, index: Sequence[np.ndarray]) -> np.ndarray:
        flat = np.ravel_multi_index(tuple(index), self.shape)
        return self._array[flat]

    def action(self, game: InterventionGameModel, profile: Sequence[float]) -> float:
        return float(self.actions_at(game.profile_index(profile)))


@dataclass(frozen=True)
class ExtremeRule:
    """Reward the target profile with the minimal intervention, punish
    everything else with the maximal one."""

    target: Profile
    target_index: tuple[int, ...]
    low: float
    high: float

    def actions_at(self, index: Sequence[np.ndarray]) -> np.ndarray:
        hit = np.ones(np.broadcast(*index).shape, dtype=bool)
        for k, t in zip(index, self.target_index):
            hit &= np.asarray(k) == t
        return np.where(hit, self.low, self.high)

    def action(self, game: InterventionGameModel, profile: Sequence[float]) -> float:
        return float(self.actions_at(game.profile_index(profile)))


def extreme_rule(game: InterventionGameModel, target: Sequence[float]) -> ExtremeRule:
    index = game.profile_index(target)
    return ExtremeRule(
        game.profile_at(index), index, game.min_intervention, game.max_intervention
    )


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Sustainability flag and rewarded welfare for every grid profile."""

    grid_points: tuple[tuple[float, ...], ...]
    sustainable: np.ndarray
    welfare_at_min: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sustainable", _frozen(self.sustainable.astype(bool)))
        object.__setattr__(self, "welfare_at_min", _frozen(self.welfare_at_min))
        if self.sustainable.shape != self.grid_shape:
            raise ValueError("mask shape does not match grid")

    @property
    def grid_shape(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.grid_points)

    @property
    def count(self) -> int:
        return int(self.sustainable.sum())

    @property
    def total(self) -> int:
        return int(self.sustainable.size)

    def profiles(self) -> list[Profile]:
        """Sustainable profiles in ascending lexicographic order."""
        return [
            tuple(self.grid_points[d][k] for d, k in enumerate(idx))
            for idx in zip(*np.nonzero(self.sustainable))
        ]

    def bounding_box(self) -> list[tuple[float, float]] | None:
        if not self.count:
            return None
        idx = np.nonzero(self.sustainable)
        return [
            (self.grid_points[d][int(k.min())], self.grid_points[d][int(k.max())])
            for d, k in enumerate(idx)
        ]

    def rows(self) -> Iterator[tuple[Profile, bool, float]]:
        for idx in itertools.product(*(range(n) for n in self.grid_shape)):
            yield (
                tuple(self.grid_points[d][k] for d, k in enumerate(idx)),
                bool(self.sustainable[idx]),
                float(self.welfare_at_min[idx]),
            )

    def same_as(self, other: "RegionMask") -> bool:
        return (
            self.grid_points == other.grid_points
            and np.array_equal(self.sustainable, other.sustainable)
            and np.array_equal(self.welfare_at_min, other.welfare_at_min)
        )

    def first_difference(self, other: "RegionMask") -> Profile | None:
        diff = np.argwhere(self.sustainable != other.sustainable)
        if not len(diff):
            return None
        return tuple(self.grid_points[d][k] for d, k in enumerate(diff[0]))


@dataclass(frozen=True)
class EquilibriumResult:
    maximizers: tuple[Profile, ...]
    canonical: Profile
    value: float

    def implied_rule(self, game: InterventionGameModel) -> ExtremeRule:
        return extreme_rule(game, self.canonical)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _deviation_index(index: tuple[int, ...], user: int, size: int) -> list[np.ndarray]:
    """Index arrays for every unilateral deviation of ``user`` (1-based)."""
    cols = [np.full(size, k) for k in index]
    cols[user - 1] = np.arange(size)
    return cols


def _points(game: InterventionGameModel, index: Sequence[np.ndarray]) -> list[np.ndarray]:
    return [g.array[k] for g, k in zip(game.user_grids, index)]


def induced_payoff(
    game: InterventionGameModel,
    rule: InterventionRule | ExtremeRule,
    profile: Sequence[float],
    i: int,
) -> float:
    """Payoff of participant ``i`` when the device answers ``profile`` via ``rule``."""
    game._check_index(i, allow_device=True)
    index = game.profile_index(profile)
    a0 = float(rule.actions_at(index))
    return float(game.payoff(i, a0, game.profile_at(index)))


def sustains(
    game: InterventionGameModel,
    rule: InterventionRule | ExtremeRule,
    profile: Sequence[float],
    tol: float = DEFAULT_TOL,
) -> bool:
    """True when ``profile`` is a Nash equilibrium of the game induced by ``rule``."""
    index = game.profile_index(profile)
    for user in range(1, game.n_users + 1):
        cols = _deviation_index(index, user, game.shape[user - 1])
        values = np.asarray(
            game.payoff(user, rule.actions_at(cols), _points(game, cols)), dtype=float
        )
        if values[index[user - 1]] < values.max() - tol:
            return False
    return True


def best_deviation_payoff(
    game: InterventionGameModel, i: int, profile: Sequence[float], a0_fixed: float
) -> float:
    """Best payoff user ``i`` can reach by deviating while the device plays ``a0_fixed``."""
    game._check_index(i, allow_device=False)
    a0 = game.snap_device(a0_fixed)
    index = game.profile_index(profile)
    cols = _deviation_index(index, i, game.shape[i - 1])
    return float(np.max(game.payoff(i, a0, _points(game, cols))))


def is_sustainable(
    game: InterventionGameModel, profile: Sequence[float], tol: float = DEFAULT_TOL
) -> bool:
    """Closed characterization: the rewarded payoff of every user must beat
    their best deviation under maximal punishment.

    Only valid when the extremal device actions really are extremal; see
    :func:`verify_assumption`.
    """
    profile = game.snap(profile)
    for i in range(1, game.n_users + 1):
        reward = float(game.payoff(i, game.min_intervention, profile))
        if reward < best_deviation_payoff(game, i, profile, game.max_intervention) - tol:
            return False
    return True


def _check_budget(game: InterventionGameModel, budget: int) -> None:
    if game.n_profiles > budget:
        raise BudgetExceededError(
            f"grid has {game.n_profiles} profiles (shape {game.shape}), budget is {budget}"
        )


def sustainable_set(
    game: InterventionGameModel,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> RegionMask:
    _check_budget(game, budget)
    mesh = game.mesh()
    ok = np.ones(game.shape, dtype=bool)
    for i in range(1, game.n_users + 1):
        reward = np.broadcast_to(game.payoff(i, game.min_intervention, mesh), game.shape)
        punished = np.broadcast_to(game.payoff(i, game.max_intervention, mesh), game.shape)
        # best deviation depends on the others' actions only
        best = punished.max(axis=i - 1, keepdims=True)
        ok &= reward >= best - tol
    welfare = np.broadcast_to(game.payoff(0, game.min_intervention, mesh), game.shape)
    return RegionMask(
        tuple(g.points for g in game.user_grids), ok, np.asarray(welfare, dtype=float)
    )


def equilibrium_from_mask(mask: RegionMask, tol: float = DEFAULT_TOL) -> EquilibriumResult:
    """Maximize rewarded welfare over the sustainable profiles of ``mask``."""
    if not mask.count:
        raise SolverError("no sustainable profile on grid")
    value = float(mask.welfare_at_min[mask.sustainable].max())
    best = mask.sustainable & (mask.welfare_at_min >= value - tol)
    maximizers = tuple(
        tuple(mask.grid_points[d][k] for d, k in enumerate(idx))
        for idx in zip(*np.nonzero(best))
    )
    # np.nonzero walks C-order, i.e. lexicographic on ascending grids
    return EquilibriumResult(maximizers, maximizers[0], value)


def intervention_equilibrium(
    game: InterventionGameModel,
    tol: float = DEFAULT_TOL,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> EquilibriumResult:
    """Optimal sustainable profile; the optimal rule is the extreme rule targeting it."""
    return equilibrium_from_mask(sustainable_set(game, tol, budget), tol)


@dataclass(frozen=True)
class AssumptionReport:
    passed: bool
    mode: str
    checked_profiles: int
    counterexample: tuple[int, float, Profile] | None = None

    def describe(self) -> str:
        if self.passed:
            return f"extremal intervention ordering holds ({self.mode}, {self.checked_profiles} profiles)"
        i, a0, profile = self.counterexample
        return (
            f"extremal intervention ordering violated for participant {i} "
            f"at a0={a0!r}, profile={profile!r} ({self.mode})"
        )


def verify_assumption(
    game: InterventionGameModel,
    samples: int | None = None,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    budget: int = DEFAULT_PROFILE_BUDGET,
) -> AssumptionReport:
    """Check that the minimal/maximal device actions bracket every other one.

    Exhaustive over all profiles by default; with ``samples=k`` draws ``k``
    profiles uniformly (with replacement) from the grid instead.  Every device
    action and every participant (device included) is always checked.
    """
    if samples is None:
        _check_budget(game, budget)
        mode = "exhaustive"
        coords = game.mesh()
    else:
        mode = f"sampled({samples})"
        rng = np.random.default_rng(seed)
        idx = [rng.integers(0, len(g), size=samples) for g in game.user_grids]
        coords = tuple(_points(game, idx))
    shape = np.broadcast(*coords).shape
    checked = int(np.prod(shape))

    def values(i, a0):
        return np.broadcast_to(np.asarray(game.payoff(i, a0, coords), dtype=float), shape)

    bounds = [
        (values(i, game.min_intervention), values(i, game.max_intervention))
        for i in range(game.n_users + 1)
    ]
    for a0 in game.device_grid.points:
        for i, (best, worst) in enumerate(bounds):
            mid = values(i, a0)
            bad = (best < mid - tol) | (mid < worst - tol)
            if bad.any():
                pos = np.unravel_index(int(np.argmax(bad)), shape)
                profile = tuple(float(c[pos]) for c in np.broadcast_arrays(*coords))
                return AssumptionReport(False, mode, checked, (i, a0, profile))
    return AssumptionReport(True, mode, checked)
