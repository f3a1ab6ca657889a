"""Explicit payoff tables: evaluator, CSV reader and fixture writer.

Table CSV columns are ``user,a0,a1,...,aN,payoff`` with one row per
participant and grid point; the grids are the distinct values found in each
action column.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .game_core import ActionGrid, InterventionGameModel


class TableFormatError(ValueError):
    """Malformed payoff table; message carries ``path:line``."""


@dataclass(frozen=True, eq=False)
class TablePayoff:
    user_grids: tuple[ActionGrid, ...]
    device_grid: ActionGrid
    table: np.ndarray  # [participant, device action, a1, ..., aN]

    def __call__(self, i: int, a0, actions: Sequence):
        k0 = self.device_grid.indices_of(a0)
        ks = [g.indices_of(a) for g, a in zip(self.user_grids, actions)]
        out = self.table[i][(k0, *ks)]
        return out if np.ndim(out) else float(out)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_payoff_table(game: InterventionGameModel, path: str | Path) -> None:
    """Dump every payoff of ``game`` on its grids; floats round-trip exactly."""
    n = game.n_users
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user", "a0", *(f"a{k}" for k in range(1, n + 1)), "payoff"])
        for i in range(n + 1):
            for a0 in game.device_grid.points:
                for profile in game.profiles():
                    value = float(game.payoff(i, a0, profile))
                    w.writerow([i, _fmt(a0), *map(_fmt, profile), _fmt(value)])


def load_payoff_table(
    path: str | Path,
    min_intervention: float | None = None,
    max_intervention: float | None = None,
) -> InterventionGameModel:
    """Read a table game.

    The minimal/maximal intervention default to the smallest and largest
    device action in the file.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise TableFormatError(f"{path}:1: empty payoff table") from None
        n = len(header) - 3
        expected = ["user", "a0", *(f"a{k}" for k in range(1, n + 1)), "payoff"]
        if n < 1 or header != expected:
            raise TableFormatError(
                f"{path}:1: header must be {','.join(expected) if n >= 1 else 'user,a0,a1,...,aN,payoff'}"
            )
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise TableFormatError(
                    f"{path}:{line_no}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                user = int(row[0])
                vals = [float(c) for c in row[1:]]
            except ValueError as exc:
                raise TableFormatError(f"{path}:{line_no}: {exc}") from None
            if not 0 <= user <= n:
                raise TableFormatError(f"{path}:{line_no}: user {user} outside 0..{n}")
            if not np.isfinite(vals).all():
                raise TableFormatError(f"{path}:{line_no}: non-finite value")
            rows.append((line_no, user, vals[0], tuple(vals[1:-1]), vals[-1]))
    if not rows:
        raise TableFormatError(f"{path}:2: payoff table has no rows")

    device_grid = ActionGrid.explicit(sorted({r[2] for r in rows}))
    user_grids = tuple(
        ActionGrid.explicit(sorted({r[3][d] for r in rows})) for d in range(n)
    )
    table = np.full((n + 1, len(device_grid), *(len(g) for g in user_grids)), np.nan)
    for line_no, user, a0, profile, value in rows:
        key = (user, device_grid.index_of(a0), *(g.index_of(a) for g, a in zip(user_grids, profile)))
        if not np.isnan(table[key]):
            raise TableFormatError(f"{path}:{line_no}: duplicate entry")
        table[key] = value
    missing = np.argwhere(np.isnan(table))
    if len(missing):
        user, k0, *ks = missing[0]
        profile = tuple(g.points[k] for g, k in zip(user_grids, ks))
        raise TableFormatError(
            f"{path}: table is not total; {len(missing)} entries missing, first is "
            f"user={user} a0={device_grid.points[k0]!r} profile={profile!r}"
        )

    if min_intervention is None:
        min_intervention = device_grid.points[0]
    if max_intervention is None:
        max_intervention = device_grid.points[-1]
    return InterventionGameModel(
        user_grids,
        device_grid,
        TablePayoff(user_grids, device_grid, table),
        min_intervention=min_intervention,
        max_intervention=max_intervention,
    )

