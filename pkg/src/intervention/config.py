"""Line-oriented ``key = value`` run configuration.

Example (built-in game)::

    kind = cournot
    q = 12
    b = 1
    a0_max = 0.51
    a1_max = 12
    a2_max = 12
    grid_step = 0.1
    tol = 1e-9

Table games set ``kind = table`` and ``payoff_csv = <path>`` (relative to the
config file), optionally ``min_intervention`` / ``max_intervention``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .cournot import CournotParams, make_game
from .game_core import (
    DEFAULT_PROFILE_BUDGET,
    DEFAULT_TOL,
    InterventionGameModel,
    OffGridError,
)
from .finite_oracle import DEFAULT_RULE_CAP
from .tables import TableFormatError, load_payoff_table

FIGURE2_A0_VALUES = (0.0, 0.1, 0.51, 5.0, 10.0, 12.0)
DEFAULT_GRID_STEP = 0.1

_COMMON = {"kind", "tol", "grid_step", "max_profiles", "rule_cap"}
_COURNOT = {"q", "b", "a0_max", "a0_values"}
_TABLE = {"payoff_csv", "min_intervention", "max_intervention"}
_CAP_KEY = re.compile(r"a([1-9][0-9]*)_max$")


class ConfigError(ValueError):
    """Invalid configuration; the message names the file, line and field."""


@dataclass
class RunConfig:
    kind: str
    source: str = "<config>"
    tol: float = DEFAULT_TOL
    grid_step: float = DEFAULT_GRID_STEP
    max_profiles: int = DEFAULT_PROFILE_BUDGET
    rule_cap: int = DEFAULT_RULE_CAP
    q: float = 12.0
    b: float = 1.0
    a0_max: float = 0.0
    a_max: tuple[float, ...] = (12.0, 12.0)
    a0_values: tuple[float, ...] = FIGURE2_A0_VALUES
    payoff_csv: Path | None = None
    min_intervention: float | None = None
    max_intervention: float | None = None
    lines: dict[str, int] = field(default_factory=dict)

    def where(self, key: str) -> str:
        line = self.lines.get(key)
        return f"{self.source}:{line}" if line else self.source

    def cournot_params(self, a0_max: float | None = None) -> CournotParams:
        return CournotParams(
            q=self.q,
            b=self.b,
            a0_max=self.a0_max if a0_max is None else a0_max,
            a_max=self.a_max,
            grid_step=self.grid_step,
        )

    def build_game(self, a0_max: float | None = None) -> InterventionGameModel:
        if self.kind == "cournot":
            return make_game(self.cournot_params(a0_max))
        return load_payoff_table(self.payoff_csv, self.min_intervention, self.max_intervention)


def _number(raw: str, where: str, key: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{where}: field '{key}': expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{where}: field '{key}': must be finite")
    return value


def _integer(raw: str, where: str, key: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{where}: field '{key}': expected an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{where}: field '{key}': must be >= 1")
    return value


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> RunConfig:
    raw: dict[str, tuple[int, str]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{line_no}: missing key")
        if key in raw:
            raise ConfigError(
                f"{source}:{line_no}: field '{key}': duplicate (first set on line {raw[key][0]})"
            )
        raw[key] = (line_no, value)

    if "kind" not in raw:
        raise ConfigError(f"{source}: field 'kind': required (cournot or table)")
    kind = raw["kind"][1]
    if kind not in ("cournot", "table"):
        raise ConfigError(
            f"{source}:{raw['kind'][0]}: field 'kind': expected cournot or table, got {kind!r}"
        )
    allowed = _COMMON | (_COURNOT if kind == "cournot" else _TABLE)
    cfg = RunConfig(kind=kind, source=source, lines={k: v[0] for k, v in raw.items()})

    caps: dict[int, float] = {}
    for key, (line_no, value) in raw.items():
        where = f"{source}:{line_no}"
        cap = _CAP_KEY.match(key)
        if key == "kind":
            continue
        if cap and kind == "cournot":
            caps[int(cap.group(1))] = _number(value, where, key)
        elif key not in allowed:
            raise ConfigError(f"{where}: field '{key}': unknown for kind {kind}")
        elif key in ("max_profiles", "rule_cap"):
            setattr(cfg, key, _integer(value, where, key))
        elif key == "a0_values":
            items = [s for s in value.split(",") if s.strip()]
            if not items:
                raise ConfigError(f"{where}: field 'a0_values': empty list")
            cfg.a0_values = tuple(_number(s.strip(), where, key) for s in items)
        elif key == "payoff_csv":
            path = Path(value)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            cfg.payoff_csv = path
        else:
            setattr(cfg, key, _number(value, where, key))

    if caps:
        n = max(caps)
        missing = [k for k in range(1, n + 1) if k not in caps]
        if missing:
            raise ConfigError(f"{source}: field 'a{missing[0]}_max': required when a{n}_max is set")
        cfg.a_max = tuple(caps[k] for k in range(1, n + 1))
    if kind == "table" and cfg.payoff_csv is None:
        raise ConfigError(f"{source}: field 'payoff_csv': required for kind table")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, source=str(path), base_dir=path.parent)


def validate(cfg: RunConfig) -> InterventionGameModel | None:
    """Check every field against the target module's invariants.

    Returns the loaded game for table configs (loading is the validation).
    """
    if cfg.tol < 0:
        raise ConfigError(f"{cfg.where('tol')}: field 'tol': must be >= 0")
    if cfg.kind == "cournot":
        for key in ("q", "b", "grid_step"):
            if getattr(cfg, key) <= 0:
                raise ConfigError(f"{cfg.where(key)}: field '{key}': must be > 0")
        if cfg.a0_max < 0:
            raise ConfigError(f"{cfg.where('a0_max')}: field 'a0_max': must be >= 0")
        for k, cap in enumerate(cfg.a_max, start=1):
            if cap <= 0:
                key = f"a{k}_max"
                raise ConfigError(f"{cfg.where(key)}: field '{key}': must be > 0")
        if any(v < 0 for v in cfg.a0_values):
            raise ConfigError(f"{cfg.where('a0_values')}: field 'a0_values': must be >= 0")
        return None
    if not cfg.payoff_csv.is_file():
        raise ConfigError(
            f"{cfg.where('payoff_csv')}: field 'payoff_csv': no such file {str(cfg.payoff_csv)!r}"
        )
    try:
        return cfg.build_game()
    except TableFormatError as exc:
        raise ConfigError(str(exc)) from None
    except OffGridError as exc:
        raise ConfigError(f"{cfg.source}: intervention extremes: {exc}") from None
