"""Command-line front end.

Exit codes: 0 ok, 1 check failed (oracle mismatch, broken nesting),
2 bad config, 3 enumeration budget exceeded, 4 no sustainable profile,
5 extremal-intervention assumption violated.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .config import ConfigError, RunConfig, load_config, validate
from .finite_oracle import equilibrium_bruteforce, sustainable_set_bruteforce
from .game_core import (
    BudgetExceededError,
    InterventionGameModel,
    RegionMask,
    SolverError,
    equilibrium_from_mask,
    extreme_rule,
    sustainable_set,
    verify_assumption,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_EMPTY = 4
EXIT_ASSUMPTION = 5

# above this many (device action, profile) pairs the gate samples instead
_EXHAUSTIVE_CHECK_LIMIT = 5 * 10**7
_GATE_SAMPLES = 10_000


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def fmt_profile(profile: Sequence[float]) -> str:
    return "(" + ", ".join(fmt(a) for a in profile) + ")"


def region_csv(mask: RegionMask) -> str:
    n = len(mask.grid_shape)
    lines = [",".join([*(f"a{k}" for k in range(1, n + 1)), "sustainable", "welfare_min_intervention"])]
    for profile, ok, welfare in mask.rows():
        lines.append(",".join([*map(fmt, profile), "1" if ok else "0", fmt(welfare)]))
    return "\n".join(lines) + "\n"


def write_region_csv(mask: RegionMask, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(region_csv(mask))


def region_summary(mask: RegionMask) -> list[str]:
    out = [f"sustainable: {mask.count} of {mask.total} profiles"]
    box = mask.bounding_box()
    if box is None:
        out.append("bounding box: empty")
    else:
        out.append(
            "bounding box: "
            + ", ".join(f"a{d} in [{fmt(lo)}, {fmt(hi)}]" for d, (lo, hi) in enumerate(box, 1))
        )
    if 0 < mask.count <= 10:
        out.append("profiles: " + " ".join(fmt_profile(p) for p in mask.profiles()))
    return out


def _gate(game: InterventionGameModel, cfg: RunConfig, args) -> None:
    if args.no_assumption_check:
        return
    if len(game.device_grid) * game.n_profiles <= _EXHAUSTIVE_CHECK_LIMIT:
        report = verify_assumption(game, tol=cfg.tol, budget=cfg.max_profiles)
    else:
        report = verify_assumption(game, samples=_GATE_SAMPLES, tol=cfg.tol)
    if not report.passed:
        raise _Fail(EXIT_ASSUMPTION, report.describe())


def _solve(game: InterventionGameModel, cfg: RunConfig) -> RegionMask:
    return sustainable_set(game, cfg.tol, cfg.max_profiles)


def _load(args) -> tuple[RunConfig, InterventionGameModel | None]:
    cfg = load_config(args.config)
    if args.grid_step is not None:
        cfg.grid_step = args.grid_step
        cfg.lines.pop("grid_step", None)
    if args.tol is not None:
        cfg.tol = args.tol
        cfg.lines.pop("tol", None)
    if getattr(args, "a0_values", None):
        cfg.a0_values = tuple(args.a0_values)
    game = validate(cfg)
    return cfg, game


def _require_out(args) -> Path:
    if args.out is None:
        raise ConfigError(f"--out is required for {args.command}")
    return Path(args.out)


def cmd_sustainable_set(args, cfg, game) -> int:
    out = _require_out(args)
    game = game or cfg.build_game()
    _gate(game, cfg, args)
    mask = _solve(game, cfg)
    write_region_csv(mask, out)
    print("\n".join(region_summary(mask)))
    return EXIT_OK


def equilibrium_report(game: InterventionGameModel, mask: RegionMask, tol: float) -> list[str]:
    result = equilibrium_from_mask(mask, tol)
    rule = extreme_rule(game, result.canonical)
    lines = [
        f"value: {fmt(result.value)}",
        f"canonical: {fmt_profile(result.canonical)}",
        f"maximizers: {len(result.maximizers)}",
        f"optimal rule: extreme rule with target {fmt_profile(rule.target)} "
        f"(a0={fmt(rule.low)} at target, a0={fmt(rule.high)} elsewhere)",
    ]
    if len(result.maximizers) <= 20:
        lines += [f"  {fmt_profile(p)}" for p in result.maximizers]
    return lines


def cmd_equilibrium(args, cfg, game) -> int:
    game = game or cfg.build_game()
    _gate(game, cfg, args)
    mask = _solve(game, cfg)
    try:
        lines = equilibrium_report(game, mask, cfg.tol)
    except SolverError as exc:
        raise _Fail(EXIT_EMPTY, str(exc)) from None
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _a0_label(a0: float) -> str:
    return format(a0, "g")


def cmd_figure2(args, cfg, game) -> int:
    if cfg.kind != "cournot":
        raise ConfigError(f"{cfg.where('kind')}: field 'kind': figure2 needs kind cournot")
    out = _require_out(args)
    sweep = sorted(set(cfg.a0_values))
    games = [cfg.build_game(a0) for a0 in sweep]
    for g in games:
        _gate(g, cfg, args)
    masks = [_solve(g, cfg) for g in games]

    out.mkdir(parents=True, exist_ok=True)
    manifest = ["a0_max,sustainable,total,file"]
    for a0, mask in zip(sweep, masks):
        name = f"region_a0max_{_a0_label(a0)}.csv"
        write_region_csv(mask, out / name)
        manifest.append(f"{fmt(a0)},{mask.count},{mask.total},{name}")
        print(f"a0_max={_a0_label(a0)}: {mask.count} of {mask.total} sustainable")
    (out / "manifest.csv").write_text("\n".join(manifest) + "\n")

    nested = all((m1.sustainable <= m2.sustainable).all() for m1, m2 in zip(masks, masks[1:]))
    print(f"nested: {'yes' if nested else 'no'}")
    return EXIT_OK if nested else EXIT_CHECK_FAILED


def cmd_oracle_check(args, cfg, game) -> int:
    game = game or cfg.build_game()
    report = verify_assumption(game, tol=cfg.tol, budget=cfg.max_profiles)
    print(report.describe())
    fast = sustainable_set(game, cfg.tol, cfg.max_profiles)
    slow = sustainable_set_bruteforce(game, cfg.tol, cfg.rule_cap)
    diff = fast.first_difference(slow)
    if diff is not None:
        print(
            f"sustainable sets differ at {fmt_profile(diff)}: "
            f"characterization={bool(fast.sustainable[game.profile_index(diff)])}, "
            f"brute force={bool(slow.sustainable[game.profile_index(diff)])}"
        )
        return EXIT_CHECK_FAILED
    print(f"sustainable sets agree ({fast.count} of {fast.total} profiles)")
    if not fast.count:
        print("no sustainable profile; equilibrium check skipped")
        return EXIT_OK
    eq_fast = equilibrium_from_mask(fast, cfg.tol)
    eq_slow = equilibrium_bruteforce(game, cfg.tol, cfg.rule_cap)
    if abs(eq_fast.value - eq_slow.value) > cfg.tol:
        print(
            f"equilibrium values differ: characterization={eq_fast.value!r}, "
            f"brute force={eq_slow.value!r}"
        )
        return EXIT_CHECK_FAILED
    print(f"equilibrium values agree: {fmt(eq_fast.value)}")
    return EXIT_OK


def cmd_verify_assumption(args, cfg, game) -> int:
    game = game or cfg.build_game()
    report = verify_assumption(
        game, samples=args.samples, tol=cfg.tol, seed=args.seed, budget=cfg.max_profiles
    )
    print(("pass: " if report.passed else "fail: ") + report.describe())
    return EXIT_OK if report.passed else EXIT_ASSUMPTION


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intervention",
        description="Sustainable profiles and intervention equilibria of intervention games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--out", help="output path")
        p.add_argument("--grid-step", type=float, help="override grid_step")
        p.add_argument("--tol", type=float, help="override tol")
        p.set_defaults(func=func)
        return p

    for name, func, text in [
        ("sustainable-set", cmd_sustainable_set, "write the sustainable region as CSV"),
        ("equilibrium", cmd_equilibrium, "report the intervention equilibrium"),
        ("figure2", cmd_figure2, "sweep the device cap and write one region CSV per value"),
    ]:
        p = add(name, func, text)
        p.add_argument(
            "--no-assumption-check",
            action="store_true",
            help="skip the extremal-intervention ordering check",
        )
        if name == "figure2":
            p.add_argument("--a0-values", type=float, nargs="+", help="device caps to sweep")

    add("oracle-check", cmd_oracle_check, "compare the characterization with brute force")
    p = add("verify-assumption", cmd_verify_assumption, "check the extremal device actions")
    p.add_argument("--samples", type=_positive, help="check this many random profiles")
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command in ("sustainable-set", "figure2"):
            _require_out(args)
        cfg, game = _load(args)
        return args.func(args, cfg, game)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
