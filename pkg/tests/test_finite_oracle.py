import itertools

import numpy as np
import pytest

from test_game_core import pure_nash, table_game
from intervention.finite_oracle import (
    _rule_codes,
    enumerate_rules,
    equilibrium_bruteforce,
    random_finite_game,
    rule_space_size,
    scan_attainable,
    sustainable_set_bruteforce,
)
from intervention.game_core import (
    ActionGrid,
    BudgetExceededError,
    InterventionGameModel,
    extreme_rule,
    intervention_equilibrium,
    sustainable_set,
    sustains,
    verify_assumption,
)


def sized_game(n_device, sizes):
    users = tuple(tuple(float(k) for k in range(n)) for n in sizes)
    device = tuple(float(k) for k in range(n_device))
    table = np.zeros((len(sizes) + 1, n_device, *sizes))
    user_grids = tuple(ActionGrid.explicit(u) for u in users)
    from intervention.tables import TablePayoff

    dg = ActionGrid.explicit(device)
    return InterventionGameModel(user_grids, dg, TablePayoff(user_grids, dg, table), 0.0, device[-1])


@pytest.mark.parametrize(
    "n_device, sizes, count",
    [(2, (2,), 4), (3, (2, 2), 81), (3, (3, 3), 19683)],
)
def test_rule_counts(n_device, sizes, count):
    game = sized_game(n_device, sizes)
    assert rule_space_size(game) == count
    assert sum(1 for _ in enumerate_rules(game)) == count


def test_rule_order_is_lexicographic():
    game = sized_game(3, (2, 2))
    rules = [r.entries for r in enumerate_rules(game)]
    assert rules == list(itertools.product((0.0, 1.0, 2.0), repeat=4))
    codes = _rule_codes(3, 4, 0, 81)
    assert [tuple(float(c) for c in row) for row in codes] == rules
    assert rules == sorted(set(rules))


def test_rule_cap():
    game = sized_game(3, (3, 3))
    with pytest.raises(BudgetExceededError, match="19683"):
        next(enumerate_rules(game, cap=1000))
    with pytest.raises(BudgetExceededError):
        sustainable_set_bruteforce(game, cap=1000)


def zeroing_game():
    """2x2 game; the maximal intervention wipes out every payoff."""
    t = np.zeros((3, 2, 2, 2))
    t[1, 0] = [[2, 0], [3, 1]]  # prisoner's dilemma under the minimal action
    t[2, 0] = [[2, 3], [0, 1]]
    t[0, 0] = t[1, 0] + t[2, 0]
    return table_game(t)


def test_zeroing_game_hand_check():
    game = zeroing_game()
    assert verify_assumption(game).passed
    mask = sustainable_set_bruteforce(game)
    assert mask.count == 4
    assert mask.same_as(sustainable_set(game))
    result = equilibrium_bruteforce(game)
    # welfare under the minimal action: 4, 3, 3, 2
    assert result.value == 4.0
    assert result.maximizers == ((0.0, 0.0),)


def test_zeroing_game_hand_enumeration():
    """Definition-level check of all 16 rules, one rule at a time."""
    game = zeroing_game()
    found = set()
    for rule in enumerate_rules(game):
        for profile in game.profiles():
            if sustains(game, rule, profile):
                found.add(profile)
    assert found == set(game.profiles())


def test_no_power_bruteforce_equals_nash():
    rng = np.random.default_rng(7)
    layer = rng.integers(0, 3, size=(3, 1, 3, 2)).astype(float)
    t = np.repeat(layer, 2, axis=1)  # device action changes nothing
    game = table_game(t, users=((0.0, 1.0, 2.0), (0.0, 1.0)), lo=1.0, hi=1.0)
    assert verify_assumption(game).passed
    nash = pure_nash(game, 1.0)
    assert set(sustainable_set_bruteforce(game).profiles()) == nash
    assert set(sustainable_set(game).profiles()) == nash


def test_singleton_game():
    t = np.full((3, 1, 1, 1), 5.0)
    game = table_game(t, device=(0.0,), users=((0.0,), (0.0,)), hi=0.0)
    assert rule_space_size(game) == 1
    result = equilibrium_bruteforce(game)
    assert result.maximizers == ((0.0, 0.0),) and result.value == 5.0


def test_batched_scan_matches_per_rule_sustains():
    rng = np.random.default_rng(3)
    for _ in range(5):
        game = random_finite_game(rng, integer_payoffs=True)
        rules = list(enumerate_rules(game))
        profiles = list(game.profiles())
        offset = 0
        for codes, ok, v0 in scan_attainable(game):
            for r in rng.choice(len(codes), size=min(40, len(codes)), replace=False):
                rule = rules[offset + r]
                for p, profile in enumerate(profiles):
                    assert ok[r, p] == sustains(game, rule, profile)
                    assert v0[r, p] == game.u(0, rule.action(game, profile), profile)
            offset += len(codes)
        assert offset == len(rules)


@pytest.mark.parametrize("seed", range(30))
def test_characterization_matches_bruteforce(seed):
    rng = np.random.default_rng(1000 + seed)
    game = random_finite_game(rng, integer_payoffs=seed % 2 == 0)
    assert verify_assumption(game).passed
    fast, slow = sustainable_set(game), sustainable_set_bruteforce(game)
    assert fast.same_as(slow), fast.first_difference(slow)
    if fast.count:
        assert intervention_equilibrium(game).value == pytest.approx(
            equilibrium_bruteforce(game).value, abs=1e-9
        )


def test_lemma_witnessed_and_superset():
    rng = np.random.default_rng(11)
    for _ in range(10):
        game = random_finite_game(rng, integer_payoffs=True)
        profiles = list(game.profiles())
        any_rule = np.zeros(len(profiles), dtype=bool)
        for _, ok, _ in scan_attainable(game):
            any_rule |= ok.any(axis=0)
        for p, profile in enumerate(profiles):
            extreme = sustains(game, extreme_rule(game, profile), profile)
            if any_rule[p]:
                assert extreme
            if extreme:
                assert any_rule[p]


def test_random_games_satisfy_ordering():
    rng = np.random.default_rng(5)
    for _ in range(50):
        game = random_finite_game(rng, n_users=int(rng.integers(1, 4)))
        assert verify_assumption(game).passed
