import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intervention.cournot import (
    CournotParams,
    UnsupportedError,
    analytic_best_response,
    analytic_is_sustainable,
    analytic_thresholds,
    make_game,
    quality,
    sustaining_threshold,
)
from intervention.game_core import sustainable_set, verify_assumption

BASE = CournotParams()  # q=12, b=1, caps 12


def test_quality_examples():
    assert quality(BASE, 0.0, (4.0, 4.0)) == 4.0
    assert quality(BASE, 2.0, (5.0, 5.0)) == 0.0
    assert quality(BASE, 0.0, (12.0, 12.0)) == 0.0
    assert quality(BASE, 0.51, (3.0, 3.0)) == pytest.approx(5.49, abs=1e-12)


def replace_cap(a0_max, step=1.0):
    return CournotParams(a0_max=a0_max, grid_step=step)


def test_make_game_payoffs():
    game = make_game(replace_cap(0.51))
    assert game.u(1, 0.0, (4, 4)) == 16.0
    assert game.u(0, 0.0, (3, 3)) == 36.0
    assert game.min_intervention == 0.0 and game.max_intervention == 0.51
    for i in range(3):
        assert game.u(i, 0.51, (6, 6)) == 0.0


def test_thresholds_at_reference_parameters():
    t = analytic_thresholds(BASE)
    assert t.social_optimum == 3.0
    assert t.nash == 4.0
    assert t.optimum_sustaining_a0 == pytest.approx(0.5147186257614, abs=1e-12)
    assert round(t.optimum_sustaining_a0, 2) == 0.51


def test_thresholds_scale_with_intercept():
    t1 = analytic_thresholds(BASE)
    t2 = analytic_thresholds(CournotParams(q=24.0))
    assert t2 == pytest.approx(tuple(2 * x for x in t1), rel=1e-15)


def test_closed_forms_need_two_users():
    three = CournotParams(a_max=(1.0, 1.0, 1.0))
    for call in (
        lambda: analytic_thresholds(three),
        lambda: analytic_best_response(three, 1.0, 0.0),
        lambda: analytic_is_sustainable(three, (1, 1, 1)),
    ):
        with pytest.raises(UnsupportedError):
            call()


def test_best_response_examples():
    assert analytic_best_response(BASE, 4.0, 0.0) == 4.0
    assert analytic_best_response(BASE, 3.0, 0.0) == 4.5
    assert analytic_best_response(BASE, 8.0, 4.0) == 0.0
    assert analytic_best_response(CournotParams(a_max=(2.0, 12.0)), 0.0, 0.0) == 2.0


@given(other=st.floats(0, 12), a0=st.floats(0, 12))
def test_best_response_beats_fine_scan(other, a0):
    # finite-grid scan oracle on [0, 12]
    xs = np.linspace(0, 12, 4801)
    values = np.maximum(12 - (a0 + other + xs), 0) * xs
    br = analytic_best_response(BASE, other, a0)
    best = max(12 - (a0 + other + br), 0) * br
    assert best >= values.max() - 1e-12


def test_analytic_sustainability_examples():
    t = analytic_thresholds(BASE)
    opt, nash = (t.social_optimum,) * 2, (t.nash,) * 2
    assert analytic_is_sustainable(CournotParams(a0_max=t.optimum_sustaining_a0 + 1e-9), opt)
    assert analytic_is_sustainable(CournotParams(a0_max=0.0), nash)
    assert not analytic_is_sustainable(CournotParams(a0_max=0.0), opt)
    full = CournotParams(a0_max=12.0)
    for profile in [(0, 0), (3, 7), (12, 12), (0.5, 11.2)]:
        assert analytic_is_sustainable(full, profile)


def test_threshold_recovered_by_bisection():
    found = sustaining_threshold(BASE)
    closed = (3 * math.sqrt(2) - 4) * 12 / (4 * math.sqrt(2))
    assert abs(found - closed) < 1e-6
    assert not analytic_is_sustainable(CournotParams(a0_max=found - 1e-6), (3, 3))
    assert analytic_is_sustainable(CournotParams(a0_max=found + 1e-6), (3, 3))


def _near_boundary(params, profile, step):
    """Whether continuous sustainability changes within one grid step of ``profile``."""
    offsets = np.concatenate([np.linspace(-step, step, 21), [-step, 0.0, step]])
    seen = set()
    for dx in offsets:
        for dy in offsets:
            x = min(max(profile[0] + dx, 0.0), params.a_max[0])
            y = min(max(profile[1] + dy, 0.0), params.a_max[1])
            seen.add(analytic_is_sustainable(params, (x, y)))
    # exact neighbouring grid points (float offsets above can miss isolated points)
    for kx in (-1, 0, 1):
        for ky in (-1, 0, 1):
            x, y = round(profile[0] + kx * step, 12), round(profile[1] + ky * step, 12)
            if 0 <= x <= params.a_max[0] and 0 <= y <= params.a_max[1]:
                seen.add(analytic_is_sustainable(params, (x, y)))
    return len(seen) == 2


@pytest.mark.parametrize("a0_max", [0.0, 0.1, 0.51, 2.0, 5.0])
def test_grid_converges_to_continuous_region(a0_max):
    fractions = []
    for step in (0.5, 0.25, 0.1):
        params = CournotParams(a0_max=a0_max, grid_step=step)
        mask = sustainable_set(make_game(params))
        disagree = [
            profile
            for profile, ok, _ in mask.rows()
            if ok != analytic_is_sustainable(params, profile)
        ]
        fractions.append(len(disagree) / mask.total)
        for profile in disagree:
            assert _near_boundary(params, profile, step), profile
    assert fractions == sorted(fractions, reverse=True)


@settings(max_examples=25, deadline=None)
@given(
    q=st.floats(1, 30),
    b=st.floats(0.2, 5),
    a0_max=st.floats(0, 20),
    cap=st.floats(1, 15),
)
def test_assumption_holds_for_any_parameters(q, b, a0_max, cap):
    params = CournotParams(q=q, b=b, a0_max=a0_max, a_max=(cap, cap), grid_step=cap / 6)
    assert verify_assumption(make_game(params)).passed


@given(a0=st.floats(0, 15), x=st.floats(0, 12), y=st.floats(0, 12))
def test_welfare_symmetric(a0, x, y):
    game = make_game(BASE)
    assert game.payoff(0, a0, (x, y)) == game.payoff(0, a0, (y, x))


@pytest.mark.parametrize(
    "kwargs",
    [dict(q=0), dict(b=-1), dict(a0_max=-0.1), dict(a_max=(1.0, 0.0)), dict(grid_step=0)],
)
def test_params_validated(kwargs):
    with pytest.raises(ValueError):
        CournotParams(**kwargs)
