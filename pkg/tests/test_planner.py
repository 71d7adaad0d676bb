"""Planner tests: demo examples, validity checking, ordering, oracle equality."""

import random

import pytest

from cascom.model import PropertyRef
from cascom.planner import (
    Goal,
    SearchLimits,
    Solution,
    UnknownNodeError,
    plan,
    validate_solution,
)

from kbgen import random_kb, random_goal
from oracle import enumerate_solutions

COMFORT = Goal(PropertyRef("ComfortIndex", "index"), "room-a")
BIG = SearchLimits(max_depth=3, max_solutions=10**9)


def test_comfort_goal_has_one_solution(d1):
    solutions = plan(d1, COMFORT)
    assert len(solutions) == 1
    sol = solutions[0]
    assert sol.root == "comfort"
    assert sol.edges == frozenset({("comfort", 0, "t1"), ("comfort", 1, "h1")})
    assert sol.nodes == frozenset({"comfort", "t1", "h1"})


def test_unknown_property_yields_no_solutions(d1):
    assert plan(d1, Goal(PropertyRef("Pressure", "pascal"))) == []


def test_bare_sensor_solution(d1):
    solutions = plan(d1, Goal(PropertyRef("Temperature", "celsius"), "room-a"))
    assert [s.root for s in solutions] == ["t1"]
    assert solutions[0].edges == frozenset()


def test_location_mismatch_excludes_sensor(d1):
    assert plan(d1, Goal(PropertyRef("Temperature", "celsius"), "room-b")) == []


def test_depth_one_excludes_components(d1):
    assert plan(d1, COMFORT, SearchLimits(max_depth=1)) == []
    assert len(plan(d1, COMFORT, SearchLimits(max_depth=2))) == 1


def test_validate_comfort_solution(d1):
    sol = plan(d1, COMFORT)[0]
    assert validate_solution(d1, COMFORT, sol).ok


def test_validate_detects_type_mismatch(d1):
    bad = Solution(
        root="comfort",
        nodes=frozenset({"comfort", "t1"}),
        edges=frozenset({("comfort", 0, "t1"), ("comfort", 1, "t1")}),
    )
    report = validate_solution(d1, COMFORT, bad)
    assert not report.ok
    assert "port 1" in report.reason
    assert "Humidity" in report.reason and "Temperature" in report.reason


def test_validate_detects_unfilled_port(d1):
    dangling = Solution(
        root="comfort",
        nodes=frozenset({"comfort", "t1"}),
        edges=frozenset({("comfort", 0, "t1")}),
    )
    report = validate_solution(d1, COMFORT, dangling)
    assert not report.ok
    assert "port 1" in report.reason and "0 producers" in report.reason


def test_validate_detects_wrong_root(d1):
    sol = plan(d1, Goal(PropertyRef("Temperature", "celsius"), "room-a"))[0]
    report = validate_solution(d1, COMFORT, sol)
    assert not report.ok
    assert "goal" in report.reason


def test_validate_detects_location_violation(d1):
    sol = plan(d1, Goal(PropertyRef("Temperature", "celsius"), "room-a"))[0]
    report = validate_solution(d1, Goal(PropertyRef("Temperature", "celsius"), "room-b"), sol)
    assert not report.ok
    assert "location" in report.reason


def test_validate_raises_on_unknown_node(d1):
    ghost = Solution(root="ghost", nodes=frozenset({"ghost"}), edges=frozenset())
    with pytest.raises(UnknownNodeError):
        validate_solution(d1, COMFORT, ghost)


def test_plan_is_deterministic():
    for seed in (3, 17, 99):
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        first = plan(kb, Goal(prop, loc), BIG)
        second = plan(kb, Goal(prop, loc), BIG)
        assert first == second


def test_canonical_order_and_truncation_prefix():
    for seed in range(120):
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        full = plan(kb, Goal(prop, loc), BIG)
        keys = [s.sort_key() for s in full]
        assert keys == sorted(keys)
        capped = plan(kb, Goal(prop, loc), SearchLimits(max_depth=3, max_solutions=2))
        assert capped == full[:2]


def test_depth_monotonicity():
    for seed in range(120):
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        shallow = {(s.root, s.edges) for s in plan(kb, Goal(prop, loc), SearchLimits(2, 10**9))}
        deep = {(s.root, s.edges) for s in plan(kb, Goal(prop, loc), SearchLimits(3, 10**9))}
        assert shallow <= deep


def test_solutions_are_sound():
    for seed in range(120):
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        goal = Goal(prop, loc)
        for sol in plan(kb, goal, BIG):
            assert validate_solution(kb, goal, sol).ok


def test_matches_oracle_on_small_corpus():
    for seed in range(150):
        rng = random.Random(seed)
        kb = random_kb(rng)
        prop, loc = random_goal(rng)
        depth = rng.randint(1, 3)
        expected = enumerate_solutions(kb, prop, loc, depth)
        got = {
            (s.root, s.edges)
            for s in plan(kb, Goal(prop, loc), SearchLimits(depth, 10**9))
        }
        assert got == expected, f"seed {seed}"


def test_repeated_plans_share_kb_safely(d1):
    # The producer index lives on the immutable KB; interleaved goals must not interact.
    goals = [
        COMFORT,
        Goal(PropertyRef("Temperature", "celsius"), "room-a"),
        Goal(PropertyRef("Humidity", "percent")),
    ]
    baselines = [plan(d1, g) for g in goals]
    for _ in range(3):
        for goal, baseline in zip(goals, baselines):
            assert plan(d1, goal) == baseline


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        SearchLimits(max_depth=0)
    with pytest.raises(ValueError):
        SearchLimits(max_solutions=0)
