from importlib.resources import files

import pytest

from omplan import bench, omps, pddl, planner, rewrite
from omplan.omps import Semantics
from omplan.planner import PlannerConfig

from oracles import bfs_plan_length

DATA = files("omplan") / "data"


def compiled(o):
    return rewrite.rew(o).spec


@pytest.fixture(scope="module")
def bw():
    return omps.load_bundle(DATA / "blocksworld" / "bundle.manifest")


def test_fixture_is_solved_optimally(bw):
    spec = compiled(bw)
    res = planner.solve(spec)
    assert res.solved and len(res.plan) == bfs_plan_length(spec) == 4
    assert planner.replay(spec, res.plan).accepted
    assert Semantics(bw).validate_plan(res.plan).accepted


@pytest.mark.parametrize("n, seed", [(3, 0), (3, 1), (4, 2), (4, 3)])
def test_zero_heuristic_is_optimal(n, seed):
    o = bench.blocksworld_bundle(n, seed).load()
    spec = compiled(o)
    res = planner.solve(spec)
    assert res.solved
    assert len(res.plan) == bfs_plan_length(spec, 200_000)
    assert Semantics(o).validate_plan(res.plan).accepted
    greedy = planner.solve(spec, PlannerConfig(heuristic="goal-count"))
    assert greedy.solved and len(greedy.plan) >= len(res.plan)
    assert planner.replay(spec, greedy.plan).accepted


def test_unsolvable_is_reported():
    b = bench.blocksworld_bundle(3, 0)
    text = b.problem.split("(:goal")[0] + "(:goal (on b1 b1)))\n"
    o = bench.BundleText(b.name, b.domain, text, b.ontology, b.interface).load()
    spec = compiled(o)
    res = planner.solve(spec)
    assert res.status == "unsolvable" and res.plan is None
    assert bfs_plan_length(spec) is None


def test_limits():
    spec = compiled(bench.blocksworld_bundle(5, 1).load())
    assert planner.solve(spec, PlannerConfig(max_states=3)).status == "memory"
    assert planner.solve(spec, PlannerConfig(time_limit=1e-9)).status == "timeout"
    for bad in (dict(heuristic="ff"), dict(time_limit=0), dict(max_states=0)):
        with pytest.raises(ValueError):
            PlannerConfig(**bad)


def test_search_is_deterministic():
    spec = compiled(bench.blocksworld_bundle(4, 5).load())
    a, b = planner.solve(spec), planner.solve(spec)
    assert pddl.format_plan(a.plan) == pddl.format_plan(b.plan)
    assert a.stats.as_dict(False) == b.stats.as_dict(False)
    assert "wall_time" not in a.stats.to_json(False)


def test_replay_rejections(bw):
    spec = compiled(bw)
    step = lambda t: [pddl.instantiate(spec, n, a) for n, a in pddl.parse_plan(t)]
    v = planner.replay(spec, step("(pickup stackBot blockA)\n"))
    assert (v.accepted, v.step) == (False, 1)
    # the third block can never be picked up under the guard
    v = planner.replay(spec, step("(unstack stackBot blockB blockA)\n(pickup stackBot blockA)\n"
                                  "(pickup stackBot blockC)\n(putdown stackBot blockC)\n"))
    assert (v.accepted, v.step) == (False, 4)
    assert not planner.replay(spec, []).accepted


def test_goal_can_use_query_predicates():
    o = omps.load_bundle(DATA / "two_conditions" / "bundle.manifest")
    spec = compiled(o)
    res = planner.solve(spec)
    assert res.solved and len(res.plan) == bfs_plan_length(spec) == 4
    assert Semantics(o).validate_plan(res.plan).accepted
