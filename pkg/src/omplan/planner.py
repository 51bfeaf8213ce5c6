"""Forward A* search over ground PDDL specs with derived predicates."""
from __future__ import annotations

import heapq
import itertools
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from omplan import pddl
from omplan.pddl import Atom, Formula, GroundAction, PddlSpec

HEURISTICS = ("zero", "goal-count")


@dataclass
class PlannerConfig:
    heuristic: str = "zero"
    time_limit: float | None = None
    max_states: int = 2_000_000

    def __post_init__(self):
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.max_states <= 0:
            raise ValueError("state budget must be positive")


@dataclass
class PlannerStats:
    expanded: int = 0
    evaluated: int = 0
    derive_calls: int = 0
    ground_actions: int = 0
    wall_time: float = 0.0

    def as_dict(self, with_time: bool = True) -> dict:
        d = asdict(self)
        if not with_time:
            d.pop("wall_time")
        return d

    def to_json(self, with_time: bool = True) -> str:
        return json.dumps(self.as_dict(with_time), indent=2, sort_keys=True) + "\n"


@dataclass
class SearchResult:
    status: str                     # solved | unsolvable | timeout | memory
    plan: list[GroundAction] | None = None
    stats: PlannerStats = field(default_factory=PlannerStats)

    @property
    def solved(self) -> bool:
        return self.status == "solved"


def _fold_static(f: Formula, static: set[str], init: frozenset) -> Formula:
    """Replace atoms over predicates no action changes by their initial value."""
    if isinstance(f, Atom):
        if f.pred in static:
            return pddl.TRUE if f in init else pddl.FALSE
        return f
    if isinstance(f, pddl.Not):
        return pddl.Not(_fold_static(f.operand, static, init))
    if isinstance(f, pddl.And):
        return pddl.And(tuple(_fold_static(p, static, init) for p in f.operands))
    if isinstance(f, pddl.Or):
        return pddl.Or(tuple(_fold_static(p, static, init) for p in f.operands))
    return f


class Task:
    """A spec prepared for search: ground actions and rules with static facts
    folded in, and unreachable actions dropped."""

    def __init__(self, spec: PddlSpec):
        self.spec = spec
        derived = spec.derived_predicates
        changed = {e.pred for a in spec.actions for e in a.add + a.delete}
        static = set(spec.predicates) - changed - derived
        init = spec.init
        self.actions: list[GroundAction] = []
        for ga in pddl.ground(spec):
            pre = pddl.simplify(_fold_static(ga.pre, static, init))
            if pre != pddl.FALSE:
                self.actions.append(GroundAction(ga.name, ga.args, pre, ga.add, ga.delete, ga.params))
        rules = []
        for r in pddl.ground_rules(spec):
            body = pddl.simplify(_fold_static(r.body, static, init))
            if body != pddl.FALSE:
                rules.append(pddl.DerivationRule(r.head, body))
        self.derive = pddl.Deriver(rules)
        self.derived = derived
        self.goal = spec.goal
        self.init = pddl.strip_derived(init, derived)


def _goal_count(goal: Formula, view) -> int:
    parts = goal.operands if isinstance(goal, pddl.And) else (goal,)
    return sum(1 for p in parts if not pddl.eval_formula(p, view))


def solve(spec: PddlSpec | Task, config: PlannerConfig | None = None) -> SearchResult:
    """A* with unit costs; ties broken first-in first-out, successors in
    ground-action order. Under the zero heuristic the plan is shortest."""
    config = config or PlannerConfig()
    task = spec if isinstance(spec, Task) else Task(spec)
    stats = PlannerStats(ground_actions=len(task.actions))
    start = time.perf_counter()
    deadline = None if config.time_limit is None else start + config.time_limit
    calls0 = task.derive.calls
    use_h = config.heuristic == "goal-count"

    def finish(status: str, plan=None) -> SearchResult:
        stats.wall_time = time.perf_counter() - start
        stats.derive_calls = task.derive.calls - calls0
        return SearchResult(status, plan, stats)

    s0 = task.init
    view0 = task.derive(s0)
    stats.evaluated = 1
    counter = itertools.count()
    h0 = _goal_count(task.goal, view0) if use_h else 0
    open_: list = [(h0, next(counter), 0, s0, view0)]
    parent: dict[frozenset, tuple[frozenset, GroundAction] | None] = {s0: None}
    best_g: dict[frozenset, int] = {s0: 0}
    closed: set[frozenset] = set()
    while open_:
        _, _, g, s, view = heapq.heappop(open_)
        if s in closed:
            continue
        closed.add(s)
        if pddl.eval_formula(task.goal, view):
            plan: list[GroundAction] = []
            cur = s
            while parent[cur] is not None:
                prev, a = parent[cur]
                plan.append(a)
                cur = prev
            plan.reverse()
            return finish("solved", plan)
        stats.expanded += 1
        if deadline is not None and time.perf_counter() > deadline:
            return finish("timeout")
        for a in task.actions:
            if not pddl.eval_formula(a.pre, view):
                continue
            t = (s - a.delete) | a.add
            if t in closed or best_g.get(t, g + 2) <= g + 1:
                continue
            best_g[t] = g + 1
            parent[t] = (s, a)
            tview = task.derive(t)
            stats.evaluated += 1
            if stats.evaluated > config.max_states:
                return finish("memory")
            h = _goal_count(task.goal, tview) if use_h else 0
            heapq.heappush(open_, (g + 1 + h, next(counter), g + 1, t, tview))
    return finish("unsolvable")


@dataclass(frozen=True)
class ReplayVerdict:
    accepted: bool
    step: int
    reason: str = ""

    def __str__(self) -> str:
        return "accept" if self.accepted else f"reject at step {self.step}: {self.reason}"


def replay(spec: PddlSpec, plan: Sequence[GroundAction]) -> ReplayVerdict:
    """Apply the plan step by step under derived-predicate semantics."""
    derive = pddl.Deriver(pddl.ground_rules(spec))
    s = pddl.strip_derived(spec.init, spec.derived_predicates)
    for i, a in enumerate(plan, 1):
        if not pddl.eval_formula(a.pre, derive(s)):
            return ReplayVerdict(False, i, f"{a} is not applicable")
        s = pddl.apply(a, s)
    if not pddl.eval_formula(spec.goal, derive(s)):
        return ReplayVerdict(False, len(plan), "goal not satisfied")
    return ReplayVerdict(True, len(plan))

