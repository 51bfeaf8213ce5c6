"""Desk-scale benchmark harness: seeded instance families and a runner that
times the compile and search phases per instance and algorithm."""
from __future__ import annotations

import csv
import io
import multiprocessing as mp
import random
import time
from dataclasses import dataclass
from importlib.resources import files
from typing import Iterable, Sequence

from omplan import dl, omps as omps_mod, pddl, planner, rewrite
from omplan.justify import ALGORITHMS, JustifyConfig
from omplan.omps import Omps

FAMILIES = ("blocksworld", "interchangeable")
CSV_COLUMNS = ("instance", "algorithm", "reasoning-time", "planning-time", "total-time", "solved",
               "status", "plan-length", "consistency-calls", "single-just-calls")
ROBOT = "stackBot"


def _domain_text() -> str:
    return (files("omplan") / "data" / "blocksworld" / "domain.pddl").read_text()


def block_names(n: int) -> list[str]:
    return [f"b{i}" for i in range(1, n + 1)]


def random_towers(blocks: Sequence[str], rng: random.Random) -> list[list[str]]:
    """A random partition of the blocks into towers, listed bottom-up."""
    order = list(blocks)
    rng.shuffle(order)
    towers: list[list[str]] = [[order[0]]] if order else []
    for b in order[1:]:
        if rng.random() < 0.5:
            towers.append([b])
        else:
            rng.choice(towers).append(b)
    return towers


def _tower_facts(towers: Iterable[Sequence[str]]) -> list[str]:
    out = []
    for t in towers:
        out.append(f"(onTable {t[0]})")
        out.extend(f"(on {t[k]} {t[k - 1]})" for k in range(1, len(t)))
        out.append(f"(clear {t[-1]})")
    return out


def _problem_text(name: str, robots: Sequence[str], blocks: Sequence[str],
                  init: list[list[str]], goal: list[str]) -> str:
    lines = [f"(define (problem {name})",
             "  (:domain blocksworld-omps)",
             f"  (:objects {' '.join(robots)} - robot {' '.join(blocks)} - block)",
             "  (:init"]
    lines += [f"    {f}" for f in _tower_facts(init)]
    lines[-1] += ")"
    body = goal[0] if len(goal) == 1 else "(and " + " ".join(goal) + ")"
    lines.append(f"  (:goal {body}))")
    return "\n".join(lines) + "\n"


def _ontology_text(robots: Sequence[str], blocks: Sequence[str]) -> str:
    lines = [f"ClassAssertion(PR2 {r})" for r in robots]
    lines += [f"ClassAssertion(Block {b})" for b in blocks]
    for i, a in enumerate(blocks):
        lines += [f"DifferentIndividuals({a} {b})" for b in blocks[i + 1:]]
    lines.append("SubClassOf(PR2 ObjectIntersectionOf(Robot ObjectMaxCardinality(2 holds Block)))")
    lines.append("SubClassOf(ObjectIntersectionOf(PR2 ObjectExactCardinality(2 holds Block)) FullHands)")
    return "\n".join(lines) + "\n"


def _interface_text(robots: Sequence[str], blocks: Sequence[str]) -> str:
    lines = [f"object {o} -> {o}" for o in (*robots, *blocks)]
    lines.append("fluent holds -> holds")
    lines.append("query fullHands(x: Robot) <- { FullHands(x) }")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BundleText:
    name: str
    domain: str
    problem: str
    ontology: str
    interface: str

    def load(self) -> Omps:
        spec = pddl.parse_pddl(self.domain, self.problem, f"{self.name}/domain", f"{self.name}/problem")
        onto = dl.parse_ontology(self.ontology, f"{self.name}/ontology")
        return omps_mod.load_omps(spec, onto, self.interface, f"{self.name}/interface")


def blocksworld_bundle(n: int, seed: int) -> BundleText:
    """n blocks in random towers; the goal is the on/onTable facts of another
    random configuration, restricted to a random non-empty subset."""
    if n < 1:
        raise ValueError("need at least one block")
    rng = random.Random(f"blocksworld-{n}-{seed}")
    blocks = block_names(n)
    init = random_towers(blocks, rng)
    target = [f for f in _tower_facts(random_towers(blocks, rng)) if not f.startswith("(clear")]
    goal = sorted(rng.sample(target, rng.randint(1, len(target))))
    name = f"bw-{n}-{seed}"
    robots = [ROBOT]
    return BundleText(name, _domain_text(), _problem_text(name, robots, blocks, init, goal),
                      _ontology_text(robots, blocks), _interface_text(robots, blocks))


def interchangeable_bundle(k: int, blocks: int = 3) -> BundleText:
    """k robots the ontology cannot tell apart, each with a fullHands query,
    sharing a few blocks that start on the table; the goal is one tower."""
    if k < 1 or blocks < 2:
        raise ValueError("need a robot and two blocks")
    robots = [f"r{i}" for i in range(1, k + 1)]
    bs = block_names(blocks)
    goal = [f"(on {bs[i]} {bs[i - 1]})" for i in range(1, blocks)]
    name = f"ii-{k}"
    return BundleText(name, _domain_text(), _problem_text(name, robots, bs, [[b] for b in bs], goal),
                      _ontology_text(robots, bs), _interface_text(robots, bs))


def make_bundle(family: str, size: int, seed: int) -> BundleText:
    if family == "blocksworld":
        return blocksworld_bundle(size, seed)
    if family == "interchangeable":
        return interchangeable_bundle(size)
    raise ValueError(f"unknown family {family!r}")


@dataclass
class BenchRow:
    instance: str
    algorithm: str
    reasoning_time: float = 0.0
    planning_time: float = 0.0
    total_time: float = 0.0
    status: str = "error"
    plan_length: int | None = None
    consistency_calls: int = 0
    single_just_calls: int = 0

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    def cells(self) -> list:
        return [self.instance, self.algorithm, f"{self.reasoning_time:.4f}",
                f"{self.planning_time:.4f}", f"{self.total_time:.4f}", int(self.solved),
                self.status, "" if self.plan_length is None else self.plan_length,
                self.consistency_calls, self.single_just_calls]


def run_instance(bundle: BundleText, algorithm: str, config: JustifyConfig | None = None,
                 time_limit: float | None = None) -> BenchRow:
    row = BenchRow(bundle.name, algorithm)
    omps = bundle.load()
    t0 = time.perf_counter()
    r = rewrite.rew(omps, algorithm, config)
    t1 = time.perf_counter()
    row.reasoning_time = t1 - t0
    row.consistency_calls = r.stats.consistency_calls
    row.single_just_calls = r.stats.single_just_calls
    left = None if time_limit is None else max(time_limit - row.reasoning_time, 1e-3)
    res = planner.solve(r.spec, planner.PlannerConfig(time_limit=left))
    row.planning_time = time.perf_counter() - t1
    row.total_time = row.reasoning_time + row.planning_time
    row.status = res.status
    if res.plan is not None:
        row.plan_length = len(res.plan)
    return row


def _worker(args, out):
    bundle, algorithm, config, time_limit = args
    try:
        out.put(run_instance(bundle, algorithm, config, time_limit))
    except Exception as e:                      # recorded, never fatal
        out.put(BenchRow(bundle.name, algorithm, status=f"error: {type(e).__name__}"))


def _isolated(bundle, algorithm, config, time_limit) -> BenchRow:
    """Run one instance in its own process, killing it at the time limit."""
    ctx = mp.get_context("fork")
    q = ctx.Queue()
    p = ctx.Process(target=_worker, args=((bundle, algorithm, config, time_limit), q))
    start = time.perf_counter()
    p.start()
    try:
        row = q.get(timeout=None if time_limit is None else time_limit + 5)
    except Exception:
        row = BenchRow(bundle.name, algorithm, status="timeout",
                       total_time=time.perf_counter() - start)
    p.join(1)
    if p.is_alive():
        p.kill()
        p.join()
    return row


def run_suite(bundles: Sequence[BundleText], algorithms: Sequence[str] = ALGORITHMS,
              config: JustifyConfig | None = None, time_limit: float | None = None,
              isolate: bool = True) -> list[BenchRow]:
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}")
    rows = []
    for b in bundles:
        for a in algorithms:
            if isolate:
                rows.append(_isolated(b, a, config, time_limit))
            else:
                rows.append(run_instance(b, a, config, time_limit))
    return rows


def suite(families: Sequence[str], sizes: Sequence[int], instances: int = 1,
          seed: int = 0) -> list[BundleText]:
    out = []
    for fam in families:
        for n in sizes:
            if fam == "interchangeable":
                out.extend(interchangeable_bundle(n) for _ in range(min(instances, 1)))
            else:
                out.extend(blocksworld_bundle(n, seed + i) for i in range(instances))
    return out


def to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def cactus(rows: Iterable[BenchRow]) -> str:
    """Solved-instance count against total time, one series per algorithm."""
    by_alg: dict[str, list[float]] = {}
    for r in rows:
        series = by_alg.setdefault(r.algorithm, [])
        if r.solved:
            series.append(r.total_time)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["algorithm", "solved", "time"])
    for alg in sorted(by_alg):
        for k, t in enumerate(sorted(by_alg[alg]), 1):
            w.writerow([alg, k, f"{t:.4f}"])
    return buf.getvalue()
