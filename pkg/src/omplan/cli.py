"""``omplan`` command-line entry point.

Exit codes:
  0  success (plan found, plan accepted)
  1  parse or validation error
  2  reasoner budget exceeded
  3  static ontology inconsistent
  4  planning task unsolvable
  5  plan rejected by the validator
  6  planner hit its time or state limit

Every flag can also be set through an environment variable named
``OMPS_<FLAG>`` (upper case, dashes as underscores), e.g. ``OMPS_ALGORITHM``
or ``OMPS_NO_PATH_PRUNING=1``. Command-line flags win.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from omplan import __version__, bench, omps as omps_mod, pddl, planner, rewrite
from omplan.errors import (
    ContractViolation, OmplanError, ParseError, ReasonerBudgetExceeded,
    StaticOntologyInconsistent, UnsupportedConstruct, ValidationError,
)
from omplan.justify import ALGORITHMS, JustifyConfig, explain
from omplan.reasoner import DEFAULT_NODE_BUDGET

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_BUDGET = 2
EXIT_STATIC_INCONSISTENT = 3
EXIT_UNSOLVABLE = 4
EXIT_REJECTED = 5
EXIT_LIMIT = 6

_TRUE = {"1", "true", "yes", "on"}


@dataclass
class RunConfig:
    algorithm: str = "concept"
    marker_pruning: bool = True
    path_pruning: bool = True
    workers: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET
    time_limit: float | None = None
    max_states: int = 2_000_000
    heuristic: str = "zero"
    seed: int = 0
    out: Path | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.node_budget <= 0 or self.workers <= 0 or self.max_states <= 0:
            raise ValueError("budgets and worker counts must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")

    def justify_config(self) -> JustifyConfig:
        return JustifyConfig(marker_pruning=self.marker_pruning, path_pruning=self.path_pruning,
                             workers=self.workers, node_budget=self.node_budget)

    def planner_config(self) -> planner.PlannerConfig:
        return planner.PlannerConfig(heuristic=self.heuristic, time_limit=self.time_limit,
                                     max_states=self.max_states)


def _env(name: str, default=None):
    return os.environ.get("OMPS_" + name.upper().replace("-", "_"), default)


def _env_flag(name: str) -> bool:
    return str(_env(name, "")).strip().lower() in _TRUE


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", choices=ALGORITHMS, default=_env("algorithm", "concept"))
    p.add_argument("--no-figure4-pruning", action="store_true", default=_env_flag("no-figure4-pruning"),
                   help="explore every marker branch in the concept and schema routes")
    p.add_argument("--no-path-pruning", action="store_true", default=_env_flag("no-path-pruning"),
                   help="disable hitting-set path reuse and early path closing")
    p.add_argument("--node-budget", type=int, default=int(_env("node-budget", DEFAULT_NODE_BUDGET)))
    p.add_argument("--workers", type=int, default=int(_env("workers", 1)),
                   help="hitting-set worker threads (1 = deterministic single-threaded)")
    p.add_argument("--out", type=Path, default=_env("out"))


def _planning(p: argparse.ArgumentParser) -> None:
    tl = _env("time-limit")
    p.add_argument("--time-limit", type=float, default=float(tl) if tl else None)
    p.add_argument("--max-states", type=int, default=int(_env("max-states", 2_000_000)))
    p.add_argument("--heuristic", choices=planner.HEURISTICS, default=_env("heuristic", "zero"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="omplan", description="Ontology-mediated planning compiler.")
    ap.add_argument("--version", action="version", version=f"omplan {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="rewrite a bundle into plain PDDL")
    p.add_argument("manifest", type=Path)
    _common(p)

    p = sub.add_parser("justify", help="print the explanation table as CSV")
    p.add_argument("manifest", type=Path)
    _common(p)

    p = sub.add_parser("plan", help="compile, then search for a plan")
    p.add_argument("manifest", type=Path)
    _common(p)
    _planning(p)

    p = sub.add_parser("validate", help="check a plan against the ontology-mediated semantics")
    p.add_argument("manifest", type=Path)
    p.add_argument("plan", type=Path, nargs="?",
                   help="plan file; defaults to the manifest's plan entry")
    p.add_argument("--node-budget", type=int, default=int(_env("node-budget", DEFAULT_NODE_BUDGET)))

    p = sub.add_parser("bench", help="run a generated benchmark suite")
    p.add_argument("--family", action="append", choices=bench.FAMILIES,
                   help="instance family; repeatable (default: blocksworld)")
    p.add_argument("--sizes", default=_env("sizes", "3-6"),
                   help="block counts, e.g. 3-6 or 2,4,5")
    p.add_argument("--instances", type=int, default=int(_env("instances", 1)),
                   help="instances per size for seeded families")
    p.add_argument("--algorithms", default=_env("algorithms", ",".join(ALGORITHMS)))
    p.add_argument("--seed", type=int, default=int(_env("seed", 0)))
    p.add_argument("--no-figure4-pruning", action="store_true", default=_env_flag("no-figure4-pruning"))
    p.add_argument("--no-path-pruning", action="store_true", default=_env_flag("no-path-pruning"))
    p.add_argument("--node-budget", type=int, default=int(_env("node-budget", DEFAULT_NODE_BUDGET)))
    tl = _env("time-limit")
    p.add_argument("--time-limit", type=float, default=float(tl) if tl else 60.0,
                   help="per-instance limit in seconds")
    p.add_argument("--out", type=Path, default=_env("out"))
    return ap


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        algorithm=getattr(args, "algorithm", "concept"),
        marker_pruning=not getattr(args, "no_figure4_pruning", False),
        path_pruning=not getattr(args, "no_path_pruning", False),
        workers=getattr(args, "workers", 1),
        node_budget=args.node_budget,
        time_limit=getattr(args, "time_limit", None),
        max_states=getattr(args, "max_states", 2_000_000),
        heuristic=getattr(args, "heuristic", "zero"),
        seed=getattr(args, "seed", 0),
        out=Path(args.out) if getattr(args, "out", None) else None,
    )


def _write(out: Path, name: str, text: str) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _parse_sizes(text: str) -> list[int]:
    sizes: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            sizes.extend(range(int(lo), int(hi) + 1))
        else:
            sizes.append(int(part))
    return sizes


# -- commands ---------------------------------------------------------------

def cmd_compile(manifest: Path, cfg: RunConfig, stdout=None) -> rewrite.RewrittenSpec:
    stdout = stdout or sys.stdout
    omps = omps_mod.load_bundle(manifest)
    r = rewrite.rew(omps, cfg.algorithm, cfg.justify_config())
    domain, problem = pddl.print_pddl(r.spec)
    summary = [f"query rules: {r.query_rules}",
               f"inconsistency disjuncts: {r.inc_disjuncts}",
               f"explanation rows: {len(r.table.rows())}"]
    summary += [f"{k}: {v}" for k, v in r.stats.as_dict().items()]
    if not omps.queries:
        summary.append("note: no query specifications; only the inconsistency guard was added"
                       if r.inc_disjuncts else "note: no query specifications; spec unchanged")
    if cfg.out is None:
        stdout.write(domain + "\n" + problem)
        print("\n".join(summary), file=sys.stderr)
    else:
        _write(cfg.out, "domain.pddl", domain)
        _write(cfg.out, "problem.pddl", problem)
        _write(cfg.out, "provenance.json", r.provenance_json())
        stdout.write("\n".join(summary) + "\n")
    return r


def cmd_justify(manifest: Path, cfg: RunConfig, stdout=None):
    stdout = stdout or sys.stdout
    omps = omps_mod.load_bundle(manifest)
    fl, _, alphas = rewrite.explanation_inputs(omps)
    table, stats = explain(list(omps.static), fl, alphas, cfg.algorithm, cfg.justify_config())
    text = table.to_csv()
    stats_json = json.dumps(stats.as_dict(), indent=2, sort_keys=True) + "\n"
    if cfg.out is None:
        stdout.write(text)
        sys.stderr.write(stats_json)
    else:
        _write(cfg.out, "explanations.csv", text)
        _write(cfg.out, "justify-stats.json", stats_json)
        stdout.write(stats_json)
    return table, stats


def cmd_plan(manifest: Path, cfg: RunConfig, stdout=None) -> planner.SearchResult:
    stdout = stdout or sys.stdout
    omps = omps_mod.load_bundle(manifest)
    r = rewrite.rew(omps, cfg.algorithm, cfg.justify_config())
    res = planner.solve(r.spec, cfg.planner_config())
    text = pddl.format_plan(res.plan) if res.plan is not None else ""
    if cfg.out is None:
        stdout.write(text)
    else:
        _write(cfg.out, "plan.txt", text)
        _write(cfg.out, "plan-stats.json", res.stats.to_json(with_time=False))
        stdout.write(f"status: {res.status}\n")
    print(f"status: {res.status}; {json.dumps(res.stats.as_dict())}", file=sys.stderr)
    return res


def cmd_validate(manifest: Path, plan_file: Path | None, node_budget: int = DEFAULT_NODE_BUDGET,
                 stdout=None) -> omps_mod.Verdict:
    stdout = stdout or sys.stdout
    files = omps_mod.read_manifest(manifest)
    if plan_file is None:
        if "plan" not in files:
            raise ValidationError("no plan file given and the manifest has no plan entry")
        plan_file = files["plan"]
    omps = omps_mod.load_bundle(manifest)
    steps = [pddl.instantiate(omps.spec, n, a)
             for n, a in pddl.parse_plan(Path(plan_file).read_text(), str(plan_file))]
    verdict = omps_mod.Semantics(omps, node_budget=node_budget).validate_plan(steps)
    stdout.write(str(verdict) + "\n")
    return verdict


def cmd_bench(args: argparse.Namespace, stdout=None) -> list[bench.BenchRow]:
    stdout = stdout or sys.stdout
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    cfg = JustifyConfig(marker_pruning=not args.no_figure4_pruning,
                        path_pruning=not args.no_path_pruning, node_budget=args.node_budget)
    bundles = bench.suite(args.family or ["blocksworld"], _parse_sizes(args.sizes),
                          args.instances, args.seed)
    rows = bench.run_suite(bundles, algorithms, cfg, args.time_limit)
    text = bench.to_csv(rows)
    if args.out is None:
        stdout.write(text)
    else:
        out = Path(args.out)
        _write(out, "bench.csv", text)
        _write(out, "cactus.csv", bench.cactus(rows))
        solved = sum(r.solved for r in rows)
        stdout.write(f"{solved}/{len(rows)} runs solved\n")
    return rows


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "bench":
            cmd_bench(args)
            return EXIT_OK
        if args.command == "validate":
            v = cmd_validate(args.manifest, args.plan, args.node_budget)
            return EXIT_OK if v.accepted else EXIT_REJECTED
        cfg = _config(args)
        if args.command == "compile":
            cmd_compile(args.manifest, cfg)
        elif args.command == "justify":
            cmd_justify(args.manifest, cfg)
        else:
            res = cmd_plan(args.manifest, cfg)
            if res.status == "unsolvable":
                return EXIT_UNSOLVABLE
            if res.status != "solved":
                return EXIT_LIMIT
        return EXIT_OK
    except StaticOntologyInconsistent as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STATIC_INCONSISTENT
    except ReasonerBudgetExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (ParseError, UnsupportedConstruct, ValidationError, ContractViolation,
            OmplanError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
