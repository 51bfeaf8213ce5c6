"""
A robot that holds at most two blocks
=====================================

Load the packaged blocksworld bundle, compile it, look at the derived
rules, then plan and check the plan against the ontology.
"""

from importlib.resources import files

from omplan import omps, pddl, planner, rewrite
from omplan.omps import Semantics

bundle = files("omplan") / "data" / "blocksworld" / "bundle.manifest"
problem = omps.load_bundle(bundle)
print(problem.queries[0])

# compile: one rule for fullHands, one for the inconsistency flag
compiled = rewrite.rew(problem, "schema")
domain, _ = pddl.print_pddl(compiled.spec)
start = domain.index("(:derived")
print(domain[start:domain.index("(:action")])

# the planner sees plain PDDL only
result = planner.solve(compiled.spec)
print(result.status, "in", len(result.plan), "steps")
print(pddl.format_plan(result.plan))

# replay the same plan through the reasoner-backed semantics
print(Semantics(problem).validate_plan(result.plan))

# holding a third block is caught
bad = [pddl.instantiate(problem.spec, n, a) for n, a in pddl.parse_plan(
    "(unstack stackBot blockB blockA)\n(pickup stackBot blockA)\n(pickup stackBot blockC)\n")]
print(Semantics(problem).validate_plan(bad))
