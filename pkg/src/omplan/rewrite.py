"""Compile an OMPS into plain PDDL with derived predicates.

Every query specification becomes one ground-guarded rule per candidate::

    (:derived (p ?x) (and (= ?x c) <DNF over fluent atoms>))

and a fresh nullary predicate flags inconsistent states. Its negation guards
the goal and every action precondition.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from omplan import dl, pddl
from omplan.dl import Axiom
from omplan.errors import ContractViolation, StaticOntologyInconsistent, ValidationError
from omplan.justify import ExplanationTable, JustifyConfig, JustifyStats, antichain, explain
from omplan.omps import FluentInterface, Omps, QuerySpec, candidates, fluents_of
from omplan.pddl import Atom, DerivationRule, PddlSpec
from omplan.reasoner import ReasonerHandle

DEFAULT_DISJUNCT_CAP = 100_000
INC_NAME = "Inc"


def _atom_key(a: Atom) -> tuple:
    return (a.pred, a.args)


def _disjunct_key(d: frozenset) -> tuple:
    return (len(d), sorted(_atom_key(a) for a in d))


@dataclass(frozen=True)
class DetectFormula:
    """DNF over planner atoms; no disjuncts is FALSE, an empty one TRUE."""

    alpha: Axiom | None
    disjuncts: frozenset = frozenset()

    @property
    def is_true(self) -> bool:
        return frozenset() in self.disjuncts

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    def ordered(self) -> list[list[Atom]]:
        return [sorted(d, key=_atom_key) for d in sorted(self.disjuncts, key=_disjunct_key)]

    def to_formula(self) -> pddl.Formula:
        if self.is_true:
            return pddl.TRUE
        return pddl.disj(pddl.conj(d) for d in self.ordered()) if self.disjuncts else pddl.FALSE


def detect(alpha: Axiom, table: ExplanationTable, F: FluentInterface) -> DetectFormula:
    """Minimal fluent sets entailing ``alpha`` mapped back to atoms."""
    if alpha not in table.queries:
        raise ContractViolation(f"no explanation rows for {alpha}")
    sets = table.entailing_sets(alpha)
    return DetectFormula(alpha, frozenset(frozenset(F.preimage(b) for b in s) for s in sets))


def conjoin(formulas: Sequence[DetectFormula], cap: int = DEFAULT_DISJUNCT_CAP) -> DetectFormula:
    """Distribute a conjunction of DNFs, keeping only minimal disjuncts."""
    acc: set[frozenset] = {frozenset()}
    for f in formulas:
        nxt = {a | b for a in acc for b in f.disjuncts}
        if len(nxt) > cap:
            raise ValidationError(
                f"rule body exceeds {cap} disjuncts; raise the cap or simplify the query")
        acc = antichain(nxt)
    return DetectFormula(None, frozenset(acc))


@dataclass
class RewrittenSpec:
    spec: PddlSpec
    provenance: dict[str, dict] = field(default_factory=dict)
    table: ExplanationTable = field(default_factory=ExplanationTable)
    stats: JustifyStats = field(default_factory=JustifyStats)
    inc_predicate: str = INC_NAME
    query_rules: int = 0
    inc_disjuncts: int = 0

    def provenance_json(self) -> str:
        return json.dumps(self.provenance, indent=2, sort_keys=True) + "\n"


def _query_vars(q: QuerySpec) -> tuple[str, ...]:
    return tuple("?" + v for v in q.variables)


def build_query_rule(q: QuerySpec, cands: Sequence[tuple[str, ...]], table: ExplanationTable,
                     omps: Omps, cap: int = DEFAULT_DISJUNCT_CAP
                     ) -> list[tuple[DerivationRule, tuple[str, ...], DetectFormula]]:
    """One guarded rule per candidate whose body is not FALSE."""
    F = omps.interface
    head = Atom(q.pred, _query_vars(q))
    out = []
    for cand in cands:
        inds = [F.constants[c] for c in cand]
        body = conjoin([detect(a, table, F) for a in q.instantiate(inds)], cap)
        if body.is_false:
            continue
        guard = [pddl.Eq(v, c) for v, c in zip(head.args, cand)]
        out.append((DerivationRule(head, pddl.conj(guard + [body.to_formula()])), cand, body))
    return out


def build_inc_rule(table: ExplanationTable, F: FluentInterface,
                   name: str = INC_NAME) -> tuple[DerivationRule, DetectFormula] | None:
    if frozenset() in table.inconsistent:
        raise StaticOntologyInconsistent("static ontology inconsistent")
    body = DetectFormula(None, frozenset(frozenset(F.preimage(b) for b in s)
                                         for s in table.inconsistent))
    if body.is_false:
        return None
    return DerivationRule(Atom(name), body.to_formula()), body


def _fresh_predicate(spec: PddlSpec, base: str) -> str:
    taken = set(spec.predicates) | {a.name for a in spec.actions}
    name, k = base, 1
    while name in taken:
        name = f"{base}_{k}"
        k += 1
    return name


def explanation_inputs(omps: Omps, reasoner: ReasonerHandle | None = None
                       ) -> tuple[list[Axiom], dict[str, list[tuple[str, ...]]], list[Axiom]]:
    """(fluents, candidates per query predicate, query axioms) for an OMPS."""
    h = reasoner or ReasonerHandle(omps.static)
    F = omps.interface
    fl = fluents_of(omps)
    cands = {q.pred: candidates(q, omps, h) for q in omps.queries}
    alphas: list[Axiom] = []
    for q in omps.queries:
        for cand in cands[q.pred]:
            alphas.extend(q.instantiate([F.constants[c] for c in cand]))
    return fl, cands, list(dict.fromkeys(alphas))


def rew(omps: Omps, algorithm: str = "concept", config: JustifyConfig | None = None,
        cap: int = DEFAULT_DISJUNCT_CAP) -> RewrittenSpec:
    config = config or JustifyConfig()
    static = list(omps.static)
    h = ReasonerHandle(static, node_budget=config.node_budget)
    if not h.is_consistent():
        raise StaticOntologyInconsistent("static ontology inconsistent")
    fl, cands, alphas = explanation_inputs(omps, h)
    table, stats = explain(static, fl, alphas, algorithm, config)
    stats.consistency_calls += h.stats.consistency_calls

    spec = omps.spec
    F = omps.interface
    provenance: dict[str, dict] = {}
    rules: list[DerivationRule] = list(spec.rules)
    n_query = 0
    for q in omps.queries:
        for k, (rule, cand, body) in enumerate(build_query_rule(q, cands[q.pred], table, omps, cap)):
            rules.append(rule)
            n_query += 1
            provenance[f"{q.pred}#{k}"] = {
                "query": q.pred,
                "candidate": list(cand),
                "axioms": [str(a) for a in q.instantiate([F.constants[c] for c in cand])],
                "fluent_sets": [[str(a) for a in d] for d in body.ordered()],
            }

    inc_name = _fresh_predicate(spec, INC_NAME)
    inc = build_inc_rule(table, F, inc_name)
    predicates = dict(spec.predicates)
    actions = spec.actions
    goal = spec.goal
    n_inc = 0
    if inc is not None:
        rule, body = inc
        rules.append(rule)
        n_inc = len(body.disjuncts)
        provenance[inc_name] = {
            "query": inc_name,
            "candidate": [],
            "axioms": [],
            "fluent_sets": [[str(a) for a in d] for d in body.ordered()],
        }
        predicates[inc_name] = ()
        guard = pddl.Not(Atom(inc_name))
        actions = tuple(replace(a, pre=pddl.conj([a.pre, guard]) if a.pre != pddl.TRUE else guard)
                        for a in spec.actions)
        goal = pddl.conj([goal, guard]) if goal != pddl.TRUE else guard

    reqs = list(spec.requirements)
    for r in (":derived-predicates", ":negative-preconditions", ":disjunctive-preconditions",
              ":equality"):
        if r not in reqs and (n_query or inc is not None):
            reqs.append(r)
    out = replace(spec, requirements=tuple(reqs), predicates=predicates, actions=actions,
                  rules=tuple(rules), goal=goal)
    pddl.validate_spec(out)
    return RewrittenSpec(out, provenance, table, stats, inc_name, n_query, n_inc)
