"""Ontology-mediated planning specifications and their reference semantics.

The interface file is line oriented::

    # comment
    object stackBot -> stackBot
    fluent holds -> holds
    fluent blocked -> not holds
    query fullHands(x: Robot) <- { FullHands(x) }

Query patterns are ``Concept(x)``, ``role(x, y)``, ``not role(x, y)``,
``x = y``, ``x != y`` or a functional-syntax ABox axiom over ``?x``-style
variables. Static types are functional-syntax concepts.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from omplan import dl, pddl
from omplan.dl import (
    Axiom, ClassAssertion, Concept, DifferentIndividuals, NegativeRoleAssertion,
    Ontology, RoleAssertion, SameIndividual, Var,
)
from omplan.errors import ContractViolation, ParseError, ValidationError
from omplan.pddl import Atom, GroundAction, PddlSpec
from omplan.reasoner import ReasonerHandle


@dataclass(frozen=True)
class FluentInterface:
    """Partial, injective map from predicates and constants to DL names.

    ``predicates`` maps a predicate to ``(kind, name)`` with kind one of
    ``concept``, ``role`` or ``not-role``.
    """

    predicates: Mapping[str, tuple[str, str]] = field(default_factory=dict)
    constants: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen: dict[tuple[str, str], str] = {}
        for p, target in self.predicates.items():
            if target in seen:
                raise ValidationError(
                    f"predicates {seen[target]} and {p} both map to {target[1]}")
            seen[target] = p
        inds: dict[str, str] = {}
        for c, i in self.constants.items():
            if i in inds:
                raise ValidationError(f"constants {inds[i]} and {c} both map to {i}")
            inds[i] = c

    @property
    def individuals(self) -> dict[str, str]:
        """Individual -> constant (the inverse on constants)."""
        return {i: c for c, i in self.constants.items()}

    def image(self, atom: Atom) -> Axiom | None:
        """F lifted to atoms; None where undefined."""
        target = self.predicates.get(atom.pred)
        if target is None:
            return None
        args = [self.constants.get(a) for a in atom.args]
        if any(a is None for a in args):
            return None
        kind, name = target
        if kind == "concept":
            return ClassAssertion(dl.Name(name), args[0]) if len(args) == 1 else None
        if len(args) != 2:
            return None
        if kind == "role":
            return RoleAssertion(name, args[0], args[1])
        return NegativeRoleAssertion(name, args[0], args[1])

    def preimage(self, ax: Axiom) -> Atom:
        """F inverse on a fluent axiom."""
        inv_pred = {t: p for p, t in self.predicates.items()}
        inv_ind = self.individuals
        if isinstance(ax, ClassAssertion) and isinstance(ax.concept, dl.Name):
            key, terms = ("concept", ax.concept.name), (ax.individual,)
        elif isinstance(ax, RoleAssertion):
            key, terms = ("role", ax.role), (ax.subject, ax.object)
        elif isinstance(ax, NegativeRoleAssertion):
            key, terms = ("not-role", ax.role), (ax.subject, ax.object)
        else:
            raise ContractViolation(f"not a fluent axiom: {ax}")
        pred = inv_pred.get(key)
        args = [inv_ind.get(t) for t in terms]
        if pred is None or any(a is None for a in args):
            raise ContractViolation(f"fluent {ax} has no preimage under the interface")
        return Atom(pred, tuple(args))


@dataclass(frozen=True)
class QuerySpec:
    pred: str
    variables: tuple[str, ...]
    types: tuple[Concept, ...]
    patterns: tuple[Axiom, ...]

    def instantiate(self, constants_or_inds: Sequence[str]) -> list[Axiom]:
        val = {Var(v): a for v, a in zip(self.variables, constants_or_inds)}
        return [dl.substitute(p, val) for p in self.patterns]

    def __str__(self) -> str:
        head = ", ".join(f"{v}: {dl.concept_to_functional(t)}"
                         for v, t in zip(self.variables, self.types))
        body = "; ".join(dl.axiom_to_functional(p) for p in self.patterns)
        return f"query {self.pred}({head}) <- {{ {body} }}"


@dataclass
class Omps:
    spec: PddlSpec
    static: Ontology
    interface: FluentInterface
    queries: tuple[QuerySpec, ...] = ()

    @property
    def query_predicates(self) -> set[str]:
        return {q.pred for q in self.queries}


@dataclass
class OntologyEnhancedState:
    state: frozenset
    ontology: Ontology
    consistent: bool = True

    def strip_queries(self, omps: Omps) -> frozenset:
        qp = omps.query_predicates
        return frozenset(a for a in self.state if a.pred not in qp)


# -- interface DSL --------------------------------------------------------------

_OBJECT = re.compile(r"object\s+(\S+)\s*->\s*(\S+)$")
_FLUENT = re.compile(r"fluent\s+(\S+)\s*->\s*(not\s+)?(\S+)$")
_QUERY = re.compile(r"query\s+([^\s(]+)\s*\((.*)\)\s*<-\s*\{(.*)\}$")
_SHORT = re.compile(r"(not\s+)?([^\s(),=!]+)\s*\(\s*([^(),\s]+)\s*(?:,\s*([^(),\s]+)\s*)?\)$")
_EQ = re.compile(r"([^\s=!]+)\s*(=|!=)\s*([^\s=!]+)$")


def _split_top(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside parentheses."""
    out, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return [s.strip() for s in out if s.strip()]


def _check_name(name: str, kind: str, kinds: Mapping[str, str] | None, line: int, source):
    if kinds is None:
        return
    got = kinds.get(name)
    if got is None:
        raise ValidationError(f"{source}:{line}: unknown {kind} name '{name}'")
    if got != kind:
        raise ValidationError(f"{source}:{line}: '{name}' is a {got} name, not a {kind} name")


def _pattern(text: str, variables: Sequence[str], kinds, line: int, source) -> Axiom:
    def term(t: str) -> str | Var:
        t = t[1:] if t.startswith("?") else t
        if t not in variables:
            raise ValidationError(f"{source}:{line}: '{t}' is not a query variable")
        return Var(t)

    m = _EQ.match(text)
    if m:
        a, op, b = term(m.group(1)), m.group(2), term(m.group(3))
        return SameIndividual(a, b) if op == "=" else DifferentIndividuals(a, b)
    m = _SHORT.match(text)
    if m and m.group(2) not in dl._AXIOM_CTORS:
        neg, name, x, y = m.groups()
        if y is None:
            if neg:
                raise ValidationError(f"{source}:{line}: 'not' applies to role patterns only")
            _check_name(name, "concept", kinds, line, source)
            return ClassAssertion(dl.Name(name), term(x))
        _check_name(name, "role", kinds, line, source)
        cls = NegativeRoleAssertion if neg else RoleAssertion
        return cls(name, term(x), term(y))
    ax = dl.parse_axiom(text, allow_variables=True,
                        kinds=dict(kinds) if kinds is not None else None)
    if not dl.is_abox(ax):
        raise ValidationError(f"{source}:{line}: query patterns must be ABox axioms")
    for v in dl.variables_of(ax):
        if v.name not in variables:
            raise ValidationError(f"{source}:{line}: '?{v.name}' is not a query variable")
    for ind in dl.individuals_of(ax):
        raise ValidationError(f"{source}:{line}: individual '{ind}' in a query pattern")
    return ax


def parse_interface(text: str, kinds: Mapping[str, str] | None = None,
                    source: str = "<interface>") -> tuple[FluentInterface, tuple[QuerySpec, ...]]:
    """Parse the interface DSL. ``kinds`` (name -> concept/role/individual)
    enables checking names against a loaded ontology signature."""
    preds: dict[str, tuple[str, str]] = {}
    consts: dict[str, str] = {}
    queries: list[QuerySpec] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _OBJECT.match(line)
        if m:
            c, i = m.groups()
            if c in consts:
                raise ValidationError(f"{source}:{lineno}: constant {c} mapped twice")
            _check_name(i, "individual", kinds, lineno, source)
            consts[c] = i
            continue
        m = _FLUENT.match(line)
        if m:
            p, neg, name = m.groups()
            if p in preds:
                raise ValidationError(f"{source}:{lineno}: predicate {p} mapped twice")
            if kinds is not None and name not in kinds:
                raise ValidationError(f"{source}:{lineno}: unknown ontology name '{name}'")
            kind = kinds.get(name) if kinds is not None else None
            if kind == "individual":
                raise ValidationError(f"{source}:{lineno}: '{name}' is an individual name")
            if neg:
                if kind == "concept":
                    raise ValidationError(f"{source}:{lineno}: 'not' applies to roles only")
                preds[p] = ("not-role", name)
            else:
                preds[p] = (kind or "", name)
            continue
        m = _QUERY.match(line)
        if m:
            p, head, body = m.groups()
            variables, types = [], []
            for part in _split_top(head, ","):
                if ":" not in part:
                    raise ParseError(f"query variable '{part}' needs a static type", lineno, None, source)
                v, t = part.split(":", 1)
                v = v.strip().lstrip("?")
                if v in variables:
                    raise ValidationError(f"{source}:{lineno}: duplicate query variable {v}")
                variables.append(v)
                types.append(dl.parse_concept(t.strip(), dict(kinds) if kinds is not None else None))
            patterns = tuple(_pattern(t, variables, kinds, lineno, source)
                             for t in _split_top(body, ";"))
            if not patterns:
                raise ValidationError(f"{source}:{lineno}: empty query")
            if any(q.pred == p for q in queries):
                raise ValidationError(f"{source}:{lineno}: query predicate {p} defined twice")
            queries.append(QuerySpec(p, tuple(variables), tuple(types), patterns))
            continue
        raise ParseError(f"unrecognized line '{line}'", lineno, 1, source)
    return FluentInterface(preds, consts), tuple(queries)


def resolve_kinds(interface: FluentInterface, spec: PddlSpec) -> FluentInterface:
    """Fill in concept/role for predicates mapped without a known signature,
    from predicate arity."""
    preds = {}
    for p, (kind, name) in interface.predicates.items():
        if kind == "":
            if p not in spec.predicates:
                raise ValidationError(f"interface maps undeclared predicate {p}")
            kind = "concept" if len(spec.predicates[p]) == 1 else "role"
        preds[p] = (kind, name)
    return FluentInterface(preds, dict(interface.constants))


def validate_omps(omps: Omps) -> None:
    spec, F = omps.spec, omps.interface
    objs = set(spec.all_objects)
    for c in F.constants:
        if c not in objs:
            raise ValidationError(f"interface maps unknown constant {c}")
    for p, (kind, name) in F.predicates.items():
        if p not in spec.predicates:
            raise ValidationError(f"interface maps undeclared predicate {p}")
        arity = len(spec.predicates[p])
        want = 1 if kind == "concept" else 2
        if arity != want:
            raise ValidationError(
                f"predicate {p} has arity {arity} but is mapped to a {kind.replace('-', ' ')} name")
    effect_preds = {e.pred for a in spec.actions for e in a.add + a.delete}
    for q in omps.queries:
        if q.pred not in spec.predicates:
            raise ValidationError(f"query predicate {q.pred} is not declared in the domain")
        if len(spec.predicates[q.pred]) != len(q.variables):
            raise ValidationError(f"query predicate {q.pred} arity mismatch")
        if q.pred in effect_preds or q.pred in spec.derived_predicates \
                or any(a.pred == q.pred for a in spec.init):
            raise ValidationError(f"query predicate {q.pred} must be derived only by its query")
        if q.pred in F.predicates:
            raise ValidationError(f"query predicate {q.pred} is also a fluent predicate")
    overlap = set(fluents_of(omps)) & set(omps.static)
    if overlap:
        raise ValidationError(
            "static ontology contains fluents: " + ", ".join(sorted(map(str, overlap))))


def load_omps(spec: PddlSpec, ontology: Ontology, interface_text: str,
              source: str = "<interface>") -> Omps:
    kinds = dl.name_kinds(ontology)
    F, Q = parse_interface(interface_text, kinds, source)
    omps = Omps(spec, ontology, resolve_kinds(F, spec), Q)
    validate_omps(omps)
    return omps


def read_manifest(path: str | Path) -> dict[str, Path]:
    """``key = value`` lines; paths resolved against the manifest's directory."""
    path = Path(path)
    out: dict[str, Path] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key = value", lineno, 1, str(path))
        k, v = (s.strip() for s in line.split("=", 1))
        out[k] = (path.parent / v).resolve()
    missing = {"domain", "problem", "ontology", "interface"} - out.keys()
    if missing:
        raise ValidationError(f"{path}: manifest lacks {', '.join(sorted(missing))}")
    return out


def load_bundle(manifest: str | Path) -> Omps:
    files = read_manifest(manifest)
    spec = pddl.parse_pddl(files["domain"].read_text(), files["problem"].read_text(),
                           str(files["domain"]), str(files["problem"]))
    onto = dl.parse_ontology(files["ontology"].read_text(), str(files["ontology"]))
    return load_omps(spec, onto, files["interface"].read_text(), str(files["interface"]))


# -- semantics ------------------------------------------------------------------

def fluents_of(omps: Omps) -> list[Axiom]:
    """Images of all atoms over mapped predicates and mapped constants."""
    F = omps.interface
    consts = list(F.constants)
    out: list[Axiom] = []
    for p in F.predicates:
        arity = 1 if F.predicates[p][0] == "concept" else 2
        for args in itertools.product(consts, repeat=arity):
            out.append(F.image(Atom(p, args)))
    return out


def candidates(q: QuerySpec, omps: Omps, reasoner: ReasonerHandle | None = None
               ) -> list[tuple[str, ...]]:
    """Constant vectors whose individuals have the static types under O_s alone."""
    h = reasoner or ReasonerHandle(omps.static)
    F = omps.interface
    per_var = []
    for t in q.types:
        ok = []
        for c, ind in F.constants.items():
            if isinstance(t, dl.Top) or h.entails(ClassAssertion(t, ind)):
                ok.append(c)
        per_var.append(ok)
    return [tuple(v) for v in itertools.product(*per_var)]


class Semantics:
    """Reference semantics of an OMPS, backed by the reasoner.

    Candidate lists are computed once.
    """

    def __init__(self, omps: Omps, node_budget: int | None = None):
        self.omps = omps
        kw = {} if node_budget is None else {"node_budget": node_budget}
        self.reasoner = ReasonerHandle(omps.static, **kw)
        self._candidates = {q.pred: candidates(q, omps, self.reasoner) for q in omps.queries}
        self.derive = pddl.Deriver(pddl.ground_rules(omps.spec))

    def candidates(self, q: QuerySpec) -> list[tuple[str, ...]]:
        return self._candidates[q.pred]

    def ext(self, state: Iterable[Atom]) -> OntologyEnhancedState:
        state = frozenset(state)
        qp = self.omps.query_predicates
        for a in state:
            if a.pred in qp:
                raise ContractViolation(f"state already contains query atom {a}")
        F = self.omps.interface
        view = self.derive(state)
        dynamic = []
        for a in sorted(view):
            ax = F.image(a)
            if ax is not None:
                dynamic.append(ax)
        o_q = self.omps.static.union(dynamic)
        consistent = self.reasoner.is_consistent(dynamic)
        added = []
        for q in self.omps.queries:
            for cand in self._candidates[q.pred]:
                inds = [F.constants[c] for c in cand]
                if not consistent or all(self.reasoner.entails(ax, dynamic)
                                         for ax in q.instantiate(inds)):
                    added.append(Atom(q.pred, cand))
        return OntologyEnhancedState(state | frozenset(added), o_q, consistent)

    def is_compatible(self, q: OntologyEnhancedState) -> tuple[bool, str]:
        """(True, "") or (False, "Cn: reason") for the first violated condition."""
        omps, F = self.omps, self.interface
        spec = omps.spec
        objs = set(spec.all_objects)
        for a in sorted(q.state):
            if a.pred not in spec.predicates or any(t not in objs for t in a.args):
                return False, f"C1: atom {a} uses undeclared names"
        missing = [ax for ax in omps.static if ax not in q.ontology]
        if missing:
            return False, f"C2: static axiom {missing[0]} missing"
        base = frozenset(a for a in q.state if a.pred not in omps.query_predicates)
        view = self.derive(base)
        required = set(omps.static)
        for a in sorted(view):
            ax = F.image(a)
            if ax is None:
                continue
            if ax not in q.ontology:
                return False, f"C3: fluent {ax} for {a} missing"
            required.add(ax)
        extra = [ax for ax in q.ontology if ax not in required]
        if extra:
            return False, f"C4: axiom {extra[0]} not required"
        dynamic = [ax for ax in q.ontology if ax not in omps.static]
        consistent = self.reasoner.is_consistent(dynamic)
        for qs in omps.queries:
            for cand in self._candidates[qs.pred]:
                inds = [F.constants[c] for c in cand]
                forced = not consistent or all(self.reasoner.entails(ax, dynamic)
                                               for ax in qs.instantiate(inds))
                if forced and Atom(qs.pred, cand) not in q.state:
                    return False, f"C5: query atom {Atom(qs.pred, cand)} missing"
        return True, ""

    @property
    def interface(self) -> FluentInterface:
        return self.omps.interface

    def validate_plan(self, plan: Sequence[GroundAction]) -> "Verdict":
        """Replay under P1-P3. The initial state must be consistent as well."""
        spec = self.omps.spec
        q = self.ext(spec.init)
        if not q.consistent:
            return Verdict(False, 0, "P1", "initial state is inconsistent")
        for i, a in enumerate(plan, 1):
            view = self.derive(q.state)
            if not pddl.eval_formula(a.pre, view):
                return Verdict(False, i, "P2", f"{a} is not applicable")
            q = self.ext(pddl.apply(a, q.strip_queries(self.omps)))
            if not q.consistent:
                return Verdict(False, i, "P2", f"state after {a} is inconsistent")
        if not pddl.eval_formula(spec.goal, self.derive(q.state)):
            return Verdict(False, len(plan), "P3", "goal not satisfied")
        return Verdict(True, len(plan), "", "")


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    step: int
    condition: str
    reason: str

    def __str__(self) -> str:
        if self.accepted:
            return "accept"
        return f"reject at step {self.step} ({self.condition}): {self.reason}"


def ext(state: Iterable[Atom], omps: Omps) -> OntologyEnhancedState:
    return Semantics(omps).ext(state)


def is_compatible(q: OntologyEnhancedState, omps: Omps) -> tuple[bool, str]:
    return Semantics(omps).is_compatible(q)


def validate_plan(omps: Omps, plan: Sequence[GroundAction]) -> Verdict:
    return Semantics(omps).validate_plan(plan)
