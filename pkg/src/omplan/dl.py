"""ALCQ concepts and axioms, the ontology container, and the functional-syntax
reader/writer.

Concepts and axioms are immutable and hashable. Individual positions of an
axiom hold either an individual name (``str``) or a :class:`Var`; the latter
turns an axiom into an axiom pattern.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Union

from omplan.errors import ParseError, UnsupportedConstruct

THING = "owl:Thing"
NOTHING = "owl:Nothing"


# --------------------------------------------------------------------------
# Concepts
# --------------------------------------------------------------------------

class Concept:
    """Base class of the concept syntax tree."""

    __slots__ = ()

    def __str__(self) -> str:
        return concept_to_functional(self)


@dataclass(frozen=True, slots=True)
class Top(Concept):
    pass


@dataclass(frozen=True, slots=True)
class Bottom(Concept):
    pass


TOP = Top()
BOTTOM = Bottom()


@dataclass(frozen=True, slots=True)
class Name(Concept):
    name: str


@dataclass(frozen=True, slots=True)
class Not(Concept):
    operand: Concept


@dataclass(frozen=True, slots=True)
class And(Concept):
    operands: tuple[Concept, ...]


@dataclass(frozen=True, slots=True)
class Or(Concept):
    operands: tuple[Concept, ...]


@dataclass(frozen=True, slots=True)
class Exists(Concept):
    role: str
    filler: Concept


@dataclass(frozen=True, slots=True)
class Forall(Concept):
    role: str
    filler: Concept


@dataclass(frozen=True, slots=True)
class AtLeast(Concept):
    n: int
    role: str
    filler: Concept

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("cardinality bound must be non-negative")


@dataclass(frozen=True, slots=True)
class AtMost(Concept):
    n: int
    role: str
    filler: Concept

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("cardinality bound must be non-negative")


def make_and(parts: Iterable[Concept]) -> Concept:
    """Conjunction with same-connective flattening; 0 parts give TOP, 1 part itself."""
    flat: list[Concept] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.operands)
        else:
            flat.append(p)
    if not flat:
        return TOP
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def make_or(parts: Iterable[Concept]) -> Concept:
    flat: list[Concept] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.operands)
        else:
            flat.append(p)
    if not flat:
        return BOTTOM
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def nnf(c: Concept) -> Concept:
    """Push negation down to concept names."""
    if isinstance(c, (Top, Bottom, Name)):
        return c
    if isinstance(c, Not):
        return _negated_nnf(c.operand)
    if isinstance(c, And):
        return make_and(nnf(p) for p in c.operands)
    if isinstance(c, Or):
        return make_or(nnf(p) for p in c.operands)
    if isinstance(c, Exists):
        return Exists(c.role, nnf(c.filler))
    if isinstance(c, Forall):
        return Forall(c.role, nnf(c.filler))
    if isinstance(c, AtLeast):
        return AtLeast(c.n, c.role, nnf(c.filler))
    if isinstance(c, AtMost):
        return AtMost(c.n, c.role, nnf(c.filler))
    raise TypeError(f"not a concept: {c!r}")


def _negated_nnf(c: Concept) -> Concept:
    if isinstance(c, Top):
        return BOTTOM
    if isinstance(c, Bottom):
        return TOP
    if isinstance(c, Name):
        return Not(c)
    if isinstance(c, Not):
        return nnf(c.operand)
    if isinstance(c, And):
        return make_or(_negated_nnf(p) for p in c.operands)
    if isinstance(c, Or):
        return make_and(_negated_nnf(p) for p in c.operands)
    if isinstance(c, Exists):
        return Forall(c.role, _negated_nnf(c.filler))
    if isinstance(c, Forall):
        return Exists(c.role, _negated_nnf(c.filler))
    if isinstance(c, AtLeast):
        if c.n == 0:
            return BOTTOM
        return AtMost(c.n - 1, c.role, nnf(c.filler))
    if isinstance(c, AtMost):
        return AtLeast(c.n + 1, c.role, nnf(c.filler))
    raise TypeError(f"not a concept: {c!r}")


def concept_names(c: Concept) -> Iterator[str]:
    if isinstance(c, Name):
        yield c.name
    elif isinstance(c, Not):
        yield from concept_names(c.operand)
    elif isinstance(c, (And, Or)):
        for p in c.operands:
            yield from concept_names(p)
    elif isinstance(c, (Exists, Forall, AtLeast, AtMost)):
        yield from concept_names(c.filler)


def role_names(c: Concept) -> Iterator[str]:
    if isinstance(c, Not):
        yield from role_names(c.operand)
    elif isinstance(c, (And, Or)):
        for p in c.operands:
            yield from role_names(p)
    elif isinstance(c, (Exists, Forall, AtLeast, AtMost)):
        yield c.role
        yield from role_names(c.filler)


# --------------------------------------------------------------------------
# Axioms and patterns
# --------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Var:
    """Placeholder for an individual name inside an axiom pattern."""

    name: str

    def __str__(self) -> str:
        return "?" + self.name


Term = Union[str, Var]


class Axiom:
    __slots__ = ()

    def __str__(self) -> str:
        return axiom_to_functional(self)


@dataclass(frozen=True, slots=True)
class SubClassOf(Axiom):
    sub: Concept
    sup: Concept


@dataclass(frozen=True, slots=True)
class EquivalentClasses(Axiom):
    first: Concept
    second: Concept


@dataclass(frozen=True, slots=True)
class ClassAssertion(Axiom):
    concept: Concept
    individual: Term


@dataclass(frozen=True, slots=True)
class RoleAssertion(Axiom):
    role: str
    subject: Term
    object: Term


@dataclass(frozen=True, slots=True)
class NegativeRoleAssertion(Axiom):
    role: str
    subject: Term
    object: Term


@dataclass(frozen=True, slots=True)
class SameIndividual(Axiom):
    first: Term
    second: Term


@dataclass(frozen=True, slots=True)
class DifferentIndividuals(Axiom):
    first: Term
    second: Term


ABOX_TYPES = (ClassAssertion, RoleAssertion, NegativeRoleAssertion,
              SameIndividual, DifferentIndividuals)
TBOX_TYPES = (SubClassOf, EquivalentClasses)


def is_abox(ax: Axiom) -> bool:
    return isinstance(ax, ABOX_TYPES)


def terms_of(ax: Axiom) -> tuple[Term, ...]:
    """Individual positions of an axiom, in argument order."""
    if isinstance(ax, ClassAssertion):
        return (ax.individual,)
    if isinstance(ax, (RoleAssertion, NegativeRoleAssertion)):
        return (ax.subject, ax.object)
    if isinstance(ax, (SameIndividual, DifferentIndividuals)):
        return (ax.first, ax.second)
    return ()


def map_terms(ax: Axiom, fn: Callable[[Term], Term]) -> Axiom:
    if isinstance(ax, ClassAssertion):
        return ClassAssertion(ax.concept, fn(ax.individual))
    if isinstance(ax, RoleAssertion):
        return RoleAssertion(ax.role, fn(ax.subject), fn(ax.object))
    if isinstance(ax, NegativeRoleAssertion):
        return NegativeRoleAssertion(ax.role, fn(ax.subject), fn(ax.object))
    if isinstance(ax, SameIndividual):
        return SameIndividual(fn(ax.first), fn(ax.second))
    if isinstance(ax, DifferentIndividuals):
        return DifferentIndividuals(fn(ax.first), fn(ax.second))
    return ax


def substitute(ax: Axiom, valuation: Mapping[Var, str]) -> Axiom:
    """Replace every variable bound by ``valuation``; unbound variables stay."""
    return map_terms(ax, lambda t: valuation.get(t, t) if isinstance(t, Var) else t)


def variables_of(ax: Axiom) -> list[Var]:
    return [t for t in terms_of(ax) if isinstance(t, Var)]


def individuals_of(ax: Axiom) -> list[str]:
    return [t for t in terms_of(ax) if isinstance(t, str)]


def abstract_individuals(axioms: Iterable[Axiom]) -> tuple[list[Axiom], dict[str, Var]]:
    """Replace every individual by a distinct variable, numbered by first occurrence."""
    mapping: dict[str, Var] = {}

    def rename(t: Term) -> Term:
        if isinstance(t, Var):
            return t
        if t not in mapping:
            mapping[t] = Var(f"v{len(mapping)}")
        return mapping[t]

    patterns = [map_terms(ax, rename) for ax in axioms]
    return patterns, mapping


def negate_concept(c: Concept) -> Concept:
    return c.operand if isinstance(c, Not) else Not(c)


def negate_assertion(ax: Axiom) -> Axiom:
    """Logical complement of an ABox axiom, still in ABox form."""
    if isinstance(ax, ClassAssertion):
        return ClassAssertion(negate_concept(ax.concept), ax.individual)
    if isinstance(ax, RoleAssertion):
        return NegativeRoleAssertion(ax.role, ax.subject, ax.object)
    if isinstance(ax, NegativeRoleAssertion):
        return RoleAssertion(ax.role, ax.subject, ax.object)
    if isinstance(ax, SameIndividual):
        return DifferentIndividuals(ax.first, ax.second)
    if isinstance(ax, DifferentIndividuals):
        return SameIndividual(ax.first, ax.second)
    raise UnsupportedConstruct(f"cannot negate TBox axiom {ax}")


def as_concept_assertion(ax: Axiom) -> ClassAssertion:
    """Concept-assertion form of an ABox axiom.

    Only concept assertions qualify: without nominals, role and equality
    assertions have no equivalent concept assertion in ALCQ.
    """
    if isinstance(ax, ClassAssertion):
        return ax
    if is_abox(ax):
        raise UnsupportedConstruct(
            f"{ax}: requires query as concept assertion (no nominals in ALCQ)")
    raise UnsupportedConstruct(f"cannot express TBox axiom {ax} as an assertion")


def axiom_signature(ax: Axiom) -> tuple[set[str], set[str], set[str]]:
    """(concept names, role names, individual names) used by an axiom."""
    concepts: set[str] = set()
    roles: set[str] = set()
    if isinstance(ax, (SubClassOf, EquivalentClasses)):
        pair = (ax.sub, ax.sup) if isinstance(ax, SubClassOf) else (ax.first, ax.second)
        for c in pair:
            concepts.update(concept_names(c))
            roles.update(role_names(c))
    elif isinstance(ax, ClassAssertion):
        concepts.update(concept_names(ax.concept))
        roles.update(role_names(ax.concept))
    elif isinstance(ax, (RoleAssertion, NegativeRoleAssertion)):
        roles.add(ax.role)
    return concepts, roles, set(individuals_of(ax))


# --------------------------------------------------------------------------
# Ontology
# --------------------------------------------------------------------------

class Ontology:
    """Duplicate-free, insertion-ordered axiom set with a name index.

    Equality is set equality of the axioms.
    """

    def __init__(self, axioms: Iterable[Axiom] = ()):
        self._axioms: dict[Axiom, None] = {}
        self._index: dict[str, list[Axiom]] = {}
        # explicitly declared names (name -> kind), kept for signature checks
        self.declared: dict[str, str] = {}
        for ax in axioms:
            self.add(ax)

    def add(self, ax: Axiom) -> None:
        if ax in self._axioms:
            return
        self._axioms[ax] = None
        c, r, i = axiom_signature(ax)
        for name in c | r | i:
            self._index.setdefault(name, []).append(ax)

    def __iter__(self) -> Iterator[Axiom]:
        return iter(self._axioms)

    def __len__(self) -> int:
        return len(self._axioms)

    def __contains__(self, ax) -> bool:
        return ax in self._axioms

    def __eq__(self, other) -> bool:
        if isinstance(other, Ontology):
            return self._axioms.keys() == other._axioms.keys()
        return NotImplemented

    def __repr__(self) -> str:
        return f"Ontology({len(self)} axioms)"

    def union(self, other: Iterable[Axiom]) -> "Ontology":
        return Ontology([*self, *other])

    def occurrences(self, name: str) -> list[Axiom]:
        return list(self._index.get(name, ()))

    def tbox(self) -> list[Axiom]:
        return [a for a in self if not is_abox(a)]

    def abox(self) -> list[Axiom]:
        return [a for a in self if is_abox(a)]

    def signature(self) -> tuple[set[str], set[str], set[str]]:
        concepts: set[str] = set()
        roles: set[str] = set()
        inds: set[str] = set()
        for ax in self:
            c, r, i = axiom_signature(ax)
            concepts |= c
            roles |= r
            inds |= i
        return concepts, roles, inds

    def individuals(self) -> list[str]:
        seen: dict[str, None] = {}
        for ax in self:
            for t in individuals_of(ax):
                seen.setdefault(t, None)
        return list(seen)


# --------------------------------------------------------------------------
# Functional-syntax writer
# --------------------------------------------------------------------------

def _term(t: Term) -> str:
    return str(t)


def concept_to_functional(c: Concept) -> str:
    if isinstance(c, Top):
        return THING
    if isinstance(c, Bottom):
        return NOTHING
    if isinstance(c, Name):
        return c.name
    if isinstance(c, Not):
        return f"ObjectComplementOf({concept_to_functional(c.operand)})"
    if isinstance(c, And):
        return "ObjectIntersectionOf(" + " ".join(map(concept_to_functional, c.operands)) + ")"
    if isinstance(c, Or):
        return "ObjectUnionOf(" + " ".join(map(concept_to_functional, c.operands)) + ")"
    if isinstance(c, Exists):
        return f"ObjectSomeValuesFrom({c.role} {concept_to_functional(c.filler)})"
    if isinstance(c, Forall):
        return f"ObjectAllValuesFrom({c.role} {concept_to_functional(c.filler)})"
    if isinstance(c, AtLeast):
        return f"ObjectMinCardinality({c.n} {c.role} {concept_to_functional(c.filler)})"
    if isinstance(c, AtMost):
        return f"ObjectMaxCardinality({c.n} {c.role} {concept_to_functional(c.filler)})"
    raise TypeError(f"not a concept: {c!r}")


def axiom_to_functional(ax: Axiom) -> str:
    f = concept_to_functional
    if isinstance(ax, SubClassOf):
        return f"SubClassOf({f(ax.sub)} {f(ax.sup)})"
    if isinstance(ax, EquivalentClasses):
        return f"EquivalentClasses({f(ax.first)} {f(ax.second)})"
    if isinstance(ax, ClassAssertion):
        return f"ClassAssertion({f(ax.concept)} {_term(ax.individual)})"
    if isinstance(ax, RoleAssertion):
        return f"ObjectPropertyAssertion({ax.role} {_term(ax.subject)} {_term(ax.object)})"
    if isinstance(ax, NegativeRoleAssertion):
        return (f"NegativeObjectPropertyAssertion({ax.role} "
                f"{_term(ax.subject)} {_term(ax.object)})")
    if isinstance(ax, SameIndividual):
        return f"SameIndividual({_term(ax.first)} {_term(ax.second)})"
    if isinstance(ax, DifferentIndividuals):
        return f"DifferentIndividuals({_term(ax.first)} {_term(ax.second)})"
    raise TypeError(f"not an axiom: {ax!r}")


_DECLARED_KINDS = {"Class": "concept", "ObjectProperty": "role", "NamedIndividual": "individual"}
_DECLARATION_OF = {v: k for k, v in _DECLARED_KINDS.items()}


def print_ontology(o: Iterable[Axiom]) -> str:
    lines = [f"Declaration({_DECLARATION_OF[kind]}({name}))"
             for name, kind in getattr(o, "declared", {}).items()]
    lines += [axiom_to_functional(ax) for ax in o]
    return "".join(line + "\n" for line in lines)


_DL_PRETTY_BINARY = {And: " ⊓ ", Or: " ⊔ "}


def pretty(c: Concept | Axiom) -> str:
    """Compact DL notation, for humans only (not parseable)."""
    if isinstance(c, Axiom):
        if isinstance(c, SubClassOf):
            return f"{pretty(c.sub)} ⊑ {pretty(c.sup)}"
        if isinstance(c, EquivalentClasses):
            return f"{pretty(c.first)} ≡ {pretty(c.second)}"
        if isinstance(c, ClassAssertion):
            inner = pretty(c.concept)
            if not isinstance(c.concept, (Name, Top, Bottom)):
                inner = f"({inner})"
            return f"{inner}({c.individual})"
        if isinstance(c, RoleAssertion):
            return f"{c.role}({c.subject}, {c.object})"
        if isinstance(c, NegativeRoleAssertion):
            return f"¬{c.role}({c.subject}, {c.object})"
        if isinstance(c, SameIndividual):
            return f"{c.first} = {c.second}"
        return f"{c.first} ≠ {c.second}"
    if isinstance(c, Top):
        return "⊤"
    if isinstance(c, Bottom):
        return "⊥"
    if isinstance(c, Name):
        return c.name
    if isinstance(c, Not):
        inner = pretty(c.operand)
        return f"¬{inner}" if isinstance(c.operand, Name) else f"¬({inner})"
    if isinstance(c, (And, Or)):
        parts = []
        for p in c.operands:
            s = pretty(p)
            parts.append(f"({s})" if isinstance(p, (And, Or)) else s)
        return _DL_PRETTY_BINARY[type(c)].join(parts)
    head = {Exists: "∃", Forall: "∀"}
    if isinstance(c, (Exists, Forall)):
        return f"{head[type(c)]}{c.role}.{_pretty_filler(c.filler)}"
    op = "≥" if isinstance(c, AtLeast) else "≤"
    return f"{op}{c.n} {c.role}.{_pretty_filler(c.filler)}"


def _pretty_filler(c: Concept) -> str:
    s = pretty(c)
    return f"({s})" if isinstance(c, (And, Or)) else s


# --------------------------------------------------------------------------
# Functional-syntax reader
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"\s+|\(|\)|[^\s()]+")


@dataclass(slots=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str, source: str | None) -> list[_Tok]:
    toks: list[_Tok] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        pos = 0
        while pos < len(line):
            m = _TOKEN.match(line, pos)
            tok = m.group(0)
            if not tok.isspace():
                if tok.startswith("#"):
                    break
                toks.append(_Tok(tok, lineno, pos + 1))
            pos = m.end()
    return toks


_CONCEPT_CTORS = {
    "ObjectComplementOf", "ObjectIntersectionOf", "ObjectUnionOf",
    "ObjectSomeValuesFrom", "ObjectAllValuesFrom", "ObjectMinCardinality",
    "ObjectMaxCardinality", "ObjectExactCardinality",
}
_AXIOM_CTORS = {
    "SubClassOf", "EquivalentClasses", "ClassAssertion", "ObjectPropertyAssertion",
    "NegativeObjectPropertyAssertion", "SameIndividual", "DifferentIndividuals",
}
_UNSUPPORTED = {
    "ObjectInverseOf", "ObjectOneOf", "ObjectHasValue", "ObjectHasSelf",
    "DataSomeValuesFrom", "DataAllValuesFrom", "DataHasValue",
    "DataMinCardinality", "DataMaxCardinality", "DataExactCardinality",
    "SubObjectPropertyOf", "EquivalentObjectProperties", "TransitiveObjectProperty",
    "InverseObjectProperties", "ObjectPropertyDomain", "ObjectPropertyRange",
    "FunctionalObjectProperty", "DisjointClasses", "DisjointUnion",
    "DataPropertyAssertion", "SubDataPropertyOf", "HasKey",
}
_RESERVED = _CONCEPT_CTORS | _AXIOM_CTORS | _UNSUPPORTED | {THING, NOTHING}


class _Reader:
    def __init__(self, text: str, source: str | None, allow_variables: bool,
                 kinds: dict[str, str] | None):
        self.toks = _tokenize(text, source)
        self.pos = 0
        self.source = source
        self.allow_variables = allow_variables
        # name -> "concept" | "role" | "individual"
        self.kinds: dict[str, str] = kinds if kinds is not None else {}
        self.declared: dict[str, str] = {}

    # token helpers
    def error(self, msg: str, tok: _Tok | None = None) -> ParseError:
        if tok is None:
            tok = self.toks[self.pos] if self.pos < len(self.toks) else (
                self.toks[-1] if self.toks else None)
        if tok is None:
            return ParseError(msg, source=self.source)
        return ParseError(msg, tok.line, tok.col, self.source)

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def next(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            raise self.error(f"expected '{text}', found '{tok.text}'", tok)
        return tok

    def at_end(self) -> bool:
        return self.pos >= len(self.toks)

    def unsupported(self, tok: _Tok) -> UnsupportedConstruct:
        return UnsupportedConstruct(
            f"{self.source + ':' if self.source else ''}{tok.line}:{tok.col}: "
            f"unsupported construct '{tok.text}'")

    def declare(self, name: str, kind: str, tok: _Tok) -> None:
        seen = self.kinds.get(name)
        if seen is None:
            self.kinds[name] = kind
        elif seen != kind:
            raise self.error(f"name '{name}' used as {kind} but already used as {seen}", tok)

    def atom_name(self, kind: str) -> str:
        tok = self.next()
        if tok.text in ("(", ")"):
            raise self.error(f"expected {kind} name, found '{tok.text}'", tok)
        if tok.text in _UNSUPPORTED:
            raise self.unsupported(tok)
        if tok.text in _RESERVED:
            raise self.error(f"expected {kind} name, found '{tok.text}'", tok)
        if tok.text.startswith("?"):
            raise self.error(f"variable '{tok.text}' not allowed as {kind} name", tok)
        self.declare(tok.text, kind, tok)
        return tok.text

    def role(self) -> str:
        tok = self.peek()
        if tok is not None and tok.text in _UNSUPPORTED:
            raise self.unsupported(tok)
        return self.atom_name("role")

    def term(self) -> Term:
        tok = self.peek()
        if tok is not None and tok.text.startswith("?") and len(tok.text) > 1:
            if not self.allow_variables:
                raise self.error(f"variable '{tok.text}' outside a pattern", tok)
            self.next()
            return Var(tok.text[1:])
        return self.atom_name("individual")

    def cardinality(self) -> int:
        tok = self.next()
        if not tok.text.isdigit():
            raise self.error(f"expected non-negative integer, found '{tok.text}'", tok)
        return int(tok.text)

    # grammar
    def concept(self) -> Concept:
        tok = self.next()
        t = tok.text
        if t == THING:
            return TOP
        if t == NOTHING:
            return BOTTOM
        if t in _UNSUPPORTED:
            raise self.unsupported(tok)
        if t in _CONCEPT_CTORS:
            self.expect("(")
            if t == "ObjectComplementOf":
                c: Concept = Not(self.concept())
            elif t in ("ObjectIntersectionOf", "ObjectUnionOf"):
                parts = [self.concept()]
                while self.peek() is not None and self.peek().text != ")":
                    parts.append(self.concept())
                if len(parts) < 2:
                    raise self.error(f"{t} needs at least two operands", tok)
                c = make_and(parts) if t == "ObjectIntersectionOf" else make_or(parts)
            elif t in ("ObjectSomeValuesFrom", "ObjectAllValuesFrom"):
                r = self.role()
                filler = self.concept()
                c = Exists(r, filler) if t == "ObjectSomeValuesFrom" else Forall(r, filler)
            else:
                n = self.cardinality()
                r = self.role()
                filler: Concept = TOP
                if self.peek() is not None and self.peek().text != ")":
                    filler = self.concept()
                if t == "ObjectMinCardinality":
                    c = AtLeast(n, r, filler)
                elif t == "ObjectMaxCardinality":
                    c = AtMost(n, r, filler)
                else:
                    c = And((AtLeast(n, r, filler), AtMost(n, r, filler)))
            self.expect(")")
            return c
        if t in _AXIOM_CTORS or t in ("(", ")"):
            raise self.error(f"expected concept, found '{t}'", tok)
        self.pos -= 1
        return Name(self.atom_name("concept"))

    def axiom(self) -> list[Axiom]:
        tok = self.next()
        t = tok.text
        if t in _UNSUPPORTED:
            raise self.unsupported(tok)
        if t == "Declaration":
            self.declaration()
            return []
        if t not in _AXIOM_CTORS:
            if t.startswith(("Object", "Data")) or t[:1].isupper() and self.peek() \
                    and self.peek().text == "(":
                raise self.unsupported(tok)
            raise self.error(f"expected axiom, found '{t}'", tok)
        self.expect("(")
        out: list[Axiom]
        if t == "SubClassOf":
            out = [SubClassOf(self.concept(), self.concept())]
        elif t == "EquivalentClasses":
            first = self.concept()
            second = self.concept()
            if self.peek() is not None and self.peek().text != ")":
                raise self.unsupported(tok)
            out = [EquivalentClasses(first, second)]
        elif t == "ClassAssertion":
            c = self.concept()
            out = [ClassAssertion(c, self.term())]
        elif t in ("ObjectPropertyAssertion", "NegativeObjectPropertyAssertion"):
            r = self.role()
            a = self.term()
            b = self.term()
            cls = RoleAssertion if t == "ObjectPropertyAssertion" else NegativeRoleAssertion
            out = [cls(r, a, b)]
        else:
            inds = [self.term(), self.term()]
            while self.peek() is not None and self.peek().text != ")":
                inds.append(self.term())
            cls = SameIndividual if t == "SameIndividual" else DifferentIndividuals
            if cls is SameIndividual:
                out = [cls(inds[i], inds[i + 1]) for i in range(len(inds) - 1)]
            else:
                out = [cls(inds[i], inds[j])
                       for i in range(len(inds)) for j in range(i + 1, len(inds))]
        self.expect(")")
        return out

    def declaration(self) -> None:
        """Record the kind of a declared entity; other declarations are skipped."""
        self.expect("(")
        tok = self.next()
        kind = _DECLARED_KINDS.get(tok.text)
        if kind is None:
            self.pos -= 1
            self.pos -= 1
            self._skip_group()
            return
        self.expect("(")
        name = self.atom_name(kind)
        self.expect(")")
        self.expect(")")
        self.declared.setdefault(name, kind)

    def _skip_group(self) -> None:
        self.expect("(")
        depth = 1
        while depth:
            tok = self.next()
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1


def parse_ontology(text: str, source: str | None = None,
                   allow_variables: bool = False) -> Ontology:
    """Read a functional-syntax document (one axiom per line, ``#`` comments)."""
    r = _Reader(text, source, allow_variables, None)
    o = Ontology()
    while not r.at_end():
        for ax in r.axiom():
            o.add(ax)
    o.declared.update(r.declared)
    return o


def parse_concept(text: str, kinds: dict[str, str] | None = None) -> Concept:
    r = _Reader(text, None, False, kinds)
    c = r.concept()
    if not r.at_end():
        raise r.error(f"trailing input '{r.peek().text}'")
    return c


def parse_axiom(text: str, allow_variables: bool = False,
                kinds: dict[str, str] | None = None) -> Axiom:
    r = _Reader(text, None, allow_variables, kinds)
    out = r.axiom()
    if not r.at_end():
        raise r.error(f"trailing input '{r.peek().text}'")
    if len(out) != 1:
        raise ParseError(f"expected exactly one axiom in '{text}'")
    return out[0]


def name_kinds(o: Iterable[Axiom]) -> dict[str, str]:
    """Map every name in ``o`` to its lexical category."""
    kinds: dict[str, str] = dict(getattr(o, "declared", {}))
    for ax in o:
        c, r, i = axiom_signature(ax)
        for n in c:
            kinds.setdefault(n, "concept")
        for n in r:
            kinds.setdefault(n, "role")
        for n in i:
            kinds.setdefault(n, "individual")
    return kinds
