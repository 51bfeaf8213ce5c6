"""PDDL subset: parsing, printing, grounding, derived predicates and execution.

Supported requirements are ``:strips``, ``:negative-preconditions``,
``:disjunctive-preconditions``, ``:equality``, ``:derived-predicates`` and
``:typing``. Types are compiled into unary predicates at parse time, so a
parsed spec is always untyped. Names are case-sensitive, keywords are not.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from omplan.errors import ContractViolation, ParseError, UnsupportedConstruct, ValidationError

SUPPORTED_REQUIREMENTS = (
    ":strips", ":negative-preconditions", ":disjunctive-preconditions",
    ":equality", ":derived-predicates", ":typing",
)
ROOT_TYPE = "object"


# -- formulas -----------------------------------------------------------------

class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return formula_to_str(self)


@dataclass(frozen=True, order=True, slots=True)
class Atom(Formula):
    pred: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.pred,) + self.args) + ")"


@dataclass(frozen=True, slots=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True, slots=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Or(Formula):
    operands: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Quantified(Formula):
    """``forall``/``exists``; kept in the AST but not evaluated."""
    kind: str
    params: tuple[str, ...]
    body: Formula


TRUE = And(())
FALSE = Or(())


def is_var(t: str) -> bool:
    return t.startswith("?")


def conj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.operands)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.operands)
        else:
            flat.append(p)
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def substitute(f: Formula, sigma: Mapping[str, str]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(sigma.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(sigma.get(f.left, f.left), sigma.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(substitute(f.operand, sigma))
    if isinstance(f, And):
        return And(tuple(substitute(p, sigma) for p in f.operands))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, sigma) for p in f.operands))
    if isinstance(f, Quantified):
        inner = {k: v for k, v in sigma.items() if k not in f.params}
        return Quantified(f.kind, f.params, substitute(f.body, inner))
    raise TypeError(f"not a formula: {f!r}")


def atoms_of(f: Formula, positive: bool = True) -> Iterator[tuple[Atom, bool]]:
    """Atoms of ``f`` with their polarity."""
    if isinstance(f, Atom):
        yield f, positive
    elif isinstance(f, Not):
        yield from atoms_of(f.operand, not positive)
    elif isinstance(f, (And, Or)):
        for p in f.operands:
            yield from atoms_of(p, positive)
    elif isinstance(f, Quantified):
        yield from atoms_of(f.body, positive)


def eval_formula(f: Formula, view) -> bool:
    """Closed-world evaluation of a ground formula over a set of atoms."""
    if isinstance(f, Atom):
        for a in f.args:
            if is_var(a):
                raise ContractViolation(f"unbound variable {a} in {f}")
        return f in view
    if isinstance(f, Not):
        return not eval_formula(f.operand, view)
    if isinstance(f, And):
        return all(eval_formula(p, view) for p in f.operands)
    if isinstance(f, Or):
        return any(eval_formula(p, view) for p in f.operands)
    if isinstance(f, Eq):
        if is_var(f.left) or is_var(f.right):
            raise ContractViolation(f"unbound variable in {f}")
        return f.left == f.right
    if isinstance(f, Quantified):
        raise UnsupportedConstruct(f"quantified formula cannot be evaluated: {f}")
    raise TypeError(f"not a formula: {f!r}")


# -- domain objects -------------------------------------------------------------

@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[str, ...]
    pre: Formula
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: Formula
    add: frozenset
    delete: frozenset
    params: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"

    @property
    def sigma(self) -> dict[str, str]:
        return dict(zip(self.params, self.args))


@dataclass(frozen=True)
class DerivationRule:
    head: Atom
    body: Formula


@dataclass
class PddlSpec:
    domain_name: str
    problem_name: str
    requirements: tuple[str, ...] = ()
    predicates: dict[str, tuple[str, ...]] = field(default_factory=dict)
    constants: tuple[str, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    rules: tuple[DerivationRule, ...] = ()
    objects: tuple[str, ...] = ()
    init: frozenset = frozenset()
    goal: Formula = TRUE

    @property
    def all_objects(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.constants + self.objects))

    @property
    def derived_predicates(self) -> set[str]:
        return {r.head.pred for r in self.rules}

    def action(self, name: str) -> ActionSchema:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)


# -- s-expressions --------------------------------------------------------------

@dataclass
class _Sym:
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return self.text


@dataclass
class _List:
    items: list
    line: int
    col: int


def _read(text: str, source: str) -> list:
    stack: list[_List] = [_List([], 1, 1)]
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "(":
            stack.append(_List([], line, col))
            i += 1
            col += 1
            continue
        if ch == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", line, col, source)
            done = stack.pop()
            stack[-1].items.append(done)
            i += 1
            col += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "();":
            j += 1
        stack[-1].items.append(_Sym(text[i:j], line, col))
        col += j - i
        i = j
    if len(stack) != 1:
        top = stack[-1]
        raise ParseError("unbalanced '('", top.line, top.col, source)
    return stack[0].items


class _Parser:
    def __init__(self, source: str):
        self.source = source

    def fail(self, msg: str, node) -> ParseError:
        return ParseError(msg, getattr(node, "line", None), getattr(node, "col", None), self.source)

    def sym(self, node, what: str = "name") -> str:
        if not isinstance(node, _Sym):
            raise self.fail(f"expected {what}", node)
        return node.text

    def kw(self, node) -> str:
        return self.sym(node, "keyword").lower() if isinstance(node, _Sym) else ""

    def lst(self, node, what: str) -> list:
        if not isinstance(node, _List):
            raise self.fail(f"expected {what}", node)
        return node.items

    def typed_list(self, items: list) -> list[tuple[str, str]]:
        """``a b - t c`` -> [(a, t), (b, t), (c, object)]."""
        out: list[tuple[str, str]] = []
        pending: list[str] = []
        k = 0
        while k < len(items):
            node = items[k]
            if isinstance(node, _Sym) and node.text == "-":
                if k + 1 >= len(items) or not pending:
                    raise self.fail("dangling '-' in typed list", node)
                tnode = items[k + 1]
                if isinstance(tnode, _List):
                    raise UnsupportedConstruct("'either' types are not supported")
                out.extend((p, tnode.text) for p in pending)
                pending = []
                k += 2
                continue
            pending.append(self.sym(node))
            k += 1
        out.extend((p, ROOT_TYPE) for p in pending)
        return out

    def formula(self, node) -> Formula:
        items = self.lst(node, "formula")
        if not items:
            return TRUE
        head = self.kw(items[0])
        if head == "and":
            return And(tuple(self.formula(p) for p in items[1:]))
        if head == "or":
            return Or(tuple(self.formula(p) for p in items[1:]))
        if head == "not":
            if len(items) != 2:
                raise self.fail("'not' takes one argument", node)
            return Not(self.formula(items[1]))
        if head == "imply":
            if len(items) != 3:
                raise self.fail("'imply' takes two arguments", node)
            return Or((Not(self.formula(items[1])), self.formula(items[2])))
        if head == "=":
            if len(items) != 3:
                raise self.fail("'=' takes two arguments", node)
            return Eq(self.sym(items[1]), self.sym(items[2]))
        if head in ("forall", "exists"):
            if len(items) != 3:
                raise self.fail(f"'{head}' takes a parameter list and a body", node)
            params = self.typed_list(self.lst(items[1], "parameter list"))
            body = self.formula(items[2])
            typed = [Atom(t, (v,)) for v, t in params if t != ROOT_TYPE]
            if typed:
                body = conj(typed + [body]) if head == "exists" else \
                    Or(tuple(Not(a) for a in typed) + (body,))
            return Quantified(head, tuple(v for v, _ in params), body)
        if head in ("when", "increase", "decrease", "assign", "scale-up", "scale-down"):
            raise UnsupportedConstruct(f"unsupported PDDL construct '{head}'")
        if head in ("<", ">", "<=", ">="):
            raise UnsupportedConstruct("numeric fluents are not supported")
        return Atom(self.sym(items[0], "predicate"), tuple(self.sym(a, "term") for a in items[1:]))

    def effect(self, node) -> tuple[list[Atom], list[Atom]]:
        items = self.lst(node, "effect")
        if items and self.kw(items[0]) == "and":
            parts = items[1:]
        else:
            parts = [node] if items else []
        add: list[Atom] = []
        delete: list[Atom] = []
        for p in parts:
            pitems = self.lst(p, "effect literal")
            head = self.kw(pitems[0]) if pitems else ""
            if head in ("when", "forall"):
                raise UnsupportedConstruct(f"conditional or quantified effect '{head}' is not supported")
            if head in ("increase", "decrease", "assign", "scale-up", "scale-down"):
                raise UnsupportedConstruct("numeric fluents are not supported")
            f = self.formula(p)
            if isinstance(f, Atom):
                add.append(f)
            elif isinstance(f, Not) and isinstance(f.operand, Atom):
                delete.append(f.operand)
            else:
                raise self.fail("effects must be literals", p)
        return add, delete


def _check_requirements(reqs: list[str], p: _Parser, node) -> None:
    for r in reqs:
        if r not in SUPPORTED_REQUIREMENTS:
            raise UnsupportedConstruct(f"unsupported requirement {r}")


def _type_closure(types: dict[str, str]) -> dict[str, list[str]]:
    """Type -> itself plus its ancestors, excluding the root type."""
    out: dict[str, list[str]] = {}
    for t in types:
        chain, seen, cur = [], set(), t
        while cur != ROOT_TYPE and cur not in seen:
            seen.add(cur)
            chain.append(cur)
            cur = types.get(cur, ROOT_TYPE)
        out[t] = chain
    return out


def parse_pddl(domain_text: str, problem_text: str,
               domain_source: str = "<domain>", problem_source: str = "<problem>") -> PddlSpec:
    dom = _read(domain_text, domain_source)
    prob = _read(problem_text, problem_source)
    p = _Parser(domain_source)
    if len(dom) != 1:
        raise ParseError("expected a single (define ...) form", 1, 1, domain_source)
    items = p.lst(dom[0], "(define ...)")
    if not items or p.kw(items[0]) != "define":
        raise p.fail("expected (define ...)", dom[0])
    header = p.lst(items[1], "(domain <name>)")
    if len(header) != 2 or p.kw(header[0]) != "domain":
        raise p.fail("expected (domain <name>)", items[1])
    domain_name = p.sym(header[1])

    requirements: list[str] = []
    types: dict[str, str] = {}
    constants: list[tuple[str, str]] = []
    predicates: dict[str, tuple[str, ...]] = {}
    pred_types: dict[str, list[str]] = {}
    raw_actions = []
    raw_rules = []
    for section in items[2:]:
        sitems = p.lst(section, "domain section")
        key = p.kw(sitems[0]) if sitems else ""
        if key == ":requirements":
            requirements = [p.kw(r) for r in sitems[1:]]
            _check_requirements(requirements, p, section)
        elif key == ":types":
            for name, parent in p.typed_list(sitems[1:]):
                types[name] = parent
                if parent != ROOT_TYPE and parent not in types:
                    types.setdefault(parent, ROOT_TYPE)
        elif key == ":constants":
            constants.extend(p.typed_list(sitems[1:]))
        elif key == ":predicates":
            for decl in sitems[1:]:
                ditems = p.lst(decl, "predicate declaration")
                name = p.sym(ditems[0], "predicate name")
                params = p.typed_list(ditems[1:])
                if name in predicates:
                    raise p.fail(f"predicate {name} declared twice", decl)
                predicates[name] = tuple(v for v, _ in params)
                pred_types[name] = [t for _, t in params]
        elif key == ":action":
            raw_actions.append(sitems)
        elif key == ":derived":
            raw_rules.append(section)
        elif key in (":functions", ":constraints", ":durative-action"):
            raise UnsupportedConstruct(f"unsupported domain section {key}")
        else:
            raise p.fail(f"unknown domain section {key or '?'}", section)

    types.pop(ROOT_TYPE, None)
    closure = _type_closure(types)
    for t in types:
        if t in predicates:
            raise ValidationError(f"type {t} clashes with a predicate of the same name")
        predicates[t] = ("?x",)

    def type_atoms(params: list[tuple[str, str]], where) -> list[Atom]:
        out = []
        for v, t in params:
            if t == ROOT_TYPE:
                continue
            if t not in types:
                raise p.fail(f"unknown type {t}", where)
            out.append(Atom(t, (v,)))
        return out

    actions: list[ActionSchema] = []
    for sitems in raw_actions:
        name = p.sym(sitems[1], "action name")
        params: list[tuple[str, str]] = []
        pre: Formula = TRUE
        add: list[Atom] = []
        delete: list[Atom] = []
        k = 2
        while k < len(sitems):
            key = p.kw(sitems[k])
            if k + 1 >= len(sitems):
                raise p.fail(f"missing value for {key}", sitems[k])
            val = sitems[k + 1]
            if key == ":parameters":
                params = p.typed_list(p.lst(val, "parameter list"))
            elif key == ":precondition":
                pre = p.formula(val)
            elif key == ":effect":
                add, delete = p.effect(val)
            else:
                raise p.fail(f"unknown action field {key}", sitems[k])
            k += 2
        typed = type_atoms(params, sitems[1])
        if typed:
            pre = conj(typed + ([pre] if pre != TRUE else []))
        actions.append(ActionSchema(name, tuple(v for v, _ in params), pre,
                                    tuple(add), tuple(delete)))

    rules: list[DerivationRule] = []
    for section in raw_rules:
        sitems = section.items
        if len(sitems) != 3:
            raise p.fail("expected (:derived (p ?x...) body)", section)
        hitems = p.lst(sitems[1], "rule head")
        hname = p.sym(hitems[0], "predicate name")
        hparams = p.typed_list(hitems[1:])
        body = p.formula(sitems[2])
        typed = type_atoms([(v, t) for v, t in hparams if is_var(v)], section)
        if typed:
            body = conj(typed + [body])
        rules.append(DerivationRule(Atom(hname, tuple(v for v, _ in hparams)), body))

    # problem
    q = _Parser(problem_source)
    if len(prob) != 1:
        raise ParseError("expected a single (define ...) form", 1, 1, problem_source)
    pitems = q.lst(prob[0], "(define ...)")
    if not pitems or q.kw(pitems[0]) != "define":
        raise q.fail("expected (define ...)", prob[0])
    pheader = q.lst(pitems[1], "(problem <name>)")
    if len(pheader) != 2 or q.kw(pheader[0]) != "problem":
        raise q.fail("expected (problem <name>)", pitems[1])
    problem_name = q.sym(pheader[1])
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    goal: Formula = TRUE
    for section in pitems[2:]:
        sitems = q.lst(section, "problem section")
        key = q.kw(sitems[0]) if sitems else ""
        if key == ":domain":
            if q.sym(sitems[1]) != domain_name:
                raise ValidationError(f"problem refers to domain {sitems[1]}, not {domain_name}")
        elif key == ":requirements":
            _check_requirements([q.kw(r) for r in sitems[1:]], q, section)
        elif key == ":objects":
            objects.extend(q.typed_list(sitems[1:]))
        elif key == ":init":
            for fact in sitems[1:]:
                f = q.formula(fact)
                if not isinstance(f, Atom):
                    if isinstance(f, Eq) or isinstance(f, Not):
                        raise UnsupportedConstruct("only positive atoms are allowed in :init")
                    raise q.fail("expected a ground atom", fact)
                init.append(f)
        elif key == ":goal":
            goal = q.formula(sitems[1])
        elif key == ":metric":
            raise UnsupportedConstruct("metrics are not supported")
        else:
            raise q.fail(f"unknown problem section {key or '?'}", section)

    for name, t in constants + objects:
        if t != ROOT_TYPE and t not in types:
            raise ValidationError(f"unknown type {t} for object {name}")
        for anc in closure.get(t, []):
            init.append(Atom(anc, (name,)))

    reqs = tuple(r for r in dict.fromkeys(requirements) if r != ":typing")
    spec = PddlSpec(
        domain_name=domain_name,
        problem_name=problem_name,
        requirements=reqs,
        predicates=predicates,
        constants=tuple(dict.fromkeys(c for c, _ in constants)),
        actions=tuple(actions),
        rules=tuple(rules),
        objects=tuple(o for o in dict.fromkeys(o for o, _ in objects) if o not in
                      {c for c, _ in constants}),
        init=frozenset(init),
        goal=goal,
    )
    validate_spec(spec)
    return spec


def validate_spec(spec: PddlSpec) -> None:
    """Names declared, arities right, derived predicates only positive in rule
    bodies and never in effects. Raises ValidationError."""
    objs = set(spec.all_objects)
    derived = spec.derived_predicates

    def check(f: Formula, bound: set[str], where: str) -> None:
        if isinstance(f, Quantified):
            check(f.body, bound | set(f.params), where)
            return
        if isinstance(f, Atom):
            if f.pred not in spec.predicates:
                raise ValidationError(f"undeclared predicate {f.pred} in {where}")
            if len(f.args) != len(spec.predicates[f.pred]):
                raise ValidationError(f"arity mismatch for {f.pred} in {where}")
            terms = f.args
        elif isinstance(f, Eq):
            terms = (f.left, f.right)
        elif isinstance(f, Not):
            check(f.operand, bound, where)
            return
        else:
            for op in f.operands:
                check(op, bound, where)
            return
        for t in terms:
            if is_var(t):
                if t not in bound:
                    raise ValidationError(f"unbound variable {t} in {where}")
            elif t not in objs:
                raise ValidationError(f"undeclared constant {t} in {where}")

    for a in spec.actions:
        bound = set(a.params)
        check(a.pre, bound, f"action {a.name}")
        for e in a.add + a.delete:
            check(e, bound, f"effect of {a.name}")
            if e.pred in derived:
                raise ValidationError(f"derived predicate {e.pred} in effect of {a.name}")
    for r in spec.rules:
        check(r.head, set(r.head.args), f"rule head {r.head}")
        check(r.body, {t for t in r.head.args if is_var(t)}, f"rule for {r.head.pred}")
        for atom, positive in atoms_of(r.body):
            if atom.pred in derived and not positive:
                raise ValidationError(
                    f"derived predicate {atom.pred} occurs negatively in a rule for {r.head.pred}")
    for f in spec.init:
        check(f, set(), ":init")
        if f.pred in derived:
            raise ValidationError(f"derived predicate {f.pred} in :init")
    check(spec.goal, set(), ":goal")


# -- grounding and execution ----------------------------------------------------

def _bind_equalities(params: Sequence[str], body: Formula) -> dict[str, str]:
    """Variables fixed by top-level ``(= ?x c)`` conjuncts."""
    fixed: dict[str, str] = {}
    parts = body.operands if isinstance(body, And) else (body,)
    for p in parts:
        if isinstance(p, Eq):
            if is_var(p.left) and not is_var(p.right) and p.left in params:
                fixed.setdefault(p.left, p.right)
            elif is_var(p.right) and not is_var(p.left) and p.right in params:
                fixed.setdefault(p.right, p.left)
    return fixed


def simplify(f: Formula) -> Formula:
    """Fold ground equalities and constant subformulas."""
    if isinstance(f, Eq):
        if not is_var(f.left) and not is_var(f.right):
            return TRUE if f.left == f.right else FALSE
        return f
    if isinstance(f, Not):
        inner = simplify(f.operand)
        if inner == TRUE:
            return FALSE
        if inner == FALSE:
            return TRUE
        return Not(inner)
    if isinstance(f, And):
        parts = []
        for p in f.operands:
            s = simplify(p)
            if s == FALSE:
                return FALSE
            if s != TRUE:
                parts.append(s)
        return conj(parts) if parts else TRUE
    if isinstance(f, Or):
        parts = []
        for p in f.operands:
            s = simplify(p)
            if s == TRUE:
                return TRUE
            if s != FALSE:
                parts.append(s)
        return disj(parts) if parts else FALSE
    return f


def ground(spec: PddlSpec) -> list[GroundAction]:
    """Every substitution of objects for action parameters, in declaration
    order of actions and objects."""
    objs = spec.all_objects
    out: list[GroundAction] = []
    for a in spec.actions:
        for combo in itertools.product(objs, repeat=len(a.params)):
            sigma = dict(zip(a.params, combo))
            out.append(GroundAction(
                a.name, combo, substitute(a.pre, sigma),
                frozenset(substitute(e, sigma) for e in a.add),
                frozenset(substitute(e, sigma) for e in a.delete), a.params))
    return out


def ground_rules(spec: PddlSpec) -> list[DerivationRule]:
    """Ground derivation rules with constant-folded bodies; FALSE bodies dropped."""
    objs = spec.all_objects
    out: list[DerivationRule] = []
    for r in spec.rules:
        vars_ = list(dict.fromkeys(t for t in r.head.args if is_var(t)))
        fixed = _bind_equalities(vars_, r.body)
        free = [v for v in vars_ if v not in fixed]
        for combo in itertools.product(objs, repeat=len(free)):
            sigma = dict(fixed)
            sigma.update(zip(free, combo))
            body = simplify(substitute(r.body, sigma))
            if body == FALSE:
                continue
            out.append(DerivationRule(substitute(r.head, sigma), body))
    return out


class Deriver:
    """Semi-naive least-fixpoint evaluation of ground positive rules."""

    def __init__(self, rules: Sequence[DerivationRule]):
        self.rules = list(rules)
        derived = {r.head.pred for r in self.rules}
        self.static_rules: list[int] = []
        self.by_pred: dict[str, list[int]] = {}
        for k, r in enumerate(self.rules):
            deps = {a.pred for a, _ in atoms_of(r.body) if a.pred in derived}
            if not deps:
                self.static_rules.append(k)
            for d in deps:
                self.by_pred.setdefault(d, []).append(k)
        self.calls = 0

    def __call__(self, state: Iterable[Atom]) -> frozenset:
        self.calls += 1
        view = set(state)
        agenda = self.static_rules if self.by_pred else range(len(self.rules))
        while True:
            fresh = set()
            for k in agenda:
                r = self.rules[k]
                if r.head not in view and eval_formula(r.body, view):
                    fresh.add(r.head)
            fresh -= view
            if not fresh:
                return frozenset(view)
            view |= fresh
            nxt = set()
            for a in fresh:
                nxt.update(self.by_pred.get(a.pred, ()))
            agenda = sorted(nxt)


def derive(state: Iterable[Atom], rules: Sequence[DerivationRule]) -> frozenset:
    """Least fixpoint of ``rules`` over ``state``; non-ground rules are not allowed."""
    return Deriver(rules)(state)


def applicable(ga: GroundAction, state: Iterable[Atom], rules: Sequence[DerivationRule] = ()) -> bool:
    view = derive(state, rules) if rules else state
    return eval_formula(ga.pre, view)


def apply(ga: GroundAction, state: frozenset) -> frozenset:
    """(s minus del) union add."""
    return (frozenset(state) - ga.delete) | ga.add


def strip_derived(state: Iterable[Atom], derived: set[str]) -> frozenset:
    return frozenset(a for a in state if a.pred not in derived)


def parse_plan(text: str, source: str = "<plan>") -> list[tuple[str, tuple[str, ...]]]:
    """One ``(name arg...)`` per line; ``;`` comments and blank lines ignored."""
    out = []
    for node in _read(text, source):
        if not isinstance(node, _List) or not node.items:
            raise ParseError("expected (action args...)", node.line, node.col, source)
        names = []
        for it in node.items:
            if not isinstance(it, _Sym):
                raise ParseError("nested list in plan step", it.line, it.col, source)
            names.append(it.text)
        out.append((names[0], tuple(names[1:])))
    return out


def format_plan(plan: Iterable[GroundAction]) -> str:
    return "".join(str(a) + "\n" for a in plan)


def instantiate(spec: PddlSpec, name: str, args: Sequence[str]) -> GroundAction:
    try:
        a = spec.action(name)
    except KeyError:
        raise ValidationError(f"unknown action {name}") from None
    if len(args) != len(a.params):
        raise ValidationError(f"action {name} takes {len(a.params)} arguments, got {len(args)}")
    objs = set(spec.all_objects)
    for x in args:
        if x not in objs:
            raise ValidationError(f"unknown object {x} in ({name} {' '.join(args)})")
    sigma = dict(zip(a.params, args))
    return GroundAction(name, tuple(args), substitute(a.pre, sigma),
                        frozenset(substitute(e, sigma) for e in a.add),
                        frozenset(substitute(e, sigma) for e in a.delete), a.params)


# -- printing -------------------------------------------------------------------

def formula_to_str(f: Formula) -> str:
    if isinstance(f, Atom):
        return str(f)
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Not):
        return f"(not {formula_to_str(f.operand)})"
    if isinstance(f, And):
        return "(and" + "".join(" " + formula_to_str(p) for p in f.operands) + ")"
    if isinstance(f, Or):
        return "(or" + "".join(" " + formula_to_str(p) for p in f.operands) + ")"
    if isinstance(f, Quantified):
        return f"({f.kind} ({' '.join(f.params)}) {formula_to_str(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _block(f: Formula, indent: str, width: int = 72) -> str:
    """Connectives broken over lines while the inline form is too wide; the
    top level always breaks."""
    if isinstance(f, (And, Or)) and len(f.operands) > 1:
        op = "and" if isinstance(f, And) else "or"
        inner = indent + "  "
        parts = []
        for p in f.operands:
            flat = formula_to_str(p)
            parts.append(flat if len(inner) + len(flat) <= width else _block(p, inner, width))
        return f"({op}\n" + "\n".join(inner + p for p in parts) + ")"
    return formula_to_str(f)


def print_pddl(spec: PddlSpec) -> tuple[str, str]:
    d = [f"(define (domain {spec.domain_name})"]
    if spec.requirements:
        d.append("  (:requirements " + " ".join(spec.requirements) + ")")
    if spec.constants:
        d.append("  (:constants " + " ".join(spec.constants) + ")")
    if spec.predicates:
        d.append("  (:predicates")
        for name, params in spec.predicates.items():
            d.append("    (" + " ".join((name,) + params) + ")")
        d[-1] += ")"
    for r in spec.rules:
        d.append(f"  (:derived {r.head}")
        d.append("    " + _block(r.body, "    ") + ")")
    for a in spec.actions:
        d.append(f"  (:action {a.name}")
        d.append("    :parameters (" + " ".join(a.params) + ")")
        d.append("    :precondition " + _block(a.pre, "    "))
        effects = [formula_to_str(e) for e in a.add] + [f"(not {e})" for e in a.delete]
        d.append("    :effect (and" + "".join(" " + e for e in effects) + "))")
    d.append(")")
    p = [f"(define (problem {spec.problem_name})",
         f"  (:domain {spec.domain_name})"]
    if spec.objects:
        p.append("  (:objects " + " ".join(spec.objects) + ")")
    p.append("  (:init")
    for a in sorted(spec.init):
        p.append(f"    {a}")
    p[-1] += ")"
    p.append("  (:goal " + _block(spec.goal, "  ") + ")")
    p.append(")")
    return "\n".join(d) + "\n", "\n".join(p) + "\n"
