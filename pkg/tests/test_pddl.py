from importlib.resources import files

import pytest
from hypothesis import given, settings, strategies as st

from omplan import pddl
from omplan.errors import ParseError, UnsupportedConstruct, ValidationError
from omplan.pddl import Atom, DerivationRule

DATA = files("omplan") / "data"

DOMAIN = """
(define (domain d)
  (:requirements :strips :negative-preconditions :equality :derived-predicates)
  (:constants home)
  (:predicates (at ?x ?p) (link ?p ?q) (reach ?p ?q) (twoway ?p ?q) (visited ?p))
  (:derived (reach ?p ?q) (link ?p ?q))
  (:derived (twoway ?p ?q) (and (reach ?p ?q) (reach ?q ?p)))
  (:action move
    :parameters (?x ?p ?q)
    :precondition (and (at ?x ?p) (link ?p ?q) (not (= ?p ?q)))
    :effect (and (at ?x ?q) (visited ?q) (not (at ?x ?p)))))
"""
PROBLEM = """
(define (problem p) (:domain d)
  (:objects bot l1 l2)
  ; a comment
  (:init (at bot home) (link home l1) (link l1 l2))
  (:goal (and (at bot l2) (visited l1))))
"""


def bundle_spec(name="blocksworld"):
    return pddl.parse_pddl((DATA / name / "domain.pddl").read_text(),
                           (DATA / name / "problem.pddl").read_text())


@pytest.fixture
def spec():
    return pddl.parse_pddl(DOMAIN, PROBLEM)


def test_parse_structure(spec):
    assert spec.domain_name == "d" and spec.problem_name == "p"
    assert spec.all_objects == ("home", "bot", "l1", "l2")
    assert spec.derived_predicates == {"reach", "twoway"}
    assert Atom("at", ("bot", "home")) in spec.init
    assert [a.name for a in spec.actions] == ["move"]


def test_derived_fixpoint(spec):
    d = pddl.Deriver(pddl.ground_rules(spec))
    view = d(spec.init)
    assert Atom("reach", ("home", "l1")) in view
    assert Atom("twoway", ("home", "l1")) not in view
    view = d(spec.init | {Atom("link", ("l1", "home"))})
    assert Atom("twoway", ("home", "l1")) in view and Atom("twoway", ("l1", "home")) in view


def test_apply_deletes_then_adds(spec):
    ga = pddl.instantiate(spec, "move", ("bot", "home", "l1"))
    assert pddl.applicable(ga, spec.init)
    s = pddl.apply(ga, spec.init)
    assert Atom("at", ("bot", "l1")) in s and Atom("at", ("bot", "home")) not in s
    v = frozenset([Atom("visited", ("l1",))])
    same = pddl.GroundAction("x", (), pddl.TRUE, v, v)
    assert Atom("visited", ("l1",)) in pddl.apply(same, frozenset())


def test_equality_precondition(spec):
    ga = pddl.instantiate(spec, "move", ("bot", "home", "home"))
    view = spec.init | {Atom("link", ("home", "home"))}
    assert not pddl.eval_formula(ga.pre, view)


def test_grounding_covers_all_substitutions(spec):
    assert len(pddl.ground(spec)) == len(spec.all_objects) ** 3


def test_typing_compiles_to_unary_predicates():
    s = bundle_spec()
    assert ":typing" not in s.requirements
    assert {"robot", "block"} <= set(s.predicates)
    assert Atom("robot", ("stackBot",)) in s.init
    assert Atom("block", ("blockA",)) in s.init
    pick = pddl.instantiate(s, "pickup", ("blockA", "blockC"))
    assert not pddl.eval_formula(pick.pre, s.init)


def test_print_round_trip():
    for s in (bundle_spec(), bundle_spec("two_conditions"), pddl.parse_pddl(DOMAIN, PROBLEM)):
        d, p = pddl.print_pddl(s)
        again = pddl.parse_pddl(d, p)
        assert again == s
        assert pddl.print_pddl(again) == (d, p)


def test_plan_io(spec):
    plan = pddl.parse_plan("; header\n(move bot home l1)\n(move bot l1 l2)\n")
    assert plan == [("move", ("bot", "home", "l1")), ("move", ("bot", "l1", "l2"))]
    steps = [pddl.instantiate(spec, n, a) for n, a in plan]
    assert pddl.format_plan(steps) == "(move bot home l1)\n(move bot l1 l2)\n"
    with pytest.raises(ValidationError):
        pddl.instantiate(spec, "fly", ())
    with pytest.raises(ValidationError):
        pddl.instantiate(spec, "move", ("bot",))


@pytest.mark.parametrize("domain, exc", [
    (DOMAIN.replace("(not (at ?x ?p))", "(when (at ?x ?p) (not (at ?x ?p)))"), UnsupportedConstruct),
    (DOMAIN.replace(":precondition (and", ":precondition (and (> (fuel) 1)"), (UnsupportedConstruct, ParseError)),
    (DOMAIN.replace("(visited ?q)", "(reach ?q ?q)"), ValidationError),
    (DOMAIN.replace("(link ?p ?q) (not", "(link ?p) (not"), ValidationError),
    (DOMAIN.replace("(at ?x ?q) (visited", "(at ?y ?q) (visited"), ValidationError),
    (DOMAIN.replace("(and (reach ?p ?q) (reach ?q ?p))", "(and (reach ?p ?q) (not (reach ?q ?p)))"),
     ValidationError),
    (DOMAIN.replace("(and (reach ?p ?q) (reach ?q ?p))", "(and (reach ?p ?r) (reach ?r ?q))"),
     ValidationError),
    (DOMAIN.replace("(:constants home)", "(:constants home"), ParseError),
])
def test_rejections(domain, exc):
    with pytest.raises(exc):
        pddl.parse_pddl(domain, PROBLEM)


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        pddl.parse_pddl(DOMAIN, PROBLEM.replace("(:goal", ")(:goal"))
    assert e.value.line is not None


def test_derived_in_init_rejected():
    with pytest.raises(ValidationError):
        pddl.parse_pddl(DOMAIN, PROBLEM.replace("(at bot home)", "(at bot home) (reach l1 l2)"))


def test_simplify_constants():
    a = Atom("p", ("x",))
    assert pddl.simplify(pddl.And((a, pddl.TRUE))) == a
    assert pddl.simplify(pddl.Or((a, pddl.TRUE))) == pddl.TRUE
    assert pddl.simplify(pddl.And((a, pddl.FALSE))) == pddl.FALSE
    assert pddl.simplify(pddl.Not(pddl.FALSE)) == pddl.TRUE
    assert pddl.simplify(pddl.Eq("a", "a")) == pddl.TRUE
    assert pddl.simplify(pddl.Eq("a", "b")) == pddl.FALSE


def test_guarded_rules_ground_only_their_candidate():
    r = DerivationRule(Atom("q", ("?x",)), pddl.conj([pddl.Eq("?x", "a"), Atom("p", ("?x",))]))
    s = pddl.PddlSpec("d", "p", predicates={"p": ("?x",), "q": ("?x",)}, rules=(r,),
                      objects=("a", "b", "c"))
    assert pddl.ground_rules(s) == [DerivationRule(Atom("q", ("a",)), Atom("p", ("a",)))]


# naive fixpoint as reference for the semi-naive evaluator
def _naive(state, rules):
    view = set(state)
    while True:
        new = {r.head for r in rules if pddl.eval_formula(r.body, view)} - view
        if not new:
            return frozenset(view)
        view |= new


nodes = st.sampled_from("abcd")
facts = st.sets(st.tuples(nodes, nodes), max_size=8)


@settings(max_examples=60)
@given(facts, st.sets(nodes, max_size=2))
def test_semi_naive_matches_naive(edges, marked):
    rules = []
    for x in "abcd":
        rules.append(DerivationRule(Atom("good", (x,)), Atom("mark", (x,))))
        for y in "abcd":
            rules.append(DerivationRule(Atom("good", (x,)),
                                        pddl.conj([Atom("e", (x, y)), Atom("good", (y,))])))
            rules.append(DerivationRule(Atom("bad", (x, y)),
                                        pddl.conj([Atom("e", (x, y)), pddl.Not(Atom("mark", (y,)))])))
    state = {Atom("e", e) for e in edges} | {Atom("mark", (m,)) for m in marked}
    assert pddl.Deriver(rules)(state) == _naive(state, rules)
