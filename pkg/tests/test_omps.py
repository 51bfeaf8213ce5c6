from importlib.resources import files

import pytest

from omplan import dl, omps, pddl
from omplan.dl import ClassAssertion, Name, RoleAssertion
from omplan.errors import ContractViolation, ParseError, ValidationError
from omplan.omps import FluentInterface, Semantics
from omplan.pddl import Atom

DATA = files("omplan") / "data"


def bundle(name):
    return omps.load_bundle(DATA / name / "bundle.manifest")


@pytest.fixture(scope="module")
def bw():
    return bundle("blocksworld")


@pytest.fixture(scope="module")
def bw_sem(bw):
    return Semantics(bw)


def steps(o, text):
    return [pddl.instantiate(o.spec, n, a) for n, a in pddl.parse_plan(text)]


def test_interface_parse():
    F, Q = omps.parse_interface(
        "# mapping\nobject r1 -> robo\nfluent holds -> holds\nfluent free -> not holds\n"
        "fluent isA -> A\nquery both(x: A, y: owl:Thing) <- { holds(x, y); B(y); x != y }\n")
    assert F.constants == {"r1": "robo"}
    assert F.predicates["free"] == ("not-role", "holds")
    assert F.predicates["isA"] == ("", "A")
    (q,) = Q
    assert q.variables == ("x", "y")
    assert q.instantiate(["a", "b"]) == [RoleAssertion("holds", "a", "b"),
                                         ClassAssertion(Name("B"), "b"),
                                         dl.DifferentIndividuals("a", "b")]


@pytest.mark.parametrize("text, exc", [
    ("object a -> x\nobject a -> y", ValidationError),
    ("object a -> x\nobject b -> x", ValidationError),
    ("fluent p -> A\nfluent q -> A", ValidationError),
    ("query q(x) <- { A(x) }", ParseError),
    ("query q(x: A) <- { A(y) }", ValidationError),
    ("query q(x: A) <- { not A(x) }", ValidationError),
    ("query q(x: A) <- { SubClassOf(A B) }", ValidationError),
    ("query q(x: A, x: B) <- { A(x) }", ValidationError),
    ("mapping p to A", ParseError),
])
def test_interface_errors(text, exc):
    with pytest.raises(exc):
        omps.parse_interface(text)


def test_interface_checked_against_signature():
    kinds = {"A": "concept", "r": "role", "a": "individual"}
    omps.parse_interface("object c -> a\nfluent p -> A\nfluent q -> not r", kinds)
    for bad in ("object c -> A", "fluent p -> Missing", "fluent p -> not A",
                "query q(x: A) <- { r(x) }"):
        with pytest.raises(ValidationError):
            omps.parse_interface(bad, kinds)


def test_image_and_preimage():
    F = FluentInterface({"on": ("role", "r"), "off": ("not-role", "s"), "isA": ("concept", "A")},
                        {"c": "ic", "d": "id"})
    for atom, ax in [(Atom("on", ("c", "d")), RoleAssertion("r", "ic", "id")),
                     (Atom("off", ("c", "d")), dl.NegativeRoleAssertion("s", "ic", "id")),
                     (Atom("isA", ("d",)), ClassAssertion(Name("A"), "id"))]:
        assert F.image(atom) == ax
        assert F.preimage(ax) == atom
    assert F.image(Atom("on", ("c", "e"))) is None
    assert F.image(Atom("other", ("c",))) is None
    with pytest.raises(ContractViolation):
        F.preimage(ClassAssertion(Name("B"), "ic"))


def test_bundle_validation(bw):
    assert bw.query_predicates == {"fullHands"}
    assert len(omps.fluents_of(bw)) == 16
    text = (DATA / "blocksworld" / "mapping.iface").read_text()
    onto = bw.static
    for bad in (text + "fluent nowhere -> holds2\n",
                text.replace("object blockC -> blockC", "object blockD -> blockC"),
                text.replace("fluent holds -> holds", "fluent onTable -> holds")):
        with pytest.raises(ValidationError):
            omps.load_omps(bw.spec, onto, bad)
    # a query predicate may not be touched by actions
    with pytest.raises(ValidationError):
        omps.load_omps(bw.spec, onto, text.replace("query fullHands", "query clear"))


def test_fluent_in_static_ontology_rejected(bw):
    onto = dl.Ontology(list(bw.static) + [RoleAssertion("holds", "stackBot", "blockA")])
    with pytest.raises(ValidationError):
        omps.load_omps(bw.spec, onto, (DATA / "blocksworld" / "mapping.iface").read_text())


def test_candidates_use_static_types(bw, bw_sem):
    (q,) = bw.queries
    assert bw_sem.candidates(q) == [("stackBot",)]
    e2 = bundle("two_conditions")
    assert omps.candidates(e2.queries[0], e2) == [("a",), ("b",)]


def test_ext_adds_forced_query_atoms(bw, bw_sem):
    s = bw.spec.init | {Atom("holds", ("stackBot", "blockA")), Atom("holds", ("stackBot", "blockC"))}
    q = bw_sem.ext(s)
    assert q.consistent
    assert Atom("fullHands", ("stackBot",)) in q.state
    assert RoleAssertion("holds", "stackBot", "blockA") in q.ontology
    assert bw_sem.is_compatible(q) == (True, "")
    q1 = bw_sem.ext(bw.spec.init)
    assert Atom("fullHands", ("stackBot",)) not in q1.state
    with pytest.raises(ContractViolation):
        bw_sem.ext(q.state)


def test_inconsistent_state_gets_every_query_atom(bw, bw_sem):
    s = bw.spec.init | {Atom("holds", ("stackBot", b)) for b in ("blockA", "blockB", "blockC")}
    q = bw_sem.ext(s)
    assert not q.consistent
    assert Atom("fullHands", ("stackBot",)) in q.state


def _without(o, ax):
    return dl.Ontology(a for a in o if a != ax)


def test_compatibility_conditions(bw, bw_sem):
    held = Atom("holds", ("stackBot", "blockA"))
    good = bw_sem.ext(bw.spec.init | {held, Atom("holds", ("stackBot", "blockB"))})
    fh = Atom("fullHands", ("stackBot",))
    cases = {
        "C1": omps.OntologyEnhancedState(good.state | {Atom("on", ("blockA", "nowhere"))}, good.ontology),
        "C2": omps.OntologyEnhancedState(good.state, _without(
            good.ontology, ClassAssertion(Name("Block"), "blockA"))),
        "C3": omps.OntologyEnhancedState(good.state, _without(
            good.ontology, RoleAssertion("holds", "stackBot", "blockA"))),
        "C4": omps.OntologyEnhancedState(good.state, good.ontology.union(
            [RoleAssertion("holds", "stackBot", "blockC")])),
        "C5": omps.OntologyEnhancedState(good.state - {fh}, good.ontology),
    }
    for cond, q in cases.items():
        ok, why = bw_sem.is_compatible(q)
        assert not ok and why.startswith(cond + ":"), (cond, why)


def test_fixture_plan_accepted(bw, bw_sem):
    plan = steps(bw, (DATA / "blocksworld" / "plan.txt").read_text())
    v = bw_sem.validate_plan(plan)
    assert v.accepted and str(v) == "accept"


def test_third_pickup_rejected(bw, bw_sem):
    plan = steps(bw, "(unstack stackBot blockB blockA)\n(pickup stackBot blockA)\n"
                     "(pickup stackBot blockC)\n")
    v = bw_sem.validate_plan(plan)
    assert (v.accepted, v.step, v.condition) == (False, 3, "P2")
    assert "inconsistent" in v.reason


def test_inapplicable_step_rejected(bw, bw_sem):
    v = bw_sem.validate_plan(steps(bw, "(pickup stackBot blockA)\n"))
    assert (v.accepted, v.step, v.condition) == (False, 1, "P2")


def test_goal_failures(bw, bw_sem):
    assert bw_sem.validate_plan([]).condition == "P3"
    v = bw_sem.validate_plan(steps(bw, "(unstack stackBot blockB blockA)\n"))
    assert (v.accepted, v.step, v.condition) == (False, 1, "P3")


def test_two_conditions_query_goal(tmp_path):
    e2 = bundle("two_conditions")
    sem = Semantics(e2)
    plan = steps(e2, (DATA / "two_conditions" / "plan.txt").read_text())
    assert sem.validate_plan(plan).accepted
    assert not sem.validate_plan(plan[:3]).accepted
    assert omps.validate_plan(e2, plan).accepted


def test_manifest_errors(tmp_path):
    m = tmp_path / "b.manifest"
    m.write_text("domain = d.pddl\n")
    with pytest.raises(ValidationError):
        omps.read_manifest(m)
    m.write_text("domain d.pddl\n")
    with pytest.raises(ParseError):
        omps.read_manifest(m)
