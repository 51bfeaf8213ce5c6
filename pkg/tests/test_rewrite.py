from importlib.resources import files

import pytest

from omplan import bench, dl, omps, pddl, planner, rewrite
from omplan.dl import ClassAssertion, Name
from omplan.errors import ContractViolation, StaticOntologyInconsistent, ValidationError
from omplan.justify import ALGORITHMS, ExplanationTable
from omplan.omps import Semantics
from omplan.pddl import Atom

from oracles import reachable_states

DATA = files("omplan") / "data"


def bundle(name):
    return omps.load_bundle(DATA / name / "bundle.manifest")


def held(*bs):
    return frozenset(Atom("holds", ("stackBot", b)) for b in bs)


@pytest.fixture(scope="module")
def bw_rew():
    return rewrite.rew(bundle("blocksworld"))


def test_blocksworld_rules(bw_rew):
    r = bw_rew
    assert (r.query_rules, r.inc_disjuncts, r.inc_predicate) == (1, 1, "Inc")
    assert r.provenance["fullHands#0"]["fluent_sets"] == [
        ["(holds stackBot blockA)", "(holds stackBot blockB)"],
        ["(holds stackBot blockA)", "(holds stackBot blockC)"],
        ["(holds stackBot blockB)", "(holds stackBot blockC)"],
    ]
    assert r.provenance["Inc"]["fluent_sets"] == [
        ["(holds stackBot blockA)", "(holds stackBot blockB)", "(holds stackBot blockC)"]]
    guard = pddl.Not(Atom("Inc"))
    for a in r.spec.actions:
        assert guard in a.pre.operands
    assert guard in r.spec.goal.operands
    assert r.spec.predicates["Inc"] == ()


def test_blocksworld_derivations(bw_rew):
    d = pddl.Deriver(pddl.ground_rules(bw_rew.spec))
    fh, inc = Atom("fullHands", ("stackBot",)), Atom("Inc")
    assert fh not in d(held("blockA"))
    assert fh in d(held("blockA", "blockC")) and inc not in d(held("blockA", "blockC"))
    assert inc in d(held("blockA", "blockB", "blockC"))


def test_two_conditions_rules():
    r = rewrite.rew(bundle("two_conditions"))
    assert (r.query_rules, r.inc_disjuncts) == (2, 0)
    assert "Inc" not in r.spec.predicates
    assert [p["fluent_sets"] for k, p in sorted(r.provenance.items())] == [
        [["(isA a)", "(isB a)"]], [["(isA b)", "(isB b)"]]]


def test_output_is_algorithm_independent():
    for name in ("blocksworld", "two_conditions"):
        o = bundle(name)
        outs = {(pddl.print_pddl(r.spec), r.provenance_json())
                for r in (rewrite.rew(o, alg) for alg in ALGORITHMS)}
        assert len(outs) == 1


def test_fresh_inc_name():
    o = bundle("blocksworld")
    spec = pddl.parse_pddl(
        (DATA / "blocksworld" / "domain.pddl").read_text().replace(
            "(fullHands ?r - robot))", "(fullHands ?r - robot) (Inc))"),
        (DATA / "blocksworld" / "problem.pddl").read_text())
    o2 = omps.Omps(spec, o.static, o.interface, o.queries)
    r = rewrite.rew(o2)
    assert r.inc_predicate == "Inc_1" and "Inc_1" in r.spec.predicates


def test_inconsistent_static_ontology_rejected():
    o = bundle("blocksworld")
    bad = o.static.union([ClassAssertion(dl.BOTTOM, "blockA")])
    with pytest.raises(StaticOntologyInconsistent):
        rewrite.rew(omps.Omps(o.spec, bad, o.interface, o.queries))


def test_conjoin_distributes_and_minimises():
    a, b, c = (Atom(p) for p in "abc")
    f = rewrite.DetectFormula(None, frozenset([frozenset([a]), frozenset([b])]))
    g = rewrite.DetectFormula(None, frozenset([frozenset([a]), frozenset([c])]))
    assert rewrite.conjoin([f, g]).disjuncts == {frozenset([a]), frozenset([b, c])}
    assert rewrite.conjoin([]).is_true
    with pytest.raises(ValidationError):
        rewrite.conjoin([f, g], cap=1)


def test_detect_requires_rows():
    o = bundle("blocksworld")
    with pytest.raises(ContractViolation):
        rewrite.detect(ClassAssertion(Name("FullHands"), "stackBot"), ExplanationTable(), o.interface)


def _query_atoms(state, preds):
    return {a for a in state if a.pred in preds}


@pytest.mark.parametrize("make", [
    lambda: bundle("blocksworld"),
    lambda: bundle("two_conditions"),
    lambda: bench.blocksworld_bundle(3, 4).load(),
    lambda: bench.interchangeable_bundle(2).load(),
])
def test_derived_view_matches_semantics(make):
    # on every state reachable without the guard, the compiled rules derive
    # exactly the query atoms and the inconsistency flag of the reference
    o = make()
    sem = Semantics(o)
    r = rewrite.rew(o)
    d = pddl.Deriver(pddl.ground_rules(r.spec))
    qp = o.query_predicates
    for s in sorted(reachable_states(o.spec, 5000), key=sorted):
        ref = sem.ext(s)
        view = d(s)
        assert _query_atoms(view, qp) == _query_atoms(ref.state, qp), s
        assert (Atom(r.inc_predicate) in view) == (not ref.consistent), s


def test_fixture_plans_replay_on_compiled_task():
    for name in ("blocksworld", "two_conditions"):
        o = bundle(name)
        r = rewrite.rew(o)
        plan = [pddl.instantiate(r.spec, n, a)
                for n, a in pddl.parse_plan((DATA / name / "plan.txt").read_text())]
        assert planner.replay(r.spec, plan).accepted
