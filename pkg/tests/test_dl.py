import pytest
from hypothesis import given, settings, strategies as st

from omplan import dl
from omplan.dl import (
    And, AtLeast, AtMost, ClassAssertion, DifferentIndividuals, Exists, Forall, Name,
    NegativeRoleAssertion, Not, Or, RoleAssertion, SameIndividual, SubClassOf, Var,
)
from omplan.errors import ParseError, UnsupportedConstruct

from oracles import has_model

names = st.sampled_from([Name("A"), Name("B"), Name("C")])
roles = st.sampled_from(["r", "s"])


def _extend(inner):
    return st.one_of(
        inner.map(Not),
        st.lists(inner, min_size=2, max_size=3).map(dl.make_and),
        st.lists(inner, min_size=2, max_size=3).map(dl.make_or),
        st.tuples(roles, inner).map(lambda t: Exists(*t)),
        st.tuples(roles, inner).map(lambda t: Forall(*t)),
        st.tuples(st.integers(0, 2), roles, inner).map(lambda t: AtLeast(*t)),
        st.tuples(st.integers(0, 2), roles, inner).map(lambda t: AtMost(*t)),
    )


concepts = st.recursive(st.one_of(names, st.just(dl.TOP), st.just(dl.BOTTOM)), _extend, max_leaves=6)


def _is_nnf(c) -> bool:
    if isinstance(c, Not):
        return isinstance(c.operand, Name)
    if isinstance(c, (And, Or)):
        return all(_is_nnf(p) for p in c.operands)
    if isinstance(c, (Exists, Forall, AtLeast, AtMost)):
        return _is_nnf(c.filler)
    return True


@given(concepts)
def test_nnf_shape_and_idempotence(c):
    n = dl.nnf(c)
    assert _is_nnf(n)
    assert dl.nnf(n) == n


@settings(max_examples=40, deadline=None)
@given(concepts)
def test_nnf_preserves_meaning(c):
    # c and nnf(c) never disagree on an element of a small model
    n = dl.nnf(c)
    for size in (1, 2):
        assert not has_model([ClassAssertion(And((c, Not(n))), "a")], size)
        assert not has_model([ClassAssertion(And((Not(c), n)), "a")], size)


@given(concepts)
def test_functional_round_trip(c):
    ax = ClassAssertion(c, "a")
    assert dl.parse_axiom(dl.axiom_to_functional(ax)) == ax


def test_parse_document_with_comments_and_declarations():
    o = dl.parse_ontology("""
        # header comment
        Declaration(Class(Robot))
        Declaration(NamedIndividual(x))
        SubClassOf(PR2 ObjectIntersectionOf(Robot ObjectMaxCardinality(2 holds Block)))
        ObjectPropertyAssertion(holds r b)
        NegativeObjectPropertyAssertion(holds r c)
        SameIndividual(b d)
        DifferentIndividuals(b c)
    """)
    assert len(o) == 5
    assert o.declared == {"Robot": "concept", "x": "individual"}
    kinds = dl.name_kinds(o)
    assert kinds["holds"] == "role" and kinds["PR2"] == "concept" and kinds["x"] == "individual"
    assert dl.parse_ontology(dl.print_ontology(o)) == o


def test_exact_cardinality_expands_to_bounds():
    c = dl.parse_concept("ObjectExactCardinality(2 holds Block)")
    assert c == And((AtLeast(2, "holds", Name("Block")), AtMost(2, "holds", Name("Block"))))


@pytest.mark.parametrize("text", [
    "SubClassOf(A ObjectOneOf(a))",
    "ObjectPropertyDomain(r A)",
    "SubClassOf(A ObjectSomeValuesFrom(ObjectInverseOf(r) B))",
])
def test_unsupported_constructs_rejected(text):
    with pytest.raises(UnsupportedConstruct):
        dl.parse_ontology(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        dl.parse_ontology("SubClassOf(A B)\nSubClassOf(A")
    assert e.value.line == 2


def test_negate_assertion_is_an_involution():
    for ax in [ClassAssertion(Name("A"), "a"), RoleAssertion("r", "a", "b"),
               NegativeRoleAssertion("r", "a", "b"), SameIndividual("a", "b"),
               DifferentIndividuals("a", "b")]:
        assert dl.negate_assertion(dl.negate_assertion(ax)) == ax
    with pytest.raises(UnsupportedConstruct):
        dl.negate_assertion(SubClassOf(Name("A"), Name("B")))


def test_abstract_and_substitute():
    axs = [ClassAssertion(Name("A"), "a"), RoleAssertion("r", "a", "b")]
    pats, val = dl.abstract_individuals(axs)
    assert all(isinstance(t, Var) for p in pats for t in dl.terms_of(p))
    back = {v: k for k, v in val.items()}
    assert [dl.substitute(p, back) for p in pats] == axs


def test_ontology_is_a_set():
    a = ClassAssertion(Name("A"), "a")
    o = dl.Ontology([a, a, SubClassOf(Name("A"), Name("B"))])
    assert len(o) == 2
    assert o == dl.Ontology(reversed(list(o)))
    assert o.occurrences("a") == [a]
    assert o.individuals() == ["a"]
