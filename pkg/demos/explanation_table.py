"""
Explanation tables and the cost of computing them
=================================================

Two individuals, each C exactly when it is both A and B. The three
algorithms return the same table; the counters show what each one paid.
"""

from omplan import dl
from omplan.justify import ALGORITHMS, JustifyConfig, explain

static = [dl.parse_axiom("SubClassOf(ObjectIntersectionOf(A B) C)")]
fluents = [dl.parse_axiom(f"ClassAssertion({c} {i})") for i in "ab" for c in "AB"]
queries = [dl.parse_axiom("ClassAssertion(C a)"), dl.parse_axiom("ClassAssertion(C b)")]

for alg in ALGORITHMS:
    table, stats = explain(static, fluents, queries, alg)
    print(alg, stats.as_dict())
print(table.to_csv())

# marker pruning keeps the hitting-set tree small
for pruning in (True, False):
    _, stats = explain(static, fluents, queries, "concept", JustifyConfig(marker_pruning=pruning))
    print("pruning" if pruning else "no pruning", stats.hst_nodes, "nodes")
