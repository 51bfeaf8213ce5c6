"""Justification search: SingleJust plus hitting-set-tree enumeration.

Three routes produce the same :class:`ExplanationTable`:

* ``basic``   - one tree for inconsistency and one per query (with the negated
  query added as a background axiom);
* ``concept`` - one tree per query concept ``C``, marking the queried
  individuals with a fresh concept ``A_C`` disjoint from ``C``;
* ``schema``  - the concept route where every justification found is lifted to
  a pattern set and its renamings are added to the reuse store.

Row semantics. Inconsistency rows are the minimal fluent sets ``F`` with
``O_s + F`` inconsistent. Query rows for ``q`` are the minimal fluent sets
``F`` with ``O_s + F`` consistent and entailing ``q``. Together (after an
antichain filter) they are exactly the minimal fluent sets entailing ``q``.
"""
from __future__ import annotations

import csv
import io
import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable, Iterable, Mapping, Sequence

from omplan import dl
from omplan.dl import Axiom, ClassAssertion, Concept, Ontology, SubClassOf, Var
from omplan.errors import ContractViolation, NoJustification
from omplan.reasoner import DEFAULT_NODE_BUDGET, ReasonerHandle

Row = frozenset  # frozenset[Axiom]
INC = "Inc"


def antichain(sets: Iterable[frozenset]) -> set[frozenset]:
    """Subset-minimal members of a family of sets."""
    out: list[frozenset] = []
    for s in sorted(set(sets), key=len):
        if not any(t <= s for t in out):
            out.append(s)
    return set(out)


def _sort_key(s: frozenset) -> tuple:
    return (len(s), sorted(str(a) for a in s))


@dataclass
class JustifyStats:
    consistency_calls: int = 0
    single_just_calls: int = 0
    hst_nodes: int = 0
    reused: int = 0
    instantiations: int = 0

    def add(self, other: "JustifyStats") -> None:
        for k, v in asdict(other).items():
            setattr(self, k, getattr(self, k) + v)

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExplanationTable:
    """Query rows per query axiom plus inconsistency rows.

    Every query passed to the producing route is a key of ``queries``, possibly
    with no rows.
    """

    queries: dict[Axiom, set[frozenset]] = field(default_factory=dict)
    inconsistent: set[frozenset] = field(default_factory=set)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExplanationTable):
            return NotImplemented
        return self.queries == other.queries and self.inconsistent == other.inconsistent

    def rows(self) -> list[tuple[str, frozenset]]:
        """All rows as (query string or "Inc", fluent set), canonically ordered."""
        out = [(INC, s) for s in sorted(self.inconsistent, key=_sort_key)]
        for q in sorted(self.queries, key=str):
            out.extend((str(q), s) for s in sorted(self.queries[q], key=_sort_key))
        return out

    def entailing_sets(self, q: Axiom) -> set[frozenset]:
        """Minimal fluent sets entailing ``q`` (query rows plus inconsistency rows)."""
        return antichain(self.queries.get(q, set()) | self.inconsistent)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query", "fluents"])
        for q, s in self.rows():
            w.writerow([q, ";".join(sorted(str(a) for a in s))])
        return buf.getvalue()

    def merge(self, other: "ExplanationTable") -> None:
        for q, rows in other.queries.items():
            self.queries.setdefault(q, set()).update(rows)
        self.inconsistent |= other.inconsistent


def finalize(queries: Mapping[Axiom, Iterable[frozenset]],
             inconsistent: Iterable[frozenset]) -> ExplanationTable:
    """Minimize raw rows into a table; query rows above an inconsistency row are dropped."""
    inc = antichain(inconsistent)
    table = ExplanationTable(inconsistent=inc)
    for q, rows in queries.items():
        keep = [r for r in rows if not any(i <= r for i in inc)]
        table.queries[q] = antichain(keep)
    return table


# --------------------------------------------------------------------------
# SingleJust
# --------------------------------------------------------------------------

def _single_just(axioms: Sequence[Axiom], reasoner: ReasonerHandle,
                 branch: frozenset | set = frozenset()) -> frozenset | None:
    """Expand/shrink justification search; None if ``axioms`` is consistent."""
    if reasoner.is_consistent(axioms):
        return None
    n = 1
    while n < len(axioms) and reasoner.is_consistent(axioms[:n]):
        n *= 2
    core = list(axioms[:n])
    position = {a: i for i, a in enumerate(core)}
    order = ([a for a in reversed(core) if a in branch]
             + [a for a in reversed(core) if a not in branch])
    w = max(1, len(order) // 2)
    while True:
        i = 0
        while i < len(order):
            chunk = set(order[i:i + w])
            rest = [a for a in order if a not in chunk]
            if rest and not reasoner.is_consistent(sorted(rest, key=position.__getitem__)):
                order = rest
            else:
                i += w
        if w == 1:
            break
        w = max(1, w // 2)
    return frozenset(order)


def single_just(axioms: Iterable[Axiom], reasoner: ReasonerHandle | None = None,
                branch: Iterable[Axiom] = ()) -> frozenset:
    """One justification (minimal inconsistent subset) of ``axioms``.

    ``branch`` axioms are tried for removal first, each group in reverse
    insertion order.
    """
    axioms = list(dict.fromkeys(axioms))
    h = reasoner if reasoner is not None else ReasonerHandle()
    j = _single_just(axioms, h, frozenset(branch))
    if j is None:
        raise NoJustification("axiom set is consistent: no justification exists")
    return j


# --------------------------------------------------------------------------
# Hitting-set tree
# --------------------------------------------------------------------------

@dataclass
class HstNode:
    path: frozenset
    justification: frozenset | None
    children: list[tuple[frozenset, "HstNode"]] = field(default_factory=list)


class _Store:
    """Insertion-ordered justification set with first-match lookup."""

    def __init__(self, seed: Iterable[frozenset] = ()):
        self._items: dict[frozenset, None] = {}
        self._lock = threading.Lock()
        for j in seed:
            self._items[j] = None

    def add(self, j: frozenset) -> bool:
        with self._lock:
            if j in self._items:
                return False
            self._items[j] = None
            return True

    def __contains__(self, j) -> bool:
        return j in self._items

    def find(self, path: frozenset) -> frozenset | None:
        with self._lock:
            items = list(self._items)
        for j in items:
            if not (j & path):
                return j
        return None

    def all(self) -> list[frozenset]:
        with self._lock:
            return list(self._items)


Successors = Callable[[frozenset], list[frozenset]]


class _Hst:
    def __init__(self, axioms: Sequence[Axiom], branch: Sequence[Axiom],
                 successors: Successors, store: _Store, make_reasoner,
                 path_pruning: bool, on_found: Callable | None,
                 stats: JustifyStats, keep_tree: bool = False, debug: bool = False):
        self.axioms = list(axioms)
        self.branch = frozenset(branch)
        self.successors = successors
        self.store = store
        self.make_reasoner = make_reasoner
        self.path_pruning = path_pruning
        self.on_found = on_found
        self.stats = stats
        self.keep_tree = keep_tree
        self.debug = debug
        self.closed: list[frozenset] = []
        self.seen: set[frozenset] = set()
        self._lock = threading.Lock()
        self.root: HstNode | None = None

    def _admit(self, path: frozenset) -> bool:
        if not self.path_pruning:
            return True
        with self._lock:
            if path in self.seen or any(c <= path for c in self.closed):
                return False
            self.seen.add(path)
            return True

    def _label(self, path: frozenset, reasoner: ReasonerHandle, stats: JustifyStats):
        j = self.store.find(path)
        if j is not None:
            stats.reused += 1
            return j
        remaining = [a for a in self.axioms if a not in path]
        stats.single_just_calls += 1
        j = _single_just(remaining, reasoner, self.branch)
        if j is None:
            with self._lock:
                self.closed.append(path)
            return None
        if self.store.add(j) and self.on_found is not None:
            self.on_found(j, reasoner, stats, self.store)
        return j

    def _visit(self, path: frozenset, reasoner, stats) -> HstNode | None:
        if not self._admit(path):
            return None
        stats.hst_nodes += 1
        j = self._label(path, reasoner, stats)
        node = HstNode(path, j) if self.keep_tree else None
        if j is None:
            return node
        if self.debug and j & path:
            raise ContractViolation("hitting-set node label intersects its path")
        for b in self.successors(j):
            child = self._visit(path | b, reasoner, stats)
            if node is not None and child is not None:
                node.children.append((b, child))
        return node

    def run(self, workers: int = 1) -> None:
        reasoner = self.make_reasoner()
        if workers <= 1:
            self.root = self._visit(frozenset(), reasoner, self.stats)
            self.stats.consistency_calls += reasoner.stats.consistency_calls
            return
        # concurrent mode: the root is labelled here, sibling subtrees go to a pool
        root_path = frozenset()
        self._admit(root_path)
        self.stats.hst_nodes += 1
        j = self._label(root_path, reasoner, self.stats)
        self.stats.consistency_calls += reasoner.stats.consistency_calls
        if j is None:
            return

        def work(b: frozenset) -> JustifyStats:
            local = JustifyStats()
            r = self.make_reasoner()
            self._visit(b, r, local)
            local.consistency_calls += r.stats.consistency_calls
            return local

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for local in pool.map(work, self.successors(j)):
                self.stats.add(local)


def basic_successors(branch: Sequence[Axiom]) -> Successors:
    """One child per branch axiom of the label, in branch insertion order."""
    order = list(dict.fromkeys(branch))

    def succ(j: frozenset) -> list[frozenset]:
        return [frozenset([a]) for a in order if a in j]
    return succ


def marker_successors(fluents: Sequence[Axiom], markers: Sequence[Axiom], gci: Axiom,
                      ) -> Successors:
    """Branching that splits the tree into one chain segment per query individual.

    A node whose justification uses the disjointness axiom and exactly one
    marker ``A_C(a)`` branches on that marker alone, and on each fluent
    together with every other marker. Other nodes branch on single fluents
    and markers.
    """
    all_markers = frozenset(markers)
    fluent_order = list(dict.fromkeys(fluents))
    plain = basic_successors([*fluent_order, *markers])

    def succ(j: frozenset) -> list[frozenset]:
        used = j & all_markers
        if gci in j and len(used) == 1:
            (m,) = used
            others = all_markers - {m}
            return [frozenset([m])] + [frozenset([a]) | others for a in fluent_order if a in j]
        return plain(j)
    return succ


# --------------------------------------------------------------------------
# Engine
# --------------------------------------------------------------------------

@dataclass
class JustifyConfig:
    marker_pruning: bool = True
    path_pruning: bool = True
    workers: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET
    debug: bool = False


class Justifier:
    """Runs the justification routes and accumulates statistics."""

    def __init__(self, config: JustifyConfig | None = None):
        self.config = config or JustifyConfig()
        self.stats = JustifyStats()
        self.last_trees: list[HstNode] = []

    def _reasoner(self) -> ReasonerHandle:
        return ReasonerHandle(node_budget=self.config.node_budget)

    def _hst(self, axioms: Sequence[Axiom], branch: Sequence[Axiom], successors: Successors,
             store: _Store | None = None, on_found=None) -> _Store:
        store = store if store is not None else _Store()
        tree = _Hst(axioms, branch, successors, store, self._reasoner,
                    self.config.path_pruning, on_found, self.stats,
                    keep_tree=self.config.debug, debug=self.config.debug)
        tree.run(self.config.workers)
        if tree.root is not None:
            self.last_trees.append(tree.root)
        return store

    @staticmethod
    def _check_disjoint(o_s: Iterable[Axiom], f: Iterable[Axiom]) -> tuple[list, list]:
        o = list(dict.fromkeys(o_s))
        fl = list(dict.fromkeys(f))
        overlap = set(o) & set(fl)
        if overlap:
            raise ContractViolation(
                f"static ontology and fluents overlap: {sorted(map(str, overlap))}")
        return o, fl

    # -- basic -------------------------------------------------------------

    def all_justifications(self, o: Iterable[Axiom], f: Iterable[Axiom]) -> set[frozenset]:
        """{J & f | J a justification of o + f}, branching on f only."""
        o, fl = self._check_disjoint(o, f)
        branch = frozenset(fl)
        store = self._hst(o + fl, fl, basic_successors(fl))
        return {j & branch for j in store.all()}

    def explain_query_basic(self, o_s: Iterable[Axiom], f: Iterable[Axiom],
                            alpha: Axiom) -> set[frozenset]:
        """Minimal fluent sets entailing ``alpha`` (inconsistent ones included)."""
        neg = dl.negate_assertion(alpha)
        o, fl = self._check_disjoint(o_s, f)
        fl = [a for a in fl if a != neg]
        return antichain(self.all_justifications(o + [neg], fl))

    def basic(self, o_s: Iterable[Axiom], f: Iterable[Axiom],
              queries: Iterable[Axiom]) -> ExplanationTable:
        o, fl = self._check_disjoint(o_s, f)
        inc = self.all_justifications(o, fl)
        raw = {q: self.explain_query_basic(o, fl, q) for q in dict.fromkeys(queries)}
        return finalize(raw, inc)

    # -- concept / schema ----------------------------------------------------

    def concept(self, o_s: Iterable[Axiom], f: Iterable[Axiom], queries: Iterable[Axiom],
                schema: bool = False) -> ExplanationTable:
        o, fl = self._check_disjoint(o_s, f)
        qs = list(dict.fromkeys(queries))
        groups: dict[Concept, list[ClassAssertion]] = {}
        raw: dict[Axiom, set[frozenset]] = {q: set() for q in qs}
        for q in qs:
            if isinstance(q, ClassAssertion):
                groups.setdefault(q.concept, []).append(q)
            else:
                # no concept form without nominals; explained one by one
                raw[q] = self.explain_query_basic(o, fl, q)
        signature = set().union(*Ontology([*o, *fl, *qs]).signature())
        inc_found: list[frozenset] = []   # markerless justifications, shared across batches
        fbranch = frozenset(fl)
        if not groups:
            store = self._hst(o + fl, fl, basic_successors(fl))
            return finalize(raw, [j & fbranch for j in store.all()])
        for k, (concept, batch) in enumerate(groups.items()):
            marker_name = _fresh_name(signature, k)
            signature.add(marker_name)
            gci = SubClassOf(dl.make_and([concept, dl.Name(marker_name)]), dl.BOTTOM)
            markers = {ClassAssertion(dl.Name(marker_name), q.individual): q.individual
                       for q in batch}
            query_of = {m: ClassAssertion(concept, ind) for m, ind in markers.items()}
            axioms = o + fl + [gci] + list(markers)
            branch = fl + list(markers)
            if self.config.marker_pruning:
                succ = marker_successors(fl, list(markers), gci)
            else:
                succ = basic_successors(branch)
            on_found = None
            if schema:
                on_found = _SchemaExpander(axioms, self.config.debug).expand
            store = self._hst(axioms, branch, succ, _Store(inc_found), on_found)
            for j in store.all():
                used = j & frozenset(markers)
                if not used:
                    if j not in inc_found:
                        inc_found.append(j)
                elif len(used) == 1:
                    (m,) = used
                    q = query_of[m]
                    raw.setdefault(q, set()).add(j & fbranch)
        return finalize(raw, [j & fbranch for j in inc_found])

    def brute_force(self, o_s: Iterable[Axiom], f: Iterable[Axiom],
                    queries: Iterable[Axiom], limit: int = 20) -> ExplanationTable:
        o, fl = self._check_disjoint(o_s, f)
        if len(fl) > limit:
            raise ContractViolation(f"brute force limited to {limit} fluents, got {len(fl)}")
        qs = list(dict.fromkeys(queries))
        r = self._reasoner()
        inc: list[frozenset] = []
        rows: dict[Axiom, list[frozenset]] = {q: [] for q in qs}
        for n in range(len(fl) + 1):
            for combo in itertools.combinations(fl, n):
                s = frozenset(combo)
                if any(i <= s for i in inc):
                    continue
                if not r.is_consistent(o + list(combo)):
                    inc.append(s)
                    continue
                for q in qs:
                    if any(x <= s for x in rows[q]):
                        continue
                    if r.entails(q, o + list(combo)):
                        rows[q].append(s)
        self.stats.consistency_calls += r.stats.consistency_calls
        return ExplanationTable({q: set(v) for q, v in rows.items()}, set(inc))


def _fresh_name(taken: set[str], k: int) -> str:
    base = f"QueryMarker{k}"
    name, i = base, 0
    while name in taken:
        i += 1
        name = f"{base}_{i}"
    return name


# --------------------------------------------------------------------------
# Schema lifting
# --------------------------------------------------------------------------

def _skeleton(ax: Axiom) -> Axiom:
    return dl.map_terms(ax, lambda t: Var("_"))


class _SchemaExpander:
    """Adds every injective renaming of a found justification that lies inside
    the ontology to the reuse store."""

    def __init__(self, axioms: Sequence[Axiom], debug: bool):
        self.index: dict[Axiom, list[Axiom]] = {}
        for ax in axioms:
            self.index.setdefault(_skeleton(ax), []).append(ax)
        self.debug = debug

    def expand(self, j: frozenset, reasoner: ReasonerHandle, stats: JustifyStats,
               store: _Store) -> None:
        patterns, _ = dl.abstract_individuals(sorted(j, key=str))
        for inst in instantiations(patterns, self.index):
            if inst in store:
                continue
            ordered = sorted(inst, key=str)
            if reasoner.is_consistent(ordered):
                continue  # renaming broke inconsistency; not a justification
            if self.debug and any(
                    not reasoner.is_consistent([a for a in ordered if a != b]) for b in ordered):
                continue
            stats.instantiations += 1
            store.add(inst)


def instantiations(patterns: Sequence[Axiom], index: Mapping[Axiom, list[Axiom]]):
    """Yield val(patterns) for every injective valuation with val(patterns) in the index."""
    options = []
    for p in patterns:
        cands = index.get(_skeleton(p), [])
        if not cands:
            return
        options.append((p, cands))
    options.sort(key=lambda pc: len(pc[1]))
    n = len(options)

    def rec(i: int, val: dict[Var, str], used: set[str], chosen: list[Axiom]):
        if i == n:
            yield frozenset(chosen)
            return
        p, cands = options[i]
        pt = dl.terms_of(p)
        for ax in cands:
            at = dl.terms_of(ax)
            new: dict[Var, str] = {}
            ok = True
            for v, t in zip(pt, at):
                if isinstance(v, Var):
                    bound = val.get(v, new.get(v))
                    if bound is None:
                        if t in used or t in new.values():
                            ok = False
                            break
                        new[v] = t
                    elif bound != t:
                        ok = False
                        break
                elif v != t:
                    ok = False
                    break
            if not ok:
                continue
            val.update(new)
            used.update(new.values())
            chosen.append(ax)
            yield from rec(i + 1, val, used, chosen)
            chosen.pop()
            for v in new:
                del val[v]
            used.difference_update(new.values())

    seen: set[frozenset] = set()
    for inst in rec(0, {}, set(), []):
        if inst not in seen:
            seen.add(inst)
            yield inst


# --------------------------------------------------------------------------
# Module-level entry points
# --------------------------------------------------------------------------

def all_justifications_basic(o: Iterable[Axiom], f: Iterable[Axiom],
                             config: JustifyConfig | None = None) -> set[frozenset]:
    return Justifier(config).all_justifications(o, f)


def explain_query_basic(o_s: Iterable[Axiom], f: Iterable[Axiom], alpha: Axiom,
                        config: JustifyConfig | None = None) -> set[frozenset]:
    return Justifier(config).explain_query_basic(o_s, f, alpha)


def explain_queries_basic(o_s, f, queries, config: JustifyConfig | None = None) -> ExplanationTable:
    return Justifier(config).basic(o_s, f, queries)


def explain_queries_concept(o_s, f, queries, config: JustifyConfig | None = None) -> ExplanationTable:
    return Justifier(config).concept(o_s, f, queries)


def explain_queries_schema(o_s, f, queries, config: JustifyConfig | None = None) -> ExplanationTable:
    return Justifier(config).concept(o_s, f, queries, schema=True)


def brute_force_explanations(o_s, f, queries, limit: int = 20) -> ExplanationTable:
    return Justifier().brute_force(o_s, f, queries, limit)


ALGORITHMS = ("basic", "concept", "schema")


def explain(o_s, f, queries, algorithm: str = "concept",
            config: JustifyConfig | None = None) -> tuple[ExplanationTable, JustifyStats]:
    j = Justifier(config)
    if algorithm == "basic":
        t = j.basic(o_s, f, queries)
    elif algorithm == "concept":
        t = j.concept(o_s, f, queries)
    elif algorithm == "schema":
        t = j.concept(o_s, f, queries, schema=True)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    return t, j.stats
