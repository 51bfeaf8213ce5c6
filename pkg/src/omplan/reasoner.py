"""Tableau decision procedure for ALCQ knowledge bases.

Concepts are brought into negation normal form and interned to small
integers per call. TBox axioms whose left-hand side has a concept name at the
top (or as a conjunct) are absorbed into lazy unfolding rules; the remaining
GCIs are internalized and added to every node. No unique name assumption.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

from omplan import dl
from omplan.dl import (
    Axiom, ClassAssertion, Concept, DifferentIndividuals, EquivalentClasses,
    NegativeRoleAssertion, RoleAssertion, SameIndividual, SubClassOf, Var,
)
from omplan.errors import ContractViolation, ReasonerBudgetExceeded

DEFAULT_NODE_BUDGET = 1_000_000

# interned concept tags
_TOP, _BOT, _POS, _NEG, _AND, _OR, _ALL, _GE, _LE = range(9)


@dataclass
class ReasonerStats:
    consistency_calls: int = 0
    tableau_nodes: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


class _Interner:
    """Concept table for one tableau run."""

    def __init__(self):
        self.by_info: dict[tuple, int] = {}
        self.by_tree: dict[Concept, int] = {}
        self.info: list[tuple] = []
        self.trees: list[Concept] = []
        self.complex: list[bool] = []
        self.weight: list[int] = []
        self.roles: dict[str, int] = {}
        self.neg_of: dict[int, int] = {}
        self._complement: dict[int, int] = {}
        self.top = self.intern(dl.TOP)
        self.bot = self.intern(dl.BOTTOM)

    def role(self, r: str) -> int:
        return self.roles.setdefault(r, len(self.roles))

    def _store(self, info: tuple, tree: Concept) -> int:
        idx = self.by_info.get(info)
        if idx is None:
            idx = len(self.info)
            self.by_info[info] = idx
            self.info.append(info)
            self.trees.append(tree)
            self.complex.append(info[0] in (_OR, _GE, _LE))
            # rough cost of committing to the concept: atoms, then
            # universals, then anything that creates successors
            tag = info[0]
            if tag in (_AND, _OR):
                w = max((self.weight[p] for p in info[1]), default=0)
            elif tag == _GE:
                w = 2
            elif tag in (_ALL, _LE):
                w = 1
            else:
                w = 0
            self.weight.append(w)
        return idx

    def intern(self, c: Concept) -> int:
        """Intern a concept that is already in NNF."""
        got = self.by_tree.get(c)
        if got is not None:
            return got
        if isinstance(c, dl.Top):
            idx = self._store((_TOP,), c)
        elif isinstance(c, dl.Bottom):
            idx = self._store((_BOT,), c)
        elif isinstance(c, dl.Name):
            idx = self._store((_POS, c.name), c)
            neg = self._store((_NEG, c.name), dl.Not(c))
            self.neg_of[idx] = neg
            self.neg_of[neg] = idx
        elif isinstance(c, dl.Not):
            if not isinstance(c.operand, dl.Name):
                raise ContractViolation(f"concept not in NNF: {c}")
            pos = self.intern(c.operand)
            idx = self.neg_of[pos]
        elif isinstance(c, (dl.And, dl.Or)):
            idx = self._junction(c)
        elif isinstance(c, dl.Exists):
            idx = self._store((_GE, 1, self.role(c.role), self.intern(c.filler)), c)
        elif isinstance(c, dl.Forall):
            idx = self._store((_ALL, self.role(c.role), self.intern(c.filler)), c)
        elif isinstance(c, dl.AtLeast):
            if c.n == 0:
                idx = self.top
            else:
                idx = self._store((_GE, c.n, self.role(c.role), self.intern(c.filler)), c)
        elif isinstance(c, dl.AtMost):
            if c.n == 0:
                neg = dl.nnf(dl.Not(c.filler))
                idx = self._store((_ALL, self.role(c.role), self.intern(neg)),
                                  dl.Forall(c.role, neg))
            else:
                idx = self._store((_LE, c.n, self.role(c.role), self.intern(c.filler)), c)
        else:
            raise TypeError(f"not a concept: {c!r}")
        self.by_tree[c] = idx
        return idx

    def _junction(self, c: Concept) -> int:
        """Intern a conjunction or disjunction with duplicate and neutral
        operands removed."""
        is_and = isinstance(c, dl.And)
        unit, zero = (self.top, self.bot) if is_and else (self.bot, self.top)
        ops: list[int] = []
        trees: list[Concept] = []
        for p in c.operands:
            k = self.intern(p)
            if k == zero:
                return zero
            if k == unit or k in ops:
                continue
            ops.append(k)
            trees.append(self.trees[k])
        if not ops:
            return unit
        if len(ops) == 1:
            return ops[0]
        tag = _AND if is_and else _OR
        return self._store((tag, tuple(ops)), dl.And(tuple(trees)) if is_and else dl.Or(tuple(trees)))

    def complement(self, idx: int) -> int:
        got = self._complement.get(idx)
        if got is None:
            got = self.intern(dl.nnf(dl.Not(self.trees[idx])))
            self._complement[idx] = got
        return got


class _Clash(Exception):
    """A contradiction; ``deps`` is the bitmask of choice points it rests on."""

    def __init__(self, deps: int = 0):
        super().__init__()
        self.deps = deps


class _Graph:
    """Completion graph. Every fact carries a dependency bitmask over the open
    choice points. Copied wholesale when the search branches."""

    __slots__ = ("labels", "edges", "parent", "roots", "neq", "pending", "ind",
                 "ind_deps", "next_id")

    def __init__(self):
        self.labels: dict[int, dict[int, int]] = {}
        self.edges: dict[int, dict[int, dict[int, int]]] = {}
        self.parent: dict[int, int] = {}
        self.roots: set[int] = set()
        self.neq: dict[int, dict[int, int]] = {}
        # complex concepts per node that may still need a rule
        self.pending: dict[int, set[int]] = {}
        self.ind: dict[str, int] = {}
        self.ind_deps: dict[str, int] = {}
        self.next_id = 0

    def copy(self) -> "_Graph":
        g = _Graph.__new__(_Graph)
        g.labels = {k: dict(v) for k, v in self.labels.items()}
        g.edges = {k: {m: dict(rs) for m, rs in v.items()} for k, v in self.edges.items()}
        g.parent = dict(self.parent)
        g.roots = set(self.roots)
        g.neq = {k: dict(v) for k, v in self.neq.items()}
        g.pending = {k: set(v) for k, v in self.pending.items()}
        g.ind = dict(self.ind)
        g.ind_deps = dict(self.ind_deps)
        g.next_id = self.next_id
        return g


class _Choice:
    __slots__ = ("snap", "kind", "alts", "next", "level", "fail")

    def __init__(self, snap: _Graph, kind: str, alts: list, level: int):
        self.snap = snap
        self.kind = kind
        self.alts = alts
        self.next = 1
        self.level = level
        self.fail = 0


class _Tableau:
    def __init__(self, axioms: Sequence[Axiom], node_budget: int, pairwise: bool = False):
        self.pairwise = pairwise
        self._unsat_cache: dict[int, bool] = {}
        self.I = _Interner()
        self.budget = node_budget
        self.nodes_created = 0
        self.branches = 0
        self.todo: list[tuple[int, int]] = []
        self.unfold: dict[str, list[int]] = {}
        self.globals: list[int] = []
        self.negroles: list[tuple[int, str, str]] = []
        self.axioms = axioms

    # -- preprocessing -----------------------------------------------------

    def _absorb(self, sub: Concept, sup: Concept) -> None:
        I = self.I
        if isinstance(sub, dl.Bottom) or isinstance(sup, dl.Top):
            return
        if isinstance(sub, dl.Or):
            for part in sub.operands:
                self._absorb(part, sup)
            return
        if isinstance(sup, dl.And):
            for part in sup.operands:
                self._absorb(sub, part)
            return
        if isinstance(sub, dl.Name):
            self.unfold.setdefault(sub.name, []).append(I.intern(dl.nnf(sup)))
            return
        if isinstance(sub, dl.And):
            for i, part in enumerate(sub.operands):
                if isinstance(part, dl.Name):
                    rest = dl.make_and(sub.operands[:i] + sub.operands[i + 1:])
                    body = dl.nnf(dl.make_or([dl.Not(rest), sup]))
                    self.unfold.setdefault(part.name, []).append(I.intern(body))
                    return
        self._internalize(dl.nnf(dl.make_or([dl.Not(sub), sup])))

    def _internalize(self, g: Concept) -> None:
        """Add the global constraint TOP [= g, absorbing a negated-name disjunct
        into a lazy unfolding rule when there is one."""
        if isinstance(g, dl.Top):
            return
        if isinstance(g, dl.And):
            for part in g.operands:
                self._internalize(part)
            return
        if isinstance(g, dl.Not):
            self.unfold.setdefault(g.operand.name, []).append(self.I.bot)
            return
        if isinstance(g, dl.Or):
            for i, part in enumerate(g.operands):
                if isinstance(part, dl.Not):
                    rest = dl.make_or(g.operands[:i] + g.operands[i + 1:])
                    self.unfold.setdefault(part.operand.name, []).append(self.I.intern(rest))
                    return
        c = self.I.intern(g)
        if c not in self.globals:
            self.globals.append(c)

    # -- graph primitives --------------------------------------------------

    def add(self, g: _Graph, x: int, c: int, d: int) -> None:
        lab = g.labels[x]
        if c not in lab:
            lab[c] = d
            self.todo.append((x, c))
            if self.I.complex[c]:
                g.pending[x].add(c)

    def add_edge(self, g: _Graph, x: int, y: int, r: int, d: int) -> None:
        roles = g.edges[x].setdefault(y, {})
        if r in roles:
            return
        roles[r] = d
        info = self.I.info
        lab = g.labels[x]
        for c in sorted(lab):
            i = info[c]
            if i[0] == _ALL and i[1] == r:
                self.add(g, y, i[2], lab[c] | d)

    def new_node(self, g: _Graph, parent: int | None, d: int) -> int:
        self.nodes_created += 1
        self._check_budget()
        x = g.next_id
        g.next_id += 1
        g.labels[x] = {}
        g.edges[x] = {}
        g.neq[x] = {}
        g.pending[x] = set()
        if parent is None:
            g.roots.add(x)
        else:
            g.parent[x] = parent
        self.add(g, x, self.I.top, d)
        for c in self.globals:
            self.add(g, x, c, d)
        return x

    def propagate(self, g: _Graph) -> None:
        info = self.I.info
        neg_of = self.I.neg_of
        todo = self.todo
        while todo:
            x, c = todo.pop()
            lab = g.labels.get(x)
            if lab is None:
                continue
            d = lab[c]
            i = info[c]
            tag = i[0]
            if tag == _BOT:
                raise _Clash(d)
            if tag == _POS or tag == _NEG:
                n = neg_of[c]
                if n in lab:
                    raise _Clash(d | lab[n])
                if tag == _POS:
                    for e in self.unfold.get(i[1], ()):
                        self.add(g, x, e, d)
            elif tag == _AND:
                for e in i[1]:
                    self.add(g, x, e, d)
            elif tag == _ALL:
                r, f = i[1], i[2]
                out = g.edges[x]
                for y in sorted(out):
                    dr = out[y].get(r)
                    if dr is not None:
                        self.add(g, y, f, d | dr)
            elif tag == _GE or tag == _LE:
                # >= n r.C next to <= m r.C with n > m
                other = _LE if tag == _GE else _GE
                for e in lab:
                    j = info[e]
                    if j[0] == other and j[2] == i[2] and j[3] == i[3]:
                        lo, hi = (i[1], j[1]) if tag == _GE else (j[1], i[1])
                        if lo > hi:
                            raise _Clash(d | lab[e])

    def check_negroles(self, g: _Graph) -> None:
        for r, a, b in self.negroles:
            na, nb = g.ind[a], g.ind[b]
            dr = g.edges[na].get(nb, {}).get(r)
            if dr is not None:
                raise _Clash(dr | g.ind_deps[a] | g.ind_deps[b])

    def add_neq(self, g: _Graph, x: int, y: int, d: int) -> None:
        if x == y:
            raise _Clash(d)
        if y not in g.neq[x]:
            g.neq[x][y] = d
            g.neq[y][x] = d

    def _subtree(self, g: _Graph, y: int) -> set[int]:
        doomed = {y}
        for n in sorted(g.parent):
            if g.parent[n] in doomed:
                doomed.add(n)
        return doomed

    def merge(self, g: _Graph, y: int, z: int, d: int) -> None:
        """Merge node y into node z and prune y together with its anonymous subtree."""
        doomed = self._subtree(g, y)
        ly = g.labels[y]
        for c in sorted(ly):
            self.add(g, z, c, ly[c] | d)
        if y in g.roots:
            for u in sorted(g.edges):
                if u in doomed:
                    continue
                roles = g.edges[u].pop(y, None)
                if roles:
                    for r in sorted(roles):
                        self.add_edge(g, u, z, r, roles[r] | d)
            out = g.edges[y]
            for v in sorted(out):
                if v == y or v in g.roots:
                    target = z if v == y else v
                    for r in sorted(out[v]):
                        self.add_edge(g, z, target, r, out[v][r] | d)
        else:
            x = g.parent[y]
            roles = g.edges[x].pop(y)
            for r in sorted(roles):
                self.add_edge(g, x, z, r, roles[r] | d)
        ny = g.neq[y]
        for w in sorted(ny):
            if w not in doomed:
                self.add_neq(g, z, w, ny[w] | d)
        for name, n in g.ind.items():
            if n == y:
                g.ind[name] = z
                g.ind_deps[name] |= d
        for n in doomed:
            del g.labels[n]
            del g.edges[n]
            g.parent.pop(n, None)
            g.roots.discard(n)
            for w in g.neq.pop(n):
                if w in g.neq:
                    g.neq[w].pop(n, None)
            del g.pending[n]
        for u in g.edges:
            for n in doomed:
                g.edges[u].pop(n, None)

    def merge_pair(self, g: _Graph, a: int, b: int, d: int) -> None:
        ra, rb = a in g.roots, b in g.roots
        if ra and not rb:
            self.merge(g, b, a, d)
        elif rb and not ra:
            self.merge(g, a, b, d)
        else:
            lo, hi = min(a, b), max(a, b)
            self.merge(g, hi, lo, d)

    # -- blocking ----------------------------------------------------------

    def blocking(self, g: _Graph) -> dict[int, int]:
        """0 = not blocked, 1 = directly blocked, 2 = indirectly blocked.

        Without inverse roles nothing flows from a node back to its
        predecessor, so an anonymous node whose label is contained in an
        anonymous ancestor's label can reuse that ancestor's subtree.
        ``pairwise`` switches to the stricter pairwise equality test.
        """
        status: dict[int, int] = {}
        labels, edges, parent, roots = g.labels, g.edges, g.parent, g.roots
        pairwise = self.pairwise
        seen: dict[frozenset, int] = {}
        for x in sorted(labels):
            if x in roots:
                status[x] = 0
                continue
            p = parent[x]
            if status[p]:
                status[x] = 2
                continue
            status[x] = 0
            lx = labels[x].keys()
            a = p
            if pairwise:
                lp, ex = labels[p].keys(), edges[p][x].keys()
                while a not in roots:
                    pa = parent[a]
                    if labels[a].keys() == lx and labels[pa].keys() == lp \
                            and edges[pa][a].keys() == ex:
                        status[x] = 1
                        break
                    a = pa
            else:
                while a not in roots:
                    if lx <= labels[a].keys():
                        status[x] = 1
                        break
                    a = parent[a]
                if not status[x]:
                    # anywhere blocking: an earlier open node with the same label
                    key = frozenset(lx)
                    if key in seen:
                        status[x] = 1
                    else:
                        seen[key] = x
        return status

    # -- rule selection ----------------------------------------------------

    def _succ(self, g: _Graph, x: int, r: int) -> list[int]:
        out = g.edges[x]
        return [y for y in sorted(out) if r in out[y]]

    def next_step(self, g: _Graph):
        """Pick the next nondeterministic or generating rule.

        Priority: choose, at-most merge, disjunction, at-least. One scan over
        the nodes in id order; a clash found on the way ends the branch.
        Alternatives are (payload..., deps) tuples.
        """
        info = self.I.info
        neg_of = self.I.neg_of
        top = self.I.top
        status = self.blocking(g)
        best = None
        best_rank = 4
        for x in sorted(g.labels):
            st = status[x]
            if st == 2:
                continue
            lab = g.labels[x]
            out = g.edges[x]
            pending = g.pending[x]
            for c in sorted(pending):
                i = info[c]
                tag = i[0]
                if tag == _LE:
                    n, r, f = i[1], i[2], i[3]
                    ys = self._succ(g, x, r)
                    if f != top:
                        nf = self.I.complement(f)
                        for y in ys:
                            ly = g.labels[y]
                            if f not in ly and nf not in ly:
                                d = lab[c] | out[y][r]
                                return ("add", [(y, nf, d), (y, f, d)])
                    if best_rank <= 1:
                        continue
                    if f != top:
                        ys = [y for y in ys if f in g.labels[y]]
                    if len(ys) <= n:
                        continue
                    base = lab[c]
                    for y in ys:
                        base |= out[y][r] | g.labels[y].get(f, 0)
                    pairs = []
                    for a in range(len(ys)):
                        na = g.neq[ys[a]]
                        for b in range(a + 1, len(ys)):
                            if ys[b] in na:
                                base |= na[ys[b]]
                            else:
                                pairs.append((ys[a], ys[b]))
                    if not pairs:
                        raise _Clash(base)
                    best, best_rank = ("merge", [(y, z, base) for y, z in pairs]), 1
                elif tag == _OR:
                    if any(e in lab for e in i[1]):
                        pending.discard(c)
                        continue
                    if best_rank <= 2:
                        continue
                    d = lab[c]
                    live = []
                    for e in i[1]:
                        ie = info[e][0]
                        if ie == _BOT or self._unsat(e):
                            continue
                        if (ie == _POS or ie == _NEG) and neg_of[e] in lab:
                            d |= lab[neg_of[e]]
                            continue
                        live.append(e)
                    if not live:
                        raise _Clash(d)
                    weight = self.I.weight
                    live.sort(key=lambda e: weight[e])
                    # semantic branching: later alternatives negate earlier ones
                    alts = [(x, e, d, tuple(live[:k])) for k, e in enumerate(live)]
                    best, best_rank = ("add", alts), 2
                elif tag == _GE:
                    if best_rank <= 3 or st != 0:
                        continue
                    if self._satisfied(g, x, i):
                        pending.discard(c)
                        continue
                    best, best_rank = ("gen", x, c), 3
        return best

    def _unsat(self, c: int) -> bool:
        """True if ``c`` clashes on a lone node by deterministic rules alone,
        i.e. ``c`` is unsatisfiable under the TBox. Cached per run."""
        got = self._unsat_cache.get(c)
        if got is None:
            saved, self.todo = self.todo, []
            g = _Graph()
            g.labels[0], g.edges[0], g.neq[0], g.pending[0] = {}, {}, {}, set()
            g.roots.add(0)
            try:
                self.add(g, 0, self.I.top, 0)
                for e in self.globals:
                    self.add(g, 0, e, 0)
                self.add(g, 0, c, 0)
                self.propagate(g)
                got = False
            except _Clash:
                got = True
            self.todo = saved
            self._unsat_cache[c] = got
        return got

    def _satisfied(self, g: _Graph, x: int, i: tuple) -> bool:
        n, r, f = i[1], i[2], i[3]
        ys = [y for y in self._succ(g, x, r) if f == self.I.top or f in g.labels[y]]
        if n == 1:
            return bool(ys)
        # greedy pairwise-distinct selection; failure only costs extra work
        chosen: list[int] = []
        for y in ys:
            if all(y in g.neq[z] for z in chosen):
                chosen.append(y)
        return len(chosen) >= n

    def generate(self, g: _Graph, x: int, c: int) -> None:
        _, n, r, f = self.I.info[c]
        d = g.labels[x][c]
        g.pending[x].discard(c)
        fresh = []
        for _ in range(n):
            y = self.new_node(g, x, d)
            self.add_edge(g, x, y, r, d)
            self.add(g, y, f, d)
            fresh.append(y)
        for a in range(len(fresh)):
            for b in range(a + 1, len(fresh)):
                self.add_neq(g, fresh[a], fresh[b], d)

    def apply(self, g: _Graph, kind: str, alt: tuple, extra: int) -> None:
        if kind == "add":
            self.add(g, alt[0], alt[1], alt[2] | extra)
            if len(alt) > 3:
                for e in alt[3]:
                    self.add(g, alt[0], self.I.complement(e), alt[2] | extra)
        else:
            self.merge_pair(g, alt[0], alt[1], alt[2] | extra)

    # -- driver ------------------------------------------------------------

    def _initial(self) -> _Graph:
        tbox = [a for a in self.axioms if isinstance(a, (SubClassOf, EquivalentClasses))]
        abox = [a for a in self.axioms if not isinstance(a, (SubClassOf, EquivalentClasses))]
        for ax in tbox:
            if isinstance(ax, SubClassOf):
                self._absorb(ax.sub, ax.sup)
            else:
                self._absorb(ax.first, ax.second)
                self._absorb(ax.second, ax.first)
        g = _Graph()
        for ax in abox:
            for t in dl.terms_of(ax):
                if isinstance(t, Var):
                    raise ContractViolation(f"axiom pattern passed to reasoner: {ax}")
                if t not in g.ind:
                    g.ind[t] = self.new_node(g, None, 0)
                    g.ind_deps[t] = 0
        if not g.ind:
            self.new_node(g, None, 0)
        same: list[tuple[str, str]] = []
        diff: list[tuple[str, str]] = []
        for ax in abox:
            if isinstance(ax, ClassAssertion):
                self.add(g, g.ind[ax.individual], self.I.intern(dl.nnf(ax.concept)), 0)
            elif isinstance(ax, RoleAssertion):
                self.add_edge(g, g.ind[ax.subject], g.ind[ax.object], self.I.role(ax.role), 0)
            elif isinstance(ax, NegativeRoleAssertion):
                self.negroles.append((self.I.role(ax.role), ax.subject, ax.object))
            elif isinstance(ax, SameIndividual):
                same.append((ax.first, ax.second))
            elif isinstance(ax, DifferentIndividuals):
                diff.append((ax.first, ax.second))
            else:
                raise TypeError(f"not an axiom: {ax!r}")
        for a, b in same:
            na, nb = g.ind[a], g.ind[b]
            if na != nb:
                self.merge_pair(g, na, nb, 0)
        for a, b in diff:
            self.add_neq(g, g.ind[a], g.ind[b], 0)
        return g

    def run(self) -> bool:
        """Depth-first search with dependency-directed backjumping."""
        try:
            g = self._initial()
        except _Clash:
            return False
        stack: list[_Choice] = []
        pending: tuple | None = None
        while True:
            try:
                if pending is not None:
                    self.apply(g, *pending)
                    pending = None
                while True:
                    self.propagate(g)
                    self.check_negroles(g)
                    step = self.next_step(g)
                    if step is None:
                        return True
                    if step[0] == "gen":
                        self.generate(g, step[1], step[2])
                        continue
                    kind, alts = step
                    if len(alts) == 1:
                        self.apply(g, kind, alts[0], 0)
                        continue
                    self.branches += 1
                    self._check_budget()
                    level = len(stack)
                    stack.append(_Choice(g.copy(), kind, alts, level))
                    self.apply(g, kind, alts[0], 1 << level)
            except _Clash as clash:
                self.todo.clear()
                deps = clash.deps
                while stack:
                    top = stack[-1]
                    bit = 1 << top.level
                    if not deps & bit:
                        stack.pop()
                        continue
                    top.fail |= deps & ~bit
                    if top.next < len(top.alts):
                        break
                    stack.pop()
                    deps = top.fail
                if not stack:
                    return False
                self.branches += 1
                self._check_budget()
                alt = top.alts[top.next]
                top.next += 1
                if top.next == len(top.alts):
                    g, top.snap = top.snap, None
                else:
                    g = top.snap.copy()
                pending = (top.kind, alt, 1 << top.level)

    def _check_budget(self) -> None:
        if self.nodes_created + self.branches > self.budget:
            raise ReasonerBudgetExceeded(
                f"tableau exceeded budget of {self.budget} nodes and branches")


class ReasonerHandle:
    """Consistency oracle over a fixed ontology plus per-call extra axioms.

    Not thread-safe; give each worker its own handle.
    """

    def __init__(self, ontology: Iterable[Axiom] = (), node_budget: int = DEFAULT_NODE_BUDGET):
        if node_budget <= 0:
            raise ValueError("node budget must be positive")
        self.ontology = list(dict.fromkeys(ontology))
        self.node_budget = node_budget
        self.stats = ReasonerStats()

    def is_consistent(self, extra: Iterable[Axiom] = ()) -> bool:
        axioms = list(dict.fromkeys([*self.ontology, *extra]))
        self.stats.consistency_calls += 1
        t = _Tableau(axioms, self.node_budget)
        try:
            return t.run()
        finally:
            self.stats.tableau_nodes += t.nodes_created

    def entails(self, alpha: Axiom, extra: Iterable[Axiom] = ()) -> bool:
        return not self.is_consistent([*extra, dl.negate_assertion(alpha)])


def is_consistent(axioms: Iterable[Axiom], node_budget: int = DEFAULT_NODE_BUDGET) -> bool:
    return ReasonerHandle(axioms, node_budget).is_consistent()


def entails(o: Iterable[Axiom], alpha: Axiom, node_budget: int = DEFAULT_NODE_BUDGET) -> bool:
    """O |= alpha for an ABox axiom alpha, by refutation."""
    return ReasonerHandle(o, node_budget).entails(alpha)


def instances(o: Iterable[Axiom], c: Concept, candidates: Sequence[str],
              node_budget: int = DEFAULT_NODE_BUDGET) -> list[str]:
    h = ReasonerHandle(o, node_budget)
    return [a for a in candidates if h.entails(ClassAssertion(c, a))]
