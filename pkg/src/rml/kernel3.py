"""Degree-3 instances as a bipartite cover problem.

Pairs of variables (``U``) cover the degree-3 monomials (``V``) that contain
them; a minimum set of pairs covering ``V`` yields a minimum linearization.
This module holds the reduction rules, the Buss-style high-degree rule, the
kernel and bounded search tree, a brute-force oracle and two instance
constructions (vertex cover encoding, greedy adversary).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable

import networkx as nx
import numpy as np

from ._accel import njit, select
from .core import IndexSet, MlpInstance, Triple, canonical_triple, index_key, triple_set
from .errors import DomainError, RmlError, SizeGuardError

DEFAULT_SIZE_GUARD = 25

Pair = IndexSet


@dataclass
class CoverGraph:
    adj_u: dict[Pair, set[IndexSet]]
    adj_v: dict[IndexSet, set[Pair]]
    forced: tuple[Pair, ...] = ()
    selected: list[Pair] = field(default_factory=list)

    def copy(self) -> "CoverGraph":
        return CoverGraph(
            {u: set(vs) for u, vs in self.adj_u.items()},
            {v: set(us) for v, us in self.adj_v.items()},
            self.forced,
            list(self.selected),
        )

    @property
    def u_nodes(self) -> list[Pair]:
        return sorted(self.adj_u, key=index_key)

    @property
    def v_nodes(self) -> list[IndexSet]:
        return sorted(self.adj_v, key=index_key)

    @property
    def n_edges(self) -> int:
        return sum(len(vs) for vs in self.adj_u.values())

    def sizes(self) -> dict[str, int]:
        return {"U": len(self.adj_u), "V": len(self.adj_v), "E": self.n_edges}

    def remove_u(self, u: Pair) -> None:
        for v in self.adj_u.pop(u):
            self.adj_v[v].discard(u)

    def remove_v(self, v: IndexSet) -> None:
        for u in self.adj_v.pop(v):
            self.adj_u[u].discard(v)

    def take(self, u: Pair) -> list[IndexSet]:
        """Select ``u``: drop it and every monomial it covers."""
        covered = sorted(self.adj_u[u], key=index_key)
        for v in covered:
            self.remove_v(v)
        self.remove_u(u)
        self.selected.append(u)
        return covered


def build_cover_graph(mlp: MlpInstance, pair_filter: Callable[[Pair], bool] | None = None) -> CoverGraph:
    """Degree-2 monomials are forced pairs; degree-3 monomials they contain are already covered."""
    if mlp.max_degree > 3:
        raise DomainError(f"cover graph needs degree <= 3, got {mlp.max_degree}")
    forced = tuple(sorted((m.vars for m in mlp.monomials if m.degree == 2), key=index_key))
    fset = set(forced)
    adj_u: dict[Pair, set[IndexSet]] = {}
    adj_v: dict[IndexSet, set[Pair]] = {}
    for mono in mlp.monomials:
        if mono.degree != 3:
            continue
        pairs = list(itertools.combinations(mono.vars, 2))
        if any(p in fset for p in pairs):
            continue
        if pair_filter is not None:
            pairs = [p for p in pairs if pair_filter(p)]
        adj_v[mono.vars] = set(pairs)
        for p in pairs:
            adj_u.setdefault(p, set()).add(mono.vars)
    return CoverGraph(adj_u, adj_v, forced)


@dataclass(frozen=True)
class TraceStep:
    rule: int
    selected: Pair | None
    removed_u: tuple[Pair, ...]
    removed_v: tuple[IndexSet, ...]


def replay(graph: CoverGraph, trace: Iterable[TraceStep]) -> CoverGraph:
    g = graph.copy()
    for step in trace:
        for v in step.removed_v:
            g.remove_v(v)
        for u in step.removed_u:
            g.remove_u(u)
        if step.selected is not None:
            g.selected.append(step.selected)
    return g


def _select(g: CoverGraph, u: Pair, rule: int, trace: list[TraceStep], extra_u=()) -> None:
    covered = g.take(u)
    for w in extra_u:
        if w in g.adj_u:
            g.remove_u(w)
    trace.append(TraceStep(rule, u, (u, *[w for w in extra_u if w != u]), tuple(covered)))


def _rule1(g: CoverGraph, trace: list[TraceStep]) -> bool:
    """Variable-disjoint monomial: take its smallest pair, drop all its pairs."""
    count: dict[int, int] = {}
    for v in g.adj_v:
        for j in v:
            count[j] = count.get(j, 0) + 1
    changed = False
    for v in g.v_nodes:
        if v not in g.adj_v or not g.adj_v[v]:
            continue
        if all(count[j] == 1 for j in v):
            nbrs = sorted(g.adj_v[v], key=index_key)
            _select(g, nbrs[0], 1, trace, extra_u=nbrs[1:])
            changed = True
    return changed


def _rule2(g: CoverGraph, trace: list[TraceStep]) -> bool:
    """Drop pairs covering a single monomial, keeping one when a monomial has nothing better."""
    drop = {u for u, vs in g.adj_u.items() if len(vs) == 1}
    for v, us in g.adj_v.items():
        if us and us <= drop:
            drop.discard(min(us, key=index_key))
    if not drop:
        return False
    removed = tuple(sorted(drop, key=index_key))
    for u in removed:
        g.remove_u(u)
    trace.append(TraceStep(2, None, removed, ()))
    return True


def _rule3(g: CoverGraph, trace: list[TraceStep]) -> bool:
    changed = False
    for v in g.v_nodes:
        if v in g.adj_v and len(g.adj_v[v]) == 1:
            _select(g, next(iter(g.adj_v[v])), 3, trace)
            changed = True
    return changed


def _rule4(g: CoverGraph, trace: list[TraceStep]) -> bool:
    idle = tuple(u for u in g.u_nodes if not g.adj_u[u])
    for u in idle:
        g.remove_u(u)
    if idle:
        trace.append(TraceStep(4, None, idle, ()))
    return bool(idle)


def apply_rules(graph: CoverGraph) -> tuple[CoverGraph, list[TraceStep]]:
    """Exhaustively apply rules 1-4 to a copy of ``graph``."""
    g = graph.copy()
    trace: list[TraceStep] = []
    while True:
        changed = _rule1(g, trace)
        changed |= _rule2(g, trace)
        changed |= _rule3(g, trace)
        changed |= _rule4(g, trace)
        if not changed:
            return g, trace


def components(graph: CoverGraph) -> list[tuple[list[Pair], list[IndexSet]]]:
    """Connected components (rule 5), each as (pairs, monomials) in canonical order."""
    G = nx.Graph()
    G.add_nodes_from(("v", v) for v in graph.adj_v)
    G.add_nodes_from(("u", u) for u in graph.adj_u)
    G.add_edges_from((("u", u), ("v", v)) for u, vs in graph.adj_u.items() for v in vs)
    out = []
    for comp in nx.connected_components(G):
        us = sorted((x for s, x in comp if s == "u"), key=index_key)
        vs = sorted((x for s, x in comp if s == "v"), key=index_key)
        out.append((us, vs))
    out.sort(key=lambda c: index_key(c[1][0]) if c[1] else (0, ()))
    return out


def buss_rule(graph: CoverGraph, k: int) -> tuple[CoverGraph, int]:
    """Take every pair covering more than ``k`` monomials; ``k' < 0`` means no."""
    g = graph.copy()
    while k >= 0:
        heavy = [u for u in g.u_nodes if len(g.adj_u[u]) >= k + 1]
        if not heavy:
            break
        g.take(heavy[0])
        k -= 1
    return g, k


@dataclass
class KernelResult:
    verdict: str  # "yes", "no" or "kernel"
    graph: CoverGraph
    k: int
    trace: list[TraceStep]
    reason: str = ""

    @property
    def selections(self) -> list[Pair]:
        return list(self.graph.selected)


def kernelize(graph: CoverGraph, k: int) -> KernelResult:
    g = graph.copy()
    trace: list[TraceStep] = []
    while True:
        before = len(g.selected)
        g, steps = apply_rules(g)
        trace += steps
        k -= len(g.selected) - before
        if k < 0:
            return KernelResult("no", g, k, trace, "budget exhausted by reduction rules")
        g, k2 = buss_rule(g, k)
        if k2 < 0:
            return KernelResult("no", g, k2, trace, "budget exhausted by high-degree rule")
        if k2 == k:
            break
        k = k2
    if not g.adj_v:
        return KernelResult("yes", g, k, trace)
    # every pair now covers at most k monomials, so k pairs cover at most k^2;
    # monomials have <= 3 pairs and pairs >= 2 monomials
    s = g.sizes()
    if s["V"] > k * k:
        return KernelResult("no", g, k, trace, f"|V| = {s['V']} > k^2")
    if s["E"] > 3 * k * k:
        return KernelResult("no", g, k, trace, f"|E| = {s['E']} > 3k^2")
    if 2 * s["U"] > 3 * k * k:
        return KernelResult("no", g, k, trace, f"|U| = {s['U']} > 3k^2/2")
    return KernelResult("kernel", g, k, trace)


def _search(g: CoverGraph, k: int) -> list[Pair] | None:
    if not g.adj_v:
        return []
    if k == 0:
        return None
    v = g.v_nodes[0]
    for u in sorted(g.adj_v[v], key=index_key):
        h = g.copy()
        h.take(u)
        rest = _search(h, k - 1)
        if rest is not None:
            return [u] + rest
    return None


@dataclass
class FptResult:
    yes: bool
    selection: list[Pair] | None
    kernel: KernelResult


def fpt_decide(graph: CoverGraph, k: int) -> FptResult:
    """Is there a set of at most ``k`` pairs (besides forced ones) covering every monomial?"""
    ker = kernelize(graph, k)
    if ker.verdict == "no":
        return FptResult(False, None, ker)
    rest = _search(ker.graph, ker.k)
    if rest is None:
        return FptResult(False, None, ker)
    return FptResult(True, ker.selections + rest, ker)


# --- brute-force oracle -----------------------------------------------------


@njit
def first_cover_nb(masks, full, r):
    """First r-combination (lexicographic) of mask rows whose OR equals ``full``."""
    nu, nw = masks.shape
    idx = np.arange(r)
    while True:
        ok = True
        for w in range(nw):
            acc = np.uint64(0)
            for s in range(r):
                acc |= masks[idx[s], w]
            if acc != full[w]:
                ok = False
                break
        if ok:
            return idx.copy()
        i = r - 1
        while i >= 0 and idx[i] == nu - r + i:
            i -= 1
        if i < 0:
            return np.empty(0, dtype=np.int64)
        idx[i] += 1
        for j in range(i + 1, r):
            idx[j] = idx[j - 1] + 1


def first_cover_np(masks, full, r, batch: int = 1 << 16):
    nu = masks.shape[0]
    combos = itertools.combinations(range(nu), r)
    while True:
        chunk = np.array(list(itertools.islice(combos, batch)), dtype=np.int64)
        if chunk.size == 0:
            return np.empty(0, dtype=np.int64)
        acc = np.bitwise_or.reduce(masks[chunk], axis=1)
        hit = np.flatnonzero((acc == full).all(axis=1))
        if hit.size:
            return chunk[hit[0]]


first_cover = select(first_cover_nb, first_cover_np)


def cover_masks(graph: CoverGraph) -> tuple[list[Pair], np.ndarray, np.ndarray]:
    us, vs = graph.u_nodes, graph.v_nodes
    words = max(1, (len(vs) + 63) // 64)
    pos = {v: i for i, v in enumerate(vs)}
    masks = np.zeros((len(us), words), dtype=np.uint64)
    for a, u in enumerate(us):
        for v in graph.adj_u[u]:
            i = pos[v]
            masks[a, i // 64] |= np.uint64(1) << np.uint64(i % 64)
    full = np.zeros(words, dtype=np.uint64)
    for i in range(len(vs)):
        full[i // 64] |= np.uint64(1) << np.uint64(i % 64)
    return us, masks, full


def min_cover_bruteforce(graph: CoverGraph, guard: int = DEFAULT_SIZE_GUARD) -> list[Pair]:
    """Exact minimum cover by enumeration in increasing size (first hit in canonical order)."""
    if len(graph.adj_u) > guard:
        raise SizeGuardError(f"{len(graph.adj_u)} pairs exceed the brute-force guard of {guard}")
    if not graph.adj_v:
        return []
    if any(not us for us in graph.adj_v.values()):
        raise RmlError("a monomial has no covering pair")
    us, masks, full = cover_masks(graph)
    for r in range(1, len(us) + 1):
        hit = first_cover(masks, full, r)
        if hit.size:
            return [us[i] for i in hit]
    raise RmlError("no cover exists")  # pragma: no cover


def selection_to_triples(mlp: MlpInstance, selection: Iterable[Pair], forced: Iterable[Pair] = ()) -> tuple[Triple, ...]:
    pairs = sorted(set(map(tuple, selection)) | set(map(tuple, forced)), key=index_key)
    out: set[Triple] = {canonical_triple((a,), (b,)) for a, b in pairs}
    for mono in mlp.monomials:
        if mono.degree == 2:
            out.add(canonical_triple(mono.vars[:1], mono.vars[1:]))
        elif mono.degree == 3:
            p = next((p for p in pairs if set(p) <= set(mono.vars)), None)
            if p is None:
                raise RmlError(f"monomial {mono.vars} is not covered by the selection")
            rest = tuple(j for j in mono.vars if j not in p)
            out.add(canonical_triple(rest, p))
        elif mono.degree > 3:
            raise DomainError("selection_to_triples handles degree <= 3 only")
    return triple_set(out)


def min_linearization_3mlp(mlp: MlpInstance, guard: int = DEFAULT_SIZE_GUARD) -> tuple[Triple, ...]:
    g = build_cover_graph(mlp)
    return selection_to_triples(mlp, min_cover_bruteforce(g, guard), g.forced)


# --- constructions ----------------------------------------------------------


def gen_vertex_cover_instance(G: nx.Graph | Iterable[tuple]) -> MlpInstance:
    """One monomial x_u x_v y per edge; y is the last variable."""
    G = G if isinstance(G, nx.Graph) else nx.Graph(list(G))
    if G.number_of_nodes() == 0 or any(d == 0 for _, d in G.degree()):
        raise ValueError("graph must be non-empty without isolated vertices")
    nodes = sorted(G.nodes, key=str)
    pos = {v: i for i, v in enumerate(nodes)}
    y = len(nodes)
    terms = [(1.0, (pos[a], pos[b], y)) for a, b in sorted(G.edges, key=lambda e: sorted((pos[e[0]], pos[e[1]])))]
    return MlpInstance.from_terms(len(nodes) + 1, terms)


def y_pair_graph(mlp: MlpInstance) -> CoverGraph:
    """Cover graph keeping only pairs that contain the last variable."""
    y = mlp.n - 1
    return build_cover_graph(mlp, pair_filter=lambda p: y in p)


def adversarial_bipartite(k: int) -> tuple[nx.Graph, list, list]:
    """Bipartite graph with |U| = k and levels V_i of size floor(k/i), each vertex of V_i with i neighbors.

    Returns the graph plus the V and U vertex lists; V is ordered from the
    highest level down.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    U = [("u", a) for a in range(k)]
    V = []
    B = nx.Graph()
    B.add_nodes_from(U)
    offset = 0
    for i in range(k, 0, -1):
        for j in range(k // i):
            v = ("v", i, j)
            V.append(v)
            for r in range(i):
                B.add_edge(v, U[(offset + j * i + r) % k])
        offset = (offset + (k // i) * i) % k
    return B, V, U


def gen_greedy_adversarial(k: int) -> MlpInstance:
    """3-MLP on which greedy picks sum_i floor(k/i) pairs while k suffice.

    Vertices of the bipartite graph become variables (V side first, so ties
    in the greedy count resolve towards V), plus one shared variable y.
    """
    B, V, U = adversarial_bipartite(k)
    pos = {x: i for i, x in enumerate(V + U)}
    y = len(pos)
    terms = [(1.0, (pos[a], pos[b], y)) for a, b in B.edges]
    return MlpInstance.from_terms(y + 1, terms)
