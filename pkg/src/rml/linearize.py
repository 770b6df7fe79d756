"""Heuristic linearizations: sequential, greedy, and all-triples."""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Sequence

from .core import (
    DEFAULT_DEGREE_CAP,
    IndexSet,
    MlpInstance,
    Triple,
    TripleSet,
    build_universe,
    canonical_triple,
    index_key,
    triple_set,
)
from .errors import DegreeCapError


@dataclass(frozen=True)
class SeqPolicy:
    """How ``seq_linearize`` resolves the arbitrary pair choice.

    ``mode="order"`` follows a variable ordering (identity when ``order`` is
    None); ``mode="first_pair"`` walks monomials in input order and joins the
    two canonically smallest active sets.
    """

    mode: str = "order"
    order: tuple[int, ...] | None = None

    def ranks(self, n: int) -> list[int]:
        order = list(range(n)) if self.order is None else list(self.order)
        if sorted(order) != list(range(n)):
            raise ValueError("variable order must be a permutation of all variables")
        rank = [0] * n
        for pos, j in enumerate(order):
            rank[j] = pos
        return rank


@dataclass(frozen=True)
class GreedyTieBreak:
    rule: str = "canonical"
    seed: int = 0


class _ActiveSets:
    """Per-monomial active families A_i plus a reverse index set -> monomials."""

    def __init__(self, mlp: MlpInstance, cap: int):
        for mono in mlp.monomials:
            if mono.degree > cap:
                raise DegreeCapError(f"monomial of degree {mono.degree} exceeds degree cap {cap}")
        self.A: list[set[IndexSet]] = [{(j,) for j in mono.vars} for mono in mlp.monomials]
        self.holders: dict[IndexSet, set[int]] = {}
        for i, Ai in enumerate(self.A):
            for J in Ai:
                self.holders.setdefault(J, set()).add(i)

    def unfinished(self, i: int) -> bool:
        return len(self.A[i]) > 1

    def merge(self, J: IndexSet, K: IndexSet) -> tuple[Triple, list[int]]:
        """Replace {J, K} by J u K in every monomial holding both."""
        t = canonical_triple(J, K)
        touched = sorted(self.holders.get(J, set()) & self.holders.get(K, set()))
        for i in touched:
            self.A[i] -= {J, K}
            self.A[i].add(t.head)
            self.holders[J].discard(i)
            self.holders[K].discard(i)
            self.holders.setdefault(t.head, set()).add(i)
        return t, touched


def seq_linearize(
    mlp: MlpInstance, policy: SeqPolicy | None = None, cap: int = DEFAULT_DEGREE_CAP
) -> TripleSet:
    policy = policy or SeqPolicy()
    state = _ActiveSets(mlp, cap)
    T: set[Triple] = set()

    if policy.mode == "order":
        rank = policy.ranks(mlp.n)
        set_rank = lambda J: min(rank[j] for j in J)  # noqa: E731
        mono_order = sorted(
            range(mlp.m),
            key=lambda i: (sorted(rank[j] for j in mlp.monomials[i].vars), i),
        )
    elif policy.mode == "first_pair":
        set_rank = index_key
        mono_order = list(range(mlp.m))
    else:
        raise ValueError(f"unknown seq mode {policy.mode!r}")

    for i in mono_order:
        while state.unfinished(i):
            J, K = sorted(state.A[i], key=set_rank)[:2]
            t, _ = state.merge(J, K)
            T.add(t)
    return triple_set(T)


def _pair_key(J: IndexSet, K: IndexSet):
    a, b = (J, K) if index_key(J) <= index_key(K) else (K, J)
    return (index_key(a), index_key(b))


def greedy_linearize(
    mlp: MlpInstance, tie: GreedyTieBreak | None = None, cap: int = DEFAULT_DEGREE_CAP
) -> TripleSet:
    """Repeatedly join the pair of active sets shared by the most monomials."""
    tie = tie or GreedyTieBreak()
    if tie.rule not in ("canonical", "random"):
        raise ValueError(f"unknown tie-break rule {tie.rule!r}")
    rng = random.Random(tie.seed)
    state = _ActiveSets(mlp, cap)

    counts: dict[tuple, int] = {}
    pairs: dict[tuple, tuple[IndexSet, IndexSet]] = {}
    heap: list[tuple[int, tuple]] = []

    def bump(Ai: set[IndexSet], delta: int) -> None:
        members = sorted(Ai, key=index_key)
        for x in range(len(members)):
            for y in range(x + 1, len(members)):
                key = _pair_key(members[x], members[y])
                c = counts.get(key, 0) + delta
                counts[key] = c
                pairs[key] = (members[x], members[y])
                if c > 0:
                    heapq.heappush(heap, (-c, key))

    for Ai in state.A:
        bump(Ai, +1)

    T: set[Triple] = set()
    while heap:
        negc, key = heapq.heappop(heap)
        if counts.get(key, 0) != -negc or negc == 0:
            continue
        if tie.rule == "random":
            tied = [key]
            while heap and heap[0][0] == negc:
                _, other = heapq.heappop(heap)
                if counts.get(other, 0) == -negc and other not in tied:
                    tied.append(other)
            key = tied.pop(rng.randrange(len(tied)))
            for other in tied:
                heapq.heappush(heap, (negc, other))
        J, K = pairs[key]
        touched = sorted(state.holders.get(J, set()) & state.holders.get(K, set()))
        for i in touched:
            bump(state.A[i], -1)
        t, _ = state.merge(J, K)
        for i in touched:
            bump(state.A[i], +1)
        T.add(t)
    return triple_set(T)


def full_linearize(mlp: MlpInstance, cap: int = DEFAULT_DEGREE_CAP) -> TripleSet:
    return build_universe(mlp, cap).all


def parse_order(text: str, n: int) -> SeqPolicy:
    """Parse a 1-based comma-separated variable order such as ``3,4,1,2``."""
    order = tuple(int(tok) - 1 for tok in text.split(",") if tok.strip())
    policy = SeqPolicy("order", order)
    policy.ranks(n)
    return policy


def greedy_first_pair(mlp: MlpInstance) -> tuple[Sequence[int], int]:
    """The pair greedy would pick first and how many monomials contain it."""
    best = None
    for mono in mlp.monomials:
        for a in range(mono.degree):
            for b in range(a + 1, mono.degree):
                pair = (mono.vars[a], mono.vars[b])
                c = sum(1 for other in mlp.monomials if set(pair) <= set(other.vars))
                key = (-c, _pair_key((pair[0],), (pair[1],)))
                if best is None or key < best[0]:
                    best = (key, pair, c)
    if best is None:
        raise ValueError("instance has no monomial of degree >= 2")
    return best[1], best[2]
