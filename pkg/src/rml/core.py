"""Multilinear programs, index sets, triples and proper-triple-set checks.

Index sets are plain tuples of strictly increasing 0-based variable indices.
Text formats are 1-based.  Whenever ties must be broken, index sets are
ordered by length first and lexicographically second (see ``index_key``).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DegreeCapError,
    ImproperTripleSetError,
    InvalidPartitionError,
    ParseError,
)

IndexSet = tuple[int, ...]

DEFAULT_DEGREE_CAP = 10


def index_key(J: IndexSet) -> tuple[int, IndexSet]:
    return (len(J), J)


def make_index_set(indices: Iterable[int]) -> IndexSet:
    J = tuple(sorted(indices))
    if not J:
        raise ValueError("index set must be non-empty")
    if len(set(J)) != len(J):
        raise ValueError(f"repeated index in {J}")
    return J


class Domain(str, enum.Enum):
    UNITBOX = "unitbox"
    BINARY = "binary"


@dataclass(frozen=True)
class Monomial:
    coeff: float
    vars: IndexSet

    @property
    def degree(self) -> int:
        return len(self.vars)


@dataclass(frozen=True)
class MlpInstance:
    """min sum_i coeff_i * prod_{j in vars_i} x_j over the unit box or binary cube."""

    n: int
    domain: Domain
    monomials: tuple[Monomial, ...]

    @classmethod
    def from_terms(
        cls,
        n: int,
        terms: Iterable[tuple[float, Iterable[int]]],
        domain: Domain | str = Domain.UNITBOX,
    ) -> "MlpInstance":
        """Build a normalized instance: duplicate supports merged, zeros dropped.

        Terms keep the order in which their support first appears.
        """
        merged: dict[IndexSet, float] = {}
        for coeff, idx in terms:
            J = make_index_set(idx)
            if J[0] < 0 or J[-1] >= n:
                raise ValueError(f"index out of range in {J} for n={n}")
            merged[J] = merged.get(J, 0.0) + float(coeff)
        monos = tuple(Monomial(c, J) for J, c in merged.items() if c != 0.0)
        return cls(n, Domain(domain), monos)

    @property
    def m(self) -> int:
        return len(self.monomials)

    @property
    def max_degree(self) -> int:
        return max((mono.degree for mono in self.monomials), default=0)

    def used_variables(self) -> IndexSet:
        return tuple(sorted({j for mono in self.monomials for j in mono.vars}))

    def beta(self) -> dict[IndexSet, float]:
        return {mono.vars: mono.coeff for mono in self.monomials}

    def evaluate(self, x: Sequence[float]) -> float:
        total = 0.0
        for mono in self.monomials:
            p = mono.coeff
            for j in mono.vars:
                p *= x[j]
            total += p
        return total


@dataclass(frozen=True)
class Triple:
    tail1: IndexSet
    tail2: IndexSet
    head: IndexSet

    def tails(self) -> tuple[IndexSet, IndexSet]:
        return (self.tail1, self.tail2)

    def sort_key(self):
        return (index_key(self.head), index_key(self.tail1))

    def __str__(self) -> str:
        fmt = lambda J: ",".join(str(j + 1) for j in J)  # noqa: E731
        return f"{fmt(self.tail1)}|{fmt(self.tail2)}|{fmt(self.head)}"


TripleSet = tuple[Triple, ...]


def triple_set(triples: Iterable[Triple]) -> TripleSet:
    """Deduplicate and sort triples into canonical order."""
    return tuple(sorted(set(triples), key=Triple.sort_key))


def canonical_triple(a: Iterable[int], b: Iterable[int]) -> Triple:
    A, B = make_index_set(a), make_index_set(b)
    if set(A) & set(B):
        raise InvalidPartitionError(f"tails {A} and {B} overlap")
    if index_key(B) < index_key(A):
        A, B = B, A
    return Triple(A, B, tuple(sorted(A + B)))


def enumerate_monomial_triples(J: IndexSet, cap: int = DEFAULT_DEGREE_CAP) -> list[Triple]:
    """All triples whose head is a subset of ``J`` with at least two elements."""
    if len(J) > cap:
        raise DegreeCapError(f"monomial of degree {len(J)} exceeds degree cap {cap}")
    if len(J) < 2:
        return []
    out = []
    for k in range(2, len(J) + 1):
        for S in itertools.combinations(J, k):
            first, rest = S[0], S[1:]
            # A always holds S[0]; B = S \ A must stay non-empty.
            for r in range(0, len(rest)):
                for extra in itertools.combinations(rest, r):
                    A = (first,) + extra
                    B = tuple(j for j in rest if j not in extra)
                    out.append(canonical_triple(A, B))
    return sorted(out, key=Triple.sort_key)


def count_monomial_triples(s: int) -> int:
    return sum(math.comb(s, k) * (2 ** (k - 1) - 1) for k in range(2, s + 1))


@dataclass(frozen=True)
class TripleUniverse:
    all: TripleSet
    per_monomial: tuple[TripleSet, ...]
    index_sets: tuple[IndexSet, ...]
    position: dict = field(compare=False, repr=False)

    def index(self, t: Triple) -> int:
        return self.position[t]

    def __len__(self) -> int:
        return len(self.all)


def build_universe(mlp: MlpInstance, cap: int = DEFAULT_DEGREE_CAP) -> TripleUniverse:
    per_mono = []
    index_sets: set[IndexSet] = set()
    for mono in mlp.monomials:
        per_mono.append(tuple(enumerate_monomial_triples(mono.vars, cap)))
        for k in range(1, mono.degree + 1):
            index_sets.update(itertools.combinations(mono.vars, k))
    everything = triple_set(t for ts in per_mono for t in ts)
    return TripleUniverse(
        all=everything,
        per_monomial=tuple(per_mono),
        index_sets=tuple(sorted(index_sets, key=index_key)),
        position={t: i for i, t in enumerate(everything)},
    )


def _closure(T: Iterable[Triple], mlp: MlpInstance) -> dict[IndexSet, Triple | None]:
    """Derivability closure: maps each derivable set to the first triple deriving it."""
    derived: dict[IndexSet, Triple | None] = {(j,): None for j in range(mlp.n)}
    pending = sorted(set(T), key=Triple.sort_key)
    changed = True
    while changed and pending:
        changed = False
        rest = []
        for t in pending:
            if t.head in derived:
                continue
            if t.tail1 in derived and t.tail2 in derived:
                derived[t.head] = t
                changed = True
            else:
                rest.append(t)
        pending = rest
    return derived


def _targets(mlp: MlpInstance) -> list[IndexSet]:
    return [mono.vars for mono in mlp.monomials if mono.degree > 1]


def proper_witness(T: Iterable[Triple], mlp: MlpInstance) -> TripleSet | None:
    """Return a minimal subset satisfying both proper-set conditions, or None."""
    derived = _closure(T, mlp)
    targets = _targets(mlp)
    if any(J not in derived for J in targets):
        return None
    keep: set[Triple] = set()
    stack = list(targets)
    while stack:
        J = stack.pop()
        t = derived[J]
        if t is None or t in keep:
            continue
        keep.add(t)
        stack.extend(S for S in t.tails() if len(S) > 1)
    return triple_set(keep)


def derivations(T: Iterable[Triple], mlp: MlpInstance) -> list[TripleSet] | None:
    """Per monomial, the triples of ``T`` that build its support (None if improper)."""
    derived = _closure(T, mlp)
    out = []
    for mono in mlp.monomials:
        if mono.degree < 2:
            out.append(())
            continue
        if mono.vars not in derived:
            return None
        used: list[Triple] = []
        stack = [mono.vars]
        while stack:
            t = derived[stack.pop()]
            if t is None:
                continue
            used.append(t)
            stack.extend(S for S in t.tails() if len(S) > 1)
        out.append(triple_set(used))
    return out


def is_proper(T: Iterable[Triple], mlp: MlpInstance) -> bool:
    derived = _closure(T, mlp)
    return all(J in derived for J in _targets(mlp))


def minimal_support(T: Iterable[Triple], mlp: MlpInstance) -> TripleSet:
    witness = proper_witness(T, mlp)
    if witness is None:
        raise ImproperTripleSetError("triple set is not proper")
    return witness


def count_variables(T: Iterable[Triple], mlp: MlpInstance) -> int:
    return len(mlp.used_variables()) + len({t.head for t in T})


def eta(mlp: MlpInstance) -> float:
    return -sum(min(0.0, mono.coeff) for mono in mlp.monomials)


# --- text formats -----------------------------------------------------------


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_instance(text: str) -> MlpInstance:
    lines = [(no, _strip(raw)) for no, raw in enumerate(text.splitlines(), start=1)]
    lines = [(no, s) for no, s in lines if s]
    if not lines:
        raise ParseError("empty instance")
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 3:
        raise ParseError("header must be '<n> <m> <domain>'", no)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError("n and m must be integers", no) from None
    try:
        domain = Domain(parts[2].lower())
    except ValueError:
        raise ParseError(f"unknown domain {parts[2]!r}", no) from None
    if n < 0 or m < 0:
        raise ParseError("n and m must be non-negative", no)
    body = lines[1:]
    if len(body) != m:
        raise ParseError(f"expected {m} monomial lines, found {len(body)}", no)
    terms = []
    for no, s in body:
        tok = s.split()
        if len(tok) < 2:
            raise ParseError("monomial line needs a coefficient and at least one index", no)
        try:
            coeff = float(tok[0])
            idx = [int(x) for x in tok[1:]]
        except ValueError:
            raise ParseError("malformed number", no) from None
        if len(set(idx)) != len(idx):
            raise ParseError("repeated index within one monomial", no)
        if min(idx) < 1 or max(idx) > n:
            raise ParseError(f"index out of range 1..{n}", no)
        terms.append((coeff, [j - 1 for j in idx]))
    return MlpInstance.from_terms(n, terms, domain)


def format_coeff(c: float) -> str:
    if float(c).is_integer() and abs(c) < 1e15:
        return str(int(c))
    return repr(float(c))


def write_instance(mlp: MlpInstance) -> str:
    out = [f"{mlp.n} {mlp.m} {mlp.domain.value}"]
    for mono in mlp.monomials:
        out.append(" ".join([format_coeff(mono.coeff)] + [str(j + 1) for j in mono.vars]))
    return "\n".join(out) + "\n"


def write_triples(T: Iterable[Triple]) -> str:
    return "".join(f"{t}\n" for t in triple_set(T))


def parse_triples(text: str) -> TripleSet:
    triples = []
    for no, raw in enumerate(text.splitlines(), start=1):
        s = _strip(raw)
        if not s:
            continue
        groups = s.split("|")
        if len(groups) != 3:
            raise ParseError("triple line must be 'tail1|tail2|head'", no)
        try:
            a, b, h = ([int(x) - 1 for x in g.split(",")] for g in groups)
        except ValueError:
            raise ParseError("malformed index", no) from None
        try:
            t = canonical_triple(a, b)
        except (InvalidPartitionError, ValueError) as exc:
            raise ParseError(str(exc), no) from None
        if t.head != tuple(sorted(h)):
            raise ParseError("head is not the union of the tails", no)
        triples.append(t)
    return triple_set(triples)
