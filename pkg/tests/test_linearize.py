import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rml import (
    GreedyTieBreak,
    MlpInstance,
    SeqPolicy,
    full_linearize,
    greedy_linearize,
    is_proper,
    seq_linearize,
)
from rml.core import build_universe
from rml.instances import gen_mult, gen_vision
from rml.linearize import greedy_first_pair, parse_order


def test_seq_identity_order(cubics, order_1234):
    assert set(seq_linearize(cubics, SeqPolicy())) == set(order_1234)


def test_seq_order_3412(cubics, order_3412):
    assert set(seq_linearize(cubics, parse_order("3,4,1,2", 4))) == set(order_3412)


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_seq_single_monomial(d):
    mlp = MlpInstance.from_terms(d, [(1, range(d))])
    assert len(seq_linearize(mlp)) == d - 1
    assert len(seq_linearize(mlp, SeqPolicy("first_pair"))) == d - 1


def test_parse_order_rejects_non_permutation():
    with pytest.raises(ValueError):
        parse_order("1,1,2,3", 4)


def test_greedy_shared_pair():
    mlp = MlpInstance.from_terms(4, [(1, (0, 1, 2)), (1, (0, 1, 3))])
    T = greedy_linearize(mlp)
    assert len(T) == 3
    assert {str(t) for t in T} == {"1|2|1,2", "3|1,2|1,2,3", "4|1,2|1,2,4"}
    assert greedy_first_pair(mlp) == ((0, 1), 2)


def test_greedy_single_cubic():
    assert len(greedy_linearize(MlpInstance.from_terms(3, [(2, (0, 1, 2))]))) == 2


def test_full_is_universe(cubics):
    assert full_linearize(cubics) == build_universe(cubics).all
    assert len(full_linearize(MlpInstance.from_terms(2, [(1, (0, 1))]))) == 1
    disjoint = MlpInstance.from_terms(6, [(1, (0, 1, 2)), (1, (3, 4, 5))])
    assert len(full_linearize(disjoint)) == 12


def test_greedy_vision_not_minimal():
    # every 2x2 block of g = 3 needs 7 triples at best (28 total); greedy overshoots
    assert len(greedy_linearize(gen_vision(3, 0))) > 28


def _recount_first_pair(mlp):
    counts = {}
    for m in mlp.monomials:
        for p in itertools.combinations(m.vars, 2):
            counts[p] = counts.get(p, 0) + 1
    return max(counts.values())


@settings(max_examples=80, deadline=None)
@given(
    st.integers(4, 9),
    st.integers(1, 12),
    st.integers(2, 4),
    st.integers(0, 100_000),
    st.sampled_from(["seq", "first", "greedy", "random"]),
)
def test_outputs_proper_and_deterministic(n, m, d, seed, how):
    d = min(d, n)
    m = min(m, math.comb(n, d))
    mlp = gen_mult(n, m, d, seed)
    run = {
        "seq": lambda: seq_linearize(mlp, SeqPolicy("order", tuple(reversed(range(n))))),
        "first": lambda: seq_linearize(mlp, SeqPolicy("first_pair")),
        "greedy": lambda: greedy_linearize(mlp),
        "random": lambda: greedy_linearize(mlp, GreedyTieBreak("random", seed)),
    }[how]
    T = run()
    assert is_proper(T, mlp)
    assert run() == T
    assert _recount_first_pair(mlp) == greedy_first_pair(mlp)[1]
