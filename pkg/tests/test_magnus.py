import pytest
from hypothesis import given
from hypothesis import strategies as st

from symring.groups import FreeContext, GroupError
from symring.magnus import (
    AtLeast,
    TruncSeries,
    augmentation_power_exact,
    augmentation_power_inner,
    gamma_degree,
    magnus_image,
    ts_multiply,
)
from symring.oracles import builtin
from symring.simplicial import level_context

from .oracle import basic_commutators, evaluate_bracket

F = FreeContext.free("x y")
x, y = F.gen(0), F.gen(1)


def words(rank=2, max_len=6):
    syl = st.tuples(st.integers(0, rank - 1), st.integers(-2, 2).filter(bool))
    return st.lists(syl, max_size=max_len)


def test_ts_multiply_examples():
    one_plus_x = TruncSeries(1, 2, {(): 1, (0,): 1})
    inv = TruncSeries(1, 2, {(): 1, (0,): -1, (0, 0): 1})
    assert ts_multiply(one_plus_x, inv, 2).terms == {(): 1}
    X, Y = TruncSeries.variable(2, 3, 0), TruncSeries.variable(2, 3, 1)
    assert (X * Y).terms == {(0, 1): 1} and (Y * X).terms == {(1, 0): 1}
    assert not (X * TruncSeries.zero(2, 3)).terms
    with pytest.raises(ValueError):
        ts_multiply(X, TruncSeries.one(3, 3), 3)


def test_series_invariants():
    with pytest.raises(ValueError):
        TruncSeries(1, 1, {(0, 0): 1})
    with pytest.raises(ValueError):
        TruncSeries(1, 1, {(0,): 0})


def test_magnus_examples():
    assert magnus_image(x, 1, F).terms == {(): 1, (0,): 1}
    assert magnus_image(F.commutator(x, y), 2, F).terms == {(): 1, (0, 1): 1, (1, 0): -1}
    assert magnus_image(F.mul(x, F.inv(x)), 4, F).terms == {(): 1}
    assert magnus_image(F.commutator(x, y), 2, F).format(["X", "Y"]) == "1 + XY - YX"


def test_magnus_needs_free_context():
    with pytest.raises(GroupError):
        magnus_image((), 2, level_context(builtin("Z/2"), 2))


def test_gamma_examples():
    assert gamma_degree(x, 6, F) == 1
    assert gamma_degree(F.commutator(x, y), 6, F) == 2
    assert gamma_degree(F.commutator(F.commutator(x, y), y), 6, F) == 3
    top = gamma_degree((), 6, F)
    assert isinstance(top, AtLeast) and top == 7 and str(top) == ">=7"


@given(words(), words(), st.integers(1, 5))
def test_homomorphism(u, v, c):
    u, v = F.normalize(u), F.normalize(v)
    assert magnus_image(F.mul(u, v), c, F).terms == (magnus_image(u, c, F) * magnus_image(v, c, F)).terms


@given(words(max_len=4), words(max_len=4))
def test_commutator_filtration(u, v):
    u, v = F.normalize(u), F.normalize(v)
    cmax = 6
    g = gamma_degree(F.commutator(u, v), cmax, F)
    assert g >= min(gamma_degree(u, cmax, F) + gamma_degree(v, cmax, F), cmax + 1)


def test_basic_commutator_counts():
    # Witt's formula: 2, 1, 2, 3, 6 basic commutators of weights 1..5 in rank 2
    bw = basic_commutators(2, 5)
    assert [len(bw[n]) for n in range(1, 6)] == [2, 1, 2, 3, 6]
    assert [len(basic_commutators(3, 4)[n]) for n in range(1, 5)] == [3, 3, 8, 18]


def test_basic_commutators_have_exact_degree():
    G = FreeContext.free("x y z")
    for n, cs in basic_commutators(3, 4).items():
        for c in cs:
            assert gamma_degree(evaluate_bracket(c, G), 6, G) == n


def test_inner_matches_exact_small_window():
    for n in (2, 3, 4):
        assert augmentation_power_inner(F, n, 4, 6) == augmentation_power_exact(F, n, 4)


def test_inner_grows_with_M():
    a = augmentation_power_inner(F, 2, 3, 3)
    b = augmentation_power_inner(F, 2, 3, 5)
    assert b.contains_lattice(a)
