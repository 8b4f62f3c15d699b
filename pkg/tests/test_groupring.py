import pytest
from hypothesis import given
from hypothesis import strategies as st

from symring.groups import ContextMismatch, FreeContext, GeneratorMap
from symring.groupring import (
    RingElement,
    RingSyntaxError,
    SupportEscape,
    augmentation,
    devectorize,
    format_element,
    parse_element,
    re_add,
    re_mul,
    re_scale,
    transport,
    vectorize,
    window,
)
from symring.oracles import builtin
from symring.simplicial import face_map, level_context, y_basis

F = FreeContext.free("a b")
a, b = F.gen(0), F.gen(1)
ONE = RingElement.one(F)


def E(text, ctx=F):
    return parse_element(text, ctx)


def m1(w, ctx=F):
    return RingElement.minus_one(ctx, w)


def elements(ctx=F, max_terms=4, max_len=4):
    syl = st.tuples(st.integers(0, ctx.rank - 1), st.integers(-2, 2).filter(bool))
    word = st.lists(syl, max_size=max_len).map(ctx.normalize)
    return st.dictionaries(word, st.integers(-5, 5), max_size=max_terms).map(lambda d: RingElement(ctx, d))


def test_add_and_scale():
    assert not re_add(m1(a), re_scale(-1, m1(a)))
    assert re_scale(2, m1(a)) == E("2*[a] - 2*[]")
    assert re_add(m1(a), m1(b)) == E("1*[a] + 1*[b] - 2*[]")


def test_mul_examples():
    assert re_mul(m1(a), m1(b)) == E("1*[a b] - 1*[a] - 1*[b] + 1*[]")
    assert re_mul(m1(a), m1(F.inv(a))) == E("2*[] - 1*[a] - 1*[a^-1]")


def test_mul_in_free_product_of_z2():
    z2 = builtin("Z/2")
    C = level_context(z2, 2)
    x0 = m1(((0, z2.element("g1")),), C)
    # x0^2 = 1 gives (x0 - 1)^2 = 2 - 2 x0
    assert x0 * x0 == E("2*[] - 2*[g1@0]", C)


def test_context_mismatch():
    G = FreeContext.free("a b c")
    with pytest.raises(ContextMismatch):
        re_add(m1(a), RingElement.one(G))


def test_augmentation_examples():
    assert augmentation(E("3*[a] - 2*[b] - 1*[]")) == 0
    assert augmentation(m1(F.parse_word("a b^-1 a"))) == 0
    assert augmentation(re_scale(5, ONE)) == 5


def test_transport_examples():
    T = FreeContext.free("b")
    pa = GeneratorMap.relabel(F, T, [None, 0])
    assert not transport(pa, re_mul(m1(a), m1(b)))
    x = E("3*[a b] - 1*[b^-2]")
    assert transport(GeneratorMap.identity(F), x) == x


def test_transport_kills_y0_under_d1():
    # ∂_1 y_0 = 1 at Milnor level 2
    yb = y_basis(2)
    X = yb.x_ctx
    y0 = yb.y_in_x.apply(((0, 1),))
    d1 = face_map(builtin("Z"), 2, 1)
    assert not transport(d1, m1(y0, X))


def test_vectorize_examples():
    win = window(F, 2)
    assert vectorize(RingElement.zero(F), win) == [0] * len(win)
    with pytest.raises(SupportEscape):
        vectorize(m1(F.parse_word("a b")), window(F, 1))


@given(elements(max_len=2))
def test_vectorize_roundtrip(x):
    win = window(F, 4)
    assert devectorize(vectorize(x, win), win) == x


@given(elements(), elements())
def test_vectorize_linear(x, y):
    win = window(F, 8)
    vx, vy = vectorize(x, win), vectorize(y, win)
    assert vectorize(x + y, win) == [p + q for p, q in zip(vx, vy)]


def test_parse_format():
    x = E("1*[a b] - 1*[a] - 1*[b] + 1*[]")
    assert x == re_mul(m1(a), m1(b))
    assert E(format_element(x)) == x
    perm = E("- 1*[b] + 1*[] + 1*[a b] - 1*[a]")
    assert format_element(perm) == format_element(x)
    z2 = builtin("Z/2")
    C = level_context(z2, 1)
    y = E("2*[g1@0]", C)
    assert y.terms == {((0, 1),): 2}


def test_parse_error_position():
    with pytest.raises(RingSyntaxError) as info:
        E("1*[a] + 2[b]")
    assert info.value.pos == 8
    with pytest.raises(RingSyntaxError):
        E("1*[a] 1*[b]")


@given(elements())
def test_format_parse_roundtrip(x):
    assert E(format_element(x)) == x


@given(elements(), elements(), elements())
def test_ring_axioms(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert (x + y) * z == x * z + y * z
    assert x * ONE == x == ONE * x
    assert x + y == y + x


@given(elements(), elements())
def test_augmentation_multiplicative(x, y):
    assert augmentation(x * y) == augmentation(x) * augmentation(y)


@given(elements(), elements())
def test_transport_ring_hom(x, y):
    G = FreeContext.free("x y z")
    m = GeneratorMap.from_words(F, G, ["x y^-1", "z x^2"])
    assert transport(m, x * y) == transport(m, x) * transport(m, y)
    assert transport(m, x + y) == transport(m, x) + transport(m, y)


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(-2, 2).filter(bool)), max_size=6))
def test_kernel_elements_die(raw):
    # g in ker h  =>  transport(h, g - 1) = 0
    z2 = builtin("Z/2")
    h = GeneratorMap.to_finite(F, z2, ["g1", "e"])
    g = F.normalize(raw)
    g = F.mul(g, F.power(a, -sum(e for i, e in g if i == 0) % 2))
    assert h.apply(g) == ()
    assert not transport(h, m1(g))


def test_zero_coefficients_pruned():
    x = RingElement(F, {a: 0, b: 2})
    assert x.terms == {b: 2}
