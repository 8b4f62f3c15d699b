import json
import random

import pytest

from symring.groups import FreeContext, GeneratorMap, GroupError, SubgroupSpec, symmetric_commutator_witness_exprs
from symring.groupring import RingElement, vectorize, window
from symring.ideals import (
    AugExpr,
    Certificate,
    FiniteCertificate,
    IdealRef,
    IdealSpec,
    PreconditionError,
    ProdExpr,
    QuotientCertificate,
    SaturationCertificate,
    ball_size,
    d_subgroup_test,
    default_quotient_schedule,
    exact_ideal_lattice,
    exact_intersection_lattice,
    find_certificate,
    finite_transport_ideal,
    hurewicz_class,
    lattice_membership,
    load_certificate,
    ordered_product_inner,
    q_invariants_report,
    relative_augmentation_check,
    saturation_certificate,
    saturation_verify,
    schreier_decompose,
    schreier_transversal,
    sym,
    symmetric_product_inner,
    transported_vector,
    witness_certificate,
)
from symring.intlinalg import TruncatedLattice, lattice_sum
from symring.oracles import builtin, commutator_subgroup, cyclic, subgroup_closure
from symring.simplicial import wu_setup

F = FreeContext.free("a b")
a, b = F.gen(0), F.gen(1)
ra = IdealSpec.killing(F, [0])
rb = IdealSpec.killing(F, [1])


def m1(w, ctx=F):
    return RingElement.minus_one(ctx, w)


def vec(x, L):
    return vectorize(x, window(x.ctx, L))


def mod2_specs():
    z2 = builtin("Z/2")
    r1 = IdealSpec("R1", (F.parse_word("a^2"), b), GeneratorMap.to_finite(F, z2, ["g1", "e"]))
    r2 = IdealSpec("R2", (F.parse_word("b^2"), a), GeneratorMap.to_finite(F, z2, ["e", "g1"]))
    return [r1, r2]


def pad(v, n):
    return list(v) + [0] * (n - len(v))


# exact lattices

def test_exact_ideal_small_window():
    E = exact_ideal_lattice(ra, 1)
    assert E.rank == 2
    want = TruncatedLattice.from_rows(window(F, 1), [vec(m1(a), 1), vec(m1(F.inv(a)), 1)])
    assert E == want


def test_exact_ideal_zero_window():
    assert exact_ideal_lattice(ra, 0).rank == 0


def test_exact_ideal_two_sided():
    x = RingElement.of(F, F.mul(b, a)) - RingElement.of(F, b)
    assert lattice_membership(vec(x, 2), exact_ideal_lattice(ra, 2)) is not None


def test_exact_intersection_examples():
    both = exact_intersection_lattice([ra, rb], 2)
    assert lattice_membership(vec(m1(a) * m1(b), 2), both) is not None
    assert lattice_membership(vec(m1(a), 2), both) is None
    assert exact_intersection_lattice([ra], 2) == exact_ideal_lattice(ra, 2)


def test_exact_intersection_methods_agree():
    specs = wu_setup(1)[1]
    assert exact_intersection_lattice(specs, 3, method="joint") == exact_intersection_lattice(specs, 3, method="fold")


# inner products

def test_ordered_product_examples():
    P = ordered_product_inner([ra, rb], 2, 2)
    assert lattice_membership(vec(m1(a) * m1(b), 2), P) is not None
    assert ordered_product_inner([ra, rb], 1, 1).rank == 0
    assert ordered_product_inner([ra], 1, 3) == exact_ideal_lattice(ra, 1)
    with pytest.raises(PreconditionError):
        ordered_product_inner([ra, rb], 3, 2)


def test_symmetric_is_sum_of_orderings():
    S = symmetric_product_inner([ra, rb], 3, 4)
    A = ordered_product_inner([ra, rb], 3, 4)
    B = ordered_product_inner([ra, rb], 3, 4, order=(1, 0))
    assert S == lattice_sum(A, B)


def test_symmetric_member_with_two_rows():
    x = m1(a) * m1(b) + m1(b) * m1(a)
    cert = find_certificate(x, [ra, rb], 2)
    assert cert is not None and cert.replay()
    assert len(cert.rows) == 2


def test_symmetric_identical_specs():
    S = symmetric_product_inner([ra, ra], 2, 3)
    assert S == ordered_product_inner([ra, ra], 2, 3)


def test_inner_monotone_in_M_and_L():
    specs = wu_setup(1)[1]
    prev = None
    for M in (3, 4, 5):
        cur = symmetric_product_inner(specs, 3, M)
        if prev is not None:
            assert cur.contains_lattice(prev)
        prev = cur
    small = symmetric_product_inner(specs, 2, 4)
    big = symmetric_product_inner(specs, 3, 4)
    n = len(window(specs[0].ctx, 3))
    # windows are prefixes of each other, so embedding pads with zeros
    for r in small.basis:
        assert lattice_membership(pad(r, n), big) is not None


def test_inner_inside_exact():
    specs = wu_setup(1)[1]
    for L, M in ((2, 3), (3, 5)):
        ex = exact_intersection_lattice(specs, L)
        assert ex.contains_lattice(symmetric_product_inner(specs, L, M, check=False))


# saturation

def test_saturation_two_blocks():
    q = saturation_verify([ra, rb], 2)
    assert q.saturated


def test_saturation_three_blocks():
    G = FreeContext.free("a b c")
    q = saturation_verify([IdealSpec.killing(G, [i]) for i in range(3)], 2)
    assert q.saturated


def test_saturation_rejects_overlap():
    T = FreeContext.free("a")
    rab = IdealSpec("<ab>", (F.parse_word("a b"),), GeneratorMap.from_words(F, T, ["a", "a^-1"]))
    with pytest.raises(PreconditionError):
        saturation_verify([ra, rab], 2)


def test_saturation_certificate_roundtrip():
    q = saturation_verify([ra, rb], 2)
    cert = saturation_certificate([ra, rb], 2, q.final_M[2])
    assert cert is not None and cert.replay()
    back = load_certificate(json.loads(json.dumps(cert.to_json())))
    assert isinstance(back, SaturationCertificate) and back.replay()
    data = cert.to_json()
    data["members"].pop()
    assert not load_certificate(data).replay()


def test_disjoint_quotient_vanishes():
    q = q_invariants_report([ra, rb], [2, 3])
    for L in (2, 3):
        f = q.final(L)
        assert f.saturated and f.free_rank == 0 and f.torsion == ()


# finite transport

def test_finite_transport_trivial_group():
    triv = cyclic(1)
    h = GeneratorMap.to_finite(F, triv, [0, 0])
    assert finite_transport_ideal(ProdExpr((IdealRef(0), IdealRef(1))), [ra, rb], h).rank == 0


def test_finite_transport_z2_square():
    z2 = builtin("Z/2")
    G1 = FreeContext.free("a")
    h = GeneratorMap.to_finite(G1, z2, ["g1"])
    lat = finite_transport_ideal(ProdExpr((AugExpr(), AugExpr())), [], h)
    # (h - 1)^2 = -2(h - 1): span{2(h - 1)}
    assert lat == TruncatedLattice.from_rows(2, [[-2, 2]])


def test_lemma21_instance_s3():
    s3 = builtin("S3")
    A3 = sorted(subgroup_closure(s3, [s3.element("c")]))
    cert = relative_augmentation_check(s3, A3)
    assert cert.replay()
    passing = {e["element"] for e in cert.entries if e["in"]}
    assert passing == {s3.identity} == commutator_subgroup(s3, A3)


def test_lemma21_abelian_z4():
    z4 = builtin("Z/4")
    cert = relative_augmentation_check(z4, range(4))
    assert {e["element"] for e in cert.entries if e["in"]} == {z4.identity}


def test_finite_certificate_tamper():
    q8 = builtin("Q8")
    cert = relative_augmentation_check(q8, range(8))
    data = cert.to_json()
    back = load_certificate(json.loads(json.dumps(data)))
    assert isinstance(back, FiniteCertificate) and back.replay()
    for e in data["entries"]:
        if e["in"] and e["combination"]:
            e["combination"][0][2] += 1
            break
    assert not load_certificate(data).replay()


def test_lemma21_rejects_non_normal():
    s3 = builtin("S3")
    with pytest.raises(PreconditionError):
        relative_augmentation_check(s3, [s3.identity, s3.element("t01")])


def test_finite_quotient_soundness():
    # members of the symmetric product must never be rejected by any quotient
    specs = mod2_specs()
    expr = sym(0, 1)
    rng = random.Random(1)
    inner = symmetric_product_inner(specs, 3, 4)
    win = window(F, 3)
    for name, h in default_quotient_schedule(F):
        image = finite_transport_ideal(expr, specs, h)
        for row in inner.basis:
            x = RingElement(F, {win.words[i]: c for i, c in enumerate(row) if c})
            assert transported_vector(h, x) in image, name
        for w in symmetric_commutator_witness_exprs([s.subgroup() for s in specs], 1, 30):
            assert transported_vector(h, m1(w.word)) in image
        # random combinations of members
        for _ in range(20):
            x = RingElement.zero(F)
            for row in rng.sample(inner.basis, min(3, len(inner.basis))):
                k = rng.randint(-3, 3)
                x = x + RingElement(F, {win.words[i]: k * c for i, c in enumerate(row) if c})
            assert transported_vector(h, x) in image


# D(F; I)

def test_d_commutator_in():
    v = d_subgroup_test(F.commutator(a, b), [ra, rb], M=4)
    assert v.verdict == "certified-in" and v.certificate.replay()


def test_d_square_out():
    specs = mod2_specs()
    v = d_subgroup_test(F.parse_word("a^2"), specs, M=0)
    assert v.verdict == "certified-out"
    assert isinstance(v.certificate, QuotientCertificate) and v.certificate.replay()
    back = load_certificate(json.loads(json.dumps(v.certificate.to_json())))
    assert back.replay()


def test_d_identity_in():
    v = d_subgroup_test((), [ra, rb], M=2)
    assert v.verdict == "certified-in" and v.certificate.rows == [] and v.certificate.replay()


def test_quotient_certificate_tamper():
    v = d_subgroup_test(F.parse_word("a^2"), mod2_specs(), M=0)
    data = v.certificate.to_json()
    data["functional"] = [0] * len(data["functional"])
    assert not load_certificate(data).replay()


# certificates

def test_certificate_replay_and_tamper():
    x = m1(a) * m1(b) + m1(b) * m1(a)
    cert = find_certificate(x, [ra, rb], 2)
    data = cert.to_json()
    assert Certificate.from_json(json.loads(json.dumps(data))).replay()
    data["combination"][0]["coeff"] += 1
    assert not Certificate.from_json(data).replay()
    with pytest.raises(ValueError):
        load_certificate({"schema": "nope"})


def test_witness_certificates_replay():
    specs = mod2_specs()
    for w in symmetric_commutator_witness_exprs([s.subgroup() for s in specs], 2, 40):
        assert witness_certificate(w, specs).replay()


# Hurewicz classes

def test_witness_classes_vanish():
    T = FreeContext.free("a")
    rab = IdealSpec("<ab>", (F.parse_word("a b"),), GeneratorMap.from_words(F, T, ["a", "a^-1"]))
    specs = [ra, rab]
    Y = F
    ws = symmetric_commutator_witness_exprs([s.subgroup() for s in specs], 1, 40)
    L, M = 4, 5
    ex = exact_intersection_lattice(specs, L)
    inner = symmetric_product_inner(specs, L, M, exact=ex)
    tested = 0
    for w in ws:
        if Y.norm(w.word) <= L:
            assert hurewicz_class(w.word, specs, L, M, ex, inner)["zero"]
            tested += 1
    assert tested >= 5
    assert hurewicz_class((), specs, L, M, ex, inner)["zero"]


def test_designated_class_nonzero():
    Y, specs = wu_setup(1)
    g = Y.commutator(Y.gen(0), Y.mul(Y.gen(0), Y.gen(1)))
    for M in (4, 5, 6):
        assert not hurewicz_class(g, specs, 4, M)["zero"]


def test_hurewicz_requires_membership():
    Y, specs = wu_setup(1)
    with pytest.raises(PreconditionError):
        hurewicz_class(Y.gen(0), specs, 2, 2)


# Schreier decomposition

def test_schreier_examples():
    z2 = builtin("Z/2")
    h = GeneratorMap.to_finite(F, z2, ["g1", "e"])
    T = {z2.identity: (), z2.element("g1"): a}
    assert schreier_decompose(b, h, T) == ((), b)
    assert schreier_decompose(F.mul(b, a), h, T) == (a, F.mul_many(F.inv(a), b, a))
    assert schreier_decompose(a, h, T) == (a, ())


def test_schreier_incomplete():
    z2 = builtin("Z/2")
    h = GeneratorMap.to_finite(F, z2, ["g1", "e"])
    with pytest.raises(PreconditionError):
        schreier_decompose(a, h, {z2.identity: ()})


def test_schreier_transversal_inside_subgroup():
    r1, r2 = mod2_specs()
    T = schreier_transversal(r2.projection, within=r1.projection)
    assert all(r1.projection.apply(t) == () for t in T.values())
    rng = random.Random(9)
    for _ in range(100):
        f = F.normalize([(rng.randrange(2), rng.choice((1, -1))) for _ in range(rng.randint(0, 6))])
        t, s = schreier_decompose(f, r2.projection, T, within=r1.projection)
        assert F.mul(t, s) == f and r2.projection.apply(s) == ()


# misc

def test_ball_size_counts():
    for ctx in (F, FreeContext.free("a b c"), wu_setup(2)[0]):
        for M in range(5):
            assert ball_size(ctx, M) == len(ctx.ball(M))
    from symring.simplicial import level_context

    C = level_context(builtin("S3"), 3)
    for M in range(4):
        assert ball_size(C, M) == len(C.ball(M))


def test_spec_rejects_surviving_generator():
    with pytest.raises(GroupError):
        IdealSpec("bad", (b,), ra.projection)


def test_from_subgroup_needs_both():
    with pytest.raises(PreconditionError):
        IdealSpec.from_subgroup(SubgroupSpec(F, (a,), None))
