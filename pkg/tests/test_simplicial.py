import pytest

from symring.groups import INTEGERS, GeneratorMap
from symring.groupring import RingElement, transport, vectorize, window
from symring.ideals import exact_intersection_lattice
from symring.intlinalg import TruncatedLattice, lattice_membership
from symring.oracles import builtin
from symring.simplicial import (
    CircleLevel,
    SimplicialError,
    degeneracy_map,
    face_ideals,
    face_kernel_lattice,
    face_map,
    generator_quotient,
    homology_report,
    kernel_cross_validation,
    kernel_generators,
    level_context,
    moore_boundary_inner,
    moore_chain_lattice,
    moore_cycle_lattice,
    moore_data,
    verify_simplicial_identities,
    wu_face_consistency,
    wu_setup,
    y_basis,
    y_face_rule_check,
)

Z, Z2, S3 = INTEGERS, builtin("Z/2"), builtin("S3")


def test_circle_labels():
    c = CircleLevel(3)
    assert c.labels == ["*", "x0", "x1", "x2"]
    assert c.vertex_sequence(0) == (0, 1, 1, 1)


def test_face_examples():
    g = Z2.element("g1")
    n = 3
    # level n+1 has copies x_0..x_n
    assert face_map(Z2, n + 1, n + 1).apply(((n, g),)) == ()
    for j in range(1, n + 1):
        for i in range(j, n + 1):
            assert face_map(Z2, n + 1, j).apply(((i, g),)) == ((i - 1, g),)
    assert degeneracy_map(Z2, 1, 0).apply(((0, g),)) == ((1, g),)


def test_face_index_errors():
    with pytest.raises(SimplicialError):
        face_map(Z, 2, 3)
    with pytest.raises(SimplicialError):
        kernel_generators(Z, 2, 5)


@pytest.mark.parametrize("G", [Z, Z2, S3], ids=["Z", "Z/2", "S3"])
def test_identities_hold(G):
    rep = verify_simplicial_identities(G, 5)
    assert rep["ok"], rep["failures"]
    assert rep["checked"] > 0


def test_corrupted_face_detected():
    def bad(k, j):
        if (k, j) == (3, 1):
            return face_map(Z2, 3, 2)
        return face_map(Z2, k, j)

    rep = verify_simplicial_identities(Z2, 4, face=bad)
    assert not rep["ok"] and rep["failures"]


def test_identities_need_level_two():
    with pytest.raises(SimplicialError):
        verify_simplicial_identities(Z, 1)


def test_y_basis():
    for level in range(1, 6):
        assert y_basis(level).round_trip_ok()
        assert y_face_rule_check(level)
    yb = y_basis(2)
    y0 = yb.y_in_x.apply(((0, 1),))
    assert face_map(Z, 2, 1).apply(y0) == ()
    with pytest.raises(SimplicialError):
        y_basis(2, Z2)


def test_kernel_generator_shapes():
    k = 3
    assert set(kernel_generators(S3, k, 0).normal_generators) == {((0, g),) for g in S3.non_identity()}
    gens = kernel_generators(S3, k, 2).normal_generators
    assert set(gens) == {((1, S3.inv(g)), (2, g)) for g in S3.non_identity()}
    # Milnor: ker ∂_i = <y_{i-1}> after the basis change
    yb = y_basis(3)
    for i in range(1, 4):
        y = yb.y_in_x.apply(((i - 1, 1),))
        assert face_map(Z, 3, i).apply(y) == ()


def test_generator_quotient_matches_face_kernel():
    for G in (Z, Z2):
        for k in range(1, 4):
            for j in range(k + 1):
                q = generator_quotient(G, k, kernel_generators(G, k, j).normal_generators)
                for w in level_context(G, k).ball(3):
                    assert (q.apply(w) == ()) == (face_map(G, k, j).apply(w) == ())


@pytest.mark.parametrize("G", [Z, Z2, S3], ids=["Z", "Z/2", "S3"])
def test_kernel_cross_validation(G):
    for k in range(1, 5):
        for j in range(k + 1):
            for L in range(4):
                assert kernel_cross_validation(G, k, j, L), (k, j, L)


def test_face_kernel_rank():
    win = window(level_context(Z2, 2), 2)
    K = face_kernel_lattice(Z2, 2, 0, 2)
    images = {face_map(Z2, 2, 0).apply(w) for w in win.words}
    assert K.rank == len(win) - len(images)


def test_milnor_level1_cycles():
    L = 4
    Zc = moore_cycle_lattice(Z, 1, L)
    win = window(level_context(Z, 1), L)
    aug0 = TruncatedLattice.from_rows(win, [[1 if i == k else (-1 if i == 0 else 0) for i in range(len(win))]
                                            for k in range(1, len(win))])
    assert Zc == aug0


def test_cycles_inside_chains():
    for G in (Z, Z2, S3):
        for k in (1, 2):
            for L in (1, 2):
                assert moore_chain_lattice(G, k, L).contains_lattice(moore_cycle_lattice(G, k, L))


def test_z2_cycles_are_triple_intersection():
    assert moore_cycle_lattice(Z2, 2, 3) == exact_intersection_lattice(face_ideals(Z2, 2, [0, 1, 2]), 3)


def test_boundaries_inside_cycles_and_monotone():
    for G, k in ((Z, 1), (Z2, 2), (Z, 2)):
        prev = None
        for M in (3, 4, 5):
            md = moore_data(G, k, 3, M)
            assert md.check()
            if prev is not None:
                assert md.boundaries.contains_lattice(prev)
            prev = md.boundaries
    with pytest.raises(SimplicialError):
        moore_boundary_inner(Z, 1, 3, 2)


def test_boundary_of_chain_lands_in_B():
    # (y_0 - 1)(y_1 - 1) is a level-2 chain; ∂_0 sends it to (x_0^-1 - 1)(x_0 - 1)
    yb = y_basis(2)
    X = yb.x_ctx
    y0, y1 = (yb.y_in_x.apply(((i, 1),)) for i in (0, 1))
    chain = RingElement.minus_one(X, y0) * RingElement.minus_one(X, y1)
    assert not transport(face_map(Z, 2, 1), chain)
    assert not transport(face_map(Z, 2, 2), chain)
    img = transport(face_map(Z, 2, 0), chain)
    C = level_context(Z, 1)
    assert img == RingElement.minus_one(C, ((0, -1),)) * RingElement.minus_one(C, ((0, 1),))
    B = moore_boundary_inner(Z, 1, 2, 2)
    assert lattice_membership(vectorize(img, window(C, 2)), B) is not None


def test_epimorphism_compatibility():
    g = Z2.element("g1")
    for k in (1, 2):
        src, tgt = level_context(Z, k), level_context(Z2, k)
        h = GeneratorMap(src, tgt, tuple(((i, g),) for i in range(k)))
        L, M = 3, 4
        Bf = moore_boundary_inner(Z, k, L, M)
        Bg = moore_boundary_inner(Z2, k, L, M)
        wf, wg = window(src, L), window(tgt, L)
        for row in Bf.basis:
            x = RingElement(src, {wf.words[i]: c for i, c in enumerate(row) if c})
            assert lattice_membership(vectorize(transport(h, x), wg), Bg) is not None


def test_homology_z2_level2_torsion():
    rep = homology_report(Z2, 2, [3], [3, 4, 5])
    assert rep.final(3).torsion == (2,) and rep.final(3).free_rank == 0
    w = rep.witness_classes["3"]
    assert w["order"] == 2 and w["absent_for_all_M"]


def test_homology_milnor_level1():
    rep = homology_report(Z, 1, [3], [3, 4, 5])
    assert rep.stable_invariants() == (1, ())


def test_wu_setup_shapes():
    Y, specs = wu_setup(1)
    assert Y.names == ("y0", "y1") and len(specs) == 3
    Y3, specs3 = wu_setup(2)
    assert Y3.rank == 3 and len(specs3) == 4
    for s in specs + specs3:
        assert s.subgroup().cross_validate()
    assert wu_face_consistency(1, Y.ball(4))
    assert wu_face_consistency(2, Y3.ball(3))
    with pytest.raises(SimplicialError):
        wu_setup(0)
