"""The simplicial circle, Carlsson and Milnor constructions, and Moore homology.

Level k of F^G(S^1) is the free product of k copies of G, labelled
x_0, ..., x_{k-1}; the copy x_i is the non-basepoint simplex with i+1 zeros
in the monotone-map model of Δ[1]/∂Δ[1].  The Milnor construction is the
case G = Z, where level k is the free group on x_0, ..., x_{k-1}.

Faces ∂_j : level k -> level k-1 send x_i to x_i (i < j) or x_{i-1} (i >= j),
where x_{-1} and x_{k-1} collapse to the basepoint.  Degeneracies
s_j : level k -> level k+1 send x_i to x_{i+1} (j <= i) or x_i (j > i).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, lcm
from functools import lru_cache
from typing import Callable, Sequence

from .groups import INTEGERS, FreeContext, GeneratorMap, GroupOracle, SubgroupSpec, Word
from .groupring import RingElement, window
from .ideals import (
    IdealSpec,
    QReport,
    ContainmentError,
    _qrow,
    _sparse_to_lattice,
    ball_size,
    class_coordinates,
    default_M_schedule,
    exact_intersection_lattice,
    find_certificate,
    max_cells,
    symmetric_product_inner,
)
from .intlinalg import TruncatedLattice, lattice_membership, smith_form, sparse_insert, sparse_kernel


class SimplicialError(ValueError):
    pass


@dataclass(frozen=True)
class CircleLevel:
    """Simplices of S^1 = Δ[1]/∂Δ[1] in dimension n: the basepoint and x_0..x_{n-1}."""

    n: int

    @property
    def labels(self) -> list[str]:
        return ["*"] + [f"x{i}" for i in range(self.n)]

    def vertex_sequence(self, i: int) -> tuple:
        """Monotone sequence of x_i: i+1 zeros then ones (length n+1)."""
        return (0,) * (i + 1) + (1,) * (self.n - i)


@lru_cache(maxsize=None)
def level_context(G: GroupOracle, k: int) -> FreeContext:
    if k < 0:
        raise SimplicialError("negative level")
    return FreeContext.free_product(G, k, prefix="x")


@dataclass(frozen=True)
class SGLevel:
    G: GroupOracle
    k: int

    @property
    def ctx(self) -> FreeContext:
        return level_context(self.G, self.k)


def face_rule(k: int, j: int) -> list:
    if not 0 <= j <= k:
        raise SimplicialError(f"face index {j} out of range for level {k}")
    rule = []
    for i in range(k):
        t = i if i < j else i - 1
        rule.append(t if 0 <= t < k - 1 else None)
    return rule


def degeneracy_rule(k: int, j: int) -> list:
    if not 0 <= j <= k:
        raise SimplicialError(f"degeneracy index {j} out of range for level {k}")
    return [i + 1 if j <= i else i for i in range(k)]


@lru_cache(maxsize=None)
def face_map(G: GroupOracle, k: int, j: int) -> GeneratorMap:
    if k < 1:
        raise SimplicialError("faces start at level 1")
    return GeneratorMap.relabel(level_context(G, k), level_context(G, k - 1), face_rule(k, j))


@lru_cache(maxsize=None)
def degeneracy_map(G: GroupOracle, k: int, j: int) -> GeneratorMap:
    return GeneratorMap.relabel(level_context(G, k), level_context(G, k + 1), degeneracy_rule(k, j))


# ---------------------------------------------------------------------------
# identities


def _generators(ctx: FreeContext) -> list[Word]:
    out = []
    for i, o in enumerate(ctx.oracles):
        if o.kind == "integers":
            out.append(((i, 1),))
        else:
            out.extend(((i, a),) for a in o.non_identity())
    return out


def verify_simplicial_identities(G: GroupOracle, bound: int,
                                 face: Callable | None = None,
                                 degeneracy: Callable | None = None) -> dict:
    """Check every simplicial identity on all generators of levels <= bound.

    ``face``/``degeneracy`` override the maps (used for negative controls).
    """
    if bound < 2:
        raise SimplicialError("level bound must be at least 2")
    d = face or (lambda k, j: face_map(G, k, j))
    s = degeneracy or (lambda k, j: degeneracy_map(G, k, j))
    failures = []
    checked = 0

    def check(name, k, lhs, rhs):
        nonlocal checked
        for w in _generators(level_context(G, k)):
            checked += 1
            a, b = lhs(w), rhs(w)
            if a != b:
                failures.append({"identity": name, "level": k, "generator": level_context(G, k).format_word(w)})
                return

    for k in range(2, bound + 1):
        for j in range(k + 1):
            for i in range(j):
                check(f"d{i} d{j} = d{j - 1} d{i}", k,
                      lambda w: d(k - 1, i).apply(d(k, j).apply(w)),
                      lambda w: d(k - 1, j - 1).apply(d(k, i).apply(w)))
    for k in range(1, bound):
        for j in range(k + 1):
            for i in range(k + 2):
                if i < j:
                    rhs = (lambda w, i=i, j=j: s(k - 1, j - 1).apply(d(k, i).apply(w)))
                    name = f"d{i} s{j} = s{j - 1} d{i}"
                elif i in (j, j + 1):
                    rhs = (lambda w: w)
                    name = f"d{i} s{j} = id"
                else:
                    rhs = (lambda w, i=i, j=j: s(k - 1, j).apply(d(k, i - 1).apply(w)))
                    name = f"d{i} s{j} = s{j} d{i - 1}"
                check(name, k, lambda w, i=i, j=j: d(k + 1, i).apply(s(k, j).apply(w)), rhs)
        for j in range(k + 1):
            for i in range(j + 1):
                check(f"s{i} s{j} = s{j + 1} s{i}", k,
                      lambda w, i=i, j=j: s(k + 1, i).apply(s(k, j).apply(w)),
                      lambda w, i=i, j=j: s(k + 1, j + 1).apply(s(k, i).apply(w)))
    return {"oracle": G.name, "bound": bound, "checked": checked, "ok": not failures, "failures": failures}


# ---------------------------------------------------------------------------
# Milnor y-basis


@dataclass(frozen=True)
class YBasis:
    """Basis change at Milnor level n+1: y_i = x_i x_{i+1}^-1 (i < n), y_n = x_n."""

    x_ctx: FreeContext
    y_ctx: FreeContext
    y_in_x: GeneratorMap  # F(y) -> F(x)
    x_in_y: GeneratorMap  # F(x) -> F(y)

    def round_trip_ok(self) -> bool:
        for w in _generators(self.y_ctx):
            if self.x_in_y.apply(self.y_in_x.apply(w)) != w:
                return False
        for w in _generators(self.x_ctx):
            if self.y_in_x.apply(self.x_in_y.apply(w)) != w:
                return False
        return True


@lru_cache(maxsize=None)
def y_context(n_plus_1: int) -> FreeContext:
    return FreeContext.free([f"y{i}" for i in range(n_plus_1)])


def y_basis(level: int, G: GroupOracle = INTEGERS) -> YBasis:
    if G.kind != "integers":
        raise SimplicialError("the y-basis is defined for the Milnor construction (integers oracle)")
    if level < 1:
        raise SimplicialError("y-basis needs level >= 1")
    n = level - 1
    X = level_context(INTEGERS, level)
    Y = y_context(level)
    y_imgs = [X.mul(((i, 1),), ((i + 1, -1),)) for i in range(n)] + [((n, 1),)]
    x_imgs = [tuple((t, 1) for t in range(i, n + 1)) for i in range(n + 1)]
    return YBasis(X, Y, GeneratorMap(Y, X, tuple(y_imgs)), GeneratorMap(X, Y, tuple(x_imgs)))


def y_face_rule_check(level: int) -> bool:
    """∂_j y_k = y_{k-1} (j <= k, y_{-1} = x_0^-1), 1 (j = k+1), y_k (j > k+1)."""
    yb = y_basis(level)
    n = level - 1
    lower = y_basis(level - 1) if level >= 2 else None
    Xl = level_context(INTEGERS, level - 1)
    for j in range(level + 1):
        d = face_map(INTEGERS, level, j)
        for k in range(n + 1):
            img = d.apply(yb.y_in_x.apply(((k, 1),)))
            if j <= k:
                if k == 0:
                    expect = Xl.inv(((0, 1),)) if level >= 2 else ()
                else:
                    expect = lower.y_in_x.apply(((k - 1, 1),))
            elif j == k + 1:
                expect = ()
            else:
                expect = lower.y_in_x.apply(((k, 1),)) if lower else ()
            if img != expect:
                return False
    return True


# ---------------------------------------------------------------------------
# kernels


def _face_generators(G: GroupOracle, k: int, j: int) -> tuple:
    els = list(G.non_identity()) if G.is_finite else [1]
    if j == 0:
        return tuple(((0, g),) for g in els)
    if j == k:
        return tuple(((k - 1, g),) for g in els)
    ctx = level_context(G, k)
    return tuple(ctx.mul(((j - 1, G.inv(g)),), ((j, g),)) for g in els)


def kernel_generators(G: GroupOracle, k: int, j: int) -> SubgroupSpec:
    """ker ∂_j at level k with normal generators and the face as kernel map."""
    if not 0 <= j <= k or k < 1:
        raise SimplicialError(f"invalid face ({k}, {j})")
    spec = SubgroupSpec(level_context(G, k), _face_generators(G, k, j), face_map(G, k, j), f"R[{k},{j}]")
    if not spec.cross_validate():
        raise SimplicialError(f"normal generators of R[{k},{j}] survive the face")
    return spec


@lru_cache(maxsize=None)
def face_ideal(G: GroupOracle, k: int, j: int) -> IdealSpec:
    return IdealSpec.from_subgroup(kernel_generators(G, k, j))


def face_ideals(G: GroupOracle, k: int, faces: Sequence[int]) -> list[IdealSpec]:
    return [face_ideal(G, k, j) for j in faces]


def generator_quotient(G: GroupOracle, k: int, gens: Sequence[Word]) -> GeneratorMap:
    """Quotient map of level k by the normal closure of ``gens``, read off the generators.

    Accepts the two shapes that occur as face kernels: every g(x_i) (kills
    copy i) and every g(x_a)^-1 g(x_b) (merges copy b into copy a).  Built
    without reference to the face formulas, so it cross-checks them.
    """
    ctx = level_context(G, k)
    els = set(G.non_identity()) if G.is_finite else {1}
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            i = parent[i]
        return i

    killed = set()
    single: dict = {}
    pairs: dict = {}
    for w in gens:
        if len(w) == 1:
            single.setdefault(w[0][0], set()).add(w[0][1])
        elif len(w) == 2 and w[0][1] == G.inv(w[1][1]):
            pairs.setdefault((w[0][0], w[1][0]), set()).add(w[1][1])
        else:
            raise SimplicialError(f"unsupported normal generator {ctx.format_word(w)}")
    for i, vals in single.items():
        if vals != els:
            raise SimplicialError(f"generators do not exhaust copy {i}")
        killed.add(i)
    for (i, j), vals in pairs.items():
        if vals != els:
            raise SimplicialError(f"generators do not identify copies {i} and {j}")
        a, b = find(i), find(j)
        parent[max(a, b)] = min(a, b)
    dead = {find(i) for i in killed}
    roots = sorted({find(i) for i in range(k)} - dead)
    target = level_context(G, len(roots))
    rule = [None if find(i) in dead else roots.index(find(i)) for i in range(k)]
    return GeneratorMap.relabel(ctx, target, rule)


def face_kernel_lattice(G: GroupOracle, k: int, j: int, L: int) -> TruncatedLattice:
    """ker(∂_j) on the L-window by integer elimination on the face matrix."""
    from .ideals import kernel_lattice

    win = window(level_context(G, k), L)
    d = face_map(G, k, j)
    return kernel_lattice([{d.apply(w): 1} for w in win.words], win)


def kernel_cross_validation(G: GroupOracle, k: int, j: int, L: int) -> bool:
    """Face-matrix kernel = kernel of the generator-built projection at window L."""
    from .ideals import exact_ideal_lattice

    gens = _face_generators(G, k, j)
    via_gens = exact_ideal_lattice(IdealSpec(f"R[{k},{j}]'", gens, generator_quotient(G, k, gens)), L)
    return via_gens == face_kernel_lattice(G, k, j, L) == exact_ideal_lattice(face_ideal(G, k, j), L)


# ---------------------------------------------------------------------------
# Moore complex


def moore_chain_lattice(G: GroupOracle, k: int, L: int) -> TruncatedLattice:
    """N_k ∩ window: intersection of the kernels of ∂_1, ..., ∂_k."""
    return exact_intersection_lattice(face_ideals(G, k, range(1, k + 1)), L)


def moore_cycle_lattice(G: GroupOracle, k: int, L: int) -> TruncatedLattice:
    """Z_k ∩ window: intersection of the kernels of all faces ∂_0, ..., ∂_k."""
    return exact_intersection_lattice(face_ideals(G, k, range(0, k + 1)), L)


def _chain_rows(G: GroupOracle, k: int, M: int) -> list[dict]:
    """Sparse kernel basis of ∂_1..∂_k on the M-ball of level k (words as keys)."""
    specs = face_ideals(G, k, range(1, k + 1))
    win = window(level_context(G, k), M)
    images = [{(j, s.projection.apply(w)): 1 for j, s in enumerate(specs)} for w in win.words]
    words = win.words
    return [{words[i]: v for i, v in r.items()} for r in sparse_kernel(images)]


def moore_boundary_inner(G: GroupOracle, k: int, L: int, M: int, check: bool = True) -> TruncatedLattice:
    """∂_0 of the level-(k+1) chains of norm <= M, cut to the L-window at level k."""
    if M < L:
        raise SimplicialError(f"M = {M} < L = {L}")
    src = level_context(G, k + 1)
    d0 = face_map(G, k + 1, 0)
    win = window(level_context(G, k), L)
    norm_src, norm_tgt = src.norm, win.ctx.norm
    piv: dict = {}
    outer: dict = {}
    index = win.index
    for row in _chain_rows(G, k + 1, M):
        img: dict = {}
        for w, c in row.items():
            v = d0.apply(w)
            if norm_tgt(v) > norm_src(w):
                raise SimplicialError("face increased the norm")
            img[v] = img.get(v, 0) + c
        sp = {}
        for v, c in img.items():
            if not c:
                continue
            col = index.get(v)
            if col is None:
                col = outer.get(v)
                if col is None:
                    col = outer[v] = -1 - len(outer)
            sp[col] = c
        if sp:
            sparse_insert(piv, sp)
    B = _sparse_to_lattice(piv, win, lo=0)
    if check and not moore_cycle_lattice(G, k, L).contains_lattice(B):
        raise ContainmentError("boundaries escaped the cycles")
    return B


def boundary_products(G: GroupOracle, k: int, L: int, M: int, mode: str = "sum") -> TruncatedLattice:
    """Boundaries as the symmetric product of the level-k face ideals."""
    specs = face_ideals(G, k, range(0, k + 1))
    return symmetric_product_inner(specs, L, M, mode=mode)


@dataclass
class MooreData:
    G: GroupOracle
    k: int
    L: int
    M: int
    chains: TruncatedLattice
    cycles: TruncatedLattice
    boundaries: TruncatedLattice

    def check(self) -> bool:
        return self.chains.contains_lattice(self.cycles) and self.cycles.contains_lattice(self.boundaries)


def moore_data(G: GroupOracle, k: int, L: int, M: int) -> MooreData:
    md = MooreData(G, k, L, M, moore_chain_lattice(G, k, L), moore_cycle_lattice(G, k, L),
                   moore_boundary_inner(G, k, L, M))
    if not md.check():
        raise ContainmentError("Moore lattices are not nested")
    return md


def _witness(Z: TruncatedLattice, B: TruncatedLattice, win):
    """Cycle with nonzero class, preferring classes that generate, then small support.

    Candidates are the cycles of the form w - 1 followed by the basis of Z.
    """
    C = [lattice_membership(r, Z) for r in B.basis]
    diag, V = smith_form(C, Z.rank)
    one = win.index[()]
    cands = []
    for i, w in enumerate(win.words):
        if w:
            v = [0] * len(win.words)
            v[i], v[one] = 1, -1
            cands.append((v, sum(1 for _, e in w if e < 0)))
    cands.extend((r, 0) for r in Z.basis)
    best = None
    for n, (v, neg) in enumerate(cands):
        a = lattice_membership(v, Z)
        if a is None:
            continue
        ap = [sum(a[i] * V[i][j] for i in range(Z.rank)) for j in range(Z.rank)]
        coords = [ap[i] % d for i, d in enumerate(diag) if d > 1] + ap[len(diag):]
        if not any(coords):
            continue
        key = (gcd(*coords) != 1, sum(1 for x in v if x), neg, n)
        if best is None or key < best[0]:
            best = (key, v)
    return None if best is None else best[1]


def homology_report(G: GroupOracle, k: int, L_sweep: Sequence[int], M_schedule=None,
                    route: str = "chains", cap: int | None = None, certify: bool = True) -> QReport:
    """Invariants of Z_k / B_k over a window sweep, with a witness cycle per window."""
    cap = max_cells() if cap is None else cap
    rep = QReport(f"{'Milnor' if G.kind == 'integers' else 'Carlsson ' + G.name} level {k} ({route})")
    src = level_context(G, k + 1)
    ctx = level_context(G, k)
    for L in L_sweep:
        Z = moore_cycle_lattice(G, k, L)
        sched = default_M_schedule(L) if M_schedule is None else [M for M in M_schedule if M >= L]
        last = None
        seen_B = []
        for M in sched:
            size = ball_size(src if route == "chains" else ctx, M)
            if size > cap:
                rep.skipped.append({"L": L, "M": M, "reason": f"ball({M}) exceeds SYMRING_MAX_CELLS={cap}"})
                continue
            if route == "chains":
                B = moore_boundary_inner(G, k, L, M)
            else:
                B = boundary_products(G, k, L, M)
                if not Z.contains_lattice(B):
                    raise ContainmentError("boundaries escaped the cycles")
            rep.rows.append(_qrow(L, M, Z, B))
            seen_B.append(B)
            last = (M, B)
        if last is None:
            continue
        M, B = last
        z = _witness(Z, B, window(ctx, L))
        if z is None:
            continue
        win = window(ctx, L)
        el = RingElement(ctx, {win.words[i]: c for i, c in enumerate(z) if c})
        cls = class_coordinates(z, Z, B)
        entry = {"cycle": _fmt(el), "class": cls,
                 "absent_for_all_M": all(lattice_membership(z, b) is None for b in seen_B)}
        order = None
        if cls["torsion"] and not any(cls["free"]):
            order = 1
            for res, dmod in cls["torsion"]:
                if res:
                    order = lcm(order, dmod // gcd(res, dmod))
        entry["order"] = order
        rep.witness_classes[str(L)] = entry
    return rep


def _fmt(x: RingElement) -> str:
    from .groupring import format_element

    return format_element(x)


def torsion_certificate(G: GroupOracle, k: int, z: RingElement, order: int, M: int):
    """Certificate that order * z lies in the symmetric product of the level-k face ideals."""
    specs = face_ideals(G, k, range(0, k + 1))
    return find_certificate(z.scale(order), specs, M)


# ---------------------------------------------------------------------------
# Wu setup


def wu_setup(n: int):
    """Level n+1 of the Milnor construction in the y-basis with all face kernels.

    Returns (F(y_0..y_n), [IdealSpec]) ordered as ker ∂_0 = <y_0...y_n>,
    ker ∂_i = <y_{i-1}> for 1 <= i <= n+1.  For n = 1 this is the three-ideal
    configuration in F(y_0, y_1); the configuration with m free generators
    is wu_setup(m - 1).
    """
    if n < 1:
        raise SimplicialError("wu_setup needs n >= 1")
    Y = y_context(n + 1)
    specs = []
    # <y_0 ... y_n>: kill y_n by sending it to (y_0 ... y_{n-1})^-1
    T = y_context(n)
    prod = tuple((i, 1) for i in range(n + 1))
    imgs = [((i, 1),) for i in range(n)] + [tuple((i, -1) for i in reversed(range(n)))]
    specs.append(IdealSpec("<" + "".join(f"y{i}" for i in range(n + 1)) + ">", (prod,), GeneratorMap(Y, T, tuple(imgs))))
    for i in range(n + 1):
        specs.append(IdealSpec.killing(Y, [i], name=f"<y{i}>"))
    return Y, specs


def wu_face_consistency(n: int, words: Sequence[Word]) -> bool:
    """Each Wu kernel agrees with the matching face kernel after the basis change."""
    Y, specs = wu_setup(n)
    yb = y_basis(n + 1)
    for j, s in enumerate(specs):
        face = face_map(INTEGERS, n + 1, j)
        for w in words:
            if (s.projection.apply(w) == ()) != (face.apply(yb.y_in_x.apply(w)) == ()):
                return False
    return True
