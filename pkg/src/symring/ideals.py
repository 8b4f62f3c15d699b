"""Ideals r = (R-1)Z[F] truncated to norm windows.

Exact lattices come from projection kernels; inner approximations of ordered
and symmetric products come from enumerated generator products with the outer
shell eliminated.  Non-membership is only ever certified through finite
quotients, where the transported ideal is an exact finite-rank lattice.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .groups import (
    INTEGERS,
    Bracket,
    Conj,
    ContextMismatch,
    FreeContext,
    GeneratorMap,
    GroupError,
    GroupOracle,
    Product,
    SubgroupSpec,
    Word,
)
from .groupring import (
    BasisWindow,
    RingElement,
    SupportEscape,
    format_element,
    mul_terms,
    parse_element,
    vectorize,
    window,
)
from .intlinalg import (
    LatticeError,
    TruncatedLattice,
    lattice_membership,
    quotient_invariants,
    smith_form,
    sparse_insert,
    sparse_kernel,
    sparse_reduce_above,
)

CERT_SCHEMA = "symring.certificate/1"
QREPORT_SCHEMA = "symring.qreport/1"
QCERT_SCHEMA = "symring.quotient-certificate/1"
QUOTIENT_LABEL = ("exact numerator / inner denominator: torsion shown is an upper quotient, "
                  "free rank is evidence-level unless saturated")


class PreconditionError(ValueError):
    pass


class ContainmentError(AssertionError):
    """Inner lattice escaped the exact lattice: an implementation bug."""


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True, eq=False)
class IdealSpec:
    """r = (R-1)Z[F] for R the normal closure of ``generators``.

    ``projection`` has kernel exactly R; its target must have a decidable word
    problem (free or finite).
    """

    name: str
    generators: tuple
    projection: GeneratorMap

    def __post_init__(self):
        ctx = self.projection.source
        for w in self.generators:
            ctx.check_word(w)
            if self.projection.apply(w) != ():
                raise GroupError(f"{self.name}: generator {ctx.format_word(w)} survives the projection")

    @property
    def ctx(self) -> FreeContext:
        return self.projection.source

    @classmethod
    def from_subgroup(cls, s: SubgroupSpec) -> "IdealSpec":
        if s.kernel_of is None or s.normal_generators is None:
            raise PreconditionError(f"{s.name}: need both presentations")
        return cls(s.name, tuple(s.normal_generators), s.kernel_of)

    def subgroup(self) -> SubgroupSpec:
        return SubgroupSpec(self.ctx, self.generators, self.projection, self.name)

    @classmethod
    def killing(cls, ctx: FreeContext, factors: Sequence[int], name: str | None = None) -> "IdealSpec":
        """Normal closure of whole factors (generators x_i, or copies G_{x_i})."""
        kill = set(factors)
        keep = [i for i in range(ctx.rank) if i not in kill]
        target = FreeContext(tuple(ctx.names[i] for i in keep), tuple(ctx.oracles[i] for i in keep))
        rule = [None if i in kill else keep.index(i) for i in range(ctx.rank)]
        gens = []
        for i in sorted(kill):
            o = ctx.oracles[i]
            if o.kind == "integers":
                gens.append(((i, 1),))
            else:
                gens.extend(((i, a),) for a in o.non_identity())
        nm = name or "<" + ",".join(ctx.names[i] for i in sorted(kill)) + ">"
        return cls(nm, tuple(gens), GeneratorMap.relabel(ctx, target, rule))

    def block(self) -> frozenset:
        """Generator indices occurring in the normal generators."""
        return frozenset(i for w in self.generators for i, _ in w)


def _shared_ctx(specs: Sequence[IdealSpec]) -> FreeContext:
    if not specs:
        raise PreconditionError("need at least one ideal")
    ctx = specs[0].ctx
    for s in specs[1:]:
        if not s.ctx.same(ctx):
            raise ContextMismatch("ideal specs live in different contexts")
    return ctx


# ---------------------------------------------------------------------------
# exact lattices


def _sparse_to_lattice(piv: dict, win: BasisWindow, lo: int = 0, hi: int | None = None) -> TruncatedLattice:
    """Rows of an echelon pivot dict whose pivot lies in [lo, hi), shifted by lo."""
    keep = {c: r for c, r in piv.items() if c >= lo and (hi is None or c < hi)}
    if hi is not None:
        keep = {c: {k: v for k, v in r.items() if k < hi} for c, r in keep.items()}
    sparse_reduce_above(keep)
    d = len(win)
    rows = []
    for c in sorted(keep):
        row = [0] * d
        for k, v in keep[c].items():
            row[k - lo] = v
        rows.append(tuple(row))
    return TruncatedLattice(win, tuple(rows))


def exact_ideal_lattice(spec: IdealSpec, L: int) -> TruncatedLattice:
    """r ∩ Span(norm <= L): the kernel of the projection on the window.

    The kernel of a fibre map has an immediate Hermite basis: within each
    fibre, every word minus the last word of the fibre.
    """
    win = window(spec.ctx, L)
    fibres: dict = {}
    apply = spec.projection.apply
    for i, w in enumerate(win.words):
        fibres.setdefault(apply(w), []).append(i)
    d = len(win)
    rows = []
    for idx in fibres.values():
        last = idx[-1]
        for i in idx[:-1]:
            row = [0] * d
            row[i] = 1
            row[last] = -1
            rows.append((i, tuple(row)))
    rows.sort()
    return TruncatedLattice(win, tuple(r for _, r in rows))


def exact_intersection_lattice(specs: Sequence[IdealSpec], L: int, method: str = "joint") -> TruncatedLattice:
    """(r_1 ∩ ... ∩ r_n) ∩ Span(norm <= L).

    ``joint`` takes the kernel of all projections at once (sparse elimination
    with an identity block); ``fold`` intersects the single-ideal lattices.
    """
    ctx = _shared_ctx(specs)
    if len(specs) == 1:
        return exact_ideal_lattice(specs[0], L)
    win = window(ctx, L)
    if method == "fold":
        from .intlinalg import lattice_intersection

        acc = exact_ideal_lattice(specs[0], L)
        for s in specs[1:]:
            acc = lattice_intersection(acc, exact_ideal_lattice(s, L))
        return acc
    images = []
    for w in win.words:
        images.append({(j, s.projection.apply(w)): 1 for j, s in enumerate(specs)})
    return kernel_lattice(images, win)


def kernel_lattice(images: list, win: BasisWindow) -> TruncatedLattice:
    """Hermite basis of the integer kernel of e_w -> images[w] over a window."""
    piv: dict = {}
    for v in sparse_kernel(images):
        sparse_insert(piv, v)
    return _sparse_to_lattice(piv, win, lo=0)


# ---------------------------------------------------------------------------
# inner approximations


def _conjugates(spec: IdealSpec, M: int) -> dict:
    """x = c^-1 w c over relators w and conjugators c, with |x| <= M."""
    ctx = spec.ctx
    norm = ctx.norm
    out: dict = {}
    if not spec.generators:
        return out
    wmax = max(norm(w) for w in spec.generators)
    cb = (M + wmax) // 2 + 1
    for c in ctx.ball(cb):
        for w in spec.generators:
            x = ctx.conj(w, c)
            if x and norm(x) <= M and x not in out:
                out[x] = (w, c)
    return out


def _letters(ctx: FreeContext):
    out = []
    for i, o in enumerate(ctx.oracles):
        if o.kind == "integers":
            out.extend(((i, 1), (i, -1)))
        else:
            out.extend((i, a) for a in o.non_identity())
    return out


def right_cofactors(ctx: FreeContext, support: Sequence[Word], M: int) -> list[Word]:
    """All f with |s f| <= M for every s in ``support``.

    Depth-first over f one letter at a time.  While f is a prefix of s^-1 the
    norm of s f decreases; afterwards it never decreases, so a violated bound
    prunes the whole subtree (every s has |s| <= M on entry).
    """
    norm = ctx.norm
    mul = ctx.mul
    letters = _letters(ctx)
    oracles = ctx.oracles
    out = [()]
    stack = [((), tuple(support))]
    while stack:
        f, prods = stack.pop()
        last = f[-1] if f else None
        for i, a in letters:
            if last is not None and last[0] == i:
                if oracles[i].kind != "integers" or (last[1] > 0) != (a > 0):
                    continue
            g = mul(f, ((i, a),))
            newp = []
            ok = True
            for p in prods:
                q = mul(p, ((i, a),))
                if norm(q) > M:
                    ok = False
                    break
                newp.append(q)
            if ok:
                out.append(g)
                stack.append((g, tuple(newp)))
    return out


@dataclass(frozen=True)
class GenProvenance:
    """Generator (x_1-1)...(x_n-1) f with x_j = c_j^-1 w_j c_j from ideal ideals[j]."""

    ideals: tuple
    relators: tuple
    conjugators: tuple
    cofactor: Word

    def row(self, ctx: FreeContext, coeff: int):
        words = []
        prev = ()
        for c in self.conjugators:
            words.append(ctx.mul(prev, ctx.inv(c)))
            prev = c
        words.append(ctx.mul(prev, self.cofactor))
        return CertRow(coeff, tuple(words), tuple(self.relators), tuple(self.ideals))


def _ordered_generators(specs: Sequence[IdealSpec], order: Sequence[int], M: int,
                        conj_cache: dict | None = None) -> list:
    """Distinct generator elements for the ordered product in ``order``."""
    ctx = specs[order[0]].ctx
    norm = ctx.norm
    mul = ctx.mul
    conj_cache = {} if conj_cache is None else conj_cache
    level = [({(): 1}, ())]
    for j in order:
        X = conj_cache.get(j)
        if X is None:
            X = conj_cache[j] = _conjugates(specs[j], M)
        new: dict = {}
        for p, prov in level:
            for x, (w, c) in X.items():
                q: dict = {}
                bad = False
                for s, k in p.items():
                    sx = mul(s, x)
                    if norm(sx) > M:
                        bad = True
                        break
                    q[sx] = q.get(sx, 0) + k
                    q[s] = q.get(s, 0) - k
                if bad:
                    continue
                q = {u: k for u, k in q.items() if k}
                if not q:
                    continue
                key = frozenset(q.items())
                if key not in new:
                    new[key] = (q, prov + ((j, w, c),))
        level = list(new.values())
    out = []
    seen = set()
    for p, prov in level:
        for f in right_cofactors(ctx, list(p), M):
            q = {mul(s, f): k for s, k in p.items()}
            key = frozenset(q.items())
            if key in seen:
                continue
            seen.add(key)
            out.append((q, GenProvenance(tuple(j for j, _, _ in prov), tuple(w for _, w, _ in prov),
                                         tuple(c for _, _, c in prov), f)))
    return out


class _Columns:
    """Column ids: window words are 0..d-1, outer words negative (eliminated first)."""

    def __init__(self, win: BasisWindow):
        self.index = win.index
        self.outer: dict = {}

    def __call__(self, w):
        i = self.index.get(w)
        if i is not None:
            return i
        c = self.outer.get(w)
        if c is None:
            c = self.outer[w] = -1 - len(self.outer)
        return c


def _eliminate(gens, win: BasisWindow, track: bool = False):
    cols = _Columns(win)
    piv: dict = {}
    big = 1 << 62
    for t, (q, _) in enumerate(gens):
        row = {cols(w): k for w, k in q.items()}
        if track:
            row[big + t] = 1
        sparse_insert(piv, row)
    return piv, big


def _check_M(L, M):
    if M < L:
        raise PreconditionError(f"M = {M} < L = {L}")


def ordered_product_inner(specs: Sequence[IdealSpec], L: int, M: int,
                          order: Sequence[int] | None = None) -> TruncatedLattice:
    """Span of enumerated products of the ideals in ``order``, cut to the L-window."""
    _check_M(L, M)
    ctx = _shared_ctx(specs)
    order = tuple(range(len(specs))) if order is None else tuple(order)
    win = window(ctx, L)
    gens = _ordered_generators(specs, order, M)
    piv, _ = _eliminate(gens, win)
    return _sparse_to_lattice(piv, win, lo=0)


def _orderings(n: int):
    return list(itertools.permutations(range(n)))


def symmetric_product_inner(specs: Sequence[IdealSpec], L: int, M: int, check: bool = True,
                            exact: TruncatedLattice | None = None, mode: str = "sum") -> TruncatedLattice:
    """Sum over all orderings of ``ordered_product_inner``; checked against the exact lattice.

    ``mode="joint"`` eliminates the generators of every ordering together,
    which also keeps window elements that need cancellation between orderings
    outside the window.  It contains the ``sum`` lattice and is still inside
    the symmetric product.
    """
    _check_M(L, M)
    if len(specs) < 2:
        raise PreconditionError("symmetric products need n >= 2")
    ctx = _shared_ctx(specs)
    win = window(ctx, L)
    cache: dict = {}
    rows = []
    if mode == "joint":
        gens = []
        for order in _orderings(len(specs)):
            gens.extend(_ordered_generators(specs, order, M, cache))
        piv, _ = _eliminate(gens, win)
        rows.extend(_sparse_to_lattice(piv, win, lo=0).basis)
    elif mode == "sum":
        for order in _orderings(len(specs)):
            gens = _ordered_generators(specs, order, M, cache)
            piv, _ = _eliminate(gens, win)
            rows.extend(_sparse_to_lattice(piv, win, lo=0).basis)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    inner = TruncatedLattice.from_rows(win, rows) if rows else TruncatedLattice.zero(win)
    if check:
        ex = exact if exact is not None else exact_intersection_lattice(specs, L)
        if not ex.contains_lattice(inner):
            raise ContainmentError("inner symmetric product escaped the exact intersection")
    return inner


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class CertRow:
    """coeff * u_0 (w_1 - 1) u_1 ... (w_n - 1) u_n, relator w_j taken from ideal ideals[j]."""

    coeff: int
    words: tuple
    relators: tuple
    ideals: tuple

    def terms(self, ctx: FreeContext) -> dict:
        acc = {self.words[0]: self.coeff}
        for w, u in zip(self.relators, self.words[1:]):
            acc = mul_terms(ctx, acc, {w: 1, (): -1} if w else {})
            acc = {ctx.mul(s, u): k for s, k in acc.items()}
        return acc


def ctx_to_json(ctx: FreeContext) -> dict:
    oracles = []
    for o in ctx.oracles:
        oracles.append("Z" if o.kind == "integers" else o.to_json())
    return {"names": list(ctx.names), "oracles": oracles}


def ctx_from_json(data) -> FreeContext:
    cache: dict = {}
    oracles = []
    for o in data["oracles"]:
        if o == "Z":
            oracles.append(INTEGERS)
        else:
            key = json.dumps(o, sort_keys=True)
            if key not in cache:
                cache[key] = GroupOracle.from_json(o)
            oracles.append(cache[key])
    return FreeContext(tuple(data["names"]), tuple(oracles))


@dataclass
class Certificate:
    """Replayable proof that ``element`` lies in an ideal expression.

    ``expression`` is ``symmetric`` (each row uses every ideal once, in some
    order), ``ordered`` (each row uses the ideals in list order) or ``ideal``
    (single ideal, rows of length one).
    """

    ctx: FreeContext
    element: RingElement
    ideal_names: tuple
    ideal_generators: tuple
    expression: str
    rows: list
    L: int | None = None
    M: int | None = None
    seed: int | None = None

    def replay(self) -> bool:
        return not self.problems()

    def problems(self) -> list[str]:
        ctx = self.ctx
        n = len(self.ideal_names)
        errs = []
        total: dict = {}
        for k, r in enumerate(self.rows):
            if len(r.words) != len(r.relators) + 1 or len(r.ideals) != len(r.relators):
                errs.append(f"row {k}: malformed")
                continue
            for w, i in zip(r.relators, r.ideals):
                if not 0 <= i < n:
                    errs.append(f"row {k}: unknown ideal {i}")
                elif w not in self.ideal_generators[i] and ctx.inv(w) not in self.ideal_generators[i]:
                    errs.append(f"row {k}: relator is not a normal generator of {self.ideal_names[i]}")
            if self.expression == "symmetric" and sorted(r.ideals) != list(range(n)):
                errs.append(f"row {k}: ideals {list(r.ideals)} are not a permutation")
            if self.expression == "ordered" and list(r.ideals) != list(range(n)):
                errs.append(f"row {k}: ideals out of order")
            if self.expression == "ideal" and len(r.ideals) != 1:
                errs.append(f"row {k}: expected a single relator")
            for w, c in r.terms(ctx).items():
                v = total.get(w, 0) + c
                if v:
                    total[w] = v
                else:
                    total.pop(w, None)
        if total != self.element.terms:
            errs.append("combination does not reproduce the element")
        return errs

    def to_json(self) -> dict:
        ctx = self.ctx
        fw = ctx.format_word
        return {
            "schema": CERT_SCHEMA,
            "context": ctx_to_json(ctx),
            "claim": {
                "element": format_element(self.element),
                "expression": self.expression,
                "ideals": [{"name": nm, "generators": [fw(w) for w in gens]}
                           for nm, gens in zip(self.ideal_names, self.ideal_generators)],
            },
            "window": {"L": self.L, "M": self.M},
            "seed": self.seed,
            "combination": [
                {"coeff": r.coeff, "words": [fw(w) for w in r.words],
                 "relators": [fw(w) for w in r.relators], "ideals": list(r.ideals)}
                for r in self.rows
            ],
        }

    @classmethod
    def from_json(cls, data) -> "Certificate":
        if data.get("schema") != CERT_SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        ctx = ctx_from_json(data["context"])
        pw = ctx.parse_word
        claim = data["claim"]
        rows = [CertRow(int(r["coeff"]), tuple(pw(w) for w in r["words"]),
                        tuple(pw(w) for w in r["relators"]), tuple(int(i) for i in r["ideals"]))
                for r in data["combination"]]
        return cls(ctx, parse_element(claim["element"], ctx),
                   tuple(i["name"] for i in claim["ideals"]),
                   tuple(tuple(pw(w) for w in i["generators"]) for i in claim["ideals"]),
                   claim["expression"], rows, data["window"].get("L"), data["window"].get("M"),
                   data.get("seed"))


def _cert(specs, element: RingElement, rows, expression="symmetric", L=None, M=None) -> Certificate:
    return Certificate(element.ctx, element, tuple(s.name for s in specs),
                       tuple(tuple(s.generators) for s in specs), expression, list(rows), L, M)


def witness_rows(expr, specs: Sequence[IdealSpec]) -> list[CertRow]:
    """Rows expressing g - 1 for a witness derivation of g.

    Leaf: c^-1 (w - 1) c, or -c^-1 w^-1 (w - 1) c for the inverse.
    Bracket: [x,y] - 1 = x^-1 y^-1 ((x-1)(y-1) - (y-1)(x-1)).
    Product: gh - 1 = (g-1) h + (h-1).
    """
    ctx = specs[0].ctx
    mul, inv = ctx.mul, ctx.inv
    from .groups import evaluate

    def rec(e):
        if isinstance(e, Conj):
            c = e.conjugator
            if e.sign > 0:
                return [CertRow(1, (inv(c), c), (e.generator,), (e.spec,))]
            return [CertRow(-1, (mul(inv(c), inv(e.generator)), c), (e.generator,), (e.spec,))]
        if isinstance(e, Bracket):
            x, y = evaluate(e.left, ctx), evaluate(e.right, ctx)
            X, Y = rec(e.left), rec(e.right)
            pre = mul(inv(x), inv(y))
            out = []
            for A, B, sgn in ((X, Y, 1), (Y, X, -1)):
                for a in A:
                    for b in B:
                        words = (mul(pre, a.words[0]),) + a.words[1:-1] + (mul(a.words[-1], b.words[0]),) + b.words[1:]
                        out.append(CertRow(sgn * a.coeff * b.coeff, words, a.relators + b.relators,
                                           a.ideals + b.ideals))
            return out
        if isinstance(e, Product):
            out = []
            for k, f in enumerate(e.factors):
                tail = ctx.mul_many(*(evaluate(g, ctx) for g in e.factors[k + 1:]))
                for r in rec(f):
                    out.append(CertRow(r.coeff, r.words[:-1] + (mul(r.words[-1], tail),), r.relators, r.ideals))
            return out
        raise TypeError(e)

    return rec(expr)


def witness_certificate(witness, specs: Sequence[IdealSpec]) -> Certificate:
    """Symbolic certificate for g - 1 in the symmetric product, from a witness derivation."""
    ctx = _shared_ctx(specs)
    el = RingElement.minus_one(ctx, witness.word)
    return _cert(specs, el, witness_rows(witness.expr, specs), "symmetric")


def find_certificate(element: RingElement, specs: Sequence[IdealSpec], M: int,
                     orders: Sequence[Sequence[int]] | None = None, L: int | None = None) -> Certificate | None:
    """Search the enumerated generators at cap M for an exact combination equal to ``element``."""
    return find_certificates([element], specs, M, orders, L)[0]


def find_certificates(elements: Sequence[RingElement], specs: Sequence[IdealSpec], M: int,
                      orders: Sequence[Sequence[int]] | None = None,
                      L: int | None = None) -> list[Certificate | None]:
    """``find_certificate`` for several elements sharing one tracked elimination."""
    ctx = _shared_ctx(specs)
    if L is None:
        L = max((x.max_norm() for x in elements), default=0)
    win = window(ctx, L)
    expression = "symmetric" if orders is None else ("ordered" if len(orders) == 1 else "symmetric")
    if len(specs) == 1:
        expression = "ideal"
    orders = _orderings(len(specs)) if orders is None else [tuple(o) for o in orders]
    gens = []
    cache: dict = {}
    for o in orders:
        gens.extend(_ordered_generators(specs, o, M, cache))
    piv, big = _eliminate(gens, win, track=True)
    out = []
    for element in elements:
        if not element:
            out.append(_cert(specs, element, [], expression, L, M))
            continue
        try:
            target = vectorize(element, win)
        except SupportEscape:
            out.append(None)
            continue
        combo = _express(piv, big, {i: x for i, x in enumerate(target) if x})
        if combo is None:
            out.append(None)
            continue
        rows = [gens[k][1].row(ctx, c) for k, c in combo]
        out.append(_cert(specs, element, rows, expression, L, M))
    return out


def _express(piv: dict, big: int, v: dict):
    """Tag combination (generator index, coefficient) reproducing v, or None."""
    for c in sorted(k for k in piv if 0 <= k < big):
        x = v.get(c)
        if not x:
            continue
        p = piv[c]
        q, r = divmod(x, p[c])
        if r:
            return None
        for k, y in p.items():
            z = v.get(k, 0) - q * y
            if z:
                v[k] = z
            else:
                del v[k]
    if any(k < big for k in v):
        return None
    return [(k - big, -v[k]) for k in sorted(v)]


# ---------------------------------------------------------------------------
# finite group rings


class FiniteGroupRing:
    """Z[H] for a finite oracle H; vectors indexed by element id."""

    def __init__(self, oracle: GroupOracle):
        if not oracle.is_finite:
            raise PreconditionError("finite group ring needs a finite oracle")
        self.oracle = oracle
        self.n = oracle.order

    def basis_vec(self, h: int, c: int = 1) -> list[int]:
        v = [0] * self.n
        v[h] += c
        return v

    def minus_one(self, h: int) -> list[int]:
        v = self.basis_vec(h)
        v[self.oracle.identity] -= 1
        return v

    def mul(self, x, y) -> list[int]:
        out = [0] * self.n
        m = self.oracle.mul
        for a, p in enumerate(x):
            if p:
                for b, q in enumerate(y):
                    if q:
                        out[m(a, b)] += p * q
        return out

    def span(self, rows) -> TruncatedLattice:
        return TruncatedLattice.from_rows(self.n, [list(r) for r in rows])

    def augmentation(self, subgroup: Iterable[int]) -> TruncatedLattice:
        """Span{n - 1 : n in N} (the augmentation ideal of the subring Z[N])."""
        return self.span(self.minus_one(h) for h in subgroup)

    def ideal(self, normal_subgroup: Iterable[int]) -> TruncatedLattice:
        """Two-sided ideal (N - 1)Z[H] = span{(n - 1) h}."""
        rows = [self.mul(self.minus_one(a), self.basis_vec(h)) for a in normal_subgroup for h in range(self.n)]
        return self.span(rows)

    def product(self, *lats: TruncatedLattice) -> TruncatedLattice:
        acc = lats[0]
        for b in lats[1:]:
            rows = [self.mul(x, y) for x in acc.basis for y in b.basis]
            acc = self.span(rows) if rows else TruncatedLattice.zero(self.n)
        return acc

    def sum(self, *lats: TruncatedLattice) -> TruncatedLattice:
        rows = [r for l in lats for r in l.basis]
        return self.span(rows) if rows else TruncatedLattice.zero(self.n)

    def closure(self, lat: TruncatedLattice) -> TruncatedLattice:
        """Smallest two-sided ideal containing ``lat`` (fixed-point iteration)."""
        while True:
            rows = list(lat.basis)
            for x in lat.basis:
                for h in range(self.n):
                    e = self.basis_vec(h)
                    rows.append(self.mul(e, x))
                    rows.append(self.mul(x, e))
            new = self.span(rows)
            if new == lat:
                return lat
            lat = new


@dataclass(frozen=True)
class IdealRef:
    index: int


@dataclass(frozen=True)
class ProdExpr:
    factors: tuple


@dataclass(frozen=True)
class SumExpr:
    terms: tuple


@dataclass(frozen=True)
class AugExpr:
    """Augmentation ideal of the whole group ring."""


def sym(*indices: int) -> SumExpr:
    return SumExpr(tuple(ProdExpr(tuple(IdealRef(i) for i in p)) for p in itertools.permutations(indices)))


def finite_transport_ideal(expr, specs: Sequence[IdealSpec], h: GeneratorMap) -> TruncatedLattice:
    """Exact image of an ideal expression in Z[H] along a surjection h: F -> H.

    Ring surjections carry each r_i onto (h(R_i) - 1)Z[H], products onto
    products and sums onto sums, so the image lattice is exact.
    """
    tgt = h.target
    if not tgt.is_finite_group:
        raise PreconditionError("transport target must be a finite group")
    if not h.is_surjective_onto_finite():
        raise PreconditionError("transport map must be surjective")
    oracle = tgt.oracles[0]
    ring = FiniteGroupRing(oracle)
    from .oracles import subgroup_closure

    def elem(w):
        img = h.apply(w)
        return img[0][1] if img else oracle.identity

    cache: dict = {}

    def rec(e):
        if isinstance(e, IdealRef):
            if e.index not in cache:
                gens = {elem(w) for w in specs[e.index].generators}
                conj = {oracle.mul(oracle.mul(oracle.inv(g), a), g) for a in gens for g in range(oracle.order)}
                cache[e.index] = ring.ideal(subgroup_closure(oracle, conj))
            return cache[e.index]
        if isinstance(e, AugExpr):
            return ring.ideal(range(oracle.order))
        if isinstance(e, ProdExpr):
            return ring.product(*(rec(f) for f in e.factors))
        if isinstance(e, SumExpr):
            return ring.sum(*(rec(t) for t in e.terms))
        raise TypeError(e)

    return rec(expr)


def transported_vector(h: GeneratorMap, x: RingElement) -> list[int]:
    oracle = h.target.oracles[0]
    v = [0] * oracle.order
    for w, c in x.terms.items():
        img = h.apply(w)
        v[img[0][1] if img else oracle.identity] += c
    return v


def default_quotient_schedule(ctx: FreeContext) -> list[tuple[str, GeneratorMap]]:
    """Elementary abelian, then (Z/4)-type, then class-2 quotients, by ring rank."""
    from .oracles import abelian, dihedral, free_class2, quaternion8

    if not ctx.is_free:
        return []
    r = ctx.rank
    out = []

    def basis_images(o, moduli):
        vals = []
        for i in range(r):
            e = tuple(1 if k == i else 0 for k in range(r))
            vals.append(o.element("(" + ",".join(map(str, e)) + ")"))
        return vals

    if r <= 6:
        o = abelian(*([2] * r))
        out.append((o.name, GeneratorMap.to_finite(ctx, o, basis_images(o, [2] * r))))
    if r <= 3:
        o = abelian(*([4] * r))
        out.append((o.name, GeneratorMap.to_finite(ctx, o, basis_images(o, [4] * r))))
    if r == 2:
        d4 = dihedral(4)
        out.append(("D4", GeneratorMap.to_finite(ctx, d4, ["r1", "s"])))
        q8 = quaternion8()
        out.append(("Q8", GeneratorMap.to_finite(ctx, q8, ["i", "j"])))
    if r <= 3:
        o = free_class2(r, 3)
        vals = []
        npairs = r * (r - 1) // 2
        for i in range(r):
            e = tuple(1 if k == i else 0 for k in range(r)) + (0,) * npairs
            vals.append(o.element("(" + ",".join(map(str, e)) + ")"))
        out.append((o.name, GeneratorMap.to_finite(ctx, o, vals)))
    out.sort(key=lambda t: t[1].target.oracles[0].order)
    return out


# ---------------------------------------------------------------------------
# verdicts and reports


@dataclass
class DVerdict:
    element: Word
    verdict: str  # certified-in | certified-out | unknown
    certificate: Certificate | None = None
    quotient: str | None = None
    detail: dict = field(default_factory=dict)

    def as_dict(self, ctx: FreeContext) -> dict:
        out = {"element": ctx.format_word(self.element), "verdict": self.verdict}
        if self.quotient:
            out["quotient"] = self.quotient
        out.update(self.detail)
        return out


def separating_functional(v: Sequence[int], lat: TruncatedLattice) -> tuple[list[int], int] | None:
    """(f, m) with f.b = 0 mod m on every basis row b of ``lat`` and f.v != 0 mod m.

    m = 0 means the congruences are equalities.  None when v lies in ``lat``.
    """
    n = lat.dim
    diag, V = smith_form([list(b) for b in lat.basis], n)
    vv = [sum(v[i] * V[i][j] for i in range(n)) for j in range(n)]
    for j in range(n):
        m = diag[j] if j < len(diag) else 0
        if m == 1:
            continue
        if (vv[j] % m if m else vv[j]) != 0:
            return [V[i][j] for i in range(n)], m
    return None


def expr_to_json(e):
    if isinstance(e, IdealRef):
        return {"ideal": e.index}
    if isinstance(e, AugExpr):
        return {"augmentation": True}
    if isinstance(e, ProdExpr):
        return {"product": [expr_to_json(f) for f in e.factors]}
    if isinstance(e, SumExpr):
        return {"sum": [expr_to_json(t) for t in e.terms]}
    raise TypeError(e)


def expr_from_json(d):
    if "ideal" in d:
        return IdealRef(int(d["ideal"]))
    if "augmentation" in d:
        return AugExpr()
    if "product" in d:
        return ProdExpr(tuple(expr_from_json(f) for f in d["product"]))
    if "sum" in d:
        return SumExpr(tuple(expr_from_json(t) for t in d["sum"]))
    raise ValueError(f"bad expression {d!r}")


def map_to_json(h: GeneratorMap) -> dict:
    fw = h.target.format_word
    images = []
    for o, img in zip(h.source.oracles, h.images):
        images.append(fw(img) if o.kind == "integers" else [fw(w) for w in img])
    return {"source": ctx_to_json(h.source), "target": ctx_to_json(h.target), "images": images}


def map_from_json(d) -> GeneratorMap:
    src, tgt = ctx_from_json(d["source"]), ctx_from_json(d["target"])
    pw = tgt.parse_word
    images = []
    for o, img in zip(src.oracles, d["images"]):
        images.append(pw(img) if o.kind == "integers" else tuple(pw(w) for w in img))
    return GeneratorMap(src, tgt, tuple(images))


@dataclass(frozen=True)
class _Gens:
    generators: tuple


@dataclass
class QuotientCertificate:
    """g - 1 misses an ideal expression because its image in Z[H] does.

    Replay recomputes the transported ideal in the finite group ring and checks
    the integer functional f: it vanishes (mod m) on the ideal but not on h(g) - 1.
    """

    ctx: FreeContext
    element: Word
    ideal_names: tuple
    ideal_generators: tuple
    expression: object
    quotient: str
    h: GeneratorMap
    functional: list
    modulus: int

    def problems(self) -> list[str]:
        errs = []
        if not self.h.source.same(self.ctx):
            return ["quotient map has the wrong source"]
        try:
            lat = finite_transport_ideal(self.expression, [_Gens(g) for g in self.ideal_generators], self.h)
        except (PreconditionError, IndexError) as exc:
            return [str(exc)]
        f, m = self.functional, self.modulus
        if len(f) != lat.dim:
            return ["functional has the wrong length"]

        def val(v):
            t = sum(a * b for a, b in zip(f, v))
            return t % m if m else t

        if any(val(b) for b in lat.basis):
            errs.append("functional does not vanish on the transported ideal")
        if not val(transported_vector(self.h, RingElement.minus_one(self.ctx, self.element))):
            errs.append("functional vanishes on the element")
        return errs

    def replay(self) -> bool:
        return not self.problems()

    def to_json(self) -> dict:
        fw = self.ctx.format_word
        return {
            "schema": QCERT_SCHEMA,
            "context": ctx_to_json(self.ctx),
            "claim": {
                "element": fw(self.element),
                "not_in": expr_to_json(self.expression),
                "ideals": [{"name": nm, "generators": [fw(w) for w in gens]}
                           for nm, gens in zip(self.ideal_names, self.ideal_generators)],
            },
            "quotient": {"name": self.quotient, "map": map_to_json(self.h)},
            "functional": list(self.functional),
            "modulus": self.modulus,
        }

    @classmethod
    def from_json(cls, data) -> "QuotientCertificate":
        if data.get("schema") != QCERT_SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        ctx = ctx_from_json(data["context"])
        pw = ctx.parse_word
        claim = data["claim"]
        return cls(ctx, pw(claim["element"]), tuple(i["name"] for i in claim["ideals"]),
                   tuple(tuple(pw(w) for w in i["generators"]) for i in claim["ideals"]),
                   expr_from_json(claim["not_in"]), data["quotient"]["name"],
                   map_from_json(data["quotient"]["map"]), [int(x) for x in data["functional"]],
                   int(data["modulus"]))


def certified_out(g: Word, specs: Sequence[IdealSpec], expr, schedule) -> tuple[str, dict] | None:
    """First finite quotient in which h(g) - 1 misses the transported ideal."""
    found = quotient_certificate(g, specs, expr, schedule)
    if found is None:
        return None
    lat = finite_transport_ideal(expr, specs, found.h)
    return found.quotient, {"quotient_order": found.h.target.oracles[0].order, "image_rank": lat.rank}


def quotient_certificate(g: Word, specs: Sequence[IdealSpec], expr, schedule) -> QuotientCertificate | None:
    ctx = _shared_ctx(specs)
    x = RingElement.minus_one(ctx, g)
    for name, h in schedule:
        lat = finite_transport_ideal(expr, specs, h)
        sep = separating_functional(transported_vector(h, x), lat)
        if sep is not None:
            return QuotientCertificate(ctx, g, tuple(s.name for s in specs),
                                       tuple(tuple(s.generators) for s in specs), expr, name, h, sep[0], sep[1])
    return None


def d_subgroup_test(g: Word, specs: Sequence[IdealSpec], M: int, expr=None, schedule=None,
                    witness=None, L: int | None = None) -> DVerdict:
    """Decide g in D(F; I) where possible; I defaults to the symmetric product."""
    ctx = _shared_ctx(specs)
    n = len(specs)
    if expr is None:
        expr = sym(*range(n)) if n > 1 else IdealRef(0)
    x = RingElement.minus_one(ctx, g)
    if not g:
        return DVerdict(g, "certified-in", _cert(specs, x, [], "symmetric" if n > 1 else "ideal", 0, M))
    if witness is not None and witness.word == g:
        cert = witness_certificate(witness, specs)
        if cert.replay():
            cert.L, cert.M = x.max_norm(), M
            return DVerdict(g, "certified-in", cert)
    if isinstance(expr, SumExpr) and expr == sym(*range(n)):
        cert = find_certificate(x, specs, max(M, x.max_norm()), L=L)
        if cert is not None and cert.replay():
            return DVerdict(g, "certified-in", cert)
    sched = default_quotient_schedule(ctx) if schedule is None else schedule
    qc = quotient_certificate(g, specs, expr, sched)
    if qc is not None:
        return DVerdict(g, "certified-out", qc, qc.quotient,
                        {"quotient_order": qc.h.target.oracles[0].order, "modulus": qc.modulus})
    return DVerdict(g, "unknown")


@dataclass(frozen=True)
class QRow:
    L: int
    M: int
    exact_rank: int
    inner_rank: int
    free_rank: int
    torsion: tuple
    saturated: bool

    def as_dict(self):
        return {"L": self.L, "M": self.M, "exact_rank": self.exact_rank, "inner_rank": self.inner_rank,
                "free_rank": self.free_rank, "torsion": list(self.torsion), "saturated": self.saturated}


@dataclass
class QReport:
    setup: str
    rows: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    witness_classes: dict = field(default_factory=dict)
    label: str = QUOTIENT_LABEL

    def for_L(self, L: int) -> list:
        return [r for r in self.rows if r.L == L]

    def final(self, L: int) -> QRow | None:
        rs = self.for_L(L)
        return rs[-1] if rs else None

    def stable(self, L: int) -> bool:
        """Invariants agree on the last two M values at this L (or the lattice is saturated)."""
        rs = self.for_L(L)
        if rs and rs[-1].saturated:
            return True
        return len(rs) >= 2 and (rs[-1].free_rank, rs[-1].torsion) == (rs[-2].free_rank, rs[-2].torsion)

    @property
    def saturated(self) -> bool:
        Ls = sorted({r.L for r in self.rows})
        return bool(Ls) and all(self.final(L).saturated for L in Ls)

    @property
    def final_M(self) -> dict:
        return {L: self.final(L).M for L in sorted({r.L for r in self.rows})}

    def stable_invariants(self):
        """(free rank, torsion) when every L is stable with the same value, else None."""
        Ls = sorted({r.L for r in self.rows})
        vals = set()
        for L in Ls:
            if not self.stable(L):
                return None
            f = self.final(L)
            vals.add((f.free_rank, f.torsion))
        return vals.pop() if len(vals) == 1 else None

    def as_dict(self) -> dict:
        st = self.stable_invariants()
        return {
            "schema": QREPORT_SCHEMA,
            "setup": self.setup,
            "label": self.label,
            "stabilization": [r.as_dict() for r in self.rows],
            "skipped": self.skipped,
            "saturated": self.saturated,
            "stable": None if st is None else {"free_rank": st[0], "torsion": list(st[1])},
            "witness_classes": self.witness_classes,
        }


def default_M_schedule(L: int) -> list[int]:
    return list(range(L, 2 * L + 3))


def ball_size(ctx: FreeContext, M: int) -> int:
    """Number of reduced words of norm <= M, counted without enumerating them."""
    r = ctx.rank
    # ways[n][i]: words of norm n whose last syllable lies in factor i
    ways = [[0] * r for _ in range(M + 1)]
    total = 1
    for n in range(1, M + 1):
        for i, o in enumerate(ctx.oracles):
            if o.kind == "integers":
                syl = [(e, 2) for e in range(1, n + 1)]
            else:
                syl = [(1, o.order - 1)]
            acc = 0
            for e, k in syl:
                prev = n - e
                if prev == 0:
                    acc += k
                elif prev > 0:
                    acc += k * (sum(ways[prev]) - ways[prev][i])
            ways[n][i] = acc
        total += sum(ways[n])
    return total


def max_cells(default: int = 25000) -> int:
    import os

    try:
        return int(os.environ.get("SYMRING_MAX_CELLS", default))
    except ValueError:
        return default


def _qrow(L, M, ex, inner) -> QRow:
    qi = quotient_invariants(ex, inner)
    sat = inner.rank == ex.rank and qi.free_rank == 0 and not qi.torsion
    return QRow(L, M, ex.rank, inner.rank, qi.free_rank, qi.torsion, sat)


def q_invariants_report(specs: Sequence[IdealSpec], L_sweep: Sequence[int], M_schedule=None,
                        setup: str = "", stop_when_saturated: bool = True, cap: int | None = None) -> QReport:
    """Invariants of (exact intersection)/(inner symmetric product) over a window sweep."""
    ctx = _shared_ctx(specs)
    cap = max_cells() if cap is None else cap
    rep = QReport(setup or " ∩ ".join(s.name for s in specs))
    for L in L_sweep:
        ex = exact_intersection_lattice(specs, L)
        sched = default_M_schedule(L) if M_schedule is None else [M for M in M_schedule if M >= L]
        for M in sched:
            if ball_size(ctx, M) > cap:
                rep.skipped.append({"L": L, "M": M, "reason": f"ball({M}) exceeds SYMRING_MAX_CELLS={cap}"})
                continue
            inner = symmetric_product_inner(specs, L, M, exact=ex)
            row = _qrow(L, M, ex, inner)
            rep.rows.append(row)
            if row.saturated and stop_when_saturated:
                break
    return rep


def saturation_verify(specs: Sequence[IdealSpec], L: int, M_schedule=None, disjoint: bool = True,
                      cap: int | None = None) -> QReport:
    """Grow M until the inner symmetric product meets the exact intersection (disjoint blocks)."""
    if disjoint:
        blocks = [s.block() for s in specs]
        for a, b in itertools.combinations(blocks, 2):
            if a & b:
                raise PreconditionError("ideal generators must lie in pairwise disjoint generator blocks")
        for s in specs:
            for w in s.generators:
                if len(w) != 1:
                    raise PreconditionError("disjoint-block case expects generator letters as relators")
    return q_invariants_report(specs, [L], M_schedule, setup="saturation", cap=cap)


def class_coordinates(v: Sequence[int], ex: TruncatedLattice, inner: TruncatedLattice) -> dict:
    """Class of v in ex/inner: free coordinates and torsion residues."""
    a = lattice_membership(v, ex)
    if a is None:
        raise LatticeError("vector is not in the numerator lattice")
    C = [lattice_membership(r, ex) for r in inner.basis]
    if any(c is None for c in C):
        raise ContainmentError("denominator not inside numerator")
    diag, V = smith_form(C, ex.rank)
    ap = [sum(a[i] * V[i][j] for i in range(ex.rank)) for j in range(ex.rank)]
    torsion = [[ap[i] % d, d] for i, d in enumerate(diag) if d > 1]
    free = ap[len(diag):]
    zero = all(x == 0 for x in free) and all(t[0] == 0 for t in torsion)
    return {"zero": zero, "free": free, "torsion": torsion}


def hurewicz_class(g: Word, specs: Sequence[IdealSpec], L: int, M: int, exact=None, inner=None) -> dict:
    """Class of g - 1 in (exact intersection)/(inner symmetric product) at (L, M)."""
    ctx = _shared_ctx(specs)
    for s in specs:
        if s.projection.apply(g) != ():
            raise PreconditionError(f"word is not in {s.name}")
    x = RingElement.minus_one(ctx, g)
    win = window(ctx, L)
    v = vectorize(x, win)
    ex = exact if exact is not None else exact_intersection_lattice(specs, L)
    inner = inner if inner is not None else symmetric_product_inner(specs, L, M, exact=ex)
    return class_coordinates(v, ex, inner)


# ---------------------------------------------------------------------------
# Schreier transversals


def schreier_transversal(h: GeneratorMap, within: GeneratorMap | None = None, max_norm: int = 8) -> dict:
    """Shortlex-least word for each coset of ker h, optionally inside ker ``within``."""
    ctx = h.source
    oracle = h.target.oracles[0]
    need = set(range(oracle.order))
    T: dict = {}
    for w in ctx.ball(max_norm):
        img = h.apply(w)
        e = img[0][1] if img else oracle.identity
        if e in T:
            continue
        if within is not None and within.apply(w) != ():
            continue
        T[e] = w
        if len(T) == len(need):
            break
    if len(T) != len(need):
        raise PreconditionError("no transversal found inside the requested subgroup")
    return T


def schreier_decompose(f: Word, h: GeneratorMap, T: dict, within: GeneratorMap | None = None) -> tuple:
    """f = t s with t in T and s in ker h."""
    ctx = h.source
    oracle = h.target.oracles[0]
    if T.get(oracle.identity, None) != ():
        raise PreconditionError("transversal must use the empty word for the trivial coset")
    if within is not None:
        for t in T.values():
            if within.apply(t) != ():
                raise PreconditionError(f"transversal word {ctx.format_word(t)} is outside the declared subgroup")
    img = h.apply(f)
    e = img[0][1] if img else oracle.identity
    if e not in T:
        raise PreconditionError("transversal incomplete for this coset")
    t = T[e]
    s = ctx.mul(ctx.inv(t), f)
    assert h.apply(s) == ()
    return t, s


# ---------------------------------------------------------------------------
# finite group rings: N ∩ (1 + Δ(N)Δ(G))


FINITE_SCHEMA = "symring.finite-certificate/1"
SATURATION_SCHEMA = "symring.saturation-certificate/1"


def _relative_generators(oracle: GroupOracle, N: Sequence[int]) -> list[tuple[int, int, list[int]]]:
    ring = FiniteGroupRing(oracle)
    out = []
    for a in N:
        if a == oracle.identity:
            continue
        for g in range(oracle.order):
            if g != oracle.identity:
                out.append((a, g, ring.mul(ring.minus_one(a), ring.minus_one(g))))
    return out


@dataclass
class FiniteCertificate:
    """Exhaustive check of {n in N : n - 1 in Δ(N)Δ(G)} = [N, N] in a finite group ring.

    Members carry an explicit combination of the spanning products
    (a - 1)(g - 1); non-members carry a functional vanishing on all of them.
    """

    oracle: GroupOracle
    normal: tuple
    entries: list

    def problems(self) -> list[str]:
        from .oracles import commutator_subgroup, is_normal, subgroup_closure

        o = self.oracle
        errs = []
        N = set(self.normal)
        if subgroup_closure(o, N) != N or not is_normal(o, N):
            return ["N is not a normal subgroup"]
        gens = {(a, g): v for a, g, v in _relative_generators(o, sorted(N))}
        ring = FiniteGroupRing(o)
        members = set()
        if sorted(e["element"] for e in self.entries) != sorted(N):
            errs.append("entries do not cover N exactly")
        for e in self.entries:
            target = ring.minus_one(e["element"])
            if e["in"]:
                acc = [0] * o.order
                for a, g, c in e["combination"]:
                    v = gens.get((a, g))
                    if v is None:
                        errs.append(f"{o.element_names[e['element']]}: unknown spanning product")
                        break
                    acc = [x + c * y for x, y in zip(acc, v)]
                if acc != target:
                    errs.append(f"{o.element_names[e['element']]}: combination does not reproduce n - 1")
                members.add(e["element"])
            else:
                f, m = e["functional"], e["modulus"]

                def val(v):
                    t = sum(x * y for x, y in zip(f, v))
                    return t % m if m else t

                if any(val(v) for v in gens.values()) or not val(target):
                    errs.append(f"{o.element_names[e['element']]}: functional does not separate")
        if members != commutator_subgroup(o, sorted(N)):
            errs.append("members differ from [N, N]")
        return errs

    def replay(self) -> bool:
        return not self.problems()

    def to_json(self) -> dict:
        names = self.oracle.element_names
        entries = []
        for e in self.entries:
            d = {"element": names[e["element"]], "in": e["in"]}
            if e["in"]:
                d["combination"] = [[names[a], names[g], c] for a, g, c in e["combination"]]
            else:
                d["functional"] = list(e["functional"])
                d["modulus"] = e["modulus"]
            entries.append(d)
        return {"schema": FINITE_SCHEMA, "group": self.oracle.to_json(),
                "normal_subgroup": [names[a] for a in self.normal],
                "claim": "N ∩ (1 + Δ(N)Δ(G)) = [N,N]", "entries": entries}

    @classmethod
    def from_json(cls, data) -> "FiniteCertificate":
        if data.get("schema") != FINITE_SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        o = GroupOracle.from_json(data["group"])
        el = o.element
        entries = []
        for d in data["entries"]:
            e = {"element": el(d["element"]), "in": bool(d["in"])}
            if e["in"]:
                e["combination"] = [(el(a), el(g), int(c)) for a, g, c in d["combination"]]
            else:
                e["functional"] = [int(x) for x in d["functional"]]
                e["modulus"] = int(d["modulus"])
            entries.append(e)
        return cls(o, tuple(el(a) for a in data["normal_subgroup"]), entries)


def relative_augmentation_check(oracle: GroupOracle, N: Iterable[int]) -> FiniteCertificate:
    """Decide n - 1 in Δ(N)Δ(G) for every n in N, with a certificate per element."""
    from .oracles import is_normal, subgroup_closure

    N = sorted(set(N))
    if subgroup_closure(oracle, N) != set(N) or not is_normal(oracle, N):
        raise PreconditionError("N must be a normal subgroup")
    gens = _relative_generators(oracle, N)
    n = oracle.order
    big = n
    piv: dict = {}
    for t, (_, _, v) in enumerate(gens):
        row = {i: x for i, x in enumerate(v) if x}
        row[big + t] = 1
        sparse_insert(piv, row)
    lat = TruncatedLattice.from_rows(n, [v for _, _, v in gens]) if gens else TruncatedLattice.zero(n)
    ring = FiniteGroupRing(oracle)
    entries = []
    for a in N:
        target = ring.minus_one(a)
        combo = _express(piv, big, {i: x for i, x in enumerate(target) if x})
        if combo is not None:
            entries.append({"element": a, "in": True,
                            "combination": [(gens[k][0], gens[k][1], c) for k, c in combo]})
        else:
            f, m = separating_functional(target, lat)
            entries.append({"element": a, "in": False, "functional": f, "modulus": m})
    return FiniteCertificate(oracle, tuple(N), entries)


# ---------------------------------------------------------------------------
# saturation certificates


def spec_to_json(s: IdealSpec) -> dict:
    fw = s.ctx.format_word
    return {"name": s.name, "generators": [fw(w) for w in s.generators], "projection": map_to_json(s.projection)}


def spec_from_json(d, ctx: FreeContext) -> IdealSpec:
    h = map_from_json(d["projection"])
    if not h.source.same(ctx):
        raise ValueError("projection source differs from the certificate context")
    return IdealSpec(d["name"], tuple(ctx.parse_word(w) for w in d["generators"]), h)


@dataclass
class SaturationCertificate:
    """The inner symmetric product at cap M meets the exact intersection at window L.

    Every exact basis vector carries a replayable membership certificate; the
    reverse inclusion holds because products of the ideals lie in each of them.
    Replay recomputes the exact lattice from the projections.
    """

    ctx: FreeContext
    specs: list
    L: int
    M: int
    members: list

    def problems(self) -> list[str]:
        ex = exact_intersection_lattice(self.specs, self.L)
        win = ex.window
        want = sorted(tuple(r) for r in ex.basis)
        got = []
        errs = []
        for k, c in enumerate(self.members):
            try:
                got.append(tuple(vectorize(c.element, win)))
            except SupportEscape:
                errs.append(f"member {k}: outside the window")
                continue
            if c.expression not in ("symmetric", "ideal"):
                errs.append(f"member {k}: not a symmetric-product certificate")
            if c.ideal_generators != tuple(tuple(s.generators) for s in self.specs):
                errs.append(f"member {k}: ideal generators differ")
            errs.extend(f"member {k}: {p}" for p in c.problems())
        if sorted(got) != want:
            errs.append("members are not the exact lattice basis")
        return errs

    def replay(self) -> bool:
        return not self.problems()

    def to_json(self) -> dict:
        return {"schema": SATURATION_SCHEMA, "context": ctx_to_json(self.ctx),
                "ideals": [spec_to_json(s) for s in self.specs], "window": {"L": self.L, "M": self.M},
                "claim": "exact intersection = inner symmetric product",
                "members": [c.to_json() for c in self.members]}

    @classmethod
    def from_json(cls, data) -> "SaturationCertificate":
        if data.get("schema") != SATURATION_SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        ctx = ctx_from_json(data["context"])
        specs = [spec_from_json(d, ctx) for d in data["ideals"]]
        return cls(ctx, specs, int(data["window"]["L"]), int(data["window"]["M"]),
                   [Certificate.from_json(c) for c in data["members"]])


def saturation_certificate(specs: Sequence[IdealSpec], L: int, M: int,
                           exact: TruncatedLattice | None = None) -> SaturationCertificate | None:
    ctx = _shared_ctx(specs)
    ex = exact if exact is not None else exact_intersection_lattice(specs, L)
    win = ex.window
    els = [RingElement(ctx, {win.words[i]: c for i, c in enumerate(r) if c}) for r in ex.basis]
    certs = find_certificates(els, specs, M, L=L)
    if any(c is None for c in certs):
        return None
    return SaturationCertificate(ctx, list(specs), L, M, certs)


def load_certificate(data):
    """Parse any certificate JSON by its schema field."""
    kinds = {CERT_SCHEMA: Certificate, QCERT_SCHEMA: QuotientCertificate,
             FINITE_SCHEMA: FiniteCertificate, SATURATION_SCHEMA: SaturationCertificate}
    schema = data.get("schema") if isinstance(data, dict) else None
    if schema not in kinds:
        raise ValueError(f"unknown certificate schema {schema!r}")
    return kinds[schema].from_json(data)
