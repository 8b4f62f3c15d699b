"""Normalized words in free groups and free products of copies of a group.

A context is an ordered list of factors, each carrying a group oracle.  A free
group of rank ``r`` is the free product of ``r`` copies of the integers, so a
single word type serves both regimes: a word is a tuple of syllables
``(factor index, value)`` where ``value`` is a nonzero exponent for the
integers oracle and a non-identity element id for a finite oracle.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

Syllable = tuple[int, int]
Word = tuple[Syllable, ...]

IDENTITY: Word = ()


class GroupError(ValueError):
    pass


class ContextMismatch(GroupError):
    pass


# ---------------------------------------------------------------------------
# oracles


@dataclass(frozen=True, eq=False)
class GroupOracle:
    """Either the infinite cyclic group or a finite group given by its table.

    For the integers oracle elements are integers with identity 0.  For a
    finite table elements are indices ``0..order-1``.
    """

    name: str
    kind: str  # "integers" | "finite"
    element_names: tuple[str, ...] = ()
    identity: int = 0
    table: tuple[tuple[int, ...], ...] = ()
    inverses: tuple[int, ...] = ()

    @classmethod
    def integers(cls) -> "GroupOracle":
        return INTEGERS

    @classmethod
    def from_table(cls, name, elements, identity, table, check=True):
        elements = tuple(str(e) for e in elements)
        index = {e: i for i, e in enumerate(elements)}
        if len(index) != len(elements):
            raise GroupError(f"{name}: duplicate element names")
        if isinstance(identity, str):
            if identity not in index:
                raise GroupError(f"{name}: identity {identity!r} not an element")
            identity = index[identity]
        rows = []
        for row in table:
            rows.append(tuple(index[x] if isinstance(x, str) else int(x) for x in row))
        n = len(elements)
        if len(rows) != n or any(len(r) != n for r in rows):
            raise GroupError(f"{name}: table must be {n}x{n}")
        if any(not 0 <= x < n for r in rows for x in r):
            raise GroupError(f"{name}: table entry out of range")
        inverses = []
        for a in range(n):
            inv = [b for b in range(n) if rows[a][b] == identity]
            if len(inv) != 1:
                raise GroupError(f"{name}: element {elements[a]} has no unique inverse")
            inverses.append(inv[0])
        oracle = cls(name, "finite", elements, identity, tuple(rows), tuple(inverses))
        if check:
            oracle.validate()
        return oracle

    @classmethod
    def from_json(cls, data) -> "GroupOracle":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        return cls.from_table(data["name"], data["elements"], data["identity"], data["table"])

    def to_json(self) -> dict:
        if self.kind == "integers":
            return {"name": self.name, "kind": "integers"}
        names = self.element_names
        return {
            "name": self.name,
            "elements": list(names),
            "identity": names[self.identity],
            "table": [[names[x] for x in row] for row in self.table],
        }

    def validate(self) -> None:
        """Check identity, inverses and associativity; raise GroupError otherwise."""
        if self.kind == "integers":
            return
        t, e = self.table, self.identity
        n = len(t)
        for a in range(n):
            if t[e][a] != a or t[a][e] != a:
                raise GroupError(f"{self.name}: {self.element_names[e]} is not a two-sided identity")
            if t[a][self.inverses[a]] != e or t[self.inverses[a]][a] != e:
                raise GroupError(f"{self.name}: inverse table inconsistent")
        for a in range(n):
            ta = t[a]
            for b in range(n):
                tab = t[ta[b]]
                tb = t[b]
                for c in range(n):
                    if tab[c] != ta[tb[c]]:
                        names = self.element_names
                        raise GroupError(
                            f"{self.name}: not associative at "
                            f"({names[a]},{names[b]},{names[c]})"
                        )

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    @property
    def order(self):
        return len(self.table) if self.is_finite else None

    def mul(self, a: int, b: int) -> int:
        if self.kind == "integers":
            return a + b
        return self.table[a][b]

    def inv(self, a: int) -> int:
        if self.kind == "integers":
            return -a
        return self.inverses[a]

    def power(self, a: int, k: int) -> int:
        if self.kind == "integers":
            return a * k
        if k < 0:
            a, k = self.inverses[a], -k
        r = self.identity
        for _ in range(k):
            r = self.table[r][a]
        return r

    def weight(self, a: int) -> int:
        return abs(a) if self.kind == "integers" else 1

    def non_identity(self) -> range:
        if not self.is_finite:
            raise GroupError("integers oracle has infinitely many elements")
        return [a for a in range(len(self.table)) if a != self.identity]

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.table[x][a]
            k += 1
        return k

    def label(self, a: int) -> str:
        return str(a) if self.kind == "integers" else self.element_names[a]

    def element(self, name) -> int:
        if self.kind == "integers":
            return int(name)
        try:
            return self.element_names.index(str(name))
        except ValueError:
            raise GroupError(f"{self.name}: unknown element {name!r}") from None

    def __repr__(self):
        return f"GroupOracle({self.name!r})"


INTEGERS = GroupOracle("Z", "integers")


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True, eq=False)
class FreeContext:
    """Free product of the factor oracles; names label the factors.

    Syllable weights give the truncation norm: ``|exponent|`` for integer
    factors and 1 for every element of a finite factor.
    """

    names: tuple[str, ...]
    oracles: tuple[GroupOracle, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise GroupError("generator names must be distinct")
        if len(self.names) != len(self.oracles):
            raise GroupError("one oracle per factor")

    @classmethod
    def free(cls, names) -> "FreeContext":
        if isinstance(names, str):
            names = names.replace(",", " ").split()
        names = tuple(names)
        return cls(names, (INTEGERS,) * len(names))

    @classmethod
    def free_product(cls, oracle: GroupOracle, copies: int, prefix: str = "x") -> "FreeContext":
        return cls(tuple(f"{prefix}{i}" for i in range(copies)), (oracle,) * copies)

    @classmethod
    def finite(cls, oracle: GroupOracle) -> "FreeContext":
        """One-factor context: words are the elements of a finite group."""
        return cls((oracle.name,), (oracle,))

    @cached_property
    def key(self):
        return (self.names, tuple(id(o) for o in self.oracles))

    def same(self, other: "FreeContext") -> bool:
        return self is other or self.key == other.key

    @property
    def rank(self) -> int:
        return len(self.names)

    @cached_property
    def is_free(self) -> bool:
        return all(o.kind == "integers" for o in self.oracles)

    @cached_property
    def is_finite_group(self) -> bool:
        return len(self.oracles) == 1 and self.oracles[0].is_finite

    def check_word(self, w: Word) -> None:
        prev = None
        for i, v in w:
            if not 0 <= i < len(self.oracles):
                raise GroupError(f"invalid generator index {i}")
            o = self.oracles[i]
            if o.is_finite:
                if not 0 <= v < o.order:
                    raise GroupError(f"invalid element id {v} for factor {self.names[i]}")
                if v == o.identity:
                    raise GroupError("identity syllable in normalized word")
            elif v == 0:
                raise GroupError("zero exponent in normalized word")
            if i == prev:
                raise GroupError("adjacent syllables share a factor")
            prev = i

    # core arithmetic ------------------------------------------------------

    def normalize(self, syllables: Iterable[Syllable]) -> Word:
        """Freely reduce a raw syllable sequence (cascading cancellation)."""
        oracles = self.oracles
        n = len(oracles)
        out: list[Syllable] = []
        for i, v in syllables:
            if not 0 <= i < n:
                raise GroupError(f"invalid generator index {i}")
            o = oracles[i]
            if o.is_finite and not 0 <= v < o.order:
                raise GroupError(f"invalid element id {v} for factor {self.names[i]}")
            if out and out[-1][0] == i:
                v = o.mul(out[-1][1], v)
                out.pop()
            if (v != 0) if o.kind == "integers" else (v != o.identity):
                out.append((i, v))
        return tuple(out)

    def mul(self, u: Word, v: Word) -> Word:
        if not u:
            return v
        if not v:
            return u
        oracles = self.oracles
        k = len(u)
        j = 0
        lv = len(v)
        while k and j < lv:
            i, a = u[k - 1]
            i2, b = v[j]
            if i != i2:
                break
            o = oracles[i]
            c = o.mul(a, b)
            if (c == 0) if o.kind == "integers" else (c == o.identity):
                k -= 1
                j += 1
                continue
            return u[: k - 1] + ((i, c),) + v[j + 1:]
        return u[:k] + v[j:]

    def mul_many(self, *words: Word) -> Word:
        r: Word = ()
        for w in words:
            r = self.mul(r, w)
        return r

    def inv(self, u: Word) -> Word:
        oracles = self.oracles
        return tuple((i, oracles[i].inv(a)) for i, a in reversed(u))

    def power(self, u: Word, k: int) -> Word:
        if k < 0:
            u, k = self.inv(u), -k
        r: Word = ()
        base = u
        while k:
            if k & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            k >>= 1
        return r

    def conj(self, u: Word, c: Word) -> Word:
        """``c^-1 u c``."""
        return self.mul(self.mul(self.inv(c), u), c)

    def commutator(self, u: Word, v: Word) -> Word:
        """``[u, v] = u^-1 v^-1 u v``."""
        return self.mul(self.mul(self.inv(u), self.inv(v)), self.mul(u, v))

    def left_normed(self, words: Sequence[Word]) -> Word:
        r = words[0]
        for w in words[1:]:
            r = self.commutator(r, w)
        return r

    def norm(self, w: Word) -> int:
        oracles = self.oracles
        return sum(abs(v) if oracles[i].kind == "integers" else 1 for i, v in w)

    def gen(self, i: int, value: int = 1) -> Word:
        o = self.oracles[i]
        if o.is_finite and value == o.identity:
            return ()
        if not o.is_finite and value == 0:
            return ()
        return ((i, value),)

    def sort_key(self, w: Word):
        return (self.norm(w), w)

    # enumeration -----------------------------------------------------------

    def syllables_of_weight(self, k: int) -> list[Syllable]:
        out = []
        for i, o in enumerate(self.oracles):
            if o.kind == "integers":
                out.extend([(i, -k), (i, k)])
            elif k == 1:
                out.extend((i, a) for a in range(o.order) if a != o.identity)
        return out

    def ball(self, L: int) -> list[Word]:
        """All normalized words of norm <= L, in the fixed enumeration order."""
        if L < 0:
            return []
        return list(self._ball(L))

    def _ball(self, L: int) -> Iterator[Word]:
        # exact[k] = words of norm exactly k, each sorted lexicographically
        exact: list[list[Word]] = [[()]]
        for k in range(1, L + 1):
            words = []
            for w in range(1, k + 1):
                for syl in self.syllables_of_weight(w):
                    for tail in exact[k - w]:
                        if tail and tail[0][0] == syl[0]:
                            continue
                        words.append((syl,) + tail)
            words.sort()
            exact.append(words)
        for k in range(L + 1):
            yield from exact[k]

    # text -----------------------------------------------------------------

    def format_word(self, w: Word) -> str:
        if not w:
            return ""
        parts = []
        for i, v in w:
            o = self.oracles[i]
            if o.kind == "integers":
                parts.append(self.names[i] if v == 1 else f"{self.names[i]}^{v}")
            else:
                parts.append(f"{o.element_names[v]}@{i}")
        return " ".join(parts)

    def parse_word(self, text: str) -> Word:
        text = text.strip()
        if text.startswith("[") and text.endswith("]"):
            text = text[1:-1]
        raw = []
        for tok in text.split():
            raw.extend(self._parse_token(tok))
        return self.normalize(raw)

    _TOKEN = re.compile(r"^([^@^\s]+)(?:\^(-?\d+))?(?:@(\d+))?$")

    def _parse_token(self, tok: str) -> list[Syllable]:
        m = self._TOKEN.match(tok)
        if not m:
            raise GroupError(f"bad word token {tok!r}")
        name, exp, copy = m.group(1), m.group(2), m.group(3)
        k = int(exp) if exp is not None else 1
        if copy is not None:
            i = int(copy)
            if not 0 <= i < self.rank:
                raise GroupError(f"invalid copy index {i} in {tok!r}")
            o = self.oracles[i]
            if o.kind == "integers":
                val = int(name) * k
                return [(i, val)] if val else []
            a = o.power(o.element(name), k)
            return [(i, a)]
        if name not in self.names:
            raise GroupError(f"unknown generator {name!r}")
        i = self.names.index(name)
        o = self.oracles[i]
        if o.is_finite:
            raise GroupError(f"finite factor {name!r} needs element@copy syntax")
        return [(i, k)] if k else []

    def word(self, text: str) -> Word:
        return self.parse_word(text)

    def __repr__(self):
        return f"FreeContext({', '.join(self.names)})"


# ---------------------------------------------------------------------------
# module-level operations


def _same(ctx_a: FreeContext, ctx_b: FreeContext):
    if not ctx_a.same(ctx_b):
        raise ContextMismatch(f"context mismatch: {ctx_a} vs {ctx_b}")


def reduce_word(syllables: Iterable[Syllable], ctx: FreeContext) -> Word:
    return ctx.normalize(syllables)


def multiply(u: Word, v: Word, ctx: FreeContext) -> Word:
    return ctx.mul(u, v)


def inverse(u: Word, ctx: FreeContext) -> Word:
    return ctx.inv(u)


def commutator(u: Word, v: Word, ctx: FreeContext) -> Word:
    return ctx.commutator(u, v)


fp_normalize = reduce_word
fp_multiply = multiply


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True, eq=False)
class GeneratorMap:
    """Homomorphism determined by generator images.

    ``images[i]`` is a Word in the target for an integer factor (the image of
    the generator), or a tuple indexed by element id of target Words for a
    finite factor.
    """

    source: FreeContext
    target: FreeContext
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.source.rank:
            raise GroupError("one image per source factor")
        for i, (o, img) in enumerate(zip(self.source.oracles, self.images)):
            if o.kind == "integers":
                self.target.check_word(img)
            else:
                if len(img) != o.order:
                    raise GroupError(f"factor {i}: need an image for every element")
                for w in img:
                    self.target.check_word(w)

    @classmethod
    def from_words(cls, source, target, images) -> "GeneratorMap":
        """Integer-factor source: images given as Words or text."""
        imgs = tuple(target.parse_word(w) if isinstance(w, str) else tuple(w) for w in images)
        return cls(source, target, imgs)

    @classmethod
    def relabel(cls, source: FreeContext, target: FreeContext, rule: Sequence) -> "GeneratorMap":
        """Copy relabeling: factor ``i`` goes to factor ``rule[i]`` or dies (None).

        Element ids are preserved, so both factors must share the oracle.
        """
        images = []
        for i, j in enumerate(rule):
            o = source.oracles[i]
            if j is not None and target.oracles[j] is not o:
                raise GroupError("relabeling needs the same oracle on both factors")
            if o.kind == "integers":
                images.append(() if j is None else ((j, 1),))
            else:
                images.append(tuple(() if (j is None or a == o.identity) else ((j, a),)
                                    for a in range(o.order)))
        return cls(source, target, tuple(images))

    @classmethod
    def to_finite(cls, source: FreeContext, oracle: GroupOracle, values: Sequence) -> "GeneratorMap":
        """Map a free context onto a finite group: generator ``i`` goes to ``values[i]``."""
        target = FreeContext.finite(oracle)
        if not source.is_free:
            raise GroupError("to_finite expects a free source context")
        images = []
        for v in values:
            a = oracle.element(v) if isinstance(v, str) else int(v)
            images.append(target.gen(0, a))
        return cls(source, target, tuple(images))

    def apply(self, w: Word) -> Word:
        tgt = self.target
        out: Word = ()
        for i, v in w:
            img = self.images[i]
            if self.source.oracles[i].kind == "integers":
                out = tgt.mul(out, tgt.power(img, v))
            else:
                out = tgt.mul(out, img[v])
        return out

    __call__ = apply

    def compose(self, first: "GeneratorMap") -> "GeneratorMap":
        """``self o first`` (apply ``first`` then ``self``)."""
        _same(first.target, self.source)
        images = []
        for i, o in enumerate(first.source.oracles):
            img = first.images[i]
            if o.kind == "integers":
                images.append(self.apply(img))
            else:
                images.append(tuple(self.apply(w) for w in img))
        return GeneratorMap(first.source, self.target, tuple(images))

    @classmethod
    def identity(cls, ctx: FreeContext) -> "GeneratorMap":
        return cls.relabel(ctx, ctx, list(range(ctx.rank)))

    def generator_images(self) -> Iterator[tuple[Word, Word]]:
        """(source generator word, image) pairs over all generators."""
        for i, o in enumerate(self.source.oracles):
            if o.kind == "integers":
                yield ((i, 1),), self.images[i]
            else:
                for a in o.non_identity():
                    yield ((i, a),), self.images[i][a]

    def is_surjective_onto_finite(self) -> bool:
        tgt = self.target
        if not tgt.is_finite_group:
            raise GroupError("surjectivity check needs a finite target")
        o = tgt.oracles[0]
        seen = {o.identity}
        gens = [img[0][1] for _, img in self.generator_images() if img]
        frontier = [o.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = o.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return len(seen) == o.order


def apply_hom(m: GeneratorMap, w: Word) -> Word:
    return m.apply(w)


# ---------------------------------------------------------------------------
# subgroups


class UndecidableMembership(GroupError):
    """Raised when only a normal-generator presentation is available."""


@dataclass(frozen=True, eq=False)
class SubgroupSpec:
    """Normal subgroup via normal generators, a kernel map, or both."""

    ctx: FreeContext
    normal_generators: tuple[Word, ...] | None = None
    kernel_of: GeneratorMap | None = None
    name: str = "R"

    def __post_init__(self):
        if self.normal_generators is None and self.kernel_of is None:
            raise GroupError("SubgroupSpec needs normal generators or a kernel map")
        if self.kernel_of is not None:
            _same(self.kernel_of.source, self.ctx)
            tgt = self.kernel_of.target
            if not (tgt.is_free or tgt.is_finite_group or _all_decidable(tgt)):
                raise GroupError("kernel target must have a decidable word problem")
        if self.normal_generators is not None:
            for w in self.normal_generators:
                self.ctx.check_word(w)

    def contains(self, w: Word) -> bool:
        if self.kernel_of is None:
            raise UndecidableMembership(
                f"{self.name}: only normal generators known; certify membership with witnesses"
            )
        return self.kernel_of.apply(w) == ()

    def cross_validate(self) -> bool:
        """Every normal generator lies in the kernel (when both are present)."""
        if self.kernel_of is None or self.normal_generators is None:
            return True
        return all(self.kernel_of.apply(w) == () for w in self.normal_generators)


def _all_decidable(ctx: FreeContext) -> bool:
    return all(o.kind == "integers" or o.is_finite for o in ctx.oracles)


def subgroup_membership(s: SubgroupSpec, w: Word) -> bool:
    return s.contains(w)


# ---------------------------------------------------------------------------
# symmetric commutator witnesses


@dataclass(frozen=True)
class Conj:
    """Leaf: ``c^-1 g^sign c`` for normal generator ``g`` of subgroup ``spec``."""

    spec: int
    generator: Word
    sign: int
    conjugator: Word


@dataclass(frozen=True)
class Bracket:
    left: object
    right: object


@dataclass(frozen=True)
class Product:
    factors: tuple


def evaluate(expr, ctx: FreeContext) -> Word:
    if isinstance(expr, Conj):
        g = expr.generator if expr.sign > 0 else ctx.inv(expr.generator)
        return ctx.conj(g, expr.conjugator)
    if isinstance(expr, Bracket):
        return ctx.commutator(evaluate(expr.left, ctx), evaluate(expr.right, ctx))
    if isinstance(expr, Product):
        return ctx.mul_many(*(evaluate(f, ctx) for f in expr.factors))
    raise TypeError(expr)


@dataclass(frozen=True)
class Witness:
    word: Word
    expr: object


def _conjugate_leaves(spec_index, spec: SubgroupSpec, depth: int):
    ctx = spec.ctx
    for c in ctx.ball(depth):
        for g in spec.normal_generators:
            for sign in (1, -1):
                yield Conj(spec_index, g, sign, c)


def _compositions(total: int, parts: int, cap: int):
    """Tuples of ``parts`` integers in [0, cap] summing to ``total``, lexicographically."""
    if parts == 1:
        if 0 <= total <= cap:
            yield (total,)
        return
    for k in range(min(total, cap) + 1):
        for rest in _compositions(total - k, parts - 1, cap):
            yield (k,) + rest


def symmetric_commutator_witness_exprs(specs: Sequence[SubgroupSpec], depth: int, count: int,
                                       products: bool = True) -> list[Witness]:
    """Elements of ``[R_1,...,R_n]_S`` with their derivations.

    Left-normed brackets of conjugated normal generators over every ordering
    of the subgroups, enumerated by total conjugator norm; then products of
    adjacent brackets.  Trivial and duplicate words are skipped.
    """
    n = len(specs)
    if n < 2:
        raise GroupError("symmetric commutators need n >= 2")
    ctx = specs[0].ctx
    for s in specs:
        _same(s.ctx, ctx)
        if s.normal_generators is None:
            raise GroupError(f"{s.name}: normal generators required")
    leaves = [list(_conjugate_leaves(i, s, depth)) for i, s in enumerate(specs)]
    buckets = []
    for ls in leaves:
        b: dict = {}
        for c in sorted(ls, key=lambda c: (ctx.norm(c.conjugator), c.conjugator, c.generator, -c.sign)):
            b.setdefault(ctx.norm(c.conjugator), []).append(c)
        buckets.append(b)
    out: list[Witness] = []
    seen = set()
    singles: list[Witness] = []
    perms = list(itertools.permutations(range(n)))
    budget = count if not products else max(1, (2 * count) // 3)

    def combos(total):
        for perm in perms:
            for split in _compositions(total, n, depth):
                pools = [buckets[j].get(k, ()) for j, k in zip(perm, split)]
                yield from itertools.product(*pools)

    for total in range(0, n * depth + 1):
        for combo in combos(total):
            expr = combo[0]
            for c in combo[1:]:
                expr = Bracket(expr, c)
            w = evaluate(expr, ctx)
            if not w or w in seen:
                continue
            seen.add(w)
            singles.append(Witness(w, expr))
            if len(singles) >= budget:
                break
        if len(singles) >= budget:
            break
    out.extend(singles)
    if products:
        for a, b in zip(singles, singles[1:]):
            if len(out) >= count:
                break
            expr = Product((a.expr, b.expr))
            w = ctx.mul(a.word, b.word)
            if w and w not in seen:
                seen.add(w)
                out.append(Witness(w, expr))
    return out[:count]


def symmetric_commutator_witnesses(specs: Sequence[SubgroupSpec], depth: int, count: int) -> list[Word]:
    return [w.word for w in symmetric_commutator_witness_exprs(specs, depth, count)]
