"""Integral group rings over a FreeContext: finitely supported combinations."""

from __future__ import annotations

import re
from typing import Mapping

from .groups import ContextMismatch, FreeContext, GeneratorMap, GroupError, Word


class SupportEscape(ValueError):
    """Support of an element leaves the basis window; increase L."""


class RingSyntaxError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


class RingElement:
    """Immutable integer combination of normalized words."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: FreeContext, terms: Mapping[Word, int] | None = None):
        self.ctx = ctx
        self.terms = {w: c for w, c in (terms or {}).items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, ctx, terms):
        x = object.__new__(cls)
        x.ctx = ctx
        x.terms = terms
        x._hash = None
        return x

    @classmethod
    def zero(cls, ctx):
        return cls._raw(ctx, {})

    @classmethod
    def one(cls, ctx):
        return cls._raw(ctx, {(): 1})

    @classmethod
    def of(cls, ctx, w: Word, c: int = 1):
        return cls._raw(ctx, {w: c} if c else {})

    @classmethod
    def minus_one(cls, ctx, w: Word):
        """``w - 1``."""
        if not w:
            return cls.zero(ctx)
        return cls._raw(ctx, {w: 1, (): -1})

    def _check(self, other):
        if not isinstance(other, RingElement):
            raise TypeError(other)
        if not self.ctx.same(other.ctx):
            raise ContextMismatch("ring elements live in different contexts")

    def __add__(self, other):
        self._check(other)
        return RingElement._raw(self.ctx, add_terms(self.terms, other.terms))

    def __sub__(self, other):
        self._check(other)
        return RingElement._raw(self.ctx, add_terms(self.terms, other.terms, -1))

    def __neg__(self):
        return RingElement._raw(self.ctx, {w: -c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._check(other)
        return RingElement._raw(self.ctx, mul_terms(self.ctx, self.terms, other.terms))

    def __rmul__(self, k):
        if isinstance(k, int):
            return self.scale(k)
        return NotImplemented

    def scale(self, k: int):
        if not k:
            return RingElement.zero(self.ctx)
        return RingElement._raw(self.ctx, {w: k * c for w, c in self.terms.items()})

    def lmul_word(self, w: Word):
        mul = self.ctx.mul
        return RingElement._raw(self.ctx, {mul(w, u): c for u, c in self.terms.items()})

    def rmul_word(self, w: Word):
        mul = self.ctx.mul
        return RingElement._raw(self.ctx, {mul(u, w): c for u, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.ctx.same(other.ctx) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def support(self):
        return list(self.terms)

    def max_norm(self) -> int:
        norm = self.ctx.norm
        return max((norm(w) for w in self.terms), default=0)

    def augmentation(self) -> int:
        return sum(self.terms.values())

    def __repr__(self):
        return f"RingElement({format_element(self)!r})"


def add_terms(a: Mapping[Word, int], b: Mapping[Word, int], k: int = 1) -> dict:
    out = dict(a)
    for w, c in b.items():
        v = out.get(w, 0) + k * c
        if v:
            out[w] = v
        else:
            out.pop(w, None)
    return out


def mul_terms(ctx: FreeContext, a: Mapping[Word, int], b: Mapping[Word, int]) -> dict:
    mul = ctx.mul
    out: dict = {}
    get = out.get
    for u, c in a.items():
        for v, d in b.items():
            w = mul(u, v)
            out[w] = get(w, 0) + c * d
    return {w: c for w, c in out.items() if c}


def re_add(x: RingElement, y: RingElement) -> RingElement:
    return x + y


def re_scale(k: int, x: RingElement) -> RingElement:
    return x.scale(k)


def re_mul(x: RingElement, y: RingElement) -> RingElement:
    return x * y


def augmentation(x: RingElement) -> int:
    return x.augmentation()


def transport(m: GeneratorMap, x: RingElement) -> RingElement:
    """Linear extension of ``m`` to the group rings."""
    if not m.source.same(x.ctx):
        raise ContextMismatch("element not in the source context of the map")
    return RingElement._raw(m.target, transport_terms(m, x.terms))


def transport_terms(m: GeneratorMap, terms: Mapping[Word, int]) -> dict:
    out: dict = {}
    apply = m.apply
    for w, c in terms.items():
        v = apply(w)
        out[v] = out.get(v, 0) + c
    return {w: c for w, c in out.items() if c}


# ---------------------------------------------------------------------------
# windows


class BasisWindow:
    """All words of norm <= L in a context, in the fixed enumeration order."""

    def __init__(self, ctx: FreeContext, L: int):
        self.ctx = ctx
        self.L = L
        self.words = ctx.ball(L)
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self):
        return len(self.words)

    def same(self, other: "BasisWindow") -> bool:
        return self is other or (self.ctx.same(other.ctx) and self.L == other.L)

    def __contains__(self, w):
        return w in self.index

    def __repr__(self):
        return f"BasisWindow({self.ctx!r}, L={self.L}, size={len(self.words)})"


_WINDOWS: dict = {}


def window(ctx: FreeContext, L: int) -> BasisWindow:
    key = (ctx.key, L)
    w = _WINDOWS.get(key)
    if w is None:
        w = _WINDOWS[key] = BasisWindow(ctx, L)
    return w


def vectorize(x: RingElement | Mapping[Word, int], w: BasisWindow) -> list[int]:
    terms = x.terms if isinstance(x, RingElement) else x
    v = [0] * len(w.words)
    index = w.index
    for word, c in terms.items():
        i = index.get(word)
        if i is None:
            raise SupportEscape(
                f"support escapes the window (|{w.ctx.format_word(word)}| = "
                f"{w.ctx.norm(word)} > L = {w.L}); increase L"
            )
        v[i] = c
    return v


def devectorize(v, w: BasisWindow) -> RingElement:
    if len(v) != len(w.words):
        raise ValueError("vector length does not match the window")
    return RingElement._raw(w.ctx, {w.words[i]: int(c) for i, c in enumerate(v) if c})


# ---------------------------------------------------------------------------
# text


def format_element(x: RingElement) -> str:
    """Canonical text: terms sorted by the enumeration order of their words."""
    ctx = x.ctx
    items = sorted(x.terms.items(), key=lambda t: ctx.sort_key(t[0]))
    if not items:
        return "0"
    out = []
    for k, (w, c) in enumerate(items):
        body = f"{abs(c)}*[{ctx.format_word(w)}]"
        if k == 0:
            out.append(body if c > 0 else "-" + body)
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)


_TERM = re.compile(r"\s*(\d+)\s*\*\s*\[([^\]]*)\]")


def parse_element(text: str, ctx: FreeContext) -> RingElement:
    s = text
    pos = 0
    n = len(s)

    def skip(p):
        while p < n and s[p].isspace():
            p += 1
        return p

    pos = skip(pos)
    terms: dict = {}
    if s[pos:].strip() == "0":
        return RingElement.zero(ctx)
    first = True
    while pos < n:
        sign = 1
        if s[pos] in "+-":
            sign = -1 if s[pos] == "-" else 1
            pos = skip(pos + 1)
        elif not first:
            raise RingSyntaxError("expected '+' or '-'", pos)
        m = _TERM.match(s, pos)
        if not m:
            raise RingSyntaxError("expected term 'int*[word]'", pos)
        try:
            w = ctx.parse_word(m.group(2))
        except GroupError as e:
            raise RingSyntaxError(str(e), m.start(2)) from None
        terms[w] = terms.get(w, 0) + sign * int(m.group(1))
        pos = skip(m.end())
        first = False
    if first:
        raise RingSyntaxError("empty element", pos)
    return RingElement(ctx, terms)


parse = parse_element
format = format_element  # noqa: A001
