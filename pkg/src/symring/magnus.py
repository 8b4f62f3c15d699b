"""Truncated noncommutative power series and the Magnus embedding.

x_i goes to 1 + X_i and x_i^-1 to 1 - X_i + X_i^2 - ...; a word lies in the
n-th lower central series term exactly when its image minus 1 has no terms of
degree below n (the fundamental theorem of free group rings).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .groups import FreeContext, GroupError, Word
from .groupring import RingElement, window
from .intlinalg import TruncatedLattice

DEFAULT_CAP = 6


class AtLeast(int):
    """Lower bound reported when no nonzero term appears up to the cap."""

    def __repr__(self):
        return f">={int(self)}"

    __str__ = __repr__


@dataclass(frozen=True)
class TruncSeries:
    """Integer combination of monomials (tuples of variable indices) of degree <= cap."""

    nvars: int
    cap: int
    terms: Mapping

    def __post_init__(self):
        for m, c in self.terms.items():
            if len(m) > self.cap:
                raise ValueError("monomial above the degree cap")
            if not c:
                raise ValueError("zero coefficient stored")
            if any(not 0 <= v < self.nvars for v in m):
                raise ValueError("variable index out of range")

    @classmethod
    def one(cls, nvars: int, cap: int) -> "TruncSeries":
        return cls(nvars, cap, {(): 1})

    @classmethod
    def zero(cls, nvars: int, cap: int) -> "TruncSeries":
        return cls(nvars, cap, {})

    @classmethod
    def variable(cls, nvars: int, cap: int, i: int) -> "TruncSeries":
        return cls(nvars, cap, {(i,): 1} if cap >= 1 else {})

    def __mul__(self, other: "TruncSeries") -> "TruncSeries":
        return ts_multiply(self, other, min(self.cap, other.cap))

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) - c
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return TruncSeries(self.nvars, min(self.cap, other.cap), out)

    def min_degree(self) -> int | None:
        return min((len(m) for m in self.terms), default=None)

    def format(self, names=None) -> str:
        names = names or [f"X{i}" for i in range(self.nvars)]
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (len(m), m)):
            c = self.terms[m]
            mono = "".join(names[v] for v in m) or "1"
            coeff = "" if abs(c) == 1 and m else str(abs(c))
            parts.append(("-" if c < 0 else "+") + " " + (coeff + ("*" if coeff and m else "") + (mono if m else "")))
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else "-" + s[2:]


def ts_multiply(x: TruncSeries, y: TruncSeries, c: int) -> TruncSeries:
    if x.nvars != y.nvars:
        raise ValueError("series over different variable sets")
    out: dict = {}
    for m, a in x.terms.items():
        if len(m) > c:
            continue
        room = c - len(m)
        for n, b in y.terms.items():
            if len(n) <= room:
                k = m + n
                out[k] = out.get(k, 0) + a * b
    return TruncSeries(x.nvars, c, {k: v for k, v in out.items() if v})


def _letter_series(nvars: int, cap: int, i: int, e: int) -> TruncSeries:
    """(1 + X_i)^e truncated; binomial series for negative e."""
    terms = {}
    coeff = 1
    for d in range(cap + 1):
        if coeff:
            terms[(i,) * d] = coeff
        coeff = coeff * (e - d) // (d + 1)
    return TruncSeries(nvars, cap, terms)


def magnus_image(w: Word, c: int, ctx: FreeContext | None = None, nvars: int | None = None) -> TruncSeries:
    if ctx is not None:
        if not ctx.is_free:
            raise GroupError("the Magnus embedding needs a free context")
        nvars = ctx.rank
    if nvars is None:
        nvars = 1 + max((i for i, _ in w), default=0)
    acc = TruncSeries.one(nvars, c)
    for i, e in w:
        acc = ts_multiply(acc, _letter_series(nvars, c, i, e), c)
    return acc


def gamma_degree(w: Word, cmax: int = DEFAULT_CAP, ctx: FreeContext | None = None) -> int:
    """Least degree of a nonzero term of magnus(w) - 1, or AtLeast(cmax + 1)."""
    nv = ctx.rank if ctx is not None else None
    m = magnus_image(w, cmax, ctx, nv)
    d = (m - TruncSeries.one(m.nvars, cmax)).min_degree()
    return AtLeast(cmax + 1) if d is None else d


def magnus_of_element(x: RingElement, c: int) -> TruncSeries:
    ctx = x.ctx
    out: dict = {}
    for w, k in x.terms.items():
        for m, a in magnus_image(w, c, ctx).terms.items():
            out[m] = out.get(m, 0) + k * a
    return TruncSeries(ctx.rank, c, {m: v for m, v in out.items() if v})


def augmentation_power_exact(ctx: FreeContext, n: int, L: int) -> TruncatedLattice:
    """f^n ∩ Span(norm <= L): window vectors whose Magnus image has no term of degree < n."""
    from .ideals import kernel_lattice

    win = window(ctx, L)
    images = [dict(magnus_image(w, n - 1, ctx).terms) for w in win.words]
    return kernel_lattice(images, win)


def augmentation_power_inner(ctx: FreeContext, n: int, L: int, M: int) -> TruncatedLattice:
    """Span of (x_{i_1}-1)...(x_{i_n}-1)u with all words of norm <= M, cut to the L-window.

    f^n is the sum of the right ideals (x_{i_1}-1)...(x_{i_n}-1)Z[F], so this
    is an inner approximation that only grows with M.
    """
    from .ideals import _eliminate, _sparse_to_lattice, right_cofactors

    norm, mul = ctx.norm, ctx.mul
    level = [{(): 1}]
    for _ in range(n):
        new = {}
        for p in level:
            for i in range(ctx.rank):
                x = ((i, 1),)
                q: dict = {}
                ok = True
                for s, k in p.items():
                    sx = mul(s, x)
                    if norm(sx) > M:
                        ok = False
                        break
                    q[sx] = q.get(sx, 0) + k
                    q[s] = q.get(s, 0) - k
                if ok:
                    q = {u: k for u, k in q.items() if k}
                    new.setdefault(frozenset(q.items()), q)
        level = list(new.values())
    gens = []
    seen = set()
    for p in level:
        for f in right_cofactors(ctx, list(p), M):
            q = {mul(s, f): k for s, k in p.items()}
            key = frozenset(q.items())
            if key not in seen:
                seen.add(key)
                gens.append((q, None))
    win = window(ctx, L)
    piv, _ = _eliminate(gens, win)
    return _sparse_to_lattice(piv, win, lo=0)
