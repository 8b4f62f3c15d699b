"""Exact integer linear algebra over row spaces.

Hermite and Smith normal forms, integer kernels, and the lattice operations
(membership, sum, intersection, quotient invariants) used for every truncated
ideal computation.  Row-vector convention throughout: a lattice is the row
space of its basis matrix.

The HNF kernel has a compiled int64 implementation (``_ckernels``) with
overflow detection; on overflow, or when the extension is not built, the
pure-Python big-integer kernel in ``_pure`` is used.  Set ``SYMRING_PURE=1``
to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Sequence

from . import _pure
from ._pure import sparse_insert, sparse_kernel, sparse_reduce_above, xgcd  # noqa: F401

try:  # pragma: no cover - depends on build
    if os.environ.get("SYMRING_PURE"):
        raise ImportError
    from . import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"

IntMatrix = list  # list of equal-length lists of Python ints


class LatticeError(ValueError):
    pass


class WindowMismatch(LatticeError):
    pass


def _bound(rows) -> int:
    return max((abs(x) for r in rows for x in r), default=0)


def hnf_rows(rows, ncols: int, backend: str | None = None) -> list[list[int]]:
    """Row HNF basis of the row space: echelon, positive pivots, reduced above."""
    rows = [list(r) for r in rows]
    backend = backend or BACKEND
    if backend == "cython" and _ckernels is not None and rows and _bound(rows) < (1 << 40):
        try:
            return _ckernels.hnf_rows(rows, ncols)
        except OverflowError:
            pass
    return _pure.hnf_rows(rows, ncols)


def hnf(m: IntMatrix, ncols: int | None = None) -> list[list[int]]:
    if ncols is None:
        ncols = len(m[0]) if m else 0
    return hnf_rows(m, ncols)


def is_hnf(basis) -> bool:
    last = -1
    for i, r in enumerate(basis):
        c = next((j for j, x in enumerate(r) if x), None)
        if c is None or c <= last or r[c] <= 0:
            return False
        for k in range(i):
            if not 0 <= basis[k][c] < r[c]:
                return False
        last = c
    return True


def snf(m: IntMatrix) -> list[int]:
    """Invariant factors d_1 | d_2 | ... (positive) of an integer matrix."""
    return smith_form(m)[0]


def smith_form(m: IntMatrix, ncols: int | None = None):
    """Invariant factors and a unimodular column transform V.

    Some unimodular U gives U.m.V = diag(d_1, ..., d_r, 0, ...), so the first
    r columns of the new basis carry the invariant factors.
    """
    a = [list(r) for r in m if any(r)]
    nc = ncols if ncols is not None else (len(m[0]) if m else 0)
    V = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    if not a:
        return [], V
    nr = len(a)
    diag = []
    t = 0
    while t < min(nr, nc):
        # smallest nonzero entry in the remaining block
        best = None
        for i in range(t, nr):
            ai = a[i]
            for j in range(t, nc):
                x = ai[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        a[t], a[i] = a[i], a[t]
        for r in a:
            r[t], r[j] = r[j], r[t]
        for r in V:
            r[t], r[j] = r[j], r[t]
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // p
                    if q:
                        ai, at = a[i], a[t]
                        a[i] = [x - q * y for x, y in zip(ai, at)]
                    if a[i][t]:
                        done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // p
                    if q:
                        for r in a:
                            r[j] -= q * r[t]
                        for r in V:
                            r[j] -= q * r[t]
                    if a[t][j]:
                        done = False
            if done:
                # divisibility condition on the remaining block
                bad = None
                for i in range(t + 1, nr):
                    for j in range(t + 1, nc):
                        if a[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                a[t] = [x + y for x, y in zip(a[t], a[bad])]
                continue
            # move the smallest nonzero of row/column t into the pivot slot
            best = (abs(p), t, t)
            for i in range(t + 1, nr):
                if a[i][t] and abs(a[i][t]) < best[0]:
                    best = (abs(a[i][t]), i, t)
            for j in range(t + 1, nc):
                if a[t][j] and abs(a[t][j]) < best[0]:
                    best = (abs(a[t][j]), t, j)
            _, i, j = best
            if i != t:
                a[t], a[i] = a[i], a[t]
            if j != t:
                for r in a:
                    r[t], r[j] = r[j], r[t]
                for r in V:
                    r[t], r[j] = r[j], r[t]
        if a[t][t] < 0:
            for r in V:
                r[t] = -r[t]
            for r in a:
                r[t] = -r[t]
        diag.append(a[t][t])
        t += 1
    return diag, V


def kernel(m: IntMatrix, ncols: int | None = None) -> list[list[int]]:
    """HNF basis of {v : v.m = 0}; saturated by construction."""
    nr = len(m)
    if nr == 0:
        return []
    nc = len(m[0]) if ncols is None else ncols
    aug = [list(r) + [1 if k == i else 0 for k in range(nr)] for i, r in enumerate(m)]
    h = hnf_rows(aug, nc + nr)
    ker = [r[nc:] for r in h if not any(r[:nc])]
    return hnf_rows(ker, nr)


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True, eq=False)
class TruncatedLattice:
    """Sublattice of Z^dim given by a row-HNF basis; ``window`` labels coordinates."""

    window: object
    basis: tuple

    @classmethod
    def from_rows(cls, window, rows) -> "TruncatedLattice":
        d = _dim(window)
        return cls(window, tuple(tuple(r) for r in hnf_rows(rows, d)))

    @classmethod
    def zero(cls, window) -> "TruncatedLattice":
        return cls(window, ())

    @property
    def dim(self) -> int:
        return _dim(self.window)

    @property
    def rank(self) -> int:
        return len(self.basis)

    def same_window(self, other) -> bool:
        a, b = self.window, other.window
        if a is b:
            return True
        if hasattr(a, "same") and hasattr(b, "same"):
            return a.same(b)
        return _dim(a) == _dim(b) and not hasattr(a, "same") and not hasattr(b, "same")

    def __eq__(self, other):
        if not isinstance(other, TruncatedLattice):
            return NotImplemented
        return self.same_window(other) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def coordinates(self, v) -> list[int] | None:
        return lattice_membership(v, self)

    def __contains__(self, v) -> bool:
        return lattice_membership(v, self) is not None

    def contains_lattice(self, other: "TruncatedLattice") -> bool:
        return all(lattice_membership(r, self) is not None for r in other.basis)

    def __repr__(self):
        return f"TruncatedLattice(rank={self.rank}, dim={self.dim})"


def _dim(window) -> int:
    return window if isinstance(window, int) else len(window)


def _check(a: TruncatedLattice, b: TruncatedLattice):
    if not a.same_window(b):
        raise WindowMismatch("lattices live in different windows")


def lattice_membership(v, L: TruncatedLattice) -> list[int] | None:
    """Coordinates c with c.basis = v exactly, or None."""
    v = list(v)
    if len(v) != L.dim:
        raise LatticeError("dimension mismatch")
    coords = []
    for row in L.basis:
        c = next(j for j, x in enumerate(row) if x)
        q, r = divmod(v[c], row[c])
        if r:
            return None
        coords.append(q)
        if q:
            v = [x - q * y for x, y in zip(v, row)]
    if any(v):
        return None
    return coords


def lattice_sum(a: TruncatedLattice, b: TruncatedLattice) -> TruncatedLattice:
    _check(a, b)
    return TruncatedLattice.from_rows(a.window, list(a.basis) + list(b.basis))


def lattice_intersection(a: TruncatedLattice, b: TruncatedLattice) -> TruncatedLattice:
    """Exact intersection via the kernel of the stacked generator system."""
    _check(a, b)
    if not a.basis or not b.basis:
        return TruncatedLattice.zero(a.window)
    stacked = [list(r) for r in a.basis] + [list(r) for r in b.basis]
    ker = kernel(stacked, a.dim)
    na = len(a.basis)
    rows = []
    for k in ker:
        ka = k[:na]
        rows.append([sum(c * r[j] for c, r in zip(ka, a.basis) if c) for j in range(a.dim)])
    return TruncatedLattice.from_rows(a.window, rows)


@dataclass(frozen=True)
class QuotientInvariants:
    free_rank: int
    torsion: tuple[int, ...]

    def as_dict(self):
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


def quotient_invariants(a: TruncatedLattice, b: TruncatedLattice) -> QuotientInvariants:
    """Invariants of A/B for B contained in A."""
    _check(a, b)
    coords = []
    for r in b.basis:
        c = lattice_membership(r, a)
        if c is None:
            raise LatticeError("B is not contained in A")
        coords.append(c)
    factors = snf(coords) if coords else []
    return QuotientInvariants(a.rank - len(factors), tuple(d for d in factors if d > 1))


def coordinate_matrix(a: TruncatedLattice, b: TruncatedLattice) -> list[list[int]]:
    out = []
    for r in b.basis:
        c = lattice_membership(r, a)
        if c is None:
            raise LatticeError("B is not contained in A")
        out.append(c)
    return out


def restrict_to_columns(rows, ncols: int, keep: Sequence[int]) -> list[list[int]]:
    """Sublattice of rows supported on ``keep`` columns, projected onto them.

    The dropped columns are eliminated first, so the result is a basis of
    ``span(rows) ∩ span(e_k : k in keep)`` (exact).
    """
    keep = list(keep)
    keepset = set(keep)
    drop = [j for j in range(ncols) if j not in keepset]
    order = drop + keep
    perm = [[r[j] for j in order] for r in rows]
    h = hnf_rows(perm, ncols)
    nd = len(drop)
    return [r[nd:] for r in h if not any(r[:nd])]
