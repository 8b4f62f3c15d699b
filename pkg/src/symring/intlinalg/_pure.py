"""Pure-Python kernels; always available and used as the reference path."""

from __future__ import annotations

import heapq


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        return -a, -s0, -t0
    return a, s0, t0


def _first_nz(v, start):
    for j in range(start, len(v)):
        if v[j]:
            return j
    return -1


def insert_row(piv: dict, v: list, start: int = 0) -> int:
    """Reduce ``v`` against the echelon rows ``piv`` (column -> row) and insert.

    Returns the pivot column of the inserted row, or -1 if ``v`` reduced to zero.
    Rows are full-length lists; pivots are kept positive.
    """
    j = _first_nz(v, start)
    while j >= 0:
        p = piv.get(j)
        if p is None:
            if v[j] < 0:
                v = [-x for x in v]
            _dense_tail_reduce(piv, v, j)
            piv[j] = v
            return j
        a, b = p[j], v[j]
        q, r = divmod(b, a)
        if r == 0:
            if q == 1:
                v = [x - y for x, y in zip(v, p)]
            elif q == -1:
                v = [x + y for x, y in zip(v, p)]
            else:
                v = [x - q * y for x, y in zip(v, p)]
        else:
            g, s, t = xgcd(a, b)
            ag, bg = a // g, b // g
            newp = [s * y + t * x for x, y in zip(v, p)]
            _dense_tail_reduce(piv, newp, j)
            piv[j] = newp
            v = [ag * x - bg * y for x, y in zip(v, p)]
        _dense_tail_reduce(piv, v, j)
        j = _first_nz(v, j + 1)
    return -1


def _dense_tail_reduce(piv: dict, row: list, j: int) -> None:
    for c in sorted(k for k in piv if k > j):
        x = row[c]
        if x:
            p = piv[c]
            q = x // p[c]
            if q:
                for k in range(c, len(row)):
                    row[k] -= q * p[k]


def reduce_above(piv: dict) -> list[list[int]]:
    """Hermite reduction: bottom-up, each row reduced against the (reduced) rows below."""
    for c in sorted(piv, reverse=True):
        _dense_tail_reduce(piv, piv[c], c)
    return [piv[c] for c in sorted(piv)]


def hnf_rows(rows, ncols: int) -> list[list[int]]:
    piv: dict = {}
    for r in rows:
        r = list(r)
        if len(r) != ncols:
            raise ValueError("ragged matrix")
        insert_row(piv, r)
    return reduce_above(piv)


def sparse_insert(piv: dict, v: dict) -> int:
    """Sparse analogue of ``insert_row``: rows are {column: value} dicts.

    Columns are compared as integers; smaller columns are eliminated first.
    Returns the pivot column of the inserted row or -1.
    """
    v = dict(v)
    while v:
        j = min(v)
        p = piv.get(j)
        if p is None:
            if v[j] < 0:
                v = {k: -x for k, x in v.items()}
            _tail_reduce(piv, v, j)
            piv[j] = v
            return j
        a, b = p[j], v[j]
        q, r = divmod(b, a)
        if r == 0:
            get = v.get
            for k, x in p.items():
                y = get(k, 0) - q * x
                if y:
                    v[k] = y
                else:
                    del v[k]
        else:
            g, s, t = xgcd(a, b)
            ag, bg = a // g, b // g
            newp = {}
            nv = {}
            for k in p.keys() | v.keys():
                x = v.get(k, 0)
                y = p.get(k, 0)
                z = s * y + t * x
                if z:
                    newp[k] = z
                z = ag * x - bg * y
                if z:
                    nv[k] = z
            _tail_reduce(piv, newp, j)
            piv[j] = newp
            v = nv
    return -1


def _tail_reduce(piv: dict, row: dict, j: int) -> None:
    # keep entries small: reduce row at later pivot columns, left to right
    heap = [k for k in row if k > j and k in piv]
    heapq.heapify(heap)
    done = set()
    while heap:
        c = heapq.heappop(heap)
        if c in done:
            continue
        done.add(c)
        x = row.get(c)
        if not x:
            continue
        p = piv[c]
        q = x // p[c]
        if not q:
            continue
        for k, y in p.items():
            z = row.get(k, 0) - q * y
            if z:
                if k not in row and k > c and k in piv:
                    heapq.heappush(heap, k)
                row[k] = z
            else:
                del row[k]


def sparse_reduce_above(piv: dict) -> None:
    """Bring a sparse echelon pivot dict into reduced (Hermite) form in place."""
    cols = sorted(piv)
    for n, c in enumerate(cols):
        row = piv[c]
        for c2 in cols[n + 1:]:
            x = row.get(c2)
            if not x:
                continue
            p = piv[c2]
            q = x // p[c2]
            if q:
                for k, y in p.items():
                    z = row.get(k, 0) - q * y
                    if z:
                        row[k] = z
                    else:
                        del row[k]


def sparse_kernel(images: list) -> list:
    """Integer kernel of the map e_i -> images[i] (sparse dicts).

    Image columns are cleared one at a time, each time pivoting on the row
    with the smallest entry (Euclid across rows when no entry divides the
    others); row operations are unimodular, so the surviving zero-image rows
    are a basis of the kernel lattice.  Returns kernel vectors as
    {row index: coefficient}.
    """
    rows = [(dict(img), {i: 1}) for i, img in enumerate(images)]
    by_col: dict = {}
    for r, (img, _) in enumerate(rows):
        for c in img:
            by_col.setdefault(c, set()).add(r)
    alive = [True] * len(rows)

    def axpy(dst, src, q):
        for k, y in src.items():
            z = dst.get(k, 0) - q * y
            if z:
                dst[k] = z
            else:
                del dst[k]

    # clear cheap columns first
    for c in sorted(by_col, key=lambda c: (len(by_col[c]), repr(c))):
        while True:
            live = [r for r in by_col.get(c, ()) if alive[r] and rows[r][0].get(c)]
            if not live:
                break
            p = min(live, key=lambda r: (abs(rows[r][0][c]), len(rows[r][0]) + len(rows[r][1]), r))
            pimg, pid = rows[p]
            a = pimg[c]
            rest = [r for r in live if r != p]
            if not rest:
                alive[p] = False
                break
            for r in rest:
                img, idv = rows[r]
                q = img[c] // a
                if q:
                    before = set(img)
                    axpy(img, pimg, q)
                    axpy(idv, pid, q)
                    for k in img.keys() - before:
                        by_col.setdefault(k, set()).add(r)
            if all(not rows[r][0].get(c) for r in rest):
                alive[p] = False
                break
    return [idv for (img, idv), ok in zip(rows, alive) if ok and not img]
