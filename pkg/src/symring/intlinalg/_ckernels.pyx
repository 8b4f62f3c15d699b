# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""int64 row Hermite normal form with overflow detection.

Same elimination as ``_pure.hnf_rows`` (insert with tail reduction, then
reduce above the pivots).  Any overflow raises OverflowError and the caller
falls back to the big-integer path.
"""

from libc.stdlib cimport malloc, free

cdef extern from *:
    """
    static inline int sr_mul(long long a, long long b, long long *r) { return __builtin_mul_overflow(a, b, r); }
    static inline int sr_add(long long a, long long b, long long *r) { return __builtin_add_overflow(a, b, r); }
    static inline int sr_sub(long long a, long long b, long long *r) { return __builtin_sub_overflow(a, b, r); }
    """
    int sr_mul(long long a, long long b, long long *r) nogil
    int sr_add(long long a, long long b, long long *r) nogil
    int sr_sub(long long a, long long b, long long *r) nogil


cdef inline long long floordiv(long long a, long long b) noexcept nogil:
    cdef long long q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef int axpy(long long *dst, long long *src, long long q, int lo, int n) noexcept nogil:
    # dst -= q * src on [lo, n); returns 1 on overflow
    cdef int k
    cdef long long t
    for k in range(lo, n):
        if src[k]:
            if sr_mul(q, src[k], &t) or sr_sub(dst[k], t, &dst[k]):
                return 1
    return 0


cdef int combine(long long *out, long long a, long long *x, long long b, long long *y, int lo, int n) noexcept nogil:
    # out = a*x + b*y on [lo, n)
    cdef int k
    cdef long long s, t
    for k in range(lo, n):
        if sr_mul(a, x[k], &s) or sr_mul(b, y[k], &t) or sr_add(s, t, &out[k]):
            return 1
    return 0


cdef void xgcd(long long a, long long b, long long *g, long long *s, long long *t) noexcept nogil:
    cdef long long s0 = 1, s1 = 0, t0 = 0, t1 = 1, q, r
    while b:
        q = floordiv(a, b)
        r = a - q * b
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if a < 0:
        a, s0, t0 = -a, -s0, -t0
    g[0] = a
    s[0] = s0
    t[0] = t0


cdef int tail_reduce(long long **piv, long long *row, int j, int n) noexcept nogil:
    cdef int c
    cdef long long q
    for c in range(j + 1, n):
        if piv[c] != NULL and row[c]:
            q = floordiv(row[c], piv[c][c])
            if q and axpy(row, piv[c], q, c, n):
                return 1
    return 0


def hnf_rows(rows, int ncols):
    cdef int nrows = len(rows)
    cdef int n = ncols
    cdef long long *pool = <long long *> malloc(sizeof(long long) * (nrows + 2) * (n if n > 0 else 1))
    cdef long long **piv = <long long **> malloc(sizeof(long long *) * (n if n > 0 else 1))
    cdef long long *v
    cdef long long *p
    cdef long long *tmp
    cdef long long a, b, q, r, g, s, t, ag, bg
    cdef int used = 0, j, k, i, c
    if pool == NULL or piv == NULL:
        free(pool)
        free(piv)
        raise MemoryError
    try:
        for k in range(n):
            piv[k] = NULL
        # two scratch rows at the end of the pool
        tmp = pool + (nrows + 1) * n
        for row in rows:
            if len(row) != n:
                raise ValueError("ragged matrix")
            v = pool + used * n
            for k in range(n):
                v[k] = row[k]
            j = 0
            while j < n and v[j] == 0:
                j += 1
            while j < n:
                p = piv[j]
                if p == NULL:
                    if v[j] < 0:
                        for k in range(j, n):
                            v[k] = -v[k]
                    if tail_reduce(piv, v, j, n):
                        raise OverflowError("int64 overflow in hnf")
                    piv[j] = v
                    used += 1
                    break
                a = p[j]
                b = v[j]
                q = floordiv(b, a)
                r = b - q * a
                if r == 0:
                    if axpy(v, p, q, j, n):
                        raise OverflowError("int64 overflow in hnf")
                else:
                    xgcd(a, b, &g, &s, &t)
                    ag = a // g
                    bg = b // g
                    if combine(tmp, t, v, s, p, j, n) or combine(v, ag, v, -bg, p, j, n):
                        raise OverflowError("int64 overflow in hnf")
                    for k in range(j, n):
                        p[k] = tmp[k]
                    if tail_reduce(piv, p, j, n):
                        raise OverflowError("int64 overflow in hnf")
                if tail_reduce(piv, v, j, n):
                    raise OverflowError("int64 overflow in hnf")
                j += 1
                while j < n and v[j] == 0:
                    j += 1
        cols = [c for c in range(n) if piv[c] != NULL]
        for i in range(len(cols) - 1, -1, -1):
            c = cols[i]
            if tail_reduce(piv, piv[c], c, n):
                raise OverflowError("int64 overflow in hnf")
        return [[piv[c][k] for k in range(n)] for c in cols]
    finally:
        free(pool)
        free(piv)

