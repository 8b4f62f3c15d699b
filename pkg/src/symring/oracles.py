"""Builtin finite group oracles and constructors."""

from __future__ import annotations

import itertools
from functools import lru_cache

from .groups import INTEGERS, GroupError, GroupOracle


def _from_mul(name, elements, mul, identity):
    index = {e: i for i, e in enumerate(elements)}
    table = [[index[mul(a, b)] for b in elements] for a in elements]
    return GroupOracle.from_table(name, [_label(e) for e in elements], index[identity], table)


def _label(e):
    if isinstance(e, tuple):
        return "(" + ",".join(map(str, e)) + ")"
    return str(e)


def cyclic(n: int) -> GroupOracle:
    return _cyclic(n)


@lru_cache(maxsize=None)
def _cyclic(n):
    els = list(range(n))
    return GroupOracle.from_table(f"Z/{n}", [f"g{k}" if k else "e" for k in els], 0,
                                  [[(a + b) % n for b in els] for a in els])


@lru_cache(maxsize=None)
def abelian(*moduli: int) -> GroupOracle:
    els = list(itertools.product(*(range(m) for m in moduli)))
    name = "x".join(f"Z/{m}" for m in moduli)
    return _from_mul(name, els, lambda a, b: tuple((x + y) % m for x, y, m in zip(a, b, moduli)),
                     tuple(0 for _ in moduli))


@lru_cache(maxsize=None)
def symmetric3() -> GroupOracle:
    els = sorted(itertools.permutations(range(3)))
    # (a*b)(i) = a(b(i)): apply b first
    mul = lambda a, b: tuple(a[b[i]] for i in range(3))
    names = {(0, 1, 2): "e", (1, 0, 2): "t01", (2, 1, 0): "t02", (0, 2, 1): "t12",
             (1, 2, 0): "c", (2, 0, 1): "cc"}
    index = {e: i for i, e in enumerate(els)}
    table = [[index[mul(a, b)] for b in els] for a in els]
    return GroupOracle.from_table("S3", [names[e] for e in els], index[(0, 1, 2)], table)


@lru_cache(maxsize=None)
def quaternion8() -> GroupOracle:
    # quaternion units as (sign, unit) with unit in 1,i,j,k
    units = ["1", "i", "j", "k"]
    prod = {
        ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
        ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
        ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
        ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
    }
    els = [(s, u) for s in (1, -1) for u in units]

    def mul(a, b):
        s, u = prod[(a[1], b[1])]
        return (a[0] * b[0] * s, u)

    names = [("" if s > 0 else "-") + u for s, u in els]
    index = {e: i for i, e in enumerate(els)}
    table = [[index[mul(a, b)] for b in els] for a in els]
    return GroupOracle.from_table("Q8", names, 0, table)


@lru_cache(maxsize=None)
def dihedral(n: int = 4) -> GroupOracle:
    """Symmetries of the n-gon: (k, f) is r^k s^f."""
    els = [(k, f) for f in (0, 1) for k in range(n)]

    def mul(a, b):
        k1, f1 = a
        k2, f2 = b
        return ((k1 + (k2 if f1 == 0 else -k2)) % n, f1 ^ f2)

    names = [("e" if k == 0 else f"r{k}") if f == 0 else ("s" if k == 0 else f"r{k}s") for k, f in els]
    index = {e: i for i, e in enumerate(els)}
    table = [[index[mul(a, b)] for b in els] for a in els]
    return GroupOracle.from_table(f"D{n}", names, 0, table)


@lru_cache(maxsize=None)
def free_class2(rank: int, p: int) -> GroupOracle:
    """Free nilpotent class-2 group of exponent p on ``rank`` generators (p odd).

    Elements (v, w), v in (Z/p)^rank, w indexed by pairs i<j; the product adds
    the bilinear cocycle ``w_ij += v_j * v'_i``.
    """
    if p % 2 == 0:
        raise GroupError("class-2 exponent-p construction needs p odd")
    pairs = [(i, j) for i in range(rank) for j in range(i + 1, rank)]
    els = [v + w for v in itertools.product(range(p), repeat=rank)
           for w in itertools.product(range(p), repeat=len(pairs))]

    def mul(a, b):
        v, w = a[:rank], a[rank:]
        v2, w2 = b[:rank], b[rank:]
        nv = tuple((x + y) % p for x, y in zip(v, v2))
        nw = tuple((w[t] + w2[t] + v[j] * v2[i]) % p for t, (i, j) in enumerate(pairs))
        return nv + nw

    return _from_mul(f"N2({rank},{p})", els, mul, tuple(0 for _ in els[0]))


def builtin(name: str) -> GroupOracle:
    key = name.replace(" ", "").upper()
    table = {
        "Z": lambda: INTEGERS,
        "Z/2": lambda: cyclic(2),
        "Z/3": lambda: cyclic(3),
        "Z/4": lambda: cyclic(4),
        "S3": symmetric3,
        "Q8": quaternion8,
        "D4": lambda: dihedral(4),
        "(Z/2)^2": lambda: abelian(2, 2),
        "(Z/4)^2": lambda: abelian(4, 4),
        "Z/2XZ/2": lambda: abelian(2, 2),
        "Z/4XZ/4": lambda: abelian(4, 4),
    }
    if key not in table:
        raise GroupError(f"unknown builtin oracle {name!r}; known: {sorted(table)}")
    return table[key]()


BUILTIN_NAMES = ("Z", "Z/2", "Z/3", "Z/4", "S3", "Q8", "D4", "(Z/2)^2", "(Z/4)^2")


def subgroup_closure(oracle: GroupOracle, gens) -> set[int]:
    seen = {oracle.identity}
    frontier = [oracle.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = oracle.mul(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def is_normal(oracle: GroupOracle, subset) -> bool:
    s = set(subset)
    for g in range(oracle.order):
        gi = oracle.inv(g)
        for n in s:
            if oracle.mul(oracle.mul(gi, n), g) not in s:
                return False
    return True


def commutator_subgroup(oracle: GroupOracle, a, b=None) -> set[int]:
    b = a if b is None else b
    comms = set()
    for x in a:
        for y in b:
            comms.add(oracle.mul(oracle.mul(oracle.inv(x), oracle.inv(y)), oracle.mul(x, y)))
    return subgroup_closure(oracle, comms)
