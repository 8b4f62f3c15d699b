"""Compare the compiled and pure-Python HNF kernels on the package's workloads.

    python3 benchmarks/bench_hnf.py [--repeat N]

Workloads: small random matrices (the oracle-test shape), finite group-ring
ideal spans (the finite-quotient transport), and dense window bases.
Each kernel's output is checked against the other before timing.
"""

from __future__ import annotations

import argparse
import random
import time

from symring.ideals import FiniteGroupRing
from symring.intlinalg import _ckernels, _pure
from symring.oracles import abelian, dihedral, free_class2, quaternion8


def random_small(rng, count=2000):
    out = []
    for _ in range(count):
        r, c = rng.randint(1, 8), rng.randint(1, 8)
        out.append(([[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)], c))
    return out


def group_ring_spans():
    out = []
    for o in (dihedral(4), quaternion8(), abelian(4, 4), abelian(2, 2, 2), free_class2(2, 3)):
        ring = FiniteGroupRing(o)
        aug = [ring.minus_one(h) for h in range(o.order)]
        rows = [ring.mul(x, y) for x in aug for y in aug]
        out.append((rows, o.order))
    return out


def banded(rng, count=40, n=60):
    out = []
    for _ in range(count):
        rows = []
        for i in range(n):
            row = [0] * n
            for j in range(i, min(n, i + 4)):
                row[j] = rng.choice((-1, 0, 1))
            rows.append(row)
        out.append((rows, n))
    return out


def bench(name, cases, repeat):
    for m, c in cases:
        try:
            fast = _ckernels.hnf_rows(m, c)
        except OverflowError:
            continue
        assert fast == _pure.hnf_rows(m, c), name
    timings = {}
    for label, fn in (("python", _pure.hnf_rows), ("cython", _ckernels.hnf_rows)):
        best = float("inf")
        for _ in range(repeat):
            t = time.perf_counter()
            for m, c in cases:
                try:
                    fn(m, c)
                except OverflowError:
                    _pure.hnf_rows(m, c)
            best = min(best, time.perf_counter() - t)
        timings[label] = best
    print(f"{name:24s} {len(cases):5d} cases  python {timings['python'] * 1e3:9.2f} ms  "
          f"cython {timings['cython'] * 1e3:9.2f} ms  speedup {timings['python'] / timings['cython']:6.1f}x")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled kernel not built; run pip install -e . --no-build-isolation")
    rng = random.Random(args.seed)
    bench("random <= 8x8", random_small(rng), args.repeat)
    bench("group-ring products", group_ring_spans(), args.repeat)
    bench("banded 60x60", banded(rng), args.repeat)


if __name__ == "__main__":
    main()
