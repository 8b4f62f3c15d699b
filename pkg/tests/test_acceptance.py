"""One pass/fail test per acceptance criterion.

Arithmetic is exact, so every comparison is equality.  Long CLI runs are
shared between criteria through a module-scoped cache.
"""

import json
import random
import time

import pytest

from symring import cli
from symring.groupring import RingElement, vectorize, window
from symring.groups import FreeContext
from symring.ideals import IdealSpec, saturation_certificate, saturation_verify
from symring.intlinalg import lattice_membership
from symring.magnus import augmentation_power_exact, augmentation_power_inner, gamma_degree
from symring.oracles import builtin, subgroup_closure
from symring.ideals import relative_augmentation_check
from symring.simplicial import homology_report, kernel_cross_validation, verify_simplicial_identities

from . import oracle


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    cache = {}

    def get(cmd, *extra, threads=1):
        key = (cmd, extra, threads)
        if key not in cache:
            d = root / f"{cmd}-{len(cache)}"
            d.mkdir()
            out = d / f"{cmd}.json"
            t = time.perf_counter()
            code = cli.main([cmd, *extra, "--threads", str(threads), "--out", str(out)])
            cache[key] = (code, out, json.loads(out.read_text()), time.perf_counter() - t)
        return cache[key]

    return get


def claim(report, prefix):
    hits = [c for c in report["claims"] if c["claim"].startswith(prefix) or prefix in c["claim"]]
    assert hits, prefix
    return hits[0]


def artifacts_ok(out, report):
    paths = [out.parent / a for c in report["claims"] for a in c.get("artifacts", [])]
    return bool(paths) and all(cli.cmd_check_certificate(p) == 0 for p in paths)


def brute_derived(G, N):
    comms = {G.mul(G.mul(G.inv(a), G.inv(b)), G.mul(a, b)) for a in N for b in N}
    closed = {G.identity} | comms
    while True:
        new = {G.mul(x, y) for x in closed for y in closed} - closed
        if not new:
            return closed
        closed |= new


@pytest.mark.parametrize("group,gens", [("S3", ["c"]), ("Q8", ["i", "j"]), ("D4", ["r1"])])
def test_criterion_1_relative_augmentation(group, gens):
    t = time.perf_counter()
    G = builtin(group)
    N = sorted(subgroup_closure(G, [G.element(x) for x in gens]))
    cert = relative_augmentation_check(G, N)
    passing = {e["element"] for e in cert.entries if e["in"]}
    assert passing == brute_derived(G, N)
    assert cert.problems() == []
    assert time.perf_counter() - t < 5


def test_criterion_2_saturation():
    t = time.perf_counter()
    for rank, L in ((2, 3), (3, 2)):
        F = FreeContext.free([f"x{i}" for i in range(rank)])
        specs = [IdealSpec.killing(F, [i]) for i in range(rank)]
        q = saturation_verify(specs, L)
        assert q.saturated
        assert saturation_certificate(specs, L, q.final_M[L]).problems() == []
    assert time.perf_counter() - t < 120


def test_criterion_3_simplicial_suite():
    t = time.perf_counter()
    for name in ("Z", "Z/2", "S3"):
        G = builtin(name)
        assert verify_simplicial_identities(G, 5)["ok"]
        for k in range(1, 5):
            for j in range(k + 1):
                for L in range(4):
                    assert kernel_cross_validation(G, k, j, L), (name, k, j, L)
    assert time.perf_counter() - t < 120


def test_criterion_4_carlsson_z2(runs):
    code, out, rep, dt = runs("carlsson")
    q = rep["qreports"][0]
    assert q["stable"] == {"free_rank": 0, "torsion": [2]}
    for L in (3, 4, 5):
        rows = [r for r in q["stabilization"] if r["L"] == L]
        assert rows and rows[-1]["torsion"] == [2]
        w = q["witness_classes"][str(L)]
        assert w["absent_for_all_M"] and w["order"] == 2
    torsion = [c for c in rep["claims"] if "lies in the symmetric product" in c["claim"]]
    assert len(torsion) == 3 and all(c["verdict"] == "certified" for c in torsion)
    assert artifacts_ok(out, rep)
    assert code == 2 and dt < 600


def test_criterion_5_wu(runs):
    code, out, rep, dt = runs("wu")
    wit = claim(rep, "symmetric-commutator witnesses")
    assert wit["verdict"] == "certified" and wit["count"] >= 50 and wit["depth"] <= 2
    assert claim(rep, "[y0,y0 y1] is not in D")["verdict"] == "certified"
    stable = claim(rep, "stable free rank 1")
    assert stable["verdict"] == "evidence"
    assert stable["observed"] == {"free_rank": 1, "torsion": []}
    assert artifacts_ok(out, rep)
    assert dt < 600


def test_criterion_6_prop22(runs):
    code, out, rep, dt = runs("prop22")
    wit = claim(rep, "symmetric-commutator witnesses")
    assert wit["verdict"] == "certified" and wit["count"] == 50
    assert claim(rep, "a^2 is not in D")["verdict"] == "certified"
    schreier = claim(rep, "Schreier decomposition")
    assert schreier["verdict"] == "checked" and "100 random words" in schreier["claim"]
    assert artifacts_ok(out, rep)
    assert code == 0 and dt < 300


def test_criterion_7_theorem_setup(runs):
    # Expected to fail: the exact lattice has no free part at L=2 (see notes).
    code, out, rep, dt = runs("theorem31")
    assert claim(rep, "symmetric-commutator witnesses")["verdict"] == "certified"
    assert artifacts_ok(out, rep)
    assert dt < 1200
    stable = claim(rep, "stable free rank 1")
    assert stable["observed"] == {"free_rank": 1, "torsion": []}
    assert stable["verdict"] == "evidence"


def test_criterion_8_milnor_homology():
    t = time.perf_counter()
    Z = builtin("Z")
    for k in (1, 2):
        q = homology_report(Z, k, [3, 4, 5])
        assert sorted({r.L for r in q.rows}) == [3, 4, 5]
        assert q.stable_invariants() == (1, ())
    q1 = homology_report(Z, 1, [3, 4, 5])
    for L in ("3", "4", "5"):
        w = q1.witness_classes[L]
        assert w["cycle"] == "-1*[] + 1*[x0]"
        assert [abs(x) for x in w["class"]["free"]] == [1]
    assert time.perf_counter() - t < 600


def _commutator_products(rng, count):
    tables = {r: oracle.basic_commutators(r, 5) for r in (2, 3)}
    out = []
    for _ in range(count):
        rank = rng.choice((2, 3))
        n = rng.randint(1, 5)
        F = FreeContext.free(list("abc"[:rank]))
        w = ()
        for _ in range(rng.randint(1, 3)):
            c = oracle.evaluate_bracket(rng.choice(tables[rank][n]), F)
            w = F.mul(w, c if rng.random() < 0.5 else F.inv(c))
        out.append((F, n, w))
    return out


def _samples(F, rng, count, max_norm=6):
    gens = [F.gen(0), F.gen(1)]
    short = [w for w in window(F, 2).words]
    out = []
    while len(out) < count:
        kind = rng.randrange(4)
        if kind == 0:
            w = F.commutator(rng.choice(short), rng.choice(short))
        elif kind == 1:
            u = rng.choice(short)
            w = F.mul(F.mul(F.inv(u), F.commutator(*gens)), u)
        elif kind == 2:
            w = F.mul(F.commutator(rng.choice(short), rng.choice(short)), rng.choice(short))
        else:
            w = F.normalize([(rng.randrange(2), rng.choice((1, -1))) for _ in range(rng.randint(0, 6))])
        if F.norm(w) <= max_norm:
            out.append(w)
    return out


def test_criterion_9_magnus():
    t = time.perf_counter()
    rng = random.Random(9)
    for F, n, w in _commutator_products(rng, 200):
        assert gamma_degree(w, n, F) >= n
    F = FreeContext.free("x y")
    L = 6
    win = window(F, L)
    lats = {n: augmentation_power_exact(F, n, L) for n in (2, 3, 4)}
    samples = _samples(F, rng, 100)
    for g in samples:
        v = vectorize(RingElement(F, {g: 1, (): -1}) if g else RingElement(F, {}), win)
        for n, lat in lats.items():
            assert (gamma_degree(g, 4, F) >= n) == (lattice_membership(v, lat) is not None), (g, n)
    assert any(gamma_degree(g, 4, F) >= 2 for g in samples)
    for n in (2, 3, 4):
        assert augmentation_power_inner(F, n, 4, 6) == augmentation_power_exact(F, n, 4)
    assert time.perf_counter() - t < 120


def test_criterion_10_infrastructure(runs):
    t = time.perf_counter()
    from symring.intlinalg import hnf, is_hnf, snf

    rng = random.Random(20240601)
    for _ in range(500):
        r, c = rng.randint(1, 5), rng.randint(1, 5)
        m = [[rng.randint(-9, 9) for _ in range(c)] for _ in range(r)]
        h = hnf(m, c)
        assert is_hnf(h) and len(h) == oracle.rank(m)
        assert snf(m) == oracle.invariant_factors(m)
    for cmd in ("lemma21", "lemma23", "prop22"):
        code, out, rep, _ = runs(cmd)
        assert code == 0 and artifacts_ok(out, rep)
    for cmd, extra in (("lemma21", ()), ("lemma23", ()), ("prop22", ()),
                       ("carlsson", ("--L", "3", "--M-schedule", "3,4,5"))):
        _, a, _, _ = runs(cmd, *extra, threads=1)
        _, b, _, _ = runs(cmd, *extra, threads=4)
        assert a.read_bytes() == b.read_bytes()
        certs_a = sorted((a.parent / f"{cmd}.certs").glob("*.json"))
        certs_b = sorted((b.parent / f"{cmd}.certs").glob("*.json"))
        assert [p.read_bytes() for p in certs_a] == [p.read_bytes() for p in certs_b]
    assert time.perf_counter() - t < 300
