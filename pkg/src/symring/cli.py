"""Command-line runner: named experiments, JSON reports, certificate files.

Every run writes a report (schema ``symring.report/1``) plus one JSON file
per certified claim next to it.  Reports are deterministic: configuration
echo, claims and tables only, no timings, keys sorted.

Exit codes: 0 every claim certified or exactly checked, 2 some claim is
evidence-level or unmet, 1 error or a failed certificate.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .groups import FreeContext, GeneratorMap, GroupError, GroupOracle, symmetric_commutator_witness_exprs
from .ideals import (
    IdealSpec,
    QReport,
    default_quotient_schedule,
    d_subgroup_test,
    hurewicz_class,
    load_certificate,
    q_invariants_report,
    relative_augmentation_check,
    saturation_certificate,
    saturation_verify,
    schreier_decompose,
    schreier_transversal,
    witness_certificate,
)
from .magnus import DEFAULT_CAP, gamma_degree, magnus_image
from .oracles import builtin, subgroup_closure
from .simplicial import homology_report, torsion_certificate, wu_setup

REPORT_SCHEMA = "symring.report/1"
COMMANDS = ("lemma21", "lemma23", "prop22", "wu", "theorem31", "carlsson", "magnus", "check-certificate")

# verdicts that need no further evidence
SETTLED = ("certified", "checked")


class ConfigError(ValueError):
    pass


@dataclass
class Claim:
    claim: str
    verdict: str  # certified | checked | evidence | unmet | unknown | failed
    detail: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"claim": self.claim, "verdict": self.verdict}
        if self.artifacts:
            out["artifacts"] = list(self.artifacts)
        out.update(self.detail)
        return out


@dataclass
class RunReport:
    experiment: str
    config: dict
    claims: list = field(default_factory=list)
    qreports: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"schema": REPORT_SCHEMA, "experiment": self.experiment, "config": self.config,
                "claims": [c.as_dict() for c in self.claims], "qreports": self.qreports}

    def exit_code(self) -> int:
        verdicts = [c.verdict for c in self.claims]
        if "failed" in verdicts:
            return 1
        return 0 if all(v in SETTLED for v in verdicts) else 2


class ArtifactStore:
    """Writes certificate files under ``<report stem>.certs/`` with stable names."""

    def __init__(self, report_path: Path):
        self.root = report_path.parent
        self.dir = report_path.with_name(report_path.stem + ".certs")
        self.count = 0

    def save(self, cert, tag: str) -> str:
        self.dir.mkdir(parents=True, exist_ok=True)
        self.count += 1
        name = f"{self.count:04d}-{tag}.json"
        path = self.dir / name
        path.write_text(dumps(cert.to_json()))
        return str(path.relative_to(self.root))


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=1, ensure_ascii=False) + "\n"


def pmap(fn, items, threads: int):
    """Ordered map; results are merged in input order whatever the thread count."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def merge_reports(parts, setup: str) -> QReport:
    rep = QReport(setup)
    for p in parts:
        rep.rows.extend(p.rows)
        rep.skipped.extend(p.skipped)
        rep.witness_classes.update(p.witness_classes)
    return rep


# ---------------------------------------------------------------------------
# configuration

DEFAULTS = {
    "lemma21": {"cases": [{"group": "S3", "normal_generators": ["c"]},
                          {"group": "Q8", "normal_generators": ["i", "j"]},
                          {"group": "D4", "normal_generators": ["r1"]}]},
    "lemma23": {"cases": [{"rank": 2, "L": 3}, {"rank": 3, "L": 2}], "M_schedule": None},
    "prop22": {"L": 3, "M": 4, "count": 50, "depth": 2, "samples": 100, "max_length": 6,
               "non_members": ["a^2"]},
    "wu": {"n": 1, "L_sweep": [3, 4], "M_schedule": None, "count": 60, "depth": 2},
    "theorem31": {"n": 3, "L_sweep": [2, 3], "M_schedule": None, "count": 60, "depth": 2},
    "carlsson": {"oracle": "Z/2", "level": 2, "L_sweep": [3, 4, 5], "M_schedule": None, "route": "chains"},
    "magnus": {"names": "x y", "words": ["x", "[x,y]", "[[x,y],y]"], "c": DEFAULT_CAP},
}


def resolve_config(cmd: str, args) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS[cmd]))
    if args.config:
        try:
            user = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        user.pop("schema", None)
        cfg.update(user)
    if args.L is not None:
        if "L_sweep" in cfg:
            cfg["L_sweep"] = [args.L]
        if "L" in cfg:
            cfg["L"] = args.L
        if "cases" in cfg and cmd == "lemma23":
            for c in cfg["cases"]:
                c["L"] = args.L
    if args.M_schedule is not None:
        try:
            cfg["M_schedule"] = [int(x) for x in args.M_schedule.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError("--M-schedule expects comma-separated integers") from exc
        if not cfg["M_schedule"]:
            raise ConfigError("M schedule must be nonempty")
    cfg["seed"] = args.seed if args.seed is not None else cfg.get("seed", 0)
    for key in ("word", "c"):
        val = getattr(args, key, None)
        if val is not None and cmd == "magnus":
            if key == "word":
                cfg["words"] = [val]
            else:
                cfg["c"] = val
    sweep = cfg.get("L_sweep")
    sched = cfg.get("M_schedule")
    if sweep is not None and not sweep:
        raise ConfigError("L sweep must be nonempty")
    if sched and sweep and min(sweep) > max(sched):
        raise ConfigError("need L <= max(M)")
    return cfg


def _oracle(spec) -> GroupOracle:
    if isinstance(spec, dict):
        return GroupOracle.from_json(spec)
    return builtin(str(spec))


# ---------------------------------------------------------------------------
# experiments


def cmd_lemma21(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("lemma21", cfg)

    def run(case):
        G = _oracle(case["group"])
        if "normal" in case:
            N = sorted(G.element(x) for x in case["normal"])
        else:
            N = sorted(subgroup_closure(G, [G.element(x) for x in case["normal_generators"]]))
        return G, N, relative_augmentation_check(G, N)

    for G, N, cert in pmap(run, cfg["cases"], threads):
        names = G.element_names
        passing = [names[e["element"]] for e in cert.entries if e["in"]]
        detail = {"group": G.name, "N": [names[a] for a in N], "passing": passing}
        errs = cert.problems()
        claim = f"{G.name}: N ∩ (1 + Δ(N)Δ(G)) = [N,N]"
        if errs:
            rep.claims.append(Claim(claim, "failed", dict(detail, problems=errs)))
        else:
            rep.claims.append(Claim(claim, "certified", detail, [store.save(cert, "lemma21")]))
    return rep


def cmd_lemma23(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("lemma23", cfg)

    def run(case):
        rank = int(case["rank"])
        names = case.get("names") or [f"x{i}" for i in range(rank)]
        F = FreeContext.free(names)
        blocks = case.get("blocks") or [[i] for i in range(rank)]
        specs = [IdealSpec.killing(F, b) for b in blocks]
        L = int(case["L"])
        q = saturation_verify(specs, L, case.get("M_schedule", cfg.get("M_schedule")))
        cert = None
        if q.saturated:
            cert = saturation_certificate(specs, L, q.final_M[L])
        return F, specs, L, q, cert

    for F, specs, L, q, cert in pmap(run, cfg["cases"], threads):
        label = " ∩ ".join(s.name for s in specs)
        rep.qreports.append(q.as_dict())
        claim = f"{label} = symmetric product at L={L}"
        detail = {"L": L, "final_M": q.final_M.get(L)}
        if cert is None:
            rep.claims.append(Claim(claim, "unmet", detail))
        elif cert.problems():
            rep.claims.append(Claim(claim, "failed", dict(detail, problems=cert.problems())))
        else:
            rep.claims.append(Claim(claim, "certified", detail, [store.save(cert, "saturation")]))
    return rep


def mod2_setup():
    """F(a, b) with R1 = ker(a -> 1, b -> 0) and R2 = ker(a -> 0, b -> 1) over Z/2."""
    F = FreeContext.free("a b")
    z2 = builtin("Z/2")
    one, e = z2.element("g1"), z2.identity
    r1 = IdealSpec("R1", (F.parse_word("a^2"), F.parse_word("b")), GeneratorMap.to_finite(F, z2, [one, e]))
    r2 = IdealSpec("R2", (F.parse_word("b^2"), F.parse_word("a")), GeneratorMap.to_finite(F, z2, [e, one]))
    return F, [r1, r2]


def _witness_claims(specs, count, depth, store, threads, tag) -> list[Claim]:
    ctx = specs[0].ctx
    subs = [s.subgroup() for s in specs]
    wits = symmetric_commutator_witness_exprs(subs, depth, count)

    def run(w):
        cert = witness_certificate(w, specs)
        return w, cert, cert.problems()

    out = []
    saved = []
    bad = []
    for w, cert, errs in pmap(run, wits, threads):
        if errs:
            bad.append({"witness": ctx.format_word(w.word), "problems": errs})
        else:
            saved.append(store.save(cert, tag))
    claim = f"{len(wits)} symmetric-commutator witnesses have zero class"
    detail = {"count": len(wits), "depth": depth}
    if bad or len(wits) < count:
        out.append(Claim(claim, "failed", dict(detail, problems=bad or ["too few witnesses"])))
    else:
        out.append(Claim(claim, "certified", detail, saved))
    return out


def _out_claim(g, specs, store, label, name=None) -> Claim:
    ctx = specs[0].ctx
    v = d_subgroup_test(g, specs, M=0, schedule=default_quotient_schedule(ctx))
    claim = f"{name or ctx.format_word(g)} is not in D(F; {label})"
    if v.verdict == "certified-out":
        if v.certificate.problems():
            return Claim(claim, "failed", {"problems": v.certificate.problems()})
        return Claim(claim, "certified", dict(v.detail, quotient=v.quotient), [store.save(v.certificate, "out")])
    return Claim(claim, "unknown", {"verdict": v.verdict})


def cmd_prop22(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("prop22", cfg)
    F, specs = mod2_setup()
    rep.claims.extend(_witness_claims(specs, cfg["count"], cfg["depth"], store, threads, "commutator"))
    for text in cfg["non_members"]:
        g = F.parse_word(text)
        for s in specs:
            if s.projection.apply(g):
                raise ConfigError(f"{text} is not in {s.name}")
        rep.claims.append(_out_claim(g, specs, store, "(r1 r2)_S"))
    # transversal of R2 chosen inside R1
    T = schreier_transversal(specs[1].projection, within=specs[0].projection)
    rng = random.Random(cfg["seed"])
    bad = []
    for _ in range(cfg["samples"]):
        n = rng.randint(0, cfg["max_length"])
        f = F.normalize([(rng.randrange(2), rng.choice((1, -1))) for _ in range(n)])
        t, s = schreier_decompose(f, specs[1].projection, T, within=specs[0].projection)
        if F.mul(t, s) != f or specs[1].projection.apply(s) or t not in T.values():
            bad.append(F.format_word(f))
    rep.claims.append(Claim(f"Schreier decomposition round-trips on {cfg['samples']} random words",
                            "failed" if bad else "checked",
                            {"transversal": sorted(F.format_word(t) for t in T.values()), "problems": bad}))
    return rep


def _quotient_claims(specs, cfg, setup, expect_free: int, threads) -> tuple[QReport, Claim]:
    parts = pmap(lambda L: q_invariants_report(specs, [L], cfg.get("M_schedule"), setup=setup),
                 cfg["L_sweep"], threads)
    q = merge_reports(parts, setup)
    st = q.stable_invariants()
    observed = None if st is None else {"free_rank": st[0], "torsion": list(st[1])}
    ok = st is not None and st[0] == expect_free and not st[1]
    claim = f"stable free rank {expect_free} across L in {list(cfg['L_sweep'])}"
    return q, Claim(claim, "evidence" if ok else "unmet", {"observed": observed})


def cmd_wu(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("wu", cfg)
    n = int(cfg["n"])
    Y, specs = wu_setup(n)
    rep.claims.extend(_witness_claims(specs, cfg["count"], cfg["depth"], store, threads, "witness"))
    g = Y.commutator(Y.gen(0), Y.mul_many(*(Y.gen(i) for i in range(n + 1))))
    name = "[y0," + " ".join(Y.names[: n + 1]) + "]"
    rep.claims.append(_out_claim(g, specs, store, "symmetric product", name))
    q, claim = _quotient_claims(specs, cfg, f"Wu n={n}", 1, threads)
    rep.qreports.append(q.as_dict())
    rep.claims.append(claim)
    L = max(q.final_M)
    if Y.norm(g) <= L:
        cls = hurewicz_class(g, specs, L, q.final_M[L])
        rep.claims.append(Claim(f"class of {name} at L={L}, M={q.final_M[L]} is nonzero",
                                "evidence" if not cls["zero"] else "unmet", {"class": cls}))
    return rep


def cmd_theorem31(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("theorem31", cfg)
    n = int(cfg["n"])
    Y, specs = wu_setup(n - 1)
    rep.claims.extend(_witness_claims(specs, cfg["count"], cfg["depth"], store, threads, "witness"))
    q, claim = _quotient_claims(specs, cfg, f"Theorem setup n={n}", 1, threads)
    rep.qreports.append(q.as_dict())
    rep.claims.append(claim)
    return rep


def _expected_homology(G: GroupOracle, k: int):
    if G.kind == "integers":
        return 1, ()
    if G.name == "Z/2" and k == 2:
        return 0, (2,)
    return None


def cmd_carlsson(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("carlsson", cfg)
    G = _oracle(cfg["oracle"])
    k = int(cfg["level"])
    parts = pmap(lambda L: homology_report(G, k, [L], cfg.get("M_schedule"), route=cfg["route"]),
                 cfg["L_sweep"], threads)
    q = merge_reports(parts, parts[0].setup)
    rep.qreports.append(q.as_dict())
    st = q.stable_invariants()
    observed = None if st is None else {"free_rank": st[0], "torsion": list(st[1])}
    want = cfg.get("expect")
    want = (want["free_rank"], tuple(want["torsion"])) if want else _expected_homology(G, k)
    claim = f"stable invariants of Z_{k}/B_{k} across L in {list(cfg['L_sweep'])}"
    if want is None:
        rep.claims.append(Claim(claim, "evidence" if st else "unmet", {"observed": observed}))
    else:
        ok = st is not None and st == want
        rep.claims.append(Claim(claim, "evidence" if ok else "unmet",
                                {"observed": observed, "expected": {"free_rank": want[0], "torsion": list(want[1])}}))
    ctx = None
    for L in sorted(q.witness_classes, key=int):
        w = q.witness_classes[L]
        detail = {"L": int(L), "cycle": w["cycle"], "class": w["class"]}
        rep.claims.append(Claim(f"witness cycle at L={L} is absent from every inner boundary",
                                "evidence" if w["absent_for_all_M"] else "unmet", detail))
        if w["order"]:
            from .simplicial import level_context
            from .groupring import parse_element

            ctx = ctx or level_context(G, k)
            z = parse_element(w["cycle"], ctx)
            M = q.final_M[int(L)]
            cert = torsion_certificate(G, k, z, w["order"], M)
            claim = f"{w['order']} * z lies in the symmetric product of the face ideals (L={L})"
            if cert is None:
                rep.claims.append(Claim(claim, "unknown", {"M": M}))
            elif cert.problems():
                rep.claims.append(Claim(claim, "failed", {"problems": cert.problems()}))
            else:
                rep.claims.append(Claim(claim, "certified", {"M": M}, [store.save(cert, "torsion")]))
    return rep


def cmd_magnus(cfg, store: ArtifactStore, threads: int) -> RunReport:
    rep = RunReport("magnus", cfg)
    F = FreeContext.free(cfg["names"])
    c = int(cfg["c"])
    for text in cfg["words"]:
        w = _parse_bracketed(F, text)
        img = magnus_image(w, c, F)
        rep.claims.append(Claim(f"magnus({text})", "checked",
                                {"word": F.format_word(w), "series": img.format([nm.upper() for nm in F.names]),
                                 "gamma_degree": str(gamma_degree(w, c, F))}))
    return rep


def _parse_bracketed(F: FreeContext, text: str):
    """Words with nested left-normed brackets, e.g. ``[[x,y],y]`` or ``x y^-1``."""
    text = text.strip()
    if not (text.startswith("[") and "," in text):
        return F.parse_word(text)
    depth = 0
    for i, ch in enumerate(text[1:-1], start=1):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts = [text[1:i], text[i + 1:-1]]
            break
    else:
        raise ConfigError(f"cannot parse {text!r}")
    u, v = (_parse_bracketed(F, p) for p in parts)
    return F.commutator(u, v)


def cmd_check_certificate(path) -> int:
    """0 iff the certificate (or every artifact of a report) replays exactly."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if isinstance(data, dict) and data.get("schema") == REPORT_SCHEMA:
        root = Path(path).parent
        code = 0
        for c in data.get("claims", []):
            for a in c.get("artifacts", []):
                if cmd_check_certificate(root / a):
                    code = 1
        return code
    try:
        cert = load_certificate(data)
        errs = cert.problems()
    except (ValueError, KeyError, TypeError, GroupError) as exc:
        print(f"error: malformed certificate {path}: {exc}", file=sys.stderr)
        return 1
    if errs:
        for e in errs:
            print(f"{path}: {e}", file=sys.stderr)
        return 1
    print(f"ok {path}")
    return 0


RUNNERS = {"lemma21": cmd_lemma21, "lemma23": cmd_lemma23, "prop22": cmd_prop22, "wu": cmd_wu,
           "theorem31": cmd_theorem31, "carlsson": cmd_carlsson, "magnus": cmd_magnus}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="symring", description="Exact group-ring verifications with certificates.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("path", nargs="?", help="certificate or report file (check-certificate)")
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--L", type=int, help="single window norm (overrides the sweep)")
    p.add_argument("--M-schedule", dest="M_schedule", help="comma-separated enumeration caps")
    p.add_argument("--out", help="report path (default symring-out/<command>.json)")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--word", help="magnus: word to expand, brackets allowed")
    p.add_argument("--c", type=int, help="magnus: degree cap")
    return p


def run(cmd: str, cfg: dict, out: Path, threads: int = 1) -> RunReport:
    store = ArtifactStore(out)
    rep = RUNNERS[cmd](cfg, store, threads)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(rep.as_dict()))
    return rep


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "check-certificate":
        if not args.path:
            print("error: check-certificate needs a path", file=sys.stderr)
            return 1
        return cmd_check_certificate(args.path)
    t0 = time.perf_counter()
    try:
        cfg = resolve_config(args.command, args)
        out = Path(args.out or os.path.join("symring-out", f"{args.command}.json"))
        rep = run(args.command, cfg, out, max(1, args.threads))
    except (ConfigError, GroupError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for c in rep.claims:
        arts = f" ({len(c.artifacts)} artifact{'s' if len(c.artifacts) != 1 else ''})" if c.artifacts else ""
        print(f"[{c.verdict}] {c.claim}{arts}")
        if "series" in c.detail:
            print(f"  = {c.detail['series']}")
            print(f"  gamma_degree = {c.detail['gamma_degree']}")
    for q in rep.qreports:
        for r in q["stabilization"]:
            tors = ",".join(map(str, r["torsion"])) or "-"
            print(f"  {q['setup']}: L={r['L']} M={r['M']} exact={r['exact_rank']} inner={r['inner_rank']} "
                  f"free={r['free_rank']} torsion={tors}{' saturated' if r['saturated'] else ''}")
        for s in q["skipped"]:
            print(f"  skipped L={s['L']} M={s['M']}: {s['reason']}")
    print(f"report: {out}  ({time.perf_counter() - t0:.1f}s)", file=sys.stderr)
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
