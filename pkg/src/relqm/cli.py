"""Command-line front end: ``python3 -m relqm <group> <command>``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .barrier import BarrierParams, FiniteIndexError, bounded_projection_scan, find_g0
from .countqm import QmSpec, c_value, defect_scan, h_value, homogenize, stable_value, write_defect_csv
from .family import (FamilyError, FamilySchedule, PairConfig, SuiteRadii, choose_all_r,
                     independence_matrix, make_family, property_suite)
from .freeword import Axis, axis_of, parse
from .pipeline import (EXIT_CONFIG, EXIT_FAIL, EXIT_FINITE_INDEX, EXIT_OK, ConfigError, PipelineConfig,
                       run_pipeline)
from .projcx import (ProjConfig, ProjFamily, bottleneck_constant, check_axioms, elliptic_check,
                     interval, pk_ball, wpd_count)
from .stallings import build, enumerate_subgroup, index_and_gauge, membership

log = logging.getLogger("relqm")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors share the config exit code
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=str))


def _subgroup(text: str, rank: int):
    return build([parse(t, rank) for t in text.split(",") if t], rank)


def _axis(g: str, shift: str, rank: int) -> Axis:
    return axis_of(parse(g, rank)).translate(parse(shift, rank))


def cmd_pipeline_run(a) -> int:
    try:
        cfg = PipelineConfig.load(a.config) if a.config else PipelineConfig()
        if a.seed is not None:
            cfg.seed = a.seed
        for item in a.radius_override or []:
            key, _, val = item.partition("=")
            cfg.override(key, val)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    res = run_pipeline(cfg, out=a.out, reproducible=a.reproducible, cache=a.cache)
    if res.message:
        print(res.message, file=sys.stderr)
    print(json.dumps({"exit_code": res.exit_code, "checks": res.certificate.get("checks", {})}))
    return res.exit_code


def cmd_qm(a) -> int:
    spec = QmSpec.of(a.w, a.W, a.rank)
    if a.cmd == "eval":
        rows = [{"g": t, "c": c_value(spec, parse(t, a.rank)), "h": h_value(spec, parse(t, a.rank))}
                for t in a.words]
        _emit(rows)
    elif a.cmd == "defect":
        rep = defect_scan(spec, a.radius)
        if a.csv:
            write_defect_csv(a.csv, spec, range(1, a.radius + 1))
        _emit({"radius": rep.radius, "empirical_defect": rep.empirical_defect,
               "paper_bound": rep.paper_bound, "L0": rep.L0, "witnesses": rep.witnesses[:5]})
    else:
        rows = []
        for t in a.words:
            est = homogenize(spec, parse(t, a.rank), a.n)
            rows.append({"g": t, "n": a.n, "value": str(est.value), "error_bound": str(est.error_bound),
                         "stable_value": str(stable_value(spec, parse(t, a.rank)))})
        _emit(rows)
    return EXIT_OK


def cmd_subgroup(a) -> int:
    H = _subgroup(a.gens, a.rank)
    if a.cmd == "build":
        _emit(H.to_json())
    elif a.cmd == "index":
        rep = index_and_gauge(H)
        _emit({"index": rep.index, "morse_gauge": rep.morse_gauge})
    elif a.cmd == "member":
        _emit({w: membership(H, parse(w, a.rank)) for w in a.words})
    else:
        _emit([h.text for h in enumerate_subgroup(H, a.radius)])
    return EXIT_OK


def cmd_barrier(a) -> int:
    Hs = [_subgroup(s, a.rank) for s in a.subgroup]
    if a.cmd == "g0":
        try:
            c = find_g0(Hs, BarrierParams(a.epsilon))
        except FiniteIndexError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_FINITE_INDEX
        _emit({"g0": c.g0.text, "S_radius": c.S_radius, "exact_all_H": c.exact_all_H})
    else:
        scan = bounded_projection_scan(parse(a.g, a.rank), Hs, a.radius)
        if a.csv:
            scan.write_csv(a.csv)
        _emit({"tau_obs": scan.tau_obs, "witness": scan.witness})
    return EXIT_OK


def cmd_projcx(a) -> int:
    if a.cmd == "wpd":
        rep = wpd_count(parse(a.x, a.rank), parse(a.y, a.rank), a.L, a.R)
        _emit({"count": rep.count, "elements": rep.elements})
        return EXIT_OK
    base = axis_of(parse(a.g, a.rank))
    F = ProjFamily.from_ball(base, a.family_radius)
    if a.cmd == "axioms":
        rep = check_axioms(F)
        _emit({"members": len(F), "kappa_min": rep.kappa_min, "violations": rep.violations})
        return EXIT_OK
    cfg = ProjConfig(a.kappa, a.K)
    if a.cmd == "interval":
        r = interval(_axis(a.g, a.V, a.rank), _axis(a.g, a.W, a.rank), F, cfg)
        _emit({"chain": [x.label() for x in r.chain], "D": r.D, "order_violations": r.order_violations})
    elif a.cmd in ("ball", "bottleneck"):
        b = pk_ball(_axis(a.g, a.center, a.rank), a.hops, F, cfg)
        if a.cmd == "ball":
            _emit(b.to_json())
        else:
            delta, witness = bottleneck_constant(b.graph)
            _emit({"vertices": b.graph.number_of_nodes(), "delta": delta,
                   "witness": [w.label() for w in witness] if witness else None})
    else:
        H = _subgroup(a.subgroup, a.rank)
        rep = elliptic_check(H, base, F, cfg, a.radius)
        _emit({"ok": rep.ok, "max_d_P": rep.max_d_P, "failures": rep.failures[:10]})
        return EXIT_OK if rep.ok else EXIT_FAIL
    return EXIT_OK


def cmd_family(a) -> int:
    pair = PairConfig(parse(a.g1, a.rank), parse(a.g2, a.rank))
    try:
        fam = make_family(pair, FamilySchedule(a.base, a.N))
        prot = parse(a.protection, a.rank) if a.protection else None
        fam = choose_all_r(fam, M_test=a.powers, protection=prot)
    except (FamilyError, OverflowError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    if a.cmd == "make":
        _emit([{"i": x.index, "length": len(x.f), "r": x.r, "exponents": x.exponents,
                "conjugator": x.conjugator.text if x.conjugator else "",
                "f": x.f.text if len(x.f) <= 200 else x.f.text[:200] + "..."} for x in fam])
    elif a.cmd == "verify":
        Hs = [_subgroup(s, a.rank) for s in a.subgroup]
        rep = property_suite(fam, Hs, SuiteRadii(a.powers, a.radius))
        _emit({"ok": rep.ok, "items": rep.items, "witnesses": rep.witnesses,
               "exact_vanishing": rep.exact_vanishing})
        return EXIT_OK if rep.ok else EXIT_FAIL
    else:
        ic = independence_matrix(fam, a.m)
        _emit({"m": a.m, "matrix": ic.matrix.tolist(), "ok": ic.ok})
        return EXIT_OK if ic.ok else EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="relqm", description=__doc__)
    ap.add_argument("--rank", type=int, default=2)
    ap.add_argument("-v", "--verbose", action="store_true")
    groups = ap.add_subparsers(dest="group", required=True, parser_class=_Parser)

    pg = groups.add_parser("pipeline").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    run = pg.add_parser("run")
    run.add_argument("--config")
    run.add_argument("--out")
    run.add_argument("--seed", type=int)
    run.add_argument("--reproducible", action="store_true")
    run.add_argument("--cache")
    run.add_argument("--radius-override", action="append", metavar="KEY=VAL")
    run.set_defaults(func=cmd_pipeline_run)

    qg = groups.add_parser("qm").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("eval", "defect", "homog"):
        q = qg.add_parser(name)
        q.add_argument("--w", required=True)
        q.add_argument("--W", type=int, default=1)
        if name == "defect":
            q.add_argument("--radius", type=int, default=4)
            q.add_argument("--csv")
        else:
            q.add_argument("words", nargs="+")
        if name == "homog":
            q.add_argument("--n", type=int, default=16)
        q.set_defaults(func=cmd_qm)

    sg = groups.add_parser("subgroup").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("build", "index", "member", "enum"):
        s = sg.add_parser(name)
        s.add_argument("--gens", required=True, help="comma-separated generators")
        if name == "member":
            s.add_argument("words", nargs="+")
        if name == "enum":
            s.add_argument("--radius", type=int, default=6)
        s.set_defaults(func=cmd_subgroup)

    bg = groups.add_parser("barrier").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("scan", "g0"):
        b = bg.add_parser(name)
        b.add_argument("--subgroup", action="append", required=True, help="comma-separated generators")
        if name == "scan":
            b.add_argument("--g", required=True)
            b.add_argument("--radius", type=int, default=3)
            b.add_argument("--csv")
        else:
            b.add_argument("--epsilon", type=int, default=0)
        b.set_defaults(func=cmd_barrier)

    xg = groups.add_parser("projcx").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("axioms", "interval", "ball", "bottleneck", "elliptic", "wpd"):
        x = xg.add_parser(name)
        if name == "wpd":
            x.add_argument("--x", default="")
            x.add_argument("--y", required=True)
            x.add_argument("--L", type=int, default=1)
            x.add_argument("--R", type=int, default=1)
        else:
            x.add_argument("--g", required=True, help="element whose axis generates the family")
            x.add_argument("--family-radius", type=int, default=3)
        if name in ("interval", "ball", "bottleneck", "elliptic"):
            x.add_argument("--kappa", type=int, default=0)
            x.add_argument("--K", type=int, required=True)
        if name == "interval":
            x.add_argument("--V", default="", help="translating element of the first axis")
            x.add_argument("--W", required=True, help="translating element of the second axis")
        if name in ("ball", "bottleneck"):
            x.add_argument("--center", default="")
            x.add_argument("--hops", type=int, default=2)
        if name == "elliptic":
            x.add_argument("--subgroup", required=True)
            x.add_argument("--radius", type=int, default=10)
        x.set_defaults(func=cmd_projcx)

    fg = groups.add_parser("family").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name in ("make", "verify", "matrix"):
        f = fg.add_parser(name)
        f.add_argument("--g1", required=True)
        f.add_argument("--g2", required=True)
        f.add_argument("--base", type=int, default=4)
        f.add_argument("--N", type=int, default=3)
        f.add_argument("--powers", type=int, default=3)
        f.add_argument("--protection")
        if name == "verify":
            f.add_argument("--subgroup", action="append", required=True)
            f.add_argument("--radius", type=int, default=12)
        if name == "matrix":
            f.add_argument("--m", type=int, default=1)
        f.set_defaults(func=cmd_family)
    return ap


def main(argv: "Sequence[str] | None" = None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except FiniteIndexError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FINITE_INDEX
    except ValueError as exc:
        # bad words or parameters on the command line
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
