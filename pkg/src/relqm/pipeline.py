"""End-to-end certificate pipeline: configuration, orchestration, outputs, cache."""
from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
import os
import platform
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .barrier import (DEFAULT_SPACERS, FINITE_INDEX_MESSAGE, BarrierParams, FiniteIndexError,
                      bounded_projection_scan, extend_to_contracting, find_g0)
from .countqm import write_defect_csv
from .family import (FamilyError, PairConfig, FamilySchedule, SuiteRadii, bounded_generation_report,
                     choose_all_r, independence_matrix, make_family, member_spec, non_equivalent,
                     property_suite, schottky_certificate)
from .freeword import Word, axis_of, is_cyclically_reduced, parse
from .projcx import ProjConfig, ProjFamily, bottleneck_constant, check_axioms, elliptic_check, pk_ball
from .stallings import SubgroupAutomaton, build, index_and_gauge

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_FINITE_INDEX, EXIT_CONFIG = 0, 1, 2, 64

DEFAULT_RADII = {
    "subgroup": 12,  # ball for the vanishing check
    "defect": 3,  # ball for the empirical defect
    "powers": 3,  # family powers m
    "projection": 3,  # translates and subgroup elements in the projection scan
    "stability": 5,  # projection scan is repeated up to this radius
    "family_ball": 3,  # translates forming the projection family
    "elliptic": 10,  # subgroup ball for the elliptic check
    "hops": 3,  # P_K ball for the bottleneck witness
    "hops_check": 5,
    "bounded_generation": 4,
}


class ConfigError(ValueError):
    """Malformed or out-of-range configuration."""


@dataclass
class PipelineConfig:
    rank: int = 2
    subgroups: list = field(default_factory=lambda: [["a"]])
    epsilon: int = 0
    K: "int | None" = None
    W: int = 1
    schedule: dict = field(default_factory=lambda: {"base": 4, "N": 5})
    radii: dict = field(default_factory=lambda: dict(DEFAULT_RADII))
    spacers: list = field(default_factory=lambda: list(DEFAULT_SPACERS))
    out: str = "out"
    seed: int = 0
    bounded_generation: dict = field(default_factory=lambda: {"N": 3, "samples": 2000})
    instance: str = ""

    KEYS = ("rank", "subgroups", "epsilon", "K", "W", "schedule", "radii", "spacers", "out",
            "seed", "bounded_generation", "instance")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(cls.KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        for k, v in data.items():
            if k == "radii":
                extra = set(v) - set(DEFAULT_RADII)
                if extra:
                    raise ConfigError(f"unknown radii: {sorted(extra)}")
                cfg.radii = {**DEFAULT_RADII, **v}
            elif k == "schedule":
                cfg.schedule = {"base": 4, "N": 5, **v}
            elif k == "bounded_generation":
                cfg.bounded_generation = {"N": 3, "samples": 2000, **v}
            else:
                setattr(cfg, k, v)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: copy.deepcopy(getattr(self, k)) for k in self.KEYS}

    def override(self, key: str, value: str) -> None:
        if key not in DEFAULT_RADII:
            raise ConfigError(f"unknown radius {key!r}")
        try:
            self.radii[key] = int(value)
        except ValueError as exc:
            raise ConfigError(f"radius {key} must be an integer") from exc
        self.validate()

    def validate(self) -> None:
        def is_int(x: Any) -> bool:
            return isinstance(x, int) and not isinstance(x, bool)

        if not is_int(self.rank) or self.rank < 2:
            raise ConfigError("rank must be an integer >= 2")
        if not isinstance(self.subgroups, list) or not self.subgroups:
            raise ConfigError("need at least one subgroup")
        for gens in self.subgroups:
            if not isinstance(gens, list) or not gens:
                raise ConfigError("each subgroup is a nonempty list of generator words")
            for t in gens:
                self._word(t)
        if not is_int(self.epsilon) or self.epsilon < 0:
            raise ConfigError("epsilon must be a non-negative integer")
        if self.K is not None and (not is_int(self.K) or self.K < 1):
            raise ConfigError("K must be a positive integer or null")
        if not is_int(self.W) or self.W != 1:
            raise ConfigError("W must be 1: the family certificates read c off copy counts")
        if not is_int(self.schedule.get("N")) or self.schedule["N"] < 1:
            raise ConfigError("schedule.N must be a positive integer")
        if not is_int(self.schedule.get("base")) or self.schedule["base"] < 2:
            raise ConfigError("schedule.base must be an integer >= 2")
        for k, v in self.radii.items():
            if not is_int(v) or v < 1:
                raise ConfigError(f"radius {k} must be a positive integer")
        if not isinstance(self.spacers, list) or not self.spacers:
            raise ConfigError("spacers must be a nonempty list")
        for t in self.spacers:
            if not self._word(t):
                raise ConfigError("spacers must be nontrivial")
        if not is_int(self.seed):
            raise ConfigError("seed must be an integer")
        bg = self.bounded_generation
        if not is_int(bg.get("N")) or bg["N"] < 1 or not is_int(bg.get("samples")) or bg["samples"] < 0:
            raise ConfigError("bounded_generation needs N >= 1 and samples >= 0")

    def _word(self, t: Any) -> Word:
        if not isinstance(t, str):
            raise ConfigError(f"words are strings, got {t!r}")
        try:
            return parse(t, self.rank)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


class AutomatonCache:
    """Folded automata stored as JSON files, one per generator list."""

    def __init__(self, root: "str | os.PathLike | None") -> None:
        self.root = Path(root) if root else None
        self.hits = 0
        if self.root:
            self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, rank: int, gens: list[str]) -> Path:
        assert self.root is not None
        key = hashlib.sha256(json.dumps([rank, gens]).encode()).hexdigest()[:32]
        return self.root / f"subgroup-{key}.json"

    def build(self, rank: int, gens: list[str]) -> SubgroupAutomaton:
        if self.root:
            path = self._path(rank, gens)
            if path.exists():
                self.hits += 1
                return SubgroupAutomaton.from_json(path.read_text())
        H = build([parse(t, rank) for t in gens], rank)
        if self.root:
            # single writer: write a temp file then atomically replace
            fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                fh.write(H.dumps())
            os.replace(tmp, path)
        return H


@dataclass
class PipelineResult:
    exit_code: int
    certificate: dict
    message: str = ""


def _pick_pair(g0: Word, spacers: list[Word]) -> tuple[Word, Word, list[str]]:
    # g1 = g0 s_i, g2 = g0 s_j for the first spacer pair giving non-equivalent elements
    cands = []
    for s in spacers:
        g = g0 * s
        if len(g) == len(g0) + len(s) and is_cyclically_reduced(g):
            cands.append((s, g))
    for i, (s1, g1) in enumerate(cands):
        for s2, g2 in cands[i + 1:]:
            if non_equivalent(g1, g2) and schottky_certificate(g1, g2, 1, max_word=1, max_m=1).ok:
                return g1, g2, [s1.text, s2.text]
    raise FamilyError("no spacer pair gives non-equivalent elements")


def _compact(w: Word, limit: int = 4096) -> dict:
    return {"length": len(w), "sha256": hashlib.sha256(w.text.encode()).hexdigest(),
            "text": w.text if len(w) <= limit else None}


def run_pipeline(cfg: PipelineConfig, out: "str | os.PathLike | None" = None, reproducible: bool = False,
                 cache: "str | os.PathLike | AutomatonCache | None" = None) -> PipelineResult:
    """Run every stage in order, write the certificate and tables, return the exit code."""
    t_start = time.perf_counter()
    timings: dict[str, float] = {}
    out_dir = Path(out if out is not None else cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rank = cfg.rank
    R = cfg.radii
    p = BarrierParams(cfg.epsilon)
    cert: dict[str, Any] = {"instance": cfg.instance, "config": cfg.to_dict(), "seed": cfg.seed,
                            "versions": {"relqm": __version__, "numpy": np.__version__,
                                         "python": platform.python_version()}}
    checks: dict[str, bool] = {}
    cert["checks"] = checks

    def stage(name: str):
        timings[name] = time.perf_counter()

    def done(name: str):
        timings[name] = round(time.perf_counter() - timings[name], 3)
        log.info("%s: %.2fs", name, timings[name])

    def finish(code: int, message: str = "") -> PipelineResult:
        cert["exit_code"] = code
        if message:
            cert["message"] = message
        if not reproducible:
            cert["timings"] = timings
            cert["total_seconds"] = round(time.perf_counter() - t_start, 3)
            cert["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        (out_dir / "certificate.json").write_text(json.dumps(cert, indent=2, sort_keys=True) + "\n")
        return PipelineResult(code, cert, message)

    stage("subgroups")
    store = cache if isinstance(cache, AutomatonCache) else AutomatonCache(cache)
    Hs = [store.build(rank, gens) for gens in cfg.subgroups]
    cert["subgroups"] = [{"generators": gens, "automaton": H.to_json()} for gens, H in zip(cfg.subgroups, Hs)]
    done("subgroups")

    for k, H in enumerate(Hs):
        rep = index_and_gauge(H)
        if rep.finite:
            msg = f"{FINITE_INDEX_MESSAGE} (subgroup {k}, index {rep.index})"
            cert["index_guard"] = {"subgroup": k, "index": rep.index}
            return finish(EXIT_FINITE_INDEX, msg)
    cert["morse_gauges"] = [index_and_gauge(H).morse_gauge for H in Hs]

    stage("find_g0")
    try:
        g0c = find_g0(Hs, p)
    except FiniteIndexError as exc:
        return finish(EXIT_FINITE_INDEX, str(exc))
    cert["g0"] = g0c.g0.text
    cert["g0_certificate"] = {"S_radius": g0c.S_radius, "exact_all_H": g0c.exact_all_H,
                              "per_subgroup": list(g0c.per_subgroup)}
    checks["g0_exact_all_H"] = g0c.exact_all_H or cfg.epsilon > 0
    done("find_g0")

    spacers = [parse(t, rank) for t in cfg.spacers]
    g = extend_to_contracting(g0c.g0, spacers)
    cert["g"] = g.text

    stage("projection_scan")
    taus = {}
    scan = None
    for r in range(R["projection"], max(R["projection"], R["stability"]) + 1):
        s = bounded_projection_scan(g, Hs, r)
        taus[r] = s.tau_obs
        if r == R["projection"]:
            scan = s
    assert scan is not None
    tau_obs = taus[max(taus)]
    cert["projection_scan"] = {"tau_by_radius": {str(k): v for k, v in taus.items()},
                               "witness": list(scan.witness) if scan.witness else None}
    checks["tau_stable"] = len(set(taus.values())) == 1
    scan.write_csv(out_dir / "projections.csv")
    done("projection_scan")

    stage("axioms")
    base = axis_of(g)
    F = ProjFamily.from_ball(base, R["family_ball"])
    ax = check_axioms(F)
    kappa = ax.kappa_min
    K = cfg.K if cfg.K is not None else tau_obs + 2 * kappa + 2 * cfg.epsilon + 2
    if K <= kappa:
        return finish(EXIT_CONFIG, f"K={K} must exceed kappa={kappa}")
    pcfg = ProjConfig(kappa, K)
    cert["axioms"] = {"members": len(F), "kappa_min": kappa, "violations": len(ax.violations)}
    checks["axioms"] = not ax.violations
    done("axioms")

    stage("elliptic")
    ell = []
    for k, H in enumerate(Hs):
        e = elliptic_check(H, base, F, pcfg, R["elliptic"])
        ell.append({"subgroup": k, "ok": e.ok, "max_d_P": e.max_d_P, "failures": list(e.failures[:5])})
    cert["elliptic"] = ell
    checks["elliptic"] = all(e["ok"] for e in ell)
    done("elliptic")

    stage("quasi_tree")
    deltas = {}
    for hops in sorted({R["hops"], R["hops_check"]}):
        ball_ = pk_ball(base, hops, F, pcfg)
        deltas[hops] = bottleneck_constant(ball_.graph)[0]
    cert["quasi_tree"] = {"bottleneck_by_hops": {str(k): v for k, v in deltas.items()}}
    checks["quasi_tree"] = len(set(deltas.values())) == 1 and max(deltas.values()) <= 2
    done("quasi_tree")

    stage("family")
    try:
        g1, g2, used = _pick_pair(g0c.g0, spacers)
        sched = FamilySchedule(cfg.schedule["base"], cfg.schedule["N"])
        fam = make_family(PairConfig(g1, g2), sched)
        fam = choose_all_r(fam, p, M_test=R["powers"], protection=g0c.g0)
    except (FamilyError, OverflowError) as exc:
        return finish(EXIT_FAIL, f"family construction failed: {exc}")
    sch = schottky_certificate(g1, g2, 1)
    cert["spacers"] = used
    cert["pair"] = {"g1": g1.text, "g2": g2.text, "schottky_rank": sch.rank, "L1": str(sch.L1)}
    cert["family"] = [{"i": x.index, "f_i": _compact(x.f), "exponents": list(x.exponents),
                       "conjugator": x.conjugator.text if x.conjugator is not None else "",
                       "r_i": x.r, "protection": x.protection.text if x.protection else None}
                      for x in fam]
    done("family")

    stage("property_suite")
    suite = property_suite(fam, Hs, SuiteRadii(R["powers"], R["subgroup"]), W=cfg.W)
    cert["property_suite"] = {"items": {str(k): v for k, v in suite.items.items()},
                              "witnesses": {str(k): v for k, v in suite.witnesses.items()}}
    cert["vanishing"] = {str(k): {"exact": v, "ball_radius": R["subgroup"]}
                         for k, v in suite.exact_vanishing.items()}
    checks["property_suite"] = suite.ok
    checks["vanishing_exact"] = bool(suite.exact_vanishing) and all(suite.exact_vanishing.values())
    done("property_suite")
    if not suite.ok:
        return finish(EXIT_FAIL, f"property item {suite.failed_item} failed: {suite.witnesses}")

    stage("matrix")
    mats = {}
    rows = []
    for m in range(1, R["powers"] + 1):
        ic = independence_matrix(fam, m, suite.exact_vanishing, W=cfg.W)
        mats[str(m)] = ic.matrix.tolist()
        checks[f"matrix_m{m}"] = ic.ok
        for i in range(ic.N):
            for j in range(ic.N):
                rows.append((m, i + 1, j + 1, int(ic.matrix[i, j])))
    cert["matrix"] = mats
    with open(out_dir / "matrix.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "i", "j", "value"])
        w.writerows(rows)
    done("matrix")

    stage("bounded_generation")
    bg = bounded_generation_report(fam[0], Hs, cfg.bounded_generation["N"], R["bounded_generation"],
                                   defect_radius=R["defect"], samples=cfg.bounded_generation["samples"],
                                   seed=cfg.seed, W=cfg.W)
    cert["bounded_generation"] = {"N": bg.N, "slope": str(bg.slope), "empirical_defect": bg.empirical_defect,
                                  "m_star": bg.m_star, "max_product": str(bg.max_product),
                                  "bound": bg.bound, "n_products": bg.n_products}
    checks["bounded_generation"] = bg.ok
    write_defect_csv(out_dir / "defect.csv", member_spec(fam[0], cfg.W), range(1, R["defect"] + 1))
    done("bounded_generation")

    cert["constants"] = {"kappa": kappa, "K": K, "tau_obs": tau_obs, "defect": bg.empirical_defect,
                         "L1": str(sch.L1)}
    failed = [k for k, v in checks.items() if not v]
    if failed:
        return finish(EXIT_FAIL, f"failed checks: {failed}")
    return finish(EXIT_OK)
