"""kgkms command line: validate, report, example."""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence

from . import degrees as dg
from .builders import NAMES, named
from .errors import (DegenerateCriticalBeta, HypothesisUnchecked, InconsistentPartition,
                     InvalidKGraph, KGraphError, NotExact, ParseError)
from .exact import ExactRate, ExpPoly, parse_rate, to_float
from .graphio import dumps, load, loads
from .kgraph import KGraph, validate
from .kms import (CriticalState, ck_defect, kms_sweep, phi_critical, phi_supercritical_table,
                  rational_independence, supercritical_state)
from .measures import (consistency_check, level_sum, mu_cylinder, quasi_invariance_check,
                       support_eigen_check, y_vector)
from .spectral import common_pf, existence_gate, normalize_dynamics
from .toeplitz import ToeplitzElement, adjoint, multiply

ANCHORS = {
    "validate": "k-graph factorization and cube consistency",
    "spectral": "common Perron-Frobenius eigenvector of commuting irreducible matrices",
    "normalize": "critical inverse temperature and the partition J, K",
    "gate": "existence of KMS states only at or above the critical inverse temperature",
    "C_J": "normalizing constant of the level measures",
    "state-table": "critical KMS state diagonal formula",
    "ck-defect": "Cuntz-Krieger relations hold exactly in the K directions",
    "consistency": "level measures are consistent under restriction",
    "level-sums": "summing level measures over J-depth recovers the boundary measure",
    "quasi-invariance": "boundary measure is quasi-invariant with cocycle e^{-r.n}",
    "support-eigen": "Perron-Frobenius subinvariance of the vertex masses",
    "kms-sweep": "KMS condition on spanning elements",
    "positivity": "states are positive on the modeled span",
    "uniqueness": "rational independence of the rates forces a unique critical state",
    "y-vector": "partition function of the supercritical atomic states",
    "supercritical-table": "supercritical KMS state from point masses",
    "enumeration-crosscheck": "point-mass sums agree with the matrix series",
    "exact-mode": "rational arithmetic for the critical formula",
}


@dataclass
class Check:
    name: str
    status: str  # pass, fail or skipped
    value: Any = None
    tolerance: Optional[float] = None
    tail_bound: Optional[float] = None
    detail: str = ""

    def record(self) -> dict:
        out = {"name": self.name, "status": self.status, "anchor": ANCHORS.get(self.name, self.name)}
        if self.value is not None:
            out["value"] = self.value
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.tail_bound is not None:
            out["tail_bound"] = self.tail_bound
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    checks: List[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        if any(c.name == check.name for c in self.checks):
            raise AssertionError(f"check {check.name} recorded twice")
        self.checks.append(check)
        return check

    @property
    def failed(self) -> bool:
        return any(c.status == "fail" for c in self.checks)

    def jsonl(self) -> str:
        return "".join(json.dumps(c.record(), sort_keys=True) + "\n" for c in self.checks)

    def table(self) -> str:
        rows = [("check", "status", "value", "tol", "tail", "anchor")]
        for c in self.checks:
            r = c.record()
            rows.append((c.name, c.status, _short(r.get("value", "")), _short(r.get("tolerance", "")),
                         _short(r.get("tail_bound", "")), r["anchor"]))
        widths = [max(len(str(row[t])) for row in rows) for t in range(len(rows[0]))]
        lines = ["  ".join(str(x).ljust(w) for x, w in zip(row, widths)).rstrip() for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def _short(x, limit: int = 48) -> str:
    text = x if isinstance(x, str) else json.dumps(x, sort_keys=True)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def _num(x):
    """JSON-ready number; exact values are kept as strings alongside."""
    if isinstance(x, (ExpPoly,)) or type(x).__name__ == "Fraction":
        return {"float": to_float(x), "exact": str(x)}
    return to_float(x) if not isinstance(x, (int, float)) else x


# -- report -----------------------------------------------------------------

def _parse_rates(text: Optional[str], k: int) -> List[ExactRate]:
    if text is None:
        return [parse_rate("1")] * k
    parts = [p for p in text.split(",")]
    if len(parts) != k:
        raise ValueError(f"--r needs {k} comma-separated rates, got {len(parts)}")
    return [parse_rate(p) for p in parts]


def _parse_colors(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    return [int(x) for x in text.replace("{", "").replace("}", "").split(",") if x.strip()]


def build_report(g: KGraph, rates: Sequence[ExactRate], beta: Optional[float], K, sweep_cap,
                 tol: float, exact: bool, seed: Optional[int]) -> Report:
    rep = Report()
    rep.add(Check("validate", "pass", {"rank": g.k, "vertices": len(g.vertices), "edges": len(g.edges)}))
    try:
        s = common_pf(g)
    except KGraphError as exc:
        rep.add(Check("spectral", "fail", detail=f"{type(exc).__name__}: {exc}"))
        return rep
    rep.add(Check("spectral", "pass", {"rho": [float(x) for x in s.rho],
                                        "kappa": [float(x) for x in s.kappa]}))
    rf = [float(x) for x in rates]
    try:
        dyn = normalize_dynamics(s, rates, K, exact=exact)
        exact_note = "exact" if exact else "float"
    except NotExact as exc:
        dyn = normalize_dynamics(s, rf, K)
        exact_note = f"float fallback ({exc})"
    except (DegenerateCriticalBeta, InconsistentPartition) as exc:
        rep.add(Check("normalize", "fail", detail=f"{type(exc).__name__}: {exc}"))
        return rep
    rep.add(Check("normalize", "pass", {"beta_c": dyn.beta_c, "r_normalized": list(dyn.r),
                                         "K": list(dyn.K), "J": list(dyn.J)}))
    if exact:
        rep.add(Check("exact-mode", "pass" if dyn.exact_r is not None else "skipped", exact_note))
    beta = dyn.beta_c if beta is None else beta
    try:
        gate = existence_gate(s, rf, beta)
    except HypothesisUnchecked as exc:
        rep.add(Check("gate", "fail", detail=str(exc)))
        return rep
    rep.add(Check("gate", "pass", {"beta": beta, "verdict": str(gate)}))
    if gate.kind == "NoKMS":
        for name in ("state-table", "kms-sweep"):
            rep.add(Check(name, "skipped", detail="no KMS state at this beta"))
        return rep
    if gate.kind == "Supercritical":
        _supercritical_checks(rep, g, s, dyn, beta / dyn.beta_c, sweep_cap, tol)
        return rep
    _critical_checks(rep, g, s, dyn, sweep_cap, tol, seed)
    return rep


def _critical_checks(rep: Report, g: KGraph, s, dyn, sweep_cap, tol: float, seed) -> None:
    state = CriticalState(g, s, dyn)
    table = {}
    for lam in g.paths_upto(None, sweep_cap):
        table[str(lam)] = _num(phi_critical(state, ToeplitzElement.span(g, lam, lam)))
    rep.add(Check("state-table", "pass", table))
    if dyn.J:
        ctx = state.context
        rep.add(Check("C_J", "pass", _num(ctx.C_J)))
        defects, ok = {}, True
        for v in g.vertices:
            for i in range(1, g.k + 1):
                try:
                    defects[f"{v},{i}"] = _num(ck_defect(state, v, i, tol=max(tol, 1e-12)))
                except AssertionError:
                    ok = False
        rep.add(Check("ck-defect", "pass" if ok else "fail", defects, 1e-12))
        _measure_checks(rep, g, ctx)
    else:
        why = "J is empty (preferred dynamics): out of scope for the level measures"
        for name in ("C_J", "ck-defect", "consistency", "level-sums", "quasi-invariance", "support-eigen"):
            rep.add(Check(name, "skipped", detail=why))
    sweep = kms_sweep(state, sweep_cap)
    rep.add(Check("kms-sweep", "pass" if sweep.max_residual <= tol else "fail",
                  {"pairs": sweep.pairs, "nonzero": sweep.nonzero, "max_residual": sweep.max_residual},
                  tol))
    if seed is not None:
        rep.add(_positivity(state, g, sweep_cap, seed, tol))
    ind = rational_independence(dyn.exact_r if dyn.exact_r is not None else dyn.r)
    rep.add(Check("uniqueness", "pass", {"independent": ind.independent,
                                          "relation": list(ind.relation) if ind.relation else None},
                  detail="unique critical state" if ind.independent else
                  "rates are rationally dependent; uniqueness not asserted"))


def _measure_checks(rep: Report, g: KGraph, ctx) -> None:
    sp = ctx.space
    nJ, nK = len(ctx.dynamics.J), len(ctx.dynamics.K)
    worst, count, bad = 0.0, 0, 0
    for m in dg.box((1,) * nJ):
        for p in dg.box((2,) * nK):
            for n in dg.box(p):
                if not dg.leq(sp.degree(m, p), g.degree_cap):
                    continue
                c = consistency_check(ctx, m, n, p)
                worst, count, bad = max(worst, c.max_discrepancy), count + c.checked, bad + c.failures
    rep.add(Check("consistency", "pass" if bad == 0 else "fail",
                  {"cells": count, "max_discrepancy": worst}, 1e-12))
    gap, tail, ok = 0.0, 0.0, True
    for lam in g.paths_upto(None, tuple(min(1, c) for c in g.degree_cap)):
        try:
            ls = level_sum(ctx, lam, 40)
        except AssertionError:
            ok = False
            continue
        gap = max(gap, to_float(ls.closed - ls.partial))
        tail = max(tail, ls.tail_bound)
    rep.add(Check("level-sums", "pass" if ok else "fail", {"max_gap": gap}, tail_bound=tail))
    q = quasi_invariance_check(ctx)
    rep.add(Check("quasi-invariance", "pass" if q.ok else "fail",
                  {"paths": q.checked, "max_discrepancy": q.max_discrepancy}, 1e-12))
    se = support_eigen_check(ctx)
    total = math.fsum(to_float(mu_cylinder(ctx, g.vertex(v))) for v in g.vertices)
    ok = se.ok and abs(total - 1) <= 1e-12
    rep.add(Check("support-eigen", "pass" if ok else "fail",
                  {"max_discrepancy": se.max_discrepancy, "total_mass": total}, 1e-9, detail=se.detail))


def _positivity(state, g: KGraph, cap, seed: int, tol: float) -> Check:
    rng = random.Random(seed)
    P = g.paths_upto(None, tuple(min(1, c) for c in cap))
    worst = math.inf
    for _ in range(50):
        terms = {}
        for _ in range(rng.randint(1, 4)):
            mu = rng.choice(P)
            nus = [p for p in P if p.source == mu.source]
            terms[(mu, rng.choice(nus))] = rng.randint(-3, 3)
        a = ToeplitzElement(g, terms)
        val = to_float(phi_critical(state, multiply(a, adjoint(a))))
        worst = min(worst, val)
    return Check("positivity", "pass" if worst >= -tol else "fail", {"samples": 50, "min": worst}, tol)


def _supercritical_checks(rep: Report, g, s, dyn, beta_n: float, sweep_cap, tol: float) -> None:
    yv = y_vector(s, dyn.r, beta_n)
    rep.add(Check("y-vector", "pass", {"y": [float(x) for x in yv.y]},
                  tail_bound=float(max(yv.tail_bound))))
    state = supercritical_state(g, s, dyn, beta_n, cap=tuple(min(2, c) for c in g.degree_cap))
    diag, tails = {}, []
    for lam in g.paths_upto(None, sweep_cap):
        diag[str(lam)] = state.diagonal(lam)
        tails.append(state.diagonal_tail(lam))
    rep.add(Check("supercritical-table", "pass", diag, tail_bound=max(tails)))
    # independent check: enumerate the atoms directly, up to a small cap
    small = tuple(min(1, c) for c in sweep_cap)
    worst, ok = 0.0, True
    for (mu, nu), (val, tl) in phi_supercritical_table(state, small).items():
        gap = abs(val - (state.diagonal(mu) if mu == nu else 0.0))
        worst = max(worst, gap)
        ok = ok and gap <= tl + state.diagonal_tail(mu) + tol
    rep.add(Check("enumeration-crosscheck", "pass" if ok else "fail", {"max_gap": worst, "degree": list(small),
                                                                        "cap": list(state.cap)},
                  detail="series values against truncated atom sums, within the truncation tail"))
    sweep = kms_sweep(state, sweep_cap)
    rep.add(Check("kms-sweep", "pass" if sweep.max_excess <= tol else "fail",
                  {"pairs": sweep.pairs, "nonzero": sweep.nonzero, "max_residual": sweep.max_residual,
                   "max_excess_over_tail": sweep.max_excess, "degree": list(sweep_cap)}, tol,
                  detail="residual measured against the truncation allowance"))


# -- commands ---------------------------------------------------------------

def _env_cap(k: int) -> Optional[tuple]:
    raw = os.environ.get("KGKMS_DEGREE_CAP")
    if raw is None:
        return None
    return dg.parse(raw, k)


def default_sweep_cap(k: int) -> tuple:
    """Pair sweeps grow like |Lambda^{<=cap}|^2: degree 2 per color for rank 2, 1 above."""
    return (2,) * k if k <= 2 else (1,) * k


def cmd_validate(args) -> int:
    sk, sq = load(args.file)
    try:
        g = validate(sk, sq)
    except InvalidKGraph as exc:
        rep = Report([Check("validate", "fail", [str(v) for v in exc.violations],
                            detail=", ".join(sorted({type(v).__name__ for v in exc.violations})))])
        _emit(rep, args.format)
        return 1
    rep = Report([Check("validate", "pass", {"rank": g.k, "vertices": len(g.vertices),
                                              "edges": len(g.edges), "squares": len(g.squares)})])
    _emit(rep, args.format)
    return 0


def cmd_report(args) -> int:
    sk, sq = load(args.file)
    try:
        g = validate(sk, sq, _env_cap(sk.k))
    except InvalidKGraph as exc:
        _emit(Report([Check("validate", "fail", [str(v) for v in exc.violations])]), args.format)
        return 1
    try:
        rates = _parse_rates(args.r, g.k)
        K = _parse_colors(args.K)
        sweep_cap = dg.parse(args.degree_cap, g.k) if args.degree_cap else default_sweep_cap(g.k)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    rep = build_report(g, rates, args.beta, K, sweep_cap, args.tol, args.exact, args.seed)
    _emit(rep, args.format)
    return 1 if rep.failed else 0


def cmd_example(args) -> int:
    params = {}
    for item in args.params:
        key, sep, val = item.partition("=")
        if not sep:
            raise ParseError(f"parameter {item!r} is not key=value")
        params[key.lower()] = val
    sk, sq = named(args.name, **params)
    text = dumps(sk, sq)
    validate(*loads(text))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _emit(rep: Report, fmt: str) -> None:
    sys.stdout.write(rep.jsonl() if fmt == "jsonl" else rep.table())


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kgkms", description="k-graph KMS state verification")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="check the k-graph axioms")
    v.add_argument("file")
    v.add_argument("--format", choices=("jsonl", "table"), default="table")
    r = sub.add_parser("report", help="spectral data, states and verification checks")
    r.add_argument("file")
    r.add_argument("--r", help="comma-separated rates, e.g. 1,ln3 (default all 1)")
    r.add_argument("--beta", type=float, help="inverse temperature for the raw rates (default critical)")
    r.add_argument("--K", help="declared color set for K, e.g. 2 or 2,3")
    r.add_argument("--degree-cap", help="degree cap for the state table and KMS sweep (default 2,2 for rank 2, 1 per color above)")
    r.add_argument("--tol", type=float, default=1e-9)
    r.add_argument("--exact", action="store_true", help="rational arithmetic where possible")
    r.add_argument("--seed", type=int, help="run sampled positivity checks with this seed")
    r.add_argument("--format", choices=("jsonl", "table"), default="table")
    e = sub.add_parser("example", help="write a generated example graph")
    e.add_argument("name", choices=NAMES)
    e.add_argument("params", nargs="*", help="key=value, e.g. n1=2 n2=3")
    e.add_argument("-o", "--output")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    handler = {"validate": cmd_validate, "report": cmd_report, "example": cmd_example}[args.command]
    try:
        return handler(args)
    except ParseError as exc:
        sys.stderr.write(f"kgkms: parse error: {exc}\n")
        return 2
    except KGraphError as exc:
        sys.stderr.write(f"kgkms: {type(exc).__name__}: {exc}\n")
        return 2 if type(exc).__name__ == "BadParams" else 1


if __name__ == "__main__":
    sys.exit(main())
