"""Command line entry point: ``tlfock <suite|report> -c config.json``.

Exit codes: 0 when every selected suite passes, 1 when a check fails,
2 on bad input (config, matrix, unsupported form or truncation).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import duality, gnsfred, kms
from .chain import DEFAULT_BUDGET, Chain, bruteforce_fiber, build_chain, oracle_compare
from .errors import ConfigError, InputError, ParseError, SchemaError, ShapeError, TLFockError
from .fock import commutator_norms, fit_decay, relation_suite
from .numerics import unitary_defect
from .qarith import fiber_dims
from .report import SCHEMA_VERSION, Check, Report, _clean, load_schema
from .tlpoly import TLData, dagger, tl_defect, tl_validate

SUITES = ("validate", "dims", "relations", "commutators", "wtilde", "index", "kms", "fredholm", "kgroups")
DEFAULT_TOLERANCE = 1e-8
CSV_HEADER = ["n", "value", "q_power", "ratio"]
ORACLE_MAX_DIM = 729  # brute-force fibers up to m^n = 3^6


@dataclass
class RunSpec:
    A: np.ndarray
    N: int
    budget: int = DEFAULT_BUDGET
    tolerance: float = DEFAULT_TOLERANCE
    suites: tuple[str, ...] = SUITES
    suites_given: bool = False
    seed: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict[str, Any]:
        return {"m": self.m, "N": self.N, "budget": self.budget, "tolerance": self.tolerance,
                "suites": list(self.suites), "seed": self.seed}


def default_N(m: int) -> int:
    return 12 if m == 2 else 6 if m == 3 else 5


def parse_config(text: str) -> RunSpec:
    """Parse and validate a JSON config; errors carry line/column where possible."""
    import jsonschema

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object")
    unknown = sorted(set(doc) - set(load_schema("config")["properties"]))
    if unknown:
        raise SchemaError(f"unknown config key(s): {', '.join(unknown)}")
    try:
        jsonschema.validate(doc, load_schema("config"))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{where}: {exc.message}") from None
    rows = doc["A"]
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise ShapeError("A must be square")
    if m < 2:
        raise ShapeError("A must be at least 2x2 (m >= 2)")
    A = np.array([[complex(re, im) for re, im in r] for r in rows])
    suites = doc.get("suites")
    return RunSpec(
        A=A,
        N=int(doc.get("N", default_N(m))),
        budget=int(doc.get("budget", DEFAULT_BUDGET)),
        tolerance=float(doc.get("tolerance", DEFAULT_TOLERANCE)),
        suites=tuple(s for s in SUITES if s in suites) if suites is not None else SUITES,
        suites_given=suites is not None,
        seed=int(doc.get("seed", 0)),
    )


class Context:
    """Lazily built objects shared between suites."""

    def __init__(self, spec: RunSpec):
        self.spec = spec
        self._t: TLData | None = None
        self._chain: Chain | None = None
        self._chain_dag: Chain | None = None

    @property
    def t(self) -> TLData:
        if self._t is None:
            self._t = tl_validate(self.spec.A, self.spec.tolerance)
        return self._t

    @property
    def chain(self) -> Chain:
        if self._chain is None:
            self._chain = build_chain(self.t, self.spec.N, self.spec.budget)
        return self._chain

    @property
    def chain_dag(self) -> Chain:
        if self._chain_dag is None:
            self._chain_dag = build_chain(dagger(self.t), self.spec.N, self.spec.budget)
        return self._chain_dag


def suite_validate(ctx: Context) -> Report:
    t, tol = ctx.t, ctx.spec.tolerance
    rep = Report("validate")
    lam, resid = tl_defect(t)
    rep.add(Check("tl_relation", resid, tol, provenance="(e x 1)(1 x e)(e x 1) = lambda^-1 (e x 1)"))
    rep.add(Check("lambda", abs(lam - (t.q + 1 / t.q) ** 2), tol, provenance="lambda = (q + 1/q)^2"))
    rep.add(Check("unitary_defect", unitary_defect(t.A @ t.A.conj()), tol, provenance="A conj(A) unitary"))
    rep.constants.update({"q": t.q, "lambda": lam, "m": t.m, "standard_form": t.standard_form, "scale": t.scale})
    return rep


def suite_dims(ctx: Context) -> Report:
    c = ctx.chain
    rep = Report("dims")
    expected = fiber_dims(c.m, c.N_full)
    rep.add(Check("chebyshev_recursion", None, passed=list(c.dims[: c.N_full + 1]) == expected,
                  note=f"dims {list(c.dims[: c.N_full + 1])}"))
    top = min(c.N_full, int(math.log(ORACLE_MAX_DIM + 0.5) / math.log(c.m)))
    worst, ranks_ok = 0.0, True
    rows = []
    for n in range(top + 1):
        diff = oracle_compare(c, n)
        rank = int(round(np.trace(bruteforce_fiber(c.t, n)).real))
        ranks_ok &= rank == c.dims[n]
        worst = max(worst, diff)
        rows.append({"n": n, "dim": c.dims[n], "bruteforce_rank": rank, "oracle_diff": diff})
    rep.add(Check("bruteforce_rank", None, passed=ranks_ok))
    rep.add(Check("oracle_compare", worst, ctx.spec.tolerance, provenance="run tolerance"))
    rep.tables["fibers"] = rows
    rep.constants.update({"N": c.N, "N_full": c.N_full})
    return rep


def suite_relations(ctx: Context) -> Report:
    return relation_suite(ctx.chain, ctx.spec.tolerance)


def suite_commutators(ctx: Context) -> Report:
    c, q = ctx.chain, ctx.t.q
    table = commutator_norms(c)
    rep = Report("commutators")
    zero = max(z for z, _ in table.values())
    rep.add(Check("L_R_commute", zero, 1e-10, provenance="[L_i, R_j] = 0"))
    star = {n: s for n, (_, s) in table.items()}
    if q < 1:
        C_hat, monotone = fit_decay(star, q)
        rep.add(Check("q_power_bound_finite", C_hat, passed=bool(np.isfinite(C_hat)),
                      provenance="||[L_i^*, R_j]|_{H_n}|| <= C q^n"))
        rep.constants.update({"C_hat": C_hat, "ratio_tail_nonincreasing": monotone})
        rep.tables["star_norm"] = [{"n": n, "value": v, "q_power": q**n, "ratio": v / q**n} for n, v in star.items()]
    else:
        scaled = {n: v * math.sqrt(n) for n, v in star.items()}
        C_prime = max(scaled.values())
        rep.add(Check("sqrt_n_bound_finite", C_prime, passed=bool(np.isfinite(C_prime)),
                      provenance="||[L_i^*, R_j]|_{H_n}|| <= C' n^(-1/2)"))
        rep.constants["C_prime_hat"] = C_prime
        rep.tables["star_norm"] = [{"n": n, "value": v, "q_power": n ** -0.5, "ratio": v * math.sqrt(n)}
                                   for n, v in star.items()]
    rep.tables["zero_resid"] = [{"n": n, "value": z} for n, (z, _) in table.items()]
    return rep


def suite_wtilde(ctx: Context) -> Report:
    t, c, tol = ctx.t, ctx.chain, ctx.spec.tolerance
    w = duality.build_wtilde(c)
    rep = duality.defect_check(w, tol)
    if t.standard_form:
        diff = duality.compare_wtilde(w, duality.wtilde_standard(t, c))
        rep.add(Check("standard_form_agreement", diff, tol, provenance="closed formula vs fusion construction"))
    else:
        rep.conventions["standard_form_agreement"] = "not run: coefficient matrix is not anti-diagonal"
    rep.constants["grade_max"] = w.grade_max
    return rep


def suite_index(ctx: Context) -> Report:
    return duality.counit_index(ctx.t, ctx.chain, tol=ctx.spec.tolerance)


def suite_kms(ctx: Context) -> Report:
    t, c = ctx.t, ctx.chain
    cfg = kms.KmsConfig()
    rep = Report("kms")
    rho = kms.woronowicz_rho(t)
    rep.add(Check("rho_trace", abs(np.trace(rho).real - (t.q + 1 / t.q)), 1e-12, provenance="Tr rho = q + 1/q"))
    deg_cap = min(3, c.N_full - cfg.k_margin - cfg.stabilization_span + 1)
    if deg_cap < 1:
        raise InputError(f"N_full={c.N_full} too small for the KMS window")
    closed = stab = 0.0
    count = 0
    for n in range(deg_cap + 1):
        for w in kms.normal_monomials(c.m, n):
            val = kms.omega(t, c, w, cfg)
            closed = max(closed, val.closed_form_residual)
            stab = max(stab, val.stabilization_residual)
            count += 1
    rep.add(Check("closed_form_match", closed, 1e-10, note=f"{count} monomials up to degree {deg_cap}"))
    rep.add(Check("stabilization", stab, 1e-10, note=f"window of {cfg.stabilization_span} levels"))
    unbalanced = max(abs(kms.omega(t, c, w, cfg).value)
                     for n in range(1, min(deg_cap, 2) + 1) for w in kms.all_words(c.m, n) if not w.balanced)
    rep.add(Check("gauge_unbalanced", unbalanced, 1e-12))
    total = sum(kms.omega(t, c, kms.Word(((i, False), (i, True))), cfg).value for i in range(1, c.m + 1))
    rep.add(Check("sum_s_i_s_i_star", abs(total - 1), 1e-10, provenance="image of 1 - e_0 is 1"))
    kms_worst = max(kms.kms_check(t, c, x, y, cfg)
                    for x, y in kms.random_pairs(c.m, 100, max_degree=deg_cap, seed=ctx.spec.seed))
    rep.add(Check("kms_condition", kms_worst, 1e-10, note=f"100 random pairs, seed {ctx.spec.seed}"))
    rng = np.random.default_rng(ctx.spec.seed)
    positivity = min(kms.omega(t, c, w.adjoint() * w, cfg).value.real
                     for w in (kms.random_word(rng, c.m, int(rng.integers(1, deg_cap + 1))) for _ in range(50)))
    rep.add(Check("positivity", -positivity, 1e-12, provenance="omega(w^* w) >= 0"))
    rep.constants.update({"seed": ctx.spec.seed, "degree_cap": deg_cap, "k_margin": cfg.k_margin})
    rep.conventions["evaluation"] = "normal order in the quotient (phi -> q), then psi_k o pi_k"
    return rep


def suite_fredholm(ctx: Context) -> Report:
    c, cd = ctx.chain, ctx.chain_dag
    N_V = min(c.N, c.N_full, cd.N_full)
    return gnsfred.fredholm_report(c, cd, N_V, tol=1e-10)


def suite_kgroups_for(m: int) -> Report:
    rep = Report("kgroups")
    kt, kh = duality.k_groups(m)
    rep.constants.update({"m": m, "K_0": kt.k0_description, "K_1": kt.k1_description,
                          "K^0": kh.k0_description, "K^1": kh.k1_description})
    rep.add(Check("lookup", None, passed=True, provenance="torsion Z/(m-2)Z, free part Z only for m = 2"))
    return rep


def suite_kgroups(ctx: Context) -> Report:
    return suite_kgroups_for(ctx.spec.m)


RUNNERS: dict[str, Callable[[Context], Report]] = {
    "validate": suite_validate,
    "dims": suite_dims,
    "relations": suite_relations,
    "commutators": suite_commutators,
    "wtilde": suite_wtilde,
    "index": suite_index,
    "kms": suite_kms,
    "fredholm": suite_fredholm,
    "kgroups": suite_kgroups,
}


def _skip_reason(name: str, ctx: Context) -> str | None:
    """Suites that do not apply to the input are skipped when not asked for explicitly."""
    t = ctx.t
    if name == "index" and (t.m != 2 or not t.standard_form):
        return "counit index is defined for the m = 2 family only"
    if name == "kms" and not t.standard_form:
        return "KMS closed forms need the anti-diagonal standard form"
    if name == "fredholm" and t.q >= 1:
        return "the Fredholm module needs q < 1"
    return None


def _error_entry(exc: Exception, suite: str | None) -> dict[str, Any]:
    entry = {"suite": suite, "type": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        entry["line"], entry["column"] = exc.line, exc.column
    return entry


def _version() -> str:
    try:
        return metadata.version("tlfock")
    except metadata.PackageNotFoundError:
        return "unknown"


def _document(config: dict[str, Any], suites: dict[str, Report], errors: list, timing: dict[str, float]) -> dict:
    if any(e for e in errors):
        status, code = "error", 2
    elif all(r.passed or r.status == "skipped" for r in suites.values()):
        status, code = "pass", 0
    else:
        status, code = "fail", 1
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "tlfock",
        "version": _version(),
        "status": status,
        "exit_code": code,
        "config": _clean(config),
        "suites": {name: rep.to_dict() for name, rep in suites.items()},
        "errors": errors,
        "timing": timing,
    }


def run(spec: RunSpec, selected: tuple[str, ...] | None = None) -> dict[str, Any]:
    """Run suites in dependency order and return the report document."""
    ctx = Context(spec)
    wanted = selected if selected is not None else spec.suites
    explicit = selected is not None or spec.suites_given
    suites: dict[str, Report] = {}
    errors: list[dict[str, Any]] = []
    timing: dict[str, float] = {}
    config = spec.to_dict()
    config["suites"] = list(wanted)
    for name in SUITES:
        if name not in wanted:
            continue
        start = time.perf_counter()
        try:
            if name != "kgroups":
                reason = _skip_reason(name, ctx)
                if reason and not explicit:
                    suites[name] = Report(name, status="skipped", conventions={"reason": reason})
                    continue
            suites[name] = RUNNERS[name](ctx)
        except InputError as exc:
            suites[name] = Report(name, status="error", error=f"{type(exc).__name__}: {exc}")
            errors.append(_error_entry(exc, name))
            if name == "validate" or isinstance(exc, (ConfigError,)) or ctx._t is None:
                break
        except TLFockError as exc:
            suites[name] = Report(name, status="fail", error=f"{type(exc).__name__}: {exc}")
        finally:
            timing[name] = time.perf_counter() - start
    if ctx._t is not None:
        config["q"] = ctx.t.q
    return _document(config, suites, errors, timing)


def decay_tables(doc: dict[str, Any]) -> dict[str, list[dict[str, Any]]]:
    """Plot-ready decay tables keyed by a short name."""
    out = {}
    comm = doc["suites"].get("commutators", {}).get("tables", {})
    if "star_norm" in comm:
        out["commutators"] = comm["star_norm"]
    fred = doc["suites"].get("fredholm", {})
    q = doc["config"].get("q")
    for side in ("s", "t"):
        rows = fred.get("tables", {}).get(f"commutator_{side}")
        if rows and q:
            out[f"fredholm_{side}"] = [{"n": r["n"], "value": r["c_n"], "q_power": q ** r["n"],
                                        "ratio": r["c_n"] / q ** r["n"]} for r in rows]
    return out


def write_csv(path: Path, doc: dict[str, Any]) -> list[Path]:
    """First decay table goes to ``path``; further ones to ``<stem>_<name><suffix>``."""
    written = []
    for idx, (name, rows) in enumerate(decay_tables(doc).items()):
        target = path if idx == 0 else path.with_name(f"{path.stem}_{name}{path.suffix}")
        with open(target, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_HEADER, extrasaction="ignore")
            writer.writeheader()
            writer.writerows(rows)
        written.append(target)
    return written


def _limit_threads():
    value = os.environ.get("TLFOCK_THREADS")
    if not value:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(value)))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tlfock", description="Numerical checks for Temperley-Lieb subproduct systems.")
    p.add_argument("command", choices=("report",) + SUITES, help="a single suite, or 'report' for the configured suites")
    p.add_argument("-c", "--config", type=Path, help="JSON run configuration")
    p.add_argument("--json", type=Path, help="write the JSON report here instead of stdout")
    p.add_argument("--csv", type=Path, help="write decay tables (n,value,q_power,ratio) here")
    p.add_argument("-m", type=int, help="number of generators for 'kgroups' without a config")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    limiter = _limit_threads()
    try:
        doc = _dispatch(args)
    finally:
        if limiter is not None:
            limiter.unregister()
    text = json.dumps(doc, indent=2)
    if args.json:
        args.json.write_text(text + "\n")
    else:
        print(text)
    for name, suite in doc["suites"].items():
        print(f"{name}: {suite['status']}", file=sys.stderr)
    for err in doc["errors"]:
        print(f"error ({err['type']}): {err['message']}", file=sys.stderr)
    if args.csv and doc["exit_code"] != 2:
        write_csv(args.csv, doc)
    return doc["exit_code"]


def _dispatch(args) -> dict[str, Any]:
    if args.command == "kgroups" and args.m is not None:
        try:
            rep = suite_kgroups_for(args.m)
        except InputError as exc:
            return _document({"m": args.m}, {"kgroups": Report("kgroups", status="error", error=str(exc))},
                             [_error_entry(exc, "kgroups")], {})
        return _document({"m": args.m}, {"kgroups": rep}, [], {})
    if args.config is None:
        err = ConfigError("a config file is required (-c config.json)")
        return _document({}, {}, [_error_entry(err, None)], {})
    try:
        spec = parse_config(args.config.read_text(encoding="utf-8"))
    except OSError as exc:
        return _document({}, {}, [_error_entry(ConfigError(f"cannot read config: {exc}"), None)], {})
    except InputError as exc:
        return _document({}, {}, [_error_entry(exc, None)], {})
    if args.command == "report":
        return run(spec)
    return run(spec, (args.command,))


if __name__ == "__main__":
    sys.exit(main())
