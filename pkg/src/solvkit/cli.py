"""solvkit command line: count, verify, tables, formula, radical, batch.

Exit codes: 0 ok, 1 mismatch or failed batch line, 2 bad spec or group file,
3 cap exceeded or timeout, 4 internal consistency failure, 5 family not
covered by a formula or table.
"""
from __future__ import annotations

import json
import sys
import time
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import click

from .families import GroupSpec, named_group, parse_spec
from .formulas import (
    FormulaFamily,
    UnsupportedFormula,
    check_lower_bound,
    family_for_spec,
    minimal_simple_distinctness,
    solv_formula,
)
from .lattice import DEFAULT_LATTICE_CAP, NoTableApplies, ExcludedSpecialCase, verify_table
from .perm import DEFAULT_CLOSURE_CAP, CapExceeded, ConsistencyError, GroupError, quotient_group
from .solvabilizer import (
    DEFAULT_NAIVE_CAP,
    RunTimeout,
    SolvReport,
    solv_count_naive,
    solv_count_rational,
)
from .solvability import solvable_radical

SCHEMA_VERSION = 1

EXIT_MISMATCH, EXIT_PARSE, EXIT_CAP, EXIT_CONSISTENCY, EXIT_NOT_COVERED = 1, 2, 3, 4, 5


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


@dataclass
class RunConfig:
    spec: GroupSpec | None
    method: str = "rational"
    jobs: int = 1
    closure_cap: int = DEFAULT_CLOSURE_CAP
    lattice_cap: int = DEFAULT_LATTICE_CAP
    naive_cap: int = DEFAULT_NAIVE_CAP
    timeout: float | None = None
    as_json: bool = False
    cache: Path | None = None

    def deadline(self) -> float | None:
        return None if self.timeout is None else time.monotonic() + self.timeout


@dataclass
class CacheRecord:
    spec: str
    order: int
    total: int
    method: str
    version: str
    timestamp: str
    millis: float


class Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- cache --------------------------------------------------------------------

def read_cache(path: Path) -> list[CacheRecord]:
    if not path.exists():
        return []
    out = []
    for line in path.read_text().splitlines():
        if line.strip():
            out.append(CacheRecord(**json.loads(line)))
    return out


def append_cache(path: Path, report: SolvReport, method: str, millis: float) -> CacheRecord:
    """Append one record; a prior record for the same spec and version with a
    different total is a consistency failure."""
    rec = CacheRecord(report.spec, report.order, report.total, method, artifact_version(),
                      datetime.now(timezone.utc).isoformat(timespec="seconds"), round(millis, 1))
    for old in read_cache(path):
        if old.spec == rec.spec and old.version == rec.version and old.total != rec.total:
            raise ConsistencyError(f"cached total {old.total} for {rec.spec} differs from {rec.total}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a") as fh:
        fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")
    return rec


# -- work ---------------------------------------------------------------------

def build_group(cfg: RunConfig):
    try:
        return named_group(cfg.spec, cap=cfg.closure_cap)
    except CapExceeded:
        raise
    except (GroupError, OSError) as exc:
        raise Failure(EXIT_PARSE, str(exc)) from exc


def run_count(cfg: RunConfig) -> dict:
    G = build_group(cfg)
    deadline = cfg.deadline()
    out: dict = {"schema": f"solvkit.count/{SCHEMA_VERSION}", "spec": str(cfg.spec), "order": G.order}
    reports = {}
    if cfg.method in ("naive", "both"):
        reports["naive"] = solv_count_naive(G, cap=cfg.naive_cap, spec=str(cfg.spec), deadline=deadline)
    if cfg.method in ("rational", "both"):
        reports["rational"] = solv_count_rational(G, spec=str(cfg.spec), jobs=cfg.jobs, deadline=deadline)
    totals = {m: r.total for m, r in reports.items()}
    if len(set(totals.values())) > 1:
        raise ConsistencyError(f"methods disagree: {totals}")
    main_report = reports.get("rational") or reports["naive"]
    out["method"] = cfg.method
    out["total"] = main_report.total
    out["upper_bound"] = main_report.upper_bound
    out["methods"] = {m: {"total": r.total, "millis": round(r.millis, 1)} for m, r in reports.items()}
    if "rational" in reports:
        out["classes"] = [asdict(c) for c in reports["rational"].classes]
    bound = check_lower_bound(main_report)
    out["lower_bound"] = {"applicable": bound.applicable, "holds": bound.holds,
                          "conjecture_flag": bound.conjecture_flag}
    if bound.applicable and not bound.holds:
        raise ConsistencyError(f"nonsolvable group with total {main_report.total} < 32")
    if cfg.cache is not None:
        millis = sum(r.millis for r in reports.values())
        append_cache(cfg.cache, main_report, cfg.method, millis)
    return out


def render_count(out: dict) -> str:
    lines = [f"group     {out['spec']}  (order {out['order']})",
             f"total     {out['total']}",
             f"bound     {out['upper_bound']}  (sum of [G : N(<x>)] over rational classes)"]
    for m, r in out["methods"].items():
        lines.append(f"{m:<10}{r['total']}  in {r['millis']:.1f} ms")
    if len(out["methods"]) > 1:
        lines.append("methods agree")
    if out["lower_bound"]["conjecture_flag"]:
        lines.append("note      total is 32: check for an A5 composition factor")
    if "classes" in out:
        head = ("rep", "|x|", "class", "|Sol|", "|N(Sol)|", "|N(<x>)|", "count", "dedup")
        rows = [tuple(str(c[k]) for k in ("rep", "element_order", "class_size", "sol_size",
                                          "normalizer_order", "cyclic_normalizer_order",
                                          "contribution", "dedup")) for c in out["classes"]]
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        lines.append("")
        for r in [head] + rows:
            lines.append("  ".join(s.rjust(w) if i < 7 else s for i, (s, w) in enumerate(zip(r, widths))))
    return "\n".join(lines)


def run_verify(cfg: RunConfig) -> dict:
    fam = family_for_spec(cfg.spec)
    expected = solv_formula(fam)
    counted = run_count(replace(cfg, method="rational"))
    return {"schema": f"solvkit.verify/{SCHEMA_VERSION}", "spec": str(cfg.spec), "family": str(fam),
            "computed": counted["total"], "formula": expected, "match": counted["total"] == expected}


def table_q(spec: GroupSpec) -> int:
    if spec.family == "psl2":
        return spec.params[0]
    if spec.family == "a" and spec.params[0] == 5:
        return 4
    if spec.family == "a" and spec.params[0] == 6:
        raise NoTableApplies("a:6 is PSL(2, 9); q = 3^2 has even exponent")
    raise NoTableApplies(f"no table applies to {spec}")


def run_radical(cfg: RunConfig) -> dict:
    G = build_group(cfg)
    R = solvable_radical(G)
    Q = quotient_group(G, R, cap=cfg.closure_cap)
    deadline = cfg.deadline()
    total = solv_count_rational(G, spec=str(cfg.spec), jobs=cfg.jobs, deadline=deadline).total
    qtotal = solv_count_rational(Q, spec=f"{cfg.spec}/R", jobs=cfg.jobs, deadline=deadline).total
    if total != qtotal:
        raise ConsistencyError(f"|Solv(G)| = {total} but |Solv(G/R)| = {qtotal}")
    return {"schema": f"solvkit.radical/{SCHEMA_VERSION}", "spec": str(cfg.spec), "order": G.order,
            "radical_order": len(R), "quotient_order": Q.order, "total": total, "quotient_total": qtotal}


# -- click plumbing -------------------------------------------------------------

def _spec(ctx, param, value):
    if value is None:
        return None
    try:
        return parse_spec(value)
    except GroupError as exc:
        raise click.BadParameter(str(exc)) from exc


def common_options(require_group: bool = True):
    def deco(f):
        opts = [
            click.option("--group", "group", callback=_spec, required=require_group,
                         help="Group spec, e.g. a:5, psl2:8, direct(a:5,c:6)."),
            click.option("--jobs", default=1, type=click.IntRange(min=1), show_default=True),
            click.option("--json", "as_json", is_flag=True, help="Emit JSON."),
            click.option("--cache", type=click.Path(dir_okay=False, path_type=Path), envvar="SOLVKIT_CACHE",
                         help="Append-only results cache (line-delimited JSON)."),
            click.option("--closure-cap", default=DEFAULT_CLOSURE_CAP, type=click.IntRange(min=1), show_default=True),
            click.option("--lattice-cap", default=DEFAULT_LATTICE_CAP, type=click.IntRange(min=1), show_default=True),
            click.option("--naive-cap", default=DEFAULT_NAIVE_CAP, type=click.IntRange(min=1), show_default=True),
            click.option("--timeout", type=click.FloatRange(min=0, min_open=True), help="Seconds."),
        ]
        for o in reversed(opts):
            f = o(f)
        return f
    return deco


def _config(group, jobs, as_json, cache, closure_cap, lattice_cap, naive_cap, timeout, method="rational"):
    return RunConfig(group, method, jobs, closure_cap, lattice_cap, naive_cap, timeout, as_json, cache)


def _emit(cfg: RunConfig, payload: dict, text: str):
    if cfg.as_json:
        click.echo(json.dumps(payload, sort_keys=True, indent=2))
    else:
        click.echo(text)


def _guard(fn):
    """Map exceptions onto the exit-code contract."""
    try:
        return fn()
    except Failure as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.code)
    except (CapExceeded, RunTimeout) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CAP)
    except ConsistencyError as exc:
        click.echo(f"consistency failure: {exc}", err=True)
        sys.exit(EXIT_CONSISTENCY)
    except ExcludedSpecialCase as exc:
        click.echo(f"excluded special case: {exc}", err=True)
        sys.exit(EXIT_NOT_COVERED)
    except (UnsupportedFormula, NoTableApplies) as exc:
        click.echo(f"not covered: {exc}", err=True)
        sys.exit(EXIT_NOT_COVERED)
    except GroupError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_PARSE)


@click.group()
@click.version_option(artifact_version(), prog_name="solvkit")
def main():
    """Count distinct solvabilizers of permutation groups."""


@main.command()
@click.option("--method", type=click.Choice(["naive", "rational", "both"]), default="rational", show_default=True)
@common_options()
def count(method, **kw):
    """Compute |Solv(G)|."""
    cfg = _config(method=method, **kw)
    out = _guard(lambda: run_count(cfg))
    _emit(cfg, out, render_count(out))


@main.command()
@common_options()
def verify(**kw):
    """Compare the computed count with the closed form for the group's family."""
    cfg = _config(**kw)
    out = _guard(lambda: run_verify(cfg))
    rel = "==" if out["match"] else "!="
    _emit(cfg, out, f"{out['spec']}: computed {out['computed']} {rel} formula {out['formula']}  [{out['family']}]")
    if not out["match"]:
        sys.exit(EXIT_MISMATCH)


@main.command()
@common_options()
def tables(**kw):
    """Check the per-element solvabilizer table for PSL(2, q)."""
    cfg = _config(**kw)

    def work():
        G = build_group(cfg)
        return verify_table(G, table_q(cfg.spec), lattice_cap=cfg.lattice_cap, spec=str(cfg.spec))

    report = _guard(work)
    payload = {"schema": f"solvkit.tables/{SCHEMA_VERSION}", **report.to_json()}
    _emit(cfg, payload, report.render())
    if not report.passed:
        sys.exit(EXIT_MISMATCH)


@main.command()
@click.option("--family", type=click.Choice(["psl2-even", "psl2-3odd", "psl2-prime", "suzuki",
                                             "psl3-3", "psl2-7-special"]))
@click.option("--param", type=int, help="Exponent n, prime p, or Suzuki prime p.")
@click.option("--distinct", "bound", type=click.IntRange(min=60), help="Run the distinctness check up to this group order.")
@common_options(require_group=False)
def formula(family, param, bound, **kw):
    """Evaluate a closed form, or check distinctness over minimal simple groups."""
    cfg = _config(**kw)

    def work():
        if bound is not None:
            return minimal_simple_distinctness(bound)
        if cfg.spec is not None:
            return family_for_spec(cfg.spec)
        if family is None:
            raise Failure(EXIT_PARSE, "give --group, --family or --distinct")
        return FormulaFamily(family, param)

    res = _guard(work)
    if bound is not None:
        payload = {"schema": f"solvkit.distinct/{SCHEMA_VERSION}", **res.to_json()}
        lines = [f"{fam:<18}{label:<12}{order:>10}{value:>8}" for fam, label, order, value in res.entries]
        lines.append(f"{len(res.entries)} groups up to order {bound}: "
                     + ("no collisions" if res.ok else f"collisions {res.collisions}"))
        _emit(cfg, payload, "\n".join(lines))
        if not res.ok:
            sys.exit(EXIT_MISMATCH)
        return
    value = _guard(lambda: solv_formula(res))
    only = res.tag == "suzuki"
    payload = {"schema": f"solvkit.formula/{SCHEMA_VERSION}", "family": str(res), "group": res.label,
               "order": res.group_order, "value": value, "formula_only": only,
               "minimal_simple": res.minimal_simple}
    _emit(cfg, payload, f"{res.label}  |G| = {res.group_order}  |Solv| = {value}  [{res}]"
          + ("  formula-only" if only else ""))


@main.command()
@common_options()
def radical(**kw):
    """Order of the solvable radical R and the count for G and G/R."""
    cfg = _config(**kw)
    out = _guard(lambda: run_radical(cfg))
    _emit(cfg, out, f"{out['spec']}: |R| = {out['radical_order']}, |G/R| = {out['quotient_order']}, "
                    f"|Solv(G)| = {out['total']}, |Solv(G/R)| = {out['quotient_total']}")


@main.command()
@click.argument("spec_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--method", type=click.Choice(["naive", "rational", "both"]), default="rational", show_default=True)
@common_options(require_group=False)
def batch(spec_file, method, **kw):
    """Count every spec listed in SPEC_FILE (one per line, # comments)."""
    cfg = _config(method=method, **kw)
    rows, failures = [], []
    for lineno, raw in enumerate(spec_file.read_text().splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            spec = parse_spec(text)
            out = run_count(replace(cfg, spec=spec))
        except Exception as exc:  # collected per line
            failures.append({"line": lineno, "spec": text, "error": f"{type(exc).__name__}: {exc}"})
            continue
        lb = out["lower_bound"]
        rows.append({"spec": out["spec"], "order": out["order"], "total": out["total"],
                     "solvable": not lb["applicable"], "bound_ok": lb["holds"],
                     "conjecture_flag": lb["conjecture_flag"]})
    payload = {"schema": f"solvkit.batch/{SCHEMA_VERSION}", "results": rows, "failures": failures}
    lines = [f"{r['spec']:<24}{r['order']:>8}{r['total']:>8}  "
             + ("solvable" if r["solvable"] else (">= 32" if r["bound_ok"] else "BELOW 32"))
             + ("  (32: check for A5 factor)" if r["conjecture_flag"] else "") for r in rows]
    lines += [f"line {f['line']}: {f['spec']}: {f['error']}" for f in failures]
    _emit(cfg, payload, "\n".join(lines) if lines else "no specs")
    if failures:
        sys.exit(EXIT_MISMATCH)


if __name__ == "__main__":
    main()
