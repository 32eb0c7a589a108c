"""Command-line interface.

Exit codes: 0 success, 1 fixture mismatch (replay only), 2 usage or
validation error, 3 data error, 4 degenerate statistic under ``--strict``.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analytic import NormalSpec, noncentralities, spec_from_dict, subgroup_table, w_matrix
from .confidence import ci_psi, interval_p
from .effects import estimate_p, estimate_psi
from .fileio import (
    FORMATS, DataError, SchemaError, default_format, dumps_csv, dumps_json, dumps_table,
    envelope, load_json, read_long_csv, resolve_input,
)
from .ranking import ORDINARY, PSEUDO, rank_with
from .rank_tests import ANOVA, CONTRAST, HN_TREND, KRUSKAL_WALLIS, SIDES, TWO_SIDED, run_test
from .simulate import SimulationPlan, resolve_workers, run

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4

METHODS = {"kw": KRUSKAL_WALLIS, "hn": HN_TREND, "contrast": CONTRAST, "anova": ANOVA}


class UsageError(ValueError):
    pass


@dataclass
class Output:
    command: str
    payload: dict
    rows: list
    title: str = ""
    notes: list = field(default_factory=list)
    seed: object = None
    exit_code: int = EXIT_OK

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return dumps_json(envelope(self.command, self.payload, self.seed))
        if fmt == "csv":
            return dumps_csv(self.rows)
        return dumps_table(self.rows, self.title, self.notes)


# ---------------------------------------------------------------------------
# argument types
# ---------------------------------------------------------------------------


def _level(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.5 < v < 1.0:
        raise argparse.ArgumentTypeError(f"level must lie in (0.5, 1), got {text}")
    return v


def _vector(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _contrast(text: str):
    if text.strip().upper() in ("A", "B", "AB"):
        return text.strip().upper()
    vec = _vector(text)
    if len(vec) != 4:
        raise argparse.ArgumentTypeError("a 2x2 contrast needs four numbers or one of A, B, AB")
    return vec


def _workers(text: str):
    try:
        return resolve_workers(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"workers must be a positive integer or 'max', got {text!r}") from None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_ranks(args) -> Output:
    data = read_long_csv(args.file)
    kind = PSEUDO if args.pseudo else ORDINARY
    scores = rank_with(data, kind)
    obs = []
    for i, k, r in scores.entries():
        obs.append({"group": data.labels[i], "index": k, "value": float(data.groups[i].values[k]), "rank": r})
    payload = {
        "kind": kind, "labels": data.labels, "group_sizes": data.sizes.tolist(),
        "group_means": scores.group_means().tolist(), "observations": obs,
    }
    if args.format == "csv":
        rows = [["group", "index", "value", "rank"]] + [[o["group"], o["index"], o["value"], o["rank"]] for o in obs]
    else:
        rows = [["group", "n", "mean_rank"]] + [
            [lab, int(n), float(m)] for lab, n, m in zip(data.labels, data.sizes, payload["group_means"])]
    title = f"{'pseudo-ranks' if args.pseudo else 'mid-ranks'} (N = {data.N})"
    return Output("ranks", payload, rows, title)


def cmd_effects(args) -> Output:
    data = read_long_csv(args.file)
    kinds = {"weighted": ["weighted_p"], "unweighted": ["unweighted_psi"],
             "both": ["weighted_p", "unweighted_psi"]}[args.kind]
    payload = {"labels": data.labels, "group_sizes": data.sizes.tolist(), "N": data.N}
    header = ["group", "n"]
    columns = []
    notes = []
    method = "logit" if args.logit else "wald"
    for kind in kinds:
        est = estimate_p(data) if kind == "weighted_p" else estimate_psi(data)
        payload[kind] = est.values.tolist()
        header.append("p" if kind == "weighted_p" else "psi")
        columns.append(payload[kind])
        if args.level is not None:
            fn = interval_p if kind == "weighted_p" else ci_psi
            rep = fn(data, args.level, method)
            payload.setdefault("intervals", {})[rep.kind] = rep.to_dict()
            tag = header[-1]
            header += [f"{tag}_lower", f"{tag}_upper"]
            columns += [rep.lower, rep.upper]
            notes.append(rep.note)
    rows = [header] + [[lab, int(n)] + [col[i] for col in columns]
                       for i, (lab, n) in enumerate(zip(data.labels, data.sizes))]
    title = "relative effects" + (f", {args.level:g} intervals" if args.level is not None else "")
    return Output("effects", payload, rows, title, notes)


def cmd_test(args) -> Output:
    data = read_long_csv(args.file)
    method = METHODS[args.method]
    if method in (CONTRAST, ANOVA) and data.factor_labels is None:
        raise UsageError(f"--method {args.method} needs a 2x2 file with columns a,b,value")
    if method == HN_TREND and args.trend is not None and len(args.trend) != data.d:
        raise UsageError(f"--trend needs {data.d} numbers, got {len(args.trend)}")
    ranking = PSEUDO if args.pseudo else ORDINARY
    report = run_test(data, method, ranking, trend=args.trend, contrast=args.contrast, side=args.side)
    payload = report.to_dict()
    keys = ["method", "ranking", "statistic", "statistic_sq", "df", "df2", "p_value",
            "numerator", "side", "degenerate", "N"]
    rows = [["field", "value"]] + [[k, payload[k]] for k in keys if payload.get(k) is not None]
    if report.contrast_used is not None:
        rows.append(["contrast", ",".join(f"{c:g}" for c in report.contrast_used)])
    notes = ["degenerate data: all scores tied, statistic undefined"] if report.degenerate else []
    out = Output("test", payload, rows, f"{method} ({ranking})", notes)
    if report.degenerate and args.strict:
        out.exit_code = EXIT_DEGENERATE
    return out


def _num(x):
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def _show(v, exact):
    if v is None:
        return None
    if isinstance(v, Fraction) and exact:
        return str(v)
    return float(v)


def load_scenario(path: str) -> dict:
    obj = load_json(resolve_input(path, "scenarios"), "scenario")
    specs = [spec_from_dict(s) for s in obj["specs"]]
    d = len(specs)
    labels = obj.get("labels") or [str(i + 1) for i in range(d)]
    for key in ("labels", "trend", "contrast", "alloc"):
        if key in obj and len(obj[key]) != d:
            raise SchemaError(f"$.{key}: expected {d} entries (one per spec), got {len(obj[key])}")
    for name, alloc in obj.get("allocations", {}).items():
        if len(alloc) != d:
            raise SchemaError(f"$.allocations.{name}: expected {d} entries, got {len(alloc)}")
    for key in ["alloc"] + [f"allocations.{k}" for k in obj.get("allocations", {})]:
        vec = obj.get("alloc") if key == "alloc" else obj["allocations"][key.split(".", 1)[1]]
        if vec is not None and any(_num(v) <= 0 for v in vec):
            raise SchemaError(f"$.{key}: allocation entries must be positive")
    return {"raw": obj, "specs": specs, "labels": labels}


def cmd_analytic(args) -> Output:
    mode = "table1" if args.table1 else "subgroup" if args.subgroup else "raw"
    default = {"table1": "bundled:dice", "subgroup": "bundled:subgroup"}.get(mode)
    source = args.scenario or default
    if source is None:
        raise UsageError("a scenario file is required unless --table1 or --subgroup is given")
    sc = load_scenario(source)
    raw, specs, labels = sc["raw"], sc["specs"], sc["labels"]
    exact = args.exact
    if mode == "table1":
        allocs = raw.get("allocations")
        if not allocs:
            raise SchemaError("$.allocations: --table1 needs named allocations")
        trend = raw.get("trend")
        W = w_matrix(specs)
        out_rows = []
        rows = [["setting", "alloc"] + [f"p_{lab}" for lab in labels] + ["c_p", "c_psi"] + (["c_hn"] if trend else [])]
        for name, alloc in allocs.items():
            rep = noncentralities(specs, [_num(a) for a in alloc], trend=trend)
            row = {"setting": name, "alloc": [_show(_num(a), exact) for a in alloc],
                   **rep.to_dict(exact=exact)}
            out_rows.append(row)
            shown = list(rep.p) + [rep.c_p, rep.c_psi] + ([rep.c_hn] if trend else [])
            rows.append([name, " ".join(str(a) for a in alloc)] + [_show(v, exact) for v in shown])
        payload = {"mode": mode, "labels": labels, "w": [[_show(v, exact) for v in r] for r in W],
                   "rows": out_rows}
        return Output("analytic", payload, rows, "effects and non-centralities by allocation")
    if mode == "subgroup":
        sub = raw.get("subgroup")
        if sub is None:
            raise SchemaError("$.subgroup: --subgroup needs a 'subgroup' section")
        if len(specs) != 4:
            raise SchemaError("$.specs: the sub-group table needs four cells")
        contrast = [_num(c) for c in sub.get("contrast", [1, -1, -1, 1])]
        table = subgroup_table(specs, tuple(sub["fixed"]), sub["growing"], contrast)
        notes = [] if all(isinstance(s, NormalSpec) for s in specs) else [
            "c_mu omitted: not all distributions are normal"]
        payload = {"mode": mode, "labels": labels, "rows": [r.to_dict() for r in table], "notes": notes}
        rows = [["n11", "n12", "n21", "n22", "N", "c_mu", "c_psi", "c_p", "sqrtN_c_p"]] + [
            [r.n11, r.n12, r.n21, r.n22, r.N, r.c_mu, r.c_psi, r.c_p, r.sqrtN_c_p] for r in table]
        return Output("analytic", payload, rows, "interaction non-centralities as one stratum grows", notes)
    if "alloc" not in raw:
        raise SchemaError("$.alloc: raw mode needs an allocation")
    alloc = [_num(a) for a in raw["alloc"]]
    N = raw.get("N")
    if N is None and all(isinstance(a, Fraction) and a.denominator == 1 for a in alloc):
        N = int(sum(alloc))
    rep = noncentralities(specs, alloc, trend=raw.get("trend"), contrast=raw.get("contrast"), N=N)
    payload = {"mode": mode, "labels": labels, "alloc": [_show(a, exact) for a in alloc],
               **rep.to_dict(exact=exact)}
    rows = [["group", "p", "psi"]] + [[lab, _show(p, exact), _show(q, exact)]
                                      for lab, p, q in zip(labels, rep.p, rep.psi)]
    scalars = [("c_p", rep.c_p), ("c_psi", rep.c_psi), ("c_hn", rep.c_hn), ("c_hn_psi", rep.c_hn_psi),
               ("c_contrast_p", rep.c_contrast_p), ("c_contrast_psi", rep.c_contrast_psi),
               ("c_contrast_mu", rep.c_contrast_mu), ("sqrtN_scaled", rep.sqrtN_scaled)]
    if args.format == "csv":
        rows = [["quantity", "group", "value"]]
        rows += [["p", lab, _show(v, exact)] for lab, v in zip(labels, rep.p)]
        rows += [["psi", lab, _show(v, exact)] for lab, v in zip(labels, rep.psi)]
        rows += [[k, "", _show(v, exact)] for k, v in scalars if v is not None]
        return Output("analytic", payload, rows, notes=rep.notes)
    notes = [f"{k} = {v}" if isinstance(v, str) else f"{k} = {v:.6g}"
             for k, v in ((k, _show(v, exact)) for k, v in scalars if v is not None)] + rep.notes
    return Output("analytic", payload, rows, "population effects", notes)


def cmd_simulate(args) -> Output:
    obj = load_json(resolve_input(args.plan, "plans"), "plan")
    runs = obj["runs"] if "runs" in obj else [obj]
    overrides = {}
    if args.reps is not None:
        overrides["reps"] = args.reps
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.keep_replications:
        overrides["keep_replications"] = True
    results = []
    for i, spec in enumerate(runs):
        try:
            plan = SimulationPlan.from_dict({**spec, **overrides})
        except (ValueError, TypeError) as exc:
            path = f"$.runs[{i}]" if "runs" in obj else "$"
            raise SchemaError(f"{path}: {exc}") from None
        results.append(run(plan, workers=args.workers))
    seeds = sorted({r.seed for r in results})
    payload = {"name": obj.get("name", ""), "results": [r.to_dict() for r in results]}
    rows = [["name", "method", "ranking", "metric", "value", "mc_se", "reps", "n_degenerate", "seed"]]
    for r in results:
        rows.append([r.plan["name"], r.plan["method"], r.plan["ranking"], r.metric,
                     ",".join(f"{v:.4f}" for v in r.value) if isinstance(r.value, list) else r.value,
                     ",".join(f"{v:.4f}" for v in r.mc_se) if isinstance(r.mc_se, list) else r.mc_se,
                     r.reps, r.n_degenerate, r.seed])
    return Output("simulate", payload, rows, f"simulation {payload['name']}".rstrip(),
                  seed=seeds[0] if len(seeds) == 1 else seeds)


def cmd_replay(args) -> Output:
    from .fixtures import replay_all

    try:
        report = replay_all(args.manifest)
    except FileNotFoundError as exc:
        raise DataError(str(exc)) from None
    rows = [["fixture", "status", "detail"]] + [
        [f["name"], "pass" if f["passed"] else "FAIL", "; ".join(f["failures"])] for f in report]
    out = Output("replay", {"fixtures": report}, rows, "golden fixture replay")
    if not all(f["passed"] for f in report):
        out.exit_code = EXIT_MISMATCH
    return out


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudorank",
        description="Rank and pseudo-rank effects, tests, non-centralities and simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default=None,
                        help="output format (default: $PSEUDORANK_FORMAT or text)")
    common.add_argument("-o", "--output", help="write output to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ranks", parents=[common], help="mid-ranks or pseudo-ranks of a data file")
    p.add_argument("file")
    p.add_argument("--pseudo", action="store_true", help="pseudo-ranks instead of mid-ranks")
    p.set_defaults(func=cmd_ranks)

    p = sub.add_parser("effects", parents=[common], help="relative effects with optional intervals")
    p.add_argument("file")
    p.add_argument("--kind", choices=("weighted", "unweighted", "both"), default="both")
    p.add_argument("--level", type=_level, default=None, help="interval level in (0.5, 1)")
    p.add_argument("--logit", action="store_true", help="logit-transformed interval limits")
    p.set_defaults(func=cmd_effects)

    p = sub.add_parser("test", parents=[common], help="Kruskal-Wallis, trend, contrast or ANOVA test")
    p.add_argument("file")
    p.add_argument("--method", choices=tuple(METHODS), required=True)
    p.add_argument("--pseudo", action="store_true", help="use pseudo-ranks")
    p.add_argument("--trend", type=_vector, default=None, help="trend scores, e.g. 1,2,3")
    p.add_argument("--contrast", type=_contrast, default="AB", help="A, B, AB or four numbers")
    p.add_argument("--side", choices=SIDES, default=TWO_SIDED)
    p.add_argument("--strict", action="store_true", help="exit 4 on a degenerate statistic")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("analytic", parents=[common], help="population effects and non-centralities")
    p.add_argument("scenario", nargs="?", help="scenario JSON file or bundled:NAME")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--table1", action="store_true", help="effects across the named allocations")
    mode.add_argument("--subgroup", action="store_true", help="interaction non-centralities as a stratum grows")
    p.add_argument("--exact", action="store_true", help="print exact rationals where available")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("simulate", parents=[common], help="run a seeded simulation plan")
    p.add_argument("plan", help="plan JSON file or bundled:NAME")
    p.add_argument("--workers", type=_workers, default=1, help="process count or 'max'")
    p.add_argument("--reps", type=int, default=None, help="override the replication count")
    p.add_argument("--seed", type=int, default=None, help="override the seed")
    p.add_argument("--keep-replications", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", parents=[common], help="replay the golden fixtures")
    p.add_argument("--manifest", default=None, help="fixture manifest (default: bundled)")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = default_format()
    try:
        out = args.func(args)
    except (UsageError, SchemaError) as exc:
        print(f"pseudorank {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ValueError) as exc:
        print(f"pseudorank {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    text = out.render(args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
    else:
        stdout.write(text)
    for note in out.notes if args.format == "csv" else []:
        if note:
            print(f"note: {note}", file=sys.stderr)
    return out.exit_code
