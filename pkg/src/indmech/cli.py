"""Command line front end.

All outputs are deterministic: CSV files carry no timestamps, floats are
rendered with their shortest round-trip representation, and rerunning a
command with the same inputs reproduces every byte.

Exit codes: 0 on success, 1 for file, schema, or usage problems, 2 for
failed audits under --strict and for empty estimation strata, 3 when
calibration cannot reach its targets.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import sys
from pathlib import Path

from .audit import (
    AuditReport,
    CSE_GATE,
    SACE_GATE,
    STANDARDIZED_GATE,
    classify_response_types,
    run_all_audits,
)
from .errors import (
    CalibrationError,
    EmptyStratumError,
    Error,
    InvalidModelError,
    PositivityError,
    ScenarioError,
    TruncatedOutcomeError,
)
from .estimands import EstimandReport, estimand_report
from .identify import prop1_functional, prop3_functional, plug_in
from .sampling import dataset_from_csv, dataset_to_csv, sample_dataset
from .scenario import dump_scenario, load_scenario
from .worlds import observed_law
from .zoo import FIXTURE_NAMES, CalibrationTargets, build_fixture

VERSION = "0.1.0"

NO_CAUSAL = "no causal interpretation"


class _UsageError(Error):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _witness_text(witness) -> str:
    if not witness:
        return ""
    return ",".join(f"{k}={'undef' if v is None else v}" for k, v in witness.items())


def _audit_rows(audits: AuditReport):
    rows = []
    for c in audits.checks:
        detail = c.detail
        if c.warnings:
            detail = (detail + "; " if detail else "") + "; ".join(c.warnings)
        rows.append((c.name, c.status, _fmt(c.residual), _witness_text(c.witness), detail))
    return rows


def _truth_rows(rep: EstimandReport):
    rows = []
    for quantity, value in rep.as_dict().items():
        if isinstance(value, float):
            note = rep.sace_note if quantity == "sace" else ""
            rows.append((quantity, _fmt(value), note))
        else:
            rows.append((quantity, "", value))
    return rows


def _identify_rows(audits: AuditReport, law, rep: EstimandReport):
    rows = []

    def gate_detail(gate) -> str:
        missing = [n for n in gate if audits.check(n).status != "pass"]
        return "audits not passed: " + ", ".join(missing) if missing else ""

    try:
        r1 = prop1_functional(law)
        granted = []
        if audits.all_pass(CSE_GATE):
            granted += ["CSE(0)", "CSE(1)"]
        if audits.all_pass(SACE_GATE):
            granted += ["SACE"]
        interp = "; ".join(granted) if granted else NO_CAUSAL
        rows.append(("prop1", _fmt(r1.value), interp, gate_detail(SACE_GATE)))
    except PositivityError as exc:
        rows.append(("prop1", "", "not computed", str(exc)))

    if "L" in law.columns:
        for a_prime in (0, 1):
            try:
                r3 = prop3_functional(law, a_prime)
                if audits.all_pass(STANDARDIZED_GATE):
                    interp = f"CSE({a_prime})"
                else:
                    interp = NO_CAUSAL
                rows.append(
                    (f"prop3({a_prime})", _fmt(r3.value), interp,
                     gate_detail(STANDARDIZED_GATE))
                )
            except PositivityError as exc:
                rows.append((f"prop3({a_prime})", "", "not computed", str(exc)))

    for label, value in (
        ("naive_d0", rep.naive_d0),
        ("naive_d1", rep.naive_d1),
        ("marginal", rep.naive_marginal),
    ):
        if isinstance(value, float):
            rows.append((label, _fmt(value), "descriptive only", ""))
        else:
            rows.append((label, "", "descriptive only", value))
    return rows


def _estimate_rows(model, n: int, seed: int):
    dataset = sample_dataset(model, n, seed)
    functionals = [("prop1", 0)]
    if "L" in dataset.columns:
        functionals += [("prop3", 0), ("prop3", 1)]
    rows = []
    for name, a_prime in functionals:
        try:
            est = plug_in(dataset, name, a_prime=a_prime)
        except EmptyStratumError as exc:
            rows.append((name if name == "prop1" else f"prop3({a_prime})",
                         "", "", str(n), str(exc)))
            continue
        strata = ";".join(f"{k}:{v}" for k, v in est.strata_n.items())
        rows.append(
            (est.functional, _fmt(est.point), _fmt(est.standard_error),
             str(est.n), strata)
        )
    return dataset, rows


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def _load_model(path_text: str):
    path = Path(path_text)
    if not path.exists():
        raise ScenarioError(f"no such scenario file: {path}")
    return load_scenario(path), hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_check(args) -> int:
    model, digest = _load_model(args.scenario)
    audits = run_all_audits(model, tol=args.tolerance)
    print(f"scenario sha256={digest}")
    for c in audits.checks:
        line = f"{c.name:26s} {c.status:13s} residual={_fmt(c.residual)}"
        if c.witness:
            line += f"  witness: {_witness_text(c.witness)}"
        print(line)
        if c.detail:
            print(f"{'':26s} {c.detail}")
        for w in c.warnings:
            print(f"{'':26s} warning: {w}")
    if args.out:
        path = _write(
            Path(args.out), "audit.csv",
            _csv_text(("check", "status", "residual", "witness", "detail"),
                      _audit_rows(audits)),
        )
        print(f"wrote {path}")
    if args.strict and audits.failed():
        print(f"failed audits: {', '.join(audits.failed())}", file=sys.stderr)
        return 2
    return 0


def cmd_truth(args) -> int:
    model, _ = _load_model(args.scenario)
    rep = estimand_report(model)
    for quantity, value, note in _truth_rows(rep):
        suffix = f"  ({note})" if note else ""
        shown = value if value != "" else "-"
        print(f"{quantity:16s} {shown}{suffix}")
    print("enumerated interventions: " + "; ".join(rep.provenance))
    if args.out:
        path = _write(
            Path(args.out), "truth.csv",
            _csv_text(("quantity", "value", "note"), _truth_rows(rep)),
        )
        print(f"wrote {path}")
    return 0


def cmd_identify(args) -> int:
    model, _ = _load_model(args.scenario)
    audits = run_all_audits(model, tol=args.tolerance)
    law = observed_law(model)
    rep = estimand_report(model)
    rows = _identify_rows(audits, law, rep)
    for name, value, interp, detail in rows:
        shown = value if value != "" else "-"
        line = f"{name:12s} {shown:22s} {interp}"
        if detail:
            line += f"  [{detail}]"
        print(line)
    if args.out:
        path = _write(
            Path(args.out), "identify.csv",
            _csv_text(("functional", "value", "interpretation", "detail"), rows),
        )
        print(f"wrote {path}")
    if args.strict and audits.failed():
        print(f"failed audits: {', '.join(audits.failed())}", file=sys.stderr)
        return 2
    return 0


def cmd_sample(args) -> int:
    model, _ = _load_model(args.scenario)
    if args.n is None:
        raise _UsageError("sample requires --n")
    dataset = sample_dataset(model, args.n, args.seed)
    path = _write(Path(args.out or "."), "sample.csv", dataset_to_csv(dataset))
    print(f"wrote {path} ({dataset.n} rows, seed {args.seed})")
    return 0


def cmd_estimate(args) -> int:
    path = Path(args.data)
    if not path.exists():
        raise ScenarioError(f"no such data file: {path}")
    text = path.read_text()
    if args.strata_column != "L":
        head, _, rest = text.partition("\n")
        fields = head.split(",")
        if args.strata_column not in fields:
            raise ScenarioError(
                f"no column {args.strata_column!r} in the data header"
            )
        fields = ["L" if f == args.strata_column else f for f in fields]
        text = ",".join(fields) + "\n" + rest
    dataset, rejected = dataset_from_csv(text)
    for lineno, reason in rejected:
        print(f"rejected line {lineno}: {reason}", file=sys.stderr)
    if rejected:
        print(f"rejected {len(rejected)} rows, kept {dataset.n}", file=sys.stderr)
    est = plug_in(dataset, args.functional, a_prime=args.a_prime)
    print(f"functional      {est.functional}")
    print(f"point           {_fmt(est.point)}")
    print(f"standard_error  {_fmt(est.standard_error)}")
    print(f"n               {est.n}")
    for label, count in est.strata_n.items():
        print(f"stratum {label:16s} n={count}")
    return 0


def cmd_report(args) -> int:
    model, digest = _load_model(args.scenario)
    out_dir = Path(args.out or ".")
    audits = run_all_audits(model, tol=args.tolerance)
    law = observed_law(model)
    rep = estimand_report(model)
    id_rows = _identify_rows(audits, law, rep)

    files = [
        _write(out_dir, "audit.csv",
               _csv_text(("check", "status", "residual", "witness", "detail"),
                         _audit_rows(audits))),
        _write(out_dir, "truth.csv",
               _csv_text(("quantity", "value", "note"), _truth_rows(rep))),
        _write(out_dir, "identify.csv",
               _csv_text(("functional", "value", "interpretation", "detail"),
                         id_rows)),
    ]
    if args.n is not None:
        dataset, est_rows = _estimate_rows(model, args.n, args.seed)
        files.append(_write(out_dir, "sample.csv", dataset_to_csv(dataset)))
        files.append(
            _write(out_dir, "estimates.csv",
                   _csv_text(("functional", "point", "standard_error", "n", "strata"),
                             est_rows))
        )

    lines = [
        f"scenario: {Path(args.scenario).name} sha256={digest}",
        f"tool: indmech {VERSION}",
        f"seed: {args.seed}  n: {args.n if args.n is not None else '-'}",
        f"tolerance: {_fmt(args.tolerance)}",
        "",
        "audits:",
    ]
    for c in audits.checks:
        entry = f"  {c.name}: {c.status} (residual {_fmt(c.residual)})"
        if c.status != "pass" and c.detail:
            entry += f" {c.detail}"
        lines.append(entry)
    lines.append("")
    lines.append("estimands (ground truth):")
    for quantity, value, note in _truth_rows(rep):
        shown = value if value != "" else note
        lines.append(f"  {quantity}: {shown}")
    lines.append("")
    lines.append("identification:")
    for name, value, interp, detail in id_rows:
        shown = value if value != "" else "-"
        entry = f"  {name} = {shown}: {interp}"
        if detail:
            entry += f" [{detail}]"
        lines.append(entry)
    summary = "\n".join(lines) + "\n"
    files.append(_write(out_dir, "summary.txt", summary))
    print(summary, end="")
    print("wrote " + ", ".join(str(f) for f in files))
    if args.strict and audits.failed():
        print(f"failed audits: {', '.join(audits.failed())}", file=sys.stderr)
        return 2
    return 0


def cmd_response_types(args) -> int:
    model, _ = _load_model(args.scenario)
    rt = classify_response_types(model)
    for kind in ("complier", "never-taker", "defier", "always-taker"):
        print(f"{kind:14s} {_fmt(rt.proportions[kind])}")
    print()
    print(rt.table.dump())
    if args.out:
        rows = [
            (kind, _fmt(rt.proportions[kind]))
            for kind in ("complier", "never-taker", "defier", "always-taker")
        ]
        path = _write(Path(args.out), "response_types.csv",
                      _csv_text(("type", "proportion"), rows))
        print(f"wrote {path}")
    return 0


def cmd_export_scenario(args) -> int:
    wanted = args.fixture.lower()
    canonical = {n.lower(): n for n in FIXTURE_NAMES}
    if wanted not in canonical:
        raise _UsageError(
            f"unknown fixture {args.fixture!r}; choose one of "
            + ", ".join(FIXTURE_NAMES)
        )
    name = canonical[wanted]
    model = build_fixture(name)
    if name == "adherence":
        text = dump_scenario(model, name=name, calibration=CalibrationTargets())
    else:
        text = dump_scenario(model, name=name)
    path = _write(Path(args.out or "."), f"{name}.json", text)
    print(f"wrote {path}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="indmech",
        description="Exact counterfactual analysis of truncation-by-death problems",
    )
    parser.add_argument("--version", action="version", version=f"indmech {VERSION}")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    common.add_argument("--n", type=int, default=None, help="number of rows to sample")
    common.add_argument("--out", default=None, help="directory for output files")
    common.add_argument("--strict", action="store_true",
                        help="exit nonzero when any audit fails")
    common.add_argument("--tolerance", type=float, default=1e-9,
                        help="audit tolerance (default 1e-9)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run all assumption audits")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("truth", parents=[common],
                       help="exact estimands by counterfactual enumeration")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_truth)

    p = sub.add_parser("identify", parents=[common],
                       help="identification functionals with audit-gated readings")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("sample", parents=[common], help="draw a seeded dataset as CSV")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", parents=[common],
                       help="plug-in estimation from an observed CSV")
    p.add_argument("data")
    p.add_argument("--functional", choices=("prop1", "prop3"), default="prop1")
    p.add_argument("--a-prime", type=int, choices=(0, 1), default=0,
                   dest="a_prime", help="weighting arm for prop3")
    p.add_argument("--strata-column", default="L",
                   help="name of the covariate column (default L)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("report", parents=[common],
                       help="full bundle: audits, truth, identification, estimates")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("response-types", parents=[common],
                       help="product-use response type proportions")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_response_types)

    p = sub.add_parser("export-scenario", parents=[common],
                       help="write a built-in fixture as a scenario file")
    p.add_argument("fixture", help=", ".join(FIXTURE_NAMES))
    p.set_defaults(func=cmd_export_scenario)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (_UsageError, ScenarioError, InvalidModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CalibrationError as exc:
        print(f"calibration error: {exc}", file=sys.stderr)
        return 3
    except (PositivityError, EmptyStratumError, TruncatedOutcomeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
