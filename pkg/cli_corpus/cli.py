"""
Command-line front end for the SOS Lyapunov toolkit

Exit codes: 0 success, 1 expectation mismatch or rejected certificate,
2 usage or input error, 3 solver indeterminate.
"""
import argparse
import json
import sys
import uuid
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from dotenv import load_dotenv
from pydantic import BaseModel

from certifier import CertificateVerifier
from lyapunov_synth import (
    CertificateModel, LyapunovSynthesizer, PowerCertificateSearch, SearchMode, SweepResult,
    certificate_from_model, certificate_to_model,
)
from poly_core import (
    LinearSystem, SwitchedSystem, SystemDescription, TimeDomain, VectorField, format_monomial, parse_polynomial,
)
from sdp_solver import SolveStatus
from sos_compiler import (
    BasisReduction, SdpProblem, build_sos_constraint, compile_program, count_savings, savings_table, to_sdpa,
)
from .console import make_console_callback
from .corpus import CorpusRunner
from .models import DegreeRow, KRow, PowerReport, SavingsReport, SosCheckReport, SweepReport

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_INDETERMINATE = 3


# ---- argument parsing ---------------------------------------------------------


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Config JSON (overrides SOS_LYAPUNOV_CONFIG)")
    common.add_argument("--json", metavar="PATH", help="Write a JSON report to PATH ('-' for stdout)")
    common.add_argument("--eps", type=float, help="EpsilonPD shift")
    common.add_argument("--jobs", type=int, help="Concurrent solves")
    common.add_argument("--verbose", action="store_true", help="Also log compile and solver events")
    common.add_argument("--quiet", action="store_true", help="No progress log")
    return common


def _system_options(parser: argparse.ArgumentParser, matrices: bool = False):
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--field", nargs="+", metavar="COMPONENT", help="Vector field components f1 ... fn; quote a leading minus with a space, e.g. ' -x1'")
    source.add_argument("--system", metavar="FILE", help="System description JSON")
    if matrices:
        source.add_argument("--matrix", action="append", metavar="JSON",
                            help="Mode matrix as nested JSON lists; repeat per mode")
    parser.add_argument("--time", choices=[t.value for t in TimeDomain], default=None,
                        help="ct or dt (default: the system file, else ct)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="sos-lyapunov", description="SOS Lyapunov certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-sos", parents=[common], help="Decide whether a polynomial is sos")
    p.add_argument("polynomial")
    p.add_argument("--homogeneous", action="store_true", help="Homogeneous Gram basis")
    p.add_argument("--strict", action="store_true", help="Require p - eps*|x|^deg sos")
    p.add_argument("--reduction", choices=[r.value for r in BasisReduction])
    p.add_argument("--solver", choices=["embedded", "export-only"], default="embedded")
    p.add_argument("--out", help="SDPA output file for --solver export-only")

    for name, help_text in (("find-lyapunov", "Degree sweep for a Lyapunov function"),
                            ("common-lyapunov", "Common Lyapunov function of a switched system")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        _system_options(p, matrices=name == "common-lyapunov")
        p.add_argument("--degree", type=int, help="Single degree instead of a sweep")
        p.add_argument("--degree-min", type=int, default=2)
        p.add_argument("--degree-max", type=int)
        p.add_argument("--mode", choices=[m.value for m in SearchMode], default=SearchMode.V_SOS.value)
        p.add_argument("--decrease-only", action="store_true", help="Drop the sos condition on V")
        p.add_argument("--solver", choices=["embedded", "export-only"], default="embedded")
        p.add_argument("--out", help="SDPA output file for --solver export-only")

    for name, help_text in (("power-cert", "W = V^(2k+2) for homogeneous fields"),
                            ("planar-power-cert", "W = (V+1)^(2k+2) for planar fields")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--V", dest="V", required=True, help="Base Lyapunov function")
        _system_options(p, matrices=name == "power-cert")
        p.add_argument("--k-max", type=int)
        p.add_argument("--assume-pd", action="store_true", help="Skip the positivity sample checks")

    p = sub.add_parser("savings", parents=[common], help="Size savings of the top-component relaxation")
    p.add_argument("--n", type=int, default=2, help="Number of variables")
    p.add_argument("--d", type=int, default=4, help="Half degree")
    p.add_argument("--table", action="store_true")
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--d-max", type=int, default=5)

    p = sub.add_parser("export-sdpa", parents=[common], help="Write the SDP of a check or search in SDPA format")
    p.add_argument("polynomial", nargs="?", help="Export the sos check of this polynomial")
    p.add_argument("--field", nargs="+", metavar="COMPONENT")
    p.add_argument("--system", metavar="FILE")
    p.add_argument("--time", choices=[t.value for t in TimeDomain], default=None,
                   help="ct or dt (default: the system file, else ct)")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--mode", choices=[m.value for m in SearchMode], default=SearchMode.V_SOS.value)
    p.add_argument("--homogeneous", action="store_true")
    p.add_argument("--out", help="Output file (stdout when omitted)")

    p = sub.add_parser("verify", parents=[common], help="Re-check a certificate JSON")
    p.add_argument("certificate", help="Certificate JSON, or a report containing one")

    p = sub.add_parser("corpus", parents=[common], help="Example corpus")
    corpus_sub = p.add_subparsers(dest="corpus_command", required=True)
    run = corpus_sub.add_parser("run", parents=[common], help="Run entries and diff against expectations")
    run.add_argument("--filter", help="Comma-separated entry names or globs")
    run.add_argument("--skip-slow", action="store_true")
    run.add_argument("--corpus-file")
    listing = corpus_sub.add_parser("list", parents=[common], help="List entries")
    listing.add_argument("--corpus-file")
    return parser


# ---- helpers ------------------------------------------------------------------


def _emit_json(model: BaseModel, path: Optional[str]):
    if not path:
        return
    text = model.model_dump_json(indent=2)
    if path == "-":
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _show(args, text: str):
    """Human-readable output, suppressed when the JSON report goes to stdout."""
    if args.json != "-":
        print(text)


def _load_system(args) -> SwitchedSystem:
    if getattr(args, "system", None):
        system = SystemDescription.model_validate_json(Path(args.system).read_text()).to_system()
        return SwitchedSystem(system.modes, TimeDomain(args.time)) if args.time else system
    time_domain = TimeDomain(args.time or TimeDomain.CT.value)
    if getattr(args, "matrix", None):
        modes = [LinearSystem(np.array(json.loads(text), dtype=float)) for text in args.matrix]
        return SwitchedSystem(tuple(modes), time_domain)
    if getattr(args, "field", None):
        return SwitchedSystem((VectorField.from_strings(args.field),), time_domain)
    raise ValueError("no system given: use --field, --system or --matrix")


def _synthesizer(args, callback, run_id) -> LyapunovSynthesizer:
    synthesizer = LyapunovSynthesizer(args.config)
    updates = {}
    if args.eps is not None:
        updates["epsilon"] = args.eps
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if getattr(args, "k_max", None) is not None:
        updates["k_max"] = args.k_max
    if getattr(args, "degree_max", None) is not None:
        updates["degree_max"] = args.degree_max
    if updates:
        synthesizer.settings = synthesizer.settings.model_copy(update=updates)
    synthesizer.log_callback = callback
    synthesizer.run_id = run_id
    return synthesizer


def _write_sdpa(args, problem: SdpProblem) -> int:
    text = to_sdpa(problem)
    if args.out:
        Path(args.out).write_text(text)
        _show(args, f"SDPA written to {args.out}: {problem.n_constraints} equalities, blocks {problem.blocks}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _gram_frame(basis, gram) -> pd.DataFrame:
    labels = [format_monomial(m) for m in basis]
    return pd.DataFrame(np.round(np.asarray(gram, dtype=float), 6), index=labels, columns=labels)


# ---- subcommands --------------------------------------------------------------


def cmd_check_sos(args, callback, run_id) -> int:
    synthesizer = _synthesizer(args, callback, run_id)
    p = parse_polynomial(args.polynomial)
    reduction = BasisReduction(args.reduction or synthesizer.settings.basis_reduction)
    if args.solver == "export-only":
        constraint = build_sos_constraint("p", p, True if args.homogeneous else None, reduction,
                                          epsilon=synthesizer.settings.epsilon if args.strict else None)
        return _write_sdpa(args, compile_program([constraint]))

    result = synthesizer.check_sos(p, homogeneous=True if args.homogeneous else None,
                                   strict=args.strict, reduction=reduction)
    report = SosCheckReport(polynomial=p.to_text(), status=result.status, note=result.note,
                            strict=bool(result.solution and result.solution.strict), margin=result.margin)
    _show(args, f"{result.status.value.upper()}  {p.to_text()}")
    if result.note:
        _show(args, f"  {result.note}")
    if result.certificate is not None:
        report.basis = [format_monomial(m) for m in result.certificate.basis]
        report.gram = result.certificate.gram.tolist()
        _show(args, f"margin {result.margin}")
        if result.certificate.basis:
            _show(args, _gram_frame(result.certificate.basis, result.certificate.gram).to_string())
    _emit_json(report, args.json)
    return EXIT_INDETERMINATE if result.status == SolveStatus.INDETERMINATE else EXIT_OK


def _sweep_report(sweep: SweepResult) -> SweepReport:
    certificate = sweep.certificate
    return SweepReport(
        mode=sweep.mode,
        outcomes=[DegreeRow(degree=o.degree, status=o.status, margin=o.margin, seconds=o.seconds, note=o.note)
                  for o in sweep.outcomes],
        minimal_degree=sweep.minimal_degree,
        certificate=certificate_to_model(certificate) if certificate else None,
        errors=sweep.errors,
    )


def cmd_lyapunov(args, callback, run_id) -> int:
    synthesizer = _synthesizer(args, callback, run_id)
    system = _load_system(args)
    require_sos = not args.decrease_only
    if args.solver == "export-only":
        degree = args.degree or synthesizer.settings.degree_max
        problem = synthesizer.compile_search(system, degree, args.mode, require_sos)[-1]
        return _write_sdpa(args, problem)

    if args.degree:
        degree_min = degree_max = args.degree
    else:
        degree_min, degree_max = args.degree_min, synthesizer.settings.degree_max
    sweep = synthesizer.sweep_degrees(system, degree_max, args.mode, degree_min, require_sos=require_sos)
    report = _sweep_report(sweep)

    frame = sweep.to_frame()
    _show(args, frame.to_string(index=False) if not frame.empty else "no degrees searched")
    certificate = sweep.certificate
    if certificate is not None:
        _show(args, f"\nminimal degree {sweep.minimal_degree}: V = {certificate.V.to_text()}")
        for label, margin in certificate.margins.items():
            _show(args, f"  Gram margin {label}: {margin:.3g}")
    for error in sweep.errors:
        _show(args, f"error: {error}")
    _emit_json(report, args.json)
    if certificate is None and any(o.status == SolveStatus.INDETERMINATE for o in sweep.outcomes):
        return EXIT_INDETERMINATE
    return EXIT_OK


def cmd_power(args, callback, run_id) -> int:
    synthesizer = _synthesizer(args, callback, run_id)
    search = PowerCertificateSearch(args.config, synthesizer)
    search.log_callback = callback
    search.run_id = run_id
    system = _load_system(args)
    planar = args.command == "planar-power-cert"
    V = parse_polynomial(args.V, system.n_vars)
    if planar:
        certificate, outcomes = search.search_planar_power_certificate(
            V, system.vector_fields()[0], args.k_max, args.assume_pd)
    else:
        certificate, outcomes = search.search_power_certificate(V, system, args.k_max, args.assume_pd)

    report = PowerReport(
        planar=planar, k=certificate.k if certificate else None,
        outcomes=[KRow(mode=o.mode_index + 1, k=o.k, status=o.status, margin=o.margin, note=o.note)
                  for o in outcomes],
        certificate=certificate_to_model(certificate) if certificate else None,
    )
    frame = pd.DataFrame([row.model_dump() for row in report.outcomes])
    _show(args, frame.to_string(index=False) if not frame.empty else "no k searched")
    if certificate is None:
        _show(args, "no certificate up to k_max (inconclusive)")
        _emit_json(report, args.json)
        return EXIT_INDETERMINATE

    _show(args, f"\nk = {certificate.k}, mode orders {certificate.mode_orders}")
    _show(args, f"W = ({certificate.base.to_text()})^{2 * certificate.k + 2}")
    for label, margin in certificate.margins.items():
        _show(args, f"  Gram margin {label}: {margin:.3g}")
    _emit_json(report, args.json)
    return EXIT_OK


def cmd_savings(args, callback, run_id) -> int:
    if args.table:
        table = savings_table(args.n_max, args.d_max)
        _show(args, table.to_string(index=False))
        vars_saved, eqs_saved = count_savings(args.n, args.d)
        report = SavingsReport(n=args.n, d=args.d, vars_saved=vars_saved, eqs_saved=eqs_saved,
                               table=table.to_dict(orient="records"))
        _emit_json(report, args.json)
        return EXIT_OK if bool(table["match"].all()) else EXIT_MISMATCH
    vars_saved, eqs_saved = count_savings(args.n, args.d)
    _show(args, f"vars_saved={vars_saved} eqs_saved={eqs_saved}")
    _emit_json(SavingsReport(n=args.n, d=args.d, vars_saved=vars_saved, eqs_saved=eqs_saved), args.json)
    return EXIT_OK


def cmd_export_sdpa(args, callback, run_id) -> int:
    if args.polynomial:
        constraint = build_sos_constraint("p", parse_polynomial(args.polynomial),
                                          True if args.homogeneous else None)
        return _write_sdpa(args, compile_program([constraint]))
    if not (args.field or args.system):
        raise ValueError("export-sdpa needs a polynomial, --field or --system")
    synthesizer = _synthesizer(args, callback, run_id)
    problem = synthesizer.compile_search(_load_system(args), args.degree, args.mode)[-1]
    return _write_sdpa(args, problem)


def cmd_verify(args, callback, run_id) -> int:
    data = json.loads(Path(args.certificate).read_text())
    if isinstance(data, dict) and "certificate" in data:
        data = data["certificate"]
    if data is None:
        raise ValueError(f"{args.certificate} holds no certificate")
    certificate = certificate_from_model(CertificateModel.model_validate(data))
    verifier = CertificateVerifier(args.config)
    verifier.log_callback = callback
    verifier.run_id = run_id
    report = verifier.verify_certificate(certificate)

    _show(args, f"{report.verdict.value.upper()} ({report.kind} certificate)")
    blocks = pd.DataFrame([b.model_dump(exclude={"role"}) for b in report.blocks])
    if not blocks.empty:
        _show(args, blocks.to_string(index=False))
    for name, holds in report.identities.items():
        _show(args, f"  {'ok ' if holds else 'BAD'} {name}")
    for name, value in report.sample_minimums.items():
        _show(args, f"  min {name} over {report.n_samples} samples: {value:.3g}")
    for reason in report.reasons:
        _show(args, f"  rejected: {reason}")
    _emit_json(report, args.json)
    return EXIT_OK if report.verified else EXIT_MISMATCH


def cmd_corpus(args, callback, run_id) -> int:
    runner = CorpusRunner(args.config, args.corpus_file)
    runner.log_callback = callback
    runner.run_id = run_id
    if args.corpus_command == "list":
        _show(args, runner.list_entries().to_string(index=False))
        return EXIT_OK

    if args.eps is not None:
        runner.synthesizer.settings = runner.synthesizer.settings.model_copy(update={"epsilon": args.eps})
    report = runner.run(args.filter, args.jobs, include_slow=not args.skip_slow)
    frame = runner.to_frame(report)
    _show(args, frame.to_string(index=False) if not frame.empty else "no entries selected")
    _show(args, f"\n{report.mismatches} mismatches, {report.indeterminate} indeterminate")
    _emit_json(report, args.json)
    return report.exit_code


COMMANDS = {
    "check-sos": cmd_check_sos,
    "find-lyapunov": cmd_lyapunov,
    "common-lyapunov": cmd_lyapunov,
    "power-cert": cmd_power,
    "planar-power-cert": cmd_power,
    "savings": cmd_savings,
    "export-sdpa": cmd_export_sdpa,
    "verify": cmd_verify,
    "corpus": cmd_corpus,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Parse `argv`, run one subcommand and return its exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    run_id = uuid.uuid4().hex[:8]
    callback = None if args.quiet else make_console_callback(args.verbose)
    try:
        return COMMANDS[args.command](args, callback, run_id)
    except (ValueError, OSError) as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
