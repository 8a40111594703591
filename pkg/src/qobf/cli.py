"""The ``qobf`` command line tool: file-to-file workflows over all modules.

Exit codes (stable for scripting):
  0 - success
  2 - usage error, unreadable/unparsable input, or qubit mismatch
  3 - internal soundness failure: a pass produced a non-equivalent circuit
      (the tool refuses to write semantics-breaking output)
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import __version__
from .ir import Circuit, GateApp, GateKind, validate
from .metrics import measure_circuit_run, render_report
from .passes import (
    METHODS,
    ObfuscationConfig,
    apply_pass,
    load_ruleset,
    verify_ruleset,
)
from .predicates import PREDICATE_KINDS, make_predicate, outcome_model
from .qasm import emit, parse
from .sim import SimulationError, equivalent
from .wrapper import (
    DecoyPolicy,
    REQUIRED_MODE,
    SourceBlock,
    list_templates,
    resolve_branches,
    wrap,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOUNDNESS = 3


def _fail(message: str, code: int = EXIT_INPUT) -> int:
    print(f"qobf: error: {message}", file=sys.stderr)
    return code


def _load_circuit(path: str) -> Circuit | None:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"qobf: error: cannot read {path}: {exc}", file=sys.stderr)
        return None
    result = parse(text)
    if result.circuit is None:
        for diag in result.diagnostics:
            print(f"{path}: {diag}", file=sys.stderr)
        return None
    problems = [d for d in validate(result.circuit) if d.is_error]
    if problems:
        for diag in problems:
            print(f"{path}: {diag}", file=sys.stderr)
        return None
    return result.circuit


def cmd_obfuscate(args: argparse.Namespace) -> int:
    circuit = _load_circuit(args.input)
    if circuit is None:
        return EXIT_INPUT
    cfg = ObfuscationConfig(seed=args.seed, intensity=args.intensity, method=args.method)
    ruleset = None
    if args.method == "cloaked":
        try:
            report = verify_ruleset(load_ruleset(args.ruleset))
        except (OSError, ValueError) as exc:
            return _fail(str(exc))
        for rejected in report.rejected:
            print(
                f"qobf: warning: rule {rejected.target.value} <-"
                f" {rejected.replacement.name} failed verification; skipped",
                file=sys.stderr,
            )
        if not report.accepted:
            print("qobf: warning: no applicable rules; output equals input", file=sys.stderr)
        ruleset = report.accepted
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        obfuscated = apply_pass(args.method, circuit, cfg, ruleset)
    for w in caught:
        print(f"qobf: warning: {w.message}", file=sys.stderr)
    if args.corrupt_output:  # test-only hook for the soundness gate
        obfuscated = obfuscated.with_gates(
            obfuscated.gates + (GateApp(GateKind.X, (0,), origin="inserted"),)
        )
    ok, fidelity = equivalent(circuit, obfuscated, "statevector")
    if not ok:
        return _fail(
            f"pass broke circuit semantics (fidelity {fidelity:.12f}); refusing to write output",
            EXIT_SOUNDNESS,
        )
    Path(args.output).write_text(emit(obfuscated), encoding="utf-8")
    if args.report:
        report_obj = measure_circuit_run(
            circuit, obfuscated, args.method, input_id=args.input, seed=args.seed
        )
        Path(args.report).write_text(render_report([report_obj], "json") + "\n", encoding="utf-8")
    if args.verbose:
        print(f"wrote {args.output} (fidelity {fidelity:.12f})")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    a = _load_circuit(args.a)
    b = _load_circuit(args.b)
    if a is None or b is None:
        return EXIT_INPUT
    try:
        ok, fidelity = equivalent(a, b, args.mode)
    except SimulationError as exc:
        return _fail(str(exc))
    print(f"equivalent={ok} fidelity={fidelity:.12f} mode={args.mode}")
    return EXIT_OK if ok else 1


def cmd_predicate(args: argparse.Namespace) -> int:
    params = {}
    if args.kind == "multi_pair":
        params["n_pairs"] = args.pairs
    if args.kind == "branch":
        params["seed"] = args.seed
    try:
        pred = make_predicate(args.kind, params)
    except ValueError as exc:
        return _fail(str(exc))
    Path(args.output).write_text(emit(pred.circuit), encoding="utf-8")
    model = outcome_model(pred)
    if isinstance(model, dict):
        doc = {"kind": pred.kind, "params": dict(pred.params), "distribution": model}
    else:
        doc = {
            "kind": pred.kind,
            "params": dict(pred.params),
            "amplitudes": [[z.real, z.imag] for z in model],
        }
    model_path = args.model or (str(Path(args.output)) + ".model.json")
    Path(model_path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if args.verbose:
        print(f"wrote {args.output} and {model_path}")
    return EXIT_OK


def cmd_wrap(args: argparse.Namespace) -> int:
    try:
        payload = Path(args.payload).read_text(encoding="utf-8")
    except OSError as exc:
        return _fail(f"cannot read {args.payload}: {exc}")
    params = {}
    if args.kind == "multi_pair":
        params["n_pairs"] = args.pairs
    if args.kind == "branch":
        params["seed"] = args.seed
    policy = DecoyPolicy(
        mode=args.mode or REQUIRED_MODE[args.kind],
        decoy_seed=args.decoy_seed,
        decoy_statement_count=args.decoy_statements,
    )
    try:
        emitted, manifest = wrap(
            SourceBlock(payload),
            args.kind,
            params,
            policy,
            template_id=args.template,
            template_dir=args.template_dir,
        )
    except ValueError as exc:
        return _fail(str(exc))
    Path(args.output).write_text(emitted, encoding="utf-8")
    manifest_path = args.manifest or (str(Path(args.output)) + ".manifest.json")
    Path(manifest_path).write_text(
        json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    for branch_id, prob in resolve_branches(manifest).items():
        print(f"{branch_id}: p={prob:.12g}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    if not args.inputs:
        return _fail("no inputs given")
    methods = args.methods.split(",") if args.methods else list(METHODS)
    for method in methods:
        if method not in METHODS:
            return _fail(f"unknown method {method!r}")
    reports = []
    for path in args.inputs:
        circuit = _load_circuit(path)
        if circuit is None:
            return EXIT_INPUT
        for method in methods:
            cfg = ObfuscationConfig(seed=args.seed, intensity=args.intensity, method=method)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                obfuscated = apply_pass(method, circuit, cfg)
            reports.append(
                measure_circuit_run(circuit, obfuscated, method, input_id=path, seed=args.seed)
            )
    text = render_report(reports, args.format)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def cmd_templates(args: argparse.Namespace) -> int:
    for template_id, description in list_templates(args.template_dir):
        print(f"{template_id}: {description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qobf",
        description="Quantum circuit and control-flow obfuscation with equivalence gating.",
    )
    parser.add_argument("--version", action="version", version=f"qobf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("obfuscate", help="apply a circuit obfuscation pass to a QASM file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--ruleset", help="substitution-rule file for --method cloaked")
    p.add_argument("--report", help="also write a JSON overhead report here")
    p.add_argument("--corrupt-output", action="store_true", help=argparse.SUPPRESS)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_obfuscate)

    p = sub.add_parser("verify", help="check two QASM files for equivalence")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--mode", choices=("statevector", "unitary", "distribution"),
                   default="statevector")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("predicate", help="generate an opaque-predicate circuit")
    p.add_argument("--kind", choices=PREDICATE_KINDS, required=True)
    p.add_argument("--pairs", type=int, default=8, help="pair count for multi_pair")
    p.add_argument("--seed", type=int, default=0, help="decoy-segment seed for branch")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--model", help="outcome-model JSON path (default: <output>.model.json)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_predicate)

    p = sub.add_parser("wrap", help="wrap a payload file behind an opaque predicate")
    p.add_argument("--payload", required=True)
    p.add_argument("--kind", choices=PREDICATE_KINDS, required=True)
    p.add_argument("--mode", choices=("duplicate_payload", "dead_decoy", "restart"),
                   help="decoy policy (defaults to the kind's canonical mode)")
    p.add_argument("--pairs", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--decoy-seed", type=int, default=0)
    p.add_argument("--decoy-statements", type=int, default=2)
    p.add_argument("--template", default="qobf-inline")
    p.add_argument("--template-dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--manifest", help="manifest JSON path (default: <output>.manifest.json)")
    p.set_defaults(func=cmd_wrap)

    p = sub.add_parser("report", help="measure obfuscation overheads for QASM files")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--methods", help="comma-separated pass list (default: all four)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--format", choices=("json", "table"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("templates", help="list available wrap templates")
    p.add_argument("--template-dir")
    p.set_defaults(func=cmd_templates)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, SimulationError) as exc:
        return _fail(str(exc))


def console_main() -> None:
    sys.exit(main())
