"""Batch experiment driver over the library modules.

Every subcommand is a thin composition of library calls; the only work
done here is argument handling and report formatting, which a test
enforces by comparing CLI output against direct library results.

Reports are deterministic byte-for-byte for a fixed configuration.
CSV carries floats at 17 significant digits; JSON uses the shortest
round-tripping float form.  Config precedence is flags, then the
optional --config JSON file, then built-in defaults.

Exit codes: 0 success, 1 contract/resource/configuration violation
(diagnostic on stderr), 2 usage, 3 promise violation reported by an
amplification run (the report is still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import protocols, rtm, sparse_oracle, spectral
from .errors import ConfigurationError, ContractError, ResourceLimitError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PROMISE = 3

DEFAULTS: dict[str, dict] = {
    "spectrum": {"kind": "path", "index_form": "odd", "format": "csv"},
    "det": {"method": "auto", "format": "json"},
    "reduce": {"format": "json"},
    "verify": {"format": "json"},
    "amplify": {
        "format": "json",
        "trials": 3,
        "completeness": 0.9,
        "soundness": 0.1,
        "witness": "best",
    },
    "kitaev": {
        "format": "json",
        "verifier": "rotation",
        "p": 0.9,
        "completeness": 0.9,
        "soundness": 0.1,
    },
    "energy": {"format": "json", "bits": 30},
}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_report(results, fmt: str) -> str:
    """Render a row list (or a single row) as headed CSV or as JSON."""
    if results is None or results == [] or results == {}:
        raise ValueError("nothing to report")
    if fmt == "json":
        return json.dumps(results, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    rows = results if isinstance(results, list) else [results]
    header = list(rows[0].keys())
    lines = [",".join(header)]
    for r in rows:
        if list(r.keys()) != header:
            raise ValueError("rows disagree on columns")
        lines.append(",".join(_fmt(r[k]) for k in header))
    return "\n".join(lines) + "\n"


def _load_machine(name_or_path: str, space: int | None) -> rtm.ReversibleTM:
    if os.path.exists(name_or_path):
        machine = rtm.load_machine(name_or_path)
    else:
        machine = rtm.corpus_machine(name_or_path)
    if space is not None:
        machine = rtm.with_space(machine, space)
    return machine


def _with_seed(args, payload: dict) -> dict:
    if getattr(args, "seed", None) is not None:
        return {"seed": args.seed, **payload}
    return payload


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_spectrum(args) -> tuple[list[dict], int]:
    report = spectral.spectrum_report(args.kind, args.ell, index_form=args.index_form)
    rows = [
        {
            "ell": args.ell,
            "k": k,
            "closed_form": closed,
            "eigensolver": eig,
            "abs_err": err,
        }
        for k, closed, eig, err in report.rows()
    ]
    return rows, EXIT_OK


def _cmd_det(args) -> tuple[dict, int]:
    matrix = sparse_oracle.load_instance(args.instance)
    value = spectral.det_exact(matrix, method=args.method)
    payload = _with_seed(args, {"dim": matrix.dim, "det": value, "method": args.method})
    return payload, EXIT_OK


def _cmd_reduce(args) -> tuple[dict, int]:
    machine = _load_machine(args.machine, args.space)
    instance = rtm.reduce_to_gapped(machine, args.input)
    accepted = rtm.simulate(machine, args.input).accepted
    det = spectral.det_exact(instance.adjacency)
    payload = _with_seed(
        args,
        {
            "machine": machine.name or args.machine,
            "input": args.input,
            "space": machine.space,
            "dim": instance.dim,
            "gap_exponent": instance.g,
            "det": det,
            "accepts": accepted,
        },
    )
    return payload, EXIT_OK


def _cmd_verify(args) -> tuple[dict, int]:
    if args.machine is not None:
        machine = _load_machine(args.machine, args.space)
        instance = rtm.reduce_to_gapped(machine, args.input)
        matrix = instance.gram
        g = args.gap_exponent if args.gap_exponent is not None else instance.g
        source = machine.name or args.machine
    else:
        matrix = sparse_oracle.load_instance(args.instance)
        g = args.gap_exponent
        source = args.instance
    result = protocols.decide_gapped(matrix, g)
    payload = _with_seed(
        args,
        {
            "instance": source,
            "gap_exponent": g,
            "decision": result.decision,
            "acceptance": result.acceptance,
            "completeness": result.completeness,
            "soundness": result.soundness,
            "separation": result.separation,
            "epsilon": result.epsilon,
            "evo_time": result.evo_time,
            "taylor_order": result.taylor_order,
        },
    )
    return payload, EXIT_OK


def _cmd_amplify(args) -> tuple[dict, int]:
    verifier = protocols.rotation_verifier(args.p, args.completeness, args.soundness)
    params = protocols.AmplificationParams.from_promise(
        args.completeness, args.soundness, args.trials, args.precision_bits
    )
    op = protocols.accept_operator(verifier)
    _, vecs = op.eigensystem()
    column = -1 if args.witness == "best" else 0
    outcome = protocols.nwz_amplify(verifier, params, vecs[:, column])
    payload = _with_seed(
        args,
        {
            "p": args.p,
            "completeness": args.completeness,
            "soundness": args.soundness,
            "trials": params.trials_r,
            "precision_bits": params.precision_bits,
            "register_bits": params.register_bits,
            "yes_cut": params.yes_cut,
            "no_cut": params.no_cut,
            "witness": args.witness,
            "decision": outcome.decision,
            "probability": outcome.probability,
            "p_yes": outcome.p_yes,
            "p_no": outcome.p_no,
            "p_violation": outcome.p_violation,
            "per_trial_yes": outcome.per_trial_yes,
            "per_trial_no": outcome.per_trial_no,
        },
    )
    code = EXIT_PROMISE if outcome.decision == "PROMISE_VIOLATED" else EXIT_OK
    return payload, code


def _cmd_kitaev(args) -> tuple[dict, int]:
    if args.verifier == "rotation":
        verifier = protocols.rotation_verifier(args.p, args.completeness, args.soundness)
    else:
        verifier, _ = protocols.rule_parameterized_verifier()
    instance = protocols.kitaev_hamiltonian(verifier)
    lam = protocols.ground_energy(instance)
    if args.format == "json":
        payload = instance.to_dict()
        payload["lambda_min"] = lam
        payload = _with_seed(args, payload)
    else:
        payload = _with_seed(
            args,
            {
                "qubits": instance.num_qubits,
                "locality": instance.locality,
                "terms": len(instance.terms),
                "a": instance.threshold_a,
                "b": instance.threshold_b,
                "lambda_min": lam,
            },
        )
    return payload, EXIT_OK


def _cmd_energy(args) -> tuple[dict, int]:
    with open(args.instance, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "terms" in data:
        instance = protocols.PreciseLHInstance.from_dict(data)
        truth = protocols.ground_energy(instance)
        estimate = protocols.binary_search_energy(instance, args.bits)
    else:
        matrix = sparse_oracle.load_instance(data)
        dense = sparse_oracle.materialize(matrix)
        truth = spectral.min_eigenvalue(dense)
        estimate = protocols.binary_search_energy(dense, args.bits)
    payload = _with_seed(
        args,
        {
            "instance": args.instance,
            "bits": args.bits,
            "estimate": estimate,
            "eigensolver": truth,
            "abs_err": abs(estimate - truth),
        },
    )
    return payload, EXIT_OK


HANDLERS = {
    "spectrum": _cmd_spectrum,
    "det": _cmd_det,
    "reduce": _cmd_reduce,
    "verify": _cmd_verify,
    "amplify": _cmd_amplify,
    "kitaev": _cmd_kitaev,
    "energy": _cmd_energy,
}


# ---------------------------------------------------------------------------
# argument plumbing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaplab",
        description="Experiment driver for gapped-matrix reductions, spectra, "
        "and verification protocols.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--config", default=None, help="JSON file supplying unset flags")
    common.add_argument("--seed", type=int, default=None, help="recorded in the report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="closed form vs eigensolver")
    p.add_argument("--kind", choices=["path", "cycle"], default=None)
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--index-form", dest="index_form", choices=["odd", "even"], default=None)

    p = sub.add_parser("det", parents=[common], help="exact determinant of an instance")
    p.add_argument("--instance", default=None, help="instance JSON file")
    p.add_argument(
        "--method",
        choices=["auto", "bareiss", "bareiss_sparse", "cycle_cover", "permutation"],
        default=None,
    )

    p = sub.add_parser("reduce", parents=[common], help="machine + input -> gapped instance")
    p.add_argument("--machine", default=None, help="corpus name or machine JSON path")
    p.add_argument("--input", default=None)
    p.add_argument("--space", type=int, default=None)

    p = sub.add_parser("verify", parents=[common], help="decide a gapped instance")
    p.add_argument("--machine", default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--space", type=int, default=None)
    p.add_argument("--instance", default=None, help="symmetric instance JSON file")
    p.add_argument("--gap-exponent", dest="gap_exponent", type=int, default=None)

    p = sub.add_parser("amplify", parents=[common], help="median phase-estimation decision")
    p.add_argument("--p", type=float, default=None, help="true acceptance of the instance")
    p.add_argument("--completeness", type=float, default=None)
    p.add_argument("--soundness", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--precision-bits", dest="precision_bits", type=int, default=None)
    p.add_argument("--witness", choices=["best", "worst"], default=None)

    p = sub.add_parser("kitaev", parents=[common], help="emit a 5-local clock instance")
    p.add_argument("--verifier", choices=["rotation", "rule"], default=None)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--completeness", type=float, default=None)
    p.add_argument("--soundness", type=float, default=None)

    p = sub.add_parser("energy", parents=[common], help="bisection ground-energy estimate")
    p.add_argument("--instance", default=None, help="matrix or clock-instance JSON file")
    p.add_argument("--bits", type=int, default=None)

    return parser


def _resolve(args, parser: argparse.ArgumentParser) -> None:
    """Apply config-file values, then defaults, then check required flags."""
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
        for key, value in cfg.items():
            if hasattr(args, key) and getattr(args, key) is None:
                setattr(args, key, value)
    for key, value in DEFAULTS[args.command].items():
        if getattr(args, key, "absent") is None:
            setattr(args, key, value)

    def require(name: str) -> None:
        if getattr(args, name, None) is None:
            parser.error(f"{args.command} requires --{name.replace('_', '-')}")

    if args.command == "spectrum":
        require("ell")
    elif args.command in ("det", "energy"):
        require("instance")
    elif args.command == "reduce":
        require("machine")
        require("input")
    elif args.command == "verify":
        if args.machine is None and args.instance is None:
            parser.error("verify requires --machine/--input or --instance")
        if args.machine is not None:
            require("input")
        if args.machine is None and args.gap_exponent is None:
            parser.error("verify --instance requires --gap-exponent")
    elif args.command == "amplify":
        require("p")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _resolve(args, parser)
    try:
        payload, code = HANDLERS[args.command](args)
        text = emit_report(payload, args.format)
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (ContractError, ConfigurationError, ResourceLimitError, ValueError, OSError) as exc:
        print(f"gaplab: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
