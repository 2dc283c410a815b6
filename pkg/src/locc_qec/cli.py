"""Command-line front end.

Exit codes: 0 distinguishable / correctable / valid, 1 not distinguishable /
not correctable / invalid, 2 inconclusive, 3 or more for errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channels import Povm, build_recovery, extend_with_identity, qc_channel_from_povm, verify_recovery
from .errors import (
    CommutationFailure,
    LoccQecError,
    NotDistinguishable,
    ParseError,
    StrictSubspaceRequired,
)
from .fixtures import teleportation_fixture
from .io import dump_report, load_problem, witness_from_dict, witness_to_dict
from .linalg import Tolerance, as_matrix
from .locc import (
    PROTOCOL_TOL,
    Status,
    Verdict,
    find_distinguishable_basis_3d,
    oneway_algebra_test,
    schmidt_rank_obstruction,
    verify_protocol,
)
from .opalg import has_separating_vector, operator_system_S0, wedderburn_structure
from .qec import CodeSpace, code_from_locc, kl_check
from .stabilizer import stabform_distinguishability
from .bipartite import schmidt_rank
from .channels import KrausChannel

log = logging.getLogger("locc_qec")

ENV_TOL_ABS = "LOCCQEC_TOL_ABS"
ENV_TOL_REL = "LOCCQEC_TOL_REL"

EXIT_OK, EXIT_NO, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2, 3
_STATUS_EXIT = {Status.DISTINGUISHABLE: EXIT_OK, Status.NOT_DISTINGUISHABLE: EXIT_NO,
                Status.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class _Ctx:
    def __init__(self, args, problem=None):
        opts = problem.options if problem is not None else {}
        defaults = Tolerance()
        env_abs = os.environ.get(ENV_TOL_ABS)
        env_rel = os.environ.get(ENV_TOL_REL)
        absolute = _first(args.tol_abs, opts.get("tol_abs"), env_abs, defaults.absolute)
        relative = _first(args.tol_rel, opts.get("tol_rel"), env_rel, defaults.relative)
        try:
            self.tol = Tolerance(float(absolute), float(relative))
        except ValueError as exc:
            raise ParseError(f"bad tolerance: {exc}") from exc
        self.seed = int(_first(args.seed, opts.get("seed"), None, 0))

    def provenance(self) -> dict:
        return {"tool": "locc-qec", "version": __version__, "seed": self.seed,
                "tol_abs": self.tol.absolute, "tol_rel": self.tol.relative}


def _first(*vals):
    for v in vals:
        if v is not None:
            return v
    return None


def _verdict_report(command: str, v: Verdict, ctx: _Ctx) -> dict:
    cert = {k: val for k, val in v.certificate.items()}
    return {
        "command": command,
        "status": v.status.value,
        "exit_code": _STATUS_EXIT[v.status],
        "certificate": cert,
        "witness": witness_to_dict(v.witness) if v.witness is not None else None,
        "diagnostics": list(v.diagnostics),
        "provenance": ctx.provenance(),
    }


# ------------------------------------------------------------------ commands


def cmd_analyze(args) -> tuple[dict, int]:
    problem = load_problem(args.input)
    ctx = _Ctx(args, problem)
    if problem.kind != "state_set":
        raise ParseError(f"analyze expects kind 'state_set', got {problem.kind!r}")
    if "complement_of" in problem.raw:
        phi = problem.complement_target()
        v = schmidt_rank_obstruction(phi, ctx.tol)
        if v.status is Status.INCONCLUSIVE:
            v2 = oneway_algebra_test(problem.states(), ctx.tol, ctx.seed)
            v2.diagnostics = v.diagnostics + v2.diagnostics
            v = v2
        rep = _verdict_report("analyze", v, ctx)
        return rep, rep["exit_code"]
    states = problem.states()
    v = oneway_algebra_test(states, ctx.tol, ctx.seed)
    rep = _verdict_report("analyze", v, ctx)
    if v.status is Status.INCONCLUSIVE and len(states) == 3 and states.dim_a == 3:
        try:
            wit = find_distinguishable_basis_3d(states.ops, seed=ctx.seed)
            rep["span_basis_witness"] = witness_to_dict(wit)
            rep["diagnostics"].append("a basis of the span is distinguishable (see span_basis_witness)")
        except (StrictSubspaceRequired, CommutationFailure) as exc:
            rep["diagnostics"].append(f"basis finder: {exc}")
    return rep, rep["exit_code"]


def cmd_find_basis(args) -> tuple[dict, int]:
    problem = load_problem(args.input)
    ctx = _Ctx(args, problem)
    states = problem.states()
    rep = {"command": "find-basis", "provenance": ctx.provenance(), "diagnostics": []}
    try:
        wit = find_distinguishable_basis_3d(states.ops, seed=ctx.seed)
    except StrictSubspaceRequired as exc:
        rep.update(status=Status.INCONCLUSIVE.value, exit_code=EXIT_INCONCLUSIVE, witness=None)
        rep["diagnostics"].append(str(exc))
        return rep, EXIT_INCONCLUSIVE
    rep.update(status=Status.DISTINGUISHABLE.value, exit_code=EXIT_OK, witness=witness_to_dict(wit))
    rep["diagnostics"].append("witness distinguishes the rotated basis given by 'coefficients'")
    return rep, EXIT_OK


def _code_and_noise(problem):
    raw = problem.raw
    if "code" in raw:
        code_m = problem.matrix(raw["code"], "code")
        code = CodeSpace.from_vectors(code_m)
        kraus = [problem.matrix(n, f"noise[{i}]") for i, n in enumerate(problem.names("noise"))]
        noise = KrausChannel.from_kraus(kraus)
        return code, noise
    states = problem.states()
    alice = problem.alice_basis()
    if alice is None:
        raise ParseError("kl-check needs either 'code' and 'noise' or 'states' and 'alice_basis'")
    return code_from_locc(states, alice)


def cmd_kl_check(args) -> tuple[dict, int]:
    problem = load_problem(args.input)
    ctx = _Ctx(args, problem)
    code, noise = _code_and_noise(problem)
    rep_kl = kl_check(code, noise, ctx.tol)
    code_rc = EXIT_OK if rep_kl.correctable else EXIT_NO
    rep = {
        "command": "kl-check",
        "status": "Correctable" if rep_kl.correctable else "NotCorrectable",
        "exit_code": code_rc,
        "correctable": rep_kl.correctable,
        "lambda": rep_kl.lam,
        "residual": rep_kl.residual,
        "provenance": ctx.provenance(),
    }
    return rep, code_rc


def cmd_stabilizer(args) -> tuple[dict, int]:
    ctx = _Ctx(args)
    v = stabform_distinguishability(args.n, args.k, ctx.tol, ctx.seed)
    rep = _verdict_report("stabilizer", v, ctx)
    rep["params"] = {"n": args.n, "k": args.k}
    return rep, rep["exit_code"]


def cmd_teleport_verify(args) -> tuple[dict, int]:
    if args.generalized_bell is not None:
        ctx = _Ctx(args)
        states, alice = teleportation_fixture(args.generalized_bell)
        source = f"generalized-bell:{args.generalized_bell}"
    else:
        if args.input is None:
            raise ParseError("teleport-verify needs an input file or --generalized-bell N")
        problem = load_problem(args.input)
        ctx = _Ctx(args, problem)
        states = problem.states()
        alice = problem.alice_basis()
        if alice is None:
            raise ParseError("teleport-verify needs 'alice_basis'")
        source = str(args.input)
    rep = {"command": "teleport-verify", "source": source, "provenance": ctx.provenance()}
    try:
        recovery = build_recovery(states, alice, ctx.tol)
    except NotDistinguishable as exc:
        rep.update(status="Invalid", exit_code=EXIT_NO, deviation=None, error=str(exc))
        return rep, EXIT_NO
    noise = extend_with_identity(qc_channel_from_povm(Povm.from_basis(alice)), states.dim_b)
    dev = verify_recovery(recovery, noise, states.vectors(), trials=4, seed=ctx.seed)
    ok = ctx.tol.is_zero(dev, 1.0)
    rep.update(status="Valid" if ok else "Invalid", exit_code=EXIT_OK if ok else EXIT_NO, deviation=dev)
    return rep, rep["exit_code"]


def cmd_verify(args) -> tuple[dict, int]:
    """Re-check a report against its problem using only the files."""
    try:
        report = json.loads(Path(args.report).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read report {args.report}: {exc}") from exc
    problem = load_problem(args.problem)
    ctx = _Ctx(args, problem)
    out = {"command": "verify", "report": str(args.report), "provenance": ctx.provenance()}
    status = report.get("status")
    wit_data = report.get("witness")
    if status == Status.DISTINGUISHABLE.value:
        if wit_data is None:
            raise ParseError("report claims Distinguishable but carries no witness")
        wit = witness_from_dict(wit_data)
        states = wit.states_for(problem.states())
        defect = verify_protocol(states, wit.alice_basis, wit.bob_bases)
        ok = defect <= PROTOCOL_TOL
        out.update(valid=ok, defect=defect)
    elif status == Status.NOT_DISTINGUISHABLE.value:
        cert = report.get("certificate") or {}
        if "schmidt_rank" in cert:
            r = schmidt_rank(problem.complement_target(), ctx.tol)
            ok = r == cert["schmidt_rank"] and r > 2
            out.update(valid=ok, schmidt_rank=r)
        elif "structure" in cert:
            st = wedderburn_structure(operator_system_S0(problem.states().ops, ctx.tol), ctx.tol, ctx.seed)
            claimed = sorted(tuple(b) for b in cert["structure"])
            ok = claimed == sorted(st.blocks) and not has_separating_vector(st)
            out.update(valid=ok, structure=[list(b) for b in st.blocks])
        else:
            raise ParseError("NotDistinguishable report has no recognised certificate")
    else:
        raise ParseError(f"nothing to verify for status {status!r}")
    out["status"] = "Valid" if ok else "Invalid"
    out["exit_code"] = EXIT_OK if ok else EXIT_NO
    return out, out["exit_code"]


# ---------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-abs", type=float, default=None,
                        help=f"absolute tolerance (default 1e-10, env {ENV_TOL_ABS})")
    common.add_argument("--tol-rel", type=float, default=None,
                        help=f"relative tolerance (default 1e-9, env {ENV_TOL_REL})")
    common.add_argument("--seed", type=int, default=None, help="seed for randomised steps (default 0)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON report (default)")
    fmt.add_argument("--text", dest="fmt", action="store_const", const="text", help="plain-text report")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="locc-qec", description="One-way LOCC distinguishability and QEC checks")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("analyze", parents=[common], help="decide one-way distinguishability of a state set")
    s.add_argument("input")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("kl-check", parents=[common], help="Knill-Laflamme test of a code and noise")
    s.add_argument("input")
    s.set_defaults(func=cmd_kl_check)

    s = sub.add_parser("find-basis", parents=[common], help="distinguishable basis for three states on C^3 (x) C^n")
    s.add_argument("input")
    s.set_defaults(func=cmd_find_basis)

    s = sub.add_parser("stabilizer", parents=[common], help="logical Pauli states of the canonical [[n,k]] code")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.set_defaults(func=cmd_stabilizer)

    s = sub.add_parser("teleport-verify", parents=[common], help="check the measure-and-correct recovery")
    s.add_argument("input", nargs="?")
    s.add_argument("--generalized-bell", type=int, default=None, metavar="N",
                   help="use the built-in generalised Bell fixture on C^N")
    s.set_defaults(func=cmd_teleport_verify)

    s = sub.add_parser("verify", parents=[common], help="re-validate a report against its problem file")
    s.add_argument("report")
    s.add_argument("problem")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        report, code = args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except LoccQecError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR + 1
    except (ValueError, KeyError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR + 1
    text = dump_report(report, args.fmt or "json")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
