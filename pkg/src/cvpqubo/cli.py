"""Command-line interface: ``cvpqubo <command> ...``.

Exit codes: 0 success, 1 solver or oracle refused (or verification failed),
2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .lattice import (
    BoundMode,
    CvpInstance,
    UnsupportedModeError,
    encoding_bits,
    reduce_to_parallelepiped,
)
from .linalg import DimensionError, SingularMatrixError
from .pipeline import (
    DEFAULT_ORACLE_CAP,
    CvpSolution,
    OracleRefused,
    VerifyReport,
    cvp_oracle_enum,
    solve_cvp,
    verify_solution,
)
from .qubo import EncodingParams, QuboFormatError, build_qubo, export_qubo, import_qubo
from .solve import DEFAULT_EXHAUSTIVE_CAP, AnnealSchedule, SolverRefused, solve_qubo

FORMAT_VERSION = 1


class InvalidInput(ValueError):
    pass


# ------------------------------------------------------------------ instance I/O

def parse_instance(text: str, name: str | None = None) -> CvpInstance:
    """JSON ``{"n", "A", "x", "name"}`` or plain text: n rows of A, then x."""
    try:
        if text.lstrip().startswith("{"):
            doc = json.loads(text)
            A = [[int(a) for a in row] for row in doc["A"]]
            x = [int(t) for t in doc["x"]]
            if "n" in doc and int(doc["n"]) != len(A):
                raise InvalidInput(f"n={doc['n']} but A has {len(A)} rows")
            return CvpInstance.from_lists(A, x, doc.get("name", name))
        rows = [[int(t) for t in line.split()] for line in text.splitlines()
                if line.strip() and not line.lstrip().startswith("#")]
        if len(rows) < 2:
            raise InvalidInput("plain instance needs the rows of A followed by a row for x")
        return CvpInstance.from_lists(rows[:-1], rows[-1], name)
    except InvalidInput:
        raise
    except (KeyError, TypeError, ValueError, DimensionError, SingularMatrixError) as exc:
        raise InvalidInput(f"invalid instance: {exc}") from exc


def load_instance(path: str) -> CvpInstance:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return parse_instance(text, None if path == "-" else Path(path).stem)


def _frac(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _ints(v) -> list[str]:
    return [str(int(t)) for t in v]


def solution_to_json(sol: CvpSolution) -> dict:
    return {"z": _ints(sol.z), "lambda": _ints(sol.lambda_), "dist_sq": str(sol.dist_sq),
            "certificate": sol.certificate}


def solution_from_json(doc: dict) -> CvpSolution:
    doc = doc.get("solution", doc)
    try:
        return CvpSolution(tuple(int(t) for t in doc["z"]), tuple(int(t) for t in doc["lambda"]),
                           int(doc["dist_sq"]), doc.get("certificate", "heuristic"))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"invalid solution file: {exc}") from exc


def report_to_json(rep: VerifyReport) -> dict:
    opt = lambda v: None if v is None else str(v)  # noqa: E731
    return {
        "passed": rep.passed,
        "lattice_ok": rep.lattice_ok,
        "dist_sq_ok": rep.dist_sq_ok,
        "qubo_identity_ok": rep.qubo_identity_ok,
        "oracle_dist_sq": opt(rep.oracle_dist_sq),
        "matches_oracle": rep.matches_oracle,
        "range_boundary_hit": rep.range_boundary_hit,
        "oracle_boundary_hit": rep.oracle_boundary_hit,
        "m": rep.m,
    }


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps({"format_version": FORMAT_VERSION, **doc}, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _schedule(args) -> AnnealSchedule:
    return AnnealSchedule(
        initial_temperature=Fraction(args.sa_t0) if args.sa_t0 else None,
        cooling=Fraction(args.sa_cooling) if args.sa_cooling else None,
        sweeps=args.sa_sweeps,
        restarts=args.sa_restarts,
        seed=args.seed,
    )


# ----------------------------------------------------------------------- commands

def cmd_bounds(args) -> int:
    inst = load_instance(args.instance)
    rep = encoding_bits(inst, args.mode)
    m, n, b = rep.m, inst.n, inst.b
    Q = build_qubo(reduce_to_parallelepiped(inst), EncodingParams(n, m))
    _emit({
        "n": n,
        "b": str(b),
        "det": str(inst.det),
        "kappa_sq_upper": _frac(rep.kappa_sq_upper),
        "z_norm_sq_upper": _frac(rep.z_norm_sq_upper),
        "m_paper": rep.m_paper,
        "m_tight": rep.m_tight,
        "mode": rep.mode_used.value,
        "m": m,
        "N": Q.N,
        "size_s": str(Q.size_s),
        "coefficient_bound": str(3 * (1 << (2 * m + 1)) * n * n * b * b),
    }, args.output)
    return 0


def cmd_reduce(args) -> int:
    inst = load_instance(args.instance)
    red = reduce_to_parallelepiped(inst)
    _emit({
        "n": inst.n,
        "A": [_ints(row) for row in inst.A.data],
        "x": _ints(inst.x),
        "coords": [_frac(c) for c in red.coords],
        "floor_coords": _ints(red.floor_coords),
        "lambda0": _ints(red.lambda0),
        "x_hat": _ints(red.x_hat),
    }, args.output)
    return 0


def cmd_build(args) -> int:
    inst = load_instance(args.instance)
    rep = encoding_bits(inst, args.mode)
    Q = build_qubo(reduce_to_parallelepiped(inst), EncodingParams(inst.n, rep.m), args.sign)
    data = export_qubo(Q, args.format)
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
    return 0


def cmd_solve_qubo(args) -> int:
    raw = sys.stdin.buffer.read() if args.qubo == "-" else Path(args.qubo).read_bytes()
    Q = import_qubo(raw)
    res = solve_qubo(Q, args.method, _schedule(args), args.cap, args.workers)
    _emit({
        "N": Q.N,
        "assignment": "".join(map(str, res.assignment)),
        "value": str(res.value),
        "objective_plus_constant": str(res.value + Q.constant),
        "method": res.method,
        "proven_optimal": res.proven_optimal,
        "evaluations": res.evaluations,
        "wall_time": res.wall_time,
    }, args.output)
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    run = solve_cvp(inst, args.mode, args.sign, args.method, schedule=_schedule(args), cap=args.cap,
                    oracle=args.oracle, radius=args.radius, oracle_cap=args.oracle_cap,
                    workers=args.workers)
    _emit({
        "name": inst.name,
        "solution": solution_to_json(run.solution),
        "report": report_to_json(run.report),
        "m": run.bounds.m,
        "mode": run.bounds.mode_used.value,
        "sign": args.sign,
        "N": run.qubo_N,
        "size_s": str(run.qubo_size),
        "solver": {
            "method": run.solve.method,
            "value": str(run.solve.value),
            "assignment": "".join(map(str, run.solve.assignment)),
            "proven_optimal": run.solve.proven_optimal,
            "evaluations": run.solve.evaluations,
            "wall_time": run.solve.wall_time,
        },
    }, args.output)
    return 0


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    red = reduce_to_parallelepiped(inst)
    radius = args.radius if args.radius is not None else 1 << encoding_bits(inst, args.mode).m
    best = cvp_oracle_enum(inst.A, red.x_hat, radius, args.oracle_cap)
    z = tuple(a + b for a, b in zip(best.z, red.floor_coords))
    lam = tuple(a + b for a, b in zip(best.lambda_, red.lambda0))
    sol = CvpSolution(z, lam, best.dist_sq, "oracle-verified")
    _emit({"radius": str(radius), "reduced_z": _ints(best.z), "solution": solution_to_json(sol)},
          args.output)
    return 0


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    try:
        doc = json.loads(Path(args.solution).read_text())
    except ValueError as exc:
        raise InvalidInput(f"solution file is not JSON: {exc}") from exc
    sol = solution_from_json(doc)
    if len(sol.z) != inst.n or len(sol.lambda_) != inst.n:
        raise InvalidInput("solution dimension does not match the instance")
    rep = verify_solution(inst, sol, mode=args.mode, sign_mode=args.sign, oracle=args.oracle,
                          radius=args.radius, oracle_cap=args.oracle_cap, seed=args.seed)
    _emit({"report": report_to_json(rep)}, args.output)
    return 0 if rep.passed else 1


# ------------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cvpqubo", description="CVP to QUBO reduction toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, instance=True, sign=False):
        if instance:
            p.add_argument("instance", help="instance file (JSON or plain text), '-' for stdin")
            p.add_argument("--mode", choices=[m.value for m in BoundMode], default="tight")
        if sign:
            p.add_argument("--sign", choices=["derived", "verbatim"], default="derived")
        p.add_argument("-o", "--output", help="write to this file instead of stdout")

    def solver_flags(p):
        p.add_argument("--method", choices=["exhaustive", "sa"], default=None,
                       help="default: exhaustive when N <= cap, else sa")
        p.add_argument("--cap", type=int, default=DEFAULT_EXHAUSTIVE_CAP)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--sa-sweeps", type=int, default=AnnealSchedule.sweeps)
        p.add_argument("--sa-restarts", type=int, default=AnnealSchedule.restarts)
        p.add_argument("--sa-t0", help="initial temperature (rational); default scales to Q")
        p.add_argument("--sa-cooling", help="cooling factor in (0,1); default reaches T=1/4")
        p.add_argument("--workers", type=int, default=1)

    def oracle_flags(p):
        p.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True)
        p.add_argument("--radius", type=int, default=None, help="oracle box radius, default 2^m")
        p.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP)

    p = sub.add_parser("bounds", help="condition-number and bit-width bounds")
    common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("reduce", help="translate the target into the fundamental parallelepiped")
    common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("build", help="write the QUBO for an instance")
    common(p, sign=True)
    p.add_argument("--format", choices=["qubo-lines", "json"], default="qubo-lines")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("solve-qubo", help="minimise a QUBO file")
    p.add_argument("qubo", help="QUBO file (qubo-lines or JSON), '-' for stdin")
    p.add_argument("-o", "--output")
    solver_flags(p)
    p.set_defaults(func=cmd_solve_qubo)

    p = sub.add_parser("solve", help="solve a CVP instance through the QUBO")
    common(p, sign=True)
    solver_flags(p)
    oracle_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force closest vector")
    common(p)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="check a solution file against an instance")
    common(p, sign=True)
    p.add_argument("solution", help="solution JSON (output of 'solve' or a bare solution object)")
    p.add_argument("--seed", type=int, default=0)
    oracle_flags(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SolverRefused, OracleRefused) as exc:
        print(f"cvpqubo: {exc}", file=sys.stderr)
        return 1
    except (InvalidInput, QuboFormatError, UnsupportedModeError, SingularMatrixError,
            DimensionError, FileNotFoundError) as exc:
        print(f"cvpqubo: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
