"""End-to-end CVP solving through the QUBO encoding, plus brute-force oracles."""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .lattice import (
    BoundMode,
    BoundReport,
    CvpInstance,
    encoding_bits,
    reduce_to_parallelepiped,
    sq_dist,
    sqrt_upper,
)
from .linalg import DimensionError, IntMatrix, solve_exact
from .qubo import EncodingParams, QuboMatrix, SignMode, build_qubo, evaluate
from .solve import DEFAULT_EXHAUSTIVE_CAP, AnnealSchedule, SolveResult, solve_qubo

DEFAULT_ORACLE_CAP = 2**28
_INNER_POINTS = 2**20
HALF = Fraction(1, 2)


class OracleRefused(RuntimeError):
    pass


@dataclass(frozen=True)
class CvpSolution:
    z: tuple[int, ...]
    lambda_: tuple[int, ...]
    dist_sq: int
    certificate: str  # "oracle-verified" | "qubo-exhaustive" | "heuristic"


@dataclass(frozen=True)
class VerifyReport:
    lattice_ok: bool  # lambda == A z
    dist_sq_ok: bool  # reported dist_sq == ||x - lambda||²
    qubo_identity_ok: bool
    oracle_dist_sq: Optional[int]
    matches_oracle: Optional[bool]
    range_boundary_hit: bool
    oracle_boundary_hit: Optional[bool]
    m: int

    @property
    def passed(self) -> bool:
        return (self.lattice_ok and self.dist_sq_ok and self.qubo_identity_ok
                and self.matches_oracle is not False)


@dataclass(frozen=True)
class CvpRun:
    solution: CvpSolution
    report: VerifyReport
    bounds: BoundReport
    solve: SolveResult
    qubo_N: int
    qubo_size: int


def decode(v: Sequence[int], params: EncodingParams, A: IntMatrix,
           sign_mode: SignMode | str = SignMode.DERIVED) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Bits → (z, A z), with B[i][j] = v[j·n + i]."""
    n, m = params.n, params.m
    if len(v) != params.N:
        raise DimensionError(f"assignment has length {len(v)}, expected {params.N}")
    Bp = [sum(int(v[j * n + i]) << j for j in range(m + 1)) for i in range(n)]
    if SignMode(sign_mode) is SignMode.DERIVED:
        z = tuple(c - (1 << m) for c in Bp)
    else:
        z = tuple((1 << m) - c for c in Bp)
    return z, A.matvec(z)


def encode(z: Sequence[int], params: EncodingParams,
           sign_mode: SignMode | str = SignMode.DERIVED) -> tuple[int, ...]:
    """Inverse of :func:`decode` on the representable range."""
    n, m = params.n, params.m
    if len(z) != n:
        raise DimensionError(f"z has length {len(z)}, expected {n}")
    derived = SignMode(sign_mode) is SignMode.DERIVED
    shifted = [(c + (1 << m)) if derived else ((1 << m) - c) for c in z]
    if any(not 0 <= s < (1 << (m + 1)) for s in shifted):
        raise ValueError(f"{tuple(z)} is outside the range representable with m={m}")
    bits = [0] * params.N
    for i, s in enumerate(shifted):
        for j in range(m + 1):
            bits[j * n + i] = (s >> j) & 1
    return tuple(bits)


def _fits_int64(A: IntMatrix, x: Sequence[int], reach_z: int) -> bool:
    n = A.rows
    reach = n * max(abs(a) for a in A.entries()) * reach_z + max((abs(t) for t in x), default=0)
    return n * reach * reach < 2**62


def _enumerate_box(A: IntMatrix, x: Sequence[int], ranges: Sequence[range]) -> tuple[int, tuple[int, ...]]:
    """Minimise ||A z − x||² over the integer box ∏ ranges; first minimiser in lexicographic order."""
    n = A.rows
    reach_z = max(max(abs(r.start), abs(r.stop - 1)) for r in ranges)
    if not _fits_int64(A, x, reach_z):
        best = None
        for z in itertools.product(*ranges):
            d = sq_dist(A.matvec(z), x)
            if best is None or d < best[0]:
                best = (d, z)
        return best[0], tuple(best[1])

    inner_dims, points = 0, 1
    while inner_dims < n and points * len(ranges[n - 1 - inner_dims]) <= _INNER_POINTS:
        points *= len(ranges[n - 1 - inner_dims])
        inner_dims += 1
    inner_dims = max(inner_dims, 1)
    outer_dims = n - inner_dims
    M = np.array(A.data, dtype=np.int64)
    axes = [np.arange(r.start, r.stop, dtype=np.int64) for r in ranges[outer_dims:]]
    grids = np.meshgrid(*axes, indexing="ij")
    inner_z = np.stack([g.ravel() for g in grids], axis=1)
    inner_img = inner_z @ M[:, outer_dims:].T
    target = np.array(x, dtype=np.int64)

    best_d = best_z = None
    for prefix in itertools.product(*ranges[:outer_dims]):
        offset = M[:, :outer_dims] @ np.array(prefix, dtype=np.int64) - target if outer_dims else -target
        diff = inner_img + offset
        d = np.einsum("ij,ij->i", diff, diff)
        k = int(np.argmin(d))
        if best_d is None or int(d[k]) < best_d:
            best_d = int(d[k])
            best_z = tuple(prefix) + tuple(int(t) for t in inner_z[k])
    return best_d, best_z


def cvp_oracle_enum(A: IntMatrix, x_hat: Sequence[int], radius: int,
                    cap: int = DEFAULT_ORACLE_CAP) -> CvpSolution:
    """Brute force over the box [−radius, radius]ⁿ; first minimiser in lexicographic z order."""
    n = A.rows
    if len(x_hat) != n:
        raise DimensionError(f"target has length {len(x_hat)}, expected {n}")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    side = 2 * radius + 1
    if side**n > cap:
        raise OracleRefused(f"oracle box has {side}^{n} points, over the cap of {cap}")
    d, z = _enumerate_box(A, x_hat, [range(-radius, radius + 1)] * n)
    return CvpSolution(z, A.matvec(z), d, "oracle-verified")


def cvp_exact(A: IntMatrix, x: Sequence[int], cap: int = DEFAULT_ORACLE_CAP) -> CvpSolution:
    """Closest vector by enumeration over a box that provably contains it.

    With D² the squared distance of the rounded solution, any closer z obeys
    |z_i − c_i| ≤ ‖row_i(A⁻¹)‖·D where c = A⁻¹x.  No encoding bound is used.
    """
    n = A.rows
    coords = solve_exact(A, x)
    D2 = babai_round(A, x).dist_sq
    inv_cols = [solve_exact(A, [int(i == j) for i in range(n)]) for j in range(n)]
    ranges = []
    for i in range(n):
        row_sq = sum(inv_cols[j][i] ** 2 for j in range(n))
        s = sqrt_upper(row_sq * D2)
        ranges.append(range(math.ceil(coords[i] - s), math.floor(coords[i] + s) + 1))
    size = math.prod(len(r) for r in ranges)
    if size > cap:
        raise OracleRefused(f"exact box has {size} points, over the cap of {cap}")
    d, z = _enumerate_box(A, x, ranges)
    return CvpSolution(z, A.matvec(z), d, "oracle-verified")


def babai_round(A: IntMatrix, x: Sequence[int]) -> CvpSolution:
    """Round the exact coordinates A⁻¹x to the nearest integers, halves upward."""
    coords = solve_exact(A, x)
    z = tuple(math.floor(c + HALF) for c in coords)
    lam = A.matvec(z)
    return CvpSolution(z, lam, sq_dist(lam, x), "heuristic")


def qubo_identity_holds(Q: QuboMatrix, params: EncodingParams, A: IntMatrix, x_hat: Sequence[int],
                        assignments) -> bool:
    """evaluate(Q, v) + constant == ||A z(v) − x̂||² for every given assignment."""
    for v in assignments:
        _, lam = decode(v, params, A, Q.sign_mode or SignMode.DERIVED)
        if evaluate(Q, v) + Q.constant != sq_dist(lam, x_hat):
            return False
    return True


def _sample_assignments(N: int, samples: int, seed: int):
    rng = random.Random(seed)
    yield (0,) * N
    yield (1,) * N
    for _ in range(samples):
        yield tuple(rng.getrandbits(1) for _ in range(N))


def verify_solution(inst: CvpInstance, solution: CvpSolution, *,
                    mode: BoundMode | str = BoundMode.TIGHT,
                    sign_mode: SignMode | str = SignMode.DERIVED,
                    oracle: bool = True, radius: Optional[int] = None,
                    oracle_cap: int = DEFAULT_ORACLE_CAP,
                    samples: int = 64, seed: int = 0) -> VerifyReport:
    red = reduce_to_parallelepiped(inst)
    bounds = encoding_bits(inst, mode)
    params = EncodingParams(inst.n, bounds.m)
    Q = build_qubo(red, params, sign_mode)

    lattice_ok = len(solution.z) == inst.n and inst.A.matvec(solution.z) == tuple(solution.lambda_)
    true_dist = sq_dist(solution.lambda_, inst.x)
    identity_ok = qubo_identity_holds(Q, params, inst.A, red.x_hat,
                                      _sample_assignments(params.N, samples, seed))
    edge = 1 << bounds.m
    z_red = [a - b for a, b in zip(solution.z, red.floor_coords)]
    boundary = any(abs(c) == edge for c in z_red)

    oracle_d = matches = oracle_edge = None
    R = edge if radius is None else radius
    if oracle and (2 * R + 1) ** inst.n <= oracle_cap:
        best = cvp_oracle_enum(inst.A, red.x_hat, R, oracle_cap)
        oracle_d = best.dist_sq
        matches = lattice_ok and true_dist == oracle_d
        oracle_edge = any(abs(c) == edge for c in best.z)
    return VerifyReport(lattice_ok, true_dist == solution.dist_sq, identity_ok, oracle_d, matches,
                        boundary, oracle_edge, bounds.m)


def solve_cvp(inst: CvpInstance, mode: BoundMode | str = BoundMode.TIGHT,
              sign_mode: SignMode | str = SignMode.DERIVED, method: Optional[str] = None, *,
              schedule: AnnealSchedule = AnnealSchedule(), cap: int = DEFAULT_EXHAUSTIVE_CAP,
              oracle: bool = True, radius: Optional[int] = None,
              oracle_cap: int = DEFAULT_ORACLE_CAP, workers: int = 1) -> CvpRun:
    """reduce → bound → build → solve → decode, then verify against the oracle when feasible."""
    red = reduce_to_parallelepiped(inst)
    bounds = encoding_bits(inst, mode)
    params = EncodingParams(inst.n, bounds.m)
    Q = build_qubo(red, params, sign_mode)
    result = solve_qubo(Q, method, schedule, cap, workers)

    z_red, lam_red = decode(result.assignment, params, inst.A, sign_mode)
    z = tuple(a + b for a, b in zip(z_red, red.floor_coords))
    lam = tuple(a + b for a, b in zip(lam_red, red.lambda0))
    cert = "qubo-exhaustive" if result.proven_optimal else "heuristic"
    sol = CvpSolution(z, lam, sq_dist(lam, inst.x), cert)

    report = verify_solution(inst, sol, mode=mode, sign_mode=sign_mode, oracle=oracle,
                             radius=radius, oracle_cap=oracle_cap, seed=schedule.seed)
    if report.matches_oracle:
        sol = CvpSolution(z, lam, sol.dist_sq, "oracle-verified")
    return CvpRun(sol, report, bounds, result, Q.N, Q.size_s)
