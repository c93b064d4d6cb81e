"""Desk-scale QUBO minimisation.

``solve_exhaustive`` is exact: it walks the leading bits in Gray-code order
and evaluates every completion of the trailing bits at once with numpy.
``solve_sa`` is a seeded simulated-annealing heuristic driven by exact
integer flip deltas.  Ties are always broken towards the lexicographically
smallest bit string (first bit most significant).
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .linalg import DimensionError
from .qubo import QuboMatrix, evaluate

DEFAULT_EXHAUSTIVE_CAP = 26
_BLOCK_BITS = 16
_BLOCK_BITS_BIGINT = 10


class SolverRefused(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveResult:
    assignment: tuple[int, ...]
    value: int
    method: str
    proven_optimal: bool
    evaluations: int
    wall_time: float


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric-cooling schedule.

    ``initial_temperature=None`` scales the start temperature to the largest
    possible single-flip change of the given QUBO; ``cooling=None`` picks the
    factor that brings it down to ``final_temperature`` over ``sweeps``.
    """

    initial_temperature: Optional[Fraction] = None
    cooling: Optional[Fraction] = None
    sweeps: int = 300
    restarts: int = 8
    seed: int = 0
    final_temperature: Fraction = Fraction(1, 4)

    def __post_init__(self):
        if self.sweeps < 1 or self.restarts < 1:
            raise ValueError("sweeps and restarts must be >= 1")
        if self.initial_temperature is not None and self.initial_temperature <= 0:
            raise ValueError("initial temperature must be positive")
        if self.cooling is not None and not 0 < self.cooling < 1:
            raise ValueError("cooling factor must lie in (0, 1)")

    def resolve(self, Q: QuboMatrix) -> "AnnealSchedule":
        t0 = self.initial_temperature
        if t0 is None:
            spread = max((abs(row[h]) + sum(2 * abs(a) for r, a in enumerate(row) if r != h)
                          for h, row in enumerate(Q.q)), default=1)
            t0 = Fraction(max(spread, 1), 2)
        cooling = self.cooling
        if cooling is None:
            ratio = float(self.final_temperature / t0)
            c = ratio ** (1.0 / self.sweeps) if ratio < 1 else 0.99
            cooling = Fraction(c).limit_denominator(10**9)
            if not 0 < cooling < 1:
                cooling = Fraction(99, 100)
        return replace(self, initial_temperature=Fraction(t0), cooling=cooling)


def _check_bits(Q: QuboMatrix, v: Sequence[int]) -> None:
    if len(v) != Q.N:
        raise DimensionError(f"assignment has length {len(v)}, QUBO has N={Q.N}")


def flip_delta(Q: QuboMatrix, v: Sequence[int], h: int) -> int:
    """evaluate(Q, v with bit h flipped) − evaluate(Q, v); ``h`` is 1-based."""
    _check_bits(Q, v)
    if not 1 <= h <= Q.N:
        raise IndexError(f"bit index {h} outside 1..{Q.N}")
    k = h - 1
    row = Q.q[k]
    field = row[k] + sum(2 * row[r] for r, bit in enumerate(v) if bit and r != k)
    return field if not v[k] else -field


def _lex_key(bits: np.ndarray) -> int:
    key = 0
    for b in bits:
        key = (key << 1) | int(b)
    return key


def solve_exhaustive(Q: QuboMatrix, cap: int = DEFAULT_EXHAUSTIVE_CAP) -> SolveResult:
    N = Q.N
    if N > cap:
        raise SolverRefused(
            f"exhaustive search over N={N} variables exceeds the cap of {cap}; "
            "use simulated annealing (--method sa) or raise the cap"
        )
    start = time.perf_counter()
    if N == 0:
        return SolveResult((), 0, "exhaustive", True, 1, 0.0)

    arr = Q.as_array()
    L = min(N, _BLOCK_BITS if arr.dtype != object else _BLOCK_BITS_BIGINT)
    H = N - L
    # trailing L bits, enumerated in counting order (first trailing bit is MSB)
    idx = np.arange(1 << L, dtype=np.int64)
    low = ((idx[:, None] >> np.arange(L - 1, -1, -1)) & 1).astype(arr.dtype)
    Q_LL = arr[H:, H:]
    Q_LH = arr[H:, :H]
    low_val = np.einsum("ki,ij,kj->k", low, Q_LL, low) if arr.dtype != object else \
        ((low @ Q_LL) * low).sum(axis=1)
    cross = 2 * (low @ Q_LH) if H else None

    high = np.zeros(H, dtype=np.int64)
    lin = np.zeros(1 << L, dtype=arr.dtype)
    high_val = 0
    best_val = best_key = best_bits = None
    high_rows = [list(map(int, arr[h, :H])) for h in range(H)]
    for g in range(1 << H):
        if g:
            b = (g & -g).bit_length() - 1  # Gray code: flip bit b of the leading block
            pos = H - 1 - b
            row = high_rows[pos]
            field = row[pos] + sum(2 * row[r] for r in range(H) if high[r] and r != pos)
            if high[pos]:
                high_val -= field
                lin = lin - cross[:, pos]
                high[pos] = 0
            else:
                high_val += field
                lin = lin + cross[:, pos]
                high[pos] = 1
        vals = low_val + lin
        k = int(np.argmin(vals))
        val = int(vals[k]) + high_val
        key = (_lex_key(high) << L) | k
        if best_val is None or val < best_val or (val == best_val and key < best_key):
            best_val, best_key = val, key
            best_bits = tuple(int(t) for t in high) + tuple(int(t) for t in low[k])

    value = evaluate(Q, best_bits)
    if value != best_val:
        raise AssertionError("exhaustive search value disagrees with exact evaluation")
    return SolveResult(best_bits, value, "exhaustive", True, 1 << N, time.perf_counter() - start)


def _anneal_once(q: tuple[tuple[int, ...], ...], t0: float, cooling: float, sweeps: int,
                 seed: int) -> tuple[int, tuple[int, ...], int]:
    N = len(q)
    rng = np.random.default_rng(seed)
    v = [int(b) for b in rng.integers(0, 2, size=N)]
    # field[h] = q_hh + Σ_{r≠h} 2 q_hr v_r, so flipping h changes the value by ±field[h]
    field = [q[h][h] + sum(2 * q[h][r] for r in range(N) if v[r] and r != h) for h in range(N)]
    value = sum(q[h][r] for h in range(N) if v[h] for r in range(N) if v[r])
    best_value, best = value, tuple(v)
    evals = 0
    T = t0
    for _ in range(sweeps):
        order = rng.permutation(N).tolist()
        noise = (-np.log(rng.random(N))).tolist()
        for step in range(N):
            h = order[step]
            delta = field[h] if not v[h] else -field[h]
            evals += 1
            if delta <= 0 or delta < T * noise[step]:
                sgn = 1 if not v[h] else -1
                v[h] ^= 1
                value += delta
                row = q[h]
                for r in range(N):
                    if r != h:
                        field[r] += 2 * sgn * row[r]
                if value < best_value or (value == best_value and tuple(v) < best):
                    best_value, best = value, tuple(v)
        T *= cooling

    # greedy descent from the best state seen
    v = list(best)
    field = [q[h][h] + sum(2 * q[h][r] for r in range(N) if v[r] and r != h) for h in range(N)]
    value = best_value
    improved = True
    while improved:
        improved = False
        for h in range(N):
            delta = field[h] if not v[h] else -field[h]
            evals += 1
            if delta < 0:
                sgn = 1 if not v[h] else -1
                v[h] ^= 1
                value += delta
                for r in range(N):
                    if r != h:
                        field[r] += 2 * sgn * q[h][r]
                improved = True
    if value < best_value:
        best_value, best = value, tuple(v)
    return best_value, best, evals


def solve_sa(Q: QuboMatrix, schedule: AnnealSchedule = AnnealSchedule(), workers: int = 1) -> SolveResult:
    start = time.perf_counter()
    if Q.N == 0:
        return SolveResult((), 0, "sa", False, 0, 0.0)
    sched = schedule.resolve(Q)
    args = [(Q.q, float(sched.initial_temperature), float(sched.cooling), sched.sweeps, sched.seed + k)
            for k in range(sched.restarts)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_anneal_once, *zip(*args)))
    else:
        runs = [_anneal_once(*a) for a in args]
    best_value, best, _ = min(runs, key=lambda r: (r[0], r[1]))
    value = evaluate(Q, best)
    if value != best_value:
        raise AssertionError("annealer bookkeeping disagrees with exact evaluation")
    return SolveResult(best, value, "sa", False, sum(r[2] for r in runs), time.perf_counter() - start)


def solve_qubo(Q: QuboMatrix, method: Optional[str] = None, schedule: AnnealSchedule = AnnealSchedule(),
               cap: int = DEFAULT_EXHAUSTIVE_CAP, workers: int = 1) -> SolveResult:
    """Dispatch on ``method``; ``None`` means exhaustive when N ≤ cap, else SA."""
    if method is None:
        method = "exhaustive" if Q.N <= cap else "sa"
    if method == "exhaustive":
        return solve_exhaustive(Q, cap)
    if method == "sa":
        return solve_sa(Q, schedule, workers)
    raise ValueError(f"unknown solver method {method!r}")
