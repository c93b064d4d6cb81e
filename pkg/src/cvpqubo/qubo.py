"""Q-matrix construction for the CVP encoding, plus QUBO file formats.

Bit ``j`` of coordinate ``i`` (1-based ``i``, 0 ≤ j ≤ m) lives at position
``h = j·n + i`` of the binary vector, so the low-order bits of every
coordinate come first.  Coordinates are recovered as ``z = Bp − u`` with
``p = (1, 2, …, 2^m)`` and ``u = (2^m, …, 2^m)``.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .lattice import ReducedInstance
from .linalg import DimensionError, gram

FORMAT_VERSION = 1


class SignMode(str, enum.Enum):
    # z = Bp − u, target term enters with −2 x̂ᵀA Bp
    DERIVED = "derived"
    # target term enters the diagonal as +2^{j+1} Σ x̂_t a_ti; pairs with z = u − Bp
    VERBATIM = "verbatim"


class QuboFormatError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


@dataclass(frozen=True)
class EncodingParams:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 1 or self.m < 0:
            raise ValueError(f"invalid encoding parameters n={self.n}, m={self.m}")

    @property
    def N(self) -> int:
        return self.n * (self.m + 1)

    @property
    def u(self) -> tuple[int, ...]:
        return (1 << self.m,) * self.n

    @property
    def p(self) -> tuple[int, ...]:
        return tuple(1 << j for j in range(self.m + 1))


def index_of(i: int, j: int, n: int, m: Optional[int] = None) -> int:
    """1-based position h = j·n + i of bit j of coordinate i."""
    if not 1 <= i <= n:
        raise IndexError(f"coordinate index {i} outside 1..{n}")
    if j < 0 or (m is not None and j > m):
        raise IndexError(f"bit index {j} outside 0..{m}")
    return j * n + i


def position_of(h: int, n: int) -> tuple[int, int]:
    """Inverse of :func:`index_of`: h ↦ (i, j)."""
    if h < 1:
        raise IndexError(f"position {h} must be >= 1")
    j, i0 = divmod(h - 1, n)
    return i0 + 1, j


@dataclass(frozen=True)
class QuboMatrix:
    q: tuple[tuple[int, ...], ...]
    constant: int = 0
    sign_mode: Optional[SignMode] = None
    n: Optional[int] = None
    m: Optional[int] = None

    def __post_init__(self):
        N = len(self.q)
        if any(len(row) != N for row in self.q):
            raise DimensionError("QUBO matrix must be square")
        for h in range(N):
            for r in range(h + 1, N):
                if self.q[h][r] != self.q[r][h]:
                    raise ValueError(f"QUBO matrix not symmetric at ({h + 1}, {r + 1})")

    @classmethod
    def from_rows(cls, rows, constant=0, sign_mode=None, n=None, m=None) -> "QuboMatrix":
        mode = SignMode(sign_mode) if sign_mode is not None else None
        return cls(tuple(tuple(int(a) for a in row) for row in rows), int(constant), mode, n, m)

    @property
    def N(self) -> int:
        return len(self.q)

    @property
    def size_s(self) -> int:
        return max((abs(a) for row in self.q for a in row), default=0)

    def as_array(self) -> np.ndarray:
        """Dense numpy copy: int64 when no sum vᵀQv can overflow, else object."""
        if self.N == 0:
            return np.zeros((0, 0), dtype=np.int64)
        if self.size_s * self.N * self.N < 2**62:
            return np.array(self.q, dtype=np.int64)
        return np.array(self.q, dtype=object)


def build_qubo(red: ReducedInstance, params: EncodingParams,
               sign_mode: SignMode | str = SignMode.DERIVED) -> QuboMatrix:
    sign_mode = SignMode(sign_mode)
    A, x_hat, n, m = red.A, red.x_hat, red.n, params.m
    if params.n != n:
        raise DimensionError(f"encoding is for n={params.n}, instance has n={n}")
    G = gram(A).data
    col_sums = [sum(G[t][i] for t in range(n)) for i in range(n)]
    xa = [sum(x_hat[t] * A[t, i] for t in range(n)) for i in range(n)]
    sigma = -1 if sign_mode is SignMode.DERIVED else 1

    N = params.N
    q = [[0] * N for _ in range(N)]
    for h in range(N):
        j, i = divmod(h, n)
        for r in range(h + 1, N):
            l, k = divmod(r, n)
            q[h][r] = q[r][h] = (G[i][k] << (j + l))
        q[h][h] = (G[i][i] << (2 * j)) - (col_sums[i] << (m + j + 1)) + sigma * (xa[i] << (j + 1))

    uGu = sum(col_sums) << (2 * m)
    xAu = sum(xa) << m
    constant = uGu - 2 * sigma * xAu + sum(t * t for t in x_hat)
    return QuboMatrix(tuple(map(tuple, q)), constant, sign_mode, n, m)


def evaluate(Q: QuboMatrix, v: Sequence[int]) -> int:
    """vᵀQv over the full symmetric matrix."""
    if len(v) != Q.N:
        raise DimensionError(f"assignment has length {len(v)}, QUBO has N={Q.N}")
    on = [h for h, bit in enumerate(v) if bit]
    return sum(Q.q[h][r] for h in on for r in on)


# ---------------------------------------------------------------- file formats

def _mode_str(Q: QuboMatrix) -> Optional[str]:
    return Q.sign_mode.value if Q.sign_mode is not None else None


def export_qubo(Q: QuboMatrix, fmt: str = "qubo-lines") -> bytes:
    if fmt == "json":
        doc = {
            "format_version": FORMAT_VERSION,
            "n": Q.n,
            "m": Q.m,
            "N": Q.N,
            "mode": _mode_str(Q),
            "constant": str(Q.constant),
            "q": [[str(a) for a in row] for row in Q.q],
        }
        return (json.dumps(doc, indent=1) + "\n").encode()
    if fmt != "qubo-lines":
        raise ValueError(f"unknown QUBO format {fmt!r}")

    entries = []
    for h in range(Q.N):
        if Q.q[h][h]:
            entries.append(f"{h + 1} {h + 1} {Q.q[h][h]}")
        for r in range(h + 1, Q.N):
            w = Q.q[h][r] + Q.q[r][h]
            if w:
                entries.append(f"{h + 1} {r + 1} {w}")
    lines = [f"p qubo {Q.N} {len(entries)}", f"c constant {Q.constant}"]
    if Q.sign_mode is not None:
        lines.append(f"c mode {Q.sign_mode.value}")
    if Q.n is not None and Q.m is not None:
        lines.append(f"c params {Q.n} {Q.m}")
    lines.extend(entries)
    return ("\n".join(lines) + "\n").encode()


def _import_json(text: str) -> QuboMatrix:
    try:
        doc = json.loads(text)
        rows = [[int(a) for a in row] for row in doc["q"]]
        N = int(doc.get("N", len(rows)))
        if N != len(rows):
            raise QuboFormatError(f"N={N} but q has {len(rows)} rows")
        n = doc.get("n")
        m = doc.get("m")
        return QuboMatrix.from_rows(
            rows,
            int(doc.get("constant", 0)),
            doc.get("mode"),
            int(n) if n is not None else None,
            int(m) if m is not None else None,
        )
    except QuboFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise QuboFormatError(f"bad QUBO JSON: {exc}") from exc


def _import_lines(text: str) -> QuboMatrix:
    N = nnz = None
    constant, mode, n, m = 0, None, None, None
    q: list[list[int]] = []
    seen = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "p":
                if N is not None:
                    raise QuboFormatError("duplicate header", lineno)
                if len(parts) != 4 or parts[1] != "qubo":
                    raise QuboFormatError("header must be 'p qubo <N> <nnz>'", lineno)
                N, nnz = int(parts[2]), int(parts[3])
                q = [[0] * N for _ in range(N)]
            elif parts[0] == "c":
                key = parts[1] if len(parts) > 1 else ""
                if key == "constant" and len(parts) == 3:
                    constant = int(parts[2])
                elif key == "mode" and len(parts) == 3:
                    mode = SignMode(parts[2])
                elif key == "params" and len(parts) == 4:
                    n, m = int(parts[2]), int(parts[3])
                # any other 'c' line is a free-form comment
            else:
                if N is None:
                    raise QuboFormatError("entry before 'p qubo' header", lineno)
                if len(parts) != 3:
                    raise QuboFormatError("entry must be '<h> <r> <value>'", lineno)
                h, r, w = int(parts[0]), int(parts[1]), int(parts[2])
                if not 1 <= h <= r <= N:
                    raise QuboFormatError(f"entry ({h}, {r}) violates 1 <= h <= r <= {N}", lineno)
                h -= 1
                r -= 1
                if h == r:
                    q[h][h] += w
                else:
                    if w % 2:
                        raise QuboFormatError("odd off-diagonal value cannot be split symmetrically", lineno)
                    q[h][r] += w // 2
                    q[r][h] += w // 2
                seen += 1
        except QuboFormatError:
            raise
        except ValueError as exc:
            raise QuboFormatError(str(exc), lineno) from exc
    if N is None:
        raise QuboFormatError("missing 'p qubo' header")
    if seen != nnz:
        raise QuboFormatError(f"header announces {nnz} entries, found {seen}")
    return QuboMatrix.from_rows(q, constant, mode, n, m)


def import_qubo(data: bytes | str) -> QuboMatrix:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if text.lstrip().startswith("{"):
        return _import_json(text)
    return _import_lines(text)
