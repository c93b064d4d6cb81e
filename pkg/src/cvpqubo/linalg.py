"""Exact integer / rational linear algebra.

Everything here works on Python ints and :class:`fractions.Fraction`, so no
value in the correctness path ever touches floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

RationalVector = tuple[Fraction, ...]


class DimensionError(ValueError):
    pass


class SingularMatrixError(ValueError):
    pass


@dataclass(frozen=True)
class IntMatrix:
    """Immutable dense integer matrix, stored as a tuple of row tuples."""

    data: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.data or not self.data[0]:
            raise DimensionError("matrix must have at least one row and one column")
        width = len(self.data[0])
        if any(len(row) != width for row in self.data):
            raise DimensionError("ragged rows")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(int(a) for a in row) for row in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def diag(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(tuple(tuple(int(values[i]) if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return len(self.data)

    @property
    def cols(self) -> int:
        return len(self.data[0])

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    def entries(self) -> list[int]:
        """Row-major entry list."""
        return [a for row in self.data for a in row]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.data)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.data)))

    def matvec(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.cols:
            raise DimensionError(f"vector length {len(v)} != {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.data)

    def matmul(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionError("inner dimensions differ")
        cols = list(zip(*other.data))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(row, c)) for c in cols) for row in self.data))

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self.data]


def _require_square(M: IntMatrix) -> int:
    if not M.is_square:
        raise DimensionError(f"expected a square matrix, got {M.rows}x{M.cols}")
    return M.rows


def _bareiss(rows: list[list[int]], n: int) -> tuple[list[list[int]], int]:
    """Fraction-free forward elimination on the first ``n`` columns, in place.

    Returns the echelon rows and the sign from row swaps.  After elimination
    ``rows[n-1][n-1]`` is the determinant times that sign.  Raises
    SingularMatrixError when no nonzero pivot exists in some column.
    """
    sign = 1
    prev = 1
    for k in range(n):
        if rows[k][k] == 0:
            for i in range(k + 1, n):
                if rows[i][k] != 0:
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                raise SingularMatrixError("matrix is singular")
        pivot = rows[k][k]
        rk = rows[k]
        for i in range(k + 1, n):
            ri = rows[i]
            lead = ri[k]
            for j in range(k + 1, len(ri)):
                # exact by Sylvester's identity
                ri[j] = (pivot * ri[j] - lead * rk[j]) // prev
            ri[k] = 0
        prev = pivot
    return rows, sign


def det_exact(M: IntMatrix) -> int:
    n = _require_square(M)
    rows = [list(r) for r in M.data]
    try:
        rows, sign = _bareiss(rows, n)
    except SingularMatrixError:
        return 0
    return sign * rows[n - 1][n - 1]


def gram(A: IntMatrix) -> IntMatrix:
    """AᵀA."""
    cols = [A.column(j) for j in range(A.cols)]
    out = [[0] * A.cols for _ in range(A.cols)]
    for i in range(A.cols):
        for k in range(i, A.cols):
            s = sum(a * b for a, b in zip(cols[i], cols[k]))
            out[i][k] = out[k][i] = s
    return IntMatrix.from_rows(out)


def frobenius_sq(A: IntMatrix) -> int:
    return sum(a * a for a in A.entries())


def solve_exact(A: IntMatrix, x: Sequence[int]) -> RationalVector:
    """Return the unique rational c with A·c = x."""
    n = _require_square(A)
    if len(x) != n:
        raise DimensionError(f"right-hand side has length {len(x)}, expected {n}")
    rows = [list(r) + [int(x[i])] for i, r in enumerate(A.data)]
    rows, _ = _bareiss(rows, n)
    c: list[Fraction] = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(rows[i][n])
        for j in range(i + 1, n):
            acc -= rows[i][j] * c[j]
        c[i] = acc / rows[i][i]
    return tuple(c)


def adjugate(A: IntMatrix) -> IntMatrix:
    """Classical adjoint via cofactors; only meant for small matrices."""
    n = _require_square(A)
    if n == 1:
        return IntMatrix(((1,),))
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = IntMatrix(tuple(
                tuple(A.data[r][c] for c in range(n) if c != j) for r in range(n) if r != i
            ))
            out[j][i] = (-1) ** (i + j) * det_exact(minor)
    return IntMatrix.from_rows(out)
