"""CVP instances, parallelepiped reduction and the bit-width bounds."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .linalg import (
    DimensionError,
    IntMatrix,
    SingularMatrixError,
    det_exact,
    frobenius_sq,
    solve_exact,
)


class BoundMode(str, enum.Enum):
    PAPER = "paper"
    TIGHT = "tight"


class UnsupportedModeError(ValueError):
    pass


def max_abs_entry(A: IntMatrix) -> int:
    return max(abs(a) for a in A.entries())


@dataclass(frozen=True)
class CvpInstance:
    A: IntMatrix
    x: tuple[int, ...]
    name: Optional[str] = None
    det: int = field(init=False)

    def __post_init__(self):
        if not self.A.is_square:
            raise DimensionError("basis matrix must be square")
        if len(self.x) != self.A.rows:
            raise DimensionError(f"target has length {len(self.x)}, expected {self.A.rows}")
        object.__setattr__(self, "x", tuple(int(t) for t in self.x))
        d = det_exact(self.A)
        if d == 0:
            raise SingularMatrixError("basis matrix is singular")
        object.__setattr__(self, "det", d)

    @classmethod
    def from_lists(cls, A, x, name=None) -> "CvpInstance":
        return cls(IntMatrix.from_rows(A), tuple(x), name)

    @property
    def n(self) -> int:
        return self.A.rows

    @property
    def b(self) -> int:
        return max_abs_entry(self.A)


@dataclass(frozen=True)
class ReducedInstance:
    base: CvpInstance
    x_hat: tuple[int, ...]
    lambda0: tuple[int, ...]
    floor_coords: tuple[int, ...]
    coords: tuple[Fraction, ...]  # coordinates of x in the basis A

    @property
    def A(self) -> IntMatrix:
        return self.base.A

    @property
    def n(self) -> int:
        return self.base.n


def reduce_to_parallelepiped(inst: CvpInstance) -> ReducedInstance:
    """Translate the target by a lattice vector into the fundamental parallelepiped.

    Writes x = Σ c_i a_i, removes λ0 = Σ ⌊c_i⌋ a_i and keeps x̂ = x − λ0,
    whose coordinates c_i − ⌊c_i⌋ all lie in [0, 1).
    """
    coords = solve_exact(inst.A, inst.x)
    floors = tuple(math.floor(c) for c in coords)
    lambda0 = inst.A.matvec(floors)
    x_hat = tuple(a - b for a, b in zip(inst.x, lambda0))
    return ReducedInstance(inst, x_hat, lambda0, floors, coords)


def kappa_bound_sq(A: IntMatrix) -> Fraction:
    """Square of the determinant/Frobenius upper bound on the condition number.

    κ(A)² ≤ 4/det(A)² · (‖A‖_F² / n)ⁿ
    """
    if not A.is_square:
        raise DimensionError("kappa bound needs a square matrix")
    n = A.rows
    d = det_exact(A)
    if d == 0:
        raise SingularMatrixError("matrix is singular")
    return Fraction(4, d * d) * Fraction(frobenius_sq(A), n) ** n


def ceil_log2(value: int | Fraction) -> int:
    """Least m ≥ 0 with 2^m ≥ value."""
    if value <= 1:
        return 0
    v = Fraction(value)
    c = -(-v.numerator // v.denominator)
    return (c - 1).bit_length()


def sqrt_upper(q: Fraction, bits: int = 64) -> Fraction:
    """Rational upper bound on √q; exact whenever q is a rational square."""
    if q < 0:
        raise ValueError("negative radicand")
    num, den = q.numerator, q.denominator
    prod = num * den
    r = math.isqrt(prod)
    if r * r == prod:
        return Fraction(r, den)
    scaled = prod << (2 * bits)
    return Fraction(math.isqrt(scaled) + 1, den << bits)


@dataclass(frozen=True)
class BoundReport:
    kappa_sq_upper: Fraction
    z_norm_sq_upper: Fraction
    m_paper: Optional[int]
    m_tight: int
    mode_used: BoundMode

    @property
    def m(self) -> int:
        return self.m_paper if self.mode_used is BoundMode.PAPER else self.m_tight


def paper_bits(n: int, b: int) -> int:
    """⌈n(log₂ n + log₂ b)⌉, computed as ⌈log₂((n·b)ⁿ)⌉ in integers."""
    return ceil_log2((n * b) ** n)


def tight_bits(n: int, kappa_sq: Fraction) -> int:
    """Least m with 2^m ≥ (κ̄/2 + 1)·√n, where κ̄ = √kappa_sq.

    Squared, the test is 4^m − n(κ̄²/4 + 1) ≥ n·κ̄; both sides are compared
    after squaring once more so no irrational value is ever formed.
    """
    base = n * (kappa_sq / 4 + 1)
    rhs_sq = n * n * kappa_sq
    m = 0
    while True:
        lhs = 4**m - base
        if lhs >= 0 and lhs * lhs >= rhs_sq:
            return m
        m += 1


def encoding_bits(inst: CvpInstance, mode: BoundMode | str = BoundMode.TIGHT) -> BoundReport:
    mode = BoundMode(mode)
    n, b = inst.n, inst.b
    if mode is BoundMode.PAPER and n < 3:
        raise UnsupportedModeError(f"paper bit-width bound needs n >= 3, got n = {n}")
    k2 = kappa_bound_sq(inst.A)
    kappa_up = sqrt_upper(k2)
    z_sq = n * (kappa_up / 2 + 1) ** 2
    m_paper = paper_bits(n, b) if n >= 3 else None
    return BoundReport(k2, z_sq, m_paper, tight_bits(n, k2), mode)


def sq_dist(u: Sequence[int], v: Sequence[int]) -> int:
    return sum((a - b) ** 2 for a, b in zip(u, v))
