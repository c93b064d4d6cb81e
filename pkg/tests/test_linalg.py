from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvpqubo.linalg import (
    DimensionError,
    IntMatrix,
    SingularMatrixError,
    adjugate,
    det_exact,
    frobenius_sq,
    gram,
    solve_exact,
)


def cofactor_det(rows):
    # independent oracle: Laplace expansion along the first row
    if len(rows) == 1:
        return rows[0][0]
    total = 0
    for j, a in enumerate(rows[0]):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        total += (-1) ** j * a * cofactor_det(minor)
    return total


def square(max_n, lo=-5, hi=5, min_n=1):
    return st.integers(min_n, max_n).flatmap(
        lambda n: st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n)
    )


@pytest.mark.parametrize("rows, expected", [
    ([[2, 0], [0, 3]], 6),
    ([[1 if i == j else 0 for j in range(4)] for i in range(4)], 1),
    ([[1, 2], [3, 4]], -2),
    ([[0, 1], [1, 0]], -1),
    ([[1, 2], [2, 4]], 0),
])
def test_det_examples(rows, expected):
    assert det_exact(IntMatrix.from_rows(rows)) == expected


def test_det_rejects_non_square():
    with pytest.raises(DimensionError):
        det_exact(IntMatrix.from_rows([[1, 2, 3], [4, 5, 6]]))


def test_det_large_entries_exact():
    big = 2**200
    M = IntMatrix.from_rows([[big, 1], [1, big]])
    assert det_exact(M) == big * big - 1


@given(square(4))
def test_det_matches_cofactor(rows):
    assert det_exact(IntMatrix.from_rows(rows)) == cofactor_det(rows)


@given(square(4))
def test_adjugate_identity(rows):
    A = IntMatrix.from_rows(rows)
    d = det_exact(A)
    n = A.rows
    assert adjugate(A).matmul(A).data == tuple(tuple(d if i == j else 0 for j in range(n)) for i in range(n))


def test_gram_examples():
    assert gram(IntMatrix.identity(3)) == IntMatrix.identity(3)
    assert gram(IntMatrix.diag([2, 2])).tolist() == [[4, 0], [0, 4]]
    A = IntMatrix.from_rows([[1, 1], [0, 1]])
    assert gram(A).tolist() == [[1, 1], [1, 2]]
    assert gram(A) == A.transpose().matmul(A)


@given(square(5), st.lists(st.integers(-20, 20), min_size=5, max_size=5))
def test_gram_symmetric_psd(rows, v):
    G = gram(IntMatrix.from_rows(rows))
    assert G == G.transpose()
    v = v[:G.rows]
    assert sum(v[i] * G[i, k] * v[k] for i in range(G.rows) for k in range(G.rows)) >= 0


def test_frobenius_sq():
    assert frobenius_sq(IntMatrix.identity(3)) == 3
    assert frobenius_sq(IntMatrix.from_rows([[0, 0], [0, 0]])) == 0
    assert frobenius_sq(IntMatrix.from_rows([[1, 2], [3, 4]])) == 30


def test_solve_examples():
    assert solve_exact(IntMatrix.identity(2), [5, -3]) == (5, -3)
    assert solve_exact(IntMatrix.diag([2, 2]), [3, 1]) == (Fraction(3, 2), Fraction(1, 2))
    assert solve_exact(IntMatrix.from_rows([[1, 1], [0, 1]]), [1, 1]) == (0, 1)


def test_solve_needs_pivoting():
    A = IntMatrix.from_rows([[0, 1, 2], [1, 0, 3], [4, -3, 8]])
    c = solve_exact(A, [1, 2, 3])
    assert tuple(sum(a * ci for a, ci in zip(row, c)) for row in A.data) == (1, 2, 3)


def test_solve_singular():
    with pytest.raises(SingularMatrixError):
        solve_exact(IntMatrix.from_rows([[1, 2], [2, 4]]), [1, 1])


@settings(max_examples=150)
@given(square(6, -9, 9), st.lists(st.integers(-50, 50), min_size=6, max_size=6))
def test_solve_roundtrip(rows, x):
    A = IntMatrix.from_rows(rows)
    x = x[:A.rows]
    if det_exact(A) == 0:
        with pytest.raises(SingularMatrixError):
            solve_exact(A, x)
        return
    c = solve_exact(A, x)
    assert all(isinstance(ci, Fraction) or isinstance(ci, int) for ci in c)
    assert tuple(sum(a * ci for a, ci in zip(row, c)) for row in A.data) == tuple(x)


def test_matrix_shape_checks():
    with pytest.raises(DimensionError):
        IntMatrix.from_rows([[1, 2], [3]])
    with pytest.raises(DimensionError):
        IntMatrix.from_rows([])
    with pytest.raises(DimensionError):
        IntMatrix.identity(2).matvec([1, 2, 3])
