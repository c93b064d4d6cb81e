import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvpqubo.lattice import CvpInstance, encoding_bits, reduce_to_parallelepiped
from cvpqubo.linalg import IntMatrix
from cvpqubo.pipeline import (
    CvpSolution,
    OracleRefused,
    babai_round,
    cvp_exact,
    cvp_oracle_enum,
    decode,
    encode,
    solve_cvp,
    verify_solution,
)
from cvpqubo.qubo import EncodingParams

from conftest import random_instances


def test_decode_examples():
    P = EncodingParams(2, 1)
    A = IntMatrix.identity(2)
    z, lam = decode((1, 0, 0, 1), P, A)
    assert z == (-1, 0) and lam == (-1, 0)
    P3 = EncodingParams(3, 2)
    top_only = tuple(1 if h >= 6 else 0 for h in range(P3.N))
    assert decode(top_only, P3, IntMatrix.identity(3))[0] == (0, 0, 0)
    z, lam = decode((0, 1), EncodingParams(1, 1), IntMatrix.from_rows([[2]]))
    assert z == (0,) and lam == (0,)
    with pytest.raises(ValueError):
        decode((0, 1, 1), EncodingParams(1, 1), IntMatrix.from_rows([[2]]))


def test_decode_verbatim_flips_sign():
    P = EncodingParams(2, 1)
    assert decode((1, 0, 0, 1), P, IntMatrix.identity(2), "verbatim")[0] == (1, 0)


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(0, 5), st.lists(st.integers(0, 2**6 - 1), min_size=n, max_size=n))),
    st.sampled_from(["derived", "verbatim"]))
def test_encode_decode_roundtrip(args, sign):
    n, m, raw = args
    P = EncodingParams(n, m)
    lo = -(2**m) if sign == "derived" else -(2**m) + 1
    z = tuple(lo + (r % 2 ** (m + 1)) for r in raw)
    assert decode(encode(z, P, sign), P, IntMatrix.identity(n), sign)[0] == z


def test_encode_out_of_range():
    with pytest.raises(ValueError):
        encode((2,), EncodingParams(1, 1))
    with pytest.raises(ValueError):
        encode((-2,), EncodingParams(1, 1), "verbatim")


def test_oracle_examples():
    s = cvp_oracle_enum(IntMatrix.identity(2), (0, 0), 1)
    assert s.z == (0, 0) and s.dist_sq == 0
    s = cvp_oracle_enum(IntMatrix.diag([2, 2]), (1, 1), 1)
    assert s.dist_sq == 2 and s.z == (0, 0)
    assert cvp_oracle_enum(IntMatrix.from_rows([[2]]), (1,), 2).dist_sq == 1


def test_oracle_cap():
    with pytest.raises(OracleRefused):
        cvp_oracle_enum(IntMatrix.identity(3), (0, 0, 0), 10, cap=1000)


def test_oracle_bigint_fallback():
    A = IntMatrix.from_rows([[2**40, 1], [0, 2**40]])
    s = cvp_oracle_enum(A, (2**40 + 5, -(2**40)), 2)
    assert s.z == (1, -1) and s.dist_sq == 6 * 6


@pytest.mark.parametrize("inst", random_instances(31, 30, ns=(1, 2, 3), target=50))
def test_exact_oracle_agrees_with_box(inst):
    red = reduce_to_parallelepiped(inst)
    R = 1 << encoding_bits(inst).m
    assert cvp_exact(inst.A, red.x_hat).dist_sq == cvp_oracle_enum(inst.A, red.x_hat, R).dist_sq


def test_babai_examples():
    s = babai_round(IntMatrix.identity(2), (5, -3))
    assert s.z == (5, -3) and s.dist_sq == 0
    s = babai_round(IntMatrix.diag([2, 2]), (1, 1))
    assert s.z == (1, 1) and s.lambda_ == (2, 2) and s.dist_sq == 2
    s = babai_round(IntMatrix.from_rows([[2]]), (1,))
    assert s.z == (1,) and s.lambda_ == (2,) and s.dist_sq == 1
    assert s.certificate == "heuristic"


@pytest.mark.parametrize("inst", random_instances(32, 30, ns=(1, 2, 3), target=50))
def test_babai_upper_bounds_oracle(inst):
    assert babai_round(inst.A, inst.x).dist_sq >= cvp_exact(inst.A, inst.x).dist_sq


@given(st.lists(st.integers(1, 7), min_size=1, max_size=3), st.lists(st.integers(-30, 30), min_size=3, max_size=3))
def test_babai_exact_on_diagonal(d, x):
    A = IntMatrix.diag(d)
    x = x[:len(d)]
    assert babai_round(A, x).dist_sq == cvp_exact(A, x).dist_sq


def test_solve_cvp_examples():
    run = solve_cvp(CvpInstance.from_lists(IntMatrix.identity(3).tolist(), [7, -2, 4]))
    assert run.solution.dist_sq == 0 and run.solution.lambda_ == (7, -2, 4)
    run = solve_cvp(CvpInstance.from_lists(IntMatrix.diag([2, 2, 2]).tolist(), [1, 1, 1]))
    assert run.solution.dist_sq == 3 and run.report.matches_oracle
    run = solve_cvp(CvpInstance.from_lists([[2]], [1]))
    assert run.solution.dist_sq == 1
    assert run.solution.certificate == "oracle-verified"
    assert run.qubo_N == 2 and run.solve.proven_optimal


def test_solve_cvp_paper_mode():
    run = solve_cvp(CvpInstance.from_lists(IntMatrix.identity(3).tolist(), [3, 0, -1]), "paper")
    assert run.bounds.m == 5 and run.qubo_N == 18 and run.solution.dist_sq == 0


def test_solve_cvp_sa():
    inst = CvpInstance.from_lists([[2, 1], [-1, 3]], [5, 4])
    run = solve_cvp(inst, method="sa")
    assert run.solution.dist_sq == cvp_exact(inst.A, inst.x).dist_sq
    assert run.solve.method == "sa"


@pytest.mark.parametrize("inst", random_instances(33, 15, ns=(1, 2, 3)))
def test_translation_invariance(inst):
    rng = random.Random(inst.det)
    w = [rng.randint(-5, 5) for _ in range(inst.n)]
    moved = CvpInstance(inst.A, tuple(a + b for a, b in zip(inst.x, inst.A.matvec(w))))
    assert solve_cvp(inst, oracle=False).solution.dist_sq == solve_cvp(moved, oracle=False).solution.dist_sq


@pytest.mark.parametrize("inst", random_instances(34, 20, ns=(1, 2, 3)))
def test_sign_modes_agree(inst):
    a = solve_cvp(inst, sign_mode="derived")
    b = solve_cvp(inst, sign_mode="verbatim")
    if a.report.oracle_boundary_hit:
        pytest.skip("oracle optimum on the encoding range edge")
    assert a.solution.dist_sq == b.solution.dist_sq == a.report.oracle_dist_sq


def test_verify_tampered_lambda():
    inst = CvpInstance.from_lists([[2]], [1])
    good = solve_cvp(inst).solution
    bad = CvpSolution(good.z, (good.lambda_[0] + 4,), good.dist_sq, good.certificate)
    rep = verify_solution(inst, bad)
    assert rep.qubo_identity_ok
    assert not rep.lattice_ok and not rep.dist_sq_ok and not rep.passed


def test_verify_matches_oracle():
    inst = CvpInstance.from_lists([[2]], [1])
    rep = verify_solution(inst, solve_cvp(inst).solution, radius=2)
    assert rep.matches_oracle is True and rep.oracle_dist_sq == 1 and rep.passed


def test_verify_flags_range_edge():
    inst = CvpInstance.from_lists(IntMatrix.identity(2).tolist(), [0, 0])
    m = encoding_bits(inst).m
    z = (2**m, 0)
    sol = CvpSolution(z, z, 2**(2 * m), "heuristic")
    rep = verify_solution(inst, sol)
    assert rep.range_boundary_hit
    assert rep.matches_oracle is False and not rep.passed


def test_verify_without_oracle():
    inst = CvpInstance.from_lists([[2]], [1])
    rep = verify_solution(inst, solve_cvp(inst).solution, oracle=False)
    assert rep.oracle_dist_sq is None and rep.matches_oracle is None and rep.passed
