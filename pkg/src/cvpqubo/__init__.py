"""Reduce closest-vector problems on integer lattices to QUBO and solve them exactly."""
import sys

# coefficients and file values are decimal strings of unbounded length
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

from .lattice import (
    BoundMode,
    BoundReport,
    CvpInstance,
    ReducedInstance,
    UnsupportedModeError,
    encoding_bits,
    kappa_bound_sq,
    max_abs_entry,
    reduce_to_parallelepiped,
)
from .linalg import (
    DimensionError,
    IntMatrix,
    SingularMatrixError,
    det_exact,
    frobenius_sq,
    gram,
    solve_exact,
)
from .pipeline import (
    CvpRun,
    CvpSolution,
    OracleRefused,
    VerifyReport,
    babai_round,
    cvp_oracle_enum,
    decode,
    encode,
    solve_cvp,
    verify_solution,
)
from .qubo import (
    EncodingParams,
    QuboFormatError,
    QuboMatrix,
    SignMode,
    build_qubo,
    evaluate,
    export_qubo,
    import_qubo,
    index_of,
    position_of,
)
from .solve import AnnealSchedule, SolveResult, SolverRefused, flip_delta, solve_exhaustive, solve_qubo, solve_sa

__version__ = "0.1.0"
