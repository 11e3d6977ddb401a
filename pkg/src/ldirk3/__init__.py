"""Time-limited DIRK3 integration for WENO5 discretizations of conservation laws."""
from .harness import (CaseSpec, RunResult, builtin_cases, convergence_table, error_norms,
                      get_case, reference_solution, run)
from .integrate import TimeStepper, cfl_dt, limited_coeffs
from .kernels import BACKEND
from .limiter import DENSITY, PRESSURE, ReferenceVariable
from .nlsolve import SolverError, SolveSettings
from .physics import InvalidStateError

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "CaseSpec", "DENSITY", "InvalidStateError", "PRESSURE", "ReferenceVariable",
    "RunResult", "SolveSettings", "SolverError", "TimeStepper", "builtin_cases", "cfl_dt",
    "convergence_table", "error_norms", "get_case", "limited_coeffs", "reference_solution", "run",
]
