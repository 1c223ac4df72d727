"""BDF time stepping for coupled elliptic-parabolic systems.

Exact coefficient tables, stability certificates for the implicit-explicit
variant, discrete test systems (a small matrix ODE and Biot
poroelasticity), fully implicit and decoupled steppers, and an
experiment harness.
"""

from .bdf import HistoryBuffer, consistency_probe, discrete_derivative, extrapolate, make_scheme
from .exceptions import (
    ConfigError,
    DegeneracyError,
    DivergenceError,
    InsufficientHistoryError,
    RootFindingError,
    SingularMatrixError,
    UnsupportedOrderError,
)
from .steppers import StepperRun, integrate
from .systems import make_matrix_ode_system, make_poroelastic_system, matrix_ode_solution, poroelastic_solution

__version__ = "0.1.0"
