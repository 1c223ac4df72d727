"""Discrete elliptic-parabolic systems.

A system is the pair of equations

    A u - D^T p = f,
    D u_t + C p_t + B p = g,

with symmetric positive definite A, B, C. Operators act on coefficient
vectors and return dual vectors (Galerkin convention), so the adjoint of
D is its transpose. ``p_weights`` defines the inner product of the
pressure space, used for norms and for comparing M = D A^{-1} D^T
against C.

Two instances are provided: a 3 + 1 dof matrix ODE with prescribed
coupling strength, and Biot poroelasticity on (-1, 1)^2 discretized on
Chebyshev-Gauss-Lobatto nodes.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .linalg import chebyshev_grid, kron, largest_eigenvalue, lu_factor, lu_solve, smallest_eigenvalue

__all__ = [
    "EllipticParabolicSystem",
    "SchurOperator",
    "ManufacturedSolution",
    "PoroelasticGrid",
    "make_matrix_ode_system",
    "make_poroelastic_system",
    "manufacture",
    "matrix_ode_solution",
    "poroelastic_solution",
    "coupling_strength",
    "estimate_constants",
]


@dataclass(frozen=True)
class SchurOperator:
    """Dense ``M = D A^{-1} D^T``."""

    matrix: np.ndarray

    def apply(self, v):
        return self.matrix @ v


@dataclass(frozen=True, eq=False)
class EllipticParabolicSystem:
    """Assembled operators and constants of a coupled elliptic-parabolic system."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    p_weights: np.ndarray
    u_gram: np.ndarray
    omega: float
    constants: dict
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    grid: object = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._cache["A"] = lu_factor(self.A)

    @property
    def dim_u(self):
        return self.A.shape[0]

    @property
    def dim_p(self):
        return self.C.shape[0]

    def apply_A(self, u):
        return self.A @ u

    def solve_A(self, rhs):
        return lu_solve(self._cache["A"], rhs)

    def apply_B(self, p):
        return self.B @ p

    def apply_C(self, p):
        return self.C @ p

    def apply_D(self, u):
        return self.D @ u

    def apply_D_star(self, p):
        return self.D.T @ p

    def schur(self):
        if "M" not in self._cache:
            m = self.D @ self.solve_A(self.D.T)
            self._cache["M"] = SchurOperator(0.5 * (m + m.T))
        return self._cache["M"]

    def norm_u(self, e):
        """Norm of the displacement space (discrete H^1 for the PDE instance)."""
        return float(np.sqrt(max(e @ (self.u_gram @ e), 0.0)))

    def energy_u(self, e):
        return float(np.sqrt(max(e @ (self.A @ e), 0.0)))

    def norm_p(self, e):
        """Weighted discrete L^2 norm of a pressure vector."""
        return float(np.sqrt(np.sum(self.p_weights * e * e)))

    def riesz_p(self, v):
        """Map a pressure dual vector to a pressure field (divide by the weights)."""
        return v / self.p_weights


# ---------------------------------------------------------------------------
# matrix ODE


def make_matrix_ode_system(omega):
    """Three displacement dofs coupled to one pressure dof with strength ``omega``.

    ``A`` is a scaled tridiag(-1, 2, -1) with smallest eigenvalue 1, and the
    coupling row is normalized so that ``D A^{-1} D^T = omega``.
    """
    omega = float(omega)
    if omega < 0:
        raise ValueError("omega must be non-negative")
    s = 2.0 - np.sqrt(2.0)
    a = np.array([[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]) / s
    d = np.sqrt(omega) * np.array([[2.0, 1.0, 2.0]]) / np.sqrt(13.0 * s)
    eye = np.eye(1)
    return EllipticParabolicSystem(
        A=a,
        B=eye.copy(),
        C=eye.copy(),
        D=d,
        p_weights=np.ones(1),
        u_gram=np.eye(3),
        omega=omega,
        constants={"c_a": 1.0, "C_a": (2.0 + np.sqrt(2.0)) / s, "c_b": 1.0, "C_b": 1.0,
                   "c_c": 1.0, "C_c": 1.0, "C_d": np.sqrt(omega)},
        kind="matrix-ode",
        params={"omega": omega},
    )


# ---------------------------------------------------------------------------
# poroelasticity on (-1, 1)^2


@dataclass(frozen=True)
class PoroelasticGrid:
    """Tensor CGL grid with operators mapping interior dofs to all nodes."""

    N: int
    x: np.ndarray  # full-grid node coordinates, flattened (i major)
    y: np.ndarray
    weights: np.ndarray  # full-grid quadrature weights
    P: np.ndarray  # interior dofs -> full grid values (zero on the boundary)
    Gx: np.ndarray  # interior dofs -> d/dx at all nodes
    Gy: np.ndarray
    interior: np.ndarray  # boolean mask of interior nodes on the full grid

    @property
    def xi(self):
        return self.x[self.interior]

    @property
    def yi(self):
        return self.y[self.interior]

    @property
    def interior_weights(self):
        return self.weights[self.interior]


def _tensor_grid(N):
    g = chebyshev_grid(N)
    n = N + 1
    eye = np.eye(n)
    xx, yy = np.meshgrid(g.nodes, g.nodes, indexing="ij")
    w2 = np.outer(g.weights, g.weights).ravel()
    dx = kron(g.D1, eye)
    dy = kron(eye, g.D1)
    mask1 = np.zeros(n, dtype=bool)
    mask1[1:-1] = True
    interior = np.outer(mask1, mask1).ravel()
    p = np.eye(n * n)[:, interior]
    return PoroelasticGrid(
        N=N, x=xx.ravel(), y=yy.ravel(), weights=w2, P=p, Gx=dx @ p, Gy=dy @ p, interior=interior
    )


def make_poroelastic_system(N=20, eta=0.3, mu=0.3, lam=0.3, biot_M=0.1, kappa=0.05):
    """Biot poroelasticity with homogeneous Dirichlet data on ``(-1, 1)^2``.

    Bilinear forms are evaluated with Clenshaw-Curtis quadrature on the
    CGL tensor grid, acting on the interior nodal values of each field:

    * ``a(u, v) = sum w [2 mu eps(u):eps(v) + lam div u div v]``
    * ``b(p, r) = kappa sum w grad p . grad r``
    * ``c(p, r) = (1 / biot_M) sum w p r``
    * ``d(u, r) = eta sum w (div u) r``

    The displacement vector stacks the two components.
    """
    if N < 8:
        raise ValueError("N must be at least 8")
    if not eta >= 0:
        raise ValueError(f"eta must be non-negative, got {eta}")
    for name, val in (("mu", mu), ("lambda", lam), ("biot_M", biot_M), ("kappa", kappa)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val}")
    grid = _tensor_grid(N)
    w = grid.weights
    gx, gy, p = grid.Gx, grid.Gy, grid.P
    zero = np.zeros_like(gx)

    def form(left, right):
        return left.T @ (w[:, None] * right)

    e11 = np.hstack([gx, zero])
    e22 = np.hstack([zero, gy])
    e12 = 0.5 * np.hstack([gy, gx])
    div = np.hstack([gx, gy])
    a = 2.0 * mu * (form(e11, e11) + form(e22, e22) + 2.0 * form(e12, e12)) + lam * form(div, div)
    b = kappa * (form(gx, gx) + form(gy, gy))
    wi = grid.interior_weights
    c = np.diag(wi / biot_M)
    d = eta * (p.T @ (w[:, None] * div))
    vals = np.hstack([p, zero]), np.hstack([zero, p])
    grads = (np.hstack([gx, zero]), np.hstack([gy, zero]), np.hstack([zero, gx]), np.hstack([zero, gy]))
    gram = sum(form(v, v) for v in vals) + sum(form(g_, g_) for g_ in grads)
    omega = eta ** 2 * biot_M / (mu + lam)
    return EllipticParabolicSystem(
        A=0.5 * (a + a.T),
        B=0.5 * (b + b.T),
        C=c,
        D=d,
        p_weights=wi.copy(),
        u_gram=0.5 * (gram + gram.T),
        omega=omega,
        constants={"c_a": mu + lam, "c_c": 1.0 / biot_M, "C_c": 1.0 / biot_M, "C_d": eta},
        kind="poroelastic",
        params={"N": N, "eta": eta, "mu": mu, "lambda": lam, "biot_M": biot_M, "kappa": kappa},
        grid=grid,
    )


def coupling_strength(system):
    """``C_d^2 / (c_a c_c)`` from the stored constants.

    For the poroelastic instance this equals ``eta^2 M / (mu + lambda)``.
    """
    k = system.constants
    return k["C_d"] ** 2 / (k["c_a"] * k["c_c"])


def estimate_constants(system, seed=0):
    """Numerical coercivity/continuity constants and the sharp Schur ratio.

    Returns a dict with ``c_a`` (smallest eigenvalue of A relative to the
    displacement norm), ``C_d`` (norm of D from the displacement norm to
    the weighted pressure norm), ``c_c``, ``omega_numeric`` and
    ``schur_ratio``, the smallest constant with ``M <= schur_ratio * C``.
    """
    c_a = smallest_eigenvalue(system.A, system.u_gram, seed=seed)
    gram_fac = lu_factor(system.u_gram)
    w = system.p_weights
    d = system.D
    cd2 = largest_eigenvalue(lambda v: d @ lu_solve(gram_fac, d.T @ v), system.dim_p, b_diag=w, seed=seed)
    c_diag = np.diag(system.C)
    if not np.allclose(system.C, np.diag(c_diag)):
        raise ValueError("estimate_constants expects a diagonal C")
    c_c = float(np.min(c_diag / w))
    m = system.schur().matrix
    ratio = largest_eigenvalue(lambda v: m @ v, system.dim_p, b_diag=c_diag, seed=seed)
    return {
        "c_a": c_a,
        "C_d": float(np.sqrt(cd2)),
        "c_c": c_c,
        "omega_numeric": cd2 / (c_a * c_c),
        "schur_ratio": ratio,
    }


# ---------------------------------------------------------------------------
# manufactured solutions


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact nodal fields with the forcing that makes them solve the discrete system."""

    u: Callable
    p: Callable
    u_t: Callable
    p_t: Callable
    f: Callable
    g: Callable


def manufacture(system, u_star, p_star, u_star_t, p_star_t):
    """Discrete forcing ``f = A u* - D^T p*`` and ``g = D u*_t + C p*_t + B p*``."""

    def f(t):
        return system.A @ u_star(t) - system.D.T @ p_star(t)

    def g(t):
        return system.D @ u_star_t(t) + system.C @ p_star_t(t) + system.B @ p_star(t)

    return ManufacturedSolution(u=u_star, p=p_star, u_t=u_star_t, p_t=p_star_t, f=f, g=g)


def matrix_ode_solution(system):
    """``u = (sin t, cos t, e^t)``, ``p = (2t)^7 + 1``."""
    return manufacture(
        system,
        lambda t: np.array([np.sin(t), np.cos(t), np.exp(t)]),
        lambda t: np.array([(2.0 * t) ** 7 + 1.0]),
        lambda t: np.array([np.cos(t), -np.sin(t), np.exp(t)]),
        lambda t: np.array([14.0 * (2.0 * t) ** 6]),
    )


def poroelastic_solution(system):
    """Separable fields with time factor ``t^7 + 1``.

    ``u = (t^7+1) ((cos pi x + 1) sin pi y, sin pi x (cos pi y + 1))``,
    ``p = (t^7+1) sin pi x sin pi y``.
    """
    x, y = system.grid.xi, system.grid.yi
    pi = np.pi
    ushape = np.concatenate([(np.cos(pi * x) + 1.0) * np.sin(pi * y), np.sin(pi * x) * (np.cos(pi * y) + 1.0)])
    pshape = np.sin(pi * x) * np.sin(pi * y)
    return manufacture(
        system,
        lambda t: (t ** 7 + 1.0) * ushape,
        lambda t: (t ** 7 + 1.0) * pshape,
        lambda t: 7.0 * t ** 6 * ushape,
        lambda t: 7.0 * t ** 6 * pshape,
    )
