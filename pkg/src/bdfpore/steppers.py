"""Time stepping for elliptic-parabolic systems with q-step BDF.

Two schemes are provided:

* ``implicit``: both equations are treated implicitly and each step
  solves the coupled block system.
* ``imex``: the pressure in the elliptic equation is replaced by its
  order-q extrapolation, so each step is one elliptic solve followed by
  one parabolic solve.

Each scheme also has a reduced form in which the displacement is
eliminated, leaving a recursion in the pressure alone (q-step for the
implicit scheme, 2q-step for the IMEX scheme). The reduced forms need
the dense Schur matrix and serve as cross-checks.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .bdf import HistoryBuffer, extrapolate, solve_negative_history
from .exceptions import DivergenceError, InsufficientHistoryError
from .linalg import lu_factor, lu_solve
from .systems import manufacture

__all__ = [
    "StartingValues",
    "StepperRun",
    "IntegrationResult",
    "seed_starting_values",
    "user_starting_values",
    "step_implicit",
    "step_implicit_reduced",
    "step_imex",
    "step_imex_reduced",
    "integrate",
    "zero_solution",
    "write_trajectory",
]

MODES = ("implicit", "imex")
DIVERGENCE_FACTOR = 1e12


@dataclass(frozen=True)
class StartingValues:
    """Pairs ``(u^i, p^i)`` for ``i = 0..q-1`` satisfying the elliptic equation."""

    p: tuple
    u: tuple
    provenance: str = "exact-nodal"

    def residual(self, system, f, tau):
        """Largest relative residual of ``A u^i - D^T p^i = f(t_i)``."""
        worst = 0.0
        for i, (u, p) in enumerate(zip(self.u, self.p)):
            rhs = f(i * tau)
            r = system.A @ u - system.D.T @ p - rhs
            scale = max(np.linalg.norm(rhs), np.linalg.norm(system.A @ u), 1e-300)
            worst = max(worst, np.linalg.norm(r) / scale)
        return worst


def zero_solution(system):
    zu, zp = np.zeros(system.dim_u), np.zeros(system.dim_p)
    return manufacture(system, lambda t: zu, lambda t: zp, lambda t: zu, lambda t: zp)


def seed_starting_values(system, manufactured, scheme, tau):
    """Exact nodal pressures with displacements from the elliptic equation."""
    ps, us = [], []
    for i in range(scheme.q):
        t = i * tau
        p = np.asarray(manufactured.p(t), dtype=float)
        ps.append(p)
        us.append(system.solve_A(manufactured.f(t) + system.D.T @ p))
    return StartingValues(p=tuple(ps), u=tuple(us), provenance="exact-nodal")


def user_starting_values(system, p_values, f, tau):
    """Starting values from user pressures; displacements are solved for."""
    ps = tuple(np.asarray(p, dtype=float) for p in p_values)
    us = tuple(system.solve_A(f(i * tau) + system.D.T @ p) for i, p in enumerate(ps))
    return StartingValues(p=ps, u=us, provenance="user-supplied")


@dataclass(eq=False)
class StepperRun:
    """State of one integration with constant step size.

    Histories hold the pressure (including fictitious negative-index
    values for the reduced IMEX recursion), the displacement and the
    elliptic forcing. ``n`` is the index of the next step.
    """

    scheme: object
    system: object
    tau: float
    n_steps: int
    mode: str = "imex"
    manufactured: object = None
    starting: StartingValues = None
    p_history: HistoryBuffer = field(init=False)
    u_history: HistoryBuffer = field(init=False)
    f_history: HistoryBuffer = field(init=False)
    n: int = field(init=False)
    _factors: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_steps < self.scheme.q:
            raise ValueError("n_steps must be at least q")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        q = self.scheme.q
        if self.manufactured is None:
            self.manufactured = zero_solution(self.system)
        if self.starting is None:
            self.starting = seed_starting_values(self.system, self.manufactured, self.scheme, self.tau)
        if len(self.starting.p) != q or len(self.starting.u) != q:
            raise InsufficientHistoryError(f"need exactly {q} starting pairs")
        negative = solve_negative_history(self.scheme, self.starting.p)
        self.p_history = HistoryBuffer(2 * q, list(reversed(negative)) + list(self.starting.p), start_index=-q)
        self.u_history = HistoryBuffer(q, self.starting.u)
        self.f_history = HistoryBuffer(q, [self.manufactured.f(i * self.tau) for i in range(q)])
        self.n = q

    @property
    def final_time(self):
        return self.tau * self.n_steps

    @property
    def seed_scale(self):
        return max((np.linalg.norm(p) for p in self.starting.p), default=0.0) or 1.0

    def _factor(self, key, build):
        if key not in self._factors:
            self._factors[key] = lu_factor(build())
        return self._factors[key]

    def _schur(self):
        return self.system.schur().matrix

    def _commit(self, u, p):
        t = self.n * self.tau
        self.f_history.append(self.manufactured.f(t))
        self.u_history.append(u)
        self.p_history.append(p)
        self.n += 1
        return u, p


def _forcing(run):
    t = run.n * run.tau
    return run.manufactured.f(t), run.manufactured.g(t)


def step_implicit(run):
    """One step of the coupled implicit scheme."""
    s, sysm, tau = run.scheme, run.system, run.tau
    q, a = s.q, s.alpha
    c = a[q] / tau
    nu = sysm.dim_u

    def block():
        top = np.hstack([sysm.A, -sysm.D.T])
        bottom = np.hstack([c * sysm.D, c * sysm.C + sysm.B])
        return np.vstack([top, bottom])

    fac = run._factor("implicit-block", block)
    f, g = _forcing(run)
    us = run.u_history.window(q)
    ps = run.p_history.window(q)
    hist_u = np.tensordot(a[:q], us, axes=1)
    hist_p = np.tensordot(a[:q], ps, axes=1)
    rhs2 = g - (sysm.D @ hist_u + sysm.C @ hist_p) / tau
    b = np.concatenate([f, rhs2])
    x = lu_solve(fac, b)
    # one refinement sweep; the block matrix is not symmetric and mixes scales
    u, p = x[:nu], x[nu:]
    r = b - np.concatenate([sysm.A @ u - sysm.D.T @ p, c * (sysm.D @ u) + (c * sysm.C + sysm.B) @ p])
    x = x + lu_solve(fac, r)
    return run._commit(x[:nu], x[nu:])


def step_implicit_reduced(run):
    """One step of the implicit scheme with the displacement eliminated."""
    s, sysm, tau = run.scheme, run.system, run.tau
    q, a = s.q, s.alpha
    m = run._schur()
    mc = m + sysm.C
    fac = run._factor("implicit-reduced", lambda: a[q] * mc + tau * sysm.B)
    f, g = _forcing(run)
    ps = run.p_history.window(q)
    fs = np.vstack([run.f_history.window(q), f])
    f_comb = np.tensordot(a, fs, axes=1)
    rhs = tau * g - mc @ np.tensordot(a[:q], ps, axes=1) - sysm.D @ sysm.solve_A(f_comb)
    p = lu_solve(fac, rhs)
    u = sysm.solve_A(f + sysm.D.T @ p)
    return run._commit(u, p)


def step_imex(run):
    """One step of the decoupled scheme: elliptic solve, then parabolic solve."""
    s, sysm, tau = run.scheme, run.system, run.tau
    q, a = s.q, s.alpha
    fac = run._factor("imex-parabolic", lambda: (a[q] / tau) * sysm.C + sysm.B)
    f, g = _forcing(run)
    ps = run.p_history.window(q)
    p_hat = extrapolate(s, ps)
    u = sysm.solve_A(f + sysm.D.T @ p_hat)
    us = np.vstack([run.u_history.window(q), u])
    u_dot = np.tensordot(a, us, axes=1) / tau
    rhs = g - sysm.D @ u_dot - sysm.C @ np.tensordot(a[:q], ps, axes=1) / tau
    p = lu_solve(fac, rhs)
    return run._commit(u, p)


def step_imex_reduced(run):
    """One step of the 2q-step pressure recursion equivalent to the IMEX scheme.

    Uses the fictitious values ``p^{-1}..p^{-q}`` stored in the history
    for the first q steps.
    """
    s, sysm, tau = run.scheme, run.system, run.tau
    q = s.q
    at, ah, a = s.alpha_tilde, s.alpha_hat, s.alpha
    m = run._schur()
    fac = run._factor("imex-reduced", lambda: at[2 * q] * sysm.C + tau * sysm.B)
    f, g = _forcing(run)
    ps = run.p_history.window(2 * q)
    fs = np.vstack([run.f_history.window(q), f])
    f_comb = np.tensordot(a, fs, axes=1)
    rhs = (
        tau * g
        - sysm.D @ sysm.solve_A(f_comb)
        - sysm.C @ np.tensordot(at[: 2 * q], ps, axes=1)
        - m @ np.tensordot(ah, ps, axes=1)
    )
    p = lu_solve(fac, rhs)
    u = sysm.solve_A(f + sysm.D.T @ extrapolate(s, ps[q:]))
    return run._commit(u, p)


STEPPERS = {
    ("implicit", False): step_implicit,
    ("implicit", True): step_implicit_reduced,
    ("imex", False): step_imex,
    ("imex", True): step_imex_reduced,
}


@dataclass
class IntegrationResult:
    """Final-time errors of one run.

    When the run diverged, errors refer to the last step whose pressure
    stayed below the divergence bound and ``t_final`` is that step's time.
    """

    err_u: float
    err_u_energy: float
    err_p: float
    t_final: float
    steps: int
    diverged: bool = False
    trajectory: list = None
    p_final: np.ndarray = None
    u_final: np.ndarray = None


def _errors(run, n, u, p):
    t = n * run.tau
    eu = u - run.manufactured.u(t)
    ep = p - run.manufactured.p(t)
    return run.system.norm_u(eu), run.system.energy_u(eu), run.system.norm_p(ep)


def integrate(run, reduced=False, trajectory=False, divergence_factor=DIVERGENCE_FACTOR):
    """Advance ``run`` to its final step and measure errors.

    Raises
    ------
    DivergenceError
        If a non-finite value appears; the step index is attached.
    """
    step = STEPPERS[(run.mode, bool(reduced))]
    bound = divergence_factor * run.seed_scale
    rows = [] if trajectory else None
    if trajectory:
        for i in range(run.scheme.q):
            eu, _, ep = _errors(run, i, run.starting.u[i], run.starting.p[i])
            rows.append((i, i * run.tau, eu, ep))
    last = (run.scheme.q - 1, run.starting.u[-1], run.starting.p[-1])
    diverged = False
    while run.n <= run.n_steps:
        n = run.n
        u, p = step(run)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(u))):
            raise DivergenceError(f"non-finite values at step {n}", step=n)
        if np.linalg.norm(p) > bound:
            diverged = True
            break
        last = (n, u, p)
        if trajectory:
            eu, _, ep = _errors(run, n, u, p)
            rows.append((n, n * run.tau, eu, ep))
    n, u, p = last
    eu, ee, ep = _errors(run, n, u, p)
    return IntegrationResult(
        err_u=eu, err_u_energy=ee, err_p=ep, t_final=n * run.tau, steps=n,
        diverged=diverged, trajectory=rows, p_final=p, u_final=u,
    )


def write_trajectory(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "t", "err_u_H1", "err_p_L2"])
        for n, t, eu, ep in rows:
            w.writerow([n, repr(t), f"{eu:.6e}", f"{ep:.6e}"])
