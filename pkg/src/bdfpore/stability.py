"""Numerical certificates for multipliers and coupling thresholds.

Trigonometric expressions on the unit circle are reduced exactly to
polynomials in ``x = cos(phi)`` through Chebyshev identities,

    cos(l phi) = T_l(x),    sin(l phi) = U_{l-1}(x) sin(phi),

so that positivity claims become one-dimensional minimization problems
on ``[-1, 1]``. The remaining inexactness is the minimization itself.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .bdf import make_scheme
from .exceptions import DegeneracyError
from .linalg import poly_roots, sym_eig
from .polynomial import Polynomial, as_fraction

__all__ = [
    "Multiplier",
    "TrigForm",
    "StabilityWitness",
    "ToeplitzSpec",
    "DEFAULT_MULTIPLIERS",
    "default_multiplier",
    "chebyshev_t",
    "chebyshev_u",
    "trig_to_chebyshev",
    "unit_circle_form",
    "polynomial_min_on_interval",
    "check_positivity_property",
    "roots_in_unit_disk",
    "check_A_condition",
    "necessary_condition_witness",
    "run_scalar_recursion",
    "toeplitz_positivity",
]

#: Uniform multipliers for the IMEX four-, five- and six-step schemes.
DEFAULT_MULTIPLIERS = {
    4: ("1/2", 0, 0, 0),
    5: (1, "-1/4", 0, 0, 0),
    6: (1, "-9/10", "3/10", 0, 0, 0),
}


@dataclass(frozen=True)
class Multiplier:
    """Multiplier tuple ``(mu_1, ..., mu_q)`` with ``mu(z) = z^q - mu_1 z^{q-1} - ... - mu_q``."""

    q: int
    mu_exact: tuple

    def __init__(self, mu):
        exact = tuple(as_fraction(v) for v in mu)
        if not exact:
            raise ValueError("multiplier needs at least one entry")
        object.__setattr__(self, "q", len(exact))
        object.__setattr__(self, "mu_exact", exact)

    @property
    def mu(self):
        return np.array([float(v) for v in self.mu_exact])

    @property
    def mu_poly(self):
        q = self.q
        c = [Fraction(0)] * (q + 1)
        c[q] = Fraction(1)
        for j, m in enumerate(self.mu_exact, start=1):
            c[q - j] = -m
        return Polynomial(c)


def default_multiplier(q):
    """Uniform multiplier for ``q`` in {4, 5, 6}; the zero multiplier otherwise."""
    return Multiplier(DEFAULT_MULTIPLIERS.get(q, (0,) * q))


@lru_cache(maxsize=None)
def chebyshev_t(n):
    """Chebyshev polynomial of the first kind, exact."""
    if n == 0:
        return Polynomial([Fraction(1)])
    if n == 1:
        return Polynomial([Fraction(0), Fraction(1)])
    x2 = Polynomial([Fraction(0), Fraction(2)])
    return x2 * chebyshev_t(n - 1) - chebyshev_t(n - 2)


@lru_cache(maxsize=None)
def chebyshev_u(n):
    """Chebyshev polynomial of the second kind, exact (``U_{-1} = 0``)."""
    if n < 0:
        return Polynomial([Fraction(0)])
    if n == 0:
        return Polynomial([Fraction(1)])
    if n == 1:
        return Polynomial([Fraction(0), Fraction(2)])
    x2 = Polynomial([Fraction(0), Fraction(2)])
    return x2 * chebyshev_u(n - 1) - chebyshev_u(n - 2)


@dataclass(frozen=True)
class TrigForm:
    """``cos_part(cos phi) + i * sin_part(cos phi) * sin phi``."""

    cos_part: Polynomial
    sin_part: Polynomial

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        x = np.cos(phi)
        return self.cos_part.evaluate(x) + 1j * self.sin_part.evaluate(x) * np.sin(phi)


def trig_to_chebyshev(cos_coeffs, sin_coeffs=()):
    """Reduce ``sum_l a_l cos(l phi) + i sum_l b_l sin(l phi)`` to a :class:`TrigForm`.

    ``cos_coeffs`` are ``a_0..a_L``; ``sin_coeffs`` are ``b_1..b_L``.
    Exact inputs (ints, Fractions, decimal strings) give exact output.
    """
    cos_part = Polynomial([Fraction(0)])
    for ell, a in enumerate(cos_coeffs):
        a = as_fraction(a)
        if a:
            cos_part = cos_part + chebyshev_t(ell) * a
    sin_part = Polynomial([Fraction(0)])
    for ell, b in enumerate(sin_coeffs, start=1):
        b = as_fraction(b)
        if b:
            sin_part = sin_part + chebyshev_u(ell - 1) * b
    return TrigForm(cos_part, sin_part)


def unit_circle_form(p, r):
    """Exact :class:`TrigForm` of ``p(e^{i phi}) * r(e^{-i phi})``."""
    width = len(p) + len(r)
    cos_c = [Fraction(0)] * width
    sin_c = [Fraction(0)] * width
    for j, a in enumerate(p.coeffs):
        if a == 0:
            continue
        for k, b in enumerate(r.coeffs):
            if b == 0:
                continue
            d = j - k
            cos_c[abs(d)] += a * b
            if d > 0:
                sin_c[d] += a * b
            elif d < 0:
                sin_c[-d] -= a * b
    return trig_to_chebyshev(cos_c, sin_c[1:])


def polynomial_min_on_interval(poly, lo=-1.0, hi=1.0):
    """Global minimum of a real polynomial on ``[lo, hi]`` via critical points.

    Returns ``(min_value, argmin)``.
    """
    candidates = [lo, hi]
    d = poly.deriv()
    if d.degree >= 1:
        for z in poly_roots(d.to_float()):
            if abs(z.imag) <= 1e-9 * max(1.0, abs(z.real)) and lo <= z.real <= hi:
                candidates.append(z.real)
    xs = np.array(candidates)
    vals = poly.evaluate(xs)
    k = int(np.argmin(vals))
    return float(vals[k]), float(xs[k])


@dataclass(frozen=True)
class PositivityReport:
    min_value: float
    argmin_x: float
    margin: float
    residual: float
    passed: bool
    polynomial: Polynomial


def check_positivity_property(mult, margin=0.0):
    """Check ``1 - sum_j mu_j cos(j phi) >= margin`` for all ``phi``.

    ``residual`` is ``min_value - margin``.
    """
    poly = trig_to_chebyshev((1,) + tuple(-m for m in mult.mu_exact)).cos_part
    lo, x = polynomial_min_on_interval(poly)
    margin = float(as_fraction(margin))
    return PositivityReport(
        min_value=lo,
        argmin_x=x,
        margin=margin,
        residual=lo - margin,
        passed=lo >= margin,
        polynomial=poly,
    )


@dataclass(frozen=True)
class RootReport:
    max_modulus: float
    roots: np.ndarray
    passed: bool


def roots_in_unit_disk(poly, tol=1e-10):
    """Whether every root of ``poly`` satisfies ``|z| < 1 - tol``."""
    if not isinstance(poly, Polynomial):
        poly = Polynomial(list(poly))
    if poly.degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    roots = poly_roots(poly.to_float())
    mod = float(np.max(np.abs(roots)))
    return RootReport(max_modulus=mod, roots=roots, passed=mod < 1.0 - tol)


@dataclass(frozen=True)
class AConditionReport:
    """Outcome of the four checks behind ``Re(alpha_check / mu) > 0`` outside the disk."""

    q: int
    m: Fraction
    roots_inside: bool
    max_root_modulus: float
    leading_ratio: float
    common_divisor_gap: float
    min_real_part: float
    argmin_phi: float
    boundary_form: TrigForm
    passed: bool
    notes: list = field(default_factory=list)

    @property
    def boundary_polynomial(self):
        """Real part of ``alpha_check(e^{i phi}) mu(e^{-i phi})`` as a polynomial in ``cos phi``."""
        return self.boundary_form.cos_part


def check_A_condition(scheme, m, mult, grid=100_000, divisor_tol=1e-8, boundary_tol=1e-12):
    """Verify ``Re[alpha_check(z) / mu(z)] > 0`` for ``|z| > 1``.

    ``alpha_check = alpha_tilde + m * alpha_hat`` has degree 2q, so the
    multiplier polynomial enters as ``z^q mu(z)``. The check combines:

    1. roots of ``mu`` strictly inside the unit disk;
    2. a positive limit of ``alpha_check / mu`` at infinity;
    3. no common divisor once the shared power of ``z`` is removed;
    4. ``Re[alpha_check(e^{i phi}) mu(e^{-i phi})] >= -boundary_tol`` (relative
       to the coefficient scale) on a uniform ``phi`` grid with local
       refinement.

    Raises
    ------
    DegeneracyError
        If the reduced polynomials share a root.
    """
    q = scheme.q
    if mult.q != q:
        raise ValueError(f"multiplier has {mult.q} entries, scheme has q={q}")
    m = as_fraction(m)
    notes = []
    if not 0 <= m <= scheme.threshold:
        notes.append(f"m={m} outside [0, {scheme.threshold}]")
    check = scheme.composite(m)
    pair = mult.mu_poly.shift(q)

    roots = roots_in_unit_disk(mult.mu_poly)
    lead = float(check.coeffs[-1]) / float(pair.coeffs[-1]) if check.degree == pair.degree else (
        np.inf if check.degree > pair.degree else 0.0
    )

    k = min(check.low_order_zeros(), pair.low_order_zeros())
    a = check.divide_by_z(k)
    b = pair.divide_by_z(k)
    gap = _common_root_gap(a, b)
    if gap < divisor_tol:
        raise DegeneracyError(
            f"alpha_check and mu share a root (relative gap {gap:.3e} < {divisor_tol:g})"
        )

    form = unit_circle_form(check, pair)
    scale = float(sum(abs(c) for c in check.coeffs) * sum(abs(c) for c in pair.coeffs))
    lo, phi_star = _min_on_circle(form.cos_part, grid)
    rel = lo / scale
    passed = bool(roots.passed and lead > 0 and rel >= -boundary_tol)
    return AConditionReport(
        q=q,
        m=m,
        roots_inside=roots.passed,
        max_root_modulus=roots.max_modulus,
        leading_ratio=lead,
        common_divisor_gap=gap,
        min_real_part=rel,
        argmin_phi=phi_star,
        boundary_form=form,
        passed=passed,
        notes=notes,
    )


def _common_root_gap(a, b):
    """``min_r |a(r)| / sum_i |a_i| |r|^i`` over the roots ``r`` of ``b``."""
    if b.degree < 1:
        return np.inf
    rts = poly_roots(b.to_float())
    ac = a.to_float()
    powers = np.abs(rts)[:, None] ** np.arange(ac.size)[None, :]
    denom = powers @ np.abs(ac)
    vals = np.abs(a.evaluate(rts.astype(complex)))
    return float(np.min(vals / denom))


def _min_on_circle(poly, grid):
    # Real part as polynomial in x = cos(phi); symmetric in phi, so [0, pi] suffices.
    phi = np.linspace(0.0, np.pi, grid + 1)
    vals = poly.evaluate(np.cos(phi))
    k = int(np.argmin(vals))
    lo, hi = phi[max(k - 1, 0)], phi[min(k + 1, grid)]
    f = lambda t: float(poly.evaluate(np.cos(t)))  # noqa: E731
    best_phi, best = _golden_min(f, lo, hi)
    if vals[k] < best:
        return float(vals[k]), float(phi[k])
    return best, best_phi


def _golden_min(f, lo, hi, iters=100):
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < 1e-15:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    cands = [(f(a), a), (fc, c), (fd, d), (f(b), b)]
    val, x = min(cands)
    return x, val


@dataclass(frozen=True)
class StabilityWitness:
    """Root ``zeta_star < -1`` of ``alpha_tilde + ell*alpha_hat + x_star * z^{2q}``."""

    q: int
    ell: float
    zeta_star: float
    x_star: float
    residual: float


def _kappa0(q, ell):
    s = make_scheme(q)
    return (s.alpha_tilde_poly + s.alpha_hat_poly * as_fraction(ell)).to_float()


def necessary_condition_witness(q, ell, scan=(-4.0, -1.0 - 1e-6), samples=10_000):
    """Search real ``zeta < -1`` where the IMEX recursion violates the root condition.

    For ``x(zeta) = -(alpha_tilde + ell*alpha_hat)(zeta) / zeta^{2q}``, any
    ``zeta`` with ``x(zeta) > 0`` is a root of the characteristic polynomial
    at ``tau*lambda = x(zeta)``. The scan runs from ``scan[0]`` towards -1;
    the first sign change of ``x`` is located by bisection at ``zeta_0``,
    and the witness is taken halfway between ``zeta_0`` and the end of
    the scan. That keeps ``x_star`` bounded away from 0 and ``|zeta_star|``
    bounded away from 1. Returns ``None`` when ``x <= 0`` throughout.
    """
    c = _kappa0(q, ell)

    def xfun(z):
        return -np.polynomial.polynomial.polyval(z, c) / z ** (2 * q)

    zs = np.linspace(scan[0], scan[1], samples)
    xs = xfun(zs)
    # values indistinguishable from rounding noise do not count
    noise = 1e-12 * np.sum(np.abs(c))
    pos = np.nonzero(xs > noise)[0]
    if pos.size == 0:
        return None
    first = int(pos[0])
    if first > 0:
        lo, hi = zs[first - 1], zs[first]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if xfun(mid) > 0:
                hi = mid
            else:
                lo = mid
        zeta0 = hi
    else:
        zeta0 = zs[0]
    z_star = 0.5 * (zeta0 + scan[1])
    x_star = float(xfun(z_star))
    if x_star <= noise:
        z_star, x_star = float(zs[first]), float(xs[first])
    kap = np.polynomial.polynomial.polyval(z_star, c) + x_star * z_star ** (2 * q)
    return StabilityWitness(q=q, ell=float(ell), zeta_star=float(z_star), x_star=float(x_star),
                            residual=float(abs(kap)))


@dataclass(frozen=True)
class RecursionResult:
    growth: float
    diverged: bool
    steps: int


def run_scalar_recursion(q, ell, x, n_steps, seed_values, overflow=1e200):
    """Iterate ``sum_i (alpha_tilde_i + ell*alpha_hat_i) v^{n-2q+i} + x v^n = 0``.

    ``seed_values`` are the ``2q`` initial values. Returns the growth
    factor ``max_n |v^n| / max |seed|`` (0 for an all-zero seed); values
    beyond ``overflow`` stop the iteration and flag divergence.
    """
    if n_steps < 10 * q:
        raise ValueError(f"n_steps must be at least 10*q = {10 * q}")
    seeds = np.asarray(seed_values, dtype=float)
    if seeds.size != 2 * q:
        raise ValueError(f"need {2 * q} seed values, got {seeds.size}")
    c = _kappa0(q, ell)
    lead = c[2 * q] + x
    hist = list(seeds)
    scale = float(np.max(np.abs(seeds)))
    if scale == 0.0:
        return RecursionResult(growth=0.0, diverged=False, steps=n_steps)
    peak = scale
    for n in range(n_steps):
        v = -np.dot(c[:2 * q], hist[-2 * q:]) / lead
        hist.append(v)
        if not np.isfinite(v) or abs(v) > overflow:
            return RecursionResult(growth=np.inf, diverged=True, steps=n + 1)
        peak = max(peak, abs(v))
    return RecursionResult(growth=peak / scale, diverged=False, steps=n_steps)


@dataclass(frozen=True)
class ToeplitzSpec:
    """Banded lower-triangular Toeplitz matrix with ``l_{i,i-j} = -mu_j``, ``j = 0..q``."""

    band: tuple
    n: int

    @property
    def q(self):
        return len(self.band) - 1

    def matrix(self):
        mat = np.zeros((self.n, self.n))
        for j, mu in enumerate(self.band):
            idx = np.arange(j, self.n)
            mat[idx, idx - j] = -float(mu)
        return mat

    def symmetric_part(self):
        mat = self.matrix()
        return 0.5 * (mat + mat.T)

    def generating_polynomial(self):
        """Generating function of the symmetric part as a polynomial in ``cos s``."""
        cos_c = [-as_fraction(self.band[0])] + [-as_fraction(m) for m in self.band[1:]]
        return trig_to_chebyshev(cos_c).cos_part


@dataclass(frozen=True)
class ToeplitzReport:
    generating_min: float
    generating_max: float
    symmetric_min_eig: float
    symmetric_max_eig: float
    passed: bool


def default_mu0(q, eps="1/20"):
    """Diagonal band entry ``mu_0``; ``-91/100`` for six steps, ``-(1 - eps)`` otherwise."""
    if q == 6:
        return Fraction(-91, 100)
    return -(1 - as_fraction(eps))


def toeplitz_positivity(mult, mu0=None, n=24):
    """Compare the generating-function minimum with the smallest eigenvalue of ``L_s``."""
    if n < 2 * mult.q:
        raise ValueError(f"n must be at least 2q = {2 * mult.q}")
    mu0 = default_mu0(mult.q) if mu0 is None else as_fraction(mu0)
    spec = ToeplitzSpec(band=(mu0,) + mult.mu_exact, n=n)
    g = spec.generating_polynomial()
    gmin, _ = polynomial_min_on_interval(g)
    gmax = -polynomial_min_on_interval(-g)[0]
    eig = sym_eig(spec.symmetric_part())
    return ToeplitzReport(
        generating_min=gmin,
        generating_max=gmax,
        symmetric_min_eig=float(eig[0]),
        symmetric_max_eig=float(eig[-1]),
        passed=bool(gmin > 0 and eig[0] >= gmin - 1e-10),
    )
