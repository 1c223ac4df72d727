"""BDF coefficient tables and discrete calculus on uniform grids.

The q-step method is generated by

    alpha(z) = sum_{j=1}^{q} (1/j) z^(q-j) (z-1)^j,   beta(z) = z^q,
    gamma(z) = z^q - (z-1)^q,

where alpha drives the discrete time derivative and gamma the
extrapolation of order q. The IMEX scheme, written as a single-variable
recursion, involves the composites ``alpha_tilde = alpha * beta`` and
``alpha_hat = alpha * gamma``.

All tables are built in exact rational arithmetic and exported as
floats on demand.
"""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import InsufficientHistoryError, UnsupportedOrderError
from .polynomial import Polynomial, as_fraction

__all__ = [
    "BdfScheme",
    "HistoryBuffer",
    "ProbeResult",
    "make_scheme",
    "discrete_derivative",
    "extrapolate",
    "solve_negative_history",
    "consistency_probe",
    "loglog_slopes",
]

MAX_STEPS = 6


@dataclass(frozen=True)
class BdfScheme:
    """Exact coefficient tables of the q-step BDF method and its composites."""

    q: int
    alpha_poly: Polynomial
    gamma_poly: Polynomial
    alpha_tilde_poly: Polynomial
    alpha_hat_poly: Polynomial

    @property
    def alpha_exact(self):
        return _padded(self.alpha_poly, self.q + 1)

    @property
    def gamma_exact(self):
        return _padded(self.gamma_poly, self.q)

    @property
    def alpha_tilde_exact(self):
        return _padded(self.alpha_tilde_poly, 2 * self.q + 1)

    @property
    def alpha_hat_exact(self):
        return _padded(self.alpha_hat_poly, 2 * self.q)

    @property
    def alpha(self):
        return np.array([float(c) for c in self.alpha_exact])

    @property
    def gamma(self):
        return np.array([float(c) for c in self.gamma_exact])

    @property
    def alpha_tilde(self):
        return np.array([float(c) for c in self.alpha_tilde_exact])

    @property
    def alpha_hat(self):
        return np.array([float(c) for c in self.alpha_hat_exact])

    @property
    def threshold(self):
        """Coupling threshold ``1 / (2**q - 1)`` of the IMEX variant."""
        return Fraction(1, 2 ** self.q - 1)

    def composite(self, m):
        """Exact ``alpha_tilde + m * alpha_hat`` (degree 2q)."""
        return self.alpha_tilde_poly + self.alpha_hat_poly * as_fraction(m)


def _padded(poly, n):
    c = list(poly.coeffs) + [Fraction(0)] * n
    return tuple(c[:n])


@lru_cache(maxsize=None)
def make_scheme(q):
    """Build the exact coefficient tables of the q-step BDF method.

    Raises
    ------
    UnsupportedOrderError
        For ``q`` outside 1..6; BDF is not zero-stable beyond six steps.
    """
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or not 1 <= q <= MAX_STEPS:
        raise UnsupportedOrderError(f"BDF step number must be an integer in 1..{MAX_STEPS}, got {q!r}")
    q = int(q)
    z = Polynomial([Fraction(0), Fraction(1)])
    zm1 = Polynomial([Fraction(-1), Fraction(1)])
    alpha = Polynomial([Fraction(0)])
    for j in range(1, q + 1):
        alpha = alpha + (z ** (q - j)) * (zm1 ** j) * Fraction(1, j)
    gamma = z ** q - zm1 ** q
    return BdfScheme(
        q=q,
        alpha_poly=alpha,
        gamma_poly=gamma,
        alpha_tilde_poly=alpha.shift(q),
        alpha_hat_poly=alpha * gamma,
    )


class HistoryBuffer:
    """Ring of the most recent vectors ``v^{n-k+1}, ..., v^n``.

    ``n`` is the time index of the newest entry. Windows handed out by
    :meth:`window` are read-only snapshots, oldest first.
    """

    def __init__(self, capacity, values=(), start_index=0):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self._ring = deque(maxlen=capacity)
        self.n = start_index - 1
        for v in values:
            self.append(v)

    @property
    def capacity(self):
        return self._ring.maxlen

    def __len__(self):
        return len(self._ring)

    def append(self, v):
        self._ring.append(np.array(v, dtype=float, copy=True))
        self.n += 1

    def latest(self):
        return self._ring[-1]

    def window(self, k):
        """Stack of the last ``k`` vectors, oldest first."""
        if k > len(self._ring):
            raise InsufficientHistoryError(f"need {k} history entries, have {len(self._ring)}")
        w = np.stack(list(self._ring)[len(self._ring) - k:])
        w.flags.writeable = False
        return w


def _as_window(window, k):
    if isinstance(window, HistoryBuffer):
        return window.window(k)
    w = np.asarray(window, dtype=float)
    if w.shape[0] < k:
        raise InsufficientHistoryError(f"need {k} history entries, have {w.shape[0]}")
    return w[w.shape[0] - k:]


def discrete_derivative(scheme, window, tau):
    """``(1/tau) * sum_i alpha_i v^{n-q+i}`` for a window ``v^{n-q}..v^n``."""
    w = _as_window(window, scheme.q + 1)
    return np.tensordot(scheme.alpha, w, axes=1) / tau


def extrapolate(scheme, window):
    """Extrapolated value ``sum_{i<q} gamma_i v^{n-q+i}`` from ``v^{n-q}..v^{n-1}``."""
    w = _as_window(window, scheme.q)
    return np.tensordot(scheme.gamma, w, axes=1)


def solve_negative_history(scheme, starting):
    """Fictitious values ``p^{-1}, ..., p^{-q}`` making extrapolation exact on the seeds.

    Given ``p^0..p^{q-1}`` (oldest first), back-substitutes the conditions
    ``extrapolate(p^{n-q}..p^{n-1}) = p^n`` for ``n = q-1, ..., 0``.
    Returns the list ``[p^{-1}, p^{-2}, ..., p^{-q}]``.
    """
    q = scheme.q
    seeds = [np.asarray(v, dtype=float) for v in starting]
    if len(seeds) < q:
        raise InsufficientHistoryError(f"need {q} starting values, got {len(seeds)}")
    g = scheme.gamma
    values = {i: seeds[i] for i in range(q)}
    out = []
    for n in range(q - 1, -1, -1):
        # unknown is p^{n-q}, multiplied by gamma_0
        acc = values[n].copy()
        for i in range(1, q):
            acc = acc - g[i] * values[n - q + i]
        values[n - q] = acc / g[0]
        out.append(values[n - q])
    return out


@dataclass(frozen=True)
class ProbeResult:
    """Max-norm defects of the discrete derivative per step size."""

    taus: np.ndarray
    defects: np.ndarray
    slopes: np.ndarray


def loglog_slopes(taus, values):
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(values[:-1] / values[1:]) / np.log(taus[:-1] / taus[1:])


def consistency_probe(scheme, sample, derivative, tau_list, t_final=1.0, dps=None):
    """Measure the defect of the discrete derivative on a smooth function.

    Parameters
    ----------
    scheme : BdfScheme
    sample, derivative : callable
        The function and its exact derivative. Vectorized over a float
        time array, or scalar callables accepting ``mpmath.mpf`` when
        ``dps`` is given.
    tau_list : sequence of float
        Step sizes; each must divide ``t_final``.
    dps : int, optional
        Evaluate in mpmath with this many decimal digits. Needed once
        the defect approaches ``1e-16 / tau``, where cancellation in
        the difference quotient swamps the truncation error.

    Returns
    -------
    ProbeResult
        ``defects[k] = max_n |dot v^n - v'(t_n)|`` over ``n = q..N``,
        with pairwise log-log slopes.
    """
    taus = np.array([float(as_fraction(t)) for t in tau_list])
    if taus.size < 2:
        raise ValueError("need at least two step sizes to estimate a slope")
    defects = []
    for tau in tau_list:
        n_steps = int(round(t_final / float(as_fraction(tau))))
        if dps is None:
            defects.append(_defect_float(scheme, sample, derivative, float(as_fraction(tau)), n_steps))
        else:
            defects.append(_defect_mp(scheme, sample, derivative, tau, n_steps, dps))
    defects = np.asarray(defects)
    return ProbeResult(taus=taus, defects=defects, slopes=loglog_slopes(taus, defects))


def _defect_float(scheme, sample, derivative, tau, n_steps):
    q = scheme.q
    t = np.arange(n_steps + 1) * tau
    v = np.asarray(sample(t), dtype=float)
    dv = np.asarray(derivative(t), dtype=float)
    dot = np.zeros(n_steps + 1 - q)
    for i, a in enumerate(scheme.alpha):
        dot += a * v[i: i + n_steps + 1 - q]
    dot /= tau
    return float(np.max(np.abs(dot - dv[q:])))


def _defect_mp(scheme, sample, derivative, tau, n_steps, dps):
    import mpmath

    q = scheme.q
    with mpmath.workdps(dps):
        h = mpmath.mpf(as_fraction(tau).numerator) / as_fraction(tau).denominator
        alpha = [mpmath.mpf(c.numerator) / c.denominator for c in scheme.alpha_exact]
        v = [sample(n * h) for n in range(n_steps + 1)]
        worst = mpmath.mpf(0)
        for n in range(q, n_steps + 1):
            dot = mpmath.fsum(a * v[n - q + i] for i, a in enumerate(alpha)) / h
            worst = max(worst, abs(dot - derivative(n * h)))
        return float(worst)
