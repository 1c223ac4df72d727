"""Dense numerical kernels.

LU factorization with partial pivoting, cyclic Jacobi eigenvalues,
Aberth-Ehrlich polynomial roots and Chebyshev-Gauss-Lobatto
differentiation. Problem sizes in this package stay below a few
thousand unknowns, so everything is dense.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import RootFindingError, SingularMatrixError

__all__ = [
    "LUFactorization",
    "lu_factor",
    "lu_solve",
    "sym_eig",
    "smallest_eigenvalue",
    "largest_eigenvalue",
    "poly_roots",
    "SpectralGrid",
    "chebyshev_grid",
    "kron",
]


@dataclass(frozen=True)
class LUFactorization:
    """Row-permuted triangular factors with ``A[perm] = L @ U``.

    ``lu`` stores the strictly lower part of L (unit diagonal implied)
    and the upper triangle U in one array.
    """

    lu: np.ndarray
    perm: np.ndarray
    scale: float

    @property
    def n(self):
        return self.lu.shape[0]

    @property
    def L(self):
        return np.tril(self.lu, -1) + np.eye(self.n)

    @property
    def U(self):
        return np.triu(self.lu)

    def solve(self, rhs):
        return lu_solve(self, rhs)

    def reconstruction_residual(self, a):
        """Return ``||P A - L U|| / ||A||`` in the Frobenius norm."""
        a = np.asarray(a, dtype=float)
        return np.linalg.norm(a[self.perm] - self.L @ self.U) / max(
            np.linalg.norm(a), np.finfo(float).tiny
        )

    def condition_estimate(self):
        """Crude condition number estimate from the pivot magnitudes."""
        d = np.abs(np.diag(self.lu))
        return float(self.scale * np.max(1.0 / d))


def lu_factor(a, rtol=1e-14):
    """Factor a square matrix by Gaussian elimination with partial pivoting.

    Raises
    ------
    SingularMatrixError
        If a pivot falls below ``rtol * max|a_ij|``.
    """
    a = np.array(a, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    n = a.shape[0]
    scale = float(np.max(np.abs(a))) if n else 0.0
    perm = np.arange(n)
    tol = rtol * scale
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= tol or scale == 0.0:
            raise SingularMatrixError(
                f"matrix is singular to working precision (pivot {k}, |a|={abs(a[p, k]):.3e})"
            )
        if p != k:
            a[[k, p]] = a[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        a[k + 1:, k] /= a[k, k]
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:])
    return LUFactorization(lu=a, perm=perm, scale=scale)


def lu_solve(factor, rhs):
    """Solve ``A x = rhs`` with a factorization from :func:`lu_factor`.

    ``rhs`` may be a vector or a matrix of right-hand sides (columns).
    """
    lu = factor.lu
    n = lu.shape[0]
    b = np.asarray(rhs, dtype=float)
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, expected {n}")
    x = b[factor.perm].copy()
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] -= lu[i, i + 1:] @ x[i + 1:]
        x[i] /= lu[i, i]
    return x


def sym_eig(a, vectors=False, tol=1e-14, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in ascending order, and the orthogonal
    eigenvector matrix (columns) when ``vectors`` is true.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-10 * max(norm, 1.0):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    q = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= tol * max(norm, np.finfo(float).tiny):
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) < 1e-300:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                ar = a[:, r].copy()
                a[:, p] = c * ap - s * ar
                a[:, r] = s * ap + c * ar
                ap = a[p, :].copy()
                ar = a[r, :].copy()
                a[p, :] = c * ap - s * ar
                a[r, :] = s * ap + c * ar
                if vectors:
                    qp = q[:, p].copy()
                    qr = q[:, r].copy()
                    q[:, p] = c * qp - s * qr
                    q[:, r] = s * qp + c * qr
    w = np.diag(a).copy()
    order = np.argsort(w)
    if vectors:
        return w[order], q[:, order]
    return w[order]


def smallest_eigenvalue(a, b=None, tol=1e-10, max_iter=500, seed=0):
    """Smallest eigenvalue of the symmetric pencil ``(a, b)`` by inverse iteration.

    ``b`` defaults to the identity. Both matrices must be symmetric
    positive definite.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    bmat = np.eye(n) if b is None else np.asarray(b, dtype=float)
    fac = lu_factor(a)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    lam = np.inf
    for _ in range(max_iter):
        y = lu_solve(fac, bmat @ x)
        x = y / np.sqrt(y @ (bmat @ y))
        new = (x @ (a @ x)) / (x @ (bmat @ x))
        if abs(new - lam) <= tol * abs(new):
            return float(new)
        lam = new
    return float(lam)


def largest_eigenvalue(apply, n, b_diag=None, tol=1e-12, max_iter=5000, seed=0):
    """Largest eigenvalue of ``B^{-1} A`` for symmetric ``A >= 0`` and diagonal ``B > 0``.

    ``apply`` is a callable computing ``A @ v``; ``b_diag`` holds the
    diagonal of ``B`` (identity when omitted). Power iteration with the
    Rayleigh quotient taken in the ``B`` inner product.
    """
    bd = np.ones(n) if b_diag is None else np.asarray(b_diag, dtype=float)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    lam = 0.0
    for _ in range(max_iter):
        ax = apply(x)
        new = (x @ ax) / (x @ (bd * x))
        y = ax / bd
        nrm = np.sqrt(y @ (bd * y))
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        if abs(new - lam) <= tol * max(abs(new), np.finfo(float).tiny):
            return float(new)
        lam = new
    return float(lam)


def poly_roots(coeffs, tol=1e-14, max_iter=500):
    """All complex roots of a polynomial by Aberth-Ehrlich iteration.

    Parameters
    ----------
    coeffs : array_like
        Coefficients in ascending degree. Leading zeros are dropped.

    Returns
    -------
    ndarray of complex
        Roots polished by a final Newton pass, sorted by modulus.
    """
    c = np.asarray([complex(v) for v in coeffs])
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    c = c[: nz[-1] + 1]
    deg = c.size - 1
    if deg < 1:
        raise ValueError("polynomial must have degree >= 1")
    # exact zero roots
    k0 = int(nz[0])
    c = c[k0:]
    zeros = np.zeros(k0, dtype=complex)
    deg = c.size - 1
    if deg == 0:
        return zeros
    if deg == 1:
        return np.sort_complex(np.concatenate([zeros, [-c[0] / c[1]]]))
    monic = c / c[-1]
    dcoef = np.arange(1, deg + 1) * monic[1:]

    def ev(z):
        p = np.zeros_like(z)
        for a in monic[::-1]:
            p = p * z + a
        dp = np.zeros_like(z)
        for a in dcoef[::-1]:
            dp = dp * z + a
        return p, dp

    radius = 1.0 + np.max(np.abs(monic[:-1]))
    lower = np.abs(monic[0]) / (np.abs(monic[0]) + np.max(np.abs(monic[1:])))
    r0 = np.sqrt(max(lower, 1e-3) * radius)
    angles = 2 * np.pi * np.arange(deg) / deg + 0.4
    z = r0 * np.exp(1j * angles)
    converged = False
    for _ in range(max_iter):
        p, dp = ev(z)
        ratio = np.divide(p, dp, out=np.zeros_like(p), where=dp != 0)
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = np.sum(np.where(np.eye(deg, dtype=bool), 0.0, 1.0 / diff), axis=1)
        w = ratio / (1.0 - ratio * s)
        z = z - w
        if np.all(np.abs(w) <= tol * np.maximum(np.abs(z), 1.0)):
            converged = True
            break
    p, dp = ev(z)
    residuals = np.abs(p)
    scale = np.array([np.sum(np.abs(monic) * np.abs(zz) ** np.arange(deg + 1)) for zz in z])
    if not converged and np.any(residuals > 1e-8 * scale):
        raise RootFindingError("Aberth iteration did not converge", residuals)
    # Newton polish, kept only where it lowers the residual
    for _ in range(3):
        step = np.divide(p, dp, out=np.zeros_like(p), where=dp != 0)
        zn = z - step
        pn, dpn = ev(zn)
        better = np.abs(pn) < np.abs(p)
        z = np.where(better, zn, z)
        p = np.where(better, pn, p)
        dp = np.where(better, dpn, dp)
    roots = np.concatenate([zeros, z])
    return roots[np.argsort(np.abs(roots), kind="stable")]


@dataclass(frozen=True)
class SpectralGrid:
    """Chebyshev-Gauss-Lobatto nodes ``x_j = cos(j pi / N)`` with operators."""

    N: int
    nodes: np.ndarray
    D1: np.ndarray
    weights: np.ndarray

    @property
    def interior(self):
        return slice(1, self.N)


def chebyshev_grid(N):
    """Build CGL nodes, the first-derivative matrix and Clenshaw-Curtis weights."""
    if N < 2:
        raise ValueError("N must be at least 2")
    j = np.arange(N + 1)
    x = np.cos(np.pi * j / N)
    x[np.abs(x) < 1e-15] = 0.0
    c = np.ones(N + 1)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    dx = x[:, None] - x[None, :]
    d = np.outer(c, 1.0 / c) / (dx + np.eye(N + 1))
    d -= np.diag(np.sum(d, axis=1))
    return SpectralGrid(N=N, nodes=x, D1=d, weights=_clenshaw_curtis(N))


def _clenshaw_curtis(N):
    theta = np.pi * np.arange(N + 1) / N
    w = np.zeros(N + 1)
    v = np.ones(N - 1)
    inner = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[-1] = 1.0 / (N * N - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
        v -= np.cos(N * inner) / (N * N - 1)
    else:
        w[0] = w[-1] = 1.0 / (N * N)
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k * k - 1)
    w[1:-1] = 2.0 * v / N
    return w


def kron(a, b):
    """Kronecker product of two dense matrices."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
