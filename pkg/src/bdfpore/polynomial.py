"""Real polynomials with coefficients in ascending degree.

Coefficients may be :class:`fractions.Fraction` (exact) or floats.
Exact polynomials stay exact under ``+``, ``-`` and ``*`` as long as
the other operand is exact as well.
"""

import math
from fractions import Fraction
from numbers import Number

import numpy as np

from .linalg import poly_roots


def as_fraction(value):
    """Convert ``value`` to a Fraction, reading floats by their shortest repr.

    ``as_fraction(0.9) == Fraction(9, 10)``, which is what a user typing
    ``0.9`` means.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    return Fraction(repr(float(value)))


class Polynomial:
    """Immutable polynomial ``sum_i coeffs[i] * z**i``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = list(coeffs)
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [Fraction(0)]
        self._c = tuple(c)

    @classmethod
    def monomial(cls, k, coeff=Fraction(1)):
        return cls([Fraction(0)] * k + [coeff])

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return len(self._c) - 1 if any(c != 0 for c in self._c) else -1

    @property
    def exact(self):
        return all(isinstance(c, (Fraction, int)) for c in self._c)

    def __len__(self):
        return len(self._c)

    def __getitem__(self, i):
        return self._c[i] if 0 <= i < len(self._c) else 0

    def __repr__(self):
        return f"Polynomial({list(self._c)!r})"

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        n = max(len(self), len(other))
        return all(self[i] == other[i] for i in range(n))

    def __hash__(self):
        return hash(self._c)

    def __add__(self, other):
        if isinstance(other, Number):
            other = Polynomial([other])
        n = max(len(self), len(other))
        return Polynomial([self[i] + other[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self._c])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number):
            return Polynomial([c * other for c in self._c])
        out = [0 * self._c[0] * other._c[0]] * (len(self) + len(other) - 1)
        for i, a in enumerate(self._c):
            if a == 0:
                continue
            for j, b in enumerate(other._c):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial([Fraction(1)])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, z):
        acc = 0 * z
        for c in reversed(self._c):
            acc = acc * z + c
        return acc

    def evaluate(self, z):
        """Float/complex evaluation by Horner's rule (vectorized over ``z``)."""
        z = np.asarray(z)
        dtype = complex if np.iscomplexobj(z) else float
        acc = np.zeros(z.shape, dtype=dtype)
        for c in reversed(self._c):
            acc = acc * z + float(c)
        return acc

    def deriv(self):
        if len(self) == 1:
            return Polynomial([0 * self._c[0]])
        return Polynomial([i * c for i, c in enumerate(self._c) if i > 0])

    def shift(self, k):
        """Multiply by ``z**k``."""
        return Polynomial([0 * self._c[0]] * k + list(self._c))

    def low_order_zeros(self):
        """Number of vanishing low-degree coefficients (multiplicity of the root 0)."""
        k = 0
        while k < len(self._c) - 1 and self._c[k] == 0:
            k += 1
        return k

    def divide_by_z(self, k):
        if any(self._c[i] != 0 for i in range(min(k, len(self._c)))):
            raise ValueError(f"polynomial is not divisible by z**{k}")
        return Polynomial(self._c[k:])

    def divmod(self, other):
        """Polynomial long division; returns ``(quotient, remainder)``."""
        num = list(self._c)
        den = list(other.coeffs)
        if other.degree < 0:
            raise ZeroDivisionError("division by the zero polynomial")
        dq = len(num) - len(den) + 1
        if dq <= 0:
            return Polynomial([0 * num[0]]), Polynomial(num)
        quo = [0 * num[0]] * dq
        lead = den[-1]
        for k in range(dq - 1, -1, -1):
            coef = num[k + len(den) - 1] / lead
            quo[k] = coef
            for j, d in enumerate(den):
                num[k + j] = num[k + j] - coef * d
        rem = num[: len(den) - 1] or [0 * num[0]]
        return Polynomial(quo), Polynomial(rem)

    def scaled_to_integers(self):
        """Return ``(L, ints)`` with ``ints = L * coeffs`` integral, ``L`` the lcm of denominators."""
        if not self.exact:
            raise ValueError("integer scaling needs exact coefficients")
        lcm = 1
        for c in self._c:
            d = Fraction(c).denominator
            lcm = lcm * d // math.gcd(lcm, d)
        return lcm, tuple(int(Fraction(c) * lcm) for c in self._c)

    def to_float(self):
        return np.array([float(c) for c in self._c])

    def roots(self):
        return poly_roots(self.to_float())

