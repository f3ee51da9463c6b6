"""Exact integer arithmetic helpers and precision-tracked real/complex values.

Everything here is immutable and pure; safe to call from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath as mp
from sympy import isprime

GUARD_DIGITS = 10  # analytic ops over-provision by this many decimal digits
MIN_PRECISION = 15


class ValidationError(ValueError):
    """Invalid input rejected before any computation starts."""


class ComputationError(RuntimeError):
    """A computation could not be completed (precision, recognition, ...)."""


# ---------------------------------------------------------------------------
# valuations


@dataclass(frozen=True, order=False)
class Valuation:
    """ord_p of an integer: a nonnegative exponent, or infinite for input 0."""

    exponent: Optional[int]  # None encodes +infinity

    @property
    def is_infinite(self) -> bool:
        return self.exponent is None

    def __int__(self) -> int:
        if self.exponent is None:
            raise ValueError("infinite valuation has no integer value")
        return self.exponent

    def _key(self):
        return math.inf if self.exponent is None else self.exponent

    @staticmethod
    def _other_key(other):
        if isinstance(other, Valuation):
            return other._key()
        if isinstance(other, (int, float)):
            return other
        return NotImplemented

    def __le__(self, other):
        k = self._other_key(other)
        return NotImplemented if k is NotImplemented else self._key() <= k

    def __lt__(self, other):
        k = self._other_key(other)
        return NotImplemented if k is NotImplemented else self._key() < k

    def __ge__(self, other):
        k = self._other_key(other)
        return NotImplemented if k is NotImplemented else self._key() >= k

    def __gt__(self, other):
        k = self._other_key(other)
        return NotImplemented if k is NotImplemented else self._key() > k

    def __eq__(self, other):
        k = self._other_key(other)
        return NotImplemented if k is NotImplemented else self._key() == k

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return "Valuation(inf)" if self.exponent is None else f"Valuation({self.exponent})"


INFINITE = Valuation(None)


def p_valuation(n: int, p: int) -> Valuation:
    """Largest e with p^e | n; infinite for n = 0."""
    if p < 2 or not isprime(p):
        raise ValidationError(f"p = {p} is not prime")
    if n == 0:
        return INFINITE
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return Valuation(e)


def ord_p(n: int, p: int) -> int:
    """Finite p-adic valuation of a nonzero integer (plain int)."""
    return int(p_valuation(n, p))


# ---------------------------------------------------------------------------
# Kronecker symbol


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a|n), multiplicative completion of the Legendre symbol.

    Conventions: (a|2) is 0 for even a and (-1)^((a^2-1)/8) otherwise;
    (a|-1) is -1 exactly for a < 0; (a|1) = 1 (empty product).
    """
    if n == 0:
        raise ValidationError("kronecker_symbol undefined for n = 0")
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    # strip factors of 2 from n
    if n % 2 == 0:
        if a % 2 == 0:
            return 0
        e = 0
        while n % 2 == 0:
            n //= 2
            e += 1
        if e % 2 == 1 and a % 8 in (3, 5):
            result = -result
    # now n odd positive: Jacobi via reciprocity
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


# ---------------------------------------------------------------------------
# arithmetic-geometric mean


def agm(a, b, precision: int = 40):
    """Common limit of the arithmetic-geometric iteration for positive reals."""
    if a <= 0 or b <= 0:
        raise ValidationError("agm requires positive inputs")
    with mp.workdps(precision + GUARD_DIGITS):
        x, y = mp.mpf(a), mp.mpf(b)
        eps = mp.mpf(10) ** (-(precision + GUARD_DIGITS // 2))
        while abs(x - y) > eps * abs(x):
            x, y = (x + y) / 2, mp.sqrt(x * y)
        result = +x
    return result


def agm_complex(a, b, precision: int = 40):
    """Optimal-branch complex AGM: at each step pick the square root g with
    |a1 - g| <= |a1 + g| (ties broken toward Im(g/a1) > 0)."""
    with mp.workdps(precision + GUARD_DIGITS):
        x, y = mp.mpc(a), mp.mpc(b)
        eps = mp.mpf(10) ** (-(precision + GUARD_DIGITS // 2))
        while abs(x - y) > eps * abs(x):
            am = (x + y) / 2
            g = mp.sqrt(x * y)
            if abs(am - g) > abs(am + g):
                g = -g
            elif abs(am - g) == abs(am + g) and mp.im(g / am) < 0:
                g = -g
            x, y = am, g
        result = +x
    return result


# ---------------------------------------------------------------------------
# precision-carrying complex values


@dataclass(frozen=True)
class PrecisionComplex:
    """Complex value carrying its working precision in decimal digits.

    Arithmetic results carry the minimum precision of the operands; all
    internal computation runs with GUARD_DIGITS extra digits.
    """

    real: mp.mpf
    imag: mp.mpf
    digits: int

    def __post_init__(self):
        if self.digits < MIN_PRECISION:
            raise ValidationError(f"precision {self.digits} below minimum {MIN_PRECISION}")

    @classmethod
    def from_mpc(cls, z, digits: int) -> "PrecisionComplex":
        with mp.workdps(digits + GUARD_DIGITS):
            return cls(mp.mpf(mp.re(z)), mp.mpf(mp.im(z)), digits)

    def to_mpc(self):
        return mp.mpc(self.real, self.imag)

    def _binop(self, other, op):
        if not isinstance(other, PrecisionComplex):
            other = PrecisionComplex.from_mpc(mp.mpc(other), self.digits)
        digits = min(self.digits, other.digits)
        with mp.workdps(digits + GUARD_DIGITS):
            z = op(self.to_mpc(), other.to_mpc())
        return PrecisionComplex.from_mpc(z, digits)

    def __add__(self, other):
        return self._binop(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binop(other, lambda x, y: x - y)

    def __mul__(self, other):
        return self._binop(other, lambda x, y: x * y)

    def __truediv__(self, other):
        return self._binop(other, lambda x, y: x / y)

    def conjugate(self) -> "PrecisionComplex":
        return PrecisionComplex(self.real, -self.imag, self.digits)

    def __abs__(self):
        with mp.workdps(self.digits + GUARD_DIGITS):
            return mp.sqrt(self.real**2 + self.imag**2)

    def __str__(self):
        with mp.workdps(self.digits):
            return f"({mp.nstr(self.real, self.digits)} + {mp.nstr(self.imag, self.digits)}j)@{self.digits}"
