"""Exact arithmetic in real quadratic fields.

A :class:`QuadraticIrrational` stores (a + b*sqrt(d))/c with integer a, b, c
and a positive nonsquare d.  Canonical form fixes c > 0, gcd(a, b, c) = 1 and
d squarefree, so equality is structural.  Arithmetic that lands back in the
rationals returns a :class:`fractions.Fraction` instead (b = 0 never occurs
in a constructed instance).

Rationals are plain ``Fraction``/``int`` throughout the package; ``ExactReal``
is the union of both kinds.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Tuple, Union

__all__ = [
    "QuadraticIrrational",
    "ExactReal",
    "sqrt_exact",
    "exact_sign",
    "exact_cmp",
    "floor_exact",
    "frac_exact",
    "bracket",
    "to_float",
]


_SPLIT_BOUND = 10_000


def _squarefree_split(d: int) -> Tuple[int, int]:
    """Return (s, d0) with d = s**2 * d0 and d0 free of small square factors.

    Trial division stops at a fixed bound (full squarefree reduction would
    mean factoring; radicands from periodic-tail discriminants can be huge).
    A remaining perfect-square cofactor is still extracted, so values built
    from the same field unify; residual square factors above the bound are
    tolerated and handled by the pairwise unification in comparisons.
    """
    if d <= 0:
        raise ValueError("d must be positive")
    s, d0 = 1, d
    f = 2
    while f * f <= d0 and f <= _SPLIT_BOUND:
        f2 = f * f
        while d0 % f2 == 0:
            d0 //= f2
            s *= f
        f += 1
    r = math.isqrt(d0)
    if r * r == d0:
        s, d0 = s * r, 1
    return s, d0


def _unify_radicand(x: "QuadraticIrrational", d_other: int):
    """Rewrite x over radicand d_other when d_x / d_other (or its inverse) is a
    perfect square; returns (a, b, c) over d_other or None."""
    if x.d == d_other:
        return x.a, x.b, x.c
    if x.d % d_other == 0:
        q, r = divmod(x.d, d_other)
        m = math.isqrt(q)
        if m * m == q:
            return x.a, x.b * m, x.c
    return None


def _isqrt_floor(n: int) -> int:
    return math.isqrt(n)


class QuadraticIrrational:
    """(a + b*sqrt(d))/c in canonical form; always irrational (b != 0)."""

    __slots__ = ("a", "b", "c", "d")

    def __new__(cls, a, b, c, d):
        a, b, c, d = int(a), int(b), int(c), int(d)
        if c == 0:
            raise ZeroDivisionError("denominator c = 0")
        s, d0 = _squarefree_split(d)
        b *= s
        if d0 == 1:  # perfect-square d: sqrt contributes the integer b
            a, b, d0 = a + b, 0, 2
        if b == 0:
            return Fraction(a, c)
        if c < 0:
            a, b, c = -a, -b, -c
        g = math.gcd(math.gcd(abs(a), abs(b)), c)
        if g > 1:
            a, b, c = a // g, b // g, c // g
        self = object.__new__(cls)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d0)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("QuadraticIrrational is immutable")

    # -- coercion -----------------------------------------------------------

    def _coerce(self, other):
        """Return (a, b, c) of other over this value's field, or None."""
        if isinstance(other, QuadraticIrrational):
            if other.d != self.d:
                return _unify_radicand(other, self.d)
            return other.a, other.b, other.c
        if isinstance(other, int):
            return other, 0, 1
        if isinstance(other, Fraction):
            return other.numerator, 0, other.denominator
        return None

    # -- ring operations ----------------------------------------------------

    def __neg__(self):
        return QuadraticIrrational(-self.a, -self.b, self.c, self.d)

    def __add__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        a2, b2, c2 = co
        return QuadraticIrrational(
            self.a * c2 + a2 * self.c, self.b * c2 + b2 * self.c, self.c * c2, self.d
        )

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (QuadraticIrrational, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        a2, b2, c2 = co
        return QuadraticIrrational(
            self.a * a2 + self.b * b2 * self.d,
            self.a * b2 + self.b * a2,
            self.c * c2,
            self.d,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "QuadraticIrrational":
        return QuadraticIrrational(self.a, -self.b, self.c, self.d)

    def __truediv__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        a2, b2, c2 = co
        # multiply by the conjugate of the divisor
        norm = a2 * a2 - b2 * b2 * self.d
        if norm == 0:
            raise ZeroDivisionError("division by zero")
        na = (self.a * a2 - self.b * b2 * self.d) * c2
        nb = (self.b * a2 - self.a * b2) * c2
        return QuadraticIrrational(na, nb, self.c * norm, self.d)

    def __rtruediv__(self, other):
        co = self._coerce(other)
        if co is None:
            return NotImplemented
        a2, b2, c2 = co
        norm = self.a * self.a - self.b * self.b * self.d
        na = (a2 * self.a - b2 * self.b * self.d) * self.c
        nb = (b2 * self.a - a2 * self.b) * self.c
        return QuadraticIrrational(na, nb, c2 * norm, self.d)

    # -- order and equality -------------------------------------------------

    def _sign(self) -> int:
        """Exact sign; c > 0 so only a + b*sqrt(d) matters."""
        a, b, d = self.a, self.b, self.d
        if a >= 0 and b > 0:
            return 1
        if a <= 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * d
        if lhs == rhs:  # impossible for nonsquare d unless a = b = 0
            return 0
        big_a = lhs > rhs
        return (1 if a > 0 else -1) if big_a else (1 if b > 0 else -1)

    def __eq__(self, other):
        if isinstance(other, QuadraticIrrational):
            if self.d == other.d:
                return (self.a, self.b, self.c) == (other.a, other.b, other.c)
            return exact_cmp(self, other) == 0
        if isinstance(other, (int, Fraction)):
            return False  # irrational
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.c, self.d))

    def _cmp(self, other) -> int:
        return exact_cmp(self, other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    # -- floor / float ------------------------------------------------------

    def __floor__(self) -> int:
        a, b, c, d = self.a, self.b, self.c, self.d
        t = b * b * d
        if b > 0:
            f = _isqrt_floor(t)
        else:
            r = _isqrt_floor(t)
            f = -r if r * r == t else -r - 1
        n = (a + f) // c
        # correct the candidate exactly (off by at most one step each way)
        while self._cmp(n + 1) >= 0:
            n += 1
        while self._cmp(n) < 0:
            n -= 1
        return n

    def bracket(self, bits: int = 64) -> Tuple[Fraction, Fraction]:
        """Rational lo <= self <= hi with width |b| / (c * 2**bits)."""
        s = _isqrt_floor(self.d << (2 * bits))
        lo_r = Fraction(s, 1 << bits)
        hi_r = Fraction(s + 1, 1 << bits)
        if self.b > 0:
            lo = Fraction(self.a + self.b * lo_r, self.c)
            hi = Fraction(self.a + self.b * hi_r, self.c)
        else:
            lo = Fraction(self.a + self.b * hi_r, self.c)
            hi = Fraction(self.a + self.b * lo_r, self.c)
        return lo, hi

    def __float__(self) -> float:
        bits = 64
        while True:
            lo, hi = self.bracket(bits)
            flo, fhi = float(lo), float(hi)
            if flo == fhi or bits > 16384:
                return flo
            bits *= 2

    def __repr__(self):
        return f"QuadraticIrrational({self.a}, {self.b}, {self.c}, {self.d})"

    def __str__(self):
        sign = "+" if self.b >= 0 else "-"
        return f"({self.a}{sign}{abs(self.b)}*sqrt({self.d}))/{self.c}"


ExactReal = Union[int, Fraction, QuadraticIrrational]


def sqrt_exact(d: int) -> ExactReal:
    """sqrt(d) as an exact value (int when d is a perfect square)."""
    r = _isqrt_floor(d)
    if r * r == d:
        return r
    return QuadraticIrrational(0, 1, 1, d)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


def exact_sign(x: ExactReal) -> int:
    if isinstance(x, QuadraticIrrational):
        return x._sign()
    v = _as_fraction(x).numerator
    return (v > 0) - (v < 0)


def _sub_sign(x: QuadraticIrrational, a: int, b: int, c: int) -> int:
    """sign of x - (a + b sqrt(x.d))/c."""
    diff = QuadraticIrrational(x.a * c - a * x.c, x.b * c - b * x.c,
                               x.c * c, x.d)
    if isinstance(diff, Fraction):
        v = diff.numerator
        return (v > 0) - (v < 0)
    return diff._sign()


def exact_cmp(x: ExactReal, y: ExactReal) -> int:
    """Exact three-way comparison, including across different fields.

    Radicands differing by a perfect square are unified first; genuinely
    distinct fields are compared by interval refinement, which terminates
    because such values cannot coincide (a safety cap guards the loop).
    """
    if _both_rational(x, y):
        return exact_sign(_as_fraction(x) - _as_fraction(y))
    if isinstance(x, QuadraticIrrational) and isinstance(y, QuadraticIrrational) \
            and x.d != y.d:
        co = _unify_radicand(y, x.d)
        if co is not None:
            return _sub_sign(x, *co)
        co = _unify_radicand(x, y.d)
        if co is not None:
            return -_sub_sign(y, *co)
        bits = 64
        while bits <= 1 << 20:
            xlo, xhi = x.bracket(bits)
            ylo, yhi = y.bracket(bits)
            if xhi < ylo:
                return -1
            if yhi < xlo:
                return 1
            bits *= 2
        raise ValueError(f"cannot separate {x!r} and {y!r}; "
                         "radicands share a hidden square factor")
    if isinstance(x, QuadraticIrrational):
        co = x._coerce(y)
    else:
        co = y._coerce(x)
        if co is not None:
            return -_sub_sign(y, *co)
    if co is None:
        raise TypeError(f"exact comparison needs exact operands, got {x!r}, {y!r}")
    return _sub_sign(x, *co)


def _both_rational(x, y) -> bool:
    return not isinstance(x, QuadraticIrrational) and not isinstance(y, QuadraticIrrational)


def floor_exact(x: ExactReal) -> int:
    if isinstance(x, QuadraticIrrational):
        return x.__floor__()
    return math.floor(_as_fraction(x))


def frac_exact(x: ExactReal) -> ExactReal:
    """Fractional part x - floor(x), exact."""
    return x - floor_exact(x)


def bracket(x: ExactReal, bits: int = 64) -> Tuple[Fraction, Fraction]:
    if isinstance(x, QuadraticIrrational):
        return x.bracket(bits)
    f = _as_fraction(x)
    return f, f


def to_float(x) -> float:
    """Correctly rounded float of an exact value (floats pass through)."""
    if isinstance(x, float):
        return x
    if isinstance(x, QuadraticIrrational):
        return float(x)
    return float(_as_fraction(x))
