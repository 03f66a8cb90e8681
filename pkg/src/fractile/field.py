"""Exact arithmetic in a real quadratic field Q(sqrt(d)).

Every coordinate in the workbench is a FieldScalar a + b*sqrt(d) with
rational a, b and a fixed square-free integer d >= 1.  d = 1 encodes the
plain rationals (b is folded into a).  All comparisons are exact; no
floating point is consulted for any predicate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt, sqrt
from typing import Union

Rationalish = Union[int, Fraction]


class FieldError(ValueError):
    """Raised for ill-formed field elements or mixed-field arithmetic."""


def is_square_free(n: int) -> bool:
    if n < 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def _coerce(x) -> "FieldScalar":
    if isinstance(x, FieldScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return FieldScalar(Fraction(x), Fraction(0), 1)
    raise TypeError(f"cannot interpret {x!r} as a field element")


@dataclass(frozen=True, slots=True)
class FieldScalar:
    """a + b*sqrt(d), normalized so that b == 0 implies d == 1."""

    a: Fraction
    b: Fraction
    d: int

    @staticmethod
    def new(a: Rationalish, b: Rationalish = 0, d: int = 1) -> "FieldScalar":
        a, b = Fraction(a), Fraction(b)
        if not is_square_free(d):
            raise FieldError(f"d = {d} is not a square-free positive integer")
        if d == 1:
            a, b = a + b, Fraction(0)
        if b == 0:
            d = 1
        return FieldScalar(a, b, d)

    # -- arithmetic -------------------------------------------------------

    def _join(self, other: "FieldScalar") -> int:
        if self.d == other.d:
            return self.d
        if self.b == 0:
            return other.d
        if other.b == 0:
            return self.d
        raise FieldError(f"mixed fields Q(sqrt {self.d}) and Q(sqrt {other.d})")

    def __add__(self, other) -> "FieldScalar":
        other = _coerce(other)
        d = self._join(other)
        return FieldScalar.new(self.a + other.a, self.b + other.b, d)

    __radd__ = __add__

    def __neg__(self) -> "FieldScalar":
        return FieldScalar(-self.a, -self.b, self.d)

    def __sub__(self, other) -> "FieldScalar":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "FieldScalar":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "FieldScalar":
        other = _coerce(other)
        d = self._join(other)
        a = self.a * other.a + self.b * other.b * d
        b = self.a * other.b + self.b * other.a
        return FieldScalar.new(a, b, d)

    __rmul__ = __mul__

    def inverse(self) -> "FieldScalar":
        norm = self.a * self.a - self.b * self.b * self.d
        if norm == 0:
            if self.a == 0 and self.b == 0:
                raise ZeroDivisionError("division by zero field element")
            raise FieldError("element has zero norm; d is not square-free?")
        return FieldScalar.new(self.a / norm, -self.b / norm, self.d)

    def __truediv__(self, other) -> "FieldScalar":
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other) -> "FieldScalar":
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "FieldScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = FieldScalar(Fraction(1), Fraction(0), 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- order ------------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d) using only rational comparisons."""
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (b > 0) - (b < 0)
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # opposite signs: compare a^2 with b^2 d
        lhs, rhs = a * a, b * b * self.d
        if lhs == rhs:
            return 0  # cannot occur when d is square-free and b != 0
        bigger_is_a = lhs > rhs
        return (1 if a > 0 else -1) if bigger_is_a else (1 if b > 0 else -1)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = _coerce(other)
        if not isinstance(other, FieldScalar):
            return NotImplemented
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other) -> bool:
        return (self - other).sign() < 0

    def __le__(self, other) -> bool:
        return (self - other).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - other).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - other).sign() >= 0

    def __bool__(self) -> bool:
        return not (self.a == 0 and self.b == 0)

    def __abs__(self) -> "FieldScalar":
        return -self if self.sign() < 0 else self

    # -- conversions --------------------------------------------------------

    def __float__(self) -> float:
        if self.b == 0:
            return float(self.a)
        return float(self.a) + float(self.b) * sqrt(self.d)

    def approx(self, digits: int = 40) -> Fraction:
        """Rational approximation accurate to ~`digits` decimal places."""
        if self.b == 0:
            return self.a
        scale = 10 ** digits
        root = Fraction(isqrt(self.d * scale * scale), scale)
        return self.a + self.b * root

    def sqrt(self) -> "FieldScalar | None":
        """Exact square root within the same field, or None."""
        if self.sign() < 0:
            return None
        if self.b == 0:
            r = _fraction_sqrt(self.a)
            if r is not None:
                return FieldScalar.new(r)
            if self.d != 1:
                q = _fraction_sqrt(self.a / self.d)
                if q is not None:
                    return FieldScalar.new(0, q, self.d)
            return None
        # (x + y sqrt d)^2 = x^2 + y^2 d + 2xy sqrt d
        # solve x^2 + d y^2 = a, 2xy = b  =>  x^2 is a root of t^2 - a t + d b^2/4
        disc = self.a * self.a - self.d * self.b * self.b
        r = _fraction_sqrt(disc)
        if r is None:
            return None
        for x2 in ((self.a + r) / 2, (self.a - r) / 2):
            if x2 < 0:
                continue
            x = _fraction_sqrt(x2)
            if x is None or x == 0:
                continue
            y = self.b / (2 * x)
            cand = FieldScalar.new(x, y, self.d)
            if cand * cand == self and cand.sign() >= 0:
                return cand
        return None

    def __repr__(self) -> str:
        return f"FieldScalar({format_scalar(self)!r})"

    def __str__(self) -> str:
        return format_scalar(self)


def _fraction_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    pn, pd = isqrt(q.numerator), isqrt(q.denominator)
    if pn * pn == q.numerator and pd * pd == q.denominator:
        return Fraction(pn, pd)
    return None


def scalar(a: Rationalish, b: Rationalish = 0, d: int = 1) -> FieldScalar:
    return FieldScalar.new(a, b, d)


ZERO = scalar(0)
ONE = scalar(1)


# -- text form: "p/q" or "p/q+r/s√d" ---------------------------------------

def format_scalar(x: FieldScalar) -> str:
    def frac(f: Fraction) -> str:
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

    if x.b == 0:
        return frac(x.a)
    tail = f"{frac(abs(x.b))}√{x.d}"
    sign = "-" if x.b < 0 else "+"
    if x.a == 0:
        return tail if x.b > 0 else f"-{tail}"
    return f"{frac(x.a)}{sign}{tail}"


def parse_scalar(text: str, d: int | None = None) -> FieldScalar:
    """Parse 'p/q', 'p/q+r/s√d' (also 'sqrt(d)' spelled with the radical only)."""
    s = text.strip().replace(" ", "")
    if not s:
        raise FieldError("empty field element")
    root = s.find("√")
    if root < 0:
        return FieldScalar.new(_parse_fraction(s, text))
    d_txt = s[root + 1:]
    if not d_txt.isdigit():
        raise FieldError(f"bad radical in {text!r}")
    dd = int(d_txt)
    if d is not None and dd not in (1, d):
        raise FieldError(f"coordinate {text!r} lies outside Q(√{d})")
    head = s[:root]
    # split head into rational part and radical coefficient
    if head in ("", "+"):
        return FieldScalar.new(0, 1, dd)
    if head == "-":
        return FieldScalar.new(0, -1, dd)
    # find the split sign (last '+'/'-' not at position 0 and not after '/')
    split = -1
    for i in range(len(head) - 1, 0, -1):
        if head[i] in "+-" and head[i - 1] not in "+-/":
            split = i
            break
    if split < 0:
        return FieldScalar.new(0, _parse_fraction(head, text), dd)
    a = _parse_fraction(head[:split], text)
    b_txt = head[split:]
    if b_txt in ("+", "-"):
        b = Fraction(-1 if b_txt == "-" else 1)
    else:
        b = _parse_fraction(b_txt, text)
    return FieldScalar.new(a, b, dd)


def _parse_fraction(s: str, origin: str) -> Fraction:
    try:
        f = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise FieldError(f"bad rational {s!r} in {origin!r}") from exc
    return f


# -- planar points ----------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Point:
    x: FieldScalar
    y: FieldScalar

    @staticmethod
    def of(x, y, d: int = 1) -> "Point":
        def conv(v):
            if isinstance(v, FieldScalar):
                return v
            return FieldScalar.new(Fraction(v), 0, 1)
        return Point(conv(x), conv(y))

    def __add__(self, other: "Point") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Point") -> "Point":
        return Point(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Point":
        return Point(-self.x, -self.y)

    def scale(self, k) -> "Point":
        return Point(self.x * k, self.y * k)

    def cross(self, other: "Point") -> FieldScalar:
        return self.x * other.y - self.y * other.x

    def dot(self, other: "Point") -> FieldScalar:
        return self.x * other.x + self.y * other.y

    def norm2(self) -> FieldScalar:
        return self.dot(self)

    def as_floats(self) -> tuple[float, float]:
        return (float(self.x), float(self.y))

    def __str__(self) -> str:
        return f"({self.x}, {self.y})"


ORIGIN = Point(ZERO, ZERO)
