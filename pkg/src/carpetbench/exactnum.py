"""Exact arithmetic in a real quadratic field Q(sqrt(D)).

Elements are stored as ``(p + q*sqrt(D)) / s`` with ``s > 0`` and
``gcd(p, q, s) == 1``.  Rationals (``q == 0``) carry no radicand, so they mix
freely with elements of any field.  Signs are decided by integer comparisons
only; floats come out of this module exclusively through :meth:`QuadNumber.to_float`
and :func:`enclosure`, both of which are certified.
"""
from __future__ import annotations

import math
import re
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Union

from mpmath import iv

Number = Union[int, Fraction, "QuadNumber"]

_OPS = ("add", "sub", "mul", "div")


class FieldMismatchError(ValueError):
    """Raised when two irrational operands live in different quadratic fields."""


@lru_cache(maxsize=None)
def _check_radicand(d: int) -> int:
    if not isinstance(d, int) or d <= 1:
        raise ValueError(f"radicand must be an integer > 1, got {d!r}")
    if math.isqrt(d) ** 2 == d:
        raise ValueError(f"radicand {d} is a perfect square")
    return d


class QuadNumber:
    __slots__ = ("p", "q", "s", "d", "_h")

    def __init__(self, p: int, q: int = 0, s: int = 1, d: int | None = None):
        if s == 0:
            raise ZeroDivisionError("zero denominator")
        if q != 0:
            if d is None:
                raise ValueError("irrational QuadNumber needs a radicand")
            _check_radicand(d)
        else:
            d = None
        if s < 0:
            p, q, s = -p, -q, -s
        g = math.gcd(math.gcd(p, q), s)
        if g > 1:
            p, q, s = p // g, q // g, s // g
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "d", d)

    def __setattr__(self, name, value):
        raise AttributeError("QuadNumber is immutable")

    # -- construction -------------------------------------------------------

    @classmethod
    def coerce(cls, x: Number) -> "QuadNumber":
        if isinstance(x, QuadNumber):
            return x
        if isinstance(x, bool):
            raise TypeError("bool is not a number here")
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, Fraction):
            return cls(x.numerator, 0, x.denominator)
        raise TypeError(f"cannot convert {type(x).__name__} to QuadNumber")

    @classmethod
    def sqrt(cls, d: int) -> "QuadNumber":
        return cls(0, 1, 1, d)

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "QuadNumber":
        return parse_literal(text, d)

    # -- predicates / views -------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if self.q:
            raise ValueError(f"{self} is irrational")
        return Fraction(self.p, self.s)

    def sign(self) -> int:
        return qn_sign(self)

    def conjugate(self) -> "QuadNumber":
        return QuadNumber(self.p, -self.q, self.s, self.d)

    def norm(self) -> Fraction:
        """Field norm x * conj(x), a rational."""
        d = self.d or 0
        return Fraction(self.p * self.p - self.q * self.q * d, self.s * self.s)

    # -- arithmetic ---------------------------------------------------------

    def _field(self, other: "QuadNumber") -> int | None:
        if self.d is None:
            return other.d
        if other.d is None or other.d == self.d:
            return self.d
        raise FieldMismatchError(f"Q(sqrt({self.d})) vs Q(sqrt({other.d}))")

    def __add__(self, other):
        try:
            o = QuadNumber.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(o)
        return QuadNumber(self.p * o.s + o.p * self.s, self.q * o.s + o.q * self.s, self.s * o.s, d)

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.p, -self.q, self.s, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            o = QuadNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = QuadNumber.coerce(other)
        except TypeError:
            return NotImplemented
        d = self._field(o)
        dd = d or 0
        return QuadNumber(
            self.p * o.p + self.q * o.q * dd,
            self.p * o.q + self.q * o.p,
            self.s * o.s,
            d,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadNumber":
        dd = self.d or 0
        n = self.p * self.p - self.q * self.q * dd
        if n == 0:
            raise ZeroDivisionError("division by zero QuadNumber")
        # 1/x = s * conj / (p^2 - q^2 D)
        return QuadNumber(self.p * self.s, -self.q * self.s, n, self.d)

    def __truediv__(self, other):
        try:
            o = QuadNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return QuadNumber.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = QuadNumber(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison ---------------------------------------------------------

    def __eq__(self, other):
        try:
            o = QuadNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return (self.p, self.q, self.s, self.d) == (o.p, o.q, o.s, o.d)

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            pass
        h = hash(Fraction(self.p, self.s)) if self.q == 0 else hash((self.p, self.q, self.s, self.d))
        object.__setattr__(self, "_h", h)
        return h

    def _cmp(self, other) -> int:
        return qn_sign(self - QuadNumber.coerce(other))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return self.p != 0 or self.q != 0

    # -- conversion ---------------------------------------------------------

    def to_float(self, mode: str = "nearest") -> float:
        return qn_to_float(self, mode)

    def __float__(self):
        return qn_to_float(self, "nearest")

    def __str__(self):
        return format_literal(self)

    def __repr__(self):
        if self.d is None:
            return f"QuadNumber({format_literal(self)!r})"
        return f"QuadNumber({format_literal(self)!r}, d={self.d})"


def qn_arith(x: Number, y: Number, op: str) -> QuadNumber:
    """Apply one of ``add``, ``sub``, ``mul``, ``div``.  Division by zero raises."""
    x = QuadNumber.coerce(x)
    y = QuadNumber.coerce(y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown op {op!r}; expected one of {_OPS}")


# -- signs -------------------------------------------------------------------


def qn_sign(x: Number) -> int:
    x = QuadNumber.coerce(x)
    p, q = x.p, x.q
    if q == 0:
        return (p > 0) - (p < 0)
    if p >= 0 and q > 0:
        return 1
    if p <= 0 and q < 0:
        return -1
    # mixed signs: compare p^2 with q^2 D (never equal, D is not a square)
    if p * p > q * q * x.d:
        return 1 if p > 0 else -1
    return 1 if q > 0 else -1


class SignWitness(NamedTuple):
    """An integer inequality ``lhs rel rhs`` equivalent to the sign of x."""

    sign: int
    lhs: int
    rel: str
    rhs: int

    def __str__(self):
        return f"{self.lhs} {self.rel} {self.rhs}"


def _rel(a: int, b: int) -> str:
    return ">" if a > b else "<" if a < b else "="


def sign_witness(x: Number) -> SignWitness:
    """Like :func:`qn_sign` but also returns the integer comparison used."""
    x = QuadNumber.coerce(x)
    sgn = qn_sign(x)
    p, q = x.p, x.q
    if q == 0:
        return SignWitness(sgn, p, _rel(p, 0), 0)
    if (p >= 0) == (q > 0) or p == 0:
        # same sign: the radical part alone decides
        return SignWitness(sgn, q, _rel(q, 0), 0)
    lhs, rhs = q * q * x.d, p * p
    return SignWitness(sgn, lhs, _rel(lhs, rhs), rhs)


# -- floating point ----------------------------------------------------------


def _round_fraction(f: Fraction, mode: str) -> float:
    v = float(f)
    if mode == "down" and Fraction(v) > f:
        v = math.nextafter(v, -math.inf)
    elif mode == "up" and Fraction(v) < f:
        v = math.nextafter(v, math.inf)
    return v


def rational_bounds(x: QuadNumber, bits: int) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= x <= hi`` with ``hi - lo <= 2**-bits / s``."""
    if x.q == 0:
        f = Fraction(x.p, x.s)
        return f, f
    scale = 1 << bits
    r = math.isqrt(x.q * x.q * x.d * scale * scale)
    # |q| sqrt(D) in [r, r + 1] / scale
    if x.q > 0:
        lo_rad, hi_rad = Fraction(r, scale), Fraction(r + 1, scale)
    else:
        lo_rad, hi_rad = Fraction(-r - 1, scale), Fraction(-r, scale)
    return (x.p + lo_rad) / x.s, (x.p + hi_rad) / x.s


def qn_to_float(x: Number, mode: str = "nearest") -> float:
    """Binary64 value of ``x``.

    ``nearest`` is correctly rounded; ``down``/``up`` are certified bounds.
    """
    if mode not in ("nearest", "down", "up"):
        raise ValueError(f"unknown rounding mode {mode!r}")
    x = QuadNumber.coerce(x)
    if x.q == 0:
        return _round_fraction(Fraction(x.p, x.s), mode)
    bits = 80 + x.s.bit_length()
    while True:
        lo, hi = rational_bounds(x, bits)
        a = _round_fraction(lo, "nearest")
        b = _round_fraction(hi, "nearest")
        # an irrational value is never a rounding tie, so this terminates
        if a == b:
            if mode == "nearest":
                return a
            return _round_fraction(lo, "down") if mode == "down" else _round_fraction(hi, "up")
        bits *= 2


@contextmanager
def _iv_precision(prec: int):
    old = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = old


def enclosure(x: Number, prec: int = 128):
    """mpmath interval containing ``x`` (outward rounded at ``prec`` bits)."""
    x = QuadNumber.coerce(x)
    with _iv_precision(prec):
        val = iv.mpf(x.p)
        if x.q:
            val = val + iv.mpf(x.q) * iv.sqrt(iv.mpf(x.d))
        return val / x.s


# -- literals ----------------------------------------------------------------

_INT = r"[+-]?\d+"
_RAT_RE = re.compile(rf"^({_INT})(?:/(\d+))?$")
_QUAD_RE = re.compile(rf"^\(\s*({_INT})\s*([+-])\s*(\d+)r\s*\)(?:/(\d+))?$")


def parse_literal(text: str, d: int | None = None) -> QuadNumber:
    """Parse ``INT``, ``INT/NAT`` or ``(INT+NATr)/NAT`` (``r`` is sqrt(d))."""
    t = text.strip()
    m = _RAT_RE.match(t)
    if m:
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return QuadNumber(int(m.group(1)), 0, den)
    m = _QUAD_RE.match(t)
    if m:
        if d is None:
            raise ValueError(f"literal {text!r} uses r but no radicand is set")
        q = int(m.group(3)) * (1 if m.group(2) == "+" else -1)
        den = int(m.group(4)) if m.group(4) else 1
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return QuadNumber(int(m.group(1)), q, den, d)
    raise ValueError(f"malformed number literal {text!r}")


def format_literal(x: QuadNumber) -> str:
    if x.q == 0:
        return str(x.p) if x.s == 1 else f"{x.p}/{x.s}"
    sign = "+" if x.q > 0 else "-"
    return f"({x.p}{sign}{abs(x.q)}r)/{x.s}"
