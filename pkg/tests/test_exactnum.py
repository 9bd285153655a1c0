import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import iv, mp
from mpmath.libmp import to_rational

from carpetbench.exactnum import (
    FieldMismatchError,
    QuadNumber,
    _iv_precision,
    enclosure,
    format_literal,
    parse_literal,
    qn_arith,
    qn_sign,
    qn_to_float,
    rational_bounds,
    sign_witness,
)

D = 42
A = QuadNumber(-6, 1, 12, D)


def quad(p, q, s):
    return QuadNumber(p, q, s, D)


small = st.integers(-50, 50)
quads = st.builds(quad, small, small, st.integers(1, 30))
nonzero = quads.filter(lambda x: x != 0)


def test_canonical_form():
    x = QuadNumber(4, 2, -8, D)
    assert (x.p, x.q, x.s) == (-2, -1, 4)
    assert QuadNumber(3, 0, 6).d is None
    assert QuadNumber(3, 0, 6) == Fraction(1, 2)


def test_defining_identities():
    assert A + A * A == Fraction(1, 24)
    assert 6 * (A * A + A) == Fraction(1, 4)
    assert 0 < A < Fraction(1, 24)


def test_literals_roundtrip():
    for text in ["0", "-3/7", "(-6+1r)/12", "(13-2r)/24", "(5+3r)"]:
        x = parse_literal(text, D)
        assert parse_literal(format_literal(x), D) == x
    assert str(A) == "(-6+1r)/12"
    assert repr(A) == "QuadNumber('(-6+1r)/12', d=42)"


@pytest.mark.parametrize("bad", ["", "1/0x", "(1+r)/2", "abc", "(1+2r)/0"])
def test_bad_literals(bad):
    with pytest.raises((ValueError, ZeroDivisionError)):
        parse_literal(bad, D)


def test_field_mismatch():
    with pytest.raises(FieldMismatchError):
        A + QuadNumber(0, 1, 1, 2)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        qn_arith(A, 0, "div")
    with pytest.raises(ZeroDivisionError):
        1 / (A - A)


def test_rational_hash_matches_fraction():
    assert hash(QuadNumber(3, 0, 4)) == hash(Fraction(3, 4))
    assert len({QuadNumber(1, 0, 2), Fraction(1, 2)}) == 1


def test_immutable():
    with pytest.raises(AttributeError):
        A.p = 3


@given(quads, quads, quads)
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x and x * y == y * x
    assert x - x == 0


@given(nonzero, quads)
def test_division_inverts_multiplication(x, y):
    assert (y / x) * x == y
    assert x * x.inverse() == 1


@given(quads, quads)
def test_order_is_total_and_compatible(x, y):
    assert (x < y) + (x == y) + (x > y) == 1
    assert qn_sign(x - y) == (x > y) - (x < y)
    if x < y:
        assert x + A < y + A


@given(quads)
def test_sign_witness_agrees_with_sign(x):
    w = sign_witness(x)
    assert w.sign == qn_sign(x)
    assert w.rel == {1: ">", 0: "=", -1: "<"}[(w.lhs > w.rhs) - (w.lhs < w.rhs)]


def test_witness_for_a_above_one_25th():
    w = sign_witness(A - Fraction(1, 25))
    assert (w.sign, w.lhs, w.rel, w.rhs) == (1, 26250, ">", 26244)


def test_sign_against_interval_oracle():
    # 10^4 random elements; exact sign must agree with a 100-bit enclosure
    rng = random.Random(7)
    checked = 0
    with _iv_precision(100):
        for _ in range(10_000):
            q = rng.randint(-10**6, 10**6)
            s = rng.randint(1, 10**6)
            # p close to -q sqrt(D) makes the sign decision non-trivial
            p = -round(q * math.sqrt(D)) + rng.randint(-3, 3)
            x = QuadNumber(p, q, s, D)
            enc = (iv.mpf(p) + iv.mpf(q) * iv.sqrt(iv.mpf(D))) / s
            if enc.a > 0:
                assert qn_sign(x) == 1
            elif enc.b < 0:
                assert qn_sign(x) == -1
            else:
                continue
            checked += 1
    assert checked > 9000


@given(quads)
@settings(max_examples=300)
def test_directed_rounding_brackets(x):
    lo, hi = qn_to_float(x, "down"), qn_to_float(x, "up")
    assert QuadNumber.coerce(Fraction(lo)) <= x <= QuadNumber.coerce(Fraction(hi))
    near = qn_to_float(x, "nearest")
    assert lo <= near <= hi
    assert math.nextafter(lo, math.inf) >= hi or lo == hi


def test_float_of_a_is_correctly_rounded():
    with mp.workprec(300):
        ref = float((mp.sqrt(42) - 6) / 12)
    assert float(A) == ref
    assert float(A) == pytest.approx(0.0400617, abs=1e-7)


@given(quads, st.integers(10, 200))
def test_rational_bounds_contain(x, bits):
    lo, hi = rational_bounds(x, bits)
    assert QuadNumber.coerce(lo) <= x <= QuadNumber.coerce(hi)


def test_enclosure_contains_value():
    e = enclosure(A, 128)
    lo, hi = (QuadNumber.coerce(Fraction(*to_rational(r))) for r in e._mpi_)
    assert lo <= A <= hi
    assert hi - lo < Fraction(1, 10**30)


def test_integer_powers():
    assert A**0 == 1
    assert A**2 == A * A
    assert A**-2 * A**2 == 1
