"""Helpers around ``flint.arb``, the Ball type used throughout.

A Ball is an ``arb``: an exact dyadic midpoint plus a radius, with every
operation rounding outward.  This module converts between Balls, exact
rationals and the decimal strings used in files.
"""
from fractions import Fraction
from contextlib import contextmanager

from flint import arb, arb_mat, ctx, fmpq, fmpz

from .errors import ParseError

Ball = arb

__all__ = [
    "Ball", "workprec", "to_ball", "from_fraction", "exact_dyadic",
    "dyadic_to_decimal", "fraction_to_decimal", "parse_rational",
    "ball_to_json", "ball_from_json", "ball_center", "ball_radius",
    "radius_fraction", "hull", "certainly_positive", "certainly_negative",
    "fraction_to_dyadic_ball",
]


@contextmanager
def workprec(bits):
    """Run a block at ``bits`` of working precision (restored on exit)."""
    with ctx.workprec(int(bits)):
        yield


def exact_dyadic(mantissa, exponent):
    """Exact Ball mantissa * 2**exponent (radius 0)."""
    return arb((fmpz(int(mantissa)), fmpz(int(exponent))))


def from_fraction(q):
    """Ball enclosing the rational ``q`` at the current precision.

    Dyadic rationals are represented exactly.
    """
    q = Fraction(q)
    den = q.denominator
    if den & (den - 1) == 0:
        return exact_dyadic(q.numerator, -(den.bit_length() - 1))
    return arb(fmpq(q.numerator, den))


def to_ball(x):
    """Coerce ints, Fractions, floats, decimal strings or Balls to a Ball."""
    if isinstance(x, arb):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, int):
        return arb(fmpz(x))
    if isinstance(x, float):
        return arb(x)
    if isinstance(x, (Fraction, fmpq)):
        return from_fraction(Fraction(int(x.numerator), int(x.denominator)))
    if isinstance(x, str):
        return from_fraction(parse_rational(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a Ball")


def parse_rational(text):
    """Parse an exact rational from '3', '-1/3', '0.125' or '1e-3'.

    Never goes through binary floating point.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected a string, got {type(text).__name__}")
    s = text.strip()
    if not s:
        raise ParseError("empty number")
    try:
        q = Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not an exact rational: {text!r}") from exc
    return q


def dyadic_to_decimal(mantissa, exponent):
    """Exact decimal rendering of mantissa * 2**exponent.

    Integers render without a point; trailing zeros are stripped.
    """
    mantissa = int(mantissa)
    exponent = int(exponent)
    if mantissa == 0:
        return "0"
    while mantissa % 2 == 0:
        mantissa //= 2
        exponent += 1
    if exponent >= 0:
        return str(mantissa << exponent)
    k = -exponent
    sign = "-" if mantissa < 0 else ""
    digits = str(abs(mantissa) * 5 ** k)
    if len(digits) <= k:
        digits = "0" * (k - len(digits) + 1) + digits
    head, tail = digits[:-k], digits[-k:].rstrip("0")
    return f"{sign}{head}.{tail}" if tail else f"{sign}{head}"


def fraction_to_decimal(q):
    """Exact decimal for dyadic rationals, 'p/q' otherwise."""
    q = Fraction(q)
    den = q.denominator
    if den & (den - 1) == 0:
        return dyadic_to_decimal(q.numerator, -(den.bit_length() - 1))
    return f"{q.numerator}/{q.denominator}"


def ball_center(x):
    """Midpoint of ``x`` as an exact Fraction."""
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man) * Fraction(2) ** exp


def ball_radius(x):
    """Radius of ``x`` as an exact Fraction."""
    man, exp = x.rad().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man) * Fraction(2) ** exp


radius_fraction = ball_radius


def ball_to_json(x):
    """``{"center": ..., "radius": ...}`` with exact decimal strings."""
    if not x.is_finite():
        raise ValueError("cannot serialise a non-finite ball")
    cm, ce = x.mid().man_exp()
    rm, re_ = x.rad().man_exp()
    return {
        "center": dyadic_to_decimal(int(cm), int(ce)),
        "radius": dyadic_to_decimal(int(rm), int(re_)),
    }


def fraction_to_dyadic_ball(q, bits=256):
    """Ball with dyadic center enclosing ``q``; exact when ``q`` is dyadic."""
    q = Fraction(q)
    den = q.denominator
    if den & (den - 1) == 0:
        return from_fraction(q)
    with workprec(bits):
        return +from_fraction(q)


def ball_from_json(obj):
    """Inverse of :func:`ball_to_json`.  Exact for dyadic decimals."""
    try:
        c = parse_rational(obj["center"])
        r = parse_rational(obj["radius"])
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed ball object: {obj!r}") from exc
    if r < 0:
        raise ParseError("negative radius")
    mid = fraction_to_dyadic_ball(c)
    rad = fraction_to_dyadic_ball(r)
    return arb(mid.mid(), rad.upper() + mid.rad())


def hull(xs):
    """Smallest Ball (up to rounding) containing every Ball in ``xs``."""
    it = iter(xs)
    out = next(it)
    for x in it:
        out = out.union(x)
    return out


def certainly_positive(x):
    return bool(x > 0)


def certainly_negative(x):
    return bool(x < 0)


def mat(rows):
    """arb_mat from a nested list of Balls."""
    return arb_mat(rows)
