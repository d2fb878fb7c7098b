"""Real numbers as digit-on-demand oracles, with an audit log of bits read.

Three kinds of oracle exist:

``rational:p/q``
    an exact rational (``p/q``, an integer, or a finite decimal such as ``0.25``)
``sqrt:p/q``
    the non-negative square root of a non-negative rational
``dyadic:[-]b...b[.b...b]b``
    a binary literal with a trailing ``b``, e.g. ``dyadic:0.101b`` = 5/8

A query at ``n`` bits returns a :class:`DyadicApprox` within ``2**-n`` of the
true value.  Values that are exactly representable with ``n`` fractional bits
come back exact (error 0).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
import re

from flint import arb

from .ball import exact_dyadic, parse_rational
from .errors import ParseError

__all__ = [
    "DyadicApprox", "RealOracle", "QueryLog", "query", "max_bits_requested",
    "parse_oracle", "rational", "sqrt_rational", "dyadic",
]


def _normalize(mantissa, exponent):
    if mantissa == 0:
        return 0, 0
    while mantissa % 2 == 0:
        mantissa //= 2
        exponent += 1
    return mantissa, exponent


@dataclass(frozen=True)
class DyadicApprox:
    """``mantissa * 2**exponent`` with ``|value - true| <= error``.

    ``error`` is a dyadic Fraction (0 when the value is exact).
    """

    mantissa: int
    exponent: int
    error: Fraction

    @property
    def value(self):
        return Fraction(self.mantissa) * Fraction(2) ** self.exponent

    def to_ball(self):
        """Ball [value - error, value + error]; exact midpoint."""
        mid = exact_dyadic(self.mantissa, self.exponent)
        if self.error == 0:
            return mid
        e = self.error
        rad = exact_dyadic(e.numerator, -(e.denominator.bit_length() - 1))
        return arb(mid, rad)


def _round_to_bits(q, bits):
    """Nearest n-fractional-bit dyadic to rational q (ties to even)."""
    scaled = q * (1 << bits)
    m = round(scaled)
    if m == scaled:
        mant, exp = _normalize(int(m), -bits)
        return DyadicApprox(mant, exp, Fraction(0))
    mant, exp = _normalize(int(m), -bits)
    return DyadicApprox(mant, exp, Fraction(1, 1 << (bits + 1)))


@dataclass(frozen=True)
class RealOracle:
    """An immutable, queryable real number.

    Use :func:`parse_oracle` or the ``rational``/``sqrt_rational``/``dyadic``
    helpers rather than building one by hand; they validate the input.
    """

    kind: str
    value: Fraction
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("rational", "sqrt", "dyadic"):
            raise ParseError(f"unknown oracle kind {self.kind!r}")
        if self.kind == "sqrt" and self.value < 0:
            raise ParseError("sqrt of a negative rational")
        if self.kind == "dyadic":
            den = self.value.denominator
            if den & (den - 1):
                raise ParseError("dyadic oracle with non-dyadic value")

    def approx(self, bits):
        """The approximation at ``bits`` bits, without logging."""
        bits = int(bits)
        if bits < 1:
            raise ValueError("bits must be >= 1")
        if self.kind in ("rational", "dyadic"):
            return _round_to_bits(self.value, bits)
        p, q = self.value.numerator, self.value.denominator
        # floor(sqrt(p/q) * 2**bits) == isqrt(floor(p * 4**bits / q))
        m = isqrt((p << (2 * bits)) // q)
        if m * m * q == p << (2 * bits):
            mant, exp = _normalize(m, -bits)
            return DyadicApprox(mant, exp, Fraction(0))
        # true value lies in (m, m+1) * 2**-bits; report the midpoint
        mant, exp = _normalize(2 * m + 1, -(bits + 1))
        return DyadicApprox(mant, exp, Fraction(1, 1 << (bits + 1)))

    def exact_value(self):
        """The exact value if rational, else None."""
        if self.kind == "sqrt":
            p, q = self.value.numerator, self.value.denominator
            rp, rq = isqrt(p), isqrt(q)
            if rp * rp == p and rq * rq == q:
                return Fraction(rp, rq)
            return None
        return self.value

    def spec(self):
        """The tagged string this oracle was (or could have been) parsed from."""
        if self.kind == "dyadic":
            return "dyadic:" + _binary_literal(self.value)
        v = self.value
        return f"{self.kind}:{v.numerator}/{v.denominator}"

    def __str__(self):
        return self.spec()


def _binary_literal(q):
    sign = "-" if q < 0 else ""
    q = abs(q)
    k = q.denominator.bit_length() - 1
    n = q.numerator
    whole, frac = divmod(n, 1 << k)
    s = sign + bin(whole)[2:]
    if k:
        s += "." + format(frac, f"0{k}b")
    return s + "b"


def rational(q, label=""):
    return RealOracle("rational", Fraction(q), label)


def sqrt_rational(q, label=""):
    return RealOracle("sqrt", Fraction(q), label)


def dyadic(q, label=""):
    return RealOracle("dyadic", Fraction(q), label)


_DYADIC_RE = re.compile(r"^([+-]?)([01]+)(?:\.([01]*))?b$")


def parse_oracle(text, label=""):
    """Build an oracle from a tagged string such as ``"sqrt:2/1"``."""
    if not isinstance(text, str) or ":" not in text:
        raise ParseError(f"oracle spec must look like 'kind:value', got {text!r}")
    kind, _, body = text.strip().partition(":")
    kind = kind.strip().lower()
    body = body.strip()
    if kind == "rational":
        return RealOracle("rational", parse_rational(body), label)
    if kind == "sqrt":
        q = parse_rational(body)
        if q < 0:
            raise ParseError(f"sqrt of a negative rational: {text!r}")
        return RealOracle("sqrt", q, label)
    if kind == "dyadic":
        m = _DYADIC_RE.match(body)
        if not m:
            raise ParseError(f"bad binary literal {body!r} (expected e.g. 0.101b)")
        sign, whole, frac = m.group(1), m.group(2), m.group(3) or ""
        value = Fraction(int(whole + frac, 2), 1 << len(frac))
        if sign == "-":
            value = -value
        return RealOracle("dyadic", value, label)
    raise ParseError(f"unknown oracle kind {kind!r}")


@dataclass
class QueryLog:
    """Per-coordinate maximum of requested bits, plus a query counter.

    ``coords`` fixes the coordinate order reported by
    :func:`max_bits_requested`; unseen coordinates report 0.
    """

    coords: list = field(default_factory=list)
    max_bits: dict = field(default_factory=dict)
    queries: int = 0

    def record(self, coord, bits):
        if coord not in self.coords:
            self.coords.append(coord)
        self.max_bits[coord] = max(self.max_bits.get(coord, 0), int(bits))
        self.queries += 1

    def as_dict(self):
        return {c: self.max_bits.get(c, 0) for c in self.coords}


def query(oracle, bits, log=None, coord=None):
    """Query ``oracle`` at ``bits`` bits and record it in ``log``."""
    if int(bits) < 1:
        raise ValueError("bits must be >= 1")
    approx = oracle.approx(bits)
    if log is not None:
        log.record(coord if coord is not None else (oracle.label or str(oracle)), bits)
    return approx


def max_bits_requested(log):
    """Max bits per coordinate, in ``log.coords`` order (0 if never queried)."""
    return [log.max_bits.get(c, 0) for c in log.coords]
