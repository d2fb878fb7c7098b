"""Ephemeris of the two primaries: period, mean anomaly, Kepler's equation.

Each primary has gravitational parameter ``mu`` and moves on an ellipse of
semimajor axis ``a`` about the common barycenter, so the pair separation has
semimajor axis ``2a`` and total parameter ``2 mu``.  The mean motion is
therefore ``n = sqrt(mu / (4 a**3))`` and the period ``P = 4 pi sqrt(a**3/mu)``.
"""
from dataclasses import dataclass
from fractions import Fraction
import math

from flint import arb

from .ball import (ball_center, ball_radius, exact_dyadic, parse_rational,
                   to_ball, workprec)
from .errors import DomainError, ParseError, ResourceError

__all__ = [
    "OrbitParams", "Anomaly", "mean_motion", "period", "mean_anomaly",
    "solve_eccentric_anomaly", "radius", "eccentric_anomaly_at",
]

DEFAULT_PREC = 128


def _certain_sign(x, *, positive):
    return bool(x > 0) if positive else bool(x < 0)


@dataclass(frozen=True)
class OrbitParams:
    """Orbit of the primaries: a > 0, 0 <= e < 1, mu > 0, phi = E(0).

    Fields may be exact rationals (ints, Fractions, decimal strings) or
    Balls.  ``e = 0`` is accepted for circular test configurations.
    """

    a: object = 1
    e: object = 0
    mu: object = 1
    phi: object = 0

    def __post_init__(self):
        for name in ("a", "e", "mu", "phi"):
            v = getattr(self, name)
            if isinstance(v, str):
                object.__setattr__(self, name, parse_rational(v))
            elif isinstance(v, int) and not isinstance(v, bool):
                object.__setattr__(self, name, Fraction(v))
        a, e, mu = (to_ball(x) for x in (self.a, self.e, self.mu))
        if not a > 0:
            raise DomainError("semimajor axis must be > 0")
        if not mu > 0:
            raise DomainError("mu must be > 0")
        if not (e >= 0 and e < 1):
            raise DomainError("eccentricity must satisfy 0 <= e < 1")

    def balls(self, prec=DEFAULT_PREC):
        """(a, e, mu, phi) as Balls rounded to ``prec`` bits."""
        with workprec(prec):
            return tuple(+to_ball(x) for x in (self.a, self.e, self.mu, self.phi))

    def to_json(self):
        from .ball import fraction_to_decimal, ball_to_json
        out = {}
        for name in ("a", "e", "mu", "phi"):
            v = getattr(self, name)
            out[name] = ball_to_json(v) if isinstance(v, arb) else fraction_to_decimal(v)
        return out

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict):
            raise ParseError("orbit must be a JSON object")
        unknown = set(obj) - {"a", "e", "mu", "phi"}
        if unknown:
            raise ParseError(f"unknown orbit fields: {sorted(unknown)}")
        vals = {}
        for k in ("a", "e", "mu", "phi"):
            if k not in obj:
                if k == "phi":
                    continue
                raise ParseError(f"orbit is missing field {k!r}")
            if not isinstance(obj[k], str):
                raise ParseError(f"orbit field {k!r} must be a decimal string")
            vals[k] = parse_rational(obj[k])
        return cls(**vals)


@dataclass(frozen=True)
class Anomaly:
    """Eccentric anomaly enclosure: the true E lies in ``ball``."""

    ball: arb

    @property
    def E(self):
        return ball_center(self.ball)

    @property
    def radius(self):
        return ball_radius(self.ball)


def mean_motion(params, prec=DEFAULT_PREC):
    """n = sqrt(mu / (4 a^3)), as a Ball."""
    a, _, mu, _ = params.balls(prec + 16)
    with workprec(prec):
        return (mu / (4 * a ** 3)).sqrt()


def period(params, prec=DEFAULT_PREC):
    """P = 4 pi sqrt(a^3 / mu), as a Ball."""
    a, _, mu, _ = params.balls(prec + 16)
    with workprec(prec):
        return 4 * arb.pi() * (a ** 3 / mu).sqrt()


def mean_anomaly(params, t, prec=DEFAULT_PREC):
    """M(t) = n t + phi - e sin(phi), i.e. epoch chosen so that E(0) = phi."""
    a, e, mu, phi = params.balls(prec + 16)
    with workprec(prec + 16):
        n = (mu / (4 * a ** 3)).sqrt()
        m = n * to_ball(t) + phi - e * phi.sin()
    with workprec(prec):
        return +m


def _tol_bits(tol):
    tol = Fraction(tol)
    if tol <= 0:
        raise DomainError("tolerance must be > 0")
    return max(1, math.ceil(-math.log2(tol)) if tol < 1 else 1)


def solve_eccentric_anomaly(e, M, tol=Fraction(1, 2 ** 64), max_prec=1 << 16):
    """Solve E - e sin E = M with a certified residual bound.

    Newton from ``M + e sin M``, falling back to bisection whenever a step
    leaves the current bracket (initially ``[M - e, M + e]``).  The returned
    enclosure has radius ``|g(E_c)| / (1 - e)`` where ``g(E_c)`` is evaluated
    in Ball arithmetic at the exact midpoint ``E_c``; the residual is at most
    ``tol`` and so the radius at most ``tol / (1 - e)``.

    ``e`` and ``M`` may be rationals, floats or Balls.
    """
    e_in, m_in = e, M
    tolq = Fraction(tol)
    need = _tol_bits(tolq)
    prec = need + 32
    while prec <= max_prec:
        with workprec(prec + 16):
            e_b = +to_ball(e_in)
            m_b = +to_ball(m_in)
        if not (e_b >= 0 and e_b < 1):
            raise DomainError("eccentricity must satisfy 0 <= e < 1")
        if not m_b.rad() + e_b.rad() < to_ball(tolq):
            raise DomainError("M or e is not known to within tol; pass tighter Balls")
        mag = max(0, math.ceil(math.log2(1 + float(m_b.abs_upper()))))
        wp = prec + mag
        anomaly = _solve_at(e_b, m_b, tolq, wp)
        if anomaly is not None:
            return anomaly
        prec *= 2
    raise ResourceError("Kepler solve did not certify within the precision cap")


def _solve_at(e_b, m_b, tolq, wp):
    with workprec(wp):
        e_mid, m_mid = e_b.mid(), m_b.mid()
        lo = m_mid - e_mid
        hi = m_mid + e_mid
        x = (m_mid + e_mid * m_mid.sin()).mid()
        eps = arb(2) ** (6 - wp)
        eps = eps * (1 + abs(m_mid))
        for _ in range(4 * wp):
            s, c = x.sin_cos()
            gm = (x - e_mid * s - m_mid).mid()
            if gm.is_zero():
                break
            if gm > 0:
                hi = x
            else:
                lo = x
            step = (x - gm / (1 - e_mid * c)).mid()
            if not (step > lo and step < hi):
                step = ((lo + hi) / 2).mid()
            done = abs(step - x) < eps
            x = step
            if done:
                break
        # certify at the exact midpoint x
        g = x - e_b * x.sin() - m_b
        bound = g.abs_upper()
        tol_b = to_ball(tolq)
        if not bound <= tol_b:
            return None
        if bound.is_zero():
            return Anomaly(arb(x.mid()))
        denom = 1 - e_b.upper()
        # a radius that depends only on wp keeps refinement monotone
        floor_rad = arb(2) ** (16 - wp) * (1 + abs(m_b).upper())
        rad = (bound.max(floor_rad) / denom).upper()
        return Anomaly(arb(x.mid(), rad))


def radius(params, E, prec=DEFAULT_PREC):
    """r = a (1 - e cos E), intersected with [a(1-e), a(1+e)]."""
    ball = E.ball if isinstance(E, Anomaly) else to_ball(E)
    a, e, _, _ = params.balls(prec + 16)
    with workprec(prec):
        r = a * (1 - e * ball.cos())
        lo = a * (1 - e)
        hi = a * (1 + e)
        rng = arb(lo.lower()).union(arb(hi.upper()))
        try:
            return r.intersection(rng)
        except ValueError:
            return r


def eccentric_anomaly_at(params, t, tol=Fraction(1, 2 ** 64)):
    """E(t) from Kepler's equation with E(0) = phi."""
    bits = _tol_bits(Fraction(tol)) + 48
    M = mean_anomaly(params, t, prec=bits)
    return solve_eccentric_anomaly(params.balls(bits)[1], M, tol)
