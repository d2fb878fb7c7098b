"""Vector fields of the Sitnikov and three-body problems and maps between them.

Sitnikov state ``x = (a, e, mu, z, v, E)`` evolves by::

    a' = e' = mu' = 0,   z' = v,
    v' = -2 mu z / (z^2 + rho^2)^(3/2),   rho = a (1 - e cos E),
    E' = n / (1 - e cos E),               n = sqrt(mu / (4 a^3)).
"""
from dataclasses import dataclass, fields
from fractions import Fraction

from flint import arb

from .ball import parse_rational, to_ball, workprec
from .errors import DomainError, ShapeError
from .kepler import OrbitParams

__all__ = [
    "SitnikovState", "ThreeBodyState", "LipschitzBound", "sitnikov_rhs",
    "sitnikov_jacobian", "lipschitz_bound", "nbody_rhs", "embed_three_body",
    "project_sitnikov", "energy_circular", "DEFAULT_SHAPE_RTOL",
]

DEFAULT_PREC = 128
DEFAULT_SHAPE_RTOL = Fraction(1, 2 ** 40)
STATE_NAMES = ("a", "e", "mu", "z", "v", "E")


@dataclass(frozen=True)
class SitnikovState:
    """The six-component state; fields are rationals or Balls."""

    a: object
    e: object
    mu: object
    z: object
    v: object
    E: object

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if isinstance(val, str):
                object.__setattr__(self, f.name, parse_rational(val))

    def balls(self, prec=DEFAULT_PREC):
        with workprec(prec):
            return [+to_ball(getattr(self, n)) for n in STATE_NAMES]

    def orbit(self):
        return OrbitParams(self.a, self.e, self.mu, self.E)

    @classmethod
    def from_orbit(cls, params, z, v, E=None):
        return cls(params.a, params.e, params.mu, z, v, params.phi if E is None else E)


def _check_state(a, e, mu):
    if not (a > 0 and mu > 0):
        raise DomainError("a and mu must be > 0")
    if not (e >= 0 and e < 1):
        raise DomainError("eccentricity must satisfy 0 <= e < 1")


def sitnikov_rhs(x, prec=DEFAULT_PREC):
    """f(x) = (0, 0, 0, v, z'', E') as Balls."""
    a, e, mu, z, v, E = x.balls(prec + 16) if isinstance(x, SitnikovState) else x
    _check_state(a, e, mu)
    with workprec(prec):
        d = 1 - e * E.cos()
        rho = a * d
        w2 = z * z + rho * rho
        acc = -2 * mu * z / (w2 * w2.sqrt())
        edot = (mu / (4 * a ** 3)).sqrt() / d
        zero = arb(0)
        return [zero, zero, zero, +v, acc, edot]


def sitnikov_jacobian(x, prec=DEFAULT_PREC, full=False):
    """6x6 matrix of partial derivatives of :func:`sitnikov_rhs`.

    By default only the (z, v, E) block is filled: dz'/dv, dv'/dz, dv'/dE
    and dE'/dE.  With ``full=True`` the columns for a, e and mu are
    included too.
    """
    a, e, mu, z, v, E = x.balls(prec + 16) if isinstance(x, SitnikovState) else x
    _check_state(a, e, mu)
    with workprec(prec):
        s, c = E.sin_cos()
        d = 1 - e * c
        rho = a * d
        w2 = z * z + rho * rho
        w = w2.sqrt()
        u3 = 1 / (w2 * w)
        u5 = u3 / w2
        n = (mu / (4 * a ** 3)).sqrt()
        edot = n / d
        J = [[arb(0)] * 6 for _ in range(6)]
        J[3][4] = arb(1)
        J[4][3] = -2 * mu * (u3 - 3 * z * z * u5)
        J[4][5] = 6 * mu * z * u5 * a * rho * e * s
        J[5][5] = -n * e * s / (d * d)
        if full:
            J[4][0] = 6 * mu * z * u5 * rho * d
            J[4][1] = -6 * mu * z * u5 * rho * a * c
            J[4][2] = -2 * z * u3
            J[5][0] = -3 * edot / (2 * a)
            J[5][1] = n * c / (d * d)
            J[5][2] = edot / (2 * mu)
        return J


@dataclass(frozen=True)
class LipschitzBound:
    """Certified upper bound ``L`` on the row-sum norm of the (z, v, E) Jacobian."""

    L: arb
    rows: tuple

    def __float__(self):
        return float(self.L.upper().mid())


def lipschitz_bound(params, prec=DEFAULT_PREC):
    """Global row-sum-norm bound for fixed (a, e, mu), all z, v, E.

    With c = a (1 - e) the smallest possible rho:
      row z: 1
      row v: 2 mu (1/c^3 + 3 sup z^2/w^5) + 6 mu a e sup |z|/w^3 / c
      row E: n e / (1 - e)^2
    using sup z^2/w^5 = (2/3)(3/5)^(5/2)/c^3 at z^2 = 2c^2/3 and
    sup |z|/w^3 = (2/3)^(3/2)/sqrt(2)/c^2 at z^2 = c^2/2.
    """
    a, e, mu, _ = params.balls(prec + 16) if isinstance(params, OrbitParams) else params
    if not (e >= 0 and e < 1):
        raise DomainError("Lipschitz bound needs 0 <= e < 1")
    if not (a > 0 and mu > 0):
        raise DomainError("a and mu must be > 0")
    with workprec(prec):
        c = a * (1 - e.upper())
        c3 = c.lower() ** 3
        sup_z2w5 = arb(2) / 3 * (arb(3) / 5) ** arb(2.5) / c3
        sup_zw3 = (arb(2) / 3) ** arb(1.5) / arb(2).sqrt() / (c.lower() ** 2)
        row_v = 2 * mu * (1 / c3 + 3 * sup_z2w5) + 6 * mu * a * e * sup_zw3 / c.lower()
        n = (mu / (4 * a ** 3)).sqrt()
        row_e = n * e / (1 - e.upper()) ** 2
        rows = (arb(1), arb(row_v.upper()), arb(row_e.upper()))
        L = rows[0]
        for r in rows[1:]:
            L = L.max(r) if hasattr(L, "max") else (r if r > L else L)
        return LipschitzBound(arb(L.upper()), rows)


def energy_circular(a, mu, z, v):
    """v^2/2 - 2 mu / sqrt(z^2 + a^2), conserved when e = 0."""
    return v * v / 2 - 2 * mu / (z * z + a * a).sqrt()


# ---------------------------------------------------------------- three-body


@dataclass(frozen=True)
class ThreeBodyState:
    """Masses, positions and velocities of three bodies (21 numbers)."""

    masses: tuple
    positions: tuple
    velocities: tuple

    def vector(self):
        out = list(self.masses)
        for p in self.positions:
            out.extend(p)
        for w in self.velocities:
            out.extend(w)
        return out

    @classmethod
    def from_vector(cls, vec):
        vec = list(vec)
        if len(vec) != 21:
            raise ShapeError("three-body state needs 21 components")
        m = tuple(vec[0:3])
        p = tuple(tuple(vec[3 + 3 * i:6 + 3 * i]) for i in range(3))
        w = tuple(tuple(vec[12 + 3 * i:15 + 3 * i]) for i in range(3))
        return cls(m, p, w)


def nbody_rhs(s, prec=DEFAULT_PREC):
    """(p1', p2', p3', v1', v2', v3') with v_i' = sum_j mu_j (p_j - p_i)/|p_j - p_i|^3."""
    with workprec(prec + 16):
        m = [+to_ball(x) for x in s.masses]
        p = [[+to_ball(x) for x in q] for q in s.positions]
        w = [[+to_ball(x) for x in q] for q in s.velocities]
    with workprec(prec):
        acc = [[arb(0)] * 3 for _ in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                d = [p[j][k] - p[i][k] for k in range(3)]
                r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                if not r2 > 0:
                    raise DomainError(f"collision (or possible collision) of bodies {i + 1} and {j + 1}")
                inv3 = 1 / (r2 * r2.sqrt())
                for k in range(3):
                    acc[i][k] += m[j] * d[k] * inv3
                    acc[j][k] -= m[i] * d[k] * inv3
        out = []
        for i in range(3):
            out.extend(+x for x in w[i])
        for i in range(3):
            out.extend(acc[i])
        return out


def embed_three_body(params, x, prec=DEFAULT_PREC):
    """Map G: a Sitnikov state to the equivalent three-body state.

    ``params`` supplies (a, e, mu) (an OrbitParams or a SitnikovState); ``x``
    supplies (z, v, E).  Primary 1 sits at a (cos E - e, sqrt(1-e^2) sin E, 0)
    and primary 2 at the opposite point, both with mass mu and the Keplerian
    velocities; the massless third body is at (0, 0, z) moving with (0, 0, v).
    """
    with workprec(prec + 16):
        a, e, mu = (+to_ball(getattr(params, k)) for k in ("a", "e", "mu"))
        z, v, E = (+to_ball(getattr(x, k)) for k in ("z", "v", "E"))
    _check_state(a, e, mu)
    with workprec(prec):
        s, c = E.sin_cos()
        b = (1 - e * e).sqrt()
        d = 1 - e * c
        edot = (mu / (4 * a ** 3)).sqrt() / d
        p1 = (a * (c - e), a * b * s, arb(0))
        v1 = (-a * s * edot, a * b * c * edot, arb(0))
        p2 = tuple(-q for q in p1)
        v2 = tuple(-q for q in v1)
        zero = arb(0)
        return ThreeBodyState(
            (mu, +mu, zero),
            (p1, p2, (zero, zero, +z)),
            (v1, v2, (zero, zero, +v)),
        )


def _small(x, tol):
    return bool(abs(x) <= tol)


def project_sitnikov(s, rtol=DEFAULT_SHAPE_RTOL, prec=DEFAULT_PREC):
    """Map H: recover (a, e, mu, z, v, E) from a Sitnikov-shaped three-body state.

    Raises ShapeError if the configuration is not of Sitnikov type within
    ``rtol`` (relative to the size of the configuration).  E is returned in
    [0, 2 pi).
    """
    with workprec(prec + 16):
        m = [+to_ball(q) for q in s.masses]
        p = [[+to_ball(q) for q in r] for r in s.positions]
        w = [[+to_ball(q) for q in r] for r in s.velocities]
    with workprec(prec):
        scale_p = max([abs(q).upper() for r in p for q in r] + [arb(1)], key=float)
        scale_v = max([abs(q).upper() for r in w for q in r] + [arb(1)], key=float)
        scale_m = max([abs(q).upper() for q in m] + [arb(0)], key=float)
        tp = scale_p * to_ball(rtol)
        tv = scale_v * to_ball(rtol)
        tm = scale_m * to_ball(rtol)
        if not m[0] > 0:
            raise ShapeError("primary masses must be positive")
        if not _small(m[0] - m[1], tm):
            raise ShapeError("primaries have unequal masses")
        if not _small(m[2], tm):
            raise ShapeError("third body is not massless")
        for k in range(3):
            if not _small(p[0][k] + p[1][k], tp) or not _small(w[0][k] + w[1][k], tv):
                raise ShapeError("primaries are not symmetric about the origin")
        for i in range(2):
            if not _small(p[i][2], tp) or not _small(w[i][2], tv):
                raise ShapeError("primaries are not in the XY plane")
        for k in range(2):
            if not _small(p[2][k], tp) or not _small(w[2][k], tv):
                raise ShapeError("third body is off the Z axis")
        mu = (m[0] + m[1]) / 2
        # half-separation vector and its velocity; effective parameter mu/4
        rx, ry = (p[0][0] - p[1][0]) / 2, (p[0][1] - p[1][1]) / 2
        ux, uy = (w[0][0] - w[1][0]) / 2, (w[0][1] - w[1][1]) / 2
        k = mu / 4
        r = (rx * rx + ry * ry).sqrt()
        u2 = ux * ux + uy * uy
        energy = u2 / 2 - k / r
        if not energy < 0:
            raise ShapeError("primaries are not on a bound ellipse")
        a = -k / (2 * energy)
        rdotu = rx * ux + ry * uy
        coef = u2 - k / r
        ex = (coef * rx - rdotu * ux) / k
        ey = (coef * ry - rdotu * uy) / k
        if not _small(ey, to_ball(rtol) * 16):
            raise ShapeError("pericenter is not on the +X axis")
        e = ex
        if e < 0 and _small(e, to_ball(rtol) * 16):
            e = arb(0, e.rad() + abs(e.mid()))
        if not (e < 1):
            raise ShapeError("eccentricity not < 1")
        b = (1 - e * e).sqrt()
        cos_e = rx / a + e
        sin_e = ry / (a * b)
        E = arb.atan2(sin_e, cos_e)
        if E < 0:
            E = E + 2 * arb.pi()
        z = p[2][2]
        v = w[2][2]
        return SitnikovState(a, e, mu, z, v, E)
