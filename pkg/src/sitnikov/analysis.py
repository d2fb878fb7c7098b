"""Amplitude bound between zeros, chord property, parameter choice, probe.

For z'' = -Q(t) z with Q(t) = 2 mu / (z^2 + r^2)^(3/2), an arc of length
tau between consecutive zeros on which |z| <= h has Q >= q(h), so Sturm
comparison with the oscillator of frequency sqrt(q) bounds tau by
pi / sqrt(q(h)).  Solving pi / sqrt(q(h)) = tau for h gives

    H(tau) = sqrt((2 mu tau^2 / pi^2)^(2/3) - r^2).

The classical form takes r = a, which is exact only for circular orbits.
Passing ``r_max`` (e.g. a (1 + e), the apocentre distance) gives the
bound that holds for every eccentricity.
"""
from dataclasses import dataclass
from fractions import Fraction
import math
import time

from flint import arb

from .ball import fraction_to_decimal, to_ball, workprec
from .errors import DomainError, ShapeError
from .integrator import (
    IntegratorConfig, integrate, oracle_request_bits, roots_and_samples,
)
from .kepler import OrbitParams, period
from .symbolic import RecoveryConfig

__all__ = [
    "sturm_bound", "oscillator_freq", "ChordVerdict", "verify_chord_property",
    "recovery_params", "ProbeRecord", "probe_complexity", "ArcRecord",
    "arc_survey", "apocentre",
]

PREC = 128


def _r(params, r_max):
    return to_ball(params.a) if r_max is None else to_ball(r_max)


def apocentre(params):
    """a (1 + e), the largest primary distance from the barycentre."""
    return Fraction(params.a) * (1 + Fraction(params.e))


def sturm_bound(tau, params, r_max=None, prec=PREC):
    """Enclosure of H(tau); ``r_max`` replaces a in the radicand.

    Raises DomainError when tau is certainly below the threshold where H is
    defined.  Near the threshold the lower end is clamped at 0.
    """
    with workprec(prec):
        tau = to_ball(tau)
        mu = to_ball(params.mu)
        r = _r(params, r_max)
        base = 2 * mu * tau * tau / (arb.pi() ** 2)
        rad = base ** (arb(2) / 3) - r * r
        if rad < 0:
            raise DomainError("gap below Sturm threshold: H is undefined")
        if rad >= 0:
            return rad.sqrt()
        return arb(0).union(rad.upper().sqrt())


def sturm_threshold(params, r_max=None, prec=PREC):
    """Smallest tau with H(tau) defined: pi r^(3/2) / sqrt(2 mu)."""
    with workprec(prec):
        r = _r(params, r_max)
        return arb.pi() * r ** (arb(3) / 2) / (2 * to_ball(params.mu)).sqrt()


def oscillator_freq(h, params, r_max=None, prec=PREC):
    """q = 2 mu / (h^2 + r^2)^(3/2)."""
    with workprec(prec):
        h = to_ball(h)
        if h < 0:
            raise DomainError("h must be >= 0")
        r = _r(params, r_max)
        return 2 * to_ball(params.mu) / (h * h + r * r) ** (arb(3) / 2)


@dataclass
class ChordVerdict:
    holds: bool
    fraction: float        # certified lower bound of the measured fraction
    first_above: Fraction
    last_above: Fraction
    gap_upper: Fraction

    def to_json(self):
        return {"holds": self.holds, "fraction": repr(self.fraction),
                "first_above": str(self.first_above), "last_above": str(self.last_above)}


def verify_chord_property(arc, h, roots=None):
    """Does |z| > h/4 on more than 3/4 of the gap between the two roots?

    ``arc`` is a list of ``(t, z_ball)`` samples inside the gap and
    ``roots`` the two bracketing root enclosures.  Only nodes where
    |z| > h/4 is certified count; the measured set is the span from the
    first to the last such node (the superlevel set of a concave arc is an
    interval), divided by the largest possible gap.  The result therefore
    under-measures.
    """
    if roots is None or len(roots) != 2:
        raise ShapeError("arc needs certified roots at both ends")
    ta, tb = (to_ball(r) for r in roots)
    if not tb > ta:
        raise ShapeError("roots must be ordered and separated")
    with workprec(PREC):
        thr = to_ball(h) / 4
        above = [t for t, z in arc if abs(z) > thr and ta < to_ball(t) and to_ball(t) < tb]
        gap_hi = (tb - ta).upper()
    if not above:
        return ChordVerdict(False, 0.0, None, None, gap_hi)
    first, last = min(above), max(above)
    with workprec(PREC):
        frac = (to_ball(last) - to_ball(first)) / gap_hi
        holds = bool(frac > arb(3) / 4)
    return ChordVerdict(holds, float(frac.lower()), first, last, gap_hi)


def recovery_params(m, params, safety=Fraction(1, 2), r_max=None, T=None):
    """delta and eps for the recovery with certified margins.

    delta = safety * m P / 2 rounded down to a dyadic with 8 significant
    bits; l = the least integer with 2^-l < safety * H(m P) / 4.
    """
    safety = Fraction(safety)
    if not 0 < safety < 1:
        raise DomainError("safety must lie strictly between 0 and 1")
    if int(m) != m or m < 2 or m % 2:
        raise DomainError("m must be an even integer >= 2")
    with workprec(PREC):
        P = period(params, prec=PREC)
        try:
            h = sturm_bound(m * P, params, r_max=r_max)
        except DomainError as exc:
            raise DomainError(f"H(mP) undefined for m={m}; use a larger m") from exc
        if not h > 0:
            raise DomainError(f"H(mP) not certified positive for m={m}; use a larger m")
        target = to_ball(safety) * m * P / 2
        x = float(target.lower())
        k = 8 - math.frexp(x)[1]
        delta = Fraction(math.floor(x * 2.0 ** k)) / Fraction(2) ** k if k >= 0 \
            else Fraction(math.floor(x * 2.0 ** k) * 2 ** (-k))
        while not to_ball(delta) <= target:
            delta -= Fraction(1, 2 ** max(k, 0))
        bound = to_ball(safety) * h / 4
        l = max(0, math.floor(-math.log2(float(bound.lower()))))
        while not arb(2) ** -l < bound:
            l += 1
    return RecoveryConfig(m=m, P=P, delta=delta, eps=Fraction(1, 2 ** l), h=h, T=T), l


@dataclass
class ProbeRecord:
    t: Fraction
    l: int
    bits: dict          # coordinate -> max bits requested
    steps: int
    wall_seconds: float

    @property
    def bits_consumed(self):
        """Largest request on the state oracles z0, v0, phi.

        The orbit constants are also read once at 64 bits for the Lipschitz
        bound, which would mask the trend at small t.
        """
        return max(self.bits.get(c, 0) for c in ("z0", "v0", "phi"))

    def csv_row(self):
        return [fraction_to_decimal(Fraction(self.t)), str(self.l), str(self.bits.get("z0", 0)),
                str(self.bits.get("v0", 0)), str(self.bits.get("phi", 0)),
                str(self.steps), f"{self.wall_seconds:.3f}"]


def probe_complexity(x0, t_list, l, cfg=None):
    """One fresh certified integration per t at eps = 2^-l; bits and work per run."""
    t_list = [Fraction(t) for t in t_list]
    if t_list != sorted(t_list):
        raise DomainError("t_list must be sorted ascending")
    base = cfg or IntegratorConfig()
    kw = {k: getattr(base, k) for k in ("max_step", "order", "jac_order", "max_steps",
                                        "max_bits", "extra_bits", "oracle_slack")}
    run_cfg = IntegratorConfig.from_l(l, **kw)
    out = []
    for t in t_list:
        start = time.perf_counter()
        st = integrate(x0, t, run_cfg)
        wall = time.perf_counter() - start
        out.append(ProbeRecord(t, int(l), dict(st.query_log.as_dict()), st.steps, wall))
    return out


@dataclass
class ArcRecord:
    """One excursion of z between consecutive certified zeros."""

    index: int
    tau_a: arb
    tau_b: arb
    samples: list           # (t, z) strictly inside the gap
    max_abs_lower: arb      # certified lower bound of max |z| on the arc
    H: arb = None           # H(gap) with r = a, None below threshold
    H_rmax: arb = None      # H(gap) with r = a (1 + e)

    @property
    def gap(self):
        with workprec(PREC):
            return self.tau_b - self.tau_a

    def chord(self, h=None):
        h = self.H if h is None else h
        return verify_chord_property(self.samples, h, (self.tau_a, self.tau_b))


def _try_H(gap, params, r_max=None):
    try:
        h = sturm_bound(gap, params, r_max=r_max)
    except DomainError:
        return None
    return h if h > 0 else None


def arc_survey(x0, params, T, delta, cfg=None):
    """Roots and samples of one trajectory, cut into complete arcs."""
    roots, samples, log = roots_and_samples(x0, T, delta, cfg)
    arcs = []
    j = 0
    for k in range(len(roots) - 1):
        ta, tb = roots[k], roots[k + 1]
        inside = []
        while j < len(samples) and to_ball(samples[j][0]) < tb:
            t, z = samples[j][0], samples[j][1]
            if to_ball(t) > ta:
                inside.append((t, z))
            j += 1
        with workprec(PREC):
            mx = max((abs(z).lower() for _, z in inside), default=arb(0), key=lambda b: float(b.mid()))
            gap = tb - ta
        arcs.append(ArcRecord(k + 1, ta, tb, inside, arb(0).max(mx),
                              _try_H(gap, params), _try_H(gap, params, apocentre(params))))
    return arcs, roots, log
