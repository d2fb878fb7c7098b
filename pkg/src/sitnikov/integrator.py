"""Validated Taylor integrator with Lohner's QR wrapping control.

The set of possible states at the current time is kept as ``xc + A r``
(point ``xc``, orthogonal-ish frame ``A``, interval vector ``r``).  One step
of size ``h``:

1. Taylor coefficients at ``xc`` (high precision) give the point image.
2. Coefficients and variational matrices on the box hull give the Jacobian
   enclosure ``S`` of the Taylor map.
3. An a-priori enclosure ``B`` of the solution over ``[0, h]`` is validated
   (``sum_i [0,h]^i c_i(hull) + [0,h]^(N+1) c_(N+1)(B)`` inside ``B``), and the
   Lagrange remainder is ``h^(N+1) c_(N+1)(B)``.
4. The new set is ``T(xc) + Rem + S A r``, re-expressed in the QR frame of
   ``mid(S A)``.

Precision policy: the oracles are read at ``l + ceil(L t / ln 2) + 32`` bits,
working precision starts at ``l + 64`` and doubles (together with the
oracle request) until the result is certified to radius ``2**-l``.
"""
from dataclasses import dataclass, field
from fractions import Fraction
import math
import time

import numpy as np
from flint import arb, arb_mat

from .ball import from_fraction, to_ball, workprec
from .dynamics import energy_circular, lipschitz_bound
from .errors import DomainError, ResourceError
from .oracle import QueryLog, RealOracle, parse_oracle, query, rational
from .taylor import NBodyModel, SitnikovModel

__all__ = [
    "IntegratorConfig", "CertifiedState", "integrate", "sample_trajectory",
    "find_roots", "initial_oracles", "oracle_request_bits", "Flow",
    "run_flow", "COORDS", "integrate_three_body", "roots_and_samples",
]

COORDS = ("a", "e", "mu", "z0", "v0", "phi")
LOW = 64  # precision of the frame / Jacobian / remainder computations


@dataclass
class IntegratorConfig:
    """Accuracy target and budgets.

    ``eps`` must be a power of two, ``2**-l``.  ``order`` and ``max_step``
    default to automatic choices.  ``debug_gronwall`` asserts the per-step
    Grönwall radius bound.
    """

    eps: Fraction = Fraction(1, 2 ** 30)
    max_step: Fraction = None
    order: int = None
    jac_order: int = None
    max_steps: int = 10 ** 6
    max_bits: int = 1 << 16
    extra_bits: int = 64
    oracle_slack: int = 32
    debug_gronwall: bool = False

    def __post_init__(self):
        self.eps = Fraction(self.eps)
        if self.eps <= 0:
            raise DomainError("eps must be > 0")
        if self.eps.numerator != 1 or self.eps.denominator & (self.eps.denominator - 1):
            raise DomainError("eps must be a power of two 2**-l")
        if self.order is not None and self.order < 2:
            raise DomainError("Taylor order must be >= 2")
        if self.max_step is not None:
            self.max_step = Fraction(self.max_step)
            if self.max_step <= 0:
                raise DomainError("max_step must be > 0")

    @classmethod
    def from_l(cls, l, **kw):
        return cls(eps=Fraction(1, 2 ** int(l)), **kw)

    @property
    def l(self):
        return self.eps.denominator.bit_length() - 1


@dataclass
class CertifiedState:
    """Enclosure of the Sitnikov state at time ``t``."""

    a: arb
    e: arb
    mu: arb
    z: arb
    v: arb
    E: arb
    t: object
    query_log: QueryLog
    steps: int = 0
    precision: int = 0
    order: int = 0
    attempts: int = 1

    def balls(self):
        return [self.a, self.e, self.mu, self.z, self.v, self.E]

    def max_radius(self):
        return max((b.rad() for b in self.balls()), key=float)


def initial_oracles(params, z0=0, v0=0):
    """The six oracles (a, e, mu, z0, v0, phi) for exact rational inputs."""
    def as_oracle(x, label):
        if isinstance(x, RealOracle):
            return RealOracle(x.kind, x.value, label)
        if isinstance(x, str):
            return parse_oracle(x, label)
        return rational(Fraction(x), label)
    return {
        "a": as_oracle(params.a, "a"), "e": as_oracle(params.e, "e"),
        "mu": as_oracle(params.mu, "mu"), "z0": as_oracle(z0, "z0"),
        "v0": as_oracle(v0, "v0"), "phi": as_oracle(params.phi, "phi"),
    }


def _oracles(x0):
    if isinstance(x0, dict):
        missing = [c for c in COORDS if c not in x0]
        if missing:
            raise DomainError(f"missing initial oracles: {missing}")
        return [x0[c] for c in COORDS]
    x0 = list(x0)
    if len(x0) != 6:
        raise DomainError("need six oracles (a, e, mu, z0, v0, phi)")
    return x0


def _query_all(oracles, bits, log):
    return [query(o, bits, log, c).to_ball() for o, c in zip(oracles, COORDS)]


def _lipschitz_from_oracles(oracles, log):
    a, e, mu = (query(o, 64, log, c).to_ball() for o, c in zip(oracles[:3], COORDS))
    if not (e >= 0 and e < 1):
        raise DomainError("eccentricity enclosure must lie inside [0, 1)")
    if not (a > 0 and mu > 0):
        raise DomainError("a and mu must be > 0")
    return lipschitz_bound((a, e, mu, arb(0)), prec=64).L


def oracle_request_bits(L, t, l, slack=32):
    """l + ceil(L t / ln 2) + slack, computed with upward rounding."""
    t = Fraction(t) if not isinstance(t, arb) else t
    with workprec(64):
        tb = to_ball(t) if not isinstance(t, arb) else t
        growth = (L * tb / arb(2).log()).upper()
    g = math.ceil(float(growth.mid()) * (1 + 2 ** -40)) if growth > 0 else 0
    return int(l) + max(0, g) + int(slack)


def _order_for(prec_acc, cfg):
    if cfg.order is not None:
        return cfg.order
    return max(12, min(60, round(0.35 * prec_acc)))


def _to_time_ball(t):
    if isinstance(t, arb):
        return t
    t = Fraction(t)
    den = t.denominator
    if den & (den - 1) == 0:
        return from_fraction(t)
    return +from_fraction(t)


def _horner(coeffs, s):
    acc = coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * s + c
    return acc


def _mat_horner(mats, s):
    acc = mats[-1]
    for m in reversed(mats[:-1]):
        acc = acc * s + m
    return acc


def _col(vec):
    return arb_mat([[x] for x in vec])


def _dyadic_floor(x, bits=24):
    """Largest dyadic with ``bits`` significant bits that is <= x (x > 0 float)."""
    m, ex = math.frexp(x)
    k = bits - ex
    num = math.floor(x * 2.0 ** k) if k < 1000 else 0
    if num <= 0:
        return Fraction(0)
    return Fraction(num, 1) / Fraction(2) ** k if k >= 0 else Fraction(num * 2 ** (-k))


class _NeedPrecision(Exception):
    pass


class _StepFailure(ResourceError):
    """A step could not be validated at the current working precision."""


@dataclass
class StepRecord:
    """Everything needed to evaluate the enclosure inside one step."""

    t0: Fraction
    h: Fraction
    hb: arb
    N: int
    prec: int
    cpt: list
    V: list
    Ar: list
    cN1: list
    B: list
    hull_end: list
    index: int
    model: object = None

    def dense(self, s):
        """Enclosure of the state at ``t0 + s`` for ``s`` (Fraction or Ball) in [0, h]."""
        sb = _to_time_ball(s) if not isinstance(s, arb) else s
        with workprec(self.prec):
            T = [_horner(c, sb) for c in self.cpt]
        with workprec(LOW):
            sl = +sb
            Ss = _mat_horner(self.V, sl)
            corr = Ss * _col(self.Ar)
            pw = sl ** (self.N + 1)
            rem = [pw * c for c in self.cN1]
        with workprec(self.prec):
            return [T[i] + corr[i, 0] + rem[i] for i in range(len(T))]


class Flow:
    """One Lohner integration at fixed working precision and order."""

    def __init__(self, model, x0_balls, prec, order, cfg, L=None):
        self.cfg = cfg
        self.prec = int(prec)
        self.N = int(order)
        self.K = min(self.N, cfg.jac_order or 12)
        self.dim = model.dim
        with workprec(self.prec):
            self.model_hi = model.rounded()
        with workprec(LOW):
            self.model_lo = model.rounded()
        self.xc = [arb(b.mid()) for b in x0_balls]
        with workprec(LOW):
            self.r = [arb(0, b.rad()) for b in x0_balls]
        self.A = arb_mat([[arb(1) if i == j else arb(0) for j in range(self.dim)]
                          for i in range(self.dim)])
        self.hull = list(x0_balls)
        self.t = Fraction(0)
        self.steps = 0
        self.L = L
        self.tol_bits = self.prec - 32
        self.h_factor = 1.0  # learned correction of the step-size guess

    # -- step size -------------------------------------------------------
    def _guess_h(self, cpt):
        N = self.N
        best = math.inf
        for comp, xc in zip(cpt, self.xc):
            scale = max(1.0, abs(float(xc.mid())))
            for k in (N - 1, N):
                mag = float(comp[k].abs_upper())
                if mag > 0:
                    # log-domain to avoid underflow
                    lg = (-self.tol_bits * math.log(2) + math.log(scale) - math.log(mag)) / k
                    best = min(best, math.exp(lg))
        if best == math.inf:
            best = 1.0
        if self.cfg.max_step is not None:
            best = min(best, float(self.cfg.max_step))
        return best

    def _apriori(self, cbox, hb):
        N = self.N
        H = arb(0).union(hb.upper())
        poly = [_horner(c[:N + 1], H) for c in cbox]
        B = []
        for p in poly:
            B.append(arb(p.mid(), p.rad() * 1.25 + (abs(p).upper() + 1) * arb(2) ** -30))
        Hn = H ** (N + 1)
        for _ in range(6):
            try:
                c1, V1 = self.model_lo.coeffs(B, N + 1, var=True, var_order=1)
            except (ZeroDivisionError, ValueError):
                return None
            cN1 = [c[N + 1] for c in c1]
            if not all(x.is_finite() for x in cN1):
                return None
            cand = [poly[i] + Hn * cN1[i] for i in range(self.dim)]
            if all(B[i].contains_interior(cand[i]) for i in range(self.dim)):
                return cand, cN1, V1[1]
            newB = []
            for i in range(self.dim):
                u = B[i].union(cand[i])
                newB.append(arb(u.mid(), u.rad() * 1.5 + arb(2) ** -40))
            B = newB
        return None

    # -- one step ---------------------------------------------------------
    def step(self, t_end):
        cfg = self.cfg
        if self.steps >= cfg.max_steps:
            raise ResourceError(f"step budget of {cfg.max_steps} steps exhausted at t={float(self.t):.6g}")
        dim, N = self.dim, self.N
        with workprec(LOW):
            Ar_m = self.A * _col(self.r)
            Ar = [Ar_m[i, 0] for i in range(dim)]
        with workprec(self.prec):
            hull = [self.xc[i] + Ar[i] for i in range(dim)]
            cpt = self.model_hi.coeffs(self.xc, N)
        with workprec(LOW):
            hull_lo = [+x for x in hull]
            cbox, V = self.model_lo.coeffs(hull_lo, N, var=True, var_order=self.K)
        h_float = self._guess_h(cpt) * self.h_factor
        first = True
        remaining = t_end - self.t
        scale_tol = arb(2) ** (-self.tol_bits + 8)
        for _ in range(60):
            h = _dyadic_floor(h_float)
            if h <= 0:
                raise _StepFailure(f"step size underflow at t={float(self.t):.6g}")
            last = remaining <= h
            if last:
                h = remaining
            hb = _to_time_ball(h)
            with workprec(LOW):
                ap = self._apriori(cbox, hb)
                ok = ap is not None
                if ok:
                    B, cN1, Df = ap
                    pw = hb ** (N + 1)
                    rem = [pw * c for c in cN1]
                    for i in range(dim):
                        lim = scale_tol * max(arb(1), abs(self.xc[i]).upper())
                        if not rem[i].abs_upper() <= lim:
                            ok = False
                            if first:
                                self.h_factor *= 0.8
                            ratio = float(rem[i].abs_upper()) / float(lim)
                            if math.isfinite(ratio) and ratio > 1:
                                h_float = min(float(h) * 0.5, float(h) * 0.9 * ratio ** (-1.0 / (N + 1)))
                            else:
                                h_float = float(h) * 0.5
                            break
                else:
                    h_float = float(h) * 0.5
            if ok:
                break
            first = False
        else:
            raise _StepFailure(f"could not validate a step at t={float(self.t):.6g}")

        if first and not last:
            self.h_factor = min(1.0, self.h_factor * 1.05)
        with workprec(LOW):
            VK1 = self._jacobian_remainder(B, Df, hb)
            if VK1 is None:
                raise _StepFailure(f"could not bound the variational equation at t={float(self.t):.6g}")
            V = V + [VK1]
        with workprec(self.prec):
            u = [_horner(cpt[i], hb) + rem[i] for i in range(dim)]
            xc_new = [arb(x.mid()) for x in u]
            vv = [u[i] - xc_new[i] for i in range(dim)]
        with workprec(LOW):
            vv = [+x for x in vv]
            S = _mat_horner(V, +hb)
            M = S * self.A
            r_col = _col(self.r)
            v_col = _col(vv)
            direct = M * r_col + v_col
            A_new, Ainv = self._frame(M)
            if Ainv is not None:
                r_new_m = (Ainv * M) * r_col + Ainv * v_col
                r_new = [r_new_m[i, 0] for i in range(dim)]
                Ar_new = A_new * _col(r_new)
            else:
                A_new = arb_mat([[arb(1) if i == j else arb(0) for j in range(dim)] for i in range(dim)])
                r_new = [direct[i, 0] for i in range(dim)]
                Ar_new = direct
        with workprec(self.prec):
            hull_new = []
            for i in range(dim):
                box = xc_new[i] + Ar_new[i, 0]
                alt = xc_new[i] + direct[i, 0]
                try:
                    box = box.intersection(alt)
                except ValueError:
                    pass
                hull_new.append(box)
        if cfg.debug_gronwall and self.L is not None:
            self._check_gronwall(S, hull, hull_new, vv, hb)
        rec = StepRecord(self.t, h, hb, N, self.prec, cpt, V, Ar, cN1, B, hull_new, self.steps,
                         self.model_lo)
        self.xc, self.r, self.A, self.hull = xc_new, r_new, A_new, hull_new
        self.t = self.t + h
        self.steps += 1
        return rec

    def _jacobian_remainder(self, B, Df, hb):
        """(K+1)-th coefficient of the flow Jacobian over the step.

        A crude a-priori box W for the Jacobian on [0, h] comes from
        |V(s)| <= exp(|Df(B)| s); the coefficient is then evaluated with the
        state in B and the Jacobian in W.
        """
        dim = self.dim
        norm = max(sum((abs(Df[i, j]).upper() for j in range(dim)), arb(0)) for i in range(dim))
        H = arb(0).union(hb.upper())
        w = (norm * hb.upper()).exp().upper()
        zero = set(self.model_lo.var_zero)
        box = arb_mat([[arb(0) if (i, j) in zero else arb(0, w) for j in range(dim)] for i in range(dim)])
        eye = arb_mat([[arb(1) if i == j else arb(0) for j in range(dim)] for i in range(dim)])
        W = eye + (Df * box) * H
        for i, j in zero:
            W[i, j] = arb(0)
        try:
            _, Vb = self.model_lo.coeffs(B, self.K + 1, var=True, V0=W, var_order=self.K + 1)
        except (ZeroDivisionError, ValueError):
            return None
        return Vb[self.K + 1]

    def _frame(self, M):
        dim = self.dim
        mid = np.array([[float(M[i, j].mid()) for j in range(dim)] for i in range(dim)])
        widths = np.array([float(x.rad()) + float(abs(x.mid())) * 0 for x in self.r])
        weights = np.linalg.norm(mid, axis=0) * np.maximum(widths, 1e-300)
        order = np.argsort(-weights, kind="stable")
        try:
            q, _ = np.linalg.qr(mid[:, order])
        except np.linalg.LinAlgError:
            return None, None
        if not np.all(np.isfinite(q)):
            return None, None
        A_new = arb_mat([[arb(float(q[i, j])) for j in range(dim)] for i in range(dim)])
        try:
            Ainv = A_new.inv()
        except (ZeroDivisionError, ValueError):
            return None, None
        return A_new, Ainv

    def _check_gronwall(self, S, hull, hull_new, vv, hb):
        """Per-step Grönwall check (only the (z, v, E) block of Sitnikov)."""
        dim = self.dim
        with workprec(LOW):
            growth = (self.L * hb).exp()
            norm_mid = max(sum(abs(S[i, j].mid()) for j in range(dim)) for i in range(dim))
            norm_abs = max(sum(abs(S[i, j]).upper() for j in range(dim)) for i in range(dim))
            assert norm_mid <= growth * (1 + arb(2) ** -20), "Jacobian exceeds exp(L h)"
            rad_in = max(float(x.rad()) for x in hull)
            rad_out = max(float(x.rad()) for x in hull_new)
            loc = max(float(x.rad()) for x in vv)
            bound = float(norm_abs.upper()) * rad_in * (1 + 2 ** -20) + loc * (1 + 2 ** -20) + 2.0 ** (-self.prec)
            assert rad_out <= bound, f"radius growth {rad_out} exceeds {bound}"


def run_flow(model, x0_balls, t_end, prec, order, cfg, observers=(), L=None):
    """Integrate to ``t_end`` (Fraction); returns the final Flow."""
    flow = Flow(model, x0_balls, prec, order, cfg, L=L)
    t_end = Fraction(t_end)
    while flow.t < t_end:
        rec = flow.step(t_end)
        for ob in observers:
            ob.on_step(rec)
    for ob in observers:
        fin = getattr(ob, "finish", None)
        if fin is not None:
            fin(flow)
    return flow


# ------------------------------------------------------------------ Sitnikov

def _check_time(t):
    if isinstance(t, arb):
        if not t >= 0:
            raise DomainError("t must be >= 0")
        return t
    t = Fraction(t)
    if t < 0:
        raise DomainError("t must be >= 0 (negative times are not supported)")
    return t


def _attempts(x0, t_total, cfg, log):
    """Yield (prec, order, initial Balls, L, request bits) for successive attempts."""
    oracles = _oracles(x0)
    L = _lipschitz_from_oracles(oracles, log)
    b0 = oracle_request_bits(L, t_total, cfg.l, cfg.oracle_slack)
    prec = cfg.l + cfg.extra_bits
    k = 0
    while True:
        if prec > cfg.max_bits or b0 > cfg.max_bits:
            raise ResourceError(f"precision budget of {cfg.max_bits} bits exhausted")
        bits = max(b0, prec) if k else b0
        balls = _query_all(oracles, bits, log)
        a, e, mu = balls[:3]
        if not (e >= 0 and e < 1):
            raise DomainError("eccentricity enclosure must lie inside [0, 1)")
        order = _order_for(prec - 32, cfg)
        yield prec, order, balls, L, bits
        prec *= 2
        k += 1


def _sitnikov_model(balls):
    a, e, mu = balls[:3]
    return SitnikovModel(a, e, mu)


def integrate(x0, t, cfg=None):
    """Certified enclosure of the Sitnikov state at rational time ``t``.

    ``x0``: six oracles (dict keyed a, e, mu, z0, v0, phi, or a sequence in
    that order).  Every returned Ball encloses the true value and has
    radius <= ``cfg.eps``.
    """
    cfg = cfg or IntegratorConfig()
    t = _check_time(t)
    if isinstance(t, arb):
        raise DomainError("integrate takes a rational time")
    log = QueryLog(list(COORDS))
    eps_b = to_ball(cfg.eps)
    attempts = 0
    for prec, order, balls, L, bits in _attempts(x0, t, cfg, log):
        attempts += 1
        if t == 0:
            return CertifiedState(*balls, t=t, query_log=log, steps=0, precision=bits,
                                  order=0, attempts=attempts)
        try:
            flow = run_flow(_sitnikov_model(balls), balls[3:], t, prec, order, cfg, L=L)
        except _StepFailure:
            continue
        z, v, E = flow.hull
        if all(b.rad() <= eps_b for b in (z, v, E)) and all(b.rad() <= eps_b for b in balls[:3]):
            return CertifiedState(balls[0], balls[1], balls[2], z, v, E, t=t, query_log=log,
                                  steps=flow.steps, precision=prec, order=order, attempts=attempts)


class _Sampler:
    def __init__(self, times):
        self.times = list(times)
        self.i = 0
        self.out = []

    def on_step(self, rec):
        end = rec.t0 + rec.h
        while self.i < len(self.times) and self.times[self.i] <= end:
            t = self.times[self.i]
            self.out.append((t, rec.dense(t - rec.t0)))
            self.i += 1


def sample_trajectory(x0, grid, cfg=None, full=False):
    """Enclosures of z at t_i = i*delta, 0 < i <= floor(T/delta).

    ``grid`` is a dict ``{"T": ..., "delta": ...}`` (or a (T, delta) pair).
    Returns a list of ``(t_i, z_ball)``; with ``full=True`` the tuples are
    ``(t_i, z_ball, v_ball, E_ball)``.  One oracle log covers all samples.
    """
    cfg = cfg or IntegratorConfig()
    if isinstance(grid, dict):
        T, delta = grid["T"], grid["delta"]
    else:
        T, delta = grid
    T, delta = Fraction(T), Fraction(delta)
    if delta <= 0:
        raise DomainError("grid step must be > 0")
    if T < delta:
        raise DomainError("T must be >= delta")
    count = int(T // delta)
    times = [i * delta for i in range(1, count + 1)]
    res, _ = _sample_times(x0, times, cfg)
    if full:
        return res
    return [(t, zb) for t, zb, _, _ in res]


def _sample_times(x0, times, cfg, log=None):
    log = log or QueryLog(list(COORDS))
    eps_b = to_ball(cfg.eps)
    T = max(times) if times else Fraction(0)
    for prec, order, balls, L, bits in _attempts(x0, T, cfg, log):
        sampler = _Sampler(times)
        try:
            run_flow(_sitnikov_model(balls), balls[3:], T, prec, order, cfg, [sampler], L=L)
        except _StepFailure:
            continue
        if all(all(b.rad() <= eps_b for b in st) for _, st in sampler.out):
            return [(t, st[0], st[1], st[2]) for t, st in sampler.out], log


# ------------------------------------------------------------------- roots

@dataclass
class _Piece:
    t1: Fraction
    t2: Fraction
    rec: StepRecord
    kind: str       # "Z" or "M"
    sign: int       # sign of z for Z, direction of z for M
    vr: arb = None


class _RootFinder:
    """Streams step records, classifies sub-intervals, isolates and refines roots."""

    def __init__(self, eps, T, max_depth=40, first_pieces=4):
        self.eps = Fraction(eps)
        self.T = T
        self.max_depth = max_depth
        self.first = first_pieces
        self.last_sign = None
        self.pending = []
        self.roots = []

    def _classify(self, rec, s1, s2, acc_b):
        sm = (s1 + s2) / 2
        r = (s2 - s1) / 2
        x = rec.dense(sm)
        with workprec(rec.prec):
            rb = _to_time_ball(r)
            half = arb(0, rb.upper())
            vr = x[1] + half * acc_b
            zr = x[0] + half * vr
        if zr > 0:
            return "Z", 1, vr
        if zr < 0:
            return "Z", -1, vr
        if vr > 0:
            return "M", 1, vr
        if vr < 0:
            return "M", -1, vr
        return None, 0, vr

    def on_step(self, rec):
        with workprec(LOW):
            # z'' over the whole step, from the a-priori box
            acc_b = rec.model.coeffs(rec.B, 1)[1][1]
        stack = []
        n0 = self.first
        edges = [rec.h * Fraction(i, n0) for i in range(n0 + 1)]
        for i in range(n0 - 1, -1, -1):
            stack.append((edges[i], edges[i + 1], 0))
        while stack:
            s1, s2, depth = stack.pop()
            kind, sign, vr = self._classify(rec, s1, s2, acc_b)
            if kind is None:
                if depth >= self.max_depth:
                    raise ResourceError(
                        "root not isolatable (near-tangency of z with 0) on "
                        f"[{float(rec.t0 + s1):.12g}, {float(rec.t0 + s2):.12g}]",
                        interval=(rec.t0 + s1, rec.t0 + s2))
                mid = (s1 + s2) / 2
                stack.append((mid, s2, depth + 1))
                stack.append((s1, mid, depth + 1))
                continue
            self._feed(_Piece(rec.t0 + s1, rec.t0 + s2, rec, kind, sign, vr))

    def _feed(self, piece):
        if piece.kind == "M":
            if self.pending and self.pending[-1].sign != piece.sign:
                raise ResourceError("direction change inside an unresolved run",
                                    interval=(self.pending[0].t1, piece.t2))
            self.pending.append(piece)
            return
        if self.pending:
            if self.last_sign is not None and piece.sign != self.last_sign:
                self.roots.append(self._refine(self.pending, self.last_sign))
            self.pending = []
        self.last_sign = piece.sign

    def finish(self, flow):
        if not self.pending or self.last_sign is None:
            return
        z_end = flow.hull[0]
        if z_end > 0 or z_end < 0:
            sgn = 1 if z_end > 0 else -1
            if sgn != self.last_sign:
                self.roots.append(self._refine(self.pending, self.last_sign))
            return
        raise ResourceError("sign of z at the end of the window is undetermined",
                            interval=(self.pending[0].t1, self.pending[-1].t2))

    def _z_at(self, pieces, t):
        for p in pieces:
            if p.t1 <= t <= p.t2:
                return p.rec.dense(t - p.rec.t0)[0], p
        raise AssertionError("time outside the pending run")

    def _refine(self, pieces, before_sign):
        lo, hi = pieces[0].t1, pieces[-1].t2
        with workprec(LOW):
            vr = pieces[0].vr
            for p in pieces[1:]:
                vr = vr.union(p.vr)
        for _ in range(400):
            if hi - lo <= self.eps:
                break
            tm = _dyadic_mid(lo, hi)
            zm, p = self._z_at(pieces, tm)
            if zm > 0 or zm < 0:
                sgn = 1 if zm > 0 else -1
                if sgn == before_sign:
                    lo = tm
                else:
                    hi = tm
                continue
            # z(tm) straddles 0: mean-value enclosure tau in tm - z(tm)/v
            prec = p.rec.prec
            with workprec(prec):
                tau = _to_time_ball(tm) - zm / vr
                lob, hib = _to_time_ball(lo), _to_time_ball(hi)
                tau_lo = tau.lower().max(lob)
                tau_hi = tau.upper().min(hib)
                width = tau_hi - tau_lo
            if not width <= to_ball(self.eps):
                raise _NeedPrecision()
            with workprec(prec):
                return arb((tau_lo + tau_hi) / 2).union(tau_lo).union(tau_hi)
        with workprec(max(p.rec.prec for p in pieces)):
            lob, hib = _to_time_ball(lo), _to_time_ball(hi)
            return lob.union(hib)


def _dyadic_mid(lo, hi):
    m = (lo + hi) / 2
    den = m.denominator
    if den & (den - 1) == 0:
        return m
    # keep bisection points dyadic
    k = max(1, (den.bit_length() + 8))
    return Fraction(math.floor(m * 2 ** k), 2 ** k)


def find_roots(x0, T, cfg=None, _return_log=False):
    """Certified enclosures of tau_0 = 0 and every sign change of z on (0, T].

    Each enclosure has width <= cfg.eps.  Near-tangential zeros raise
    ResourceError naming the interval.
    """
    cfg = cfg or IntegratorConfig()
    T = Fraction(_check_time(T))
    log = QueryLog(list(COORDS))
    oracles = _oracles(x0)
    z0_or, v0_or = oracles[3], oracles[4]
    zb = query(z0_or, 64, log, "z0").to_ball()
    if not zb.contains(0):
        raise DomainError("find_roots assumes z0 = 0")
    tau0 = arb(0)
    if z0_or.exact_value() == 0 and v0_or.exact_value() == 0:
        # z identically 0: no sign changes at all
        _lipschitz_from_oracles(oracles, log)
        return ([tau0], log) if _return_log else [tau0]
    if T == 0:
        return ([tau0], log) if _return_log else [tau0]
    for prec, order, balls, L, bits in _attempts(x0, T, cfg, log):
        finder = _RootFinder(cfg.eps, T)
        try:
            run_flow(_sitnikov_model(balls), balls[3:], T, prec, order, cfg, [finder], L=L)
        except (_NeedPrecision, _StepFailure):
            continue
        out = [tau0] + finder.roots
        return (out, log) if _return_log else out


# -------------------------------------------------------------- three bodies

def integrate_three_body(state, t, prec=128, order=None, times=(), cfg=None):
    """Enclose a three-body state (ThreeBodyState of Balls) at time ``t``.

    Runs once at working precision ``prec``; the result carries whatever
    radius the input uncertainty and rounding produce.  ``times`` (sorted
    Fractions <= t) requests dense-output samples, returned as a list of
    ``(time, ThreeBodyState)``.
    """
    from .dynamics import ThreeBodyState
    cfg = cfg or IntegratorConfig()
    t = Fraction(_check_time(t))
    vec = [to_ball(x) for x in state.vector()]
    masses, dyn = vec[:3], vec[3:]
    order = order or _order_for(prec - 32, cfg)
    sampler = _Sampler(list(times))
    flow = run_flow(NBodyModel(masses), dyn, t, prec, order, cfg, [sampler]) if t > 0 else None
    final = flow.hull if flow is not None else dyn
    out = ThreeBodyState.from_vector(masses + list(final))
    samples = [(ts, ThreeBodyState.from_vector(masses + list(x))) for ts, x in sampler.out]
    return out, samples


def roots_and_samples(x0, T, delta, cfg=None):
    """One integration giving both root enclosures and grid samples on (0, T].

    Returns ``(roots, samples, query_log)`` where ``samples`` holds
    ``(t_i, z, v, E)`` at t_i = i * delta.
    """
    cfg = cfg or IntegratorConfig()
    T, delta = Fraction(T), Fraction(delta)
    if delta <= 0 or T < delta:
        raise DomainError("need delta > 0 and T >= delta")
    log = QueryLog(list(COORDS))
    oracles = _oracles(x0)
    zb = query(oracles[3], 64, log, "z0").to_ball()
    if not zb.contains(0):
        raise DomainError("root finding assumes z0 = 0")
    times = [i * delta for i in range(1, int(T // delta) + 1)]
    if oracles[3].exact_value() == 0 and oracles[4].exact_value() == 0:
        samples, log = _sample_times(x0, times, cfg, log)
        return [arb(0)], samples, log
    eps_b = to_ball(cfg.eps)
    for prec, order, balls, L, bits in _attempts(x0, T, cfg, log):
        finder = _RootFinder(cfg.eps, T)
        sampler = _Sampler(times)
        try:
            run_flow(_sitnikov_model(balls), balls[3:], T, prec, order, cfg, [finder, sampler], L=L)
        except (_NeedPrecision, _StepFailure):
            continue
        if not all(all(b.rad() <= eps_b for b in st) for _, st in sampler.out):
            continue
        samples = [(t, st[0], st[1], st[2]) for t, st in sampler.out]
        return [arb(0)] + finder.roots, samples, log
