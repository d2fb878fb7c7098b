"""Acceptance suite: criteria 1-10 at their stated tolerances.

Each test records a one-line verdict; ``conftest.py`` prints them at the
end of the run.  Run alone with

    pytest tests/test_acceptance.py -v

or ``python3 tests/test_acceptance.py``.
"""
from fractions import Fraction
import math
import random
import sys
import time

import mpmath as mp
import pytest
from flint import arb

from sitnikov.analysis import arc_survey, probe_complexity, recovery_params
from sitnikov.ball import to_ball, workprec
from sitnikov.dynamics import (
    SitnikovState, embed_three_body, energy_circular, project_sitnikov, sitnikov_jacobian,
)
from sitnikov.integrator import (
    IntegratorConfig, find_roots, initial_oracles, integrate, integrate_three_body,
    sample_trajectory,
)
from sitnikov.kepler import OrbitParams, period, solve_eccentric_anomaly
from sitnikov.symbolic import (
    RecoveryConfig, classify, count_sequences, recover_sequence, symbols_from_roots,
)

VERDICTS = {}


def record(n, ok, detail):
    VERDICTS[n] = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


def periods(params, k, grid=2 ** 10, up=True):
    """A dyadic time next to k P: the least multiple of 1/grid >= k P (or the largest <=)."""
    with workprec(128):
        x = to_ball(k) * period(params, prec=128)
    n = math.ceil(float(x.mid()) * grid) if up else math.floor(float(x.mid()) * grid)
    with workprec(128):
        while up and not to_ball(Fraction(n, grid)) >= x:
            n += 1
        while not up and not to_ball(Fraction(n, grid)) <= x:
            n -= 1
    return Fraction(n, grid)


# ---------------------------------------------------------------- 1

def test_c01_kepler_residual():
    rng = random.Random(101)
    tol = Fraction(1, 2 ** 64)
    start = time.perf_counter()
    worst = arb(0)
    bad = 0
    for _ in range(1000):
        e = Fraction(rng.randrange(0, 991), 1000)
        M = Fraction(rng.randrange(0, 6283185), 10 ** 6)
        an = solve_eccentric_anomaly(e, M, tol)
        with workprec(256):
            E = arb(an.ball.mid())
            g = (E - to_ball(e) * E.sin() - to_ball(M)).abs_upper()
        if not g <= to_ball(tol):
            bad += 1
        worst = max(worst, g, key=float)
    wall = time.perf_counter() - start
    ok = record(1, bad == 0 and wall < 10,
                f"1000 solves, {bad} residuals above 2^-64 (max {float(worst):.2e}), {wall:.1f} s")
    assert ok


# ---------------------------------------------------------------- 2

@pytest.mark.slow
def test_c02_circular_energy():
    params = OrbitParams(1, 0, 1, 0)
    T = periods(params, 100)
    start = time.perf_counter()
    lines, ok = [], True
    for v0 in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
        st = integrate(initial_oracles(params, 0, v0), T, IntegratorConfig.from_l(30))
        e0 = energy_circular(arb(1), arb(1), arb(0), to_ball(v0))
        e1 = energy_circular(st.a, st.mu, st.z, st.v)
        ok &= bool(e0.overlaps(e1)) and all(b.rad() <= 2.0 ** -30 for b in (st.z, st.v, st.E))
        lines.append(f"v0={v0}: |dH| <= {float((e1 - e0).abs_upper()):.1e}")
    wall = time.perf_counter() - start
    ok = record(2, ok and wall < 300, f"T = {float(T):.4f} >= 100 P; " + "; ".join(lines)
                + f"; {wall:.0f} s")
    assert ok


# ---------------------------------------------------------------- 3

@pytest.mark.slow
def test_c03_enclosure_self_consistency():
    rng = random.Random(2024)
    hits = 0
    for _ in range(50):
        e = Fraction(rng.randint(5, 50), 100)
        z0 = Fraction(rng.randint(-100, 100), 100)
        v0 = Fraction(rng.randint(-180, 180), 100)
        phi = Fraction(rng.randint(0, 628), 100)
        params = OrbitParams(1, e, 1, phi)
        t = Fraction(rng.randint(8, 1000), 8)     # 10 P = 125.66...
        x0 = initial_oracles(params, z0, v0)
        coarse = integrate(x0, t, IntegratorConfig.from_l(20))
        fine = integrate(x0, t, IntegratorConfig.from_l(30))
        if all(getattr(coarse, k).contains(getattr(fine, k).mid()) for k in "zvE"):
            hits += 1
    ok = record(3, hits == 50, f"{hits}/50 coarse enclosures contain the fine center")
    assert ok


# ---------------------------------------------------------------- 4

def _three_body_configs():
    rng = random.Random(44)
    out = []
    for _ in range(10):
        out.append((Fraction(rng.randint(0, 40), 100), Fraction(rng.randint(-50, 50), 100),
                    Fraction(rng.randint(20, 150), 100), Fraction(rng.randint(0, 628), 100)))
    return out


@pytest.mark.slow
def test_c04_reduction_consistency():
    agree = round_trip = 0
    worst = 0.0
    for e, z0, v0, phi in _three_body_configs():
        params = OrbitParams(1, e, 1, phi)
        st = SitnikovState(1, e, 1, z0, v0, phi)
        back = project_sitnikov(embed_three_body(st, st, prec=256), prec=256)
        with workprec(512):
            exact = [to_ball(getattr(st, k)) for k in ("a", "e", "mu", "z", "v", "E")]
        if all(getattr(back, k).contains(x) for k, x in zip(("a", "e", "mu", "z", "v", "E"), exact)):
            round_trip += 1
        T = periods(params, 5, grid=8, up=False)
        times = [T * k / 5 for k in range(1, 6)]
        tb = embed_three_body(st, st, prec=320)
        _, samples3 = integrate_three_body(tb, T, prec=256, times=times)
        x0 = initial_oracles(params, z0, v0)
        samples = sample_trajectory(x0, (T, T / 5), IntegratorConfig.from_l(30))
        ok = len(samples3) == len(samples) == 5
        for (t3, s3), (t1, z1) in zip(samples3, samples):
            z3 = s3.positions[2][2]
            ok &= t3 == t1 and bool(z3.overlaps(z1))
            with workprec(128):
                worst = max(worst, float((z3 - z1).abs_upper()))
        agree += ok
    ok = record(4, agree == 10 and round_trip == 10,
                f"{agree}/10 z-enclosures intersect at 5 matched times up to 5 P "
                f"(max |dz| {worst:.1e}); project(embed(x)) contains x in {round_trip}/10")
    assert ok


# ---------------------------------------------------------------- 5, 6

def _arc_family():
    rng = random.Random(5)
    out = []
    for _ in range(16):
        e = Fraction(rng.randint(0, 50), 100)
        v0 = Fraction(rng.randint(30, 190), 100)
        phi = Fraction(rng.randint(0, 628), 100)
        out.append((OrbitParams(1, e, 1, phi), v0))
    return out


@pytest.fixture(scope="module")
def arcs():
    out = []
    for params, v0 in _arc_family():
        found, _, _ = arc_survey(initial_oracles(params, 0, v0), params, 40, Fraction(1, 32),
                                 IntegratorConfig.from_l(30))
        out += [(params, a) for a in found]
    return out


def test_c05_amplitude_bound(arcs):
    usable = [(p, a) for p, a in arcs if a.H is not None]
    bad = [(p, a) for p, a in usable if not a.max_abs_lower >= a.H]
    circ = [a for p, a in usable if p.e == 0]
    detail = (f"{len(usable)} arcs above threshold, max|z| >= H(tau) fails on {len(bad)} "
              f"(all with e > 0: {all(p.e > 0 for p, _ in bad)}; circular arcs {len(circ)}, "
              f"failures {sum(1 for p, _ in bad if p.e == 0)})")
    ok = record(5, len(usable) >= 50 and not bad, detail)
    assert ok, detail


def test_c05_companion_apocentre_bound(arcs):
    # the same comparison with r = a (1 + e) in place of a
    usable = [a for _, a in arcs if a.H_rmax is not None]
    assert len(usable) >= 50
    assert all(a.max_abs_lower >= a.H_rmax for a in usable)


def test_c06_chord_property(arcs):
    usable = [(p, a) for p, a in arcs if a.H is not None]
    verdicts = [a.chord() for _, a in usable]
    bad = sum(1 for v in verdicts if not v.holds)
    low = min(v.fraction for v in verdicts)
    detail = f"{len(usable)} arcs, fraction with |z| > H/4 exceeds 3/4 on all but {bad} (min {low:.3f})"
    ok = record(6, len(usable) >= 50 and bad == 0, detail)
    assert ok, detail


def test_c06_companion_apocentre_bound(arcs):
    usable = [a for _, a in arcs if a.H_rmax is not None]
    assert len(usable) >= 50
    assert all(a.chord(a.H_rmax).holds for a in usable)


# ---------------------------------------------------------------- 7

# oscillatory orbits whose zeros are all at least 2 P apart over 30 P
RECOVERY_CASES = [
    ("3/50", "189/100", "111/25"), ("7/100", "49/25", "217/50"), ("3/50", "49/25", "34/25"),
    ("7/50", "97/50", "147/100"), ("7/100", "197/100", "61/100"), ("11/100", "39/20", "136/25"),
    ("7/100", "49/25", "293/50"), ("1/5", "197/100", "467/100"), ("7/100", "189/100", "69/25"),
    ("7/50", "197/100", "114/25"), ("1/10", "197/100", "119/100"), ("7/100", "19/10", "459/100"),
]


@pytest.mark.slow
def test_c07_recovery_round_trip():
    start = time.perf_counter()
    matched = total_symbols = 0
    for e, v0, phi in RECOVERY_CASES:
        params = OrbitParams(1, Fraction(e), 1, Fraction(phi))
        x0 = initial_oracles(params, 0, Fraction(v0))
        base, l = recovery_params(2, params)
        P = base.P
        delta = periods(params, Fraction(1, 256), grid=2 ** 20, up=False)
        T = periods(params, 30, grid=2 ** 10, up=False)
        T = (T // delta) * delta
        cfg = RecoveryConfig(2, P, delta, base.eps, base.h, T)
        roots = find_roots(x0, T, IntegratorConfig.from_l(60))
        ref = symbols_from_roots(roots, P)
        samples = sample_trajectory(x0, (T, delta), IntegratorConfig.from_l(l))
        seq = recover_sequence([classify(z, cfg.eps) for _, z in samples], cfg)
        assert len(roots) >= 2 and min(ref) >= 2
        matched += list(seq.s) == ref
        total_symbols += len(ref)
    wall = time.perf_counter() - start
    ok = record(7, matched == len(RECOVERY_CASES) and wall < 600,
                f"{matched}/{len(RECOVERY_CASES)} sequences equal the root-gap floors "
                f"({total_symbols} symbols, delta = P/256), {wall:.0f} s")
    assert ok


# ---------------------------------------------------------------- 8

def test_c08_counting():
    start = time.perf_counter()
    base_ok, rec_fail, bound_fail = True, [], []
    for m in (2, 4):
        K = m + 1
        base_ok &= count_sequences(K, m) == 1
        for N in range(0, 12 * K + 1):
            c = count_sequences(N, m)
            if count_sequences(N + K, m) < (m // 2 + 1) * c:
                rec_fail.append((m, N))
            if c < (m / 2 + 1) ** (N / K):
                bound_fail.append((m, N))
    wall = time.perf_counter() - start
    first = {m: min((N for mm, N in rec_fail if mm == m), default=None) for m in (2, 4)}
    detail = (f"count((m+1)P) = 1: {base_ok}; recurrence fails at {len(rec_fail)} T "
              f"(first m=4 failure at T = {first[4]} P); lower bound fails at {len(bound_fail)} T "
              f"(m=2 only below 9 P: {all(N < 9 for m, N in bound_fail if m == 2)}); {wall:.1f} s")
    ok = record(8, base_ok and not rec_fail and not bound_fail and wall < 30, detail)
    assert ok, detail


def test_c08_companion_brute_force_agrees():
    from itertools import product
    for m in (2, 4):
        for N in range(0, 3 * (m + 1) + 2):
            brute = sum(1 for k in range(1, N // (m + 1) + 1)
                        for seq in product(range(m, N, 2), repeat=k)
                        if sum(s + 1 for s in seq) <= N)
            assert brute == count_sequences(N, m)


# ---------------------------------------------------------------- 9

@pytest.mark.slow
def test_c09_probe_trend():
    params = OrbitParams(1, Fraction(1, 10), 1, 0)
    x0 = initial_oracles(params, 0, Fraction(3, 2))
    ks = (5, 10, 20, 40)
    ts = [periods(params, k) for k in ks]
    start = time.perf_counter()
    recs = probe_complexity(x0, ts, 24)
    wall = time.perf_counter() - start
    bits = [r.bits_consumed for r in recs]
    increasing = all(b1 > b0 for b0, b1 in zip(bits, bits[1:]))
    slopes = [(b1 - b0) / (k1 - k0) for b0, b1, k0, k1 in zip(bits, bits[1:], ks, ks[1:])]
    ok = record(9, increasing and min(slopes) >= 1 and wall < 600,
                f"bits {bits} at {list(ks)} P, min increment {min(slopes):.1f} bits/period, {wall:.0f} s")
    assert ok


# ---------------------------------------------------------------- 10

def _mp_rhs(a, e, mu, z, v, E):
    d = 1 - e * mp.cos(E)
    return [0, 0, 0, v, -2 * mu * z / (z ** 2 + (a * d) ** 2) ** mp.mpf(1.5),
            mp.sqrt(mu / (4 * a ** 3)) / d]


def test_c10_jacobian_vs_finite_differences():
    rng = random.Random(10)
    mp.mp.dps = 40
    h = mp.mpf("1e-10")
    checked = bad = 0
    worst = 0.0
    for _ in range(100):
        vals = [Fraction(rng.randrange(5, 30), 10), Fraction(rng.randrange(0, 90), 100),
                Fraction(rng.randrange(5, 30), 10), Fraction(rng.randrange(-300, 300), 100),
                Fraction(rng.randrange(-200, 200), 100), Fraction(rng.randrange(0, 628), 100)]
        J = sitnikov_jacobian(SitnikovState(*vals), prec=128, full=True)
        x = [mp.mpf(q.numerator) / q.denominator for q in vals]
        for j in range(6):
            up, dn = list(x), list(x)
            up[j] += h
            dn[j] -= h
            fu, fd = _mp_rhs(*up), _mp_rhs(*dn)
            for i in range(6):
                if J[i][j].is_zero():
                    continue
                ref = (fu[i] - fd[i]) / (2 * h)
                got = mp.mpf(J[i][j].mid().str(35, radius=False))
                if ref == 0:
                    bad += abs(got) > 1e-20
                    continue
                rel = float(abs(got - ref) / abs(ref))
                worst = max(worst, rel)
                checked += 1
                bad += rel > 1e-6
    ok = record(10, bad == 0, f"{checked} nonzero entries over 100 states, max relative error "
                              f"{worst:.1e}")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
