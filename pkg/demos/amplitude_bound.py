"""Amplitude between zeros against the Sturm bound.

Between consecutive zeros tau apart the orbit must reach height H(tau).
With the primaries at distance a the bound is only valid when e = 0; the
primaries swing out to a (1 + e).  Small oscillations then see a weaker
restoring force for part of the time, their half-period grows past the
threshold and the r = a bound asks for more height than they have.  Using
a (1 + e) instead gives a bound that holds on every arc below.
"""
from fractions import Fraction

from sitnikov.analysis import arc_survey
from sitnikov.integrator import IntegratorConfig, initial_oracles
from sitnikov.kepler import OrbitParams

for e, v0, phi in ((0, Fraction(3, 2), 0), (Fraction(1, 10), Fraction(29, 50), Fraction(19, 5))):
    params = OrbitParams(1, e, 1, phi)
    arcs, roots, _ = arc_survey(initial_oracles(params, 0, v0), params, 40, Fraction(1, 32),
                                IntegratorConfig.from_l(30))
    print(f"e = {e}, v0 = {v0}: {len(roots) - 1} arcs")
    for a in arcs:
        cols = []
        for h in (a.H, a.H_rmax):
            if h is None:
                cols.append("below threshold")
            else:
                cols.append(f"{float(h.mid()):.4f} {'ok' if a.max_abs_lower >= h else 'VIOLATED'}")
        print(f"  arc {a.index:2d}: gap {float(a.gap.mid()):7.4f}  max|z| >= {float(a.max_abs_lower.mid()):.4f}"
              f"  H(r=a): {cols[0]:<16}  H(r=a(1+e)): {cols[1]}")
