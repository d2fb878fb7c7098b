"""Oracle bits against integration time.

For a persistently oscillating orbit the integrator asks for roughly
L t / ln 2 extra bits of the initial data.  This prints the request and
the work for a doubling sequence of horizons.
"""
from fractions import Fraction

from sitnikov.analysis import probe_complexity
from sitnikov.integrator import initial_oracles
from sitnikov.kepler import OrbitParams

params = OrbitParams(1, Fraction(1, 10), 1, 0)
x0 = initial_oracles(params, 0, Fraction(3, 2))
ts = [Fraction(k * 12566, 1000) for k in (1, 2, 4, 8, 16)]

print(f"{'t':>8} {'bits':>6} {'steps':>6} {'seconds':>8}")
for r in probe_complexity(x0, ts, 24):
    print(f"{float(r.t):8.2f} {r.bits_consumed:6d} {r.steps:6d} {r.wall_seconds:8.2f}")
