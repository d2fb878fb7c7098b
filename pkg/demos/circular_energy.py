"""Energy drift on the circular orbit.

For e = 0 the primaries sit at fixed distance a and
H = v^2/2 - 2 mu / sqrt(z^2 + a^2) is a first integral.  We integrate a few
orbits for 20 periods and print the certified energy at the end next to
the starting value.
"""
from fractions import Fraction

from flint import arb

from sitnikov.ball import to_ball
from sitnikov.dynamics import energy_circular
from sitnikov.integrator import IntegratorConfig, initial_oracles, integrate
from sitnikov.kepler import OrbitParams

params = OrbitParams(1, 0, 1, 0)
T = Fraction(252)   # a little over 20 periods of 4 pi

for v0 in (Fraction(1, 2), Fraction(1), Fraction(3, 2)):
    st = integrate(initial_oracles(params, 0, v0), T, IntegratorConfig.from_l(30))
    h0 = energy_circular(arb(1), arb(1), arb(0), to_ball(v0))
    h1 = energy_circular(st.a, st.mu, st.z, st.v)
    print(f"v0 = {v0}:  H(0) = {h0.str(12)}   H(T) = {h1.str(12)}   overlap: {h0.overlaps(h1)}")
    print(f"          {st.steps} steps at {st.precision} bits, order {st.order}")
