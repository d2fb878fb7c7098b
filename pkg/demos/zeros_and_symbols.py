"""From plane crossings to a symbol sequence.

A near-escape orbit crosses the plane of the primaries at long, irregular
intervals.  The zeros are first isolated to 2^-60; the sequence
floor(gap / P) is then read back from nothing but the signs of z on a
coarse grid.
"""
from fractions import Fraction

from sitnikov.analysis import recovery_params
from sitnikov.integrator import IntegratorConfig, find_roots, initial_oracles, sample_trajectory
from sitnikov.symbolic import RecoveryConfig, classify, recover_sequence, symbols_from_roots
from sitnikov.kepler import OrbitParams

params = OrbitParams(1, Fraction(3, 50), 1, Fraction(111, 25))
x0 = initial_oracles(params, 0, Fraction(189, 100))

base, l = recovery_params(2, params)
P = base.P
delta = Fraction(3217, 65536)          # just below P / 256
T = 7680 * delta                       # just below 30 P
print(f"P = {P.str(15)}, H(2P) = {base.h.str(10)}, eps = 2^-{l}")

roots = find_roots(x0, T, IntegratorConfig.from_l(60))
for k, r in enumerate(roots):
    print(f"  tau_{k} = {r.str(20)}")
print("floor(gap / P):", symbols_from_roots(roots, P))

cfg = RecoveryConfig(2, P, delta, base.eps, base.h, T)
samples = sample_trajectory(x0, (T, delta), IntegratorConfig.from_l(l))
classes = [classify(z, cfg.eps) for _, z in samples]
print("recovered:     ", list(recover_sequence(classes, cfg).s))
