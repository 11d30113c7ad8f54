#!/usr/bin/env python3
# Limit shadowing on the cat map: a pseudo-orbit whose one-step errors
# decay like 0.3/(1+|i|) is followed by one true orbit, and the deviations
# shrink as |i| grows.

import numpy as np

from limitshadow import ErrorSchedule, cat_map, generate_pseudo_orbit, shadow_linear, splice_orbits, torus_point
from limitshadow.pseudo_orbit import error_sequence

cat = cat_map()
print("cat map rates: contraction %.6f, expansion %.6f" % (cat.rate_s, cat.rate_u))

# %% a decaying pseudo-orbit and its shadow
po = generate_pseudo_orbit(cat, torus_point(0.3, 0.6), ErrorSchedule("inv_linear", 0.3), 200, 7)
cert = shadow_linear(cat, po)
errors = error_sequence(cat, po, -200, 200)

print("\nverdict:", cert.verdict)
print("orbit residual: %.3g" % cert.orbit_residual)
print("\n   k   max error |i|>=k   max deviation |i|>=k")
for k in (25, 50, 100, 200):
    far = np.abs(np.arange(-200, 201)) >= k
    print("%4d   %17.3e   %20.3e" % (k, errors[far].max(), cert.envelope(k)))

# %% big errors in the middle do not matter
kicks = {i: 0.5 for i in (-60, -15, 0, 22, 75)}
kicked = generate_pseudo_orbit(cat, torus_point(0.3, 0.6), ErrorSchedule("inv_linear", 0.3), 200, 7, kicks=kicks)
kc = shadow_linear(cat, kicked)
print("\nwith five jumps of 0.5:", kc.verdict, "edge deviations %.2e / %.2e" % (kc.deviation(-200), kc.deviation(200)))

# %% splicing two unrelated orbits
y, x = torus_point(0, 0), torus_point(0.1, 0.2)
sp = shadow_linear(cat, splice_orbits(cat, y, x, W=150))
ratios = sp.deviations[1:] / sp.deviations[:-1]
print("\nsplice of (0,0) and (0.1,0.2): deviation at 0 is %.4f" % sp.deviation(0))
print("backward decay per step %.6f (1/rate_u = %.6f)" % (1 / ratios[100], 1 / cat.rate_u))
print("forward decay per step  %.6f (rate_s   = %.6f)" % (ratios[200], cat.rate_s))
print("deviation at +-150: %.2e / %.2e" % (sp.deviation(-150), sp.deviation(150)))
