#!/usr/bin/env python3
# The golden-mean shift: a pseudo-orbit that follows 0^inf in the past,
# (01)^inf in the future and has garbage in between.  The direct solver
# repairs the diagonal; the pipeline goes through one-sided shadows and a
# two-point specification, and both land on the same tails.

import numpy as np

from limitshadow import SymbolicPoint, golden_mean_shift, shadow_sft, two_sided_limit_shadow
from limitshadow.suites import garbage_splice

gm = golden_mean_shift()
print("mixing time:", gm.mixing_time)

rng = np.random.default_rng(5)
W = 32
po = garbage_splice(gm, SymbolicPoint.periodic((0,)), SymbolicPoint.periodic((0, 1)), W, 6, rng)
print("\ncentral input symbols:", "".join(str(po.point(i).symbol(0)) for i in range(-6, 7)))

direct = shadow_sft(gm, po)
print("direct shadow:   ", "".join(str(direct.shadow_point.symbol(i)) for i in range(-12, 13)))
print("repairs:", direct.repairs)

pipe = two_sided_limit_shadow(gm, po, 0.25)
print("pipeline shadow: ", "".join(str(pipe.shadow_point.symbol(i)) for i in range(-12, 13)))

print("\npipeline trace")
for step in pipe.trace.steps:
    info = {k: v for k, v in step.items() if k not in ("step", "name")}
    print("  %d %-18s %s" % (step["step"], step["name"], info))

same = all(pipe.shadow_point.symbol(i) == direct.shadow_point.symbol(i) for i in range(-100, 101) if abs(i) >= W // 2)
print("\nagree for |i| >= W/2:", same)
print("agreement radius at the edges:", int(-np.log2(pipe.deviations[0])), int(-np.log2(pipe.deviations[-1])))
