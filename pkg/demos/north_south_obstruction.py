#!/usr/bin/env python3
# A north-south map of the circle has a sink and a source.  Gluing the past
# of the sink to the future of the source gives a two-sided limit
# pseudo-orbit with a single jump, and no true orbit stays close to it.
# The grid search below proves this for eps = 0.1 on the window [-50, 50].

import numpy as np

from limitshadow import PseudoOrbit, analysis, build_north_south, certify_unshadowable, splice_orbits

ns = build_north_south(0.1)
print("f'(source) = %.4f, f'(sink) = %.4f" % (ns.derivative(ns.source), ns.derivative(ns.sink)))

# %% the refutation
po = splice_orbits(ns, ns.sink, ns.source, W=50)
cert = certify_unshadowable(ns, po, 0.1, 50, 1e-4)
idx, counts = np.unique(cert.violation_index, return_counts=True)
print("\ncandidates:", cert.n_candidates, " certified:", cert.certified)
print("first violation time -> number of candidates:", dict(zip(idx.tolist(), counts.tolist())))
print("no orbit stays within %.6f of the splice" % cert.certified_eps)

# %% the same search finds exact orbits
ctrl = certify_unshadowable(ns, PseudoOrbit.from_points(ns, ns.orbit(0.25, -50, 50)), 0.1, 50, 1e-4)
print("\nexact orbit of 0.25: certified", ctrl.certified, "survivor %.5f" % ctrl.survivor)

# %% why: no proper attracting set for a shadowable map
(att,) = analysis.find_attracting_set(ns, [(0.3, 0.7)])
(rep,) = analysis.find_repelling_set(ns, [(0.8, 0.2)])
print("\nattracting set in (0.3, 0.7):", att.cloud, "proper:", att.proper)
print("repelling set in (0.8, 0.2):", rep.cloud)

recs = analysis.periodic_points(ns, 1)
src, snk = sorted(recs, key=lambda r: r.point)
rel = analysis.heteroclinic_relate(ns, src, snk)
print("source index %d, sink index %d, related: %s" % (rel.index_p, rel.index_q, rel.related))
