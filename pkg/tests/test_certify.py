"""Grid refutation certificates and the brute-force minimax oracle."""

import time

import numpy as np
import pytest

from limitshadow.errors import GridTooCoarse
from limitshadow.oracles import grid_minimax, max_deviation
from limitshadow.pseudo_orbit import PseudoOrbit, splice_orbits
from limitshadow.shadowing import certify_unshadowable, replay_violation, shadow_linear
from limitshadow.systems import build_north_south, cat_map, torus_point

NS, CAT = build_north_south(0.1), cat_map()


@pytest.fixture(scope="module")
def ns_cert():
    po = splice_orbits(NS, NS.sink, NS.source, W=50)
    return po, certify_unshadowable(NS, po, 0.1, 50, 1e-4)


def test_sink_source_splice_certified(ns_cert):
    _, cert = ns_cert
    assert cert.certified
    assert 0 < cert.certified_eps <= 0.1
    assert cert.survivor is None


def test_candidate_grid_covers_circle(ns_cert):
    _, cert = ns_cert
    c = np.sort(cert.candidates[:, 0])
    gaps = np.diff(np.concatenate([c, [c[0] + 1.0]]))
    assert gaps.max() <= 1e-4 + 1e-15 and cert.mesh <= 1e-4


def test_violations_reproducible(ns_cert, rng):
    po, cert = ns_cert
    for k in rng.choice(cert.n_candidates, 200, replace=False):
        n = int(cert.violation_index[k])
        assert abs(n) <= 50
        got = replay_violation(NS, cert, po, int(k))
        assert got == pytest.approx(cert.violation_magnitude[k], abs=1e-12)
        assert got >= 0.1 - cert.slack[k]


def test_violation_side_matches_theory(ns_cert):
    # candidates near the sink escape forward; everything else fails at time 0
    _, cert = ns_cert
    x = cert.candidates[:, 0]
    near_sink = np.abs(x - 0.5) < 0.1 - 1e-3
    assert (cert.violation_index[near_sink] >= 1).all()
    assert (cert.violation_index[~near_sink & (np.abs(x - 0.5) > 0.1 + 1e-3)] == 0).all()


def test_exact_orbit_control_survives():
    po = PseudoOrbit.from_points(NS, NS.orbit(0.25, -50, 50))
    cert = certify_unshadowable(NS, po, 0.1, 50, 1e-4)
    assert not cert.certified
    assert abs(cert.survivor - 0.25) <= 1e-4


def test_cat_survivor_near_linear_shadow():
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=20)
    cert = certify_unshadowable(CAT, po, 0.25, 5, 2e-3)
    lin = shadow_linear(CAT, po)
    assert not cert.certified
    assert CAT.distance(cert.survivor, lin.shadow_point) <= 5 * 2e-3
    assert cert.survivor_deviation < 0.25


def test_cat_splice_below_its_minimax_is_refuted():
    # the best possible max deviation on +-8 is about 0.19, so eps = 0.1 has no shadow
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=20)
    ref = grid_minimax(CAT, po, 8)
    assert ref.lower_bound > 0.1
    cert = certify_unshadowable(CAT, po, 0.1, 20, 2e-3)
    assert cert.certified


def test_grid_too_coarse():
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=20)
    with pytest.raises(GridTooCoarse):
        certify_unshadowable(CAT, po, 0.25, 8, 2e-3)


def test_sink_source_certificate_runtime():
    po = splice_orbits(NS, NS.sink, NS.source, W=50)
    t = time.perf_counter()
    certify_unshadowable(NS, po, 0.1, 50, 1e-4)
    assert time.perf_counter() - t < 30


# -- oracle --------------------------------------------------------------------


def test_minimax_on_exact_orbit_is_zero():
    p = torus_point(0.37, 0.81)
    po = PseudoOrbit.from_points(CAT, CAT.orbit(p, -8, 8))
    ref = grid_minimax(CAT, po, 8)
    assert ref.value <= 1e-6
    assert CAT.distance(torus_point(*ref.point), p) <= 1e-6


def test_minimax_bounds_bracket_brute_grid(rng):
    po = splice_orbits(CAT, torus_point(*rng.random(2)), torus_point(*rng.random(2)), W=4)
    ref = grid_minimax(CAT, po, 4, grid_step=1e-2)
    refs = {n: po.point(n).coords for n in range(-4, 5)}
    g = (np.arange(400) + 0.5) / 400
    pts = np.array(np.meshgrid(g, g, indexing="ij")).reshape(2, -1).T
    brute = max_deviation(CAT, pts, refs, 4).min()
    assert ref.lower_bound - 1e-12 <= ref.value <= brute + 1e-12
