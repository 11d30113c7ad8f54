"""Direct solvers: the hyperbolic series solver and symbolic diagonal extraction."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limitshadow.errors import TruncationInsufficient, UnsupportedSystem
from limitshadow.oracles import grid_minimax
from limitshadow.pseudo_orbit import (
    ErrorSchedule,
    PseudoOrbit,
    error_sequence,
    generate_pseudo_orbit,
    splice_orbits,
)
from limitshadow.shadowing import TailBound, recurrence_defect, shadow, shadow_linear, shadow_sft
from limitshadow.suites import garbage_splice
from limitshadow.systems import SymbolicPoint, build_north_south, cat_map, full_shift, golden_mean_shift, torus_point

CAT, GM, NS = cat_map(), golden_mean_shift(), build_north_south(0.1)
unit = st.floats(0, 1, exclude_max=True, allow_nan=False)


def true_deviations(system, cert, po):
    # forward/backward iteration of the shadow point, not the stored orbit
    W = cert.W
    return np.array([system.distance(system.apply(cert.shadow_point, i), po.point(i)) for i in range(-W, W + 1)])


# -- toral ---------------------------------------------------------------------


@given(unit, unit, st.integers(1, 40))
@settings(max_examples=25)
def test_exact_orbit_shadowed_by_seed(x, y, W):
    p = torus_point(x, y)
    po = PseudoOrbit.from_points(CAT, CAT.orbit(p, -W, W))
    cert = shadow_linear(CAT, po)
    assert CAT.distance(cert.shadow_point, p) <= 1e-12
    assert cert.deviations.max() <= 1e-12


def test_splice_decay_rates():
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=150)
    cert = shadow_linear(CAT, po)
    d = true_deviations(CAT, cert, po)
    assert np.allclose(d, cert.deviations, atol=1e-15)
    assert d[0] < 1e-12 and d[-1] < 1e-12
    assert cert.orbit_residual <= 1e-12
    fwd = d[150 + 20] / d[150 + 19]
    bwd = d[150 - 20] / d[150 - 19]
    assert fwd == pytest.approx(CAT.rate_s, rel=1e-6)
    assert bwd == pytest.approx(1 / CAT.rate_u, rel=1e-6)
    assert cert.verdict == "two_sided_limit_shadowed"


def test_splice_matches_minimax_oracle():
    # the oracle never touches the recurrence: it minimizes max deviation by branch and bound
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=8)
    cert = shadow_linear(CAT, po)
    ref = grid_minimax(CAT, po, 8, grid_step=1e-3)
    assert ref.lower_bound <= cert.deviations.max() + 1e-9
    assert cert.deviations.max() - ref.value <= 5e-3


@pytest.fixture(scope="module")
def scheduled():
    po = generate_pseudo_orbit(CAT, torus_point(0.3, 0.6), ErrorSchedule("inv_linear", 0.3), 200, 7)
    return po, shadow_linear(CAT, po)


def test_scheduled_verdict_and_envelope(scheduled):
    po, cert = scheduled
    assert cert.verdict == "two_sided_limit_shadowed"
    e = error_sequence(CAT, po, -200, 200)
    rs, ru, kappa = CAT.rate_s, CAT.rate_u, CAT.condition
    geo = kappa * e.max() * (rs**10 / (1 - rs) + ru**-10 / (ru - 1))
    for k in (50, 100, 150):
        far = max(e[: 200 - (k - 10) + 1].max(), e[200 + k - 10 :].max())
        assert cert.envelope(k) < 3 * far + geo


def test_scheduled_envelope_monotone(scheduled):
    _, cert = scheduled
    env = [cert.envelope(k) for k in (25, 50, 100, 200)]
    assert all(a >= b for a, b in zip(env, env[1:]))


def test_certificate_is_true_orbit(scheduled):
    po, cert = scheduled
    assert cert.orbit_residual <= 1e-9
    assert np.allclose(true_deviations(CAT, cert, po), cert.deviations, atol=1e-12)
    assert recurrence_defect(CAT, cert, po) <= 1e-10
    assert cert.edge_consistent()


def test_tail_bound_covers_exact_shadow_beyond_window(scheduled):
    # the exact shadow also feels the errors past the window; a solve on a
    # wider window stands in for it
    po, cert = scheduled
    wide = shadow_linear(CAT, po, W=360)
    assert CAT.distance(wide.shadow_point, cert.shadow_point) <= 1e-12
    for i in (201, 230, 300, -201, -260, -300):
        assert wide.deviation(i) <= cert.tail_bound(i) + cert.truncation_bound


def test_truncation_guard():
    po = splice_orbits(CAT, torus_point(0, 0), torus_point(0.1, 0.2), W=150)
    with pytest.raises(TruncationInsufficient):
        shadow_linear(CAT, po, tail_terms=2)


def test_minimal_lift_option_still_an_orbit():
    po = splice_orbits(CAT, torus_point(0.7, 0.1), torus_point(0.2, 0.9), W=40)
    a, b = shadow_linear(CAT, po, lift="minimal"), shadow_linear(CAT, po)
    assert a.orbit_residual <= 1e-12 and b.orbit_residual <= 1e-12
    assert b.deviations.max() <= a.deviations.max() + 1e-12


def test_unrestricted_amplitude():
    kicks = {-40: 0.5, -7: 0.5, 0: 0.5, 13: 0.5, 60: 0.5}
    po = generate_pseudo_orbit(CAT, torus_point(0.3, 0.6), ErrorSchedule("inv_linear", 0.3), 200, 7, kicks=kicks)
    e = error_sequence(CAT, po, -200, 200)
    assert all(e[i + 200] == pytest.approx(0.5, abs=1e-12) for i in kicks)
    cert = shadow_linear(CAT, po)
    assert cert.verdict == "two_sided_limit_shadowed"
    assert max(cert.deviation(200), cert.deviation(-200)) < 1e-2


def test_tail_bound_roundtrip_and_sum():
    t = TailBound(5, [("geometric", 0.1, 0.5)], [("dyadic", 2, 5)])
    assert t(6) == pytest.approx(0.1 * 0.5) and t(-7) == pytest.approx(2.0**-5)
    assert TailBound.from_dict(t.to_dict()).to_dict() == t.to_dict()
    assert t.decays(1) and t.decays(-1)
    u = t + TailBound(5, [("constant", 0.2)], [])
    assert not u.decays(1) and u(6) == pytest.approx(0.25)


# -- symbolic ------------------------------------------------------------------


def test_sft_exact_orbit():
    p = SymbolicPoint(-3, (0, 1, 0, 0, 1), (0,), (0, 1))
    po = PseudoOrbit.from_points(GM, [p.shift(i) for i in range(-10, 11)])
    cert = shadow_sft(GM, po)
    assert cert.shadow_point.canonical() == p.canonical()
    assert (cert.deviations == 0).all() and cert.orbit_residual == 0


@pytest.mark.parametrize("seed", range(6))
def test_golden_mean_garbage_splice(seed):
    rng = np.random.default_rng(seed)
    po = garbage_splice(GM, SymbolicPoint.periodic((0,)), SymbolicPoint.periodic((0, 1)), 24, 5, rng)
    cert = shadow_sft(GM, po)
    z = cert.shadow_point
    assert GM.is_admissible(z) and cert.orbit_residual == 0
    assert all(z.symbol(i) == 0 for i in range(-60, -6))
    right = [z.symbol(i) for i in range(8, 60)]
    assert right[::2] == [right[0]] * len(right[::2]) and right[0] != right[1]
    # deviations <= 2^-(|i| - c) with c covering the garbage block and one connecting word
    for i in range(-24, 25):
        assert cert.deviation(i) <= 2.0 ** -(abs(i) - 5)
    assert cert.tail_bound.decays(1) and cert.tail_bound.decays(-1)


def test_full_shift_needs_no_repair():
    fs = full_shift(2)
    po = generate_pseudo_orbit(fs, SymbolicPoint.periodic((0, 1, 1)), ErrorSchedule("inv_square", 1.0), 64, 5)
    cert = shadow_sft(fs, po)
    assert cert.repairs == []
    assert np.array_equal(true_deviations(fs, cert, po), cert.deviations)
    assert cert.deviations[-8:].max() <= 2.0**-10


def test_repairs_keep_admissibility(rng):
    for _ in range(20):
        po = garbage_splice(GM, SymbolicPoint.periodic((0, 1)), SymbolicPoint.periodic((0,)), 16,
                            int(rng.integers(1, 9)), rng)
        cert = shadow_sft(GM, po)
        assert GM.is_admissible(cert.shadow_point)
        assert np.array_equal(true_deviations(GM, cert, po), cert.deviations)


# -- dispatch --------------------------------------------------------------


def test_exact_north_south_orbit():
    po = PseudoOrbit.from_points(NS, NS.orbit(0.25, -30, 30))
    cert = shadow(NS, po)
    assert cert.deviations.max() <= 1e-12


def test_north_south_splice_unsupported():
    with pytest.raises(UnsupportedSystem):
        shadow(NS, splice_orbits(NS, 0.5, 0.0, W=10))
