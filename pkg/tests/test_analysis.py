"""Constants, leaf intersections, trapping regions, periodic points and relations."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limitshadow import analysis
from limitshadow.analysis import EmptyWitness, NotExpansive
from limitshadow.errors import ShadowError
from limitshadow.systems import SymbolicPoint, build_north_south, cat_map, full_shift, golden_mean_shift, torus_point

CAT, GM, NS = cat_map(), golden_mean_shift(), build_north_south(0.1)
unit = st.floats(0, 1, exclude_max=True, allow_nan=False)


def int_det(m):
    # 2x2 integer determinant, the in-repo oracle for fixed-point counts
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def int_matpow(m, n):
    out = [[1, 0], [0, 1]]
    for _ in range(n):
        out = [[sum(out[i][k] * m[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
    return out


# -- expansivity and shadowing constants -----------------------------------------


def test_expansivity_constants():
    assert analysis.expansivity_constant(GM) == 0.5
    assert analysis.expansivity_constant(CAT) >= 0.1
    ns = analysis.expansivity_constant(NS)
    assert isinstance(ns, NotExpansive) and not ns


def test_sft_expansivity_sampled(rng):
    for _ in range(1000):
        p, q = GM.random_point(rng, -8, 16), GM.random_point(rng, -8, 16)
        if p.canonical() == q.canonical():
            continue
        assert max(GM.distance(p.shift(i), q.shift(i)) for i in range(-64, 65)) >= 0.5


def test_cat_expansivity_sampled(rng):
    c = analysis.expansivity_constant(CAT)
    a = CAT.matrix.astype(float)
    for _ in range(10_000):
        p = rng.random(2)
        v = rng.standard_normal(2)
        q = p + v / np.linalg.norm(v) * c * 1e-3 * rng.uniform(1, 10)
        f, fq, b, bq = p.copy(), q.copy(), p.copy(), q.copy()
        for _ in range(60):
            f, fq = a @ f, a @ fq
            b, bq = np.linalg.solve(a, b), np.linalg.solve(a, bq)
            df = np.linalg.norm((f - fq + 0.5) % 1.0 - 0.5)
            db = np.linalg.norm((b - bq + 0.5) % 1.0 - 0.5)
            if max(df, db) > c:
                break
        else:
            pytest.fail(f"pair starting at {p} stayed within {c} for 60 steps")


def test_shadowing_constants():
    assert analysis.shadowing_constant(GM, 0.25) == 0.25
    assert analysis.shadowing_constant(GM, 0.1) == 2.0**-4
    d = analysis.shadowing_constant(CAT, 0.05)
    assert 0 < d < 0.05


def test_agreement_radius():
    assert analysis.agreement_radius(2.0**-3) == 3
    assert analysis.agreement_radius(0.1) == 3
    # agreement on |j| <= R forces distance <= 2^-(R+1) < delta
    for delta in (0.5, 0.2, 2.0**-5, 1e-3):
        R = analysis.agreement_radius(delta)
        assert 2.0 ** -(R + 1) < delta


def test_cat_spacing_value():
    assert analysis.specification_spacing(CAT, 0.01) == 10


# -- leaf intersections -----------------------------------------------------------


def test_intersection_fixed_point():
    z = analysis.stable_unstable_intersection(CAT, torus_point(0, 0), torus_point(0, 0))
    assert CAT.distance(z, torus_point(0, 0)) < 1e-12


def test_intersection_converges():
    x, y = torus_point(0.1, 0.2), torus_point(0, 0)
    z = analysis.stable_unstable_intersection(CAT, x, y)
    assert CAT.distance(CAT.apply(z, 60), CAT.apply(x, 60)) < 1e-8
    assert CAT.distance(CAT.apply(z, -60), y) < 1e-8
    # z lies on the unstable line through the origin, up to a lattice vector
    v = CAT.unstable_basis[:, 0]
    c = z.coords
    assert min(abs(v[0] * (c[1] + m[1]) - v[1] * (c[0] + m[0])) for m in itertools.product((-1, 0, 1), repeat=2)) < 1e-12


@given(unit, unit, unit, unit)
@settings(max_examples=30)
def test_intersection_property(a, b, c, d):
    x, y = torus_point(a, b), torus_point(c, d)
    z = analysis.stable_unstable_intersection(CAT, x, y)
    assert CAT.distance(CAT.apply(z, 60), CAT.apply(x, 60)) < 1e-8
    assert CAT.distance(CAT.apply(z, -60), CAT.apply(y, -60)) < 1e-8


def test_sft_intersection():
    z = analysis.stable_unstable_intersection(GM, SymbolicPoint.periodic((0, 1)), SymbolicPoint.periodic((0,)))
    assert GM.is_admissible(z)
    assert all(z.symbol(i) == 0 for i in range(-50, 0))
    assert GM.distance(z.shift(40), SymbolicPoint.periodic((0, 1)).shift(40)) <= 2.0**-30


def test_north_south_intersections():
    w = analysis.stable_unstable_intersection(NS, NS.source, NS.sink)
    assert isinstance(w, EmptyWitness) and not w
    z = analysis.stable_unstable_intersection(NS, NS.sink, NS.source)
    assert isinstance(z, float)
    assert NS.distance(NS.apply(z, 200), NS.sink) < 1e-9 and NS.distance(NS.apply(z, -200), NS.source) < 1e-9


# -- trapping regions ------------------------------------------------------------


def test_north_south_attracting_arc():
    (rep,) = analysis.find_attracting_set(NS, [(0.3, 0.7)])
    assert rep.trapped and rep.proper
    assert np.allclose(rep.cloud, [0.5])
    assert NS.apply(0.3, 1) == pytest.approx(0.395, abs=1e-3)
    assert NS.apply(0.7, 1) == pytest.approx(0.605, abs=1e-3)


def test_north_south_untrapped_arc():
    (rep,) = analysis.find_attracting_set(NS, [(0.6, 0.9)])
    assert not rep.trapped


def test_north_south_repelling_arc():
    (rep,) = analysis.find_repelling_set(NS, [(0.8, 0.2)])
    assert rep.trapped and np.allclose(rep.cloud, [0.0])


def test_cat_random_rectangles_untrapped(rng):
    regions = []
    for _ in range(50):
        x0, y0 = rng.random(2)
        wx, wy = rng.uniform(0.05, 0.9, 2)
        regions.append(((x0, (x0 + wx) % 1), (y0, (y0 + wy) % 1)))
    assert not any(r.trapped for r in analysis.find_attracting_set(CAT, regions))


@given(st.floats(0, 1, exclude_max=True), st.floats(0.02, 0.98))
@settings(max_examples=40)
def test_trap_soundness(a, length):
    res = 1e-3
    (rep,) = analysis.find_attracting_set(NS, [(a, (a + length) % 1.0)], resolution=res)
    if rep.trapped:
        # both ends move inward by at least the resolution, checked on the lift
        fa, fb = NS.lift_step(np.array(a)), NS.lift_step(np.array(a + length))
        assert fa - a >= res and (a + length) - fb >= res


# -- periodic points ----------------------------------------------------------------


def test_cat_periodic_counts_match_determinant():
    recs = analysis.periodic_points(CAT, 6)
    a = [[2, 1], [1, 1]]
    for n in range(1, 7):
        an = int_matpow(a, n)
        oracle = abs(int_det([[an[0][0] - 1, an[0][1]], [an[1][0], an[1][1] - 1]]))
        assert sum(1 for r in recs if n % r.period == 0) == oracle
    assert [abs(int_det([[x - 1 if i == j else x for j, x in enumerate(row)] for i, row in
                         enumerate(int_matpow(a, n))])) for n in range(1, 7)] == [1, 5, 16, 45, 121, 320]


def test_cat_periodic_points_are_exact():
    for r in analysis.periodic_points(CAT, 4):
        nums = [f.numerator * (r.rational[0].denominator * r.rational[1].denominator // f.denominator)
                for f in r.rational]
        D = r.rational[0].denominator * r.rational[1].denominator
        assert CAT.apply_rational(nums, D, r.period) == tuple(x % D for x in nums)
        assert r.index == 1 and r.hyperbolic


def test_golden_mean_periodic_counts_match_trace():
    recs = analysis.periodic_points(GM, 6)
    t = np.array([[1, 1], [1, 0]], dtype=object)
    for n in range(1, 7):
        trace = int(np.trace(np.linalg.matrix_power(t, n)))
        assert sum(1 for r in recs if n % r.period == 0) == trace
        assert all(r.index is None for r in recs)


def test_golden_mean_low_periods():
    recs = analysis.periodic_points(GM, 2)
    words = sorted(tuple(r.point.symbol(i) for i in range(r.period)) for r in recs)
    assert words == [(0,), (0, 1), (1, 0)]


def test_cat_fixed_point_only():
    (r,) = analysis.periodic_points(CAT, 1)
    assert CAT.distance(r.point, torus_point(0, 0)) == 0


def test_north_south_periodic_points():
    recs = analysis.periodic_points(NS, 3)
    assert sorted((r.point, r.index) for r in recs) == [(0.0, 0), (0.5, 1)]


# -- heteroclinic relations --------------------------------------------------------------


def test_cat_period_two_mutually_related():
    recs = analysis.periodic_points(CAT, 2)
    assert len(recs) == 5
    for p, q in itertools.product(recs, repeat=2):
        rel = analysis.heteroclinic_relate(CAT, p, q)
        assert rel.related and rel.same_index and rel.index_p == 1


def test_north_south_source_sink_unrelated():
    recs = {r.point: r for r in analysis.periodic_points(NS, 1)}
    rel = analysis.heteroclinic_relate(NS, recs[0.0], recs[0.5])
    assert not rel.related and not rel.same_index
    assert (rel.index_p, rel.index_q) == (0, 1)


def test_relation_symmetry():
    for system, bound in ((CAT, 2), (GM, 3), (NS, 1)):
        recs = analysis.periodic_points(system, bound)
        for p, q in itertools.combinations(recs, 2):
            assert analysis.heteroclinic_relate(system, p, q).related == \
                analysis.heteroclinic_relate(system, q, p).related


def test_full_shift_periodic_counts():
    recs = analysis.periodic_points(full_shift(2), 5)
    for n in range(1, 6):
        assert sum(1 for r in recs if n % r.period == 0) == 2**n


def test_related_points_with_different_index_raise():
    recs = analysis.periodic_points(CAT, 1)
    bogus = analysis.PeriodicPointRecord(recs[0].point, 1, 0, True, recs[0].rational)
    with pytest.raises(ShadowError):
        analysis.heteroclinic_relate(CAT, recs[0], bogus)
