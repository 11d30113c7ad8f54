"""Fixed-seed check bundles behind ``limitshadow verify <suite>``.

Each suite returns a list of :class:`Check` rows; a suite passes when
every row does.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import analysis, shadowing
from .errors import NonDecayingInput
from .oracles import grid_minimax
from .pseudo_orbit import (
    ErrorSchedule,
    PseudoOrbit,
    generate_pseudo_orbit,
    replace_points,
    splice_orbits,
)
from .systems import SymbolicPoint, build_north_south, cat_map, golden_mean_shift, torus_point


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def garbage_splice(sft, left: SymbolicPoint, right: SymbolicPoint, W: int, n_garbage: int, rng) -> PseudoOrbit:
    """Orbit of ``left`` for ``i < 0`` and of ``right`` for ``i >= 0``, then
    ``n_garbage`` central points overwritten by random admissible points."""
    pts = [left.shift(i) if i < 0 else right.shift(i) for i in range(-W, W + 1)]
    po = PseudoOrbit.from_points(sft, pts)
    lo = -(n_garbage // 2)
    return replace_points(po, {lo + k: sft.random_point(rng, int(rng.integers(-4, 1)), 6) for k in range(n_garbage)})


def suite_lemma21() -> list[Check]:
    """One-sided schedules give limit and negative-limit shadows."""
    cat, out = cat_map(), []
    for kind, verdict, side in (
        ("inv_linear_forward", "limit_shadowed", 1),
        ("inv_linear_backward", "negative_limit_shadowed", -1),
    ):
        for seed in range(3):
            po = generate_pseudo_orbit(cat, torus_point(0.3, 0.6), ErrorSchedule(kind, 0.3), 200, seed)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", NonDecayingInput)
                cert = shadowing.shadow_linear(cat, po)
            edge = cert.deviation(side * 200)
            out.append(Check(f"{kind} seed {seed}", cert.verdict == verdict and edge < 1e-2,
                             f"verdict {cert.verdict}, deviation at {side * 200}: {edge:.3g}"))
    gm = golden_mean_shift()
    rng = np.random.default_rng(21)
    left, right = SymbolicPoint.periodic((0,)), SymbolicPoint.periodic((0, 1))
    for k in range(3):
        po = garbage_splice(gm, left, right, 24, 5, rng)
        fwd = shadowing.shadow_sft(gm, po.forward_part())
        bwd = shadowing.shadow_sft(gm, po.backward_part())
        ok = fwd.tail_bound.decays(1) and bwd.tail_bound.decays(-1) and fwd.deviations[-1] < 2**-10
        out.append(Check(f"golden-mean one-sided parts {k}", bool(ok),
                         f"forward edge {fwd.deviations[-1]:.3g}, backward edge {bwd.deviations[0]:.3g}"))
    return out


def suite_lemma22() -> list[Check]:
    """The glued pipeline agrees with the direct solvers."""
    out = []
    gm = golden_mean_shift()
    rng = np.random.default_rng(22)
    left, right = SymbolicPoint.periodic((0,)), SymbolicPoint.periodic((0, 1))
    W = 32
    for k in range(10):
        po = garbage_splice(gm, left, right, W, int(rng.integers(1, 9)), rng)
        pipe = shadowing.two_sided_limit_shadow(gm, po, 0.25)
        direct = shadowing.shadow_sft(gm, po)
        idx = [i for i in range(-3 * W, 3 * W + 1) if abs(i) >= W // 2]
        agree = all(pipe.shadow_point.symbol(i) == direct.shadow_point.symbol(i) for i in idx)
        tr = pipe.trace
        ok = gm.is_admissible(pipe.shadow_point) and agree and 2 * tr.N >= tr.L
        out.append(Check(f"golden-mean splice {k}", ok, f"L={tr.L} N={tr.N} verdict {pipe.verdict}"))
    cat = cat_map()
    po = generate_pseudo_orbit(cat, torus_point(0.3, 0.6), ErrorSchedule("inv_linear", 0.3), 200, 7)
    pipe = shadowing.two_sided_limit_shadow(cat, po, 0.05)
    direct = shadowing.shadow_linear(cat, po)
    far = [i for i in range(-200, 201) if abs(i) >= 50]
    gap = max(cat.distance(pipe.orbit_point(i), direct.orbit_point(i)) for i in far)
    worst = max(max(pipe.deviation(i), direct.deviation(i)) for i in far)
    out.append(Check("cat scheduled pipeline vs direct", gap < 0.05 and worst < 0.05 and pipe.kind == "two_sided_limit_shadowed",
                     f"orbit gap {gap:.3g}, deviations {worst:.3g} for |i| >= 50"))
    return out


def suite_lemma24(pairs: int = 20, seed: int = 24) -> list[Check]:
    """Splices of random pairs are two-sided limit shadowed."""
    cat, out = cat_map(), []
    rng = np.random.default_rng(seed)
    for k in range(pairs):
        y, x = torus_point(*rng.random(2)), torus_point(*rng.random(2))
        po = splice_orbits(cat, y, x, W=160)
        cert = shadowing.two_sided_limit_shadow(cat, po, 0.05)
        back = cat.distance(cert.orbit_point(-150), cat.apply(y, -150))
        fwd = cat.distance(cert.orbit_point(150), cat.apply(x, 150))
        ok = back <= 1e-6 and fwd <= 1e-6 and cert.kind == "two_sided_limit_shadowed"
        out.append(Check(f"pair {k}", ok, f"|n|=150 deviations {back:.2g} / {fwd:.2g}"))
    return out


def suite_corollary25(rectangles: int = 50, seed: int = 25) -> list[Check]:
    """Attracting sets: proper for the north-south map, absent for the cat map."""
    ns, cat = build_north_south(0.1), cat_map()
    att = analysis.find_attracting_set(ns, [(0.3, 0.7)])[0]
    rep = analysis.find_repelling_set(ns, [(0.8, 0.2)])[0]
    out = [
        Check("north-south attracting set", att.trapped and att.proper and np.allclose(att.cloud, [0.5]),
              f"cloud {att.cloud.tolist()}"),
        Check("north-south repelling set", rep.trapped and rep.proper and np.allclose(rep.cloud, [0.0]),
              f"cloud {rep.cloud.tolist()}"),
    ]
    rng = np.random.default_rng(seed)
    regions = []
    for _ in range(rectangles):
        x0, y0 = rng.random(2)
        wx, wy = rng.uniform(0.05, 0.9, 2)
        regions.append(((x0, (x0 + wx) % 1.0), (y0, (y0 + wy) % 1.0)))
    trapped = [r for r in analysis.find_attracting_set(cat, regions) if r.trapped]
    out.append(Check(f"cat map, {rectangles} rectangles", not trapped, f"{len(trapped)} trapped"))
    return out


def suite_theoremB() -> list[Check]:
    """The sink/source splice of the north-south map has no shadow."""
    ns = build_north_south(0.1)
    po = splice_orbits(ns, ns.sink, ns.source, W=50)
    cert = shadowing.certify_unshadowable(ns, po, 0.1, 50, 1e-4)
    ctrl = PseudoOrbit.from_points(ns, ns.orbit(0.25, -50, 50))
    ctrl_cert = shadowing.certify_unshadowable(ns, ctrl, 0.1, 50, 1e-4)
    return [
        Check("sink/source splice certified", cert.certified,
              f"{cert.n_candidates} candidates, certified eps {cert.certified_eps}"),
        Check("exact-orbit control not certified", not ctrl_cert.certified,
              f"survivor {ctrl_cert.survivor!r}"),
    ]


def suite_oracle(inputs: int = 10, seed: int = 3) -> list[Check]:
    """shadow_linear against the branch-and-bound minimax on windows +-8."""
    cat, out = cat_map(), []
    rng = np.random.default_rng(seed)
    for k in range(inputs):
        y, x = torus_point(*rng.random(2)), torus_point(*rng.random(2))
        po = splice_orbits(cat, y, x, W=8)
        cert = shadowing.shadow_linear(cat, po)
        ref = grid_minimax(cat, po, 8, grid_step=1e-3)
        gap = float(cert.deviations.max() - ref.value)
        out.append(Check(f"splice {k}", abs(gap) <= 5e-3, f"solver {cert.deviations.max():.6f} oracle {ref.value:.6f}"))
    return out


SUITES = {
    "lemma21": suite_lemma21,
    "lemma22": suite_lemma22,
    "lemma24": suite_lemma24,
    "corollary25": suite_corollary25,
    "theoremB": suite_theoremB,
    "oracle": suite_oracle,
}


def run_suite(name: str, stream=None) -> bool:
    import sys

    stream = stream or sys.stdout
    checks = SUITES[name]()
    width = max(len(c.name) for c in checks)
    for c in checks:
        stream.write(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}\n")
    n = sum(c.passed for c in checks)
    stream.write(f"{name}: {n}/{len(checks)} passed\n")
    return n == len(checks)
