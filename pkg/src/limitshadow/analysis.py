"""Structural constants and invariant sets of the concrete systems.

Expansivity and shadowing constants, specification spacing, intersections
of stable and unstable sets, periodic points with their indices, and
trapping regions for attracting / repelling sets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .errors import BadParameter, BoundTooLarge, NotMixing, SearchExhausted, ShadowError, UnsupportedSystem
from .systems import (
    HP_DPS,
    HyperbolicToralMap,
    NorthSouthCircleMap,
    Sft,
    SymbolicPoint,
    TorusPoint,
)

LATTICE_SEARCH = 10


@dataclass(frozen=True)
class NotExpansive:
    """Tagged verdict returned instead of an expansivity constant."""

    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class EmptyWitness:
    """Proof sketch that ``W^s(x) & W^u(y)`` is empty."""

    justification: str

    def __bool__(self) -> bool:
        return False


def expansivity_constant(system):
    """Separation constant ``c``: orbits staying ``c``-close for all time coincide."""
    if isinstance(system, Sft):
        # d < 1 at every shift pins every symbol; 1/2 is the largest value below 1
        return 0.5
    if isinstance(system, HyperbolicToralMap):
        return system.expansivity_margin
    if isinstance(system, NorthSouthCircleMap):
        return NotExpansive("no homeomorphism of the circle is expansive")
    raise UnsupportedSystem(f"no expansivity rule for {system!r}")


def shadowing_constant(system, eps: float) -> float:
    """A ``delta`` such that every ``delta``-pseudo-orbit is ``eps``-shadowed."""
    if eps <= 0:
        raise BadParameter("eps must be positive")
    if isinstance(system, Sft):
        # errors below 2^-r give a diagonal shadow within 2^-(r+1)
        r = max(1, math.ceil(-math.log2(min(eps, 1.0))))
        return 2.0**-r
    if isinstance(system, HyperbolicToralMap):
        gain = system.condition * (1.0 / (1.0 - system.rate_s) + 1.0 / (system.rate_u - 1.0))
        return min(eps / gain, 0.49)
    raise UnsupportedSystem(f"{system!r} has no shadowing constant")


def agreement_radius(delta: float) -> int:
    """Smallest ``R`` such that agreeing on ``|j| <= R`` forces SFT distance ``< delta``."""
    return max(0, math.floor(math.log2(1.0 / delta)))


def leaf_coordinate_bound(tmap: HyperbolicToralMap) -> float:
    """Bound on the leaf coordinates of the best lattice offset (any pair of points)."""
    b = np.hstack([tmap.unstable_basis, -tmap.stable_basis])
    return float(np.linalg.norm(np.linalg.inv(b), 2) * math.sqrt(tmap.n) / 2.0)


def specification_spacing(system, eps: float) -> int:
    """Gap ``L`` after which every ``L``-spaced specification is ``eps``-shadowed.

    For an SFT this is ``mixing_time + 2*ceil(log2(1/eps))``.  For a toral map
    (two-interval specifications) it is twice the number of steps needed to
    shrink the largest possible leaf coordinate below ``eps``.
    """
    if isinstance(system, Sft):
        if not 0 < eps < 1:
            raise BadParameter(f"eps = {eps} must lie in (0, 1)")
        if system.mixing_time is None:
            raise NotMixing("transition matrix is not primitive")
        return system.mixing_time + 2 * math.ceil(math.log2(1.0 / eps))
    if isinstance(system, HyperbolicToralMap):
        if eps <= 0:
            raise BadParameter("eps must be positive")
        rate = min(system.rate_u, 1.0 / system.rate_s)
        s = leaf_coordinate_bound(system)
        half = max(0, math.floor(math.log(s / eps) / math.log(rate)) + 1)
        return 2 * half
    raise UnsupportedSystem(f"{system!r} has no specification property")


# ---------------------------------------------------------------------------
# stable / unstable leaves


@dataclass
class LeafIntersection:
    """``z = through_u + U s = through_s + V t + m`` with lattice vector ``m``."""

    point: TorusPoint
    s: list
    t: list
    offset: tuple

    @property
    def leaf_size(self) -> float:
        return float(max(mpmath.norm(mpmath.matrix(self.s)), mpmath.norm(mpmath.matrix(self.t))))


def leaf_intersection(tmap: HyperbolicToralMap, through_u: TorusPoint, through_s: TorusPoint,
                      weight_u: float = 1.0, weight_s: float = 1.0, search: int = LATTICE_SEARCH):
    """Intersect the unstable leaf through ``through_u`` with the stable leaf through ``through_s``.

    Among lattice offsets with components bounded by ``search`` the one
    minimizing ``max(weight_u |s|, weight_s |t|)`` is chosen; the final solve
    runs at :data:`~limitshadow.systems.HP_DPS` digits.
    """
    n, ku = tmap.n, tmap.dim_u
    raw_f = through_s.coords - through_u.coords
    bf = np.hstack([tmap.unstable_basis, -tmap.stable_basis])
    binv = np.linalg.inv(bf)
    rng = np.arange(-search, search + 1)
    offsets = np.array(list(itertools.product(rng, repeat=n)), dtype=float)
    coef = (raw_f[None, :] + offsets) @ binv.T
    score = np.maximum(weight_u * np.linalg.norm(coef[:, :ku], axis=1), weight_s * np.linalg.norm(coef[:, ku:], axis=1))
    best = int(np.argmin(score))
    m = tuple(int(v) for v in offsets[best])
    stable, unstable = tmap.hp_bases
    with mpmath.workdps(HP_DPS):
        cols = [mpmath.matrix(c) for c in unstable] + [-mpmath.matrix(c) for c in stable]
        b = mpmath.matrix(n, n)
        for j, c in enumerate(cols):
            for i in range(n):
                b[i, j] = c[i]
        pu, ps = through_u.hp_coords(), through_s.hp_coords()
        rhs = mpmath.matrix([ps[i] - pu[i] + m[i] for i in range(n)])
        sol = mpmath.lu_solve(b, rhs)
        s = [sol[j] for j in range(ku)]
        t = [sol[j] for j in range(ku, n)]
        z = [pu[i] + sum(s[j] * unstable[j][i] for j in range(ku)) for i in range(n)]
    return LeafIntersection(TorusPoint.from_coords(z), s, t, m), float(score[best])


def stable_unstable_intersection(system, x, y, max_leaf: float | None = None):
    """A point ``z`` in ``W^s(x) & W^u(y)``, or an :class:`EmptyWitness`.

    ``z``'s forward orbit is asymptotic to ``x``'s and its backward orbit to
    ``y``'s.
    """
    if isinstance(system, HyperbolicToralMap):
        hit, size = leaf_intersection(system, y, x)
        if max_leaf is not None and size > max_leaf:
            raise SearchExhausted(
                f"best leaf coordinates {size:.3g} exceed {max_leaf} within |offset| <= {LATTICE_SEARCH}"
            )
        return hit.point
    if isinstance(system, Sft):
        m = system.mixing_time
        if m is None:
            raise NotMixing("splicing needs a mixing SFT")
        return splice_symbolic(system, y, 0, x, m)
    if isinstance(system, NorthSouthCircleMap):
        return _north_south_intersection(system, float(x), float(y))
    raise UnsupportedSystem(f"{system!r}")


def splice_symbolic(sft: Sft, left: SymbolicPoint, a: int, right: SymbolicPoint, b: int) -> SymbolicPoint:
    """Sequence equal to ``left`` on ``i <= a`` and ``right`` on ``i >= b``.

    The gap is filled with the least connecting path of ``b - a`` steps.
    """
    path = sft.connecting_path(left.symbol(a), right.symbol(b), b - a)
    if path is None:
        raise NotMixing(f"no path of length {b - a} from {left.symbol(a)} to {right.symbol(b)}")
    lp = left.materialize(min(left.lo, a), a)
    rp = right.materialize(b, max(right.hi, b))
    window = lp.segment(lp.lo, a) + path + rp.segment(b, rp.hi)
    return SymbolicPoint(lp.lo, window, lp.left, rp.right)


def _is_at(system, x, p):
    return system.distance(x, p) < 1e-12


def _north_south_intersection(ns: NorthSouthCircleMap, x: float, y: float):
    # every point other than the source is forward asymptotic to the sink, every
    # point other than the sink is backward asymptotic to the source
    x_src, y_sink = _is_at(ns, x, ns.source), _is_at(ns, y, ns.sink)
    if x_src and y_sink:
        return EmptyWitness("W^s(source) = {source} and W^u(sink) = {sink} are disjoint")
    if x_src:
        return ns.source
    if y_sink:
        return ns.sink
    for z in (y, x, 0.25):
        if not (_is_at(ns, z, ns.source) or _is_at(ns, z, ns.sink)):
            return z
    return 0.25


# ---------------------------------------------------------------------------
# attracting and repelling sets


@dataclass
class InvariantSetReport:
    """Outcome of testing one candidate trapping region."""

    region: tuple
    trapped: bool
    margin: float
    cloud: np.ndarray = field(default_factory=lambda: np.empty(0))
    proper: bool = False
    inverse: bool = False


def _circle_lift_inverse(ns, y):
    g = ns.step_inverse(np.asarray(y, dtype=float))
    return y + (np.mod(g - y + 0.5, 1.0) - 0.5)


def _circle_report(ns, region, resolution, max_iters, inverse):
    a, b = float(region[0]), float(region[1])
    length = (b - a) % 1.0 or 1.0
    lift = _circle_lift_inverse if inverse else (lambda m, v: m.lift_step(np.asarray(v, dtype=float)))
    fa, fb = float(lift(ns, a)), float(lift(ns, a + length))
    margin = min(fa - a, a + length - fb)
    trapped = bool(margin >= resolution) and length < 1.0
    if not trapped:
        return InvariantSetReport(tuple(region), False, margin, inverse=inverse)
    pts = a + np.arange(0.0, length + resolution / 2, resolution)
    pts = np.clip(pts, a, a + length)
    step = ns.step_inverse if inverse else ns.step
    pts = np.mod(pts, 1.0)
    for _ in range(max_iters):
        pts = step(pts)
    cloud = np.unique(np.mod(np.round(pts / resolution) * resolution, 1.0))
    return InvariantSetReport(tuple(region), True, margin, cloud, proper=True, inverse=inverse)


def _torus_report(tmap, region, resolution, max_iters, inverse):
    (x0, x1), (y0, y1) = region
    wx, wy = (x1 - x0) % 1.0, (y1 - y0) % 1.0
    k = max(2, int(math.ceil(max(wx, wy) / resolution)) + 1)
    s = np.linspace(0.0, 1.0, k)
    edges = np.concatenate([
        np.column_stack([x0 + s * wx, np.full(k, y0)]),
        np.column_stack([x0 + s * wx, np.full(k, y0 + wy)]),
        np.column_stack([np.full(k, x0), y0 + s * wy]),
        np.column_stack([np.full(k, x0 + wx), y0 + s * wy]),
    ])
    mat = tmap.inverse if inverse else tmap.matrix
    img = np.mod(edges @ mat.T.astype(float), 1.0)
    tx, ty = np.mod(img[:, 0] - x0, 1.0), np.mod(img[:, 1] - y0, 1.0)
    margin = float(min(tx.min(), wx - tx.max(), ty.min(), wy - ty.max()))
    trapped = margin >= resolution
    if not trapped:
        return InvariantSetReport(tuple(region), False, margin, inverse=inverse)
    gx, gy = np.meshgrid(x0 + s * wx, y0 + s * wy)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    for _ in range(max_iters):
        pts = np.mod(pts @ mat.T.astype(float), 1.0)
    cloud = np.unique(np.mod(np.round(pts / resolution) * resolution, 1.0), axis=0)
    return InvariantSetReport(tuple(region), True, margin, cloud, proper=True, inverse=inverse)


def find_attracting_set(system, candidate_regions, resolution: float = 1e-3, max_iters: int = 200,
                        inverse: bool = False) -> list:
    """Test each candidate region ``U`` for ``f(closure U) inside U`` and iterate the trapped ones.

    Regions are arcs ``(a, b)`` (counter-clockwise from ``a`` to ``b``) on the
    circle and rectangles ``((x0, x1), (y0, y1))`` on the 2-torus.  With
    ``inverse=True`` the inverse map is used, which finds repelling sets.
    """
    if resolution <= 0:
        raise BadParameter("resolution must be positive")
    if isinstance(system, NorthSouthCircleMap):
        return [_circle_report(system, r, resolution, max_iters, inverse) for r in candidate_regions]
    if isinstance(system, HyperbolicToralMap) and system.n == 2:
        return [_torus_report(system, r, resolution, max_iters, inverse) for r in candidate_regions]
    raise UnsupportedSystem(f"trapping regions are not defined for {system!r}")


def find_repelling_set(system, candidate_regions, resolution: float = 1e-3, max_iters: int = 200) -> list:
    return find_attracting_set(system, candidate_regions, resolution, max_iters, inverse=True)


# ---------------------------------------------------------------------------
# periodic points


@dataclass
class PeriodicPointRecord:
    point: object
    period: int
    index: int | None
    hyperbolic: bool
    rational: tuple | None = None  # toral: coordinates as Fractions

    def exact(self) -> list | None:
        """Coordinates as ``(numerator, denominator)`` pairs, if rational."""
        if self.rational is None:
            return None
        return [(f.numerator, f.denominator) for f in self.rational]


def _toral_periodic(tmap: HyperbolicToralMap, bound: int, budget: int):
    if tmap.n != 2:
        raise UnsupportedSystem("periodic point enumeration is implemented on T^2")
    work = 0
    found = {}
    for n in range(1, bound + 1):
        b = [list(r) for r in tmap.matrix_power(n)]
        b[0][0] -= 1
        b[1][1] -= 1
        det = b[0][0] * b[1][1] - b[0][1] * b[1][0]
        d = abs(det)
        work += d * d
        if work > budget:
            raise BoundTooLarge(f"enumeration for period {n} exceeds budget {budget}")
        # x = B^-1 m = adj(B) m / det; numerators mod |det|
        adj = np.array([[b[1][1], -b[0][1]], [-b[1][0], b[0][0]]], dtype=np.int64) * (1 if det > 0 else -1)
        m1, m2 = np.meshgrid(np.arange(d, dtype=np.int64), np.arange(d, dtype=np.int64))
        n1 = np.mod(adj[0, 0] * m1 + adj[0, 1] * m2, d).ravel()
        n2 = np.mod(adj[1, 0] * m1 + adj[1, 1] * m2, d).ravel()
        for a1, a2 in np.unique(np.column_stack([n1, n2]), axis=0):
            key = (Fraction(int(a1), d), Fraction(int(a2), d))
            if key not in found:
                found[key] = None
    records = []
    for key in sorted(found):
        den = math.lcm(key[0].denominator, key[1].denominator)
        nums = tuple(int(k * den) for k in key)
        period, cur = 1, tmap.apply_rational(nums, den, 1)
        while cur != nums:
            cur = tmap.apply_rational(cur, den, 1)
            period += 1
        records.append(PeriodicPointRecord(TorusPoint.from_rational(nums, den), period, tmap.dim_s, True, key))
    return sorted(records, key=lambda r: (r.period, r.rational))


def _primitive_length(word):
    n = len(word)
    return next(p for p in range(1, n + 1) if n % p == 0 and word[:p] * (n // p) == word)


def _sft_periodic(sft: Sft, bound: int, budget: int):
    records = []
    for n in range(1, bound + 1):
        words = [(s,) for s in range(sft.alphabet_size)]
        for _ in range(n - 1):
            words = [w + (v,) for w in words for v in sft.successors[w[-1]]]
            if len(words) > budget:
                raise BoundTooLarge(f"more than {budget} words of length {n}")
        for w in words:
            if sft.allowed(w[-1], w[0]) and _primitive_length(w) == n:
                records.append(PeriodicPointRecord(SymbolicPoint.periodic(w), n, None, True))
    return records


def periodic_points(system, period_bound: int, budget: int = 10**7) -> list:
    """All periodic points of period at most ``period_bound`` with their indices.

    Toral points are found exactly as rationals; SFT points are the cyclically
    admissible words (index recorded as ``None``, not applicable); the
    north-south map has only its source (index 0) and sink (index 1).
    """
    if period_bound < 1:
        raise BadParameter("period_bound must be >= 1")
    if isinstance(system, HyperbolicToralMap):
        return _toral_periodic(system, period_bound, budget)
    if isinstance(system, Sft):
        return _sft_periodic(system, period_bound, budget)
    if isinstance(system, NorthSouthCircleMap):
        return [
            PeriodicPointRecord(system.source, 1, 0, True, (Fraction(0),)),
            PeriodicPointRecord(system.sink, 1, 1, True, (Fraction(1, 2),)),
        ]
    raise UnsupportedSystem(f"{system!r}")


@dataclass
class HeteroclinicRelation:
    related: bool
    forward_witness: object   # in W^s(p) & W^u(q)
    backward_witness: object  # in W^s(q) & W^u(p)
    index_p: int | None
    index_q: int | None

    @property
    def same_index(self) -> bool:
        return self.index_p == self.index_q


def heteroclinic_relate(system, p: PeriodicPointRecord, q: PeriodicPointRecord) -> HeteroclinicRelation:
    """Whether the stable and unstable sets of ``p`` and ``q`` meet in both orders."""
    fwd = stable_unstable_intersection(system, p.point, q.point)
    bwd = stable_unstable_intersection(system, q.point, p.point)
    related = not isinstance(fwd, EmptyWitness) and not isinstance(bwd, EmptyWitness)
    rel = HeteroclinicRelation(related, fwd, bwd, p.index, q.index)
    if related and not rel.same_index:
        raise ShadowError(f"related periodic points with indices {p.index} != {q.index}")
    return rel
