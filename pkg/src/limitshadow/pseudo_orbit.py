"""Pseudo-orbits: finite windows with deterministic tails.

A :class:`PseudoOrbit` stores the points ``x_i`` for ``|i| <= W`` and a
descriptor for each tail.  Tails are either an exact orbit continuing the
window edge (:class:`ExactOrbit`) or a continuation of the randomized
generator (:class:`Scheduled`), so ``x_i`` is available for every integer
``i`` and the same arguments always reproduce the same points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParameter, BadWindow, Inconclusive

SCHEDULE_KINDS = (
    "constant",
    "inv_linear",
    "inv_square",
    "inv_linear_forward",
    "inv_linear_backward",
    "inv_square_forward",
    "inv_square_backward",
)


@dataclass(frozen=True)
class ErrorSchedule:
    """Bound on the one-step error ``d(f(x_i), x_{i+1})`` as a function of ``i``.

    ``inv_linear`` is ``C/(1+|i|)`` and ``inv_square`` is ``C/(1+i^2)``.  The
    ``_forward`` variants only decay for ``i -> +inf`` (they equal ``C`` for
    ``i <= 0``), the ``_backward`` ones only for ``i -> -inf``.  The amplitude
    is not restricted: values above the diameter just mean "anything goes".
    """

    kind: str = "constant"
    amplitude: float = 0.0

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise BadParameter(f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if not self.amplitude >= 0:
            raise BadParameter("schedule amplitude must be nonnegative")

    @classmethod
    def parse(cls, text: str) -> "ErrorSchedule":
        """``"inv_linear:0.3"`` -> ``ErrorSchedule("inv_linear", 0.3)``."""
        kind, _, amp = text.partition(":")
        return cls(kind.strip(), float(amp) if amp else 0.0)

    def __str__(self) -> str:
        return f"{self.kind}:{self.amplitude!r}"

    def _effective(self, i: int) -> int:
        if self.kind.endswith("_forward"):
            return max(0, i)
        if self.kind.endswith("_backward"):
            return max(0, -i)
        return abs(i)

    def __call__(self, i: int) -> float:
        c = self.amplitude
        if self.kind == "constant" or c == 0.0:
            return c
        k = self._effective(int(i))
        if self.kind.startswith("inv_linear"):
            return c / (1.0 + k)
        return c / (1.0 + float(k) * k)

    def decays(self, side: int) -> bool:
        """Whether the schedule tends to 0 as ``i -> side * inf``."""
        if self.amplitude == 0.0:
            return True
        if self.kind == "constant":
            return False
        if self.kind.endswith("_forward"):
            return side > 0
        if self.kind.endswith("_backward"):
            return side < 0
        return True

    def sup_beyond(self, i: int, side: int) -> float:
        """``sup`` of the schedule over indices strictly beyond ``i`` on ``side``."""
        return self(i + side)


@dataclass(frozen=True)
class ExactOrbit:
    """Tail continuing the window edge by exact iteration of the map."""

    kind = "exact"

    def describe(self) -> dict:
        return {"kind": "exact"}


@dataclass(frozen=True)
class Scheduled:
    """Tail continuing the randomized generator with ``schedule`` and ``rng_seed``."""

    schedule: ErrorSchedule
    rng_seed: int
    kind = "scheduled"

    def describe(self) -> dict:
        return {"kind": "scheduled", "schedule": str(self.schedule), "rng_seed": self.rng_seed}


def tail_from_description(d: dict):
    if d["kind"] == "exact":
        return ExactOrbit()
    if d["kind"] == "scheduled":
        return Scheduled(ErrorSchedule.parse(d["schedule"]), int(d["rng_seed"]))
    raise BadParameter(f"unknown tail kind {d['kind']!r}")


def _step_rng(seed: int, i: int) -> np.random.Generator:
    # one independent stream per error index, so any index is reproducible alone
    return np.random.default_rng([int(seed), 0 if i >= 0 else 1, abs(int(i))])


def _scheduled_forward(system, x, i, tail: Scheduled, radius=None):
    """``x_{i+1}`` from ``x_i`` with error budget ``schedule(i)``."""
    r = tail.schedule(i) if radius is None else radius
    return system.perturb(system.step(x), r, _step_rng(tail.rng_seed, i), +1)


def _scheduled_backward(system, x, i, tail: Scheduled, radius=None):
    """``x_{i-1}`` from ``x_i`` with error budget ``schedule(i-1)``."""
    r = tail.schedule(i - 1) if radius is None else radius
    return system.step_inverse(system.perturb(x, r, _step_rng(tail.rng_seed, i - 1), -1))


class PseudoOrbit:
    """Sequence ``(x_i)`` over all integers, stored as a window ``|i| <= W`` plus tails.

    Points outside the window are produced on demand and memoized; the
    memo never changes the values, so instances behave as immutable.
    """

    def __init__(self, system, window, left_tail, right_tail):
        window = list(window)
        if len(window) % 2 != 1 or len(window) < 3:
            raise BadWindow("window must hold 2W+1 points with W >= 1")
        self.system = system
        self.W = len(window) // 2
        self.left_tail = left_tail
        self.right_tail = right_tail
        self._pts = {i - self.W: p for i, p in enumerate(window)}
        self._lo = -self.W
        self._hi = self.W

    def __repr__(self) -> str:
        return (
            f"PseudoOrbit({self.system!r}, W={self.W}, left={self.left_tail.describe()}, "
            f"right={self.right_tail.describe()})"
        )

    @classmethod
    def from_points(cls, system, points) -> "PseudoOrbit":
        """Window ``points[0] = x_{-W}, ...`` with exact-orbit tails on both sides."""
        return cls(system, points, ExactOrbit(), ExactOrbit())

    def _extend_right(self, i):
        while self._hi < i:
            x = self._pts[self._hi]
            if isinstance(self.right_tail, ExactOrbit):
                nxt = self.system.step(x)
            else:
                nxt = _scheduled_forward(self.system, x, self._hi, self.right_tail)
            self._hi += 1
            self._pts[self._hi] = nxt

    def _extend_left(self, i):
        while self._lo > i:
            x = self._pts[self._lo]
            if isinstance(self.left_tail, ExactOrbit):
                prv = self.system.step_inverse(x)
            else:
                prv = _scheduled_backward(self.system, x, self._lo, self.left_tail)
            self._lo -= 1
            self._pts[self._lo] = prv

    def point(self, i: int):
        i = int(i)
        if i > self._hi:
            self._extend_right(i)
        elif i < self._lo:
            self._extend_left(i)
        return self._pts[i]

    __getitem__ = point

    def points(self, lo: int, hi: int) -> list:
        self.point(lo)
        self.point(hi)
        return [self._pts[i] for i in range(lo, hi + 1)]

    @property
    def window(self) -> list:
        return self.points(-self.W, self.W)

    def error(self, i: int) -> float:
        """``e_i = d(f(x_i), x_{i+1})``."""
        return self.system.distance(self.system.step(self.point(i)), self.point(i + 1))

    def tail(self, side: int):
        return self.right_tail if side > 0 else self.left_tail

    def tail_decays(self, side: int) -> bool:
        """Decay of the errors on ``side``, read off the tail descriptor."""
        t = self.tail(side)
        return isinstance(t, ExactOrbit) or t.schedule.decays(side)

    def forward_part(self) -> "PseudoOrbit":
        """Same points for ``i >= 0``; the exact backward orbit of ``x_0`` for ``i < 0``."""
        back = self.system.orbit(self.point(0), -self.W, 0)
        po = PseudoOrbit(self.system, back + self.points(1, self.W), ExactOrbit(), self.right_tail)
        for i in range(self.W + 1, self._hi + 1):
            po._pts[i] = self._pts[i]
        po._hi = max(po._hi, self._hi)
        return po

    def backward_part(self) -> "PseudoOrbit":
        """Same points for ``i <= 0``; the exact forward orbit of ``x_0`` for ``i > 0``."""
        fwd = self.system.orbit(self.point(0), 0, self.W)
        po = PseudoOrbit(self.system, self.points(-self.W, -1) + fwd, self.left_tail, ExactOrbit())
        for i in range(self._lo, -self.W):
            po._pts[i] = self._pts[i]
        po._lo = min(po._lo, self._lo)
        return po


def splice_orbits(system, y, x, W: int = 32) -> PseudoOrbit:
    """Past orbit of ``y`` glued to the future orbit of ``x``.

    ``x_n = f^n(y)`` for ``n <= 0`` and ``x_n = f^n(x)`` for ``n > 0``; the
    only jump is ``e_0 = d(f(y), f(x))``.
    """
    if W < 1:
        raise BadWindow(f"W = {W} < 1")
    past = system.orbit(y, -W, 0)
    future = system.orbit(x, 1, W)
    return PseudoOrbit.from_points(system, past + future)


def replace_points(po: PseudoOrbit, replacements: dict) -> PseudoOrbit:
    """Copy of ``po`` with window points ``x_i`` replaced by ``replacements[i]``.

    Tails keep their descriptors, so they continue from the (possibly new)
    window edges.
    """
    pts = po.window
    for i, p in replacements.items():
        if abs(i) > po.W:
            raise BadWindow(f"index {i} outside the window |i| <= {po.W}")
        pts[i + po.W] = p
    return PseudoOrbit(po.system, pts, po.left_tail, po.right_tail)


def generate_pseudo_orbit(system, seed_point, schedule: ErrorSchedule, W: int, rng_seed: int, kicks=None):
    """Randomized pseudo-orbit through ``seed_point`` obeying ``schedule``.

    ``x_0 = seed_point``; ``x_{i+1}`` is ``f(x_i)`` displaced by at most
    ``schedule(i)``, and backward points are built through the inverse map.
    ``kicks`` optionally maps window indices ``i`` to an exact error radius
    overriding the schedule there (the displacement direction stays random).
    """
    if W < 1:
        raise BadWindow(f"W = {W} < 1")
    tail = Scheduled(schedule, int(rng_seed))
    kicks = dict(kicks or {})
    fwd = [seed_point]
    for i in range(W):
        r = kicks.get(i)
        if r is None:
            fwd.append(_scheduled_forward(system, fwd[-1], i, tail))
        else:
            fwd.append(system.perturb(system.step(fwd[-1]), r, _step_rng(rng_seed, i), +1, exact=True))
    back = [seed_point]
    for i in range(0, -W, -1):
        r = kicks.get(i - 1)
        if r is None:
            back.append(_scheduled_backward(system, back[-1], i, tail))
        else:
            back.append(system.step_inverse(system.perturb(back[-1], r, _step_rng(rng_seed, i - 1), -1, exact=True)))
    return PseudoOrbit(system, back[:0:-1] + fwd, tail, tail)


def error_sequence(system, po: PseudoOrbit, lo: int, hi: int) -> np.ndarray:
    """``e_i = d(f(x_i), x_{i+1})`` for ``lo <= i <= hi``."""
    if lo > hi:
        raise BadParameter("lo must not exceed hi")
    pts = po.points(lo, hi + 1)
    return np.array([system.distance(system.step(pts[k]), pts[k + 1]) for k in range(hi - lo + 1)])


@dataclass
class Classification:
    """Which pseudo-orbit notions a sequence provably belongs to.

    ``delta_sup`` is the supremum of the errors; the sequence is a
    delta-pseudo-orbit for every ``delta > delta_sup``.  Side verdicts are
    ``"decays"`` (certain: exact tail or vanishing schedule) or ``"persists"``
    (sampled errors stay above the fit tolerance out to the probe depth).
    """

    delta_sup: float
    forward: str
    backward: str
    evidence: dict = field(default_factory=dict)

    @property
    def labels(self) -> frozenset:
        out = {"delta_po"}
        if self.forward == "decays":
            out.add("limit")
        if self.backward == "decays":
            out.add("negative_limit")
        if self.forward == self.backward == "decays":
            out.add("two_sided_limit")
        return frozenset(out)

    def is_delta_po(self, delta: float) -> bool:
        return delta > self.delta_sup


def classify(system, po: PseudoOrbit, probe_depth: int, tolerance_fit: float = 1e-3) -> Classification:
    if probe_depth < po.W:
        raise BadWindow(f"probe_depth {probe_depth} < W {po.W}")
    errs = error_sequence(system, po, -probe_depth, probe_depth)
    sup = float(errs.max())
    verdicts, evidence = {}, {}
    for side, name in ((1, "forward"), (-1, "backward")):
        tail = po.tail(side)
        if isinstance(tail, ExactOrbit):
            verdicts[name], evidence[name] = "decays", "exact tail"
            continue
        edge = probe_depth if side > 0 else -probe_depth - 1
        sup = max(sup, tail.schedule.sup_beyond(edge, side))
        if tail.schedule.decays(side):
            verdicts[name], evidence[name] = "decays", f"schedule {tail.schedule}"
            continue
        far = errs[probe_depth + probe_depth // 2 :] if side > 0 else errs[: probe_depth - probe_depth // 2 + 1]
        if far.max() > tolerance_fit:
            verdicts[name], evidence[name] = "persists", f"sampled max {far.max():.3g} beyond |i|={probe_depth // 2}"
        else:
            raise Inconclusive(
                f"{name} tail scheduled with non-vanishing {tail.schedule}, "
                f"sampled errors below {tolerance_fit} cannot certify decay"
            )
    return Classification(sup, verdicts["forward"], verdicts["backward"], evidence)
