"""Invertible dynamical systems on compact metric spaces.

Three concrete families are provided:

* :class:`HyperbolicToralMap` -- a unimodular integer matrix acting on the
  n-torus, with its stable/unstable splitting precomputed.
* :class:`Sft` -- a two-sided subshift of finite type under the left shift,
  whose points are :class:`SymbolicPoint` sequences with periodic tails.
* :class:`NorthSouthCircleMap` -- ``x -> x + a sin(2 pi x)`` on the circle,
  a Morse-Smale diffeomorphism with one source and one sink.

Torus points are stored as exact dyadic fixed-point numbers with
:data:`BITS` fractional bits, so forward and backward iteration are exact
group operations; floats are only produced on request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import mpmath
import numpy as np

from .errors import (
    BadParameter,
    DeadSymbol,
    DimensionMismatch,
    NotHyperbolic,
    NotUnimodular,
    UnsupportedSystem,
)

BITS = 320
SCALE = 1 << BITS
HALF = SCALE >> 1
HYPERBOLICITY_TOL = 1e-9
# mpmath working precision for leaf computations; comfortably above BITS
HP_DPS = 120
# guard bits of the fixed-point splitting used by the series solver
FIXED_BITS = BITS + 64


class System:
    """Common surface of every system: ``step``, ``step_inverse``, ``distance``."""

    kind = "abstract"

    def step(self, p):
        raise NotImplementedError

    def step_inverse(self, p):
        raise NotImplementedError

    def distance(self, p, q) -> float:
        raise NotImplementedError

    def apply(self, p, k: int):
        """Return ``f^k(p)``; negative ``k`` iterates the inverse."""
        k = int(k)
        f = self.step if k >= 0 else self.step_inverse
        for _ in range(abs(k)):
            p = f(p)
        return p

    def orbit(self, p, lo: int, hi: int) -> list:
        """Points ``f^i(p)`` for ``lo <= i <= hi`` (``lo <= 0 <= hi`` not required)."""
        start = self.apply(p, lo)
        out = [start]
        for _ in range(hi - lo):
            out.append(self.step(out[-1]))
        return out

    @property
    def lipschitz(self) -> tuple[float, float]:
        """Lipschitz constants of ``(f, f^-1)`` for the metric in use."""
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError


def apply(system: System, p, k: int):
    return system.apply(p, k)


def distance(system: System, p, q) -> float:
    return system.distance(p, q)


# ---------------------------------------------------------------------------
# Torus


def _to_fixed(x) -> int:
    """Nearest multiple of ``2**-BITS`` to a real number, as an integer numerator."""
    if isinstance(x, (int, np.integer)):
        return int(x) * SCALE
    if isinstance(x, Fraction):
        return round(x * SCALE)
    if isinstance(x, mpmath.mpf):
        with mpmath.workdps(HP_DPS):
            return int(mpmath.nint(x * SCALE))
    p, q = float(x).as_integer_ratio()
    return (p * SCALE + q // 2) // q


def _centered(n: int) -> int:
    n %= SCALE
    return n - SCALE if n >= HALF else n


@dataclass(frozen=True)
class TorusPoint:
    """A point of ``[0,1)^n``; coordinate ``k`` equals ``num[k] / 2**BITS``."""

    num: tuple

    @classmethod
    def from_coords(cls, coords) -> "TorusPoint":
        return cls(tuple(_to_fixed(c) % SCALE for c in coords))

    @classmethod
    def from_rational(cls, numerators: Sequence[int], denominator: int) -> "TorusPoint":
        return cls.from_coords([Fraction(int(a), int(denominator)) for a in numerators])

    @property
    def n(self) -> int:
        return len(self.num)

    @property
    def coords(self) -> np.ndarray:
        return np.array([c / SCALE for c in self.num])

    def lift(self) -> np.ndarray:
        """Representative in Euclidean space (the fundamental-domain one)."""
        return self.coords

    def hp_coords(self) -> list:
        with mpmath.workdps(HP_DPS):
            return [mpmath.mpf(c) / SCALE for c in self.num]

    def displaced(self, delta) -> "TorusPoint":
        """Translate by a real vector (floats, Fractions or mpf)."""
        if len(delta) != self.n:
            raise DimensionMismatch(f"displacement of length {len(delta)} on T^{self.n}")
        return TorusPoint(tuple((a + _to_fixed(d)) % SCALE for a, d in zip(self.num, delta)))

    def __repr__(self) -> str:
        body = ", ".join(f"{c:.17g}" for c in self.coords)
        return f"TorusPoint({body})"


def torus_point(*coords) -> TorusPoint:
    if len(coords) == 1 and np.ndim(coords[0]) == 1:
        coords = tuple(coords[0])
    return TorusPoint.from_coords(coords)


def _int_matmul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
        for i in range(len(a))
    )


def _int_det(rows) -> int:
    """Fraction-free (Bareiss) determinant."""
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _int_inverse_unimodular(m, det):
    """Exact inverse of an integer matrix with determinant +-1 (Gauss-Jordan on Fractions)."""
    n = len(m)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                fac = aug[r][col]
                aug[r] = [x - fac * y for x, y in zip(aug[r], aug[col])]
    inv = tuple(tuple(int(x) for x in row[n:]) for row in aug)
    assert all(x.denominator == 1 for row in aug for x in row[n:])
    return inv


def _orient(v: np.ndarray) -> np.ndarray:
    """Unit vector with its first significant component positive."""
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-12))
    return -v if v[k] < 0 else v


@dataclass(frozen=True)
class FixedSplitting:
    """Splitting coordinates of a toral map, exact to ``2**-FIXED_BITS``.

    ``p`` has the stable then the unstable basis vectors as columns; the
    integer tuples are entries times ``2**FIXED_BITS``, the ``_f`` arrays
    the same matrices in floating point.
    """

    dim_s: int
    p: tuple
    pinv: tuple
    block_s: tuple
    block_u_inv: tuple
    p_f: np.ndarray
    pinv_f: np.ndarray
    block_s_f: np.ndarray
    block_u_inv_f: np.ndarray


class HyperbolicToralMap(System):
    """Linear automorphism ``x -> A x mod Z^n`` given by an integer matrix.

    Attributes
    ----------
    matrix, inverse : integer ndarrays with ``matrix @ inverse == I`` exactly
    stable_basis, unstable_basis : (n, k) arrays of unit column vectors
    rate_s, rate_u : contraction / expansion factors of the splitting
    expansivity_margin : separation below which two orbits must coincide
    """

    kind = "toral"

    def __init__(self, matrix):
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise BadParameter("matrix must be square")
        if not np.all(np.equal(np.mod(a, 1), 0)):
            raise BadParameter("matrix must have integer entries")
        rows = tuple(tuple(int(x) for x in r) for r in a.tolist())
        det = _int_det(rows)
        if abs(det) != 1:
            raise NotUnimodular(f"|det| = {abs(det)} != 1")
        self.n = len(rows)
        self.rows = rows
        self.det = det
        self.inv_rows = _int_inverse_unimodular(rows, det)
        self.matrix = np.array(rows, dtype=np.int64)
        self.inverse = np.array(self.inv_rows, dtype=np.int64)

        w, vecs = np.linalg.eig(self.matrix.astype(float))
        mod = np.abs(w)
        if np.any(np.abs(mod - 1.0) < HYPERBOLICITY_TOL):
            raise NotHyperbolic(f"eigenvalue moduli {sorted(mod)} touch the unit circle")
        self.eigenvalues = w
        self.stable_basis = self._real_basis(w, vecs, mod < 1)
        self.unstable_basis = self._real_basis(w, vecs, mod > 1)
        self.rate_s = float(mod[mod < 1].max())
        self.rate_u = float(mod[mod > 1].min())
        self.basis = np.hstack([self.stable_basis, self.unstable_basis])
        self.basis_inv = np.linalg.inv(self.basis)
        self.dim_s = self.stable_basis.shape[1]
        self.dim_u = self.unstable_basis.shape[1]
        # splitting coordinates: c = basis_inv @ v, A acts block-diagonally
        blocks = self.basis_inv @ self.matrix @ self.basis
        self.block_s = blocks[: self.dim_s, : self.dim_s]
        self.block_u = blocks[self.dim_s :, self.dim_s :]
        self.block_u_inv = np.linalg.inv(self.block_u)
        self.condition = float(np.linalg.norm(self.basis, 2) * np.linalg.norm(self.basis_inv, 2))
        norm_f = float(np.linalg.norm(self.matrix, 2))
        norm_b = float(np.linalg.norm(self.inverse, 2))
        self._lip = (norm_f, norm_b)
        self.expansivity_margin = min(
            0.25,
            (self.rate_u - 1.0) / (4.0 * self.condition),
            0.99 / (1.0 + max(norm_f, norm_b)),
        )

    @staticmethod
    def _real_basis(w, vecs, mask):
        cols, seen = [], set()
        for k in np.flatnonzero(mask):
            if abs(w[k].imag) < 1e-12:
                cols.append(_orient(vecs[:, k].real))
            elif k not in seen:
                j = int(np.argmin(np.abs(w - w[k].conj())))
                seen.update((k, j))
                cols.append(_orient(vecs[:, k].real))
                cols.append(_orient(vecs[:, k].imag))
        return np.column_stack(cols)

    @property
    def contraction_witness(self) -> int:
        """Smallest N with ``rate_s**N < 1/2``."""
        return math.ceil(math.log(0.5) / math.log(self.rate_s))

    @property
    def has_real_spectrum(self) -> bool:
        return bool(np.all(np.abs(self.eigenvalues.imag) < 1e-12))

    @property
    def lipschitz(self):
        return self._lip

    def descriptor(self) -> dict:
        return {"kind": "toral", "matrix": [list(r) for r in self.rows]}

    def __repr__(self) -> str:
        return f"HyperbolicToralMap({[list(r) for r in self.rows]})"

    # -- dynamics --------------------------------------------------------
    def _check(self, p):
        if not isinstance(p, TorusPoint):
            p = TorusPoint.from_coords(p)
        if p.n != self.n:
            raise DimensionMismatch(f"point on T^{p.n}, map on T^{self.n}")
        return p

    @staticmethod
    def _mul(rows, num):
        return tuple(sum(a * x for a, x in zip(row, num)) % SCALE for row in rows)

    def step(self, p):
        p = self._check(p)
        return TorusPoint(self._mul(self.rows, p.num))

    def step_inverse(self, p):
        p = self._check(p)
        return TorusPoint(self._mul(self.inv_rows, p.num))

    def matrix_power(self, k: int, modulus: int | None = None):
        """``A^k`` as nested integer tuples, optionally reduced mod ``modulus``."""
        base = self.rows if k >= 0 else self.inv_rows
        k = abs(k)
        result = tuple(tuple(int(i == j) for j in range(self.n)) for i in range(self.n))
        red = (lambda m: tuple(tuple(x % modulus for x in r) for r in m)) if modulus else (lambda m: m)
        while k:
            if k & 1:
                result = red(_int_matmul(result, base))
            base = red(_int_matmul(base, base))
            k >>= 1
        return result

    def apply(self, p, k: int):
        p = self._check(p)
        k = int(k)
        if abs(k) <= 4:
            return super().apply(p, k)
        return TorusPoint(self._mul(self.matrix_power(k, SCALE), p.num))

    def apply_rational(self, numerators: Sequence[int], denominator: int, k: int = 1):
        """Iterate a rational point ``numerators / denominator`` exactly; returns numerators."""
        m = self.matrix_power(k, denominator)
        return tuple(sum(a * x for a, x in zip(row, numerators)) % denominator for row in m)

    # -- metric ----------------------------------------------------------
    def displacement(self, p, q) -> np.ndarray:
        """Minimal-norm representative of ``p - q`` (componentwise centred)."""
        p, q = self._check(p), self._check(q)
        return np.array([_centered(a - b) / SCALE for a, b in zip(p.num, q.num)])

    def distance(self, p, q) -> float:
        return float(np.linalg.norm(self.displacement(p, q)))

    def perturb(self, p, radius: float, rng: np.random.Generator, direction: int = 1, exact: bool = False):
        """Move ``p`` by a random vector of length at most ``radius`` (exactly ``radius`` if ``exact``)."""
        if radius <= 0:
            return p
        # keep rounding of the fixed-point conversion from overshooting the bound
        r = radius if exact else radius * rng.random() * (1.0 - 1e-9)
        if self.n == 2:
            theta = 2.0 * math.pi * rng.random()
            d = (r * math.cos(theta), r * math.sin(theta))
        else:
            g = rng.standard_normal(self.n)
            d = tuple(r * g / np.linalg.norm(g))
        return p.displaced(d)

    # -- high precision splitting -------------------------------------------
    @cached_property
    def hp_bases(self):
        """Stable and unstable bases at :data:`HP_DPS` digits (real spectrum only)."""
        if not self.has_real_spectrum:
            raise UnsupportedSystem("leaf computations need a real spectrum")
        with mpmath.workdps(HP_DPS):
            ev, er = mpmath.eig(mpmath.matrix([list(r) for r in self.rows]))
            stable, unstable = [], []
            for k, lam in enumerate(ev):
                col = [mpmath.re(er[i, k]) for i in range(self.n)]
                nrm = mpmath.sqrt(sum(c * c for c in col))
                col = [c / nrm for c in col]
                lead = next(c for c in col if abs(c) > mpmath.mpf("1e-30"))
                if lead < 0:
                    col = [-c for c in col]
                (stable if abs(lam) < 1 else unstable).append((abs(mpmath.re(lam)), col))
            stable.sort(key=lambda t: -t[0])
            unstable.sort(key=lambda t: t[0])
        return [c for _, c in stable], [c for _, c in unstable]

    @cached_property
    def fixed_splitting(self) -> "FixedSplitting":
        """Invariant splitting as integers scaled by ``2**FIXED_BITS`` (complex pairs allowed)."""
        with mpmath.workdps(HP_DPS):
            a = mpmath.matrix([list(r) for r in self.rows])
            ev, er = mpmath.eig(a)
            cols = {True: [], False: []}
            used = set()
            for k in sorted(range(self.n), key=lambda j: float(abs(ev[j]))):
                if k in used:
                    continue
                vec = [er[i, k] for i in range(self.n)]
                contracting = bool(abs(ev[k]) < 1)
                if abs(mpmath.im(ev[k])) < mpmath.mpf("1e-40"):
                    parts = [[mpmath.re(c) for c in vec]]
                else:
                    j = min((j for j in range(self.n) if j != k and j not in used),
                            key=lambda j: abs(ev[j] - mpmath.conj(ev[k])))
                    used.add(j)
                    parts = [[mpmath.re(c) for c in vec], [mpmath.im(c) for c in vec]]
                used.add(k)
                for col in parts:
                    nrm = mpmath.sqrt(sum(c * c for c in col))
                    cols[contracting].append([c / nrm for c in col])
            basis = cols[True] + cols[False]
            p = mpmath.matrix(self.n, self.n)
            for j, col in enumerate(basis):
                for i in range(self.n):
                    p[i, j] = col[i]
            pinv = mpmath.inverse(p)
            ainv = mpmath.matrix([list(r) for r in self.inv_rows])
            bf, bb = pinv * a * p, pinv * ainv * p
            g = mpmath.mpf(2) ** FIXED_BITS

            def ints(m, rows, cols_):
                return tuple(tuple(int(mpmath.nint(m[i, j] * g)) for j in cols_) for i in rows)

            def floats(m, rows, cols_):
                return np.array([[float(m[i, j]) for j in cols_] for i in rows])

            ds = len(cols[True])
            s, u, full = range(ds), range(ds, self.n), range(self.n)
            return FixedSplitting(
                dim_s=ds,
                p=ints(p, full, full), pinv=ints(pinv, full, full),
                block_s=ints(bf, s, s), block_u_inv=ints(bb, u, u),
                p_f=floats(p, full, full), pinv_f=floats(pinv, full, full),
                block_s_f=floats(bf, s, s), block_u_inv_f=floats(bb, u, u),
            )


def build_toral_system(matrix) -> HyperbolicToralMap:
    return HyperbolicToralMap(matrix)


def cat_map() -> HyperbolicToralMap:
    return HyperbolicToralMap([[2, 1], [1, 1]])


# ---------------------------------------------------------------------------
# Symbolic dynamics


def _rotate(word: tuple, k: int) -> tuple:
    k %= len(word)
    return word[k:] + word[:k]


def _primitive(word: tuple) -> tuple:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and word[:p] * (n // p) == word:
            return word[:p]
    return word


@dataclass(frozen=True, eq=False)
class SymbolicPoint:
    """Bi-infinite symbol sequence with a finite window and periodic tails.

    ``window[k]`` sits at index ``lo + k``.  For ``i > hi`` the symbol is
    ``right[(i - hi - 1) % len(right)]``; for ``i < lo`` it is
    ``left[(i - lo) % len(left)]`` (so ``left[-1]`` sits at ``lo - 1``).
    """

    lo: int
    window: tuple
    left: tuple
    right: tuple

    def __post_init__(self):
        if not self.left or not self.right:
            raise BadParameter("tails must be nonempty periodic words")

    @classmethod
    def periodic(cls, word, phase: int = 0) -> "SymbolicPoint":
        """The periodic sequence with ``x_i = word[(i + phase) % len(word)]``."""
        w = _rotate(tuple(int(s) for s in word), phase)
        return cls(0, (), w, w)

    @classmethod
    def from_word(cls, lo: int, window, left, right) -> "SymbolicPoint":
        return cls(int(lo), tuple(int(s) for s in window), tuple(int(s) for s in left), tuple(int(s) for s in right))

    @property
    def hi(self) -> int:
        return self.lo + len(self.window) - 1

    def symbol(self, i: int) -> int:
        if i < self.lo:
            return self.left[(i - self.lo) % len(self.left)]
        if i > self.hi:
            return self.right[(i - self.hi - 1) % len(self.right)]
        return self.window[i - self.lo]

    def __getitem__(self, i: int) -> int:
        return self.symbol(i)

    def segment(self, a: int, b: int) -> tuple:
        return tuple(self.symbol(i) for i in range(a, b + 1))

    def shift(self, k: int = 1) -> "SymbolicPoint":
        """``sigma^k``: the result has ``y_i = x_{i+k}``."""
        return SymbolicPoint(self.lo - k, self.window, self.left, self.right)

    def materialize(self, a: int, b: int) -> "SymbolicPoint":
        """Same sequence with the window widened to cover ``[a, b]``."""
        lo, hi = min(self.lo, a), max(self.hi, b)
        window = self.segment(lo, hi)
        left = _rotate(self.left, lo - self.lo)
        right = _rotate(self.right, hi - self.hi)
        return SymbolicPoint(lo, window, left, right)

    def with_segment(self, a: int, symbols) -> "SymbolicPoint":
        """Replace the symbols at ``a, a+1, ...`` by ``symbols``."""
        symbols = tuple(symbols)
        if not symbols:
            return self
        m = self.materialize(a, a + len(symbols) - 1)
        w = list(m.window)
        w[a - m.lo : a - m.lo + len(symbols)] = symbols
        return SymbolicPoint(m.lo, tuple(w), m.left, m.right)

    def canonical(self) -> tuple:
        """Representation-independent key: equal sequences give equal keys."""
        left, right = _primitive(self.left), _primitive(self.right)
        lo, w = self.lo, list(self.window)
        while w and w[-1] == right[-1]:
            right = (w.pop(),) + right[:-1]
        while w and w[0] == left[0]:
            w.pop(0)
            left = _rotate(left, 1)
            lo += 1
        if not w:
            # slide the seam right as long as the left tail still matches
            while left != right and left[0] == right[0]:
                left, right, lo = _rotate(left, 1), _rotate(right, 1), lo + 1
            if left == right:
                return ("periodic", _rotate(right, -lo))
        return ("eventual", lo, tuple(w), left, right)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicPoint):
            return NotImplemented
        return self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def encode(self) -> str:
        """Compact text form ``lo|window|left|right`` (symbols as digits or dot-joined)."""
        def j(w):
            return "".join(map(str, w)) if all(s < 10 for s in w) else ".".join(map(str, w))

        return f"{self.lo}|{j(self.window)}|{j(self.left)}|{j(self.right)}"

    @classmethod
    def decode(cls, text: str) -> "SymbolicPoint":
        lo, *words = text.strip().split("|")

        def s(w):
            if not w:
                return ()
            return tuple(int(x) for x in (w.split(".") if "." in w else w))

        return cls(int(lo), s(words[0]), s(words[1]), s(words[2]))

    def __repr__(self) -> str:
        return f"SymbolicPoint({self.encode()})"


class Sft(System):
    """Two-sided vertex shift defined by a 0/1 transition matrix, under the left shift.

    The metric is ``d(x, y) = 2**-min{|i| : x_i != y_i}``.
    """

    kind = "sft"
    metric_base = 2

    def __init__(self, transitions):
        t = np.asarray(transitions)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise BadParameter("transition matrix must be square")
        if not np.all((t == 0) | (t == 1)):
            raise BadParameter("transition matrix must be 0/1")
        t = t.astype(np.int64)
        dead_rows = np.flatnonzero(t.sum(axis=1) == 0)
        dead_cols = np.flatnonzero(t.sum(axis=0) == 0)
        if dead_rows.size or dead_cols.size:
            raise DeadSymbol(
                f"symbols without successor {dead_rows.tolist()} / predecessor {dead_cols.tolist()}"
            )
        self.transitions = t
        self.alphabet_size = t.shape[0]
        self.successors = tuple(tuple(int(j) for j in np.flatnonzero(t[i])) for i in range(self.alphabet_size))
        self._allowed = {(i, j) for i in range(self.alphabet_size) for j in self.successors[i]}
        self.mixing_time = self._mixing_time()
        self.predecessors = tuple(
            tuple(int(i) for i in np.flatnonzero(t[:, j])) for j in range(self.alphabet_size)
        )
        self._reach = {}

    def _mixing_time(self):
        b = self.transitions.astype(bool)
        p = b.copy()
        for m in range(1, 4 * self.alphabet_size**2 + 1):
            if p.all():
                return m
            p = (p.astype(np.int64) @ b.astype(np.int64)) > 0
        return None

    @property
    def is_mixing(self) -> bool:
        return self.mixing_time is not None

    def descriptor(self) -> dict:
        return {"kind": "sft", "transitions": self.transitions.tolist()}

    def __repr__(self) -> str:
        return f"Sft({self.transitions.tolist()})"

    @property
    def lipschitz(self):
        return (2.0, 2.0)

    def allowed(self, a: int, b: int) -> bool:
        return (a, b) in self._allowed

    def forbidden_transitions(self, p: SymbolicPoint) -> list[int]:
        """Indices ``i`` of the window region where ``p_i -> p_{i+1}`` is not allowed."""
        seq = p.segment(p.lo - 1, p.hi + 1)
        bad = [p.lo - 1 + k for k in range(len(seq) - 1) if not self.allowed(seq[k], seq[k + 1])]
        return bad

    def is_admissible(self, p: SymbolicPoint) -> bool:
        if any(s < 0 or s >= self.alphabet_size for s in p.window + p.left + p.right):
            return False
        for w in (p.left, p.right):
            if any(not self.allowed(w[k], w[(k + 1) % len(w)]) for k in range(len(w))):
                return False
        return not self.forbidden_transitions(p)

    # -- dynamics --------------------------------------------------------
    def step(self, p: SymbolicPoint) -> SymbolicPoint:
        return p.shift(1)

    def step_inverse(self, p: SymbolicPoint) -> SymbolicPoint:
        return p.shift(-1)

    def apply(self, p, k: int):
        return p.shift(int(k))

    def first_difference(self, p: SymbolicPoint, q: SymbolicPoint):
        """Smallest ``|i|`` with ``p_i != q_i``, or ``None`` if the sequences agree."""
        extent = max(abs(p.lo), abs(p.hi), abs(q.lo), abs(q.hi))
        bound = extent + math.lcm(len(p.left), len(q.left)) + math.lcm(len(p.right), len(q.right)) + 2
        for r in range(bound + 1):
            if p.symbol(r) != q.symbol(r) or p.symbol(-r) != q.symbol(-r):
                return r
        return None

    def distance(self, p, q) -> float:
        if not isinstance(p, SymbolicPoint) or not isinstance(q, SymbolicPoint):
            raise DimensionMismatch("SFT distance needs two SymbolicPoints")
        r = self.first_difference(p, q)
        return 0.0 if r is None else 2.0**-r

    # -- paths in the transition graph -----------------------------------
    def _reachable(self, length: int) -> np.ndarray:
        """Boolean matrix of pairs joined by a path with exactly ``length`` steps."""
        if length not in self._reach:
            b = self.transitions
            m = np.eye(self.alphabet_size, dtype=np.int64)
            for _ in range(length):
                m = np.minimum(m @ b, 1)
            self._reach[length] = m.astype(bool)
        return self._reach[length]

    def connecting_path(self, a: int, b: int, length: int):
        """Lexicographically least path ``a -> v_1 -> ... -> b`` with ``length`` steps.

        Returns the ``length - 1`` intermediate symbols, or ``None`` if none exists.
        """
        if length < 1 or not self._reachable(length)[a, b]:
            return None
        path, cur = [], a
        for rem in range(length - 1, 0, -1):
            reach = self._reachable(rem)
            cur = next(v for v in self.successors[cur] if reach[v, b])
            path.append(cur)
        return tuple(path)

    def shortest_cycle(self, s: int) -> tuple:
        """Word ``(c_1, ..., c_k)`` with ``s -> c_1 -> ... -> c_k = s``."""
        prev = {v: None for v in self.successors[s]}
        frontier = list(self.successors[s])
        while s not in prev:
            nxt = []
            for u in frontier:
                for v in self.successors[u]:
                    if v not in prev:
                        prev[v] = u
                        nxt.append(v)
            if not nxt:
                raise BadParameter(f"symbol {s} lies on no cycle")
            frontier = nxt
        word, v = [s], s
        while prev[v] is not None:
            v = prev[v]
            word.append(v)
        # word is s <- ... <- c_1 reversed; a 1-cycle has prev[s] None
        return tuple(reversed(word))

    def tails_for(self, first: int, last: int) -> tuple[tuple, tuple]:
        """Admissible periodic (left, right) tails around a window ``first ... last``."""
        c = self.shortest_cycle(first)
        left = (first,) + c[:-1]
        right = self.shortest_cycle(last)
        return left, right

    def random_point(self, rng: np.random.Generator, lo: int = 0, length: int = 8) -> SymbolicPoint:
        """Random admissible point: a random walk window with cycle tails."""
        s = int(rng.integers(self.alphabet_size))
        word = [s]
        for _ in range(length - 1):
            succ = self.successors[word[-1]]
            word.append(int(succ[rng.integers(len(succ))]))
        left, right = self.tails_for(word[0], word[-1])
        return SymbolicPoint(lo, tuple(word), left, right)

    def perturb(self, p: SymbolicPoint, radius: float, rng: np.random.Generator, direction: int = 1, exact: bool = False):
        """Rewrite the sequence beyond distance ``radius`` from index 0.

        ``direction=+1`` rewrites the suffix ``i >= r``, ``-1`` the prefix
        ``i <= -r``, where ``2**-r <= radius``.  The result stays admissible.
        """
        if radius <= 0:
            return p
        r = 0 if radius >= 1 else math.ceil(-math.log2(radius))
        length = 6
        if direction >= 0:
            prev = p.symbol(r - 1)
            word = []
            for _ in range(length):
                succ = self.successors[prev if not word else word[-1]]
                word.append(int(succ[rng.integers(len(succ))]))
            m = p.materialize(min(p.lo, r), r - 1)
            keep = m.segment(m.lo, r - 1)
            return SymbolicPoint(m.lo, keep + tuple(word), m.left, self.shortest_cycle(word[-1]))
        nxt = p.symbol(1 - r)
        word = []
        for _ in range(length):
            pr = self.predecessors[nxt if not word else word[-1]]
            word.append(int(pr[rng.integers(len(pr))]))
        word.reverse()
        m = p.materialize(1 - r, max(p.hi, 1 - r))
        keep = m.segment(1 - r, m.hi)
        left, _ = self.tails_for(word[0], word[0])
        return SymbolicPoint(1 - r - length, tuple(word) + keep, left, m.right)


def build_sft(transitions) -> Sft:
    return Sft(transitions)


def load_sft(path) -> Sft:
    """Read ``alphabet_size`` then that many rows of space-separated 0/1 entries."""
    with open(path) as fh:
        lines = [ln.split("#", 1)[0].strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    n = int(lines[0])
    rows = [[int(x) for x in ln.split()] for ln in lines[1 : n + 1]]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise BadParameter(f"expected {n} rows of {n} entries in {path}")
    return Sft(rows)


def full_shift(k: int = 2) -> Sft:
    return Sft(np.ones((k, k), dtype=int))


def golden_mean_shift() -> Sft:
    return Sft([[1, 1], [1, 0]])


# ---------------------------------------------------------------------------
# Circle


def _mod1(x):
    r = np.mod(x, 1.0)
    if np.ndim(r) == 0:
        return 0.0 if r >= 1.0 else float(r)
    r[r >= 1.0] = 0.0
    return r


class NorthSouthCircleMap(System):
    """``f(x) = x + a sin(2 pi x) mod 1`` with source 0 and sink 1/2."""

    kind = "northsouth"
    source = 0.0
    sink = 0.5

    def __init__(self, a: float):
        a = float(a)
        if not 0.0 < a < 1.0 / (2.0 * math.pi):
            raise BadParameter(f"a = {a} outside (0, 1/(2 pi))")
        self.a = a

    def descriptor(self) -> dict:
        return {"kind": "northsouth", "a": self.a}

    def __repr__(self) -> str:
        return f"NorthSouthCircleMap(a={self.a})"

    @property
    def dimension(self) -> int:
        return 1

    def derivative(self, x):
        return 1.0 + 2.0 * math.pi * self.a * np.cos(2.0 * math.pi * np.asarray(x, dtype=float))

    @property
    def lipschitz(self):
        c = 2.0 * math.pi * self.a
        return (1.0 + c, 1.0 / (1.0 - c))

    def lift_step(self, x):
        return x + self.a * np.sin(2.0 * math.pi * x)

    def step(self, x):
        return _mod1(self.lift_step(np.asarray(x, dtype=float)) if np.ndim(x) else self.lift_step(float(x)))

    def step_inverse(self, y):
        """Invert the (increasing) lift by safeguarded Newton iteration."""
        if np.ndim(y) == 0:
            return self._inverse_scalar(float(y))
        y = np.asarray(y, dtype=float)
        lo, hi = y - self.a, y + self.a
        x = y.copy()
        for _ in range(60):
            g = self.lift_step(x) - y
            lo = np.where(g < 0, x, lo)
            hi = np.where(g > 0, x, hi)
            xn = x - g / self.derivative(x)
            xn = np.where((xn <= lo) | (xn >= hi), 0.5 * (lo + hi), xn)
            done = np.all(np.abs(xn - x) <= 4e-16)
            x = xn
            if done:
                break
        return _mod1(x)

    def _inverse_scalar(self, y: float) -> float:
        c = 2.0 * math.pi
        lo, hi, x = y - self.a, y + self.a, y
        for _ in range(60):
            g = x + self.a * math.sin(c * x) - y
            if g == 0:
                break
            if g < 0:
                lo = x
            else:
                hi = x
            xn = x - g / (1.0 + c * self.a * math.cos(c * x))
            if not lo < xn < hi:
                xn = 0.5 * (lo + hi)
            if abs(xn - x) <= 4e-17:
                x = xn
                break
            x = xn
        return _mod1(x)

    def distance(self, p, q) -> float:
        d = abs(float(p) - float(q)) % 1.0
        return min(d, 1.0 - d)

    def distance_array(self, p, q):
        d = np.abs(np.asarray(p, dtype=float) - q) % 1.0
        return np.minimum(d, 1.0 - d)

    def perturb(self, p, radius: float, rng: np.random.Generator, direction: int = 1, exact: bool = False):
        if radius <= 0:
            return p
        r = radius if exact else radius * rng.random() * (1.0 - 1e-9)
        return _mod1(p + (r if rng.random() < 0.5 else -r))


def build_north_south(a: float) -> NorthSouthCircleMap:
    return NorthSouthCircleMap(a)
