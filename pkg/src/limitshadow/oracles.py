"""Brute-force reference computations used to cross-check the solvers.

Nothing here uses the shadowing recurrences: the minimizer below only
iterates the map and measures distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SearchExhausted
from .shadowing import _dist_rows, _float_point, _grid, float_dynamics
from .systems import HyperbolicToralMap


def max_deviation(system, pts: np.ndarray, refs: dict, window: int) -> np.ndarray:
    """``max_{|n| <= window} d(f^n(p), x_n)`` for each row ``p`` of ``pts``."""
    fwd, bwd = float_dynamics(system)
    worst = _dist_rows(system, pts, refs[0])
    f, b = pts.copy(), pts.copy()
    for n in range(1, window + 1):
        f, b = fwd(f), bwd(b)
        worst = np.maximum(worst, _dist_rows(system, f, refs[n]))
        worst = np.maximum(worst, _dist_rows(system, b, refs[-n]))
    return worst


def _step_lipschitz(system, window: int) -> dict:
    """``L_n`` with ``d(f^n p, f^n q) <= L_n d(p, q)`` for ``|n| <= window``."""
    if isinstance(system, HyperbolicToralMap):
        a, ai = system.matrix.astype(float), system.inverse.astype(float)
        out = {0: 1.0}
        for n in range(1, window + 1):
            out[n] = float(np.linalg.norm(np.linalg.matrix_power(a, n), 2))
            out[-n] = float(np.linalg.norm(np.linalg.matrix_power(ai, n), 2))
        return out
    lf, lb = system.lipschitz
    return {n: (lf if n >= 0 else lb) ** abs(n) for n in range(-window, window + 1)}


def _bounds(system, pts, refs, window, lips, radius):
    """Objective at ``pts`` and a lower bound over the balls of ``radius`` around them."""
    fwd, bwd = float_dynamics(system)
    d = _dist_rows(system, pts, refs[0])
    value, lower = d.copy(), d - radius
    f, b = pts.copy(), pts.copy()
    for n in range(1, window + 1):
        f, b = fwd(f), bwd(b)
        for m, q in ((n, f), (-n, b)):
            d = _dist_rows(system, q, refs[m])
            np.maximum(value, d, out=value)
            np.maximum(lower, d - lips[m] * radius, out=lower)
    return value, lower


@dataclass
class MinimaxResult:
    point: np.ndarray
    value: float        # max deviation at ``point`` (an upper bound on the minimum)
    lower_bound: float  # no point of the space does better than this
    cells: int          # cells evaluated


def grid_minimax(system, po, window: int, grid_step: float = 1e-3, tol: float = 1e-6,
                 min_half: float = 1e-11, max_cells: int = 3_000_000) -> MinimaxResult:
    """Global minimum of ``F(p) = max_{|n| <= window} d(f^n(p), x_n)`` by branch and bound.

    The space is covered by square cells of side ``grid_step``.  On a cell of
    half-diagonal ``r`` around ``c``, ``F >= max_n (d(f^n c, x_n) - L_n r)``
    with ``L_n`` the Lipschitz constant of ``f^n``; cells whose bound exceeds
    the best value found so far are discarded and the rest split 3x3.
    """
    refs = {n: _float_point(system, po.point(n)) for n in range(-window, window + 1)}
    lips = _step_lipschitz(system, window)
    centers, mesh, _ = _grid(system, grid_step)
    dim = centers.shape[1]
    centers = np.mod(centers + mesh / 2, 1.0)
    half = mesh / 2
    kids = np.stack(np.meshgrid(*[np.array([-1.0, 0.0, 1.0])] * dim, indexing="ij"), -1).reshape(-1, dim)
    best_v, best_p, evaluated = np.inf, None, 0
    while True:
        value, lb = _bounds(system, centers, refs, window, lips, half * np.sqrt(dim))
        evaluated += len(centers)
        k = int(np.argmin(value))
        if value[k] < best_v:
            best_v, best_p = float(value[k]), centers[k].copy()
        keep = lb <= best_v
        lower = float(lb[keep].min()) if keep.any() else best_v
        if best_v - lower <= tol or half < min_half:
            return MinimaxResult(best_p, best_v, min(lower, best_v), evaluated)
        survivors = centers[keep]
        if len(survivors) * len(kids) > max_cells:
            raise SearchExhausted(f"{len(survivors)} cells survive at half-width {half:.3g}")
        half /= 3.0
        centers = np.mod((survivors[:, None, :] + kids[None, :, :] * 2 * half).reshape(-1, dim), 1.0)
