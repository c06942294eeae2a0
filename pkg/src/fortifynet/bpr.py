"""BPR volume-delay function and its piecewise-linear (lambda / y) encoding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BprParams:
    alpha: float = 0.15
    beta: float = 4.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.beta > 1:
            raise ValueError("beta must exceed 1")


def bpr_time(t0: float, params: BprParams, flow: float, capacity: float) -> float:
    if not capacity > 0:
        raise ValueError(f"capacity must be positive, got {capacity}")
    return t0 * (1.0 + params.alpha * (flow / capacity) ** params.beta)


@dataclass(frozen=True)
class PlaGrid:
    lower: float
    upper: float
    segments: int
    breakpoints: tuple[float, ...]
    values: tuple[float, ...]
    beta: float

    def value(self, x):
        """Interpolated value at ``x`` (scalar or array); this is what the encoding represents."""
        return np.interp(x, self.breakpoints, self.values)


def build_grid(lower: float, upper: float, segments: int, beta: float) -> PlaGrid:
    if segments < 1:
        raise ValueError("segments must be at least 1")
    if lower < 0:
        raise ValueError("lower must be nonnegative")
    if not upper > lower:
        raise ValueError(f"upper ({upper}) must exceed lower ({lower})")
    width = upper - lower
    a = tuple(lower + (i / segments) * width for i in range(segments + 1))
    # Exact endpoint even when (i/N)*width rounds.
    a = a[:-1] + (float(upper),)
    b = tuple(x**beta for x in a)
    return PlaGrid(float(lower), float(upper), segments, a, b, beta)


def pla_value(grid: PlaGrid, x: float) -> float:
    if x < grid.lower - 1e-12 or x > grid.upper + 1e-12:
        raise ValueError(f"{x} outside [{grid.lower}, {grid.upper}]")
    return float(grid.value(x))


def _segment_gap(a: float, b: float, beta: float) -> float:
    fa, fb = a**beta, b**beta
    slope = (fb - fa) / (b - a)
    # Where f'(x) equals the secant slope; the secant-minus-f gap peaks there.
    x = (slope / beta) ** (1.0 / (beta - 1.0))
    x = min(max(x, a), b)
    return fa + slope * (x - a) - x**beta


def pla_error_bound(grid: PlaGrid) -> float:
    """Largest overestimate of the interpolant over the grid."""
    if not grid.beta > 1:
        raise ValueError("error bound needs beta > 1")
    a = grid.breakpoints
    return max(_segment_gap(a[i], a[i + 1], grid.beta) for i in range(grid.segments))


@dataclass
class PlaFragment:
    """Variables and rows of one encoding, ready to be merged into a model.

    Rows are ``(name, {var: coef}, sense, rhs)`` with sense in ``<=, >=, =``.
    """

    lam: list[str]
    y: list[str]
    rows: list[tuple[str, dict[str, float], str, float]]


def pla_names(prefix: str, segments: int) -> tuple[list[str], list[str]]:
    lam = [f"lam({prefix}.{i})" for i in range(segments + 1)]
    y = [f"y({prefix}.{i})" for i in range(1, segments + 1)]
    return lam, y


def pla_point(grid: PlaGrid, x: float) -> tuple[int, dict[int, float], float]:
    """Encoding of ``x``: (segment k in 1..N, {breakpoint index: lambda}, interpolated value)."""
    if x < grid.lower - 1e-12 or x > grid.upper + 1e-9 * max(1.0, grid.upper):
        raise ValueError(f"{x} outside [{grid.lower}, {grid.upper}]")
    a = grid.breakpoints
    x = min(max(x, grid.lower), grid.upper)
    k = int(np.searchsorted(a, x, side="left"))
    k = min(max(k, 1), grid.segments)
    theta = (x - a[k - 1]) / (a[k] - a[k - 1])
    lam = {k - 1: 1.0 - theta, k: theta}
    return k, lam, (1.0 - theta) * grid.values[k - 1] + theta * grid.values[k]


def pla_fragment(grid: PlaGrid, prefix: str, x_var: str, w_var: str, x_scale: float = 1.0) -> PlaFragment:
    """Convex-combination encoding of ``w ~ f(x / x_scale)``.

    Breakpoints live on the scaled axis, so ``x = x_scale * sum(lam_i a_i)``.
    Binaries are ``y_1..y_N``, one per segment.
    """
    n = grid.segments
    lam, y = pla_names(prefix, n)
    rows = []
    rows.append((f"lamsum({prefix})", {v: 1.0 for v in lam}, "=", 1.0))
    rows.append((f"ysum({prefix})", {v: 1.0 for v in y}, "=", 1.0))
    for i in range(n + 1):
        terms = {lam[i]: 1.0}
        if i >= 1:
            terms[y[i - 1]] = -1.0
        if i <= n - 1:
            terms[y[i]] = -1.0
        rows.append((f"adj({prefix}.{i})", terms, "<=", 0.0))
    xlink = {x_var: 1.0}
    for v, a in zip(lam, grid.breakpoints):
        if a != 0:
            xlink[v] = -x_scale * a
    rows.append((f"xlink({prefix})", xlink, "=", 0.0))
    wlink = {w_var: 1.0}
    for v, b in zip(lam, grid.values):
        if b != 0:
            wlink[v] = -b
    rows.append((f"wlink({prefix})", wlink, "=", 0.0))
    return PlaFragment(lam, y, rows)
