"""Adaptive integration and supremum estimation on subintervals of (0, inf).

Integrals are computed in the variable s = log t with a globally adaptive
Gauss-Kronrod (7, 15) rule.  Improper ends (t -> 0 or t -> inf) are covered
by eight dyadic blocks beyond the main region; the contribution outside the
truncation window is extrapolated geometrically from the last block ratios,
which is exact for power-law tails.  Blocks that do not decay are reported
as divergence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

INF = math.inf
LN2 = math.log(2.0)
N_BLOCKS = 8
DIVERGENCE_RATIO = 1.0 - 1e-6
OVERFLOW = 1e300

# Gauss-Kronrod 15-point nodes (nonnegative half) and weights; the 7-point
# Gauss rule uses the odd-indexed Kronrod nodes.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 nodes ascending
K_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(15)
# Gauss nodes are +-XGK[1], +-XGK[3], +-XGK[5] and 0; -XGK[k] sits at position k
for _k, _w in zip((1, 3, 5), _WG[:3]):
    G_WEIGHTS[_k] = _w
    G_WEIGHTS[14 - _k] = _w
G_WEIGHTS[7] = _WG[3]

_EPMACH = np.finfo(float).eps
_UFLOW = np.finfo(float).tiny


class QuadNaNError(ValueError):
    """Raised when the integrand returns NaN at a quadrature node."""


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_depth: int = 40
    trunc_lo: float = 1e-9
    trunc_hi: float = 1e9
    sup_grid: int = 2048
    max_intervals: int = 4000

    def __post_init__(self):
        if not (0 < self.trunc_lo < self.trunc_hi):
            raise ValueError("need 0 < trunc_lo < trunc_hi")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.sup_grid < 3:
            raise ValueError("sup_grid must be >= 3")

    def tightened(self, factor: float = 0.1) -> "QuadConfig":
        """Config for nested inner computations."""
        return replace(self, rel_tol=self.rel_tol * factor, abs_tol=self.abs_tol * factor)

    @classmethod
    def from_dict(cls, d: dict | None) -> "QuadConfig":
        if not d:
            return cls()
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown quad option(s): {sorted(unknown)}")
        return cls(**known)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    converged: bool
    divergence_reason: Optional[str] = None
    location: Optional[float] = None

    def __post_init__(self):
        self.value = float(self.value)
        self.err_estimate = float(self.err_estimate)
        self.converged = bool(self.converged)
        if self.location is not None:
            self.location = float(self.location)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def scaled(self, factor: float) -> "QuadResult":
        if self.value == INF:
            return replace(self)
        return replace(self, value=self.value * factor, err_estimate=self.err_estimate * abs(factor))

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "err": self.err_estimate,
            "finite": self.finite,
            "converged": self.converged,
            "divergence_reason": self.divergence_reason,
        }


def divergent(reason: str, location: float | None = None) -> QuadResult:
    return QuadResult(INF, 0.0, True, reason, location)


def combine(results: Sequence[QuadResult]) -> QuadResult:
    """Sum of independent integrals."""
    for r in results:
        if r.value == INF:
            return replace(r)
    return QuadResult(
        float(sum(r.value for r in results)),
        float(sum(r.err_estimate for r in results)),
        all(r.converged for r in results),
    )


# ---------------------------------------------------------------------------
# Gauss-Kronrod kernel
# ---------------------------------------------------------------------------


class _Divergence(Exception):
    def __init__(self, reason, location=None):
        super().__init__(reason)
        self.reason = reason
        self.location = location


def _gk_batch(f, ua: np.ndarray, ub: np.ndarray):
    """K15 value and error on each [ua, ub] for the integrand f(t) * t in s = log t."""
    half = 0.5 * (ub - ua)
    mid = 0.5 * (ub + ua)
    s = mid[:, None] + half[:, None] * NODES[None, :]
    t = np.exp(s)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        fv = np.asarray(f(t.reshape(-1)), dtype=float).reshape(t.shape)
    if np.any(np.isnan(fv)):
        i, j = np.argwhere(np.isnan(fv))[0]
        raise QuadNaNError(f"integrand returned NaN at t={t[i, j]:.6g}")
    if np.any(np.isinf(fv)):
        i, j = np.argwhere(np.isinf(fv))[0]
        raise _Divergence(f"integrand is infinite at t={t[i, j]:.6g}", float(t[i, j]))
    g = fv * t
    with np.errstate(over="ignore", invalid="ignore"):
        resk = (g * K_WEIGHTS).sum(axis=1)
        resg = (g * G_WEIGHTS).sum(axis=1)
        resabs = (np.abs(g) * K_WEIGHTS).sum(axis=1)
        reskh = 0.5 * resk
        resasc = (np.abs(g - reskh[:, None]) * K_WEIGHTS).sum(axis=1)
    val = resk * half
    resabs = resabs * np.abs(half)
    resasc = resasc * np.abs(half)
    err = np.abs((resk - resg) * half)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / np.where(resasc > 0, resasc, 1.0)) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    floor = 50.0 * _EPMACH * resabs
    err = np.where(resabs > _UFLOW / (50.0 * _EPMACH), np.maximum(floor, err), err)
    if np.any(~np.isfinite(val)) or np.any(np.abs(val) > OVERFLOW):
        raise _Divergence("partial sums exceed the overflow sentinel")
    return val, err


def _tail_extrapolation(blocks: np.ndarray):
    """Geometric extrapolation beyond the outermost block.

    ``blocks`` are ordered outward.  Returns (tail, tail_err, divergent).
    """
    b6, b7, b8 = blocks[-3], blocks[-2], blocks[-1]
    if b8 == 0.0:
        return 0.0, 0.0, False
    if b7 <= 0.0 or b6 <= 0.0:
        return INF, 0.0, True
    r7 = b8 / b7
    r6 = b7 / b6
    if r7 >= DIVERGENCE_RATIO and r6 >= DIVERGENCE_RATIO:
        return INF, 0.0, True
    if r7 >= DIVERGENCE_RATIO or r6 >= DIVERGENCE_RATIO:
        rho = min(r6, r7)
        tail = b8 * rho / (1.0 - rho)
        return tail, max(tail, b8), False
    tail = b8 * r7 / (1.0 - r7)
    alt = b8 * r6 / (1.0 - r6)
    return tail, abs(tail - alt), False


def _initial_intervals(a: float, b: float, cfg: QuadConfig, points: Iterable[float]):
    lo_tail = a == 0.0
    hi_tail = b == INF
    if lo_tail:
        u_lo = math.log(cfg.trunc_lo) + N_BLOCKS * LN2
        if not hi_tail:
            u_lo = min(u_lo, math.log(b))
    else:
        u_lo = math.log(a)
    if hi_tail:
        u_hi = max(math.log(cfg.trunc_hi) - N_BLOCKS * LN2, u_lo)
    else:
        u_hi = math.log(b)
    cuts = [u_lo]
    inner = sorted({math.log(p) for p in points if p is not None and p > 0 and math.isfinite(p)})
    cuts += [u for u in inner if u_lo < u < u_hi]
    cuts.append(u_hi)
    ua, ub, tag = [], [], []
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        if x1 <= x0:
            continue
        n = max(1, int(math.ceil((x1 - x0) / 2.0)))
        e = np.linspace(x0, x1, n + 1)
        ua.extend(e[:-1])
        ub.extend(e[1:])
        tag.extend([0] * n)
    if lo_tail:
        for j in range(1, N_BLOCKS + 1):
            ua.append(u_lo - j * LN2)
            ub.append(u_lo - (j - 1) * LN2)
            tag.append(-j)
    if hi_tail:
        for j in range(1, N_BLOCKS + 1):
            ua.append(u_hi + (j - 1) * LN2)
            ub.append(u_hi + j * LN2)
            tag.append(j)
    return np.array(ua), np.array(ub), np.array(tag, dtype=int), lo_tail, hi_tail


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadConfig | None = None,
    points: Iterable[float] = (),
) -> QuadResult:
    """Integral of a vectorized nonnegative f over (a, b), 0 <= a < b <= inf."""
    cfg = cfg or QuadConfig()
    a = float(a)
    b = float(b)
    if a < 0:
        raise ValueError("integration domain must lie in [0, inf]")
    if b <= a:
        return QuadResult(0.0, 0.0, True)
    ua, ub, tag, lo_tail, hi_tail = _initial_intervals(a, b, cfg, points)
    depth = np.zeros(len(ua), dtype=int)
    try:
        val, err = _gk_batch(f, ua, ub)
        while True:
            total, tail_err, div, reason = _assemble(val, tag, lo_tail, hi_tail)
            if div:
                blk = tag != 0
                if np.all(err[blk] <= 1e-3 * np.abs(val[blk]) + cfg.abs_tol):
                    return divergent(reason)
            interval_err = float(err.sum())
            target = max(cfg.rel_tol * abs(total), cfg.abs_tol) if not div else 0.0
            if not div and interval_err + tail_err <= target:
                return QuadResult(total, interval_err + tail_err, True)
            if not div and interval_err <= 0.5 * target:
                # remaining error sits in the tail extrapolation
                return QuadResult(total, interval_err + tail_err, False)
            refinable = depth < cfg.max_depth
            if not np.any(refinable) or len(ua) >= cfg.max_intervals:
                if div:
                    return divergent(reason)
                return QuadResult(total, interval_err + tail_err, False)
            emax = float(np.max(err[refinable]))
            if emax <= 0.0:
                if div:
                    return divergent(reason)
                return QuadResult(total, interval_err + tail_err, interval_err + tail_err <= target)
            sel = refinable & (err >= 0.25 * emax)
            mids = 0.5 * (ua[sel] + ub[sel])
            new_a = np.concatenate([ua[sel], mids])
            new_b = np.concatenate([mids, ub[sel]])
            new_tag = np.concatenate([tag[sel], tag[sel]])
            new_depth = np.concatenate([depth[sel], depth[sel]]) + 1
            nv, ne = _gk_batch(f, new_a, new_b)
            keep = ~sel
            ua = np.concatenate([ua[keep], new_a])
            ub = np.concatenate([ub[keep], new_b])
            tag = np.concatenate([tag[keep], new_tag])
            depth = np.concatenate([depth[keep], new_depth])
            val = np.concatenate([val[keep], nv])
            err = np.concatenate([err[keep], ne])
    except _Divergence as exc:
        return divergent(exc.reason, exc.location)


def _assemble(val, tag, lo_tail, hi_tail):
    """Total value with tail extrapolation; returns (total, tail_err, divergent, reason)."""
    total = float(val[tag == 0].sum())
    tail_err = 0.0
    for side, sign in (("0", -1), ("inf", 1)):
        if (sign < 0 and not lo_tail) or (sign > 0 and not hi_tail):
            continue
        blocks = np.array([val[tag == sign * j].sum() for j in range(1, N_BLOCKS + 1)])
        total += float(blocks.sum())
        tail, terr, div = _tail_extrapolation(blocks)
        if div:
            return INF, 0.0, True, f"dyadic blocks toward {side} do not decay"
        total += tail
        tail_err += terr
    return total, tail_err, False, None


def integrate_near(
    f: Callable[[np.ndarray], np.ndarray],
    t: float,
    other: float,
    cfg: QuadConfig | None = None,
    points: Iterable[float] = (),
) -> QuadResult:
    """Integral of f between t > 0 and ``other`` when f has power behaviour at t.

    The part within a factor 2 of t is integrated in the relative distance
    y = |z - t| / t, whose logarithm resolves algebraic endpoint behaviour.
    """
    cfg = cfg or QuadConfig()
    points = [p for p in points if p is not None]
    if other > t:
        m = min(2.0 * t, other)
        g = lambda y: t * f(t * (1.0 + y))
        pts_near = [(p - t) / t for p in points if t < p < m]
        near = integrate(g, 0.0, (m - t) / t, cfg, pts_near)
        if near.value == INF or m >= other:
            return near
        far = integrate(f, m, other, cfg, [p for p in points if m < p < other])
        return combine([near, far])
    if other < t:
        m = max(0.5 * t, other)
        g = lambda y: t * f(t * (1.0 - y))
        pts_near = [(t - p) / t for p in points if m < p < t]
        near = integrate(g, 0.0, (t - m) / t, cfg, pts_near)
        if near.value == INF or m <= other:
            return near
        far = integrate(f, other, m, cfg, [p for p in points if other < p < m])
        return combine([near, far])
    return QuadResult(0.0, 0.0, True)


# ---------------------------------------------------------------------------
# Suprema
# ---------------------------------------------------------------------------


def _grid_bounds(a: np.ndarray, b: np.ndarray, cfg: QuadConfig):
    lo = np.where(a > 0, a, np.minimum(cfg.trunc_lo, np.where(np.isfinite(b), b * 1e-6, cfg.trunc_lo)))
    hi = np.where(np.isfinite(b), b, np.maximum(cfg.trunc_hi, lo * 1e6))
    return lo, hi


def _probe_end(G, rows_idx, edge, direction, ncols):
    """Values of G beyond the grid edge at 10**k multiples, k = 1..6."""
    factors = 10.0 ** (direction * np.arange(1, 7))
    z = edge[:, None] * factors[None, :]
    return G(rows_idx, z)


def sup_rows(
    G: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a: np.ndarray,
    b: np.ndarray,
    cfg: QuadConfig | None = None,
    points: Iterable[float] = (),
    golden_iters: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise suprema of G(row, z) over z in [a_row, b_row].

    ``G(rows, z)`` receives an index array of shape (n,) and z of shape
    (n, m) and returns values of shape (n, m).  Returns (values, argmax).
    Values are +inf where G is infinite or grows without bound toward an
    improper end.
    """
    cfg = cfg or QuadConfig()
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    n = len(a)
    rows = np.arange(n)
    lo, hi = _grid_bounds(a, b, cfg)
    m = cfg.sup_grid
    frac = np.linspace(0.0, 1.0, m)
    llo, lhi = np.log(lo), np.log(hi)
    z = np.exp(llo[:, None] + (lhi - llo)[:, None] * frac[None, :])
    pts = np.array([p for p in points if p is not None and 0 < p < INF], dtype=float)
    if len(pts):
        zp = np.clip(np.broadcast_to(pts, (n, len(pts))), lo[:, None], hi[:, None])
        z = np.concatenate([z, zp], axis=1)
        z.sort(axis=1)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        vals = np.asarray(G(rows, z), dtype=float)
    if np.any(np.isnan(vals)):
        raise QuadNaNError("supremum integrand returned NaN")
    best = vals.max(axis=1)
    idx = vals.argmax(axis=1)
    arg = z[rows, idx]
    infinite = np.isinf(best)
    # golden-section refinement around the grid argmax
    ncol = z.shape[1]
    left = np.log(z[rows, np.maximum(idx - 1, 0)])
    right = np.log(z[rows, np.minimum(idx + 1, ncol - 1)])
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = right - gr * (right - left)
    x2 = left + gr * (right - left)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        f1 = np.asarray(G(rows, np.exp(x1)[:, None]), dtype=float)[:, 0]
        f2 = np.asarray(G(rows, np.exp(x2)[:, None]), dtype=float)[:, 0]
        for _ in range(golden_iters):
            go_right = f2 > f1
            left = np.where(go_right, x1, left)
            right = np.where(go_right, right, x2)
            x1n = np.where(go_right, x2, right - gr * (right - left))
            x2n = np.where(go_right, left + gr * (right - left), x1)
            f1n = np.where(go_right, f2, np.nan)
            f2n = np.where(go_right, np.nan, f1)
            need1 = ~go_right
            need2 = go_right
            ev = np.where(need1, x1n, x2n)
            fe = np.asarray(G(rows, np.exp(ev)[:, None]), dtype=float)[:, 0]
            f1 = np.where(need1, fe, f1n)
            f2 = np.where(need2, fe, f2n)
            x1, x2 = x1n, x2n
    fe = np.where(np.isnan(f1), -np.inf, f1)
    fe2 = np.where(np.isnan(f2), -np.inf, f2)
    cand = np.maximum(fe, fe2)
    cand_arg = np.where(fe >= fe2, np.exp(x1), np.exp(x2))
    better = cand > best
    best = np.where(better, cand, best)
    arg = np.where(better, cand_arg, arg)
    # unbounded growth toward improper ends
    for end_mask, edge, direction, col in (
        ((b == INF) & (idx == ncol - 1), hi, 1, ncol - 1),
        ((a == 0.0) & (idx == 0), lo, -1, 0),
    ):
        sel = end_mask & ~infinite
        if np.any(sel):
            r = rows[sel]
            with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
                probe = np.asarray(_probe_end(G, r, edge[sel], direction, ncol), dtype=float)
            probe = np.where(np.isnan(probe), 0.0, probe)
            last = probe[:, -1]
            prev = probe[:, -2]
            growing = (last > prev * (1.0 + 1e-3)) | np.isinf(last)
            pmax = probe.max(axis=1)
            newbest = np.where(growing, INF, np.maximum(best[sel], pmax))
            best[sel] = newbest
            arg[sel] = np.where(growing, INF if direction > 0 else 0.0, arg[sel])
    return best, arg


def sup_on(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    cfg: QuadConfig | None = None,
    points: Iterable[float] = (),
) -> QuadResult:
    """Supremum of g on [a, b] by a log-spaced grid plus golden-section refinement."""
    cfg = cfg or QuadConfig()
    G = lambda rows, z: g(np.asarray(z).reshape(-1)).reshape(np.shape(z))
    best, arg = sup_rows(G, np.array([float(a)]), np.array([float(b)]), cfg, points)
    val = float(best[0])
    if val == INF:
        return QuadResult(INF, 0.0, True, "supremum is infinite", float(arg[0]))
    return QuadResult(val, 0.0, True, None, float(arg[0]))
