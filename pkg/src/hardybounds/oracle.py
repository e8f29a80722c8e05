"""Brute-force lower bounds for the optimal constant via ratio maximization.

Test functions are nonnegative step functions on a log-spaced grid.  The
ratio ||Tf||_{q,w} / ||f||_{p,v} is evaluated on a fixed-node surrogate
(a matrix of kernel cell integrals at Gauss-Legendre nodes in log t) and
maximized by multiplicative updates

    f_i <- f_i * rho_i ** eta,   rho_i = (dN_i / N) / (dD_i / (p D) * q)

where N = ||Tf||_q^q and D = ||f||_p^p; with eta = 1/(p-1) and p = 2 this
is the power iteration for the linear case.  Starts are indicator functions,
blockwise Hoelder witnesses along the level points of w, and random
log-normal bumps.  The best function is re-evaluated with adaptive
quadrature to certify the surrogate value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .functionals import ProblemSpec, kernel_integral, kernel_sup
from .kernels import KernelSpec
from .quad import INF, QuadConfig, integrate
from .weights import WeightSpec

UNBOUNDED_RATIO = 1e12
_trapezoid = getattr(np, "trapezoid", None) or np.trapz
_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)
_GL4_X, _GL4_W = np.polynomial.legendre.leggauss(4)


# ---------------------------------------------------------------------------
# Grid functions and operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridFunction:
    """Step function equal to values[i] on [edges[i], edges[i+1]) and 0 elsewhere."""

    edges: np.ndarray
    values: np.ndarray
    monotone: bool = False

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if edges.ndim != 1 or len(edges) != len(values) + 1:
            raise ValueError("need len(edges) == len(values) + 1")
        if np.any(np.diff(edges) <= 0) or edges[0] < 0 or not np.isfinite(edges[-1]):
            raise ValueError("edges must be finite, nonnegative and increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("values must be finite and nonnegative")
        if self.monotone:
            if edges[0] != 0.0:
                raise ValueError("a nonincreasing grid function starts at 0")
            if np.any(np.diff(values) > 0):
                raise ValueError("values of a nonincreasing grid function must not increase")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "values", values)

    @classmethod
    def log_grid(cls, lo: float, hi: float, M: int = 400, monotone: bool = False) -> "GridFunction":
        edges = np.geomspace(lo, hi, M + 1)
        if monotone:
            edges[0] = 0.0
        return cls(edges, np.zeros(M), monotone)

    @classmethod
    def indicator(cls, a: float, b: float) -> "GridFunction":
        return cls(np.array([a, b]), np.array([1.0]), monotone=(a == 0.0))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.edges, np.asarray(values, dtype=float), self.monotone)

    def eval(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.edges, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(self.values))
        out = np.zeros(t.shape)
        out[inside] = self.values[idx[inside]]
        return out

    def lp_norm(self, v: WeightSpec, p: float) -> float:
        cells = v.integral(self.edges[:-1], self.edges[1:])
        mask = self.values > 0
        return float(np.sum(self.values[mask] ** p * cells[mask])) ** (1.0 / p)

    def to_dict(self) -> dict:
        return {"edges": self.edges.tolist(), "values": self.values.tolist(), "monotone": self.monotone}


def _pow_diff(x: np.ndarray, y: np.ndarray, gap: np.ndarray, a: float) -> np.ndarray:
    """x**a - y**a for x = y + gap >= y >= 0, stable when gap << y."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = x**a - np.where(y > 0, y, 0.0) ** a
        rel = np.where(y > 0, y**a * np.expm1(a * np.log1p(gap / np.where(y > 0, y, 1.0))), direct)
    return np.where(y > 0, rel, direct)


def cell_integrals(U: KernelSpec, edges: np.ndarray, taus: np.ndarray, direction: str) -> np.ndarray:
    """Matrix of kernel cell integrals, shape (len(taus), len(edges) - 1).

    primal_H: entry (j, i) = int over cell i intersected with (0, tau_j) of U(y, tau_j) dy.
    dual_Hstar: entry (j, i) = int over cell i intersected with (tau_j, inf) of U(tau_j, y) dy.
    """
    taus = np.asarray(taus, dtype=float)[:, None]
    lo = np.asarray(edges[:-1], dtype=float)[None, :]
    hi = np.asarray(edges[1:], dtype=float)[None, :]
    if direction == "primal_H":
        a, b = lo, np.minimum(hi, taus)
    else:
        a, b = np.maximum(lo, taus), hi
    live = b > a
    out = np.zeros(np.broadcast(taus, lo).shape)
    if not np.any(live):
        return out
    fam = U.family
    if fam == "constant":
        return np.where(live, b - a, 0.0)
    if fam == "riemann_liouville":
        e = U.alpha + 1.0
        if direction == "primal_H":
            x, y = taus - a, taus - b
        else:
            x, y = b - taus, a - taus
        val = _pow_diff(np.maximum(x, 0.0), np.maximum(y, 0.0), np.maximum(b - a, 0.0), e) / e
        return np.where(live, val, 0.0)
    if fam == "logarithmic" and U.alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            if direction == "primal_H":
                F = lambda y: y * np.log(taus / y) + y
            else:
                F = lambda y: y * np.log(y / taus) - y
            val = F(np.where(live, b, 1.0)) - F(np.where(live, np.maximum(a, 1e-300), 1.0))
        return np.where(live, val, 0.0)
    # Gauss-Legendre in log y on each live piece
    la = np.log(np.where(live, np.maximum(a, 1e-300), 1.0))
    lb = np.log(np.where(live, b, 1.0))
    half = 0.5 * (lb - la)
    mid = 0.5 * (lb + la)
    tb = np.broadcast_to(taus, out.shape)
    for xk, wk in zip(_GL8_X, _GL8_W):
        y = np.exp(mid + half * xk)
        if direction == "primal_H":
            k = U.eval(np.where(live, y, 0.0), np.where(live, tb, 1.0))
        else:
            k = U.eval(np.where(live, tb, 0.0), np.where(live, y, 1.0))
        with np.errstate(invalid="ignore"):
            out += np.where(live, wk * half * y * k, 0.0)
    return out


def operator_cells(U: KernelSpec, edges, taus, direction: str, cone: str = "all_nonneg") -> np.ndarray:
    """Cell matrix of the operator: kernel cells, or for the nonincreasing cone the cells
    of f -> int_t^inf f(s) u(s) ds where U = integral_of(u)."""
    if cone == "nonincreasing":
        taus = np.asarray(taus, dtype=float)[:, None]
        lo = np.maximum(np.asarray(edges[:-1], dtype=float)[None, :], taus)
        hi = np.broadcast_to(np.asarray(edges[1:], dtype=float)[None, :], lo.shape)
        live = hi > lo
        out = np.zeros(lo.shape)
        out[live] = U.u.integral(lo[live], hi[live])
        return out
    return _cells_with_zero_start(U, edges, taus, direction)


def apply_operator(
    f: GridFunction, U: KernelSpec, direction: str, cone: str = "all_nonneg"
) -> Callable[[np.ndarray], np.ndarray]:
    """t -> (Tf)(t) for the primal operator int_0^t f(y) U(y, t) dy or the dual int_t^inf f(y) U(t, y) dy.

    With cone "nonincreasing" the operator is int_t^inf f(s) u(s) ds for U = integral_of(u).
    """
    nz = np.nonzero(f.values)[0]

    def Tf(t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        if len(nz) == 0:
            return np.zeros(t.shape)
        lo_i, hi_i = nz[0], nz[-1] + 1
        edges = f.edges[lo_i : hi_i + 1]
        vals = f.values[lo_i:hi_i]
        out = np.empty(flat.shape)
        chunk = max(1, 2_000_000 // max(len(vals), 1))
        for s in range(0, len(flat), chunk):
            mat = operator_cells(U, edges, flat[s : s + chunk], direction, cone)
            out[s : s + chunk] = mat @ vals
        return out.reshape(t.shape)

    return Tf


def _cells_with_zero_start(U: KernelSpec, edges, taus, direction):
    """cell_integrals, handling a first cell that starts at 0 for non-closed-form kernels."""
    if edges[0] > 0 or U.family in ("constant", "riemann_liouville") or (U.family == "logarithmic" and U.alpha == 1.0):
        return cell_integrals(U, edges, taus, direction)
    # split (0, e1) into geometric sub-cells down to a negligible length
    e1 = edges[1]
    first = cell_integrals(U, e1 * np.geomspace(1e-12, 1.0, 49), taus, direction).sum(axis=1)
    rest = cell_integrals(U, edges[1:], taus, direction) if len(edges) > 2 else np.zeros((len(taus), 0))
    return np.concatenate([first[:, None], rest], axis=1)


def norm_ratio(f: GridFunction, spec: ProblemSpec, cfg: QuadConfig | None = None) -> float:
    """||Tf||_{q,w} / ||f||_{p,v} with the outer integral by adaptive quadrature."""
    cfg = cfg or QuadConfig(rel_tol=1e-7)
    den = f.lp_norm(spec.v, spec.p)
    if not den > 0:
        raise ValueError("norm_ratio needs a function with positive norm")
    Tf = apply_operator(f, spec.U, spec.direction, spec.cone)
    q = spec.q
    w = spec.w
    g = lambda t: w.eval(t) * np.maximum(Tf(t), 0.0) ** q
    nz = np.nonzero(f.values)[0]
    pts = sorted(set(f.edges[nz[0] : nz[-1] + 2].tolist()) | set(w.breakpoints))
    pts = [x for x in pts if x > 0]
    res = integrate(g, 0.0, INF, cfg, pts)
    if not res.finite:
        return INF
    return res.value ** (1.0 / q) / den


# ---------------------------------------------------------------------------
# Hoelder witnesses
# ---------------------------------------------------------------------------


def holder_witness(
    phi: Callable[[np.ndarray], np.ndarray],
    v: WeightSpec,
    p: float,
    interval: tuple,
    M: int = 400,
) -> GridFunction:
    """Step approximation of the extremal g ~ phi^(p'-1) v^(1-p') on the interval, with ||g||_{p,v} = 1.

    For p = 1 the witness is the normalized indicator of the grid cell where
    phi / v is largest.
    """
    a, b = float(interval[0]), float(interval[1])
    if not (0 <= a < b < INF):
        raise ValueError("holder_witness needs a bounded interval")
    lo = a if a > 0 else b * 1e-9
    edges = np.geomspace(lo, b, M + 1)
    if a == 0.0:
        edges[0] = 0.0
    # cell-averaged shape from 4-point Gauss-Legendre in log t
    la = np.log(np.maximum(edges[:-1], lo * 1e-3))
    lb = np.log(edges[1:])
    half, mid = 0.5 * (lb - la), 0.5 * (lb + la)
    nodes = np.exp(mid[:, None] + half[:, None] * _GL4_X[None, :])
    ph = np.asarray(phi(nodes), dtype=float)
    vv = np.asarray(v.eval(nodes), dtype=float)
    if p == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(vv > 0, ph / vv, np.where(ph > 0, INF, 0.0)).max(axis=1)
        i = int(np.argmax(ratio))
        vals = np.zeros(M)
        vals[i] = 1.0
    else:
        pp = p / (p - 1.0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            shape = np.where(ph > 0, ph ** (pp - 1.0) * vv ** (1.0 - pp), 0.0)
        if not np.all(np.isfinite(shape)):
            raise ValueError("the dual integral diverges on this interval: the ratio is unbounded")
        vals = (shape * _GL4_W[None, :]).sum(axis=1) / 2.0
    g = GridFunction(edges, vals)
    n = g.lp_norm(v, p)
    if not (n > 0 and math.isfinite(n)):
        raise ValueError("the witness has zero or infinite norm")
    return g.with_values(vals / n)


def pairing(g: GridFunction, phi: Callable[[np.ndarray], np.ndarray], cfg: QuadConfig | None = None) -> float:
    """Integral of g * phi."""
    cfg = cfg or QuadConfig(rel_tol=1e-9)
    nz = np.nonzero(g.values)[0]
    a, b = g.edges[nz[0]], g.edges[nz[-1] + 1]
    return integrate(lambda t: g.eval(t) * phi(t), a, b, cfg, g.edges[nz[0] : nz[-1] + 2].tolist()).value


# ---------------------------------------------------------------------------
# Surrogate objective
# ---------------------------------------------------------------------------


class Surrogate:
    """Fixed-node evaluation of N = ||Tf||_q^q and D = ||f||_p^p on a grid."""

    def __init__(self, spec: ProblemSpec, edges: np.ndarray, monotone: bool, ext_decades: float = 4.0, ext_cells: int = 48):
        self.spec = spec
        self.p, self.q = spec.p, spec.q
        self.edges = edges
        self.monotone = monotone
        lo = edges[1] if edges[0] == 0.0 else edges[0]
        hi = edges[-1]
        inner = np.geomspace(lo, hi, max(2, len(edges)))
        if spec.direction == "primal_H":
            ext = np.geomspace(hi, hi * 10**ext_decades, ext_cells + 1)[1:]
            outer = np.concatenate([inner, ext])
        else:
            ext = np.geomspace(lo * 10**-ext_decades, lo, ext_cells + 1)[:-1]
            outer = np.concatenate([ext, inner])
        bps = [x for x in spec.w.breakpoints if outer[0] < x < outer[-1]]
        outer = np.unique(np.concatenate([outer, edges[edges > 0], bps]))
        outer = outer[(outer >= outer[0])]
        la, lb = np.log(outer[:-1]), np.log(outer[1:])
        half, mid = 0.5 * (lb - la), 0.5 * (lb + la)
        taus = np.exp(mid[:, None] + half[:, None] * _GL4_X[None, :]).reshape(-1)
        omega = (half[:, None] * _GL4_W[None, :]).reshape(-1) * taus
        self.taus = taus
        self.ww = omega * spec.w.eval(taus)
        keep = self.ww > 0
        self.taus, self.ww = self.taus[keep], self.ww[keep]
        self.K = operator_cells(spec.U, edges, self.taus, spec.direction, spec.cone)
        self.V = spec.v.integral(edges[:-1], edges[1:])
        if monotone:
            # f = S h with f_i = sum_{j >= i} h_j
            self.K = np.cumsum(self.K, axis=1)

    def f_of(self, x: np.ndarray) -> np.ndarray:
        return np.cumsum(x[::-1])[::-1] if self.monotone else x

    def value(self, x: np.ndarray) -> tuple[float, float]:
        Tf = self.K @ x
        N = float(np.dot(self.ww, np.maximum(Tf, 0.0) ** self.q))
        f = self.f_of(x)
        m = f > 0
        D = float(np.dot(f[m] ** self.p, self.V[m]))
        return N, D

    def ratio(self, x: np.ndarray) -> float:
        N, D = self.value(x)
        if D <= 0 or N <= 0:
            return 0.0
        return N ** (1.0 / self.q) / D ** (1.0 / self.p)

    def log_ratio(self, x: np.ndarray) -> float:
        N, D = self.value(x)
        if D <= 0 or N <= 0:
            return -INF
        return math.log(N) / self.q - math.log(D) / self.p

    def rho(self, x: np.ndarray) -> np.ndarray:
        """Ratio of the relative numerator and denominator gradients per coordinate."""
        Tf = self.K @ x
        pos = Tf > 0
        c = np.zeros_like(Tf)
        c[pos] = self.ww[pos] * Tf[pos] ** (self.q - 1.0)
        N = float(np.dot(self.ww[pos], Tf[pos] ** self.q))
        gN = self.K.T @ c  # dN/dx divided by q
        f = self.f_of(x)
        m = f > 0
        dD = np.zeros_like(f)
        dD[m] = f[m] ** (self.p - 1.0) * self.V[m]  # dD/df divided by p
        if self.monotone:
            dD = np.cumsum(dD)
        D = float(np.dot(f[m] ** self.p, self.V[m]))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            r = (gN / N) / (dD / D)
        return np.where(x > 0, np.nan_to_num(r, nan=0.0, posinf=1e6), 0.0)


# ---------------------------------------------------------------------------
# Unboundedness witness
# ---------------------------------------------------------------------------


def dual_divergence(spec: ProblemSpec, probes: np.ndarray, cfg: QuadConfig | None = None) -> Optional[float]:
    """A probe point t where the dual norm of the kernel section is infinite, or None.

    dual_Hstar: int_t^inf U^p'(t, z) s(z) dz (p > 1) or esssup_{z > t} U(t, z)/v(z) (p = 1).
    primal_H: the same over z < t with U(z, t).  Such a t forces unboundedness
    since w has positive mass on the side where the kernel section dominates.
    """
    if spec.cone != "all_nonneg":
        return None
    cfg = cfg or QuadConfig(rel_tol=1e-6)
    U, v, p = spec.U, spec.v, spec.p
    dual = spec.direction == "dual_Hstar"
    for t in probes:
        t = float(t)
        if not dual and float(spec.w.tail(t)) == 0.0:
            continue
        if p > 1:
            pp = p / (p - 1.0)
            s = v.powered(1.0 - pp)
            if dual:
                res = kernel_integral(U, s, t, t, INF, pp, "right", cfg)
            else:
                res = kernel_integral(U, s, t, 0.0, t, pp, "left", cfg)
            if not res.finite:
                return t
        else:
            rho = v.powered(-1.0)
            side = "right" if dual else "left"
            val = kernel_sup(U, 1.0, rho.eval, np.array([t]), side, cfg, rho.breakpoints)[0]
            if val == INF:
                return t
    return None


def divergence_witness_ratios(spec: ProblemSpec, t: float, spans=(1e1, 1e2, 1e3, 1e4)) -> list:
    """Ratios of truncated Hoelder witnesses beyond (or below) a divergence point; they grow without bound."""
    U, v, p = spec.U, spec.v, spec.p
    dual = spec.direction == "dual_Hstar"
    out = []
    for span in spans:
        if dual:
            phi = lambda z: U.eval(t, z)
            interval = (t, t * span)
        else:
            phi = lambda z: U.eval(z, t)
            interval = (t / span, t)
        try:
            g = holder_witness(phi, v, max(p, 1.0), interval, M=200)
            out.append(norm_ratio(g, spec))
        except ValueError:
            out.append(INF)
    return out


# ---------------------------------------------------------------------------
# Starts
# ---------------------------------------------------------------------------


def _level_points(w: WeightSpec, lo: float, hi: float, base: float = 2.0, offset: float = 0.0) -> list:
    """Points where W crosses W(hi) * base**-(k + offset), restricted to the window.

    Levels are relative to the window mass so that rescaling w leaves them unchanged.
    """
    W_lo, W_hi = float(w.primitive(lo)), float(w.primitive(hi))
    if not (W_hi > W_lo > 0):
        return []
    ks = np.arange(0, math.ceil(math.log(W_hi / W_lo, base)) + 1) + offset
    pts = []
    for k in ks:
        target = W_hi * base**-k
        if not (W_lo < target < W_hi):
            continue
        a, b = lo, hi
        for _ in range(80):
            m = math.sqrt(a * b)
            if w.primitive(m) >= target:
                b = m
            else:
                a = m
        pts.append(b)
    return sorted(set(pts))


def _block_witness_starts(spec: ProblemSpec, S: Surrogate, window: tuple) -> list:
    """Blockwise Hoelder witnesses over the level points of w (both D1- and D2-type blocks)."""
    edges = S.edges
    centers = np.sqrt(np.maximum(edges[:-1], edges[1] * 1e-3) * edges[1:])
    p, q = spec.p, spec.q
    dual = spec.direction == "dual_Hstar"
    U, v, w = spec.U, spec.v, spec.w
    starts = []
    for base in (2.0, 8.0):
        for offset in (0.0, 0.5):
            pts = _level_points(w, window[0], window[1], base, offset)
            if len(pts) < 1:
                continue
            seq = [window[0]] + pts + [window[1]]
            for kind in ("D1", "D2"):
                x = np.zeros(len(centers))
                blocks = []
                for i in range(1, len(seq) - 1):
                    tk = seq[i]
                    L = (seq[i - 1], tk) if dual else (tk, seq[i + 1])
                    R = (tk, seq[i + 1]) if dual else (seq[i - 1], tk)
                    sel = (centers >= R[0]) & (centers < R[1])
                    if not np.any(sel):
                        continue
                    z = centers[sel]
                    if kind == "D1":
                        phi = U.eval(tk, z) if dual else U.eval(z, tk)
                        wmass = float(w.integral(*L))
                    else:
                        phi = np.ones_like(z)
                        tt = np.geomspace(max(L[0], 1e-300), L[1], 64) if L[0] > 0 else np.geomspace(L[1] * 1e-6, L[1], 64)
                        kern = U.eval(tt, tk) if dual else U.eval(tk, tt)
                        wmass = float(_trapezoid(w.eval(tt) * np.asarray(kern) ** q, tt))
                    vv = v.eval(z)
                    cell_v = S.V[sel]
                    if p > 1:
                        pp = p / (p - 1.0)
                        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                            g = np.where(phi > 0, phi ** (pp - 1.0) * vv ** (1.0 - pp), 0.0)
                    else:
                        with np.errstate(divide="ignore", invalid="ignore"):
                            r = np.where(vv > 0, phi / vv, 0.0)
                        g = np.zeros_like(z)
                        g[int(np.argmax(r))] = 1.0
                    g = np.nan_to_num(g, posinf=0.0)
                    gn = float(np.dot(g**p, cell_v)) ** (1.0 / p)
                    if not gn > 0:
                        continue
                    g = g / gn
                    pair = float(np.dot(g * phi, np.diff(edges)[sel]))
                    A = wmass * pair**q
                    if A > 0:
                        blocks.append((sel, g, A))
                if not blocks:
                    continue
                for sel, g, A in blocks:
                    c = A ** (1.0 / (p - q))
                    x[sel] += c * g
                if np.any(x > 0):
                    starts.append(x)
    return starts


def _starts(spec: ProblemSpec, S: Surrogate, window: tuple, rng: np.random.Generator) -> list:
    M = len(S.edges) - 1
    starts = []
    if S.monotone:
        # h = unit mass at index j gives f = indicator of (0, edges[j+1])
        for j in np.unique(np.linspace(0, M - 1, 40).astype(int)):
            h = np.zeros(M)
            h[j] = 1.0
            starts.append(h)
        for _ in range(8):
            h = rng.exponential(size=M) * (rng.random(M) < 0.2)
            if np.any(h > 0):
                starts.append(h)
        return starts
    for width in (1, 4, 16, 64, 256):
        if width > M:
            continue
        for s in np.unique(np.linspace(0, M - width, max(2, min(24, M // width * 2))).astype(int)):
            x = np.zeros(M)
            x[s : s + width] = 1.0
            starts.append(x)
    starts.extend(_block_witness_starts(spec, S, window))
    lc = np.log(np.sqrt(S.edges[:-1] * S.edges[1:]))
    l0, l1 = lc[0], lc[-1]
    for _ in range(8):
        m = rng.uniform(l0, l1)
        s = math.exp(rng.uniform(math.log(0.2), math.log(0.25 * (l1 - l0))))
        starts.append(np.exp(-0.5 * ((lc - m) / s) ** 2) * np.exp(rng.normal(0.0, 0.3, M)))
    return starts


# ---------------------------------------------------------------------------
# Maximization
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    C_lb: float
    argmax: Optional[GridFunction]
    verdict: str
    certified: Optional[float]
    evaluations: int
    trace: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "C_lb": self.C_lb,
            "verdict": self.verdict,
            "certified": self.certified,
            "evaluations": self.evaluations,
            "argmax": None if self.argmax is None else self.argmax.to_dict(),
            "diagnostics": self.diagnostics,
        }


def window_mass_fraction(w: WeightSpec, window: tuple) -> Optional[float]:
    total = w.total()
    if not math.isfinite(total):
        return None
    return float(w.integral(window[0], window[1])) / total


@dataclass
class _Run:
    x: np.ndarray
    val: float
    eta: float
    done: bool = False


def maximize_ratio(
    spec: ProblemSpec,
    budget: int = 2000,
    restarts: int = 6,
    seed: int = 0,
    grid: int = 400,
    window: tuple = (1e-6, 1e6),
    certify: bool = True,
    check_window: bool = True,
) -> OracleResult:
    """Lower bound C_lb for the least constant by multi-start multiplicative ascent.

    ``budget`` counts surrogate evaluations.  Runs advance round-robin, so a
    larger budget extends the same trajectory and C_lb never decreases.
    """
    if budget < 100:
        raise ValueError("budget must be at least 100")
    if spec.cone == "all_nonneg" and spec.p < 1:
        raise ValueError("p < 1 on the cone of all nonnegative functions: the operator can never be bounded")
    lo, hi = float(window[0]), float(window[1])
    diag: dict = {"window": [lo, hi], "grid": grid}
    if check_window:
        frac = window_mass_fraction(spec.w, (lo, hi))
        diag["w_mass_in_window"] = frac
        if frac is not None and frac < 0.999:
            raise ValueError(
                f"only {frac:.4%} of the mass of w lies in the window [{lo}, {hi}]; widen the oracle window"
            )
    probes = np.geomspace(lo, hi, 13)
    t_div = dual_divergence(spec, probes)
    if t_div is not None:
        ratios = divergence_witness_ratios(spec, t_div)
        diag["divergence_point"] = t_div
        diag["witness_ratios"] = ratios
        return OracleResult(INF, None, "unbounded (witnessed)", None, 0, [], diag)

    monotone = spec.cone == "nonincreasing"
    edges = np.geomspace(lo, hi, grid + 1)
    if monotone:
        edges[0] = 0.0
    S = Surrogate(spec, edges, monotone)
    rng = np.random.default_rng(seed)
    evals = 0
    trace = []
    best_val, best_x = -INF, None

    def record(x, lv):
        nonlocal evals, best_val, best_x
        evals += 1
        if lv > best_val:
            best_val, best_x = lv, x.copy()
        trace.append(best_val)

    starts = _starts(spec, S, (lo, hi), rng)
    scored = []
    for i, x in enumerate(starts):
        if evals >= budget:
            break
        lv = S.log_ratio(x)
        record(x, lv)
        scored.append((lv, i))
    scored.sort(key=lambda z: (-z[0], z[1]))
    eta0 = 1.0 / max(spec.p - 1.0, 0.5)
    queue = [i for lv, i in scored if lv > -INF]
    runs = [_Run(starts[i].copy(), lv, eta0) for lv, i in scored[:restarts] if lv > -INF]
    queue = queue[len(runs):]
    while evals < budget and runs:
        for k, r in enumerate(runs):
            if evals >= budget:
                break
            if r.done:
                # replace a converged run by the next start or a perturbed incumbent
                if queue:
                    x = starts[queue.pop(0)].copy()
                else:
                    x = best_x * np.exp(rng.normal(0.0, 0.5, len(best_x)))
                    x[rng.random(len(x)) < 0.05] = 0.0
                    if not np.any(x > 0):
                        x = best_x.copy()
                lv = S.log_ratio(x)
                record(x, lv)
                runs[k] = _Run(x, lv, eta0)
                continue
            rho = S.rho(r.x)
            with np.errstate(over="ignore", under="ignore"):
                trial = r.x * np.clip(rho, 1e-12, 1e12) ** r.eta
            m = trial.max()
            if not (m > 0 and np.isfinite(m)):
                r.done = True
                continue
            trial /= m
            lv = S.log_ratio(trial)
            record(trial, lv)
            if lv > r.val + 1e-13:
                r.x, r.val = trial, lv
                r.eta = min(r.eta * 1.5, 16.0)
            else:
                r.eta *= 0.5
                if r.eta < 1e-4:
                    r.done = True
    C_lb = math.exp(best_val) if best_val > -INF else 0.0
    f = GridFunction(edges, S.f_of(best_x), monotone) if best_x is not None else None
    certified = None
    if certify and f is not None and C_lb > 0:
        certified = norm_ratio(f, spec)
        diag["surrogate_vs_certified"] = C_lb / certified - 1.0 if certified > 0 else None
    verdict = "unbounded (witnessed)" if C_lb > UNBOUNDED_RATIO else "bounded (no divergence found)"
    diag["starts"] = len(starts)
    return OracleResult(C_lb, f, verdict, certified, evals, trace, diag)
