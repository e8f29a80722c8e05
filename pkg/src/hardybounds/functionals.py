"""Integral boundedness conditions for Hardy-type operators with regular kernels.

Two operators are covered:

    dual_Hstar:  f -> int_t^inf f(x) U(t, x) dx
    primal_H:    f -> int_0^t f(x) U(x, t) dx

For 0 < q < 1 < p the least constant C in ||Tf||_{q,w} <= C ||f||_{p,v}
satisfies C^r ~ A1 + A2 (dual) or C^r ~ A*1 + A*2 (primal); for p = 1 the
pair A3, A4 (or A*3, A*4) plays the same role with r = -q'.  The monotone-cone
conditions A5-A8 concern f -> int_t^inf f u restricted to nonincreasing f.
The classical conditions E1-E5 are available as regression baselines.

All weights are evaluated through their unit-scale shape; the weight scales
enter through the exact homogeneity laws of each functional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .kernels import KernelSpec
from .quad import (
    INF,
    QuadConfig,
    QuadResult,
    combine,
    divergent,
    integrate,
    integrate_near,
    sup_rows,
)
from .weights import ExponentTriple, Piece, WeightSpec, reflect

DIRECTIONS = ("dual_Hstar", "primal_H")
CONES = ("all_nonneg", "nonincreasing")
# nested sups over many outer points use a coarser grid
NESTED_SUP_GRID = 512


class RegimeError(ValueError):
    """Raised when a functional is requested outside its exponent regime."""


# ---------------------------------------------------------------------------
# Problem specification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """Weights, kernel, exponents, operator direction and cone of test functions.

    For the nonincreasing cone the kernel must be integral_of(u) and the
    operator is f -> int_t^inf f(s) u(s) ds; writing f = int_x^inf h turns it
    into the dual operator with kernel int_t^x u acting on h >= 0.
    """

    v: WeightSpec
    w: WeightSpec
    U: KernelSpec
    exps: ExponentTriple
    direction: str = "dual_Hstar"
    cone: str = "all_nonneg"

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if self.cone not in CONES:
            raise ValueError(f"cone must be one of {CONES}, got {self.cone!r}")
        if self.cone == "nonincreasing":
            if self.U.family != "integral_of" or self.U.power != 1.0:
                raise ValueError("the nonincreasing cone needs an integral_of(u) kernel")
            if self.direction != "dual_Hstar":
                raise ValueError("the nonincreasing cone is implemented for the dual direction")

    @property
    def p(self) -> float:
        return self.exps.p

    @property
    def q(self) -> float:
        return self.exps.q

    def with_weights(self, v: WeightSpec | None = None, w: WeightSpec | None = None) -> "ProblemSpec":
        return replace(self, v=self.v if v is None else v, w=self.w if w is None else w)

    def shape(self) -> tuple["ProblemSpec", float, float]:
        """(spec with unit-scale weights, scale of v, scale of w)."""
        v, cv = self.v.shape()
        w, cw = self.w.shape()
        return replace(self, v=v, w=w), cv, cw

    def scale_factor(self, cv: float, cw: float, power: float) -> float:
        """(cw**(1/q) * cv**(-1/p))**power, the homogeneity law of every condition."""
        log = (math.log(cw) / self.q - math.log(cv) / self.p) * power
        return math.exp(log)

    def reflected(self) -> "ProblemSpec":
        """The equivalent problem for the other operator under t -> 1/t."""
        if self.cone != "all_nonneg":
            raise ValueError("reflection applies to the all_nonneg cone only")
        return ProblemSpec(
            v=reflect(self.v, "v", self.p),
            w=reflect(self.w, "w"),
            U=self.U.reflected(),
            exps=self.exps,
            direction="primal_H" if self.direction == "dual_Hstar" else "dual_Hstar",
            cone=self.cone,
        )


def _points(*weights: WeightSpec) -> list[float]:
    pts = set()
    for ws in weights:
        pts.update(ws.breakpoints)
    return sorted(pts)


def _mul(a, b):
    """Product with the convention 0 * inf = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    return np.where((a == 0) | (b == 0), 0.0, out)


def _pow(x, e):
    """Power of nonnegative values with 0**0 = 1 and inf**e handled by sign of e."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return np.where(x == INF, INF if e > 0 else (1.0 if e == 0 else 0.0), x**e)


# ---------------------------------------------------------------------------
# Inner integrals and suprema
# ---------------------------------------------------------------------------


def kernel_integral(
    U: KernelSpec,
    dens: WeightSpec,
    x: float,
    a: float,
    b: float,
    exponent: float,
    side: str,
    cfg: QuadConfig,
) -> QuadResult:
    """Integral over y in (a, b) of U**exponent * dens(y).

    side "right": kernel U(x, y) with a >= x.  side "left": kernel U(y, x)
    with b <= x.  The endpoint touching x gets the singular-endpoint rule.
    """
    if b <= a:
        return QuadResult(0.0, 0.0, True)
    if U.family == "constant":
        val = float(dens.integral(a, b))
        if val == INF:
            return divergent("density not integrable")
        return QuadResult(val, abs(val) * 1e-15, True)
    pts = [p for p in dens.breakpoints if a < p < b]
    if side == "right":
        f = lambda y: _mul(_pow(U.eval(x, y), exponent), dens.eval(y))
        if a == x and x > 0:
            return integrate_near(f, x, b, cfg, pts)
        return integrate(f, a, b, cfg, pts)
    f = lambda y: _mul(_pow(U.eval(y, x), exponent), dens.eval(y))
    if b == x and b < INF:
        return integrate_near(f, x, a, cfg, pts)
    return integrate(f, a, b, cfg, pts)


def _row_values(fn: Callable[[float], QuadResult], ts: np.ndarray, active: np.ndarray):
    """Evaluate a scalar inner computation on active entries; inf where divergent."""
    out = np.zeros(len(ts))
    err = 0.0
    for i in np.nonzero(active)[0]:
        res = fn(float(ts[i]))
        out[i] = res.value
        if res.finite:
            err = max(err, res.err_estimate / max(abs(res.value), 1e-300))
    return out, err


def kernel_sup(
    U: KernelSpec,
    exponent: float,
    factor: Callable[[np.ndarray], np.ndarray],
    ts: np.ndarray,
    side: str,
    cfg: QuadConfig,
    points: Sequence[float] = (),
    upper: float | np.ndarray = INF,
    lower: float | np.ndarray = 0.0,
) -> np.ndarray:
    """Row-wise sup of U**exponent * factor(z).

    side "right": z in [t, upper], kernel U(t, z).  side "left": z in
    [lower, t], kernel U(z, t).
    """
    ts = np.asarray(ts, dtype=float)
    if len(ts) == 0:
        return np.zeros(0)
    sub = replace(cfg, sup_grid=min(cfg.sup_grid, NESTED_SUP_GRID))
    pts = list(points) + [p * (1 - 1e-12) for p in points]
    if side == "right":
        def G(rows, z):
            return _mul(_pow(U.eval(ts[rows][:, None], z), exponent), factor(z))
        a = ts
        b = np.broadcast_to(np.asarray(upper, dtype=float), ts.shape).copy()
    else:
        def G(rows, z):
            return _mul(_pow(U.eval(z, ts[rows][:, None]), exponent), factor(z))
        a = np.broadcast_to(np.asarray(lower, dtype=float), ts.shape).copy()
        b = ts
    vals, _ = sup_rows(G, a, b, sub, pts)
    return vals


def _outer(f: Callable[[np.ndarray], np.ndarray], cfg: QuadConfig, points) -> QuadResult:
    return integrate(f, 0.0, INF, cfg, points)


# ---------------------------------------------------------------------------
# A1, A2 and their primal counterparts
# ---------------------------------------------------------------------------


def _require(cond: bool, msg: str):
    if not cond:
        raise RegimeError(msg)


def _a12_shape(spec: ProblemSpec, cfg: QuadConfig) -> tuple[QuadResult, QuadResult]:
    p, q = spec.p, spec.q
    e = spec.exps
    r, pp = e.r, e.p_prime
    v, w, U = spec.v, spec.w, spec.U
    s = v.powered(1.0 - pp)
    inner = cfg.tightened(0.1)
    pts = _points(v, w)
    dual = spec.direction == "dual_Hstar"

    def f1(t):
        wt = w.eval(t)
        active = wt > 0
        if dual:
            mass = w.primitive(t)
            I, _ = _row_values(lambda x: kernel_integral(U, s, x, x, INF, pp, "right", inner), t, active)
        else:
            mass = w.tail(t)
            I, _ = _row_values(lambda x: kernel_integral(U, s, x, 0.0, x, pp, "left", inner), t, active)
        return _mul(_mul(_pow(mass, r / p), wt), _pow(I, r / pp))

    def f2(t):
        wt = w.eval(t)
        active = wt > 0
        if dual:
            J, _ = _row_values(lambda x: kernel_integral(U, w, x, 0.0, x, q, "left", inner), t, active)
            tail_s = lambda z: _pow(s.tail(z), r / pp)
            S = np.zeros(len(t))
            S[active] = kernel_sup(U, q, tail_s, t[active], "right", inner, s.breakpoints)
        else:
            J, _ = _row_values(lambda x: kernel_integral(U, w, x, x, INF, q, "right", inner), t, active)
            prim_s = lambda z: _pow(s.primitive(z), r / pp)
            S = np.zeros(len(t))
            S[active] = kernel_sup(U, q, prim_s, t[active], "left", inner, s.breakpoints)
        return _mul(_mul(_pow(J, r / p), wt), S)

    return _outer(f1, cfg, pts), _outer(f2, cfg, pts)


def eval_A12(spec: ProblemSpec, cfg: QuadConfig | None = None) -> tuple[QuadResult, QuadResult]:
    """(A1, A2) for dual_Hstar, (A*1, A*2) for primal_H; unrooted, so C**r ~ A1 + A2."""
    cfg = cfg or QuadConfig()
    _require(spec.q < 1 < spec.p, "A1/A2 need 0 < q < 1 < p")
    shp, cv, cw = spec.shape()
    a1, a2 = _a12_shape(shp, cfg)
    fac = spec.scale_factor(cv, cw, spec.exps.r)
    return a1.scaled(fac), a2.scaled(fac)


# ---------------------------------------------------------------------------
# A3, A4 (p = 1)
# ---------------------------------------------------------------------------


def _a34_shape(spec: ProblemSpec, cfg: QuadConfig) -> tuple[QuadResult, QuadResult]:
    q = spec.q
    qp = spec.exps.q_prime  # negative
    v, w, U = spec.v, spec.w, spec.U
    rho = v.powered(qp)  # v**q' = (1/v)**(-q')
    inner = cfg.tightened(0.1)
    pts = _points(v, w)
    dual = spec.direction == "dual_Hstar"

    def f3(t):
        wt = w.eval(t)
        active = wt > 0
        mass = w.primitive(t) if dual else w.tail(t)
        S = np.zeros(len(t))
        side = "right" if dual else "left"
        S[active] = kernel_sup(U, -qp, rho.eval, t[active], side, inner, rho.breakpoints)
        return _mul(_mul(_pow(mass, -qp), wt), S)

    def f4(t):
        wt = w.eval(t)
        active = wt > 0
        if dual:
            J, _ = _row_values(lambda x: kernel_integral(U, w, x, 0.0, x, q, "left", inner), t, active)
        else:
            J, _ = _row_values(lambda x: kernel_integral(U, w, x, x, INF, q, "right", inner), t, active)
        S = np.zeros(len(t))
        side = "right" if dual else "left"
        S[active] = kernel_sup(U, q, rho.eval, t[active], side, inner, rho.breakpoints)
        return _mul(_mul(_pow(J, -qp), wt), S)

    return _outer(f3, cfg, pts), _outer(f4, cfg, pts)


def eval_A34(spec: ProblemSpec, cfg: QuadConfig | None = None) -> tuple[QuadResult, QuadResult]:
    """(A3, A4) for dual_Hstar, (A*3, A*4) for primal_H; C**(-q') ~ A3 + A4."""
    cfg = cfg or QuadConfig()
    _require(spec.p == 1 and spec.q < 1, "A3/A4 need p = 1 and 0 < q < 1")
    shp, cv, cw = spec.shape()
    a3, a4 = _a34_shape(shp, cfg)
    fac = spec.scale_factor(cv, cw, spec.exps.r)
    return a3.scaled(fac), a4.scaled(fac)


# ---------------------------------------------------------------------------
# A5-A8 (nonincreasing cone)
# ---------------------------------------------------------------------------


def _a5678_shape(spec: ProblemSpec, cfg: QuadConfig):
    p, q = spec.p, spec.q
    r = spec.exps.r
    v, w = spec.v, spec.w
    u = spec.U.u
    U1 = KernelSpec.integral_of(u)
    V = v.primitive_weight()
    inner = cfg.tightened(0.1)
    pts = _points(v, w, u)
    Vfac = lambda z: _pow(V.eval(z), -r / p)

    def f5(t):
        wt = w.eval(t)
        active = wt > 0
        S = np.zeros(len(t))
        S[active] = kernel_sup(U1, r, Vfac, t[active], "right", inner, _points(u, v))
        return _mul(_mul(_pow(w.primitive(t), r / p), wt), S)

    def f6(t):
        wt = w.eval(t)
        active = wt > 0
        J, _ = _row_values(lambda x: kernel_integral(U1, w, x, 0.0, x, q, "left", inner), t, active)
        S = np.zeros(len(t))
        S[active] = kernel_sup(U1, q, Vfac, t[active], "right", inner, _points(u, v))
        return _mul(_mul(_pow(J, r / p), wt), S)

    a5 = _outer(f5, cfg, pts) if p <= 1 else None
    a6 = _outer(f6, cfg, pts)
    a7 = a8 = None
    if p > 1:
        pp = p / (p - 1.0)
        dens = _VDensity(V, v, pp)

        def f7(t):
            wt = w.eval(t)
            active = wt > 0
            I, _ = _row_values(lambda x: kernel_integral(U1, dens, x, x, INF, pp, "right", inner), t, active)
            return _mul(_mul(_pow(w.primitive(t), r / p), wt), _pow(I, r / pp))

        a7 = _outer(f7, cfg, pts)
        vmass = v.total()
        if vmass == INF:
            a8 = QuadResult(0.0, 0.0, True, None)
        else:
            g = lambda t: _mul(w.eval(t), _pow(u.primitive(t), q))
            wu = integrate(g, 0.0, INF, cfg, pts)
            if not wu.finite:
                a8 = wu
            else:
                val = wu.value ** (1.0 / q) * vmass ** (-1.0 / p)
                a8 = QuadResult(val, val * wu.err_estimate / max(wu.value, 1e-300) / q, wu.converged)
    root = lambda res: None if res is None else _root(res, r)
    return root(a5), root(a6), root(a7), a8


class _VDensity:
    """The density V**(-p') v used by A7, with the WeightSpec interface used by kernel_integral."""

    def __init__(self, V: WeightSpec, v: WeightSpec, pp: float):
        self.V, self.v, self.pp = V, v, pp
        self.breakpoints = v.breakpoints

    def eval(self, z):
        return _mul(_pow(self.V.eval(z), -self.pp), self.v.eval(z))


def _root(res: QuadResult, r: float) -> QuadResult:
    if not res.finite:
        return res
    val = res.value ** (1.0 / r)
    err = val * res.err_estimate / max(res.value, 1e-300) / r
    return QuadResult(val, err, res.converged)


def eval_A5678(spec: ProblemSpec, cfg: QuadConfig | None = None) -> dict:
    """Rooted A5..A8 as a dict; entries outside the regime are None.

    p <= 1: A5, A6.  p > 1: A6, A7, A8 (A8 = 0 when v has infinite mass).
    """
    cfg = cfg or QuadConfig()
    _require(spec.cone == "nonincreasing", "A5-A8 need cone = nonincreasing")
    _require(0 < spec.q < spec.p and spec.q < 1, "A5-A8 need 0 < q < p and q < 1")
    shp, cv, cw = spec.shape()
    a5, a6, a7, a8 = _a5678_shape(shp, cfg)
    fac = spec.scale_factor(cv, cw, 1.0)
    out = {}
    for name, res in (("A5", a5), ("A6", a6), ("A7", a7), ("A8", a8)):
        out[name] = None if res is None else res.scaled(fac)
    return out


def monotone_transform(spec: ProblemSpec) -> ProblemSpec:
    """The unrestricted dual problem equivalent to the monotone-cone problem.

    p <= 1: kernel (int u)**p, exponents (1, q/p), v replaced by V = int_0 v;
    then A5**r = A3 and A6**r = A4 of the result.
    p > 1: kernel int u, exponents (p, q), v replaced by V**p v**(1-p); then
    A7**r = A1 of the result.
    """
    _require(spec.cone == "nonincreasing", "monotone transform needs cone = nonincreasing")
    u = spec.U.u
    V = spec.v.primitive_weight()
    if spec.p <= 1:
        return ProblemSpec(
            v=V,
            w=spec.w,
            U=KernelSpec.integral_of(u, power=spec.p),
            exps=ExponentTriple(1.0, spec.q / spec.p),
            direction="dual_Hstar",
            cone="all_nonneg",
        )
    vnew = multiply(V.powered(spec.p), spec.v.powered(1.0 - spec.p))
    return ProblemSpec(
        v=vnew,
        w=spec.w,
        U=KernelSpec.integral_of(u),
        exps=spec.exps,
        direction="dual_Hstar",
        cone="all_nonneg",
    )


def multiply(a: WeightSpec, b: WeightSpec) -> WeightSpec:
    """Pointwise product of two weights where b has single-term pieces."""
    cuts = sorted(set(a.breakpoints) | set(b.breakpoints))
    edges = [0.0] + cuts + [INF]
    pieces = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        probe = lo * 2.0 if hi == INF else (0.5 * hi if lo == 0.0 else math.sqrt(lo * hi))
        pa = a.pieces[int(np.searchsorted(a.edges, probe, side="right") - 1)]
        pb = b.pieces[int(np.searchsorted(b.edges, probe, side="right") - 1)]
        if pb.is_zero or pa.is_zero:
            pieces.append(Piece(lo, hi, terms=((0.0, 0.0),)))
            continue
        st = pb.single_term
        if st is None or (pb.rate != 0.0 and pa.rate != 0.0 and pa.sigma != pb.sigma):
            raise ValueError("multiply needs single-term pieces in the second factor")
        C, E = st
        rate = pa.rate + pb.rate
        sigma = pa.sigma if pa.rate != 0.0 else pb.sigma
        pieces.append(replace(pa, lo=lo, hi=hi, coef=pa.coef * C, shift=pa.shift + E, rate=rate, sigma=sigma))
    return WeightSpec(tuple(pieces), scale=a.scale * b.scale, strict=False)


# ---------------------------------------------------------------------------
# E1-E5 (classical conditions for the primal operator)
# ---------------------------------------------------------------------------


def _e_shape(spec: ProblemSpec, which: int, cfg: QuadConfig) -> QuadResult:
    p, q = spec.p, spec.q
    v, w, U = spec.v, spec.w, spec.U
    inner = cfg.tightened(0.1)
    pts = _points(v, w)
    sub = replace(cfg, sup_grid=min(cfg.sup_grid, NESTED_SUP_GRID))
    if p == 1:
        pp = INF
        s = None
    else:
        pp = p / (p - 1.0)
        s = v.powered(1.0 - pp)

    def Jstar(t):
        return _row_values(lambda x: kernel_integral(U, w, x, x, INF, q, "right", inner), t, np.ones(len(t), bool))[0]

    def Istar(t):
        return _row_values(lambda x: kernel_integral(U, s, x, 0.0, x, pp, "left", inner), t, np.ones(len(t), bool))[0]

    if which in (1, 2):
        if which == 1:
            g = lambda t: _mul(_pow(Jstar(t), 1.0 / q), _pow(s.primitive(t), 1.0 / pp))
        else:
            g = lambda t: _mul(_pow(w.tail(t), 1.0 / q), _pow(Istar(t), 1.0 / pp))
        G = lambda rows, z: g(np.asarray(z).reshape(-1)).reshape(np.shape(z))
        best, arg = sup_rows(G, np.array([0.0]), np.array([INF]), sub, pts)
        val = float(best[0])
        if val == INF:
            return divergent("supremum is infinite", float(arg[0]))
        return QuadResult(val, 0.0, True, None, float(arg[0]))
    r = spec.exps.r
    if which == 3:
        qp = q / (q - 1.0)
        f = lambda t: _mul(
            _mul(_pow(Jstar(t), r / q), _pow(s.primitive(t), r / qp)), s.eval(t)
        )
        return _root(_outer(f, cfg, pts), r)
    if which == 4:
        f = lambda t: _mul(_mul(_pow(w.tail(t), r / p), w.eval(t)), _pow(Istar(t), r / pp))
        return _root(_outer(f, cfg, pts), r)
    if which == 5:
        if p == 1:
            g = lambda t: _mul(_pow(Jstar(t), 1.0 / q), v.powered(-1.0).eval(t))
            G = lambda rows, z: g(np.asarray(z).reshape(-1)).reshape(np.shape(z))
            best, arg = sup_rows(G, np.array([0.0]), np.array([INF]), sub, pts + [x * (1 - 1e-12) for x in pts])
            val = float(best[0])
            if val == INF:
                return divergent("supremum is infinite", float(arg[0]))
            return QuadResult(val, 0.0, True, None, float(arg[0]))
        f = lambda t: _mul(_pow(Jstar(t), pp / q), s.eval(t))
        return _root(_outer(f, cfg, pts), pp)
    raise ValueError(f"unknown E functional {which}")


_E_REGIMES = {
    1: (lambda p, q: 1 < p <= q, "E1 needs 1 < p <= q"),
    2: (lambda p, q: 1 < p <= q, "E2 needs 1 < p <= q"),
    3: (lambda p, q: 1 < q < p, "E3 needs 1 < q < p"),
    4: (lambda p, q: 1 < q < p, "E4 needs 1 < q < p"),
    5: (lambda p, q: q < 1 <= p, "E5 needs q < 1 <= p"),
}


def eval_E(spec: ProblemSpec, which: int, cfg: QuadConfig | None = None) -> QuadResult:
    """Classical condition E_which (rooted).  For dual_Hstar specs the
    condition of the reflected primal problem is returned."""
    cfg = cfg or QuadConfig()
    if which not in _E_REGIMES:
        raise ValueError(f"unknown E functional {which}")
    ok, msg = _E_REGIMES[which]
    _require(ok(spec.p, spec.q), msg)
    _require(spec.cone == "all_nonneg", "E functionals concern the all_nonneg cone")
    target = spec.reflected() if spec.direction == "dual_Hstar" else spec
    shp, cv, cw = target.shape()
    res = _e_shape(shp, which, cfg)
    return res.scaled(target.scale_factor(cv, cw, 1.0))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass
class FunctionalEntry:
    name: str
    value: float
    err_estimate: float
    finite: bool
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "err": self.err_estimate,
            "finite": self.finite,
            "converged": self.converged,
        }


@dataclass
class FunctionalReport:
    entries: list
    predicted_constant: Optional[float]
    regime: str
    verdict: str
    a_sum_r: Optional[float] = None

    def get(self, name: str) -> Optional[FunctionalEntry]:
        for e in self.entries:
            if e.name == name:
                return e
        return None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "verdict": self.verdict,
            "predicted_constant": self.predicted_constant,
            "a_sum_r": self.a_sum_r,
            "functionals": [e.to_dict() for e in self.entries],
        }


def _entry(name: str, res: QuadResult) -> FunctionalEntry:
    return FunctionalEntry(name, float(res.value), float(res.err_estimate), res.finite, bool(res.converged))


def check_regime(spec: ProblemSpec) -> str:
    """Regime label; p < 1 on the unrestricted cone is rejected."""
    p, q = spec.p, spec.q
    if spec.cone == "all_nonneg" and p < 1:
        raise RegimeError(
            "p < 1 on the cone of all nonnegative functions: the operator can never be bounded "
            "(there are f in L^p(v) that are not locally integrable)"
        )
    if spec.cone == "nonincreasing":
        if not (0 < q < p and q < 1):
            raise RegimeError("the nonincreasing cone needs 0 < q < p and q < 1")
        return "monotone p<=1" if p <= 1 else "monotone p>1"
    if q < 1 < p:
        return "q<1<p"
    if q < 1 and p == 1:
        return "q<1=p"
    raise RegimeError(f"no characterization implemented for p={p}, q={q}; use eval_E for classical regimes")


def predict(spec: ProblemSpec, cfg: QuadConfig | None = None) -> FunctionalReport:
    """Evaluate the characterizing pair for the regime of ``spec``."""
    cfg = cfg or QuadConfig()
    regime = check_regime(spec)
    star = "*" if spec.direction == "primal_H" else ""
    r = spec.exps.r
    if regime == "q<1<p":
        a, b = eval_A12(spec, cfg)
        entries = [_entry(f"A{star}1", a), _entry(f"A{star}2", b)]
    elif regime == "q<1=p":
        a, b = eval_A34(spec, cfg)
        entries = [_entry(f"A{star}3", a), _entry(f"A{star}4", b)]
    else:
        res = eval_A5678(spec, cfg)
        entries = [_entry(k, v) for k, v in res.items() if v is not None]
    finite = all(e.finite for e in entries)
    total = sum(e.value for e in entries) if finite else INF
    if regime.startswith("monotone"):
        predicted = total
        a_sum_r = total**r if finite else INF
    else:
        predicted = total ** (1.0 / r) if finite else INF
        a_sum_r = total
    verdict = "bounded" if finite else "unbounded"
    return FunctionalReport(entries, predicted if finite else None, regime, verdict, a_sum_r)
