"""Discrete covering-sequence conditions and a local search for their suprema.

A covering sequence is 0 = t_0 < t_1 < ... < t_n = inf.  For an interior
index k the left window is [t_{k-1}, t_k] and the right window [t_k, t_{k+1}].
For the dual operator the terms are

    D1: (int_L w)^(r/q) (int_R U^p'(t_k, x) s)^(r/p')
    D2: (int_L w U^q(t, t_k))^(r/q) (int_R s)^(r/p')
    D3: (int_L w)^(1-q') esssup_R U^(-q')(t_k, x) v^q'(x)
    D4: (int_L w U^q(t, t_k))^(1-q') esssup_R v^q'(x)

with s = v^(1-p').  For the primal operator the windows swap roles and the
kernel arguments are mirrored.  Lai's forms LaiD1/LaiD2 are the primal-operator
orientation of D1/D2 taken verbatim; on dual specs they are evaluated on the
reflected problem with the reflected sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .functionals import ProblemSpec, RegimeError, kernel_integral, kernel_sup
from .quad import INF, QuadConfig, QuadResult, divergent

WHICH = ("D1", "D2", "D3", "D4", "LaiD1", "LaiD2")


class SequenceError(ValueError):
    """Raised for sequences that are not covering sequences."""


@dataclass(frozen=True)
class CoveringSequence:
    points: tuple

    def __post_init__(self):
        pts = tuple(float(x) for x in self.points)
        if len(pts) < 3:
            raise SequenceError("a covering sequence needs at least three points")
        if pts[0] != 0.0:
            raise SequenceError(f"a covering sequence starts at 0, got {pts[0]}")
        if pts[-1] != INF:
            raise SequenceError(f"a covering sequence ends at inf, got {pts[-1]}")
        for i in range(len(pts) - 1):
            if not pts[i] < pts[i + 1]:
                raise SequenceError(f"points must increase strictly: t[{i}]={pts[i]}, t[{i + 1}]={pts[i + 1]}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_interior(cls, interior: Sequence[float]) -> "CoveringSequence":
        return cls((0.0,) + tuple(sorted(float(x) for x in interior)) + (INF,))

    @property
    def interior(self) -> tuple:
        return self.points[1:-1]

    def reflected(self) -> "CoveringSequence":
        """The sequence 1/t_k in increasing order."""
        return CoveringSequence.from_interior([1.0 / x for x in self.interior])

    def to_list(self) -> list:
        return ["inf" if x == INF else x for x in self.points]

    @classmethod
    def from_list(cls, items) -> "CoveringSequence":
        return cls(tuple(INF if x == "inf" else float(x) for x in items))


def _required_regime(spec: ProblemSpec, which: str):
    if which not in WHICH:
        raise ValueError(f"unknown D functional {which!r}; choose from {WHICH}")
    if spec.cone != "all_nonneg":
        raise RegimeError("D functionals concern the all_nonneg cone")
    p, q = spec.p, spec.q
    if which in ("D3", "D4"):
        if not (p == 1 and q < 1):
            raise RegimeError(f"{which} needs p = 1 and 0 < q < 1")
    elif not (q < 1 < p):
        raise RegimeError(f"{which} needs 0 < q < 1 < p")


class DTerms:
    """Cached window factors of the D functionals for one unit-scale problem."""

    def __init__(self, spec: ProblemSpec, which: str, cfg: QuadConfig):
        self.spec = spec
        self.which = which
        self.cfg = cfg
        self.inner = cfg.tightened(0.1)
        e = spec.exps
        self.q = spec.q
        self.r = e.r
        if spec.p > 1:
            self.pp = e.p_prime
            self.s = spec.v.powered(1.0 - self.pp)
        else:
            self.pp = INF
            self.rho = spec.v.powered(e.q_prime)
        self.dual = spec.direction == "dual_Hstar"
        self._w_cache: dict = {}
        self._v_cache: dict = {}

    # the w-window is left of t_k for the dual operator, right of it for the primal
    def w_factor(self, t_k: float, other: float) -> float:
        key = (t_k, other)
        if key not in self._w_cache:
            self._w_cache[key] = self._w_factor(t_k, other)
        return self._w_cache[key]

    def v_factor(self, t_k: float, other: float) -> float:
        key = (t_k, other)
        if key not in self._v_cache:
            self._v_cache[key] = self._v_factor(t_k, other)
        return self._v_cache[key]

    def _w_factor(self, t_k: float, other: float) -> float:
        spec = self.spec
        w, U, q = spec.w, spec.U, self.q
        lo, hi = (other, t_k) if self.dual else (t_k, other)
        kernel = self.which in ("D2", "D4")
        if not kernel:
            val = float(w.integral(lo, hi))
        elif self.dual:
            val = kernel_integral(U, w, t_k, lo, hi, q, "left", self.inner).value
        else:
            val = kernel_integral(U, w, t_k, lo, hi, q, "right", self.inner).value
        return _power(val, self.r / q)

    def _v_factor(self, t_k: float, other: float) -> float:
        spec = self.spec
        U = spec.U
        lo, hi = (t_k, other) if self.dual else (other, t_k)
        if self.which == "D1":
            side = "right" if self.dual else "left"
            val = kernel_integral(U, self.s, t_k, lo, hi, self.pp, side, self.inner).value
            return _power(val, self.r / self.pp)
        if self.which == "D2":
            return _power(float(self.s.integral(lo, hi)), self.r / self.pp)
        if self.which == "D4":
            return float(self.rho.esssup(lo, hi))
        # D3: esssup over the window of U^(-q')(t_k, x) v^q'(x)
        qp = spec.exps.q_prime
        ts = np.array([t_k])
        if self.dual:
            val = kernel_sup(U, -qp, self.rho.eval, ts, "right", self.inner, self.rho.breakpoints, upper=hi)
        else:
            val = kernel_sup(U, -qp, self.rho.eval, ts, "left", self.inner, self.rho.breakpoints, lower=lo)
        return float(val[0])

    def term(self, prev: float, t_k: float, nxt: float) -> float:
        if self.dual:
            a, b = self.w_factor(t_k, prev), self.v_factor(t_k, nxt)
        else:
            a, b = self.w_factor(t_k, nxt), self.v_factor(t_k, prev)
        if a == 0.0 or b == 0.0:
            return 0.0
        return a * b

    def total(self, seq: CoveringSequence) -> float:
        pts = seq.points
        out = 0.0
        for i in range(1, len(pts) - 1):
            out += self.term(pts[i - 1], pts[i], pts[i + 1])
            if out == INF:
                return INF
        return out


def _power(x: float, e: float) -> float:
    if x == INF:
        return INF if e > 0 else 0.0
    if x == 0.0:
        return 0.0 if e > 0 else (INF if e < 0 else 1.0)
    return x**e


def _prepare(spec: ProblemSpec, which: str, seq: Optional[CoveringSequence] = None):
    """(effective spec, effective D name, mapped sequence) for Lai forms and plain D forms."""
    _required_regime(spec, which)
    if which.startswith("Lai"):
        base = "D" + which[-1]
        if spec.direction == "primal_H":
            return spec, base, seq
        return spec.reflected(), base, (None if seq is None else seq.reflected())
    return spec, which, seq


def _scale(spec: ProblemSpec, cv: float, cw: float) -> float:
    return spec.scale_factor(cv, cw, spec.exps.r)


def eval_D(spec: ProblemSpec, seq: CoveringSequence, which: str, cfg: QuadConfig | None = None) -> QuadResult:
    """The D-sum of ``which`` over the interior points of ``seq`` (unrooted, comparable with C^r)."""
    cfg = cfg or QuadConfig()
    if not isinstance(seq, CoveringSequence):
        seq = CoveringSequence(tuple(seq))
    eff, name, mapped = _prepare(spec, which, seq)
    shp, cv, cw = eff.shape()
    total = DTerms(shp, name, cfg).total(mapped)
    if total == INF:
        return divergent("a window factor is infinite")
    return QuadResult(total * _scale(eff, cv, cw), 0.0, True)


# ---------------------------------------------------------------------------
# Local search
# ---------------------------------------------------------------------------


class _Budget(Exception):
    pass


@dataclass
class SearchResult:
    best_seq: CoveringSequence
    best_value: float
    evaluations: int
    trace: list

    def to_dict(self) -> dict:
        return {
            "best_seq": self.best_seq.to_list(),
            "best_value": self.best_value,
            "evaluations": self.evaluations,
        }


class _Searcher:
    def __init__(self, terms: DTerms, budget: int, factor: float):
        self.terms = terms
        self.budget = budget
        self.factor = factor
        self.count = 0
        self.best_val = -1.0
        self.best_pts: tuple = ()
        self.trace: list = []

    def evaluate(self, interior) -> float:
        if self.count >= self.budget:
            raise _Budget()
        interior = tuple(sorted(interior))
        if len(set(interior)) != len(interior) or any(not (0 < x < INF) for x in interior):
            return -1.0
        self.count += 1
        val = self.terms.total(CoveringSequence.from_interior(interior))
        if val > self.best_val:
            self.best_val = val
            self.best_pts = interior
        self.trace.append(self.best_val)
        if self.best_val == INF:
            raise _Budget()
        return val


def _golden_relocate(S: _Searcher, pts: list, i: int, iters: int) -> tuple[list, float]:
    """Golden-section search in log scale for point i between its neighbours."""
    lo = pts[i - 1] if i > 0 else pts[i] * 1e-3
    hi = pts[i + 1] if i + 1 < len(pts) else pts[i] * 1e3
    a, b = math.log(lo), math.log(hi)
    if b - a < 1e-9:
        return pts, -1.0
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    best_pts, best = list(pts), -1.0

    def f(x):
        nonlocal best_pts, best
        trial = list(pts)
        trial[i] = math.exp(x)
        val = S.evaluate(trial)
        if val > best:
            best, best_pts = val, trial
        return val

    x1, x2 = b - gr * (b - a), a + gr * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + gr * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - gr * (b - a)
            f1 = f(x1)
    return best_pts, best


def search_sup_D(
    spec: ProblemSpec,
    which: str,
    budget: int = 200,
    seed: int = 0,
    cfg: QuadConfig | None = None,
    window: tuple = (1e-6, 1e6),
) -> SearchResult:
    """Local search for a covering sequence with large D-sum.

    Starts from three-point sequences {0, m, inf} with m on a log grid, then
    applies random insert / delete / golden-section relocate moves to the
    incumbent and keeps strict improvements.  Evaluations are counted
    against ``budget``; the search is deterministic given ``seed`` and the
    best value is nondecreasing in ``budget``.
    """
    if budget < 10:
        raise ValueError("budget must be at least 10")
    cfg = cfg or QuadConfig()
    eff, name, _ = _prepare(spec, which)
    shp, cv, cw = eff.shape()
    factor = _scale(eff, cv, cw)
    S = _Searcher(DTerms(shp, name, cfg), budget, factor)
    rng = np.random.default_rng(seed)
    lw, hw = math.log(window[0]), math.log(window[1])
    try:
        for m in np.exp(np.linspace(lw, hw, 9)):
            S.evaluate([float(m)])
        cur = list(S.best_pts)
        cur_val = S.best_val
        while True:
            move = rng.integers(3)
            if move == 0:
                # insert a log-uniform point
                x = float(math.exp(rng.uniform(lw, hw)))
                trial = sorted(cur + [x])
                val = S.evaluate(trial)
                if val > cur_val:
                    cur, cur_val = trial, val
                    i = trial.index(x)
                    cur2, val2 = _golden_relocate(S, cur, i, 12)
                    if val2 > cur_val:
                        cur, cur_val = cur2, val2
            elif move == 1:
                if len(cur) < 2:
                    continue
                i = int(rng.integers(len(cur)))
                trial = cur[:i] + cur[i + 1 :]
                val = S.evaluate(trial)
                if val > cur_val:
                    cur, cur_val = trial, val
            else:
                i = int(rng.integers(len(cur)))
                trial, val = _golden_relocate(S, cur, i, 10)
                if val > cur_val:
                    cur, cur_val = trial, val
    except _Budget:
        pass
    best_seq = CoveringSequence.from_interior(S.best_pts)
    if which.startswith("Lai") and spec.direction == "dual_Hstar":
        best_seq = best_seq.reflected()
    best = S.best_val * factor if S.best_val < INF else INF
    trace = [v * factor if v < INF else INF for v in S.trace]
    return SearchResult(best_seq, best, S.count, trace)
