"""Piecewise-analytic weights on (0, inf), their primitives, tails and reflections.

A weight is stored as an ordered tuple of pieces covering (0, inf).  On a piece
[lo, hi) the value is

    coef * t**shift * (sum_j c_j t**e_j)**beta * exp(-rate * t**sigma)

with sigma = +1 or -1.  Plain powers, exponential decay, polynomials and
log-log interpolated tables all fit this form, and the form is closed under
powers, multiplication by t**k and the reflection t -> 1/t.  Integrals use
closed forms (power law, incomplete gamma) whenever the piece has a single
term; otherwise a cached composite Gauss-Legendre table in log t is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import special

INF = math.inf

# Numeric tables cover [_TABLE_LO, _TABLE_HI]; beyond that the dominant power
# law of the piece is integrated in closed form.
_TABLE_LO = 1e-16
_TABLE_HI = 1e16
_PANEL_WIDTH = 0.05
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


class WeightError(ValueError):
    """Raised for weights violating the weight invariants."""


# ---------------------------------------------------------------------------
# Exponents
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentTriple:
    """Exponents (p, q) with the derived quantities r, p', q'."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.q > 0 and math.isfinite(self.q)):
            raise ValueError(f"q must be a positive finite number, got {self.q}")
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"p must be a positive finite number, got {self.p}")

    @property
    def r(self) -> float:
        """r = pq/(p-q); +inf when p == q."""
        if self.p == self.q:
            return INF
        return self.p * self.q / (self.p - self.q)

    @property
    def p_prime(self) -> float:
        if self.p == 1:
            return INF
        return self.p / (self.p - 1)

    @property
    def q_prime(self) -> float:
        if self.q == 1:
            return INF
        return self.q / (self.q - 1)

    def theta_cap(self, theta: float) -> float:
        """Level ratio 2 * theta**q used by the block construction."""
        return 2.0 * theta**self.q

    @property
    def regime(self) -> str:
        p, q = self.p, self.q
        if p < 1:
            return "p<1"
        if q < 1 and p > 1:
            return "q<1<p"
        if q < 1 and p == 1:
            return "q<1=p"
        if 1 < p <= q:
            return "1<p<=q"
        if 1 < q < p:
            return "1<q<p"
        return "other"


# ---------------------------------------------------------------------------
# Pieces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    """One analytic piece of a weight on [lo, hi)."""

    lo: float
    hi: float
    terms: tuple = ((1.0, 0.0),)
    beta: float = 1.0
    coef: float = 1.0
    shift: float = 0.0
    rate: float = 0.0
    sigma: int = 1

    # -- classification -------------------------------------------------
    @property
    def nonzero_terms(self) -> tuple:
        return tuple((c, e) for c, e in self.terms if c != 0.0)

    @property
    def is_zero_sum(self) -> bool:
        return self.coef == 0.0 or len(self.nonzero_terms) == 0

    @property
    def is_zero(self) -> bool:
        """Piece vanishes identically."""
        if self.coef == 0.0:
            return True
        return len(self.nonzero_terms) == 0 and self.beta > 0

    @property
    def is_infinite(self) -> bool:
        """Piece is +inf identically (zero base raised to a negative power)."""
        return self.coef != 0.0 and len(self.nonzero_terms) == 0 and self.beta < 0

    @property
    def single_term(self):
        """(C, E) with value C t**E exp(-rate t**sigma), or None."""
        nz = self.nonzero_terms
        if len(nz) != 1:
            return None
        c, e = nz[0]
        if c < 0:
            return None
        return self.coef * c**self.beta, self.shift + self.beta * e

    # -- evaluation -----------------------------------------------------
    def value(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_zero:
            return np.zeros_like(t)
        if self.is_infinite:
            return np.full_like(t, INF)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
            base = np.zeros_like(t)
            for c, e in self.nonzero_terms:
                base = base + c * t**e
            base = np.maximum(base, 0.0)
            out = self.coef * t**self.shift * base**self.beta
            if self.rate != 0.0:
                out = out * np.exp(-self.rate * t ** float(self.sigma))
            out = np.where(np.isnan(out), 0.0, out) if self.beta > 0 else out
        return out

    def asymptotic(self, at_zero: bool):
        """Dominant (C, E, rate_kind) near 0 or inf: value ~ C t**E * exp part.

        rate_kind is 'none', 'decay' or 'growth' for the exponential factor.
        """
        nz = self.nonzero_terms
        exps = [e for _, e in nz]
        e_dom = min(exps) if at_zero else max(exps)
        c_dom = sum(c for c, e in nz if e == e_dom)
        if c_dom <= 0:
            raise WeightError("dominant term of a weight piece is not positive")
        C = self.coef * c_dom**self.beta
        E = self.shift + self.beta * e_dom
        kind = "none"
        if self.rate != 0.0:
            # exp(-rate t**sigma) matters at inf for sigma=1, at 0 for sigma=-1
            relevant = (self.sigma == 1 and not at_zero) or (self.sigma == -1 and at_zero)
            if relevant:
                kind = "decay" if self.rate > 0 else "growth"
        return C, E, kind

    # -- transformations ------------------------------------------------
    def powered(self, k: float) -> "Piece":
        return replace(
            self,
            coef=self.coef**k if self.coef != 0.0 else (0.0 if k > 0 else INF),
            shift=self.shift * k,
            beta=self.beta * k,
            rate=self.rate * k,
        )

    def reflected(self, extra_shift: float) -> "Piece":
        """Piece of s**extra_shift * value(1/s) on the reflected interval."""
        lo = 1.0 / self.hi if self.hi != INF else 0.0
        hi = 1.0 / self.lo if self.lo != 0.0 else INF
        return Piece(
            lo=lo,
            hi=hi,
            terms=tuple((c, -e) for c, e in self.terms),
            beta=self.beta,
            coef=self.coef,
            shift=-self.shift + extra_shift,
            rate=self.rate,
            sigma=-self.sigma,
        )


def _power_integral(C, E, a, b):
    """Integral of C t**E over [a, b] (arrays; 0 <= a <= b <= inf)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = E + 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if k == 0.0:
            out = C * (np.log(b) - np.log(a))
        elif k > 0:
            # b**k - a**k = b**k * (1 - (a/b)**k), stable for a close to b
            ratio = np.where(b == INF, 0.0, a / np.where(b == INF, 1.0, b))
            out = np.where(
                b == INF, INF, C * b**k * (-np.expm1(k * np.log(ratio))) / k
            )
        else:
            ratio = np.where(a == 0.0, 0.0, b / np.where(a == 0.0, 1.0, a))
            ratio = np.where(b == INF, INF, ratio)
            # a**k - b**k = a**k * (1 - (b/a)**k) with k < 0
            out = np.where(
                a == 0.0,
                INF,
                C * a**k * (-np.expm1(k * np.log(ratio))) / (-k),
            )
        out = np.where(b <= a, 0.0, out)
    return out


def _gamma_integral(C, E, lam, a, b):
    """Integral of C t**E exp(-lam t) on [a, b] for E > -1, lam > 0."""
    s = E + 1.0
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    xa = lam * a
    xb = np.where(b == INF, INF, lam * b)
    logpref = special.gammaln(s) - s * math.log(lam)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        use_upper = xa > s
        diff_lower = special.gammainc(s, xb) - special.gammainc(s, xa)
        diff_upper = special.gammaincc(s, xa) - special.gammaincc(s, xb)
        diff = np.where(use_upper, diff_upper, diff_lower)
        out = C * np.exp(logpref) * np.maximum(diff, 0.0)
    return np.where(b <= a, 0.0, out)


@lru_cache(maxsize=256)
def _numeric_table(piece: Piece):
    """Cumulative Gauss-Legendre tables in log t for a piece without closed form."""
    lo_t = max(piece.lo, _TABLE_LO)
    hi_t = min(piece.hi, _TABLE_HI)
    if hi_t <= lo_t:
        lo_t, hi_t = piece.lo, piece.hi
    u0, u1 = math.log(lo_t), math.log(hi_t)
    n = max(16, int(math.ceil((u1 - u0) / _PANEL_WIDTH)))
    edges = np.linspace(u0, u1, n + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    u = mid[:, None] + half[:, None] * _GL_X[None, :]
    t = np.exp(u)
    vals = piece.value(t) * t
    panel = (vals * _GL_W[None, :]).sum(axis=1) * half
    prefix = np.concatenate([[0.0], np.cumsum(panel)])
    suffix = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
    left_tail = _asymptotic_tail(piece, at_zero=True, cut=lo_t) if piece.lo < lo_t else 0.0
    right_tail = _asymptotic_tail(piece, at_zero=False, cut=hi_t) if piece.hi > hi_t else 0.0
    return edges, prefix, suffix, float(left_tail), float(right_tail)


def _asymptotic_tail(piece: Piece, at_zero: bool, cut: float) -> float:
    C, E, kind = piece.asymptotic(at_zero)
    if kind == "decay":
        return 0.0
    if kind == "growth":
        return INF
    if at_zero:
        return float(_power_integral(C, E, 0.0, cut))
    return float(_power_integral(C, E, cut, INF))


def _gl_partial(piece: Piece, ua: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Gauss-Legendre integral over [exp(ua), exp(ub)] with ub - ua <= one panel."""
    half = 0.5 * (ub - ua)
    mid = 0.5 * (ub + ua)
    u = mid[:, None] + half[:, None] * _GL_X[None, :]
    t = np.exp(u)
    vals = piece.value(t) * t
    return (vals * _GL_W[None, :]).sum(axis=1) * half


def _numeric_integral(piece: Piece, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    edges, prefix, suffix, left_tail, right_tail = _numeric_table(piece)
    u0, u1 = edges[0], edges[-1]
    n = len(edges) - 1
    h = (u1 - u0) / n
    out = np.zeros_like(a)
    # portions outside the tabulated window use the dominant power law
    lo_t, hi_t = math.exp(u0), math.exp(u1)
    below = a < lo_t
    if np.any(below):
        C, E, kind = piece.asymptotic(True)
        if kind == "decay":
            part = 0.0
        elif kind == "growth":
            part = INF
        else:
            part = _power_integral(C, E, a[below], np.minimum(b[below], lo_t))
        out[below] += part
    above = b > hi_t
    if np.any(above):
        C, E, kind = piece.asymptotic(False)
        if kind == "decay":
            part = 0.0
        elif kind == "growth":
            part = INF
        else:
            part = _power_integral(C, E, np.maximum(a[above], hi_t), b[above])
        out[above] += part
    aa = np.clip(a, lo_t, hi_t)
    bb = np.clip(b, lo_t, hi_t)
    inside = bb > aa
    if np.any(inside):
        ua = np.log(aa[inside])
        ub = np.log(bb[inside])
        ia = np.clip(((ua - u0) / h).astype(int), 0, n - 1)
        ib = np.clip(((ub - u0) / h).astype(int), 0, n - 1)
        same = ia == ib
        res = np.zeros_like(ua)
        if np.any(same):
            res[same] = _gl_partial(piece, ua[same], ub[same])
        diff = ~same
        if np.any(diff):
            ia_d, ib_d = ia[diff], ib[diff]
            head = _gl_partial(piece, ua[diff], edges[ia_d + 1])
            tail = _gl_partial(piece, edges[ib_d], ub[diff])
            via_prefix = prefix[ib_d] - prefix[ia_d + 1]
            via_suffix = suffix[ia_d + 1] - suffix[ib_d]
            middle = np.where(prefix[ib_d] <= suffix[ia_d + 1], via_prefix, via_suffix)
            res[diff] = head + np.maximum(middle, 0.0) + tail
        out[inside] += res
    return out


def piece_integral(piece: Piece, a, b) -> np.ndarray:
    """Integral of a piece over [a, b] intersected with the piece's interval."""
    a = np.maximum(np.asarray(a, dtype=float), piece.lo)
    b = np.minimum(np.asarray(b, dtype=float), piece.hi)
    a, b = np.broadcast_arrays(a, b)
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    out = np.zeros(a.shape)
    mask = b > a
    if not np.any(mask) or piece.is_zero:
        return out
    if piece.is_infinite:
        out[mask] = INF
        return out
    am, bm = a[mask], b[mask]
    single = piece.single_term
    if single is None and piece.beta == 1.0 and piece.rate == 0.0:
        # linear combination of powers: integrate term by term
        total = np.zeros_like(am)
        for c, e in piece.nonzero_terms:
            total = total + _power_integral(piece.coef * c, piece.shift + e, am, bm)
        if np.all(np.isfinite(total)) and np.all(total >= 0):
            out[mask] = total
            return out
        out[mask] = _numeric_integral(piece, am, bm)
        return out
    if single is not None:
        C, E = single
        if piece.rate == 0.0:
            out[mask] = _power_integral(C, E, am, bm)
            return out
        if piece.rate > 0 and piece.sigma == 1 and E > -1:
            out[mask] = _gamma_integral(C, E, piece.rate, am, bm)
            return out
        if piece.rate > 0 and piece.sigma == -1 and E < -1:
            with np.errstate(divide="ignore"):
                ua = np.where(bm == INF, 0.0, 1.0 / bm)
                ub = np.where(am == 0.0, INF, 1.0 / am)
            out[mask] = _gamma_integral(C, -E - 2.0, piece.rate, ua, ub)
            return out
    out[mask] = _numeric_integral(piece, am, bm)
    return out


def piece_sup(piece: Piece, a: float, b: float) -> float:
    """Supremum of a piece on [a, b] intersected with its interval (closure)."""
    lo, hi = max(a, piece.lo), min(b, piece.hi)
    if hi <= lo or piece.is_zero:
        return 0.0
    if piece.is_infinite:
        return INF
    pts = [lo, hi]
    if piece.single_term is not None and piece.rate != 0.0:
        _, E = piece.single_term
        # stationary point of t**E exp(-rate t**sigma)
        if E * piece.sigma * piece.rate > 0:
            crit = (E / (piece.rate * piece.sigma)) ** (1.0 / piece.sigma)
            if lo < crit < hi:
                pts.append(crit)
    elif piece.single_term is None:
        lo_s = max(lo, 1e-300)
        hi_s = hi if hi < INF else max(lo_s, 1.0) * 1e12
        pts.extend(np.geomspace(lo_s, hi_s, 257).tolist())
    pts_arr = np.array(pts, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = piece.value(np.where(pts_arr == 0.0, 1e-300, pts_arr))
    if hi == INF:
        C, E, kind = piece.asymptotic(False)
        if kind == "growth" or (kind == "none" and E > 0):
            return INF
    if lo == 0.0:
        C, E, kind = piece.asymptotic(True)
        if kind == "growth" or (kind == "none" and E < 0):
            return INF
    vals = np.where(np.isnan(vals), 0.0, vals)
    return float(np.max(vals))


# ---------------------------------------------------------------------------
# Weights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightSpec:
    """A weight on (0, inf) given by analytic pieces and a positive scale.

    The scale multiplies every piece.  It is kept separate so that scaling
    laws of functionals can be applied exactly rather than re-integrated.
    With ``strict`` the weight invariant 0 < W(t) < inf is enforced; derived
    densities (powers, reflections) are built non-strict.
    """

    pieces: tuple
    scale: float = 1.0
    strict: bool = True

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise WeightError("a weight needs at least one piece")
        if pieces[0].lo != 0.0:
            raise WeightError(f"pieces must start at 0, first piece starts at {pieces[0].lo}")
        for i, pc in enumerate(pieces):
            if not pc.hi > pc.lo:
                raise WeightError(f"piece {i}: empty interval [{pc.lo}, {pc.hi})")
            if i + 1 < len(pieces) and pieces[i + 1].lo != pc.hi:
                raise WeightError(
                    f"piece {i + 1}: starts at {pieces[i + 1].lo}, expected {pc.hi} (pieces must be contiguous)"
                )
            if pc.coef < 0:
                raise WeightError(f"piece {i}: negative coefficient")
            if pc.sigma not in (1, -1):
                raise WeightError(f"piece {i}: sigma must be +1 or -1")
        if pieces[-1].hi != INF:
            pieces = pieces + (Piece(pieces[-1].hi, INF, terms=((0.0, 0.0),)),)
        object.__setattr__(self, "pieces", pieces)
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise WeightError(f"scale must be positive and finite, got {self.scale}")
        for i, pc in enumerate(pieces):
            if any(c < 0 for c, _ in pc.terms):
                probe_hi = pc.hi if pc.hi < INF else max(pc.lo, 1.0) * 1e6
                probe_lo = pc.lo if pc.lo > 0 else min(pc.hi, 1.0) * 1e-6
                probe = np.geomspace(probe_lo, probe_hi, 64)
                if np.any(pc.value(probe) < 0):
                    raise WeightError(f"piece {i}: takes negative values")
        if self.strict:
            first = pieces[0]
            if first.is_zero:
                raise WeightError("weight vanishes near 0, so W(t) = 0 for small t")
            for i, pc in enumerate(pieces):
                end = pc.hi if pc.hi < INF else max(pc.lo * 2.0, 1.0)
                val = piece_integral(pc, pc.lo, end)
                if not np.isfinite(val):
                    if pc.lo == 0.0:
                        raise WeightError(
                            f"piece {i}: not integrable at 0 (power pieces touching 0 need exponent > -1)"
                        )
                    raise WeightError(f"piece {i}: not integrable on [{pc.lo}, {end}]")

    # -- constructors ---------------------------------------------------
    @classmethod
    def power(cls, coeff: float = 1.0, exponent: float = 0.0) -> "WeightSpec":
        """w(t) = coeff * t**exponent on (0, inf)."""
        return cls((power_piece(0.0, INF, coeff, exponent),))

    @classmethod
    def from_pieces(cls, pieces: Iterable[Piece], scale: float = 1.0, strict: bool = True) -> "WeightSpec":
        return cls(tuple(pieces), scale=scale, strict=strict)

    # -- basic queries --------------------------------------------------
    @property
    def edges(self) -> np.ndarray:
        return np.array([pc.lo for pc in self.pieces] + [INF])

    @property
    def breakpoints(self) -> tuple:
        """Finite interior piece boundaries."""
        return tuple(pc.lo for pc in self.pieces[1:])

    @property
    def closed_form(self) -> bool:
        """True when every piece integrates in closed form."""
        for pc in self.pieces:
            if pc.is_zero or pc.is_infinite:
                continue
            st = pc.single_term
            if st is None:
                if not (pc.beta == 1.0 and pc.rate == 0.0):
                    return False
                continue
            if pc.rate != 0.0:
                E = st[1]
                if not ((pc.rate > 0 and pc.sigma == 1 and E > -1) or (pc.rate > 0 and pc.sigma == -1 and E < -1)):
                    return False
        return True

    def eval(self, t) -> np.ndarray:
        """Pointwise value w(t) for t > 0 (vectorized)."""
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1)
        out = np.zeros(flat.shape)
        idx = np.searchsorted(self.edges, flat, side="right") - 1
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        for i, pc in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = pc.value(flat[sel])
        out = self.scale * out
        if t.ndim == 0:
            return float(out[0])
        return out.reshape(t.shape)

    __call__ = eval

    def integral(self, a, b) -> np.ndarray:
        """Integral of w over [a, b] (vectorized; b may be inf)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        scalar = a.ndim == 0 and b.ndim == 0
        a, b = np.broadcast_arrays(a, b)
        shape = a.shape
        af = a.reshape(-1)
        bf = b.reshape(-1)
        out = np.zeros(af.shape)
        for pc in self.pieces:
            sel = (bf > pc.lo) & (af < pc.hi) & (bf > af)
            if np.any(sel):
                out[sel] += piece_integral(pc, af[sel], bf[sel])
        out = self.scale * out
        if scalar:
            return float(out[0])
        return out.reshape(shape)

    def primitive(self, t) -> np.ndarray:
        """W(t) = integral of w over (0, t)."""
        return self.integral(np.zeros_like(np.asarray(t, dtype=float)), t)

    def tail(self, t) -> np.ndarray:
        """Integral of w over (t, inf); +inf when divergent."""
        t = np.asarray(t, dtype=float)
        return self.integral(t, np.full_like(t, INF))

    def total(self) -> float:
        return float(self.integral(0.0, INF))

    def esssup(self, a: float, b: float) -> float:
        """Supremum of w over [a, b] (piecewise closure, so equals esssup for continuous pieces)."""
        best = 0.0
        for pc in self.pieces:
            if pc.hi > a and pc.lo < b:
                best = max(best, piece_sup(pc, a, b))
        return self.scale * best

    # -- derived weights --------------------------------------------------
    def shape(self) -> tuple["WeightSpec", float]:
        """(unit-scale weight, scale)."""
        return replace(self, scale=1.0), self.scale

    def scaled(self, factor: float) -> "WeightSpec":
        return replace(self, scale=self.scale * factor)

    def powered(self, k: float) -> "WeightSpec":
        """Pointwise power w**k (non-strict)."""
        return WeightSpec(tuple(pc.powered(k) for pc in self.pieces), scale=self.scale**k, strict=False)

    def times_power(self, k: float) -> "WeightSpec":
        """Pointwise product with t**k (non-strict)."""
        return WeightSpec(
            tuple(replace(pc, shift=pc.shift + k) for pc in self.pieces), scale=self.scale, strict=False
        )

    def truncated(self, m: float) -> "WeightSpec":
        """w * indicator of (0, m)."""
        new = []
        for pc in self.pieces:
            if pc.hi <= m:
                new.append(pc)
            elif pc.lo < m:
                new.append(replace(pc, hi=m))
        return WeightSpec(tuple(new), scale=self.scale, strict=self.strict)

    def primitive_weight(self) -> "WeightSpec":
        """The primitive V(t) = integral of w over (0, t) as a weight.

        Available for pure power pieces (exponent != -1), where the primitive
        on each piece is a two-term power sum.
        """
        new = []
        mass = 0.0
        for i, pc in enumerate(self.pieces):
            if pc.is_zero:
                new.append(Piece(pc.lo, pc.hi, terms=((mass, 0.0),)))
                continue
            st = pc.single_term
            if st is None or pc.rate != 0.0 or st[1] == -1.0:
                raise WeightError(f"piece {i}: primitive weight needs plain power pieces with exponent != -1")
            C, E = st
            k = E + 1.0
            base = mass - (C * pc.lo**k / k if pc.lo > 0 or k > 0 else 0.0)
            new.append(Piece(pc.lo, pc.hi, terms=((base, 0.0), (C / k, k))))
            mass = mass + float(piece_integral(pc, pc.lo, pc.hi))
        return WeightSpec(tuple(new), scale=self.scale, strict=False)

    def reflect(self, role: str, p: float | None = None) -> "WeightSpec":
        return reflect(self, role, p)

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "pieces": [
                {
                    "from": pc.lo,
                    "to": "inf" if pc.hi == INF else pc.hi,
                    "coef": pc.coef,
                    "shift": pc.shift,
                    "terms": [list(t) for t in pc.terms],
                    "beta": pc.beta,
                    "rate": pc.rate,
                    "sigma": pc.sigma,
                }
                for pc in self.pieces
            ],
        }


def power_piece(lo: float, hi: float, coeff: float, exponent: float) -> Piece:
    return Piece(lo, hi, terms=((float(coeff), float(exponent)),))


def exp_piece(lo: float, hi: float, coeff: float, rate: float, exponent: float = 0.0) -> Piece:
    """coeff * t**exponent * exp(-rate t)."""
    return Piece(lo, hi, terms=((float(coeff), float(exponent)),), rate=float(rate))


def polynomial_piece(lo: float, hi: float, terms: Sequence, power: float = 1.0) -> Piece:
    """(sum_j c_j t**e_j)**power."""
    return Piece(lo, hi, terms=tuple((float(c), float(e)) for c, e in terms), beta=float(power))


def tabulated_pieces(lo: float, hi: float, points: Sequence) -> list[Piece]:
    """Log-log interpolation of positive samples, constant beyond the first/last sample."""
    pts = sorted((float(t), float(y)) for t, y in points)
    if len(pts) < 2:
        raise WeightError("tabulated pieces need at least two samples")
    ts = [t for t, _ in pts]
    ys = [y for _, y in pts]
    if any(t <= 0 for t in ts) or any(y <= 0 for y in ys):
        raise WeightError("tabulated samples must have positive abscissae and values")
    if ts[0] < lo or ts[-1] > hi:
        raise WeightError("tabulated samples must lie inside the piece interval")
    out = []
    if ts[0] > lo:
        out.append(power_piece(lo, ts[0], ys[0], 0.0))
    for (t0, y0), (t1, y1) in zip(pts[:-1], pts[1:]):
        e = math.log(y1 / y0) / math.log(t1 / t0)
        out.append(power_piece(t0, t1, y0 * t0 ** (-e), e))
    if ts[-1] < hi:
        out.append(power_piece(ts[-1], hi, ys[-1], 0.0))
    return out


def eval_weight(ws: WeightSpec, t):
    return ws.eval(t)


def primitive(ws: WeightSpec, t):
    return ws.primitive(t)


def tail(ws: WeightSpec, t):
    return ws.tail(t)


def reflect(ws: WeightSpec, role: str, p: float | None = None) -> WeightSpec:
    """Weight transformed under t -> 1/t.

    role "w": s**-2 w(1/s).  role "v": s**(2p-2) v(1/s), the factor that makes
    the L^p(v) norm of f(1/s) s**-2 equal to that of f.  Applying the same
    reflection twice returns the original weight.
    """
    if role in ("w", "w_role"):
        extra = -2.0
    elif role in ("v", "v_role"):
        if p is None:
            raise ValueError("v-role reflection needs the exponent p")
        extra = 2.0 * p - 2.0
    else:
        raise ValueError(f"unknown reflection role {role!r}")
    pieces = tuple(pc.reflected(extra) for pc in reversed(ws.pieces))
    return WeightSpec(pieces, scale=ws.scale, strict=False)


@dataclass(frozen=True)
class DualDensity:
    """The density v**(1-p') for p > 1, or 1/v with esssup semantics for p = 1."""

    p: float
    mode: str
    density: WeightSpec

    def eval(self, t):
        return self.density.eval(t)


def dual_density(v: WeightSpec, p: float) -> DualDensity:
    if p < 1:
        raise ValueError("dual density needs p >= 1")
    if p == 1:
        return DualDensity(p, "esssup", v.powered(-1.0))
    pp = p / (p - 1.0)
    return DualDensity(p, "integral", v.powered(1.0 - pp))
