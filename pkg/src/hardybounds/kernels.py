"""Regular kernels U(x, y) on 0 <= x < y and their sampled axiom checks.

A kernel is admissible when it is nonnegative, nonincreasing in x,
nondecreasing in y, positive at x = 0, and satisfies the quasi-triangle
inequality U(x, z) <= theta * (U(x, y) + U(y, z)) for x < y < z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .weights import INF, WeightSpec

FAMILIES = (
    "constant",
    "riemann_liouville",
    "logarithmic",
    "integral_of",
    "sup_of",
    "custom_tabulated",
    "reflected",
)


class KernelDomainError(ValueError):
    """Raised when a kernel is evaluated outside its domain."""


class KernelRegularityError(ValueError):
    """Raised when a tabulated kernel fails the sampled axiom checks."""


def _default_theta(family: str, alpha: float | None, power: float) -> float:
    if family in ("riemann_liouville", "logarithmic"):
        return max(1.0, 2.0 ** (alpha - 1.0))
    if family == "integral_of":
        return max(1.0, 2.0 ** (power - 1.0))
    return 1.0


@dataclass(frozen=True)
class KernelSpec:
    """Immutable kernel description.

    Use the class constructors (``constant``, ``riemann_liouville``, ...)
    rather than calling the dataclass directly.  ``theta`` is the declared
    regularity constant used by the block construction.
    """

    family: str
    theta: float
    alpha: Optional[float] = None
    u: Optional[WeightSpec] = None
    power: float = 1.0
    table: Optional[tuple] = None
    base: Optional["KernelSpec"] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if not (self.theta > 0 and math.isfinite(self.theta)):
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.family in ("riemann_liouville", "logarithmic"):
            if self.alpha is None or not self.alpha > 0:
                raise ValueError(f"{self.family} needs alpha > 0")
        if self.family in ("integral_of", "sup_of") and self.u is None:
            raise ValueError(f"{self.family} needs a density u")

    # -- constructors ---------------------------------------------------
    @classmethod
    def constant(cls, theta: float | None = None) -> "KernelSpec":
        return cls("constant", 1.0 if theta is None else theta)

    @classmethod
    def riemann_liouville(cls, alpha: float, theta: float | None = None) -> "KernelSpec":
        th = _default_theta("riemann_liouville", alpha, 1.0) if theta is None else theta
        return cls("riemann_liouville", th, alpha=float(alpha))

    @classmethod
    def logarithmic(cls, alpha: float, theta: float | None = None) -> "KernelSpec":
        th = _default_theta("logarithmic", alpha, 1.0) if theta is None else theta
        return cls("logarithmic", th, alpha=float(alpha))

    @classmethod
    def integral_of(cls, u: WeightSpec, power: float = 1.0, theta: float | None = None) -> "KernelSpec":
        """U(x, y) = (integral of u over (x, y))**power."""
        th = _default_theta("integral_of", None, power) if theta is None else theta
        return cls("integral_of", th, u=u, power=float(power))

    @classmethod
    def sup_of(cls, u: WeightSpec, theta: float | None = None) -> "KernelSpec":
        """U(x, y) = esssup of u over (x, y)."""
        return cls("sup_of", 1.0 if theta is None else theta, u=u)

    @classmethod
    def custom_tabulated(cls, xs, ys, values, theta: float, check: bool = True) -> "KernelSpec":
        """Kernel interpolated bilinearly in (log x, log y) from a full table.

        ``values[i][j]`` is U(xs[i], ys[j]); arguments outside the table are
        clamped to its edges.  The kernel must pass ``check_regularity``.
        """
        xs = tuple(float(x) for x in xs)
        ys = tuple(float(y) for y in ys)
        vals = tuple(tuple(float(v) for v in row) for row in values)
        if len(vals) != len(xs) or any(len(row) != len(ys) for row in vals):
            raise ValueError("table shape must be len(xs) x len(ys)")
        if any(x <= 0 for x in xs) or any(y <= 0 for y in ys):
            raise ValueError("table nodes must be positive")
        if list(xs) != sorted(set(xs)) or list(ys) != sorted(set(ys)):
            raise ValueError("table nodes must be strictly increasing")
        k = cls("custom_tabulated", float(theta), table=(xs, ys, vals))
        if check:
            lo = min(xs[0], ys[0])
            hi = max(xs[-1], ys[-1])
            rep = check_regularity(k, (lo / 4, hi * 4), samples=600, seed=0)
            if not rep.all_ok:
                raise KernelRegularityError(
                    f"tabulated kernel fails regularity checks (worst violation {rep.worst_violation:.3g})"
                )
        return k

    def reflected(self) -> "KernelSpec":
        """The kernel (x, y) -> U(1/y, 1/x); reflecting twice returns the original."""
        if self.family == "reflected":
            return self.base
        if self.family in ("constant",):
            return self
        return KernelSpec("reflected", self.theta, base=self)

    # -- evaluation -----------------------------------------------------
    @property
    def unbounded_in_y(self) -> bool:
        """True when U(x, y) -> inf as y -> inf for fixed x > 0."""
        return bool(np.isinf(self.eval(1.0, INF)))

    def eval(self, x, y):
        """U(x, y) for 0 <= x <= y (vectorized, y may be inf)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        scalar = x.ndim == 0 and y.ndim == 0
        out = self._eval(x, y)
        if scalar:
            return float(out)
        return out

    __call__ = eval

    def _eval(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        fam = self.family
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if fam == "constant":
                return np.ones(np.broadcast(x, y).shape)
            if fam == "riemann_liouville":
                d = np.maximum(y - x, 0.0)
                return np.where(y == INF, INF, d**self.alpha)
            if fam == "logarithmic":
                if np.any(x == 0):
                    raise KernelDomainError("logarithmic kernel is not defined at x = 0")
                d = np.maximum(np.log(y / x), 0.0)
                return np.where(y == INF, INF, d**self.alpha)
            if fam == "integral_of":
                xb, yb = np.broadcast_arrays(x, y)
                val = self.u.integral(xb, np.maximum(xb, yb))
                return np.asarray(val) ** self.power
            if fam == "sup_of":
                xb, yb = np.broadcast_arrays(x, y)
                flat = [self.u.esssup(a, b) if b > a else 0.0 for a, b in zip(xb.ravel(), yb.ravel())]
                return np.array(flat).reshape(xb.shape)
            if fam == "custom_tabulated":
                return self._interp(x, y)
            if fam == "reflected":
                xr = np.where(y == INF, 0.0, 1.0 / y)
                yr = np.where(x == 0.0, INF, 1.0 / x)
                return self.base._eval(xr, yr)
        raise ValueError(fam)

    def _interp(self, x, y):
        xs, ys, vals = self.table
        lx, ly = np.log(np.asarray(xs)), np.log(np.asarray(ys))
        V = np.asarray(vals)
        xb, yb = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        with np.errstate(divide="ignore"):
            ux = np.clip(np.log(np.maximum(xb, 1e-300)), lx[0], lx[-1])
            uy = np.clip(np.log(np.minimum(yb, 1e300)), ly[0], ly[-1])
        i = np.clip(np.searchsorted(lx, ux, side="right") - 1, 0, len(lx) - 2)
        j = np.clip(np.searchsorted(ly, uy, side="right") - 1, 0, len(ly) - 2)
        fx = (ux - lx[i]) / (lx[i + 1] - lx[i])
        fy = (uy - ly[j]) / (ly[j + 1] - ly[j])
        return (
            V[i, j] * (1 - fx) * (1 - fy)
            + V[i + 1, j] * fx * (1 - fy)
            + V[i, j + 1] * (1 - fx) * fy
            + V[i + 1, j + 1] * fx * fy
        )

    # -- serialization --------------------------------------------------
    def to_dict(self) -> dict:
        d = {"family": self.family, "theta": self.theta}
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.family == "integral_of":
            d["power"] = self.power
        return d


def eval_kernel(k: KernelSpec, x, y):
    return k.eval(x, y)


def _sample_triples(domain, samples: int, seed: int):
    lo, hi = domain
    if not (0 < lo < hi):
        raise ValueError("domain must satisfy 0 < lo < hi")
    rng = np.random.default_rng(seed)
    pts = np.exp(rng.uniform(math.log(lo), math.log(hi), size=(samples, 3)))
    pts.sort(axis=1)
    keep = (pts[:, 0] < pts[:, 1]) & (pts[:, 1] < pts[:, 2])
    return pts[keep]


def estimate_theta(k: KernelSpec, domain=(1e-3, 1e3), samples: int = 20000, seed: int = 0) -> float:
    """Largest sampled ratio U(x,z) / (U(x,y) + U(y,z)) over triples x < y < z.

    A lower bound for the smallest admissible theta.
    """
    if samples < 3:
        raise ValueError("samples must be >= 3")
    trip = _sample_triples(domain, samples, seed)
    x, y, z = trip[:, 0], trip[:, 1], trip[:, 2]
    num = k.eval(x, z)
    den = k.eval(x, y) + k.eval(y, z)
    ok = den > 0
    if not np.any(ok):
        return 0.0
    return float(np.max(num[ok] / den[ok]))


@dataclass
class RegularityReport:
    monotone_ok: bool
    subadditive_ok_with_declared_theta: bool
    positive_ok: bool
    worst_violation: float
    details: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return self.monotone_ok and self.subadditive_ok_with_declared_theta and self.positive_ok


def check_regularity(k: KernelSpec, domain=(1e-3, 1e3), samples: int = 4000, seed: int = 0) -> RegularityReport:
    """Sampled check of the kernel axioms with the declared theta.

    worst_violation is the largest relative excess over the allowed value
    (0 when every sampled inequality holds).
    """
    rtol = 1e-12
    trip = _sample_triples(domain, samples, seed)
    x, y, z = trip[:, 0], trip[:, 1], trip[:, 2]
    uxz, uxy, uyz = k.eval(x, z), k.eval(x, y), k.eval(y, z)
    # monotone: U(y, z) <= U(x, z) (nonincreasing in x), U(x, y) <= U(x, z) (nondecreasing in y)
    mono_excess = np.maximum(uyz - uxz, uxy - uxz) / np.maximum(uxz, 1e-300)
    neg = np.minimum(np.minimum(uxz, uxy), uyz) < 0
    bound = k.theta * (uxy + uyz)
    with np.errstate(invalid="ignore", divide="ignore"):
        sub_excess = np.where(bound > 0, (uxz - bound) / bound, np.where(uxz > 0, np.inf, 0.0))
    sub_excess = np.where(np.isnan(sub_excess), 0.0, sub_excess)
    if k.family == "logarithmic" or (k.family == "reflected" and k.base.family == "logarithmic"):
        pos_vals = np.ones(1) if k.family == "logarithmic" else k.eval(0.0, trip[:, 2])
    else:
        pos_vals = k.eval(np.zeros(len(trip)), trip[:, 2])
    positive_ok = bool(np.all(pos_vals > 0))
    worst_mono = float(np.max(mono_excess, initial=0.0))
    worst_sub = float(np.max(sub_excess, initial=0.0))
    monotone_ok = worst_mono <= rtol and not np.any(neg)
    sub_ok = worst_sub <= rtol
    worst = max(0.0, worst_mono if not monotone_ok else 0.0, worst_sub if not sub_ok else 0.0)
    return RegularityReport(
        monotone_ok=bool(monotone_ok),
        subadditive_ok_with_declared_theta=bool(sub_ok),
        positive_ok=positive_ok,
        worst_violation=worst,
        details={"max_sub_ratio": float(np.max(uxz / np.where(uxy + uyz > 0, uxy + uyz, np.inf), initial=0.0))},
    )
