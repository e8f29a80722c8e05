"""Level sequences, the greedy block construction and auxiliary inequality audits.

Given a weight w with total mass Theta**K (Theta = 2 theta**q), the levels
t_k solve W(t_k) = Theta**k with t_K = inf.  Segment weights are
a_k = Theta**k U^q(t_k, t_{k+1}).  Blocks k_0 = mu, k_1 = mu + 1, ... are
formed greedily: k_{n+1} is the smallest j with

    sum_{k_n <= k < j} a_k >= Theta * sum_{k_{n-1} <= k < k_n} a_k.

The audit functions check the resulting inequalities and the sequence lemmas
used alongside them, reporting measured ratios where only the existence of a
constant is known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .functionals import kernel_integral
from .kernels import KernelSpec
from .quad import INF, QuadConfig, sup_on
from .weights import WeightSpec

HARD_TOL = 1e-9


class HypothesisError(ValueError):
    """Raised when the hypothesis of an audited inequality is violated."""


class MassError(ValueError):
    """Raised when a weight does not have the total mass Theta**K."""


# ---------------------------------------------------------------------------
# Levels
# ---------------------------------------------------------------------------


@dataclass
class LevelSequence:
    Theta: float
    K: int
    mu: int
    levels: dict  # k -> t_k for k in mu - 1 .. K

    def t(self, k: int) -> float:
        return self.levels[k]

    @property
    def indices(self) -> list:
        return list(range(self.mu, self.K))

    def to_dict(self) -> dict:
        return {
            "Theta": self.Theta,
            "K": self.K,
            "mu": self.mu,
            "levels": {str(k): ("inf" if t == INF else t) for k, t in sorted(self.levels.items())},
        }


def normalize_mass(w: WeightSpec, Theta: float) -> tuple[WeightSpec, int]:
    """Rescale w by a factor in [1, Theta) so that its mass is Theta**K; returns (w, K)."""
    total = w.total()
    if not math.isfinite(total):
        raise MassError("the level construction needs a weight of finite total mass")
    K = math.ceil(math.log(total) / math.log(Theta) - 1e-12)
    return w.scaled(Theta**K / total), K


def _leftmost_level(w: WeightSpec, target: float) -> float:
    """Smallest t with W(t) >= target by bisection (leftmost solution when W is flat)."""
    lo, hi = 1.0, 1.0
    while w.primitive(lo) >= target:
        lo *= 0.5
        if lo < 1e-300:
            return lo
    while w.primitive(hi) < target:
        hi *= 2.0
        if hi > 1e300:
            raise MassError(f"level {target} is not reached")
    for _ in range(200):
        mid = math.sqrt(lo * hi) if hi > 2.0 * lo else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if w.primitive(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def build_levels(w: WeightSpec, Theta: float, mu: int, K: int) -> LevelSequence:
    """Points with W(t_k) = Theta**k for k = mu - 1, ..., K - 1 and t_K = inf."""
    if not Theta > 1:
        raise ValueError("Theta must exceed 1")
    if mu > K - 2:
        raise ValueError(f"need mu <= K - 2, got mu={mu}, K={K}")
    total = w.total()
    target = Theta**K
    if not (math.isfinite(total) and abs(total - target) <= 1e-9 * target):
        raise MassError(
            f"total mass {total} differs from Theta**K = {target}; rescale w first (see normalize_mass)"
        )
    levels = {k: _leftmost_level(w, Theta**k) for k in range(mu - 1, K)}
    levels[K] = INF
    return LevelSequence(float(Theta), int(K), int(mu), levels)


def segment_weights(levels: LevelSequence, U: KernelSpec, q: float) -> np.ndarray:
    """a_k = Theta**k U^q(t_k, t_{k+1}) for k = mu, ..., K - 1 (last entry may be inf)."""
    out = []
    for k in levels.indices:
        u = float(U.eval(levels.t(k), levels.t(k + 1)))
        out.append(INF if u == INF else levels.Theta**k * u**q)
    return np.array(out)


# ---------------------------------------------------------------------------
# Blocks
# ---------------------------------------------------------------------------


@dataclass
class BlockStructure:
    block_indices: list  # k_0, ..., k_{N+1}
    A_set: list
    N: int
    terminal_rule: str  # "a" (last block closed by the growth rule) or "c"
    infinite_last_segment: bool

    def to_dict(self) -> dict:
        return {
            "block_indices": list(self.block_indices),
            "A_set": list(self.A_set),
            "N": self.N,
            "terminal_rule": self.terminal_rule,
            "infinite_last_segment": self.infinite_last_segment,
        }


def _block_sum(a: np.ndarray, mu: int, lo: int, hi: int) -> float:
    """sum of a_k for lo <= k < hi (indices relative to mu)."""
    vals = a[lo - mu : hi - mu]
    if np.any(vals == INF):
        return INF
    return math.fsum(vals)


def build_blocks(levels: LevelSequence, U: KernelSpec, q: float) -> BlockStructure:
    """Greedy block indices; an infinite segment weight satisfies the growth rule at once."""
    a = segment_weights(levels, U, q)
    mu, K, Theta = levels.mu, levels.K, levels.Theta
    ks = [mu, mu + 1]
    rule = "a"
    while True:
        n = len(ks) - 1
        if ks[n] == K:
            rule = "a"
            break
        prev = _block_sum(a, mu, ks[n - 1], ks[n])
        nxt = None
        for j in range(ks[n] + 1, K + 1):
            if _block_sum(a, mu, ks[n], j) >= Theta * prev:
                nxt = j
                break
        if nxt is None:
            ks.append(K)
            rule = "c"
            break
        ks.append(nxt)
    N = len(ks) - 2
    A = [n for n in range(1, N + 1) if ks[n] + 1 < ks[n + 1]]
    return BlockStructure(ks, A, N, rule, bool(a[-1] == INF))


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class BlockReport:
    ok: bool
    violations: list
    worst_12: float  # min over n of block_n / (Theta block_{n-1}); must be >= 1
    worst_13: float  # max over n of prefix / last block; must be <= Theta/(Theta-1)
    worst_14: float  # max over n in A of truncated / (Theta previous); must be < 1
    bound_13: float
    level_error: float  # max relative |W(t_k) - Theta^k|
    level_ok: bool  # within 1e-12 relative or the one-ulp resolution of W at t_k
    identity_18_error: float
    const_15: float
    const_57: float
    const_16: float
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in (
            "ok", "violations", "worst_12", "worst_13", "worst_14", "bound_13", "level_error", "level_ok",
            "identity_18_error", "const_15", "const_57", "const_16",
        )}


def _ratio(x: float, y: float) -> float:
    if y == 0.0:
        return 0.0 if x == 0.0 else INF
    if y == INF:
        return 0.0 if x < INF else 1.0
    return x / y


def verify_block_properties(
    levels: LevelSequence,
    blocks: BlockStructure,
    U: KernelSpec,
    q: float,
    w: WeightSpec | None = None,
    cfg: QuadConfig | None = None,
    t_samples: int = 4,
) -> BlockReport:
    """Check the block inequalities; with ``w`` also measure the integral comparisons.

    Hard checks: partition of the index range, growth of consecutive blocks
    (n <= N - 1), prefix bound with constant Theta/(Theta-1) (n <= N), strict
    reverse growth for multi-segment blocks.  Measured: the constants in the
    two-sided comparisons between the kernel integral of w and block sums.
    """
    cfg = cfg or QuadConfig()
    a = segment_weights(levels, U, q)
    mu, K, Theta = levels.mu, levels.K, levels.Theta
    ks = blocks.block_indices
    N = blocks.N
    viol = []
    S = lambda lo, hi: _block_sum(a, mu, lo, hi)

    # partition of Z_mu
    covered = {ks[n + 1] - 1 for n in range(N + 1)}
    for n in blocks.A_set:
        covered.update(range(ks[n], ks[n + 1] - 1))
    if covered != set(range(mu, K)) or ks[0] != mu or ks[1] != mu + 1 or ks[-1] != K:
        viol.append("partition of the index range fails")
    for n in range(N + 1):
        if not ks[n] + 1 <= ks[n + 1]:
            viol.append(f"indices not increasing at n={n}")

    worst12 = INF
    for n in range(1, N):
        r = _ratio(S(ks[n], ks[n + 1]), Theta * S(ks[n - 1], ks[n]))
        worst12 = min(worst12, r)
        if r < 1.0 - HARD_TOL:
            viol.append(f"growth inequality fails at n={n} (ratio {r})")
    bound13 = Theta / (Theta - 1.0)
    worst13 = 0.0
    for n in range(1, N + 1):
        r = _ratio(S(mu, ks[n]), S(ks[n - 1], ks[n]))
        worst13 = max(worst13, r)
        if r > bound13 * (1.0 + HARD_TOL):
            viol.append(f"prefix inequality fails at n={n} (ratio {r} > {bound13})")
    worst14 = 0.0
    for n in blocks.A_set:
        r = _ratio(S(ks[n], ks[n + 1] - 1), Theta * S(ks[n - 1], ks[n]))
        worst14 = max(worst14, r)
        if not r < 1.0 + HARD_TOL:
            viol.append(f"reverse growth fails at n={n} (ratio {r})")

    level_err = 0.0
    level_ok = True
    id18 = 0.0
    c15 = c57 = c16 = float("nan")
    if w is not None:
        for k in range(mu - 1, K):
            t = levels.t(k)
            dev = abs(float(w.primitive(t)) - Theta**k)
            level_err = max(level_err, dev / Theta**k)
            ulp_step = float(w.primitive(t)) - float(w.primitive(np.nextafter(t, 0.0)))
            if dev > max(1e-12 * Theta**k, ulp_step):
                level_ok = False
                viol.append(f"level k={k} misses Theta^k by {dev}")
        for k in range(mu - 1, K):
            seg = float(w.integral(levels.t(k), levels.t(k + 1)))
            id18 = max(id18, abs(seg - (Theta - 1.0) * Theta**k) / ((Theta - 1.0) * Theta**k))
        c15, c57, c16 = _measure_constants(levels, blocks, U, q, w, a, cfg, t_samples)
    return BlockReport(
        ok=not viol,
        violations=viol,
        worst_12=worst12,
        worst_13=worst13,
        worst_14=worst14,
        bound_13=bound13,
        level_error=level_err,
        level_ok=level_ok,
        identity_18_error=id18,
        const_15=c15,
        const_57=c57,
        const_16=c16,
    )


def _measure_constants(levels, blocks, U, q, w, a, cfg, t_samples):
    mu, K, Theta = levels.mu, levels.K, levels.Theta
    ks = blocks.block_indices
    N = blocks.N
    inner = cfg.tightened(0.1)
    S = lambda lo, hi: _block_sum(a, mu, lo, hi)
    t_mu = levels.t(mu)

    def lhs(t):
        return kernel_integral(U, w, t, t_mu, t, q, "left", inner).value

    block_of = {}
    for n in range(N + 1):
        for k in range(ks[n], ks[n + 1]):
            block_of[k] = n
    c15 = c57 = 0.0
    for k in range(mu, K):
        n = max(1, block_of[k])
        if n > N:
            continue
        base = S(ks[n - 1], ks[n])
        lo, hi = levels.t(k), levels.t(k + 1)
        if hi == INF:
            ts = lo * (1.0 + np.logspace(-2, 2, t_samples))
        else:
            ts = lo + (hi - lo) * np.linspace(1.0 / t_samples, 1.0, t_samples)
        for t in ts:
            L = lhs(float(t))
            u = float(U.eval(lo, float(t)))
            R = base + Theta**k * u**q
            c15 = max(c15, _ratio(L, R))
            if k <= ks[n + 1] - 2:
                c57 = max(c57, _ratio(L, base))
    c16 = 0.0
    ext = {-1: mu - 1}
    for n in range(0, N + 2):
        ext[n] = ks[n]
    for n in range(1, N + 1):
        top = levels.t(ext[n])
        bottom = levels.t(ext[n - 2])
        R = kernel_integral(U, w, top, bottom, top, q, "left", inner).value
        c16 = max(c16, _ratio(S(ext[n - 1], ext[n]), R))
    return c15, c57, c16


# ---------------------------------------------------------------------------
# Sequence lemmas
# ---------------------------------------------------------------------------


@dataclass
class RatioReport:
    ratio: float
    bound: Optional[float]
    ok: bool
    details: dict = field(default_factory=dict)


def _check_geometric(b: np.ndarray, D: float, name: str = "b"):
    if np.any(b < 0):
        raise HypothesisError(f"{name} must be nonnegative")
    for k in range(len(b) - 1):
        if b[k + 1] < D * b[k] * (1.0 - 1e-12):
            raise HypothesisError(f"{name}[{k + 1}] = {b[k + 1]} < {D} * {name}[{k}] = {D * b[k]}")


def _suffix_sums(c: np.ndarray) -> np.ndarray:
    return np.cumsum(c[::-1])[::-1]


def prop3_check(alpha: float, D: float, b_seq, c_seq) -> RatioReport:
    """Ratios of the sum and sup forms of the geometric-weight suffix inequality.

    No closed-form constant is asserted; ``ratio`` is the larger of the two
    forms and ``details`` holds both.
    """
    b = np.asarray(b_seq, dtype=float)
    c = np.asarray(c_seq, dtype=float)
    if len(b) != len(c):
        raise ValueError("b and c must have the same length")
    if not (alpha > 0 and D > 1):
        raise HypothesisError("need alpha > 0 and D > 1")
    _check_geometric(b, D)
    if np.any(c < 0):
        raise HypothesisError("c must be nonnegative")
    rhs = float(np.sum(c**alpha * b))
    lhs_sum = float(np.sum(_suffix_sums(c) ** alpha * b))
    suffix_max = np.maximum.accumulate(c[::-1])[::-1]
    lhs_sup = float(np.sum(suffix_max**alpha * b))
    r_sum, r_sup = _ratio(lhs_sum, rhs), _ratio(lhs_sup, rhs)
    return RatioReport(max(r_sum, r_sup), None, math.isfinite(max(r_sum, r_sup)), {"sum": r_sum, "sup": r_sup})


def prop89_bound(alpha: float, D: float) -> float:
    return D / (D ** (1.0 / alpha) - 1.0) ** alpha


def prop89_check(alpha: float, D: float, b_seq, c_seq) -> RatioReport:
    """sup_k (sum_{m>=k} c_m)^alpha b_k against D/(D^(1/alpha)-1)^alpha * sup_k c_k^alpha b_k."""
    b = np.asarray(b_seq, dtype=float)
    c = np.asarray(c_seq, dtype=float)
    if len(b) != len(c):
        raise ValueError("b and c must have the same length")
    if not (alpha > 0 and D > 1):
        raise HypothesisError("need alpha > 0 and D > 1")
    _check_geometric(b, D)
    if np.any(c < 0):
        raise HypothesisError("c must be nonnegative")
    lhs = float(np.max(_suffix_sums(c) ** alpha * b))
    rhs = float(np.max(c**alpha * b))
    bound = prop89_bound(alpha, D)
    r = _ratio(lhs, rhs)
    return RatioReport(r, bound, r <= bound * (1.0 + 1e-12))


def prop4_check(alpha: float, theta: float, t_seq, a_seq, U: KernelSpec) -> RatioReport:
    """sum_k a_k U^alpha(t_k, t_max) over sum_k a_k U^alpha(t_k, t_{k+1}).

    Needs a_{k+1} >= 2 theta^alpha a_k for consecutive entries of a (one
    entry fewer than t).  The constant is measured, not asserted.
    """
    t = np.asarray(t_seq, dtype=float)
    a = np.asarray(a_seq, dtype=float)
    if len(a) != len(t) - 1:
        raise ValueError("a needs one entry fewer than t")
    if np.any(np.diff(t) <= 0):
        raise HypothesisError("t must be increasing")
    _check_geometric(a, 2.0 * theta**alpha, "a")
    tmax = t[-1]
    lhs = math.fsum(float(a[k]) * float(U.eval(t[k], tmax)) ** alpha for k in range(len(a)) if a[k] > 0)
    rhs = math.fsum(float(a[k]) * float(U.eval(t[k], t[k + 1])) ** alpha for k in range(len(a)) if a[k] > 0)
    r = _ratio(lhs, rhs)
    return RatioReport(r, None, math.isfinite(r))


def effective_theta(alpha: float, theta: float) -> float:
    """A regularity constant of U^alpha given one of U: theta for alpha <= 1, theta^alpha 2^(alpha-1) above."""
    if alpha <= 1:
        return theta
    return theta**alpha * 2.0 ** (alpha - 1.0)


def prop59_check(
    alpha: float,
    theta: float,
    a: float,
    b: float,
    c: float,
    U: KernelSpec,
    psi: Callable[[np.ndarray], np.ndarray],
    cfg: QuadConfig | None = None,
) -> RatioReport:
    """Supremum splitting at b: LHS / (sup over [a,b] + sup over [b,c)) against 1 + theta_eff.

    psi must be nonnegative and nonincreasing; this is checked on a sample grid.

    ``bound`` uses the regularity constant of U^alpha (equal to theta for
    alpha <= 1); ``details['printed_bound']`` is 1 + theta.
    """
    if not (0 <= a < b < c):
        raise HypothesisError("need 0 <= a < b < c")
    if not (alpha > 0 and theta >= 1):
        raise HypothesisError("need alpha > 0 and theta >= 1")
    zs = np.linspace(a, c, 513)[:-1]
    vals = np.asarray(psi(zs), dtype=float)
    if np.any(vals < 0) or np.any(np.diff(vals) > 1e-12 * np.maximum(np.abs(vals[:-1]), 1e-300)):
        raise HypothesisError("psi must be nonnegative and nonincreasing on [a, c)")
    cfg = cfg or QuadConfig()
    g = lambda base: (lambda z: np.asarray(U.eval(base, z), dtype=float) ** alpha * np.asarray(psi(z), dtype=float))
    pts = [b]
    lhs = sup_on(g(a), a, c, cfg, pts).value
    s1 = sup_on(g(a), a, b, cfg).value
    s2 = sup_on(g(b), b, c, cfg).value
    # include the closed endpoints explicitly
    for z, base in ((a, a), (b, a)):
        s1 = max(s1, float(g(base)(np.array([z]))[0]))
    s2 = max(s2, float(g(b)(np.array([b]))[0]))
    r = _ratio(lhs, s1 + s2)
    bound = 1.0 + effective_theta(alpha, theta)
    return RatioReport(r, bound, r <= bound * (1.0 + 1e-9), {"printed_bound": 1.0 + theta, "lhs": lhs, "split": s1 + s2})
