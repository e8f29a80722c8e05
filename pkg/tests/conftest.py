import numpy as np
import pytest

from hardybounds.config import load_suite
from hardybounds.functionals import ProblemSpec
from hardybounds.kernels import KernelSpec
from hardybounds.weights import INF, ExponentTriple, WeightSpec, polynomial_piece, power_piece


def pw(*segs, scale=1.0):
    """Weight from (lo, hi, coeff, exponent) power segments."""
    return WeightSpec(tuple(power_piece(a, b, c, e) for a, b, c, e in segs), scale=scale)


W_H1 = pw((0, 1, 1.0, 0.0), (1, INF, 1.0, -3.0))
V_H1 = pw((0, 1, 1.0, -0.5), (1, INF, 1.0, 3.0))
V_LIN = WeightSpec((polynomial_piece(0, INF, [(1, 1), (1, 0)]),))
V_H2 = pw((0, 1, 1.0, 0.5), (1, INF, 1.0, 4.0))
V_M = pw((0, 1, 1.0, 0.0), (1, INF, 1.0, 3.0))

# the same weights as plain callables for the independent reference
w_h1 = lambda t: np.where(t < 1, 1.0, t**-3.0)
v_h1 = lambda t: np.where(t < 1, t**-0.5, t**3.0)
v_lin = lambda t: t + 1.0
v_h2 = lambda t: np.where(t < 1, t**0.5, t**4.0)
v_m = lambda t: np.where(t < 1, 1.0, t**3.0)
k_const = lambda x, y: np.ones_like(x)
k_rl = lambda a: (lambda x, y: (y - x) ** a)


def spec_of(v, w, U, p, q, direction="dual_Hstar", cone="all_nonneg"):
    return ProblemSpec(v, w, U, ExponentTriple(p, q), direction, cone)


def h1(U=None, direction="primal_H"):
    return spec_of(V_H1, W_H1, U or KernelSpec.constant(), 2.0, 0.5, direction)


def p1(U=None, direction="dual_Hstar"):
    return spec_of(V_LIN, W_H1, U or KernelSpec.constant(), 1.0, 0.5, direction)


def mono(p, v=V_M, u=None, w=W_H1):
    u = u or WeightSpec.power(1.0, 0.0)
    return spec_of(v, w, KernelSpec.integral_of(u), p, 0.5, "dual_Hstar", "nonincreasing")


@pytest.fixture(scope="session")
def suite():
    return load_suite()


# one PASS/FAIL line per acceptance criterion in the terminal summary
_CRITERIA: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (rep.when != "call" and not rep.failed):
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _CRITERIA[marker.args[0]] = ("PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
