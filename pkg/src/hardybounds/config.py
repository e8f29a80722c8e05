"""Declarative experiment configuration (one JSON document per experiment)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .functionals import CONES, DIRECTIONS, ProblemSpec
from .kernels import KernelSpec
from .quad import QuadConfig
from .weights import (
    ExponentTriple,
    WeightSpec,
    exp_piece,
    polynomial_piece,
    power_piece,
    tabulated_pieces,
)

INF = math.inf


class ConfigError(ValueError):
    """Malformed configuration; the message starts with the offending field path."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


def _number(d: dict, key: str, path: str, default: Any = ..., allow_inf: bool = False) -> float:
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    val = d[key]
    if allow_inf and val in ("inf", "Infinity"):
        return INF
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {val!r}")
    val = float(val)
    if math.isnan(val) or (math.isinf(val) and not allow_inf):
        raise ConfigError(f"{path}.{key}", "expected a finite number")
    return val


def _integer(d: dict, key: str, path: str, default: int, minimum: int | None = None) -> int:
    val = d.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {val!r}")
    if minimum is not None and val < minimum:
        raise ConfigError(f"{path}.{key}", f"must be at least {minimum}, got {val}")
    return val


def _obj(d: Any, path: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(path, f"expected an object, got {type(d).__name__}")
    return d


def _check_keys(d: dict, allowed: set, path: str):
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown field")


def parse_weight(d: Any, path: str) -> WeightSpec:
    d = _obj(d, path)
    _check_keys(d, {"pieces", "scale"}, path)
    raw = d.get("pieces")
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}.pieces", "expected a nonempty list of pieces")
    pieces = []
    for i, pd in enumerate(raw):
        pp = f"{path}.pieces[{i}]"
        pd = _obj(pd, pp)
        lo = _number(pd, "from", pp)
        hi = _number(pd, "to", pp, allow_inf=True)
        form = pd.get("form", "power")
        if form == "power":
            _check_keys(pd, {"from", "to", "form", "coeff", "exponent"}, pp)
            coeff = _number(pd, "coeff", pp, 1.0)
            if coeff < 0:
                raise ConfigError(f"{pp}.coeff", "must be nonnegative")
            pieces.append(power_piece(lo, hi, coeff, _number(pd, "exponent", pp, 0.0)))
        elif form == "exp_decay":
            _check_keys(pd, {"from", "to", "form", "coeff", "rate", "exponent"}, pp)
            rate = _number(pd, "rate", pp)
            if rate <= 0:
                raise ConfigError(f"{pp}.rate", "must be positive")
            pieces.append(exp_piece(lo, hi, _number(pd, "coeff", pp, 1.0), rate, _number(pd, "exponent", pp, 0.0)))
        elif form == "polynomial":
            _check_keys(pd, {"from", "to", "form", "terms", "power"}, pp)
            terms = pd.get("terms")
            if not isinstance(terms, list) or not terms:
                raise ConfigError(f"{pp}.terms", "expected a list of [coeff, exponent] pairs")
            parsed = []
            for j, t in enumerate(terms):
                if not (isinstance(t, list) and len(t) == 2 and all(isinstance(x, (int, float)) for x in t)):
                    raise ConfigError(f"{pp}.terms[{j}]", "expected [coeff, exponent]")
                parsed.append((float(t[0]), float(t[1])))
            pieces.append(polynomial_piece(lo, hi, parsed, _number(pd, "power", pp, 1.0)))
        elif form == "tabulated":
            _check_keys(pd, {"from", "to", "form", "points"}, pp)
            pts = pd.get("points")
            if not isinstance(pts, list):
                raise ConfigError(f"{pp}.points", "expected a list of [t, value] pairs")
            try:
                pieces.extend(tabulated_pieces(lo, hi, pts))
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"{pp}.points", str(exc)) from None
        else:
            raise ConfigError(f"{pp}.form", f"unknown form {form!r} (power, exp_decay, polynomial, tabulated)")
    try:
        return WeightSpec(tuple(pieces), scale=_number(d, "scale", path, 1.0))
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_kernel(d: Any, path: str) -> KernelSpec:
    d = _obj(d, path)
    fam = d.get("family")
    theta = d.get("theta")
    if theta is not None:
        theta = _number(d, "theta", path)
    try:
        if fam == "constant":
            return KernelSpec.constant(theta)
        if fam in ("riemann_liouville", "logarithmic"):
            alpha = _number(d, "alpha", path)
            ctor = KernelSpec.riemann_liouville if fam == "riemann_liouville" else KernelSpec.logarithmic
            return ctor(alpha, theta)
        if fam == "integral_of":
            return KernelSpec.integral_of(parse_weight(d.get("u"), f"{path}.u"), _number(d, "power", path, 1.0), theta)
        if fam == "sup_of":
            return KernelSpec.sup_of(parse_weight(d.get("u"), f"{path}.u"), theta)
        if fam == "custom_tabulated":
            if theta is None:
                raise ConfigError(f"{path}.theta", "a tabulated kernel needs a declared theta")
            return KernelSpec.custom_tabulated(d.get("xs"), d.get("ys"), d.get("values"), theta)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.family", f"unknown kernel family {fam!r}")


def parse_problem(d: Any, path: str = "problem") -> ProblemSpec:
    d = _obj(d, path)
    _check_keys(d, {"p", "q", "direction", "cone", "kernel", "w", "v"}, path)
    p = _number(d, "p", path)
    q = _number(d, "q", path)
    if not q > 0:
        raise ConfigError(f"{path}.q", "must be positive")
    if not p > 0:
        raise ConfigError(f"{path}.p", "must be positive")
    direction = d.get("direction", "dual_Hstar")
    if direction not in DIRECTIONS:
        raise ConfigError(f"{path}.direction", f"expected one of {DIRECTIONS}")
    cone = d.get("cone", "all_nonneg")
    if cone not in CONES:
        raise ConfigError(f"{path}.cone", f"expected one of {CONES}")
    for key in ("kernel", "w", "v"):
        if key not in d:
            raise ConfigError(f"{path}.{key}", "missing required field")
    U = parse_kernel(d["kernel"], f"{path}.kernel")
    w = parse_weight(d["w"], f"{path}.w")
    v = parse_weight(d["v"], f"{path}.v")
    try:
        exps = ExponentTriple(p, q)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    try:
        return ProblemSpec(v, w, U, exps, direction, cone)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass
class OracleSettings:
    budget: int = 2000
    restarts: int = 6
    seed: int = 0
    grid: int = 400
    window: tuple = (1e-6, 1e6)


@dataclass
class ExperimentConfig:
    id: str
    problem: ProblemSpec
    quad: QuadConfig
    oracle: OracleSettings
    partitions: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


def parse_config(doc: Any, default_id: str = "config") -> ExperimentConfig:
    doc = _obj(doc, "$")
    if not doc:
        raise ConfigError("$", "empty configuration")
    _check_keys(doc, {"id", "description", "problem", "quad", "oracle", "partitions", "outputs"}, "$")
    if "problem" not in doc:
        raise ConfigError("problem", "missing required field")
    problem = parse_problem(doc["problem"])
    qd = _obj(doc.get("quad", {}), "quad")
    try:
        quad = QuadConfig.from_dict(qd)
    except (ValueError, TypeError) as exc:
        raise ConfigError("quad", str(exc)) from None
    od = _obj(doc.get("oracle", {}), "oracle")
    _check_keys(od, {"budget", "restarts", "seed", "grid", "window"}, "oracle")
    window = od.get("window", [1e-6, 1e6])
    if not (isinstance(window, list) and len(window) == 2 and all(isinstance(x, (int, float)) for x in window)
            and 0 < window[0] < window[1] < INF):
        raise ConfigError("oracle.window", "expected [lo, hi] with 0 < lo < hi < inf")
    oracle = OracleSettings(
        budget=_integer(od, "budget", "oracle", 2000, minimum=100),
        restarts=_integer(od, "restarts", "oracle", 6, minimum=1),
        seed=_integer(od, "seed", "oracle", 0),
        grid=_integer(od, "grid", "oracle", 400, minimum=8),
        window=(float(window[0]), float(window[1])),
    )
    pd = _obj(doc.get("partitions", {}), "partitions")
    _check_keys(pd, {"budget", "seed"}, "partitions")
    parts = {
        "budget": _integer(pd, "budget", "partitions", 200, minimum=10),
        "seed": _integer(pd, "seed", "partitions", 0),
    }
    outs = _obj(doc.get("outputs", {}), "outputs")
    _check_keys(outs, {"json", "csv"}, "outputs")
    cid = doc.get("id", default_id)
    if not isinstance(cid, str):
        raise ConfigError("id", "expected a string")
    return ExperimentConfig(cid, problem, quad, oracle, parts, dict(outs), doc)


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read file ({exc.strerror})") from None
    if not text.strip():
        raise ConfigError("$", "empty configuration")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$ (line {exc.lineno}, column {exc.colno})", exc.msg) from None
    return parse_config(doc, default_id=path.stem)


def suite_dir() -> Path:
    """Directory of the packaged 12-config suite."""
    return Path(__file__).parent / "suite"


def load_suite(directory: str | Path | None = None) -> list[ExperimentConfig]:
    d = Path(directory) if directory is not None else suite_dir()
    return [load_config(p) for p in sorted(d.glob("*.json"))]
