"""Command line entry point: ``hardybounds <command> --config <file> ...``.

Exit codes: 0 on success, 1 on errors, 2 when a verdict is unbounded and
``--expect-bounded`` is set.  JSON output is deterministic (sorted keys,
infinities written as the string "inf").
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .config import ConfigError, ExperimentConfig, load_config, suite_dir
from .discretize import build_blocks, build_levels, normalize_mass, verify_block_properties
from .functionals import (
    FunctionalEntry,
    FunctionalReport,
    RegimeError,
    eval_A12,
    eval_A34,
    eval_A5678,
    eval_E,
    predict,
)
from .oracle import maximize_ratio
from .partitions import WHICH as D_NAMES
from .partitions import search_sup_D

EXIT_OK, EXIT_ERROR, EXIT_UNBOUNDED = 0, 1, 2

CSV_COLUMNS = (
    "config_id",
    "regime",
    "a_sum",
    "d_sum",
    "C_lb",
    "R1",
    "R2",
    "functional_verdict",
    "oracle_verdict",
)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _clean(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def fmt_number(x: Optional[float]) -> str:
    """17 significant digits, '.' separator, independent of locale."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _write(text: str, out: Optional[str]):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Library-level runners
# ---------------------------------------------------------------------------


def _parse_which(which: Optional[str]) -> list:
    if not which:
        return []
    return [w.strip() for w in which.split(",") if w.strip()]


def _entry(name, res) -> FunctionalEntry:
    return FunctionalEntry(name, float(res.value), float(res.err_estimate), res.finite, bool(res.converged))


def run_functionals(cfg: ExperimentConfig, which: Optional[list] = None) -> dict:
    """Characterizing functionals for the regime, or the named subset ``which``."""
    spec, q = cfg.problem, cfg.quad
    if not which:
        report = predict(spec, q)
        out = report.to_dict()
    else:
        entries = []
        for name in which:
            key = name.replace("*", "")
            if key in ("A1", "A2"):
                entries.append(_entry(name, eval_A12(spec, q)[int(key[1]) - 1]))
            elif key in ("A3", "A4"):
                entries.append(_entry(name, eval_A34(spec, q)[int(key[1]) - 3]))
            elif key in ("A5", "A6", "A7", "A8"):
                res = eval_A5678(spec, q)[key]
                if res is None:
                    raise RegimeError(f"{key} is not defined for p={spec.p}")
                entries.append(_entry(name, res))
            elif key in ("E1", "E2", "E3", "E4", "E5"):
                entries.append(_entry(name, eval_E(spec, int(key[1]), q)))
            else:
                raise ValueError(f"unknown functional {name!r}")
        finite = all(e.finite for e in entries)
        out = {
            "verdict": "bounded" if finite else "unbounded",
            "functionals": [e.to_dict() for e in entries],
        }
    out["config_id"] = cfg.id
    return out


def default_d_names(cfg: ExperimentConfig) -> list:
    """The discrete pair matching the regime; empty for the nonincreasing cone."""
    spec = cfg.problem
    if spec.cone != "all_nonneg":
        return []
    return ["D3", "D4"] if spec.p == 1 else ["D1", "D2"]


def run_partitions(cfg: ExperimentConfig, which: Optional[list] = None, budget: Optional[int] = None,
                   seed: Optional[int] = None) -> dict:
    names = which or default_d_names(cfg)
    budget = cfg.partitions["budget"] if budget is None else budget
    seed = cfg.partitions["seed"] if seed is None else seed
    results = {}
    for name in names:
        if name not in D_NAMES:
            raise ValueError(f"unknown D functional {name!r}; choose from {D_NAMES}")
        res = search_sup_D(cfg.problem, name, budget=budget, seed=seed, cfg=cfg.quad)
        results[name] = res.to_dict()
    return {"config_id": cfg.id, "budget": budget, "seed": seed, "searches": results}


def run_discretize(cfg: ExperimentConfig, mu: Optional[int] = None, emit: Optional[list] = None) -> dict:
    """Level sequence, blocks and the block-property report for the weight w."""
    spec = cfg.problem
    Theta = spec.exps.theta_cap(spec.U.theta)
    w, K = normalize_mass(spec.w, Theta)
    mu = K - 6 if mu is None else mu
    emit = emit or ["levels", "blocks", "report"]
    levels = build_levels(w, Theta, mu, K)
    blocks = build_blocks(levels, spec.U, spec.q)
    out = {"config_id": cfg.id, "Theta": Theta, "K": K, "mu": mu}
    if "levels" in emit:
        out["levels"] = levels.to_dict()
    if "blocks" in emit:
        out["blocks"] = blocks.to_dict()
    if "report" in emit:
        out["report"] = verify_block_properties(levels, blocks, spec.U, spec.q, w=w, cfg=cfg.quad).to_dict()
    unknown = set(emit) - {"levels", "blocks", "report"}
    if unknown:
        raise ValueError(f"unknown --emit item(s): {sorted(unknown)}")
    return out


def run_oracle(cfg: ExperimentConfig, budget: Optional[int] = None, restarts: Optional[int] = None,
               seed: Optional[int] = None) -> dict:
    o = cfg.oracle
    res = maximize_ratio(
        cfg.problem,
        budget=o.budget if budget is None else budget,
        restarts=o.restarts if restarts is None else restarts,
        seed=o.seed if seed is None else seed,
        grid=o.grid,
        window=o.window,
    )
    out = res.to_dict()
    out["config_id"] = cfg.id
    return out


@dataclass
class EquivalenceRow:
    """One suite row; R1 = predicted constant / C_lb and R2 = A-sum / D-sum."""

    config_id: str
    regime: str
    a_sum: float
    d_sum: Optional[float]
    C_lb: float
    R1: Optional[float]
    R2: Optional[float]
    functional_verdict: str
    oracle_verdict: str
    predicted_constant: Optional[float] = None

    def csv_fields(self) -> list:
        return [
            self.config_id,
            self.regime,
            fmt_number(self.a_sum),
            fmt_number(self.d_sum),
            fmt_number(self.C_lb),
            fmt_number(self.R1),
            fmt_number(self.R2),
            self.functional_verdict,
            self.oracle_verdict,
        ]


def equivalence_row(cfg: ExperimentConfig, budget: Optional[int] = None, seed: Optional[int] = None,
                    restarts: Optional[int] = None) -> EquivalenceRow:
    report: FunctionalReport = predict(cfg.problem, cfg.quad)
    a_sum = report.a_sum_r
    d_sum = None
    names = default_d_names(cfg)
    if names and report.verdict == "bounded":
        parts = run_partitions(cfg, names, seed=seed)
        d_sum = sum(parts["searches"][n]["best_value"] for n in names)
    orc = run_oracle(cfg, budget=budget, restarts=restarts, seed=seed)
    C_lb = orc["C_lb"]
    pc = report.predicted_constant
    R1 = pc / C_lb if (pc is not None and 0 < C_lb < math.inf) else None
    R2 = a_sum / d_sum if (d_sum and math.isfinite(a_sum)) else None
    return EquivalenceRow(cfg.id, report.regime, a_sum, d_sum, C_lb, R1, R2, report.verdict, orc["verdict"], pc)


def _row_worker(args) -> EquivalenceRow:
    path, budget, seed, restarts = args
    return equivalence_row(load_config(path), budget=budget, seed=seed, restarts=restarts)


def _threads() -> int:
    raw = os.environ.get("HB_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"HB_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"HB_THREADS must be a positive integer, got {raw!r}")
    return n


def suite_paths(location: Optional[str]) -> list:
    d = Path(location) if location else suite_dir()
    if d.is_file():
        return [d]
    paths = sorted(d.glob("*.json"))
    if not paths:
        raise ConfigError(str(d), "no *.json configs found")
    return paths


def run_equivalence(paths: list, budget: Optional[int] = None, seed: Optional[int] = None,
                    restarts: Optional[int] = None, threads: int = 1) -> list:
    """Rows in config filename order; evaluated in up to ``threads`` processes."""
    jobs = [(str(p), budget, seed, restarts) for p in paths]
    for p in paths:  # fail fast on malformed configs before spawning workers
        load_config(p)
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as ex:
            return list(ex.map(_row_worker, jobs))
    return [_row_worker(j) for j in jobs]


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    for row in rows:
        wr.writerow(row.csv_fields())
    return buf.getvalue()


def summarize_csv(text: str) -> dict:
    """Band summary of an equivalence CSV."""
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or list(rows[0].keys()) != list(CSV_COLUMNS):
        raise ValueError(f"not an equivalence CSV (expected columns {', '.join(CSV_COLUMNS)})")

    def nums(col):
        return [float(r[col]) for r in rows if r[col] not in ("", "inf", "nan")]

    r1, r2 = nums("R1"), nums("R2")
    agree = sum(
        1 for r in rows
        if r["functional_verdict"].startswith("unbounded") == r["oracle_verdict"].startswith("unbounded")
    )
    return {
        "rows": len(rows),
        "R1_min": min(r1) if r1 else None,
        "R1_max": max(r1) if r1 else None,
        "R2_min": min(r2) if r2 else None,
        "R2_max": max(r2) if r2 else None,
        "verdict_agreement": agree,
        "unbounded_rows": [r["config_id"] for r in rows if r["functional_verdict"] == "unbounded"],
    }


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def _csv_line(cfg: ExperimentConfig, out: dict):
    path = cfg.outputs.get("csv")
    if not path:
        return
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["config_id", "name", "value", "err", "finite"])
    for e in out["functionals"]:
        wr.writerow([cfg.id, e["name"], fmt_number(e["value"]), fmt_number(e["err"]), e["finite"]])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(buf.getvalue())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardybounds", description="Boundedness functionals for weighted Hardy-type operators.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_help="experiment config (JSON)"):
        p.add_argument("--config", required=True, help=config_help)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--expect-bounded", action="store_true", help="exit 2 if the verdict is unbounded")

    p = sub.add_parser("functionals", help="evaluate A/E functionals")
    common(p)
    p.add_argument("--which", help="comma list, e.g. A1,A2,E3 (default: the pair for the regime)")

    p = sub.add_parser("partitions", help="search covering sequences maximizing a D functional")
    common(p)
    p.add_argument("--which", help="comma list of D1,D2,D3,D4,LaiD1,LaiD2")
    p.add_argument("--budget", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("discretize", help="level sequence and blocks for the weight w")
    common(p)
    p.add_argument("--mu", type=int, help="lowest level index (default K - 6)")
    p.add_argument("--emit", default="levels,blocks,report", help="comma list of levels,blocks,report")

    p = sub.add_parser("oracle", help="lower bound for the best constant")
    common(p)
    p.add_argument("--budget", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("equivalence", help="CSV of A-sum, D-sum and C_lb over a suite")
    p.add_argument("--config", help="suite directory or single config (default: packaged suite)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--expect-bounded", action="store_true")
    p.add_argument("--budget", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("report", help="summarize an equivalence CSV as JSON")
    p.add_argument("--config", required=True, help="equivalence CSV")
    p.add_argument("--out")
    return ap


def _unbounded(verdict: str) -> bool:
    return verdict.startswith("unbounded")


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            text = Path(args.config).read_text()
            _write(dumps(summarize_csv(text)), args.out)
            return EXIT_OK
        if args.command == "equivalence":
            rows = run_equivalence(suite_paths(args.config), budget=args.budget, seed=args.seed,
                                   restarts=args.restarts, threads=_threads())
            _write(rows_to_csv(rows), args.out)
            bad = any(_unbounded(r.functional_verdict) or _unbounded(r.oracle_verdict) for r in rows)
            return EXIT_UNBOUNDED if (args.expect_bounded and bad) else EXIT_OK
        cfg = load_config(args.config)
        if args.command == "functionals":
            out = run_functionals(cfg, _parse_which(args.which))
            _csv_line(cfg, out)
        elif args.command == "partitions":
            out = run_partitions(cfg, _parse_which(args.which), args.budget, args.seed)
            finite = all(math.isfinite(s["best_value"]) for s in out["searches"].values())
            out["verdict"] = "bounded" if finite else "unbounded"
        elif args.command == "discretize":
            out = run_discretize(cfg, args.mu, _parse_which(args.emit))
            out["verdict"] = "bounded"
        else:
            out = run_oracle(cfg, args.budget, args.restarts, args.seed)
        _write(dumps(out), args.out or cfg.outputs.get("json"))
        return EXIT_UNBOUNDED if (args.expect_bounded and _unbounded(out["verdict"])) else EXIT_OK
    except (ConfigError, RegimeError, ValueError, OSError) as exc:
        print(f"hardybounds: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
