"""Command-line front end: quantize | variation | ua | covering.

Reads ``value,weight`` CSV measures, runs the requested solver or diagnostic,
and writes a deterministic JSON or CSV report (numbers carry 17 significant
digits so binary64 values round-trip).  Reports are byte-stable across runs
unless ``--stamp`` adds a timestamp.  Exit codes: 0 success, 2 configuration
error, 3 input/parse error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import ua as ua_mod
from .measure import DiscreteMeasure, essential_range, read_csv
from .quantizer import SolveReport, solve_dp, solve_lloyd, solve_sup, solve_sweep
from .variation import audit_inequalities, total_variation_k

__all__ = ["main", "RunConfig", "ConfigError", "SolverError"]

SWEEP_GRID_SIZE = 200


class ConfigError(Exception):
    pass


class SolverError(Exception):
    pass


@dataclass
class RunConfig:
    """Validated invocation parameters shared by the subcommands."""

    subcommand: str
    p: float                     # math.inf encodes "inf"
    k: Optional[int] = None
    k_max: Optional[int] = None
    eps: tuple = ()
    inputs: tuple = ()
    solver: str = "dp"
    mode: str = "finite"
    tol: float = 1e-10
    max_iter: int = 500
    output: Optional[str] = None
    fmt: str = "json"
    merge_tol: float = 0.0
    stamp: bool = False
    ua_mode: str = "family"
    adv_r: Optional[int] = None
    adv_n: Optional[int] = None


def _parse_p(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError as exc:
        raise ConfigError(f"invalid --p value {text!r}") from exc
    if value < 1:
        raise ConfigError("--p must be >= 1 or 'inf'")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kquant",
        description="Best k-level step-function approximation, p-variation, "
                    "and uniform-approximability diagnostics for CSV measures.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, need_k=False):
        sp.add_argument("--input", action="append", default=[],
                        help="CSV measure (value,weight); repeatable; a directory expands to its *.csv files")
        sp.add_argument("--p", default="2", help="norm exponent (real >= 1, or 'inf')")
        if need_k:
            sp.add_argument("--k", type=int, help="level budget")
            sp.add_argument("--k-max", type=int, dest="k_max",
                            help="evaluate k = 1..k_max instead of a single k")
        sp.add_argument("--mode", choices=("finite", "infinite"), default="finite",
                        help="'infinite' pins one level to zero (infinite-mass zero region)")
        sp.add_argument("--merge-tol", type=float, default=0.0, dest="merge_tol",
                        help="fuse atoms closer than this when building ranges (p = inf)")
        sp.add_argument("--output", help="report path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
        sp.add_argument("--stamp", action="store_true",
                        help="include a timestamp in the report metadata")

    q = sub.add_parser("quantize", help="solve the best k-level approximation")
    common(q, need_k=True)
    q.add_argument("--solver", choices=("dp", "lloyd", "sweep"), default="dp")
    q.add_argument("--tol", type=float, default=1e-10)
    q.add_argument("--max-iter", type=int, default=500, dest="max_iter")

    v = sub.add_parser("variation", help="total p-variation table and inequality audit")
    common(v, need_k=True)

    u = sub.add_parser("ua", help="family diagnostics / adversarial lower bound")
    u.add_argument("ua_mode", nargs="?", choices=("family", "adversarial"),
                   default="family")
    common(u, need_k=True)
    u.add_argument("--eps", action="append", type=float, default=[])
    u.add_argument("--r", type=int, dest="adv_r", help="adversarial mass ratio (>= 2)")
    u.add_argument("--N", type=int, dest="adv_n", help="adversarial spike count")

    c = sub.add_parser("covering", help="covering numbers of essential ranges")
    common(c)
    c.add_argument("--eps", action="append", type=float, default=[])
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(
        subcommand=args.subcommand,
        p=_parse_p(args.p),
        k=getattr(args, "k", None),
        k_max=getattr(args, "k_max", None),
        eps=tuple(getattr(args, "eps", []) or []),
        inputs=tuple(args.input),
        solver=getattr(args, "solver", "dp"),
        mode=args.mode,
        tol=getattr(args, "tol", 1e-10),
        max_iter=getattr(args, "max_iter", 500),
        output=args.output,
        fmt=args.fmt,
        merge_tol=args.merge_tol,
        stamp=args.stamp,
        ua_mode=getattr(args, "ua_mode", "family"),
        adv_r=getattr(args, "adv_r", None),
        adv_n=getattr(args, "adv_n", None),
    )
    if any(e <= 0 for e in cfg.eps):
        raise ConfigError("--eps values must be positive")
    if cfg.k is not None and cfg.k < 1:
        raise ConfigError("--k must be >= 1")
    if cfg.k_max is not None and cfg.k_max < 1:
        raise ConfigError("--k-max must be >= 1")
    if cfg.tol <= 0:
        raise ConfigError("--tol must be positive")
    if cfg.merge_tol < 0:
        raise ConfigError("--merge-tol must be nonnegative")
    if cfg.solver == "sweep" and cfg.p == math.inf:
        raise ConfigError("--solver sweep requires a finite p")
    if cfg.mode == "infinite" and cfg.solver != "dp" and cfg.p != math.inf:
        raise ConfigError("--mode infinite supports --solver dp only")
    return cfg


# ---------------------------------------------------------------------------
# input handling
# ---------------------------------------------------------------------------


def _expand_inputs(cfg: RunConfig) -> list[Path]:
    if not cfg.inputs:
        raise ConfigError("at least one --input is required")
    paths: list[Path] = []
    for raw in cfg.inputs:
        path = Path(raw)
        if path.is_dir():
            found = sorted(path.glob("*.csv"))
            if not found:
                raise ConfigError(f"directory {path} contains no *.csv files")
            paths.extend(found)
        else:
            paths.append(path)
    return paths


def _load_measure(path: Path, cfg: RunConfig) -> DiscreteMeasure:
    m = read_csv(path)
    if cfg.mode == "infinite":
        m = DiscreteMeasure(m.atoms, m.weights, infinite_complement=True)
    return m


def _map_inputs(paths, fn):
    workers = int(os.environ.get("KQUANT_THREADS", "1") or "1")
    if workers <= 1 or len(paths) <= 1:
        return [fn(p) for p in paths]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, paths))


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in report")
    return format(float(x), ".17g")


def _to_json(obj, indent: int = 0) -> str:
    pad = " " * indent
    inner = " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{key}": {_to_json(val, indent + 2)}'
                 for key, val in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{inner}{_to_json(val, indent + 2)}" for val in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _rows_to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    def cell(v):
        if isinstance(v, bool) or isinstance(v, np.bool_):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return _fmt_float(float(v))
        return str(v)

    lines = [",".join(header)]
    lines.extend(",".join(cell(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _write_output(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    target = Path(output)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".kquant-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _base_report(cfg: RunConfig) -> dict:
    report = {
        "config": {
            "subcommand": cfg.subcommand,
            "p": "inf" if cfg.p == math.inf else cfg.p,
            "k": cfg.k,
            "k_max": cfg.k_max,
            "eps": list(cfg.eps),
            "inputs": [str(p) for p in cfg.inputs],
            "solver": cfg.solver,
            "mode": cfg.mode,
            "tol": cfg.tol,
            "max_iter": cfg.max_iter,
            "merge_tol": cfg.merge_tol,
        }
    }
    if cfg.stamp:
        report["metadata"] = {
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()
        }
    return report


def _measure_summary(m: DiscreteMeasure) -> dict:
    return {
        "n": m.n,
        "total_mass": m.total_mass,
        "min": float(m.atoms[0]),
        "max": float(m.atoms[-1]),
    }


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _solve_one(m: DiscreteMeasure, cfg: RunConfig) -> dict:
    if cfg.p == math.inf:
        rs = essential_range(m, cfg.merge_tol)
        if m.infinite_complement:
            rs = rs.with_point(0.0)
        sol = solve_sup(rs, cfg.k)
        return {
            "levels": list(sol.levels),
            "radius": sol.radius,
            "q": len(sol.levels),
        }
    if cfg.solver == "dp":
        rep = solve_dp(m, cfg.k, cfg.p)
    elif cfg.solver == "lloyd":
        rep = solve_lloyd(m, cfg.k, cfg.p, tol=cfg.tol, max_iter=cfg.max_iter)
    else:
        grid = np.linspace(float(m.atoms[0]), float(m.atoms[-1]),
                           SWEEP_GRID_SIZE + 2)[1:-1]
        grid = grid[(grid > m.atoms[0]) & (grid < m.atoms[-1])]
        if grid.size == 0:
            raise SolverError("measure support too narrow for a sweep grid")
        rep = solve_sweep(m, cfg.k, cfg.p, grid)
        if rep.method == "sweep" and not rep.converged and rep.degenerate:
            raise SolverError("all sweep candidates were inadmissible")
    return _result_dict(rep)


def _result_dict(rep: SolveReport) -> dict:
    qz = rep.quantizer
    return {
        "levels": [float(v) for v in qz.levels],
        "boundaries": [float(v) for v in qz.boundaries],
        "q": qz.q,
        "error": rep.error,
        "error_pow": rep.error_pow,
        "iterations": rep.iterations,
        "converged": rep.converged,
        "ties": len(rep.ties),
        "special_form": qz.special_form,
        "zero_index": qz.zero_index,
    }


def _run_quantize(cfg: RunConfig) -> str:
    if cfg.k is None:
        raise ConfigError("quantize requires --k")
    paths = _expand_inputs(cfg)

    def work(path):
        m = _load_measure(path, cfg)
        return _measure_summary(m), _solve_one(m, cfg)

    outcomes = _map_inputs(paths, work)
    report = _base_report(cfg)
    if len(paths) == 1:
        report["measure_summary"], report["result"] = outcomes[0]
    else:
        report["cases"] = [
            {"input": str(path), "measure_summary": summary, "result": result}
            for path, (summary, result) in zip(paths, outcomes)
        ]
    if cfg.fmt == "json":
        return _to_json(report) + "\n"
    rows = []
    for path, (_, result) in zip(paths, outcomes):
        if "radius" in result:
            for i, level in enumerate(result["levels"]):
                rows.append([str(path), i, level, result["radius"]])
            header = ["input", "index", "level", "radius"]
        else:
            bounds = result["boundaries"] + [""]
            for i, level in enumerate(result["levels"]):
                rows.append([str(path), i, level, bounds[i]])
            header = ["input", "index", "level", "boundary_upper"]
    return _rows_to_csv(header, rows)


def _run_variation(cfg: RunConfig) -> str:
    if cfg.p == math.inf:
        raise ConfigError("variation requires a finite p")
    if cfg.mode == "infinite":
        raise ConfigError("variation requires finite-mode measures")
    if cfg.k is None and cfg.k_max is None:
        raise ConfigError("variation requires --k or --k-max")
    ks = list(range(1, (cfg.k_max or cfg.k) + 1)) if cfg.k_max else [cfg.k]
    paths = _expand_inputs(cfg)

    def work(path):
        m = _load_measure(path, cfg)
        rows = []
        for k in ks:
            audit = audit_inequalities(m, k, cfg.p)
            rows.append({
                "k": k,
                "distance": audit.d_k,
                "distance_next": audit.d_next,
                "variation": audit.var_k,
                "twice_distance": 2.0 * audit.d_k,
                "lower_ok": audit.lower_ok,
                "upper_ok": audit.upper_ok,
                "next_ok": audit.next_ok,
                "pass": audit.passed,
            })
        return _measure_summary(m), rows

    outcomes = _map_inputs(paths, work)
    report = _base_report(cfg)
    cases = [
        {"input": str(path), "measure_summary": summary, "audits": rows}
        for path, (summary, rows) in zip(paths, outcomes)
    ]
    total = sum(len(rows) for _, rows in outcomes)
    passed = sum(sum(1 for r in rows if r["pass"]) for _, rows in outcomes)
    if len(paths) == 1:
        report["measure_summary"] = cases[0]["measure_summary"]
        report["audits"] = cases[0]["audits"]
    else:
        report["cases"] = cases
    report["aggregate"] = {"checks": total, "passed": passed}
    if cfg.fmt == "json":
        return _to_json(report) + "\n"
    header = ["input", "k", "distance", "variation", "twice_distance",
              "distance_next", "pass"]
    rows = []
    for path, (_, table) in zip(paths, outcomes):
        for r in table:
            rows.append([str(path), r["k"], r["distance"], r["variation"],
                         r["twice_distance"], r["distance_next"], r["pass"]])
    return _rows_to_csv(header, rows)


def _run_ua(cfg: RunConfig) -> str:
    if cfg.ua_mode == "adversarial":
        return _run_ua_adversarial(cfg)
    paths = _expand_inputs(cfg)
    members = tuple(
        (str(path), _load_measure(path, cfg)) for path in paths
    )
    fam = ua_mod.FunctionFamily(members)
    k_max = cfg.k_max or cfg.k
    report = _base_report(cfg)
    report["family"] = {"size": len(members),
                        "members": [label for label, _ in members]}
    diag = None
    if k_max:
        diag = ua_mod.family_decay(fam, cfg.p, k_max, cfg.eps)
        report["decay"] = {
            "k": list(diag.k_values),
            "sup_distance": list(diag.sup_distance),
            "sup_variation": list(diag.sup_variation),
        }
        if diag.sandwich:
            report["sandwich"] = [
                {
                    "eps": rec.eps,
                    "n_eps": rec.n_eps,
                    "r_eps": rec.r_eps,
                    "r_2eps": rec.r_2eps,
                    "lower_ok": rec.lower_ok,
                    "upper_ok": rec.upper_ok,
                    "resolved": rec.resolved,
                }
                for rec in diag.sandwich
            ]
    if cfg.eps:
        report["n_table"] = [
            {"eps": float(e), "N": ua_mod.family_N(fam, cfg.p, float(e))}
            for e in cfg.eps
        ]
        if cfg.p == math.inf:
            report["covering_table"] = [
                {"eps": float(e),
                 "max_covering": max(
                     ua_mod.covering_number(_family_range(m, cfg), float(e))
                     for m in fam.measures())}
                for e in cfg.eps
            ]
    if cfg.fmt == "json":
        return _to_json(report) + "\n"
    if k_max:
        header = ["k", "sup_distance", "sup_variation"]
        rows = [
            [k, d, (diag.sup_variation[i] if diag.sup_variation else "")]
            for i, (k, d) in enumerate(zip(diag.k_values, diag.sup_distance))
        ]
        return _rows_to_csv(header, rows)
    rows = [[entry["eps"], entry["N"]] for entry in report.get("n_table", [])]
    return _rows_to_csv(["eps", "N"], rows)


def _family_range(m: DiscreteMeasure, cfg: RunConfig):
    rs = essential_range(m, cfg.merge_tol)
    if m.infinite_complement:
        rs = rs.with_point(0.0)
    return rs


def _run_ua_adversarial(cfg: RunConfig) -> str:
    if cfg.adv_r is None or cfg.adv_n is None or cfg.k is None:
        raise ConfigError("ua adversarial requires --r, --N and --k")
    if cfg.p == math.inf:
        raise ConfigError("ua adversarial requires a finite p")
    from .measure import moment_p

    m, bound = ua_mod.adversarial_ball_family(cfg.adv_r, cfg.adv_n, cfg.k, cfg.p)
    rep = solve_dp(m, cfg.k, cfg.p)
    ratio = rep.error_pow / moment_p(m, cfg.p)
    report = _base_report(cfg)
    report["adversarial"] = {
        "r": cfg.adv_r,
        "N": cfg.adv_n,
        "k": cfg.k,
        "lower_bound": bound,
        "relative_error_pow": ratio,
        "bound_holds": bool(ratio >= bound),
    }
    if cfg.fmt == "json":
        return _to_json(report) + "\n"
    return _rows_to_csv(
        ["r", "N", "k", "lower_bound", "relative_error_pow", "bound_holds"],
        [[cfg.adv_r, cfg.adv_n, cfg.k, bound, ratio, bool(ratio >= bound)]],
    )


def _run_covering(cfg: RunConfig) -> str:
    if not cfg.eps:
        raise ConfigError("covering requires at least one --eps")
    paths = _expand_inputs(cfg)

    def work(path):
        m = _load_measure(path, cfg)
        rs = _family_range(m, cfg)
        return [(float(e), ua_mod.covering_number(rs, float(e))) for e in cfg.eps]

    outcomes = _map_inputs(paths, work)
    report = _base_report(cfg)
    report["covering"] = [
        {"input": str(path),
         "table": [{"eps": e, "count": c} for e, c in rows]}
        for path, rows in zip(paths, outcomes)
    ]
    if cfg.fmt == "json":
        return _to_json(report) + "\n"
    rows = [[str(path), e, c]
            for path, table in zip(paths, outcomes) for e, c in table]
    return _rows_to_csv(["input", "eps", "count"], rows)


# ---------------------------------------------------------------------------


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        runner = {
            "quantize": _run_quantize,
            "variation": _run_variation,
            "ua": _run_ua,
            "covering": _run_covering,
        }[cfg.subcommand]
        text = runner(cfg)
    except ConfigError as exc:
        print(f"kquant: configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, UnicodeDecodeError) as exc:
        print(f"kquant: input error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"kquant: input error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"kquant: solver failure: {exc}", file=sys.stderr)
        return 4
    try:
        _write_output(text, cfg.output)
    except OSError as exc:
        print(f"kquant: output error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
