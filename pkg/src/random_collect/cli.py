"""Command-line entry point: ``random-collect {analyze,simulate,sweep,table1}``.

Experiments are described by a JSON spec file; command-line flags override
its fields. Exit codes: 0 success, 2 bad spec, 3 numeric failure, 4 node cap
exceeded for an exhaustive bound.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bounds import build_rate_report, latency_upper_bound, table1_closed_forms
from .errors import BruteForceLimitError, NonReversibleError, SingularSystemError, TopologyError
from .graph import BRUTE_FORCE_LIMIT, TopologySpec, build_topology
from .simulator import SimConfig, beta_sweep, run, stability_probe, write_outputs, write_summary_csv
from .steady_state import critical_rate, solve_occupancy, table1_reference
from .walk import (
    hitting_times_to,
    mixing_hitting_bound,
    second_eigenvalue,
    srw_matrix,
    stationary_dist,
    worst_case_hitting_time,
)

log = logging.getLogger("random_collect")

EXIT_OK, EXIT_SPEC, EXIT_NUMERIC, EXIT_CAP = 0, 2, 3, 4


class SpecError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    """Everything needed to reproduce one experiment."""

    topology: TopologySpec
    eps: float = 0.0
    beta: float | None = None
    beta_fraction: float = 0.5
    horizon: int = 1_000_000
    burn_in: int = 10_000
    seed: int = 0
    beta_grid: list[float] | None = None
    alpha: float = math.e
    round_cap: int = 500
    brute_force_limit: int = BRUTE_FORCE_LIMIT
    strict_bounds: bool = False

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        if "topology" not in d:
            raise SpecError("spec needs a 'topology' object")
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise SpecError(f"unknown spec keys: {sorted(unknown)}")
        d["topology"] = TopologySpec.from_dict(d["topology"])
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise SpecError(f"cannot read spec {path}: {exc}") from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["topology"] = self.topology.to_dict()
        return d


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(type(v))


def _round12(x):
    """Floats rendered with 12 significant digits for reproducible text output."""
    if isinstance(x, float):
        return float(f"{x:.12g}") if math.isfinite(x) else str(x)
    if isinstance(x, dict):
        return {k: _round12(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round12(v) for v in x]
    if isinstance(x, np.ndarray):
        return _round12(x.tolist())
    if isinstance(x, np.generic):
        return _round12(x.item())
    return x


def _reference_for(g, eps):
    kinds = {"cycle", "complete", "star_center_sink", "star_outer_sink", "hypercube"}
    if g.kind not in kinds or not g.all_sources():
        return None
    if g.kind == "cycle" and g.n % 2:
        return None
    ref = table1_reference(g.kind, g.n, eps)
    return {"value": ref.value, "exact": ref.exact}


def cmd_analyze(spec: ExperimentSpec, out: Path) -> dict:
    g = build_topology(spec.topology)
    tm = srw_matrix(g, spec.eps)
    pi = stationary_dist(tm, g)
    report = build_rate_report(g, tm, pi, check_fraction=spec.beta_fraction,
                               limit=spec.brute_force_limit)
    if spec.strict_bounds and (report.rc_upper is None or report.general_upper is None):
        raise BruteForceLimitError("; ".join(report.notes))
    spectrum = second_eigenvalue(tm, pi)
    h_sink = hitting_times_to(tm, g.sink)
    t_hit = worst_case_hitting_time(tm)
    beta_star = report.exact_rate
    occ = solve_occupancy(tm, g.sources, g.sink, beta_star)
    result = {
        "spec": spec.to_dict(),
        "report": report.to_dict(),
        "reference_rate": _reference_for(g, spec.eps),
        "eigenvalues": spectrum.eigenvalues,
        "spectral_gap": spectrum.spectral_gap,
        "t_hit": t_hit,
        "t_hit_mixing_bound": mixing_hitting_bound(g.n, spectrum.lambda2),
    }
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "analysis.json", _round12(result))
    (out / "report.csv").write_text(report.to_csv())
    with open(out / "hitting_times.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node", "hitting_time_to_sink"])
        w.writerows([u, f"{h:.12g}"] for u, h in enumerate(h_sink))
    occ.to_csv(out / "occupancy_at_critical.csv")
    tm.to_csv(out / "transition.csv")
    return result


def _resolve_beta(spec: ExperimentSpec, g, tm) -> float:
    if spec.beta is not None:
        return spec.beta
    return spec.beta_fraction * critical_rate(tm, g.sources, g.sink)


def cmd_simulate(spec: ExperimentSpec, out: Path) -> dict:
    g = build_topology(spec.topology)
    tm = srw_matrix(g, spec.eps)
    beta = _resolve_beta(spec, g, tm)
    cfg = SimConfig(g, beta, spec.horizon, spec.burn_in, spec.seed, spec.eps,
                    round_cap=spec.round_cap)
    metrics = run(cfg)
    verdict = stability_probe(metrics)
    write_outputs(metrics, verdict, out)
    summary = metrics.summary_row(verdict)
    summary.update(
        generated=metrics.generated,
        absorbed=metrics.absorbed,
        queued=metrics.queued,
        conservation_failures=metrics.conservation_failures,
        solver_eta=solve_occupancy(tm, g.sources, g.sink, beta).eta,
    )
    if beta > 0 and metrics.c_hat < 1:
        t_hit = worst_case_hitting_time(tm)
        bound = latency_upper_bound(g.k, beta, t_hit, metrics.c_hat, spec.alpha)
        summary["latency_bound"] = asdict(bound)
    _write_json(out / "summary.json", _round12({"spec": spec.to_dict(), "summary": summary}))
    return summary


def cmd_sweep(spec: ExperimentSpec, out: Path) -> dict:
    g = build_topology(spec.topology)
    tm = srw_matrix(g, spec.eps)
    beta_star = critical_rate(tm, g.sources, g.sink)
    grid = spec.beta_grid
    if not grid:
        grid = [round(f * beta_star, 12) for f in (0.5, 0.7, 0.8, 0.9, 1.1, 1.2, 1.4)]
    base = SimConfig(g, grid[0], spec.horizon, spec.burn_in, spec.seed, spec.eps,
                     round_cap=spec.round_cap)
    res = beta_sweep(base, sorted(grid))
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(out / "sweep.csv", res.summary_rows())
    bracket = {
        "last_stable": res.last_stable,
        "first_unstable": res.first_unstable,
        "estimate": res.estimate,
        "degenerate": res.degenerate,
        "solver_critical_rate": beta_star,
        "contains_solver_rate": res.contains(beta_star),
    }
    _write_json(out / "bracket.json", _round12(bracket))
    return bracket


TABLE1_FIELDS = (
    "family", "n", "eps", "srw_lower", "exact_rate", "rc_upper", "general_upper",
    "table_lower", "table_exact", "table_exact_is_bound", "table_upper", "exact_rel_err",
)


def cmd_table1(ns: list[int], dims: list[int], star_eps: float, out: Path) -> list[dict]:
    rows = []
    jobs = []
    for n in ns:
        jobs += [("cycle", {"kind": "cycle", "n": n}, 0.0),
                 ("star_center", {"kind": "star_center_sink", "n": n}, star_eps),
                 ("star_outer", {"kind": "star_outer_sink", "n": n}, 0.0),
                 ("complete", {"kind": "complete", "n": n}, 0.0)]
    jobs += [("hypercube", {"kind": "hypercube", "x": x}, 0.0) for x in dims]
    for family, topo, eps in jobs:
        g = build_topology(topo)
        report = build_rate_report(g, srw_matrix(g, eps))
        ref = table1_reference(family, g.n, eps)
        closed = table1_closed_forms(family, g.n, eps)
        rel = abs(report.exact_rate - ref.value) / ref.value
        rows.append({
            "family": family, "n": g.n, "eps": eps,
            "srw_lower": report.srw_lower, "exact_rate": report.exact_rate,
            "rc_upper": report.rc_upper, "general_upper": report.general_upper,
            "table_lower": closed["lower"], "table_exact": ref.value,
            "table_exact_is_bound": not ref.exact, "table_upper": closed["upper"],
            "exact_rel_err": rel,
        })
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table1.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE1_FIELDS)
        for r in rows:
            w.writerow([f"{r[f]:.12g}" if isinstance(r[f], float) else r[f] for f in TABLE1_FIELDS])
    return rows


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="random-collect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, sim=False):
        p.add_argument("--spec", required=True, help="experiment spec (JSON)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--eps", type=float, help="self-loop probability of the walk")
        if sim:
            p.add_argument("--horizon", type=int)
            p.add_argument("--burn-in", type=int)
            p.add_argument("--beta", type=float)
            p.add_argument("--alpha", type=float, help="latency-bound constant (> 1)")

    common(sub.add_parser("analyze", help="rates, bounds, spectra and hitting times"))
    common(sub.add_parser("simulate", help="one Monte Carlo run"), sim=True)
    sweep = sub.add_parser("sweep", help="Monte Carlo runs over a grid of rates")
    common(sweep, sim=True)
    sweep.add_argument("--beta-grid", type=_float_list, help="comma-separated rates")

    t1 = sub.add_parser("table1", help="bounds and exact rates for the standard families")
    t1.add_argument("--out", required=True)
    t1.add_argument("--n", type=_int_list, default=[6, 8, 10, 16], help="node counts")
    t1.add_argument("--dims", type=_int_list, default=[3, 4], help="hypercube dimensions")
    t1.add_argument("--eps", type=float, default=0.01, help="self-loop probability for the star with central sink")
    return parser


def _apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    for name in ("seed", "eps", "horizon", "burn_in", "beta", "alpha", "beta_grid"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(spec, name, value)
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "table1":
            cmd_table1(args.n, args.dims, args.eps, Path(args.out))
            return EXIT_OK
        spec = _apply_overrides(ExperimentSpec.load(args.spec), args)
        handler = {"analyze": cmd_analyze, "simulate": cmd_simulate, "sweep": cmd_sweep}[args.command]
        handler(spec, Path(args.out))
    except BruteForceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SingularSystemError, NonReversibleError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpecError, TopologyError, ValueError) as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
