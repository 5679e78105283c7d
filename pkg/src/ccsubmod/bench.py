"""Benchmark runner: grid experiments, rank statistics, and report files.

Runs the configured algorithms over a grid of (budget C, alpha, delta)
cells with seeded repetitions, aggregates best feasible values, tests
per-cell differences with a Kruskal-Wallis gate followed by pairwise
rank-sum tests at a Bonferroni-adjusted level, and writes deterministic
CSV/Markdown reports (plus an optional JSON-lines per-run log).

Exposed as a CLI via ``ccsubmod-bench`` or ``python -m ccsubmod.bench``;
flags override values from an optional flat ``key = value`` config file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np
from scipy.stats import chi2, rankdata

from .algorithms import AlgoConfig, RunRecord, greedy_run, gsemo_run, nsga2_run
from .problems import (CoverageInstance, InfluenceInstance, generate_im_graph,
                       graph_to_coverage, parse_dimacs_edges, read_im_edges)
from .weights import BoundKind, WeightModel

KNOWN_ALGOS = ("greedy", "gsemo", "nsga2")
CSV_HEADER = ["problem", "C", "alpha", "delta", "algo", "mean", "min", "max",
              "std", "stat", "seeds", "budget"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str = "coverage"            # coverage | im | im-file
    graph: str | None = None             # input file for coverage / im-file
    nodes: int = 400                     # generator parameters for problem=im
    edges: int = 1594
    edge_prob: float = 0.1
    C_values: tuple[float, ...] = (10.0, 15.0, 20.0)
    alphas: tuple[float, ...] = (0.1, 0.001)
    deltas: tuple[float, ...] = (0.5, 1.0)
    algos: tuple[str, ...] = ("greedy", "gsemo", "nsga2")
    runs: int = 30
    budget: int = 5_000_000
    seed: int = 1
    bound: str = "auto"                  # auto | chebyshev | chernoff
    sims: int = 100
    out_dir: str = "results"
    log_runs: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.problem not in ("coverage", "im", "im-file"):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.problem in ("coverage", "im-file") and not self.graph:
            raise ConfigError(f"problem {self.problem!r} needs --graph")
        if not self.C_values or not self.alphas or not self.deltas:
            raise ConfigError("C, alpha, and delta grids must be nonempty")
        if not self.algos:
            raise ConfigError("algorithm list must be nonempty")
        for algo in self.algos:
            if algo not in KNOWN_ALGOS:
                raise ConfigError(f"unknown algorithm {algo!r}")
        if self.runs < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.bound not in ("auto", "chebyshev", "chernoff"):
            raise ConfigError(f"unknown bound policy {self.bound!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def bound_for(policy: str, alpha: float) -> BoundKind:
    """auto picks Chebyshev for loose alpha and Chernoff for tight alpha."""
    if policy == "chebyshev":
        return BoundKind.CHEBYSHEV
    if policy == "chernoff":
        return BoundKind.CHERNOFF
    return BoundKind.CHEBYSHEV if alpha >= 0.01 else BoundKind.CHERNOFF


def build_instance(cfg: ExperimentConfig):
    if cfg.problem == "coverage":
        path = Path(cfg.graph)
        with open(path) as fh:
            n, edges = parse_dimacs_edges(fh)
        return graph_to_coverage(edges, n, problem_id=path.stem)
    if cfg.problem == "im-file":
        path = Path(cfg.graph)
        with open(path) as fh:
            n, edges = read_im_edges(fh)
        return InfluenceInstance(n, tuple(edges), sims=cfg.sims,
                                 base_seed=cfg.seed, problem_id=path.stem)
    return generate_im_graph(cfg.nodes, cfg.edges, cfg.edge_prob, cfg.seed,
                             sims=cfg.sims)


# --- rank statistics -------------------------------------------------------

def kruskal_wallis(groups) -> tuple[float, float]:
    """H statistic (midranks, tie-corrected) and chi-square p-value.

    Identical observations across all groups give (0, 1) by convention.
    """
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if any(a.size == 0 for a in arrays):
        raise ValueError("groups must be nonempty")
    pooled = np.concatenate(arrays)
    total = pooled.size
    if np.all(pooled == pooled[0]):
        return 0.0, 1.0
    ranks = rankdata(pooled)
    h = 0.0
    offset = 0
    for a in arrays:
        r = ranks[offset:offset + a.size]
        h += r.sum() ** 2 / a.size
        offset += a.size
    h = 12.0 / (total * (total + 1)) * h - 3.0 * (total + 1)
    _, counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - ((counts ** 3 - counts).sum() / (total ** 3 - total))
    h = max(0.0, h / correction)
    p = float(chi2.sf(h, len(groups) - 1))
    return float(h), p


def rank_sum_p(a, b) -> float:
    """Two-sided rank-sum p-value (normal approximation, tie-corrected)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = a.size, b.size
    total = n1 + n2
    pooled = np.concatenate([a, b])
    if np.all(pooled == pooled[0]):
        return 1.0
    ranks = rankdata(pooled)
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    _, counts = np.unique(pooled, return_counts=True)
    tie_term = ((counts ** 3 - counts).sum()) / (total * (total - 1))
    sigma_sq = n1 * n2 / 12.0 * ((total + 1) - tie_term)
    if sigma_sq <= 0.0:
        return 1.0
    z = (u1 - mu) / math.sqrt(sigma_sq)
    return math.erfc(abs(z) / math.sqrt(2.0))


def bonferroni_posthoc(groups, labels=None, alpha_level: float = 0.05) -> list[str]:
    """Pairwise rank-sum marks at level alpha_level / (number of pairs).

    For the group in column j, ``i(+)`` records that j significantly
    outperformed group i and ``i(-)`` the reverse; labels default to 1-based
    column numbers.
    """
    k = len(groups)
    if labels is None:
        labels = [str(i + 1) for i in range(k)]
    if k < 2:
        return [""] * k
    adjusted = alpha_level / (k * (k - 1) / 2)
    marks: list[list[tuple[int, str]]] = [[] for _ in range(k)]
    for i in range(k):
        for j in range(i + 1, k):
            if rank_sum_p(groups[i], groups[j]) >= adjusted:
                continue
            pooled_ranks = rankdata(np.concatenate(
                [np.asarray(groups[i], float), np.asarray(groups[j], float)]))
            ni = len(groups[i])
            if pooled_ranks[:ni].mean() > pooled_ranks[ni:].mean():
                winner, loser = i, j
            else:
                winner, loser = j, i
            marks[winner].append((loser, f"{labels[loser]}(+)"))
            marks[loser].append((winner, f"{labels[winner]}(-)"))
    return [",".join(text for _, text in sorted(mark)) for mark in marks]


# --- experiment execution --------------------------------------------------

@dataclass(frozen=True)
class SummaryRow:
    problem: str
    C: float
    alpha: float
    delta: float
    algo: str
    mean: float
    min: float
    max: float
    std: float
    stat: str
    seeds: int
    budget: int

    def __post_init__(self):
        if not math.isnan(self.mean):
            if not (self.min <= self.mean + 1e-9 and self.mean <= self.max + 1e-9):
                raise ValueError("summary ordering violated (min <= mean <= max)")
            if self.std < 0.0:
                raise ValueError("standard deviation cannot be negative")


def _run_one(inst, model: WeightModel, kind: BoundKind, algo: str,
             run_seed: int, cfg: ExperimentConfig) -> RunRecord:
    if algo == "greedy":
        return greedy_run(inst, model, kind)
    algo_cfg = AlgoConfig(budget=cfg.budget, seed=run_seed, bound=kind)
    if algo == "gsemo":
        return gsemo_run(inst, algo_cfg)
    return nsga2_run(inst, algo_cfg)


def _run_task(args) -> tuple[tuple, RunRecord]:
    cfg, cell, algo, run_idx = args
    C, alpha, delta = cell
    inst = build_instance(cfg)
    model = WeightModel.uniform(inst.n, 1.0, dispersion=delta, bound=C,
                                alpha=alpha)
    inst = inst.with_weight_model(model)
    kind = bound_for(cfg.bound, alpha)
    record = _run_one(inst, model, kind, algo, cfg.seed + run_idx, cfg)
    return (cell, algo, run_idx), record


def run_experiment(cfg: ExperimentConfig) -> tuple[list[SummaryRow], list[dict]]:
    """Execute the full grid; returns summary rows and per-run log entries."""
    cells = [(C, alpha, delta) for alpha in cfg.alphas for C in cfg.C_values
             for delta in cfg.deltas]
    tasks = []
    for cell in cells:
        for algo in cfg.algos:
            n_runs = 1 if algo == "greedy" else cfg.runs
            for run_idx in range(n_runs):
                tasks.append((cfg, cell, algo, run_idx))

    results: dict[tuple, RunRecord] = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for key, record in pool.map(_run_task, tasks):
                results[key] = record
    else:
        base = build_instance(cfg)
        for cfg_, cell, algo, run_idx in tasks:
            C, alpha, delta = cell
            model = WeightModel.uniform(base.n, 1.0, dispersion=delta,
                                        bound=C, alpha=alpha)
            inst = base.with_weight_model(model)
            kind = bound_for(cfg.bound, alpha)
            record = _run_one(inst, model, kind, algo, cfg.seed + run_idx, cfg)
            results[(cell, algo, run_idx)] = record

    rows: list[SummaryRow] = []
    log_entries: list[dict] = []
    for cell in cells:
        C, alpha, delta = cell
        values_by_algo: dict[str, list[float]] = {}
        for algo in cfg.algos:
            n_runs = 1 if algo == "greedy" else cfg.runs
            values = []
            for run_idx in range(n_runs):
                record = results[(cell, algo, run_idx)]
                if record.feasible_found:
                    values.append(record.best_value)
                else:
                    warnings.warn(
                        f"{algo} run {run_idx} on cell C={C} alpha={alpha} "
                        f"delta={delta} found no feasible solution; excluded")
                log_entries.append(_log_entry(record, run_idx))
            values_by_algo[algo] = values

        stat_groups = []
        stat_algos = []
        for algo in cfg.algos:
            values = values_by_algo[algo]
            if not values:
                continue
            stat_algos.append(algo)
            if algo == "greedy":
                stat_groups.append(values * cfg.runs)
            else:
                stat_groups.append(values)
        stats = {algo: "" for algo in cfg.algos}
        if len(stat_groups) >= 2:
            _, p = kruskal_wallis(stat_groups)
            if p < 0.05:
                labels = [str(cfg.algos.index(a) + 1) for a in stat_algos]
                for algo, mark in zip(stat_algos,
                                      bonferroni_posthoc(stat_groups, labels)):
                    stats[algo] = mark

        for algo in cfg.algos:
            values = values_by_algo[algo]
            if values:
                arr = np.asarray(values)
                std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
                row = SummaryRow(results[(cell, algo, 0)].problem, C, alpha,
                                 delta, algo, float(arr.mean()),
                                 float(arr.min()), float(arr.max()), std,
                                 stats[algo], len(values), cfg.budget)
            else:
                row = SummaryRow(results[(cell, algo, 0)].problem, C, alpha,
                                 delta, algo, math.nan, math.nan, math.nan,
                                 math.nan, "", 0, cfg.budget)
            rows.append(row)
    return rows, log_entries


def _log_entry(record: RunRecord, run_idx: int) -> dict:
    return {
        "problem": record.problem, "algo": record.algorithm, "run": run_idx,
        "C": record.C, "alpha": record.alpha, "delta": record.delta,
        "seed": record.seed, "best_value": record.best_value,
        "feasible": record.feasible_found, "evaluations": record.evaluations,
        "wall_time": record.wall_time,
        "best_subset_hex": record.best_subset.to_hex()
        if record.best_subset is not None else None,
    }


# --- reports ---------------------------------------------------------------

def _fmt(x: float, decimals: int) -> str:
    return "nan" if math.isnan(x) else f"{x:.{decimals}f}"


def write_csv(rows: list[SummaryRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([r.problem, f"{r.C:g}", f"{r.alpha:g}",
                             f"{r.delta:g}", r.algo, _fmt(r.mean, 2),
                             _fmt(r.min, 2), _fmt(r.max, 2), _fmt(r.std, 4),
                             r.stat, r.seeds, r.budget])


def write_markdown(rows: list[SummaryRow], path) -> None:
    algos = list(dict.fromkeys(r.algo for r in rows))
    cells: dict[tuple, dict[str, SummaryRow]] = {}
    for r in rows:
        cells.setdefault((r.C, r.alpha, r.delta), {})[r.algo] = r
    out = io.StringIO()
    header = ["C", "alpha", "delta"]
    for algo in algos:
        header += [f"{algo} mean", "min", "max", "std", "stat"]
    out.write("| " + " | ".join(header) + " |\n")
    out.write("|" + "---|" * len(header) + "\n")
    for (C, alpha, delta), per_algo in cells.items():
        fields_ = [f"{C:g}", f"{alpha:g}", f"{delta:g}"]
        for algo in algos:
            r = per_algo.get(algo)
            if r is None:
                fields_ += [""] * 5
            else:
                fields_ += [_fmt(r.mean, 2), _fmt(r.min, 2), _fmt(r.max, 2),
                            _fmt(r.std, 4), r.stat]
        out.write("| " + " | ".join(fields_) + " |\n")
    with open(path, "w") as fh:
        fh.write(out.getvalue())


def write_jsonl(entries: list[dict], path) -> None:
    with open(path, "w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def write_reports(rows: list[SummaryRow], csv_path, md_path) -> None:
    write_csv(rows, csv_path)
    write_markdown(rows, md_path)


# --- configuration and CLI -------------------------------------------------

def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    settings: dict = {}
    if args.config:
        raw = parse_config_file(args.config)
        casts = {
            "problem": str, "graph": str, "nodes": int, "edges": int,
            "edge_prob": float, "C": _float_list, "alpha": _float_list,
            "delta": _float_list, "algo": _str_list, "runs": int,
            "budget": int, "seed": int, "bound": str, "sims": int,
            "out": str, "log_runs": lambda s: s.lower() in ("1", "true", "yes"),
            "workers": int,
        }
        renames = {"C": "C_values", "alpha": "alphas", "delta": "deltas",
                   "algo": "algos", "out": "out_dir"}
        for key, value in raw.items():
            if key not in casts:
                raise ConfigError(f"unknown config key {key!r}")
            settings[renames.get(key, key)] = casts[key](value)
    overrides = {
        "problem": args.problem, "graph": args.graph, "nodes": args.nodes,
        "edges": args.edges, "edge_prob": args.p, "runs": args.runs,
        "budget": args.budget, "seed": args.seed, "bound": args.bound,
        "sims": args.sims, "out_dir": args.out, "workers": args.workers,
    }
    if args.C:
        overrides["C_values"] = _float_list(args.C)
    if args.alpha:
        overrides["alphas"] = _float_list(args.alpha)
    if args.delta:
        overrides["deltas"] = _float_list(args.delta)
    if args.algo is not None:
        overrides["algos"] = _str_list(args.algo)
    if args.log_runs:
        overrides["log_runs"] = True
    settings.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig(**settings)
    if args.desk_scale:
        cfg = replace(cfg, budget=100_000, runs=10)
    return cfg


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccsubmod-bench",
        description="Grid benchmark for chance-constrained submodular "
                    "maximization (greedy / GSEMO / NSGA-II).")
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--problem", choices=["coverage", "im", "im-file"])
    parser.add_argument("--graph", help="graph file (DIMACS edges or 'u v p')")
    parser.add_argument("--nodes", type=int, help="generator node count")
    parser.add_argument("--edges", type=int, help="generator edge count")
    parser.add_argument("--p", type=float, help="generator edge probability")
    parser.add_argument("--C", help="comma-separated budget grid, e.g. 10,15,20")
    parser.add_argument("--alpha", help="comma-separated alpha grid")
    parser.add_argument("--delta", help="comma-separated dispersion grid")
    parser.add_argument("--algo", help="comma-separated subset of "
                                       "greedy,gsemo,nsga2")
    parser.add_argument("--runs", type=int, help="repetitions per cell")
    parser.add_argument("--budget", type=int, help="fitness evaluations per run")
    parser.add_argument("--seed", type=int, help="base seed (run i uses seed+i)")
    parser.add_argument("--bound", choices=["auto", "chebyshev", "chernoff"])
    parser.add_argument("--sims", type=int, help="cascade simulations per "
                                                 "influence evaluation")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--workers", type=int, help="parallel worker processes")
    parser.add_argument("--desk-scale", action="store_true",
                        help="preset: budget 100000, 10 runs")
    parser.add_argument("--log-runs", action="store_true",
                        help="also write a per-run JSON-lines log")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        rows, log_entries = run_experiment(cfg)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_reports(rows, out_dir / "results.csv", out_dir / "results.md")
        if cfg.log_runs:
            write_jsonl(log_entries, out_dir / "runs.jsonl")
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out_dir / 'results.csv'} and {out_dir / 'results.md'}"
          + (f" and {out_dir / 'runs.jsonl'}" if cfg.log_runs else ""))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
