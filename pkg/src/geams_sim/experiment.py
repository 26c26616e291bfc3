"""Experiment matrix runner: every (protocol, node count, seed) cell once,
with CSV outputs written in deterministic plan order regardless of how the
cells were scheduled.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .engine import run_scenario
from .metrics import (MetricsReport, PACKET_COLUMNS, REGIONAL_COLUMNS,
                      SUMMARY_COLUMNS, packet_rows, regional_rows, summary_row,
                      write_csv)
from .scenario import PROTOCOLS, ScenarioConfig, ScenarioError

DEFAULT_NODE_COUNTS = (30, 50, 80, 100)

COMPARISON_METRICS = (
    ("dead", lambda r: float(r.dead_nodes)),
    ("mean_e", lambda r: r.mean_energy),
    ("var_e", lambda r: r.energy_variance),
    ("delay_mean", lambda r: r.delay_mean),
    ("delay_var", lambda r: r.delay_variance),
    ("delivered", lambda r: float(r.delivered)),
    ("lost_total", lambda r: float(r.lost_total)),
)

COMPARISON_COLUMNS = ["n", "metric", "mean_delta", "min_delta", "max_delta"]


@dataclass(frozen=True)
class ExperimentPlan:
    seeds: tuple[int, ...]
    node_counts: tuple[int, ...] = DEFAULT_NODE_COUNTS
    protocols: tuple[str, ...] = PROTOCOLS
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if not self.seeds or not self.node_counts or not self.protocols:
            raise ScenarioError("plan lists must be nonempty")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ScenarioError(f"unknown protocol {p!r}; expected one of {PROTOCOLS}")

    def cells(self) -> list[ScenarioConfig]:
        return [
            self.base.replace(protocol=p, n_sensors=n, seed=s)
            for p in self.protocols
            for n in self.node_counts
            for s in self.seeds
        ]


def _run_cell(cfg: ScenarioConfig) -> MetricsReport:
    return run_scenario(cfg)


def run_experiment(plan: ExperimentPlan, out_dir, jobs: int = 1,
                   write_packets: bool = False) -> list[MetricsReport]:
    """Run the full matrix and write summary.csv, regional.csv and
    comparison.csv (plus packets.csv when asked) under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    cells = plan.cells()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_cell, cells))
    else:
        reports = [_run_cell(c) for c in cells]

    sum_rows, reg_rows, pk_rows = [], [], []
    for cfg, rep in zip(cells, reports):
        key = (cfg.protocol, cfg.seed, cfg.n_sensors)
        sum_rows.append(summary_row(rep, *key))
        reg_rows.extend(regional_rows(rep, *key))
        if write_packets:
            pk_rows.extend(packet_rows(rep, *key))
    write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_COLUMNS, sum_rows)
    write_csv(os.path.join(out_dir, "regional.csv"), REGIONAL_COLUMNS, reg_rows)
    if write_packets:
        write_csv(os.path.join(out_dir, "packets.csv"), PACKET_COLUMNS, pk_rows)

    if "geams" in plan.protocols and "gpsr" in plan.protocols:
        write_csv(os.path.join(out_dir, "comparison.csv"), COMPARISON_COLUMNS,
                  _comparison_rows(plan, cells, reports))
    return reports


def _comparison_rows(plan, cells, reports) -> list[list[str]]:
    """Per node count and metric: geams-minus-gpsr delta per seed, aggregated
    over seeds as mean / min / max.  Seeds where either side lacks the metric
    (no delivered packets) are skipped for the delay rows."""
    by_cell = {(c.protocol, c.n_sensors, c.seed): r for c, r in zip(cells, reports)}
    rows = []
    for n in plan.node_counts:
        for name, get in COMPARISON_METRICS:
            deltas = []
            for s in plan.seeds:
                a = get(by_cell[("geams", n, s)])
                b = get(by_cell[("gpsr", n, s)])
                if a is None or b is None:
                    continue
                deltas.append(a - b)
            if not deltas:
                rows.append([str(n), name, "", "", ""])
                continue
            mean = sum(deltas) / len(deltas)
            rows.append([str(n), name, repr(mean), repr(min(deltas)), repr(max(deltas))])
    return rows
