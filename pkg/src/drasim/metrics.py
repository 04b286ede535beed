"""Trajectory evaluation: AUC, final size, extinction time, batch statistics.

Everything here is a pure function of immutable trajectories, so batches
parallelize trivially. AUC is exact: the infected count is piecewise
constant between events and the interval sums keep integer counts.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .simulator import Trajectory


@dataclass(frozen=True)
class RunMetrics:
    """Scalars of one run; eet is None when the run was censored at t_max."""

    auc: float
    fis: int
    eet: float | None

    @property
    def censored(self) -> bool:
        return self.eet is None


@dataclass
class BatchSummary:
    """Mean infection curve with Gaussian 95% bands plus per-run metrics."""

    grid: np.ndarray
    mean_fraction: np.ndarray
    ci95_halfwidth: np.ndarray
    per_run: list
    run_count: int
    n_nodes: int
    t_max: float

    @property
    def mean_auc(self) -> float:
        return float(np.mean([m.auc for m in self.per_run]))

    @property
    def std_auc(self) -> float:
        if self.run_count < 2:
            return 0.0
        return float(np.std([m.auc for m in self.per_run], ddof=1))

    @property
    def auc_ci95_halfwidth(self) -> float:
        return 1.96 * self.std_auc / np.sqrt(self.run_count)

    @property
    def mean_fis(self) -> float:
        return float(np.mean([m.fis for m in self.per_run]))

    @property
    def censored_count(self) -> int:
        return sum(1 for m in self.per_run if m.censored)

    @property
    def mean_eet_uncensored(self) -> float | None:
        vals = [m.eet for m in self.per_run if not m.censored]
        return float(np.mean(vals)) if vals else None


def auc(traj: Trajectory) -> float:
    """Exact time-integral of the infected count up to final_time."""
    times, counts = traj.infected_count_steps()
    bounds = np.concatenate(([0.0], times, [traj.final_time]))
    return float(np.dot(np.diff(bounds), counts))


def final_infection(traj: Trajectory) -> int:
    """Infected count at the end of the run."""
    _, counts = traj.infected_count_steps()
    return int(counts[-1])


def extinction_time(traj: Trajectory) -> float | None:
    """First time the infected count hits zero; None when censored at t_max."""
    return traj.extinction_event_time()


def run_metrics(traj: Trajectory) -> RunMetrics:
    return RunMetrics(auc=auc(traj), fis=final_infection(traj), eet=extinction_time(traj))


def batch_summary(trajectories, grid_points: int = 101) -> BatchSummary:
    """Aggregate equal-setup runs onto a shared time grid.

    The half-width is 1.96 * sample std / sqrt(M) per grid point (Gaussian
    hypothesis); zero for a single run.
    """
    if not trajectories:
        raise ValueError("empty batch")
    t_max = trajectories[0].t_max
    n = trajectories[0].n_nodes
    for tr in trajectories:
        if tr.t_max != t_max or tr.n_nodes != n:
            raise ValueError("trajectories in a batch must share t_max and node count")
    grid = np.linspace(0.0, t_max, grid_points)
    fracs = np.empty((len(trajectories), grid_points))
    for r, tr in enumerate(trajectories):
        fracs[r] = tr.counts_at(grid) / n
    mean = fracs.mean(axis=0)
    m = len(trajectories)
    if m > 1:
        hw = 1.96 * fracs.std(axis=0, ddof=1) / np.sqrt(m)
    else:
        hw = np.zeros(grid_points)
    return BatchSummary(
        grid=grid,
        mean_fraction=mean,
        ci95_halfwidth=hw,
        per_run=[run_metrics(tr) for tr in trajectories],
        run_count=m,
        n_nodes=n,
        t_max=t_max,
    )


def auc_ratio(batch_a: BatchSummary, batch_b: BatchSummary) -> float:
    """Mean-AUC ratio a/b. Both zero gives 1.0; only b zero gives inf."""
    num, den = batch_a.mean_auc, batch_b.mean_auc
    if den == 0.0:
        return 1.0 if num == 0.0 else float("inf")
    return num / den


# ---------------------------------------------------------------------------
# CSV output. Floats are written with repr() so reruns are byte-identical.
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_runs_csv(path, rows) -> None:
    """One row per run: seed, strategy, params, auc, fis, eet, censored."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "strategy", "params", "auc", "fis", "eet", "censored"])
        for row in rows:
            m: RunMetrics = row["metrics"]
            w.writerow([
                row["seed"],
                row["strategy"],
                json.dumps(row["params"], sort_keys=True, separators=(",", ":")),
                _fmt(m.auc),
                m.fis,
                "" if m.eet is None else _fmt(m.eet),
                int(m.censored),
            ])


def write_summary_csv(path, summary: BatchSummary) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mean_infected_fraction", "ci95_halfwidth"])
        for t, mu, hw in zip(summary.grid, summary.mean_fraction, summary.ci95_halfwidth):
            w.writerow([_fmt(float(t)), _fmt(float(mu)), _fmt(float(hw))])


def write_aggregate_csv(path, entries) -> None:
    """Per-strategy scalars of a scenario: AUC/FIS/EET aggregates."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "strategy", "runs", "mean_auc", "std_auc", "auc_ci95_halfwidth",
            "mean_fis", "mean_eet_uncensored", "censored_runs",
        ])
        for name, s in entries:
            w.writerow([
                name, s.run_count, _fmt(s.mean_auc), _fmt(s.std_auc),
                _fmt(float(s.auc_ci95_halfwidth)), _fmt(s.mean_fis),
                "" if s.mean_eet_uncensored is None else _fmt(s.mean_eet_uncensored),
                s.censored_count,
            ])


def write_heatmap_csv(path, cells) -> None:
    """Fig-3 style map: one row per (s_I, a_I) cell with ratio and gLRIE FIS."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s_I", "a_I", "ratio", "fis"])
        for cell in cells:
            w.writerow([
                _fmt(float(cell["s_inf"])),
                _fmt(float(cell["a_inf"])),
                _fmt(float(cell["ratio"])),
                _fmt(float(cell["fis"])),
            ])
