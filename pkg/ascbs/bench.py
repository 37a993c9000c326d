"""
Benchmark sweeps for the ASCBS variants.
Runs every (streams, cycle, seed, variant) cell of a sweep on one map and scenario, writes one
CSV row per cell and summarizes success rate and mean runtime.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from ascbs.grid import load_map
from ascbs.instance import load_scen
from ascbs.search.high_level import Outcome, SolverConfig, VARIANTS, solve
from ascbs.utils.logging import get_logger


@dataclass
class BenchRow:
    map: str
    scen: str
    n_streams: int
    cycle: int
    seed: int
    variant: str
    outcome: str
    soc: Optional[int]
    runtime_ms: float
    ct_expanded: int
    ct_generated: int
    low_level_expansions: int


BENCH_COLUMNS = list(BenchRow.__dataclass_fields__)


@dataclass(frozen=True)
class BenchTask:
    map_path: str
    scen_path: str
    n_streams: int
    cycle: int
    seed: int
    variant: str
    timeout: float
    deterministic: bool = False


def _basename(path: str) -> str:
    return os.path.basename(path)


def run_task(task: BenchTask) -> BenchRow:
    """Generate one instance and solve it with one variant."""
    m = load_map(task.map_path)
    inst = load_scen(task.scen_path, m, task.n_streams, task.cycle, task.seed)
    cfg = SolverConfig.from_variant(task.variant, timeout=task.timeout, rng_seed=task.seed)
    report = solve(inst, cfg)

    if task.deterministic:
        runtime_ms = 0.0
    elif report.outcome == Outcome.TIMEOUT:
        # timeout rows count as the full budget
        runtime_ms = round(task.timeout * 1000, 3)
    else:
        runtime_ms = round(min(report.elapsed, task.timeout) * 1000, 3)

    return BenchRow(
        map=_basename(task.map_path),
        scen=_basename(task.scen_path),
        n_streams=task.n_streams,
        cycle=task.cycle,
        seed=task.seed,
        variant=task.variant,
        outcome=report.outcome.value,
        soc=report.soc,
        runtime_ms=runtime_ms,
        ct_expanded=report.ct_expanded,
        ct_generated=report.ct_generated,
        low_level_expansions=report.low_level_expansions,
    )


class BenchExperiment:
    """A sweep over stream counts, cycle times, seeds and solver variants"""

    def __init__(self,
                 map_path: str,
                 scen_path: str,
                 streams_list: Sequence[int],
                 cycle_list: Sequence[int],
                 seeds: int = 4,
                 base_seed: int = 0,
                 variants: Sequence[str] = tuple(VARIANTS),
                 timeout: float = 60.0,
                 jobs: int = 1,
                 deterministic: bool = False):
        """
        Initialize the sweep

        Args:
            map_path: Benchmark map file
            scen_path: Benchmark scenario file for the map
            streams_list: Stream counts to test
            cycle_list: Cycle times to test
            seeds: Instances per (streams, cycle) cell; seeds are base_seed .. base_seed + seeds - 1
            base_seed: First seed
            variants: Solver variants ('a-nd', 'a-d', 'ida-nd', 'ida-d')
            timeout: Wall-clock budget per solve in seconds
            jobs: Worker processes; rows keep canonical order whatever the value
            deterministic: Zero the runtime column so reruns give identical CSV files
        """
        unknown = [v for v in variants if v not in VARIANTS]
        if unknown:
            raise ValueError(f"Unknown variants {unknown}, expected some of {sorted(VARIANTS)}")
        if seeds < 1:
            raise ValueError(f"Need at least one seed, got {seeds}")
        if jobs < 1:
            raise ValueError(f"Need at least one job, got {jobs}")
        if any(c < 1 for c in cycle_list):
            raise ValueError(f"Cycle times must be positive, got {list(cycle_list)}")

        self.map_path = map_path
        self.scen_path = scen_path
        self.streams_list = list(streams_list)
        self.cycle_list = list(cycle_list)
        self.seeds = [base_seed + offset for offset in range(seeds)]
        self.variants = list(variants)
        self.timeout = timeout
        self.jobs = jobs
        self.deterministic = deterministic
        self.results_df: Optional[pd.DataFrame] = None
        self.logger = get_logger()

        # fail on unreadable inputs before any solve runs
        m = load_map(map_path)
        if self.streams_list:
            load_scen(scen_path, m, max(self.streams_list), 1, 0)

    def tasks(self) -> List[BenchTask]:
        """Sweep cells in canonical (streams, cycle, seed, variant) order."""
        return [
            BenchTask(self.map_path, self.scen_path, n, c, seed, variant, self.timeout, self.deterministic)
            for n in self.streams_list
            for c in self.cycle_list
            for seed in self.seeds
            for variant in self.variants
        ]

    def run_experiments(self) -> pd.DataFrame:
        """
        Run every cell of the sweep

        Returns:
            DataFrame with one row per cell, columns in BENCH_COLUMNS order
        """
        tasks = self.tasks()
        self.logger.info(f"Bench sweep: {len(tasks)} solves on {_basename(self.map_path)} with {self.jobs} job(s)")
        if self.jobs == 1:
            rows = [run_task(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                rows = list(pool.map(run_task, tasks))

        df = pd.DataFrame([asdict(row) for row in rows], columns=BENCH_COLUMNS)
        df["soc"] = df["soc"].astype("Int64")
        self.results_df = df
        return df

    def save(self, csv_path: str) -> None:
        if self.results_df is None:
            raise ValueError("Run the sweep before saving it")
        directory = os.path.dirname(csv_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        self.results_df.to_csv(csv_path, index=False, lineterminator="\n")
        self.logger.info(f"Bench results saved to {csv_path}")

    def summary(self) -> pd.DataFrame:
        return summarize(self.results_df)


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """Success rate and mean clamped runtime per (n_streams, cycle, variant)."""
    if df is None or len(df) == 0:
        return pd.DataFrame(columns=["n_streams", "cycle", "variant", "runs", "success_rate", "mean_runtime_ms"])
    solved = (df["outcome"] == Outcome.SOLVED.value).astype(float)
    grouped = df.assign(solved=solved).groupby(["n_streams", "cycle", "variant"], sort=True)
    summary = grouped.agg(
        runs=("solved", "size"),
        success_rate=("solved", "mean"),
        mean_runtime_ms=("runtime_ms", "mean"),
    ).reset_index()
    summary["success_rate"] = np.round(summary["success_rate"], 4)
    summary["mean_runtime_ms"] = np.round(summary["mean_runtime_ms"], 3)
    return summary
