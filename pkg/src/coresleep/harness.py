"""Experiment driver: parameter sweeps over paired policy comparisons.

One sweep varies a single axis (per-core utilization, switching overhead,
core count, or the mean actual-to-worst-case execution ratio) while holding
the other parameters fixed.  Within a repetition all three policies see the
identical task set, partition, and per-job execution-time draws, which makes
the 100-run means stable at desk scale.  Energies are normalized to the
leakage-aware DVS policy.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from multiprocessing import Pool

from . import engine
from .partition import PartitionError, ltf_partition
from .policies import PolicyKind, ReallocOptions
from .power import PowerParams, PowerTable, default_power_params, derive_speeds
from .workload import WorkloadError, generate_task_set

AXES = ("U", "E_sw", "m", "cc_ratio")
POLICY_ORDER = (PolicyKind.PURE_DVS, PolicyKind.LA_DVS, PolicyKind.LA_REALLOC)

# Canonical grids for the four comparative experiments; any sweep may
# override them with explicit values.
DEFAULT_GRIDS = {
    "U": tuple(round(0.1 * k, 10) for k in range(1, 11)),
    "E_sw": tuple(round(1e-4 * k, 14) for k in range(0, 11)),
    "m": (2, 4, 8, 16),
    "cc_ratio": tuple(round(0.05 * k, 10) for k in range(1, 21)),
}

NAN = float("nan")


class SweepError(ValueError):
    """Invalid sweep specification or degenerate normalization."""


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: an axis with its values plus the fixed parameters."""

    axis: str
    values: tuple
    u: float = 0.3                 # per-core average utilization, U_tot / m
    e_sw_j: float = 5e-4
    m: int = 2
    cc_ratio: float = 0.5
    n_range: tuple[int, int] = (10, 20)
    period_range_ms: tuple[float, float] = (10.0, 100.0)
    duration_ms: float = 10_000.0
    repetitions: int = 100
    base_seed: int = 1
    realloc: ReallocOptions = field(default_factory=ReallocOptions)
    max_partition_retries: int = 50

    def __post_init__(self):
        if self.axis not in AXES:
            raise SweepError(f"axis must be one of {AXES}")
        vals = tuple(self.values)
        if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
            raise SweepError("axis values must be nonempty and strictly increasing")
        object.__setattr__(self, "values", vals)
        for value in vals:
            self._check_axis_value(value)
        if self.repetitions < 1:
            raise SweepError("need at least one repetition")
        if not (1 <= self.n_range[0] <= self.n_range[1]):
            raise SweepError("bad task-count range")

    def _check_axis_value(self, value):
        if self.axis == "U" and not (0.0 < value <= 1.0):
            raise SweepError(f"U value {value} outside (0, 1]")
        if self.axis == "E_sw" and value < 0:
            raise SweepError(f"E_sw value {value} negative")
        if self.axis == "m" and (int(value) != value or value < 1):
            raise SweepError(f"core count {value} not a positive integer")
        if self.axis == "cc_ratio" and not (0.0 < value <= 1.0):
            raise SweepError(f"cc ratio {value} outside (0, 1]")

    def fixed_for(self, value):
        """The (u, e_sw, m, cc_ratio) tuple with the axis value applied."""
        u, e_sw, m, cc = self.u, self.e_sw_j, self.m, self.cc_ratio
        if self.axis == "U":
            u = value
        elif self.axis == "E_sw":
            e_sw = value
        elif self.axis == "m":
            m = int(value)
        else:
            cc = value
        return u, e_sw, m, cc


@dataclass
class ResultRow:
    axis: str
    value: float
    policy: str
    energy_j: float
    normalized: float
    misses: float
    wakes: float
    failed_sleeps: float
    runs: int


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[ResultRow]
    skipped: dict

    def row(self, value, policy: PolicyKind) -> ResultRow:
        for r in self.rows:
            if r.value == value and r.policy == policy.value:
                return r
        raise KeyError((value, policy))


def _instance_for(seed, n_range, u_tot, m, period_range_ms, max_retries):
    """Deterministically draw a task set admitting a feasible partition.

    Returns (task_set, assignment), or None when the configuration point is
    infeasible (utilization target too high for the drawn task count, or
    every partition resample failed).
    """
    rng = random.Random(f"ts:{seed}")
    n = rng.randint(*n_range)
    for attempt in range(max_retries):
        try:
            task_set = generate_task_set(
                n, u_tot, period_range_ms=period_range_ms, seed=f"{seed}:{attempt}"
            )
            return task_set, ltf_partition(task_set, m)
        except (WorkloadError, PartitionError):
            continue
    return None


# Worker-process globals, set once per worker by _init_worker.
_WORKER_CTX: dict = {}


def _init_worker(spec, params, derived, table):
    _WORKER_CTX["spec"] = spec
    _WORKER_CTX["params"] = params
    _WORKER_CTX["derived"] = derived
    _WORKER_CTX["table"] = table


def _run_repetition(job):
    value_index, rep = job
    spec: SweepSpec = _WORKER_CTX["spec"]
    value = spec.values[value_index]
    u, e_sw, m, cc = spec.fixed_for(value)
    seed = spec.base_seed + rep
    instance = _instance_for(
        seed, spec.n_range, u * m, m, spec.period_range_ms, spec.max_partition_retries
    )
    if instance is None:
        return value_index, rep, None
    task_set, assignment = instance
    out = {}
    for policy in POLICY_ORDER:
        cfg = engine.SimConfig(
            params=_WORKER_CTX["params"],
            cores=m,
            duration_ms=spec.duration_ms,
            e_sw_j=e_sw,
            cc_mean_ratio=cc,
            policy=policy,
            seed=seed,
            realloc=spec.realloc,
            derived=_WORKER_CTX["derived"],
            power_table=_WORKER_CTX["table"],
        )
        ledger, _ = engine.run(cfg, task_set, assignment)
        out[policy.value] = (
            ledger.total_j,
            ledger.deadline_miss_count,
            ledger.wake_count,
            ledger.failed_sleep_count,
        )
    return value_index, rep, out


def run_sweep(spec: SweepSpec, params: PowerParams | None = None, workers: int = 1) -> SweepResult:
    """Run the full sweep and aggregate per-policy means.

    Repetitions are independent and may run in parallel; results are reduced
    in (axis value, repetition) order so the outcome does not depend on the
    worker count.
    """
    params = params or default_power_params()
    derived = derive_speeds(params)
    table = PowerTable(params, derived)

    jobs = [(vi, rep) for vi in range(len(spec.values)) for rep in range(spec.repetitions)]
    if workers > 1:
        with Pool(workers, initializer=_init_worker, initargs=(spec, params, derived, table)) as pool:
            raw = pool.map(_run_repetition, jobs, chunksize=4)
    else:
        _init_worker(spec, params, derived, table)
        raw = [_run_repetition(job) for job in jobs]
    raw.sort(key=lambda item: (item[0], item[1]))

    rows: list[ResultRow] = []
    skipped: dict = {}
    for vi, value in enumerate(spec.values):
        cells = [out for (i, _, out) in raw if i == vi and out is not None]
        skipped[value] = spec.repetitions - len(cells)
        for policy in POLICY_ORDER:
            if cells:
                n = len(cells)
                sums = [0.0, 0.0, 0.0, 0.0]
                for out in cells:
                    for k in range(4):
                        sums[k] += out[policy.value][k]
                energy, misses, wakes, failed = (s / n for s in sums)
            else:
                n = 0
                energy = misses = wakes = failed = NAN
            rows.append(ResultRow(
                axis=spec.axis, value=value, policy=policy.value,
                energy_j=energy, normalized=NAN,
                misses=misses, wakes=wakes, failed_sleeps=failed, runs=n,
            ))
    result = SweepResult(spec=spec, rows=rows, skipped=skipped)
    normalize(result)
    return result


def normalize(result: SweepResult) -> SweepResult:
    """Divide each policy's mean energy by the leakage-aware DVS mean at the
    same axis value."""
    for value in result.spec.values:
        ref = result.row(value, PolicyKind.LA_DVS)
        if ref.runs and ref.energy_j == 0.0:
            raise SweepError(f"degenerate configuration: zero energy at {value}")
        for policy in POLICY_ORDER:
            row = result.row(value, policy)
            row.normalized = row.energy_j / ref.energy_j if ref.runs else NAN
    return result


def emit(result: SweepResult, path) -> None:
    """Write the sweep CSV (with a provenance header) and a companion plot
    script next to it.  Re-emitting the same result is byte-identical."""
    spec = result.spec
    lines = []
    lines.append("# coresleep sweep result")
    lines.append(f"# axis = {spec.axis}")
    lines.append(f"# values = {','.join(repr(v) for v in spec.values)}")
    lines.append(f"# u = {spec.u!r}")
    lines.append(f"# e_sw_j = {spec.e_sw_j!r}")
    lines.append(f"# m = {spec.m!r}")
    lines.append(f"# cc_ratio = {spec.cc_ratio!r}")
    lines.append(f"# n_range = {spec.n_range[0]}:{spec.n_range[1]}")
    lines.append(f"# period_range_ms = {spec.period_range_ms[0]!r}:{spec.period_range_ms[1]!r}")
    lines.append(f"# duration_ms = {spec.duration_ms!r}")
    lines.append(f"# repetitions = {spec.repetitions}")
    lines.append(f"# base_seed = {spec.base_seed}")
    lines.append(f"# realloc = bonus:{spec.realloc.bonus} s_rule:{spec.realloc.s_rule}")
    skipped_total = sum(result.skipped.values())
    lines.append(f"# skipped_repetitions = {skipped_total}")
    lines.append("axis,value,policy,energy_j,normalized,misses,wakes,failed_sleeps,runs")
    for row in result.rows:
        lines.append(
            f"{row.axis},{row.value!r},{row.policy},{row.energy_j!r},{row.normalized!r},"
            f"{row.misses!r},{row.wakes!r},{row.failed_sleeps!r},{row.runs}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_plot_script(path)


def _write_plot_script(csv_path) -> None:
    script_path = str(csv_path)
    script_path = script_path[:-4] if script_path.endswith(".csv") else script_path
    script_path += "_plot.py"
    body = f'''"""Plot normalized energy per policy from {csv_path!s}."""
import csv

import matplotlib.pyplot as plt

with open({str(csv_path)!r}) as fh:
    data = [line for line in fh if not line.startswith("#")]
rows = list(csv.DictReader(data))

axis = rows[0]["axis"] if rows else "value"
for policy in ("pure_dvs", "la_dvs", "la_realloc"):
    pts = [(float(r["value"]), float(r["normalized"])) for r in rows if r["policy"] == policy]
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=policy)
plt.xlabel(axis)
plt.ylabel("energy normalized to la_dvs")
plt.legend()
plt.grid(True, alpha=0.3)
plt.savefig({str(csv_path)!r}.rsplit(".", 1)[0] + ".png", dpi=150)
print("wrote", {str(csv_path)!r}.rsplit(".", 1)[0] + ".png")
'''
    with open(script_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)


def run_single(
    params: PowerParams,
    policy: PolicyKind,
    m: int = 2,
    u: float = 0.3,
    e_sw_j: float = 5e-4,
    cc_ratio: float = 0.5,
    n_range: tuple[int, int] = (10, 20),
    period_range_ms: tuple[float, float] = (10.0, 100.0),
    duration_ms: float = 10_000.0,
    seed: int = 1,
    realloc: ReallocOptions | None = None,
    collect_trace: bool = False,
    max_partition_retries: int = 50,
):
    """Generate one instance and simulate it under one policy.

    Returns (task_set, assignment, ledger, trace).
    """
    instance = _instance_for(seed, n_range, u * m, m, period_range_ms, max_partition_retries)
    if instance is None:
        raise PartitionError(f"no feasible partition for seed {seed} after resampling")
    task_set, assignment = instance
    cfg = engine.SimConfig(
        params=params,
        cores=m,
        duration_ms=duration_ms,
        e_sw_j=e_sw_j,
        cc_mean_ratio=cc_ratio,
        policy=policy,
        seed=seed,
        realloc=realloc or ReallocOptions(),
        collect_trace=collect_trace,
    )
    ledger, trace = engine.run(cfg, task_set, assignment)
    return task_set, assignment, ledger, trace
