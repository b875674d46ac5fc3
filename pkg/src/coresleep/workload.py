"""Periodic tasks, jobs, utilizations, and the random task-set generator.

Time is kept in integer nanoseconds so event ordering in the simulator is
exact; public constructors accept milliseconds.  Work quantities (worst-case
and actual execution time at maximum speed) are float nanoseconds.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass

NS_PER_MS = 1_000_000


class WorkloadError(ValueError):
    """Raised for invalid task parameters or infeasible generator targets."""


@dataclass(frozen=True)
class Task:
    """One periodic task: period and worst-case execution time at f_max.

    The relative deadline equals the period.
    """

    id: int
    period_ns: int
    wcet_ns: float

    def __post_init__(self):
        if self.period_ns <= 0:
            raise WorkloadError(f"task {self.id}: period must be positive")
        if not (0 < self.wcet_ns <= self.period_ns):
            raise WorkloadError(f"task {self.id}: need 0 < wcet <= period")

    @property
    def utilization(self) -> float:
        return self.wcet_ns / self.period_ns

    @property
    def period_ms(self) -> float:
        return self.period_ns / NS_PER_MS

    @property
    def wcet_ms(self) -> float:
        return self.wcet_ns / NS_PER_MS


def task_from_ms(task_id: int, period_ms: float, wcet_ms: float) -> Task:
    return Task(id=task_id, period_ns=round(period_ms * NS_PER_MS), wcet_ns=wcet_ms * NS_PER_MS)


class Job:
    """A released instance of a task.  ``remaining_ns`` is work left,
    expressed as execution time at maximum speed."""

    __slots__ = ("task_id", "index", "arrival_ns", "deadline_ns", "cc_ns", "remaining_ns")

    def __init__(self, task: Task, index: int, cc_ns: float):
        self.task_id = task.id
        self.index = index
        self.arrival_ns = (index - 1) * task.period_ns
        self.deadline_ns = index * task.period_ns
        self.cc_ns = cc_ns
        self.remaining_ns = cc_ns

    def __repr__(self):
        return (f"Job(task={self.task_id}, j={self.index}, a={self.arrival_ns}, "
                f"d={self.deadline_ns}, cc={self.cc_ns})")


@dataclass(frozen=True)
class TaskSet:
    tasks: tuple[Task, ...]

    def __post_init__(self):
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise WorkloadError("duplicate task ids")
        object.__setattr__(self, "tasks", tuple(sorted(self.tasks, key=lambda t: t.id)))

    @property
    def total_utilization(self) -> float:
        return sum(t.utilization for t in self.tasks)

    def __len__(self):
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)


def static_utilization(task: Task) -> float:
    """wcet / period."""
    return task.wcet_ns / task.period_ns


def dynamic_utilization(task: Task, finished: bool, cc_ns: float | None = None) -> float:
    """Utilization of the nearest invocation: wcet/period while it is pending,
    actual-time/period once it completed."""
    if not finished:
        return task.wcet_ns / task.period_ns
    if cc_ns is None:
        raise WorkloadError("finished invocation needs its actual execution time")
    return cc_ns / task.period_ns

def next_release(task: Task, t_ns: int) -> int:
    """First release of ``task`` strictly after ``t_ns``."""
    return (t_ns // task.period_ns) * task.period_ns + task.period_ns


def uunifast(n: int, u_target: float, rng: random.Random) -> list[float]:
    """Unbiased split of ``u_target`` into ``n`` task utilizations."""
    sum_u = u_target
    out = []
    for i in range(1, n):
        next_sum = sum_u * rng.random() ** (1.0 / (n - i))
        out.append(sum_u - next_sum)
        sum_u = next_sum
    out.append(sum_u)
    return out


def generate_task_set(
    n: int,
    u_target: float,
    period_range_ms: tuple[float, float] = (10.0, 100.0),
    seed: int | str = 0,
    max_tasks: int = 20,
    max_retries: int = 1000,
) -> TaskSet:
    """Random task set: ``n`` tasks, utilizations summing to ``u_target``.

    Periods are uniform over ``period_range_ms``; utilizations come from the
    UUniFast recursion, resampled until every task fits on one core
    (u_i <= 1).  Deterministic for a given ``seed``.
    """
    if not (1 <= n <= max_tasks):
        raise WorkloadError(f"n={n} outside [1, {max_tasks}]")
    if u_target <= 0:
        raise WorkloadError("u_target must be positive")
    if u_target > n:
        raise WorkloadError(f"cannot split U={u_target} into {n} tasks with u_i <= 1")
    lo_ms, hi_ms = period_range_ms
    if not (0 < lo_ms <= hi_ms):
        raise WorkloadError("bad period range")

    rng = random.Random(seed)
    for _ in range(max_retries):
        utils = uunifast(n, u_target, rng)
        if all(0.0 < u <= 1.0 for u in utils):
            break
    else:
        raise WorkloadError(f"no feasible utilization split after {max_retries} tries")

    tasks = []
    for i, u in enumerate(utils):
        period_ns = round(rng.uniform(lo_ms, hi_ms) * NS_PER_MS)
        tasks.append(Task(id=i, period_ns=period_ns, wcet_ns=u * period_ns))
    return TaskSet(tasks=tuple(tasks))


def draw_actual_ratio(mean_ratio: float, rng: random.Random) -> float:
    """Actual-to-worst-case execution ratio for one invocation.

    Uniform on [max(0, 2m-1), min(1, 2m)] so the expectation is exactly
    ``mean_ratio``; strictly positive.
    """
    if not (0.0 < mean_ratio <= 1.0):
        raise WorkloadError(f"mean ratio {mean_ratio} outside (0, 1]")
    lo = max(0.0, 2.0 * mean_ratio - 1.0)
    hi = min(1.0, 2.0 * mean_ratio)
    while True:
        r = rng.uniform(lo, hi)
        if r > 0.0:
            return r


def write_task_set_csv(task_set: TaskSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "period_ms", "wcet_ms"])
        for t in task_set:
            writer.writerow([t.id, repr(t.period_ms), repr(t.wcet_ms)])


def read_task_set_csv(path) -> TaskSet:
    tasks = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            tasks.append(task_from_ms(int(row["id"]), float(row["period_ms"]), float(row["wcet_ms"])))
    return TaskSet(tasks=tuple(tasks))
