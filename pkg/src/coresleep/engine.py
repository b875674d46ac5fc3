"""Deterministic discrete-event simulator.

Per-core preemptive EDF dispatch, a single global speed shared by all cores,
sleep-state management with a break-even threshold, wake-up switching energy,
and exact piecewise-constant energy integration between events.

Equal-time events are ordered releases before completions before wakes, then
by task/core id, then by insertion sequence; together with integer-nanosecond
timestamps this makes every run bit-reproducible.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field

from . import policies
from .partition import Assignment
from .policies import PolicyKind, ReallocOptions
from .power import DerivedSpeeds, PowerParams, PowerTable, derive_speeds, sleep_threshold
from .workload import NS_PER_MS, Job, TaskSet, draw_actual_ratio, next_release

EV_RELEASE, EV_COMPLETE, EV_WAKE = 0, 1, 2
ACTIVE, SLEEPING = 0, 1

TRACE_COLUMNS = ("time_ns", "core", "event", "task", "detail")


class EngineError(RuntimeError):
    """An internal invariant was violated during simulation."""


class TaskRun:
    """Mutable per-task simulation state: current home core, completion
    status of the nearest invocation, and the task's private draw stream for
    actual execution times."""

    __slots__ = ("task", "core", "last_completed_arrival", "last_cc_ns", "next_index", "cc_rng")

    def __init__(self, task, core_index, seed):
        self.task = task
        self.core = core_index
        self.last_completed_arrival = -1
        self.last_cc_ns = 0.0
        self.next_index = 1
        # Stream keyed by (run seed, task id): identical across policies so
        # paired comparisons see the same actual execution times per job.
        self.cc_rng = random.Random(f"{seed}:{task.id}")


class Core:
    __slots__ = (
        "index", "members", "ready", "state", "running",
        "sched_job", "sched_speed", "sched_version",
        "sleep_until", "wake_version", "idle_evaluated",
    )

    def __init__(self, index):
        self.index = index
        self.members = []          # TaskRun list, sorted by task id
        self.ready = []            # released unfinished jobs (running included)
        self.state = ACTIVE
        self.running = None
        self.sched_job = None
        self.sched_speed = -1.0
        self.sched_version = 0
        self.sleep_until = None
        self.wake_version = 0
        self.idle_evaluated = False


@dataclass
class EnergyLedger:
    """Energy and event accounting for one run.  The total is the sum of its
    parts by construction."""

    busy_j: list[float]
    idle_j: list[float]
    switch_j: float = 0.0
    wake_count: int = 0
    failed_sleep_count: int = 0
    deadline_miss_count: int = 0
    realloc_count: int = 0
    # One record per reallocation commit: (dest static util, dest dynamic
    # util, source dynamic util, speed before, speed after)
    realloc_checks: list[tuple] = field(default_factory=list)

    @property
    def busy_total_j(self) -> float:
        return sum(self.busy_j)

    @property
    def idle_total_j(self) -> float:
        return sum(self.idle_j)

    @property
    def total_j(self) -> float:
        return sum(self.busy_j) + sum(self.idle_j) + self.switch_j


@dataclass
class SimConfig:
    """Everything one run depends on besides the task set and partition."""

    params: PowerParams
    cores: int = 2
    duration_ms: float = 10_000.0
    e_sw_j: float = 5e-4
    cc_mean_ratio: float = 0.5
    policy: PolicyKind = PolicyKind.LA_REALLOC
    seed: int = 0
    realloc: ReallocOptions = field(default_factory=ReallocOptions)
    derived: DerivedSpeeds | None = None
    power_table: PowerTable | None = None
    # Overrides for pinned-scenario tests; None derives them from the model.
    critical_scale_override: float | None = None
    t_th_ms_override: float | None = None
    collect_trace: bool = False

    def __post_init__(self):
        if self.cores < 1:
            raise ValueError("need at least one core")
        if self.duration_ms <= 0:
            raise ValueError("duration must be positive")
        if self.e_sw_j < 0:
            raise ValueError("switching overhead must be nonnegative")
        if not (0.0 < self.cc_mean_ratio <= 1.0):
            raise ValueError("cc mean ratio must be in (0, 1]")


def edf_pick(jobs):
    """Ready job with the earliest deadline; ties by smaller task id."""
    if not jobs:
        return None
    return min(jobs, key=lambda jb: (jb.deadline_ns, jb.task_id))


class Simulator:
    def __init__(self, config: SimConfig, task_set: TaskSet, assignment: Assignment):
        if assignment.cores != config.cores:
            raise ValueError("assignment core count does not match configuration")
        self.cfg = config
        self.params = config.params
        self.derived = config.derived or derive_speeds(config.params)
        self.table = config.power_table or PowerTable(config.params, self.derived)
        self.min_scale = self.derived.min_scale
        if config.critical_scale_override is not None:
            self.critical_scale = config.critical_scale_override
        else:
            self.critical_scale = self.derived.critical_scale
        if config.t_th_ms_override is not None:
            self.t_th_ns = config.t_th_ms_override * NS_PER_MS
        else:
            self.t_th_ns = sleep_threshold(self.params, self.derived, config.e_sw_j) * 1e9
        self.duration_ns = round(config.duration_ms * NS_PER_MS)

        self.cores = [Core(i) for i in range(config.cores)]
        self.runs = {}
        for task in task_set:
            run = TaskRun(task, assignment.home[task.id], config.seed)
            self.runs[task.id] = run
            self.cores[run.core].members.append(run)
        for core in self.cores:
            core.members.sort(key=lambda r: r.task.id)

        self.realloc_opts = config.realloc
        self.realloc_candidates: set[int] = set()
        self.speed = -1.0          # sentinel; the t=0 recompute always sets it
        self.ledger = EnergyLedger(
            busy_j=[0.0] * config.cores, idle_j=[0.0] * config.cores
        )
        self.trace = [] if config.collect_trace else None
        self._heap: list = []
        self._seq = 0
        self._power_cache = (-1.0, 0.0)

    # -- event plumbing ----------------------------------------------------

    def _push(self, t_ns, kind, tie, payload):
        self._seq += 1
        heapq.heappush(self._heap, (t_ns, kind, tie, self._seq, payload))

    def _trace(self, t_ns, core, event, task=None, detail=""):
        if self.trace is not None:
            self.trace.append((t_ns, core, event, task, detail))

    # -- model helpers -----------------------------------------------------

    def _earliest_release_ns(self, core, t_ns):
        if not core.members:
            return None
        return min(next_release(run.task, t_ns) for run in core.members)

    def _power(self, speed):
        cached_s, cached_p = self._power_cache
        if speed == cached_s:
            return cached_p
        p = self.table.power(speed)
        self._power_cache = (speed, p)
        return p

    def _recompute_speed(self, t_ns):
        u_max = 0.0
        for core in self.cores:
            u = policies.core_dynamic_utilization(core, t_ns)
            if u > u_max:
                u_max = u
        s = policies.policy_speed(self.cfg.policy, u_max, self.min_scale, self.critical_scale)
        if s != self.speed:
            self.speed = s
            self._trace(t_ns, None, "speed_change", None, repr(s))

    def _accrue(self, t0_ns, t1_ns):
        dt = t1_ns - t0_ns
        if dt <= 0:
            return
        energy = self._power(self.speed) * dt * 1e-9
        work = dt * self.speed
        busy = self.ledger.busy_j
        idle = self.ledger.idle_j
        for core in self.cores:
            if core.state == ACTIVE:
                job = core.running
                if job is not None:
                    busy[core.index] += energy
                    job.remaining_ns -= work
                else:
                    idle[core.index] += energy

    # -- state transitions ---------------------------------------------------

    def _release(self, run: TaskRun, t_ns):
        task = run.task
        ratio = draw_actual_ratio(self.cfg.cc_mean_ratio, run.cc_rng)
        job = Job(task, run.next_index, ratio * task.wcet_ns)
        if job.arrival_ns != t_ns:
            raise EngineError(f"release of task {task.id} at {t_ns} expected {job.arrival_ns}")
        run.next_index += 1
        core = self.cores[run.core]
        core.ready.append(job)
        core.idle_evaluated = False
        self._trace(t_ns, core.index, "release", task.id, repr(job.cc_ns))
        nxt = t_ns + task.period_ns
        if nxt < self.duration_ns:
            self._push(nxt, EV_RELEASE, task.id, run)

    def _complete(self, core: Core, version, t_ns):
        if core.state != ACTIVE or version != core.sched_version:
            return False
        job = core.running
        job.remaining_ns = 0.0
        core.ready.remove(job)
        core.running = None
        core.sched_job = None
        core.sched_version += 1
        run = self.runs[job.task_id]
        run.last_completed_arrival = job.arrival_ns
        run.last_cc_ns = job.cc_ns
        if t_ns > job.deadline_ns:
            self.ledger.deadline_miss_count += 1
        self._trace(t_ns, core.index, "complete", job.task_id)
        return True

    def _wake(self, core: Core, version, t_ns):
        if core.state != SLEEPING or version != core.wake_version:
            return
        if core.ready:
            core.state = ACTIVE
            core.sleep_until = None
            core.idle_evaluated = False
            self.ledger.wake_count += 1
            # kept as the exact product, not a running float sum
            self.ledger.switch_j = self.ledger.wake_count * self.cfg.e_sw_j
            self._trace(t_ns, core.index, "wake")
        else:
            # The job this wake was scheduled for moved to another core;
            # stay asleep until the queue's next release, at no cost.
            nxt = self._earliest_release_ns(core, t_ns)
            core.sleep_until = nxt
            core.wake_version += 1
            if nxt is not None and nxt < self.duration_ns:
                self._push(nxt, EV_WAKE, core.index, core.wake_version)

    def _sleep(self, core: Core, t_ns, wake_at_ns):
        core.state = SLEEPING
        core.running = None
        core.sched_job = None
        core.sched_version += 1
        core.idle_evaluated = False
        core.sleep_until = wake_at_ns
        core.wake_version += 1
        # A sleeping core must not receive reallocated tasks.
        self.realloc_candidates.discard(core.index)
        if wake_at_ns is not None and wake_at_ns < self.duration_ns:
            self._push(wake_at_ns, EV_WAKE, core.index, core.wake_version)
        self._trace(t_ns, core.index, "sleep")

    def on_core_idle(self, core: Core, t_ns):
        """Sleep decision for a core with no ready work: sleep through the
        gap to its next release when the gap reaches the threshold, else stay
        active-idle at the global speed and record the failed sleep."""
        nxt = self._earliest_release_ns(core, t_ns)
        if nxt is None or nxt - t_ns >= self.t_th_ns:
            self._sleep(core, t_ns, nxt)
        else:
            core.idle_evaluated = True
            self.ledger.failed_sleep_count += 1

    def _dispatch(self, core: Core, t_ns):
        if core.state == SLEEPING:
            return
        job = edf_pick(core.ready)
        if job is None:
            if core.running is not None:
                core.running = None
                core.sched_job = None
                core.sched_version += 1
            if not core.idle_evaluated:
                self.on_core_idle(core, t_ns)
            return
        if job is core.sched_job and self.speed == core.sched_speed:
            return
        if core.running is not None and core.running is not job:
            self._trace(t_ns, core.index, "preempt", core.running.task_id)
        if core.running is not job:
            self._trace(t_ns, core.index, "start", job.task_id)
        core.running = job
        core.sched_job = job
        core.sched_speed = self.speed
        core.sched_version += 1
        core.idle_evaluated = False
        # Completion instants are rounded to the nearest nanosecond; the
        # sub-nanosecond work residue is cleared when the job completes.
        wall = max(0, int(job.remaining_ns / self.speed + 0.5))
        self._push(t_ns + wall, EV_COMPLETE, core.index, core.sched_version)

    # -- reallocation interface (called from the policy hook) ---------------

    def commit_reallocation(self, run: TaskRun, dest: Core, t_ns):
        src = self.cores[run.core]
        moved = None
        for job in src.ready:
            if job.task_id == run.task.id:
                if job.arrival_ns != t_ns:
                    raise EngineError("reallocation with an in-flight older job")
                moved = job
                break
        if moved is None:
            raise EngineError("reallocated task has no released job")
        src.ready.remove(moved)
        if src.running is moved:
            src.running = None
            src.sched_job = None
            src.sched_version += 1
        src.members.remove(run)
        src.idle_evaluated = False
        dest.members.append(run)
        dest.members.sort(key=lambda r: r.task.id)
        dest.ready.append(moved)
        dest.idle_evaluated = False
        run.core = dest.index
        self.ledger.realloc_count += 1
        self._trace(t_ns, dest.index, "realloc", run.task.id, f"from={src.index}")

        # The selection rules guarantee these; check at every commit.
        u_static = policies.core_static_utilization(dest)
        u_dyn = policies.core_dynamic_utilization(dest, t_ns)
        u_dyn_src = policies.core_dynamic_utilization(src, t_ns)
        speed_before = self.speed
        self._recompute_speed(t_ns)
        if u_dyn > self.critical_scale + 1e-9:
            raise EngineError("reallocation pushed dynamic utilization past the critical scale")
        if u_static > 1.0 + 1e-9:
            raise EngineError("reallocation overloaded the destination core")
        if self.speed > speed_before + 1e-12:
            raise EngineError("reallocation raised the global speed")
        self.ledger.realloc_checks.append((u_static, u_dyn, u_dyn_src, speed_before, self.speed))

    # -- main loop -----------------------------------------------------------

    def run(self):
        duration = self.duration_ns
        heap = self._heap
        for task_id in sorted(self.runs):
            self._push(0, EV_RELEASE, task_id, self.runs[task_id])
        for core in self.cores:
            if not core.members:
                self._sleep(core, 0, None)
        self._recompute_speed(0)

        is_realloc = self.cfg.policy is PolicyKind.LA_REALLOC
        t_now = 0
        while heap and heap[0][0] < duration:
            t = heap[0][0]
            self._accrue(t_now, t)
            t_now = t
            batch = []
            while heap and heap[0][0] == t:
                batch.append(heapq.heappop(heap))
            # Heap order already gives releases, then completions, then wakes.
            released = []
            later = []
            for item in batch:
                if item[1] == EV_RELEASE:
                    self._release(item[4], t)
                    released.append(item[4])
                else:
                    later.append(item)
            for run in released:
                if is_realloc:
                    policies.upon_task_release(run, t, self)
                self._recompute_speed(t)
            for item in later:
                kind = item[1]
                if kind == EV_COMPLETE:
                    if self._complete(self.cores[item[2]], item[4], t):
                        self._recompute_speed(t)
                else:
                    self._wake(self.cores[item[2]], item[4], t)
            for core in self.cores:
                self._dispatch(core, t)

        self._accrue(t_now, duration)
        # Completions landing exactly on the horizon still count as on time.
        while heap and heap[0][0] == duration and heap[0][1] == EV_COMPLETE:
            item = heapq.heappop(heap)
            self._complete(self.cores[item[2]], item[4], duration)
        for core in self.cores:
            for job in core.ready:
                if job.deadline_ns <= duration:
                    self.ledger.deadline_miss_count += 1
        return self.ledger, self.trace


def run(config: SimConfig, task_set: TaskSet, assignment: Assignment):
    """Simulate one run; returns the energy ledger and the event trace
    (None unless ``config.collect_trace``)."""
    return Simulator(config, task_set, assignment).run()


def write_trace_csv(trace, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for t_ns, core, event, task, detail in trace:
            writer.writerow([
                t_ns,
                "" if core is None else core,
                event,
                "" if task is None else task,
                detail,
            ])
