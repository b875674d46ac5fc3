import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coresleep.engine import SimConfig
from coresleep.partition import ltf_partition
from coresleep.power import PowerTable, default_power_params, derive_speeds
from coresleep.workload import TaskSet, task_from_ms


@pytest.fixture(scope="session")
def params():
    return default_power_params()


@pytest.fixture(scope="session")
def derived(params):
    return derive_speeds(params)


@pytest.fixture(scope="session")
def power_table(params, derived):
    return PowerTable(params, derived)


@pytest.fixture(scope="session")
def motivational_tasks():
    """Two-core scenario with a hand-computable schedule: tasks (period,
    wcet) = (2, 0.6), (4, 0.4), (2, 0.2) in milliseconds."""
    return TaskSet(tasks=(
        task_from_ms(1, 2.0, 0.6),
        task_from_ms(2, 4.0, 0.4),
        task_from_ms(3, 2.0, 0.2),
    ))


@pytest.fixture(scope="session")
def motivational_assignment(motivational_tasks):
    return ltf_partition(motivational_tasks, 2)


def motivational_config(params, policy, derived=None, table=None, duration_ms=16.0,
                        collect_trace=True, realloc=None):
    """Pinned configuration for the hand-computed scenario: actual execution
    equals the worst case, critical scale 0.4, sleep threshold 2 ms."""
    kwargs = dict(
        params=params,
        cores=2,
        duration_ms=duration_ms,
        e_sw_j=5e-4,
        cc_mean_ratio=1.0,
        policy=policy,
        seed=0,
        critical_scale_override=0.4,
        t_th_ms_override=2.0,
        collect_trace=collect_trace,
        derived=derived,
        power_table=table,
    )
    if realloc is not None:
        kwargs["realloc"] = realloc
    return SimConfig(**kwargs)
