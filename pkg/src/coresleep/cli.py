"""Command-line entry points: a single simulation run and parameter sweeps."""

from __future__ import annotations

import argparse
import sys

from .engine import write_trace_csv
from .harness import SweepSpec, emit, run_single, run_sweep
from .partition import PartitionError
from .policies import PolicyKind, ReallocOptions
from .power import PowerModelError, default_power_params, load_power_params
from .workload import WorkloadError


def _pair(text, cast, sep=":"):
    a, _, b = text.partition(sep)
    if not b:
        raise argparse.ArgumentTypeError(f"expected MIN{sep}MAX, got {text!r}")
    return cast(a), cast(b)


def _sweep_axis(text):
    axis, _, grid = text.partition("=")
    if not grid:
        # bare axis name: use the canonical grid for that experiment
        from .harness import DEFAULT_GRIDS

        if axis not in DEFAULT_GRIDS:
            raise argparse.ArgumentTypeError(f"unknown axis {axis!r}")
        return axis, DEFAULT_GRIDS[axis]
    start, _, rest = grid.partition(":")
    stop, _, step = rest.partition(":")
    if not step:
        raise argparse.ArgumentTypeError("expected AXIS=START:STOP:STEP or a bare axis name")
    start, stop, step = float(start), float(stop), float(step)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError("need STEP > 0 and STOP >= START")
    values = []
    v = start
    while v <= stop + 1e-9:
        values.append(int(round(v)) if axis == "m" else round(v, 12))
        v += step
    return axis, tuple(values)


def _add_common(parser):
    parser.add_argument("--constants", metavar="FILE", default=None,
                        help="technology constants file (default: packaged 70nm set)")
    parser.add_argument("--cores", type=int, default=2, metavar="M")
    parser.add_argument("--util", type=float, default=0.3, metavar="U",
                        help="per-core average utilization")
    parser.add_argument("--esw", type=float, default=5e-4, metavar="J",
                        help="sleep-to-active switching energy")
    parser.add_argument("--cc-ratio", type=float, default=0.5, metavar="R",
                        help="mean actual-to-worst-case execution ratio")
    parser.add_argument("--tasks", type=lambda s: _pair(s, int), default=(10, 20),
                        metavar="N_MIN:N_MAX")
    parser.add_argument("--periods", type=lambda s: _pair(s, float), default=(10.0, 100.0),
                        metavar="MS_MIN:MS_MAX")
    parser.add_argument("--duration", type=float, default=10_000.0, metavar="MS")
    parser.add_argument("--seed", type=int, default=1, metavar="S")
    parser.add_argument("--realloc-bonus", choices=("scaled", "literal"), default="scaled")
    parser.add_argument("--realloc-s-rule", choices=("prose", "pseudocode"), default="prose")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coresleep",
        description="Energy-aware partitioned EDF simulation on a multicore "
                    "with global DVS, core sleep, and task reallocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="one run under one policy")
    _add_common(sim)
    sim.add_argument("--policy", choices=[p.value for p in PolicyKind], default="la_realloc")
    sim.add_argument("--trace", metavar="OUT.CSV", default=None,
                     help="write the event trace")

    sweep = sub.add_parser("sweep", help="paired comparison over one axis")
    _add_common(sweep)
    sweep.add_argument("--sweep", type=_sweep_axis, required=True,
                       metavar="AXIS=START:STOP:STEP",
                       help="axis is one of U, E_sw, m, cc_ratio; a bare axis "
                            "name uses its canonical experiment grid")
    sweep.add_argument("--runs", type=int, default=100, metavar="K")
    sweep.add_argument("--out", required=True, metavar="PATH")
    sweep.add_argument("--workers", type=int, default=1,
                       help="parallel repetitions; output is identical either way")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = load_power_params(args.constants) if args.constants else default_power_params()
        realloc = ReallocOptions(bonus=args.realloc_bonus, s_rule=args.realloc_s_rule)
        if args.command == "simulate":
            task_set, assignment, ledger, trace = run_single(
                params,
                PolicyKind(args.policy),
                m=args.cores,
                u=args.util,
                e_sw_j=args.esw,
                cc_ratio=args.cc_ratio,
                n_range=args.tasks,
                period_range_ms=args.periods,
                duration_ms=args.duration,
                seed=args.seed,
                realloc=realloc,
                collect_trace=args.trace is not None,
            )
            if args.trace:
                write_trace_csv(trace, args.trace)
            print(f"tasks={len(task_set)} total_utilization={task_set.total_utilization:.4f}")
            print(f"per-core utilization: "
                  + " ".join(f"{u:.4f}" for u in assignment.core_utilization))
            print(f"energy_j={ledger.total_j:.6f} "
                  f"(busy={ledger.busy_total_j:.6f} idle={ledger.idle_total_j:.6f} "
                  f"switch={ledger.switch_j:.6f})")
            print(f"wakes={ledger.wake_count} failed_sleeps={ledger.failed_sleep_count} "
                  f"reallocations={ledger.realloc_count} misses={ledger.deadline_miss_count}")
        else:
            axis, values = args.sweep
            spec = SweepSpec(
                axis=axis,
                values=values,
                u=args.util,
                e_sw_j=args.esw,
                m=args.cores,
                cc_ratio=args.cc_ratio,
                n_range=args.tasks,
                period_range_ms=args.periods,
                duration_ms=args.duration,
                repetitions=args.runs,
                base_seed=args.seed,
                realloc=realloc,
            )
            result = run_sweep(spec, params=params, workers=args.workers)
            emit(result, args.out)
            print(f"wrote {args.out}")
    except (PowerModelError, WorkloadError, PartitionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
