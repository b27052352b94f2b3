"""Exact virtual-time execution of scheduling policies on a fixed instance.

Three run modes cover every policy: sequential non-preemptive runs,
event-driven fluid processor sharing (each of m active jobs receives rate
1/m, with completions at exact event times), and slotted runs where a policy
is charged per fixed-length slot and observes a per-slot success indicator.

Policies see the world only through :class:`Observation`: completed job
sizes, slot outcomes, and counts.  Realized sizes of unfinished jobs and the
true type means are never exposed.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from .core import EngineError, Instance, ParameterError, RunTrace


class Observation:
    """Read-only view of run state offered to policies."""

    __slots__ = ("_state",)

    def __init__(self, state: "_RunState"):
        self._state = state

    @property
    def n(self) -> int:
        return self._state.n

    @property
    def K(self) -> int:
        return self._state.K

    def incomplete_types(self) -> list[int]:
        st = self._state
        return [k for k in range(st.K) if st.mdone[k] < st.n]

    def completed_count(self, k: int) -> int:
        return self._state.mdone[k]

    def completed(self, k: int) -> tuple[float, ...]:
        """Sizes of type-k jobs completed so far, in completion order."""
        return tuple(self._state.completed[k])

    def remaining_jobs(self, k: int) -> int:
        st = self._state
        return st.n - st.mdone[k]

    def processed_time(self, k: int) -> float:
        return self._state.proc_time[k]


class _RunState:
    __slots__ = (
        "n", "K", "cols", "mdone", "completed", "proc_time",
        "begin", "end", "processed", "job_row", "job_sizes", "now", "done",
    )

    def __init__(self, instance: Instance):
        self.n = instance.n
        self.K = instance.K
        self.cols = [instance.sizes[:, k].tolist() for k in range(self.K)]
        self.mdone = [0] * self.K
        self.completed = [[] for _ in range(self.K)]
        self.proc_time = [0.0] * self.K
        z = [[0.0] * self.K for _ in range(self.n)]
        self.begin = [row[:] for row in z]
        self.end = [row[:] for row in z]
        self.processed = [row[:] for row in z]
        self.job_row = [[0] * self.K for _ in range(self.n)]
        self.job_sizes = [row[:] for row in z]
        self.now = 0.0
        self.done = 0

    def record(self, k: int, row: int, begin: float, end: float, processed: float):
        rank = self.mdone[k]
        size = self.cols[k][row]
        self.begin[rank][k] = begin
        self.end[rank][k] = end
        self.processed[rank][k] = processed
        self.job_row[rank][k] = row
        self.job_sizes[rank][k] = size
        self.mdone[k] += 1
        self.completed[k].append(size)
        self.proc_time[k] += size
        self.done += 1

    def trace(self) -> RunTrace:
        return RunTrace(
            begin=np.array(self.begin),
            end=np.array(self.end),
            processed=np.array(self.processed),
            job_row=np.array(self.job_row),
            job_sizes=np.array(self.job_sizes),
        )


def run_nonpreemptive(instance: Instance, policy, within_type_order=None) -> RunTrace:
    """Run jobs one at a time to completion, type chosen by the policy.

    ``within_type_order`` optionally remaps the execution order of each
    type's jobs (a list of instance-row permutations); by default jobs run in
    instance order, which is what every learning policy expects.
    """
    st = _RunState(instance)
    obs = Observation(st)
    N = st.n * st.K
    on_completion = getattr(policy, "on_completion", None)
    while st.done < N:
        k = policy.select(obs)
        if not (0 <= k < st.K) or st.mdone[k] >= st.n:
            raise EngineError(f"policy selected unavailable type {k}")
        rank = st.mdone[k]
        row = within_type_order[k][rank] if within_type_order is not None else rank
        size = st.cols[k][row]
        begin = st.now
        st.now = begin + size
        st.record(k, row, begin, st.now, size)
        if on_completion is not None:
            on_completion(k, size, obs)
    return st.trace()


def run_processor_sharing(instance: Instance, controller, per_job: bool = False) -> RunTrace:
    """Fluid processor sharing: every active job receives rate 1/m.

    The controller supplies the set of active types and is re-consulted at
    every job completion.  With ``per_job`` False only the head job of each
    active type runs (one in-flight job per type); with ``per_job`` True all
    unfinished jobs of the active types share the processor.

    Completions happen at exact event times via a virtual clock that
    advances by one unit of work per active job.
    """
    st = _RunState(instance)
    obs = Observation(st)
    N = st.n * st.K

    V = 0.0
    active: set[tuple[int, int]] = set()
    gen: dict = {}
    vfin: dict = {}
    ventry: dict = {}
    rem_entry: dict = {}
    partial: dict = {}
    begin_at: dict = {}
    remaining: dict = {}
    heap: list = []
    # per-job completions happen in remaining-work order, so unfinished rows
    # must be tracked explicitly; head mode consumes rows in order
    unfinished = [set(range(st.n)) for _ in range(st.K)]
    prev_types: tuple | None = None
    last_done: int | None = None

    while st.done < N:
        types = tuple(controller.active_types(obs))
        if types == prev_types:
            # same type set: in per-job mode the only membership change was
            # the completed job (already dropped); in head mode its successor
            # becomes the new head
            desired = active
            if not per_job and last_done is not None:
                if st.mdone[last_done] >= st.n:
                    raise EngineError(
                        f"controller activated unavailable type {last_done}"
                    )
                desired = active | {(last_done, st.mdone[last_done])}
        else:
            if not types:
                raise EngineError(
                    "controller returned an empty active set with jobs remaining"
                )
            desired = set()
            for k in types:
                if not (0 <= k < st.K) or st.mdone[k] >= st.n:
                    raise EngineError(f"controller activated unavailable type {k}")
                if per_job:
                    desired.update((k, row) for row in unfinished[k])
                else:
                    desired.add((k, st.mdone[k]))
            prev_types = types
        for job in active - desired:
            stint = V - ventry[job]
            partial[job] = partial.get(job, 0.0) + stint
            remaining[job] = max(rem_entry[job] - stint, 0.0)
            del vfin[job], ventry[job], rem_entry[job]
        for job in desired - active:
            if job not in remaining:
                remaining[job] = st.cols[job[0]][job[1]]
                begin_at[job] = st.now
            rem = remaining.pop(job)
            rem_entry[job] = rem
            ventry[job] = V
            vfin[job] = V + rem
            gen[job] = gen.get(job, 0) + 1
            heapq.heappush(heap, (vfin[job], job[0], job[1], gen[job]))
        active = desired

        m = len(active)
        if m == 0:
            raise EngineError("no active jobs (controller kept an exhausted type)")
        if m == 1:
            job = next(iter(active))
            elapsed = rem_entry[job] - (V - ventry[job])
            st.now += elapsed
            V += elapsed
        else:
            while True:
                vf, k, row, g = heapq.heappop(heap)
                job = (k, row)
                if job in active and gen.get(job) == g:
                    break
            st.now += (vf - V) * m
            V = vf
        k, row = job
        done_work = partial.pop(job, 0.0) + rem_entry[job]
        st.record(k, row, begin_at.pop(job), st.now, done_work)
        active.discard(job)
        unfinished[k].discard(row)
        last_done = k
        del vfin[job], ventry[job], rem_entry[job]
        on_completion = getattr(controller, "on_completion", None)
        if on_completion is not None:
            on_completion(k, st.cols[k][row], obs)
    return st.trace()


def run_slotted(instance: Instance, policy, delta: float) -> RunTrace:
    """Slotted execution: the policy picks a type and a batch of slots.

    The chosen type's current job receives up to ``batch * delta`` processor
    time.  A mid-slot completion ends the batch at the exact completion time
    and the policy observes one success; every full slot without completion
    is observed as a failure.  A batch of ``None`` runs the type to
    exhaustion with no further consultation.
    """
    if not (delta > 0.0) or not math.isfinite(delta):
        raise ParameterError("slot length must be positive and finite")
    st = _RunState(instance)
    obs = Observation(st)
    N = st.n * st.K
    remaining = [None] * st.K  # in-flight job's remaining work
    begin_at = [0.0] * st.K

    while st.done < N:
        k, batch = policy.next_batch(obs)
        if not (0 <= k < st.K) or st.mdone[k] >= st.n:
            raise EngineError(f"policy selected unavailable type {k}")
        if remaining[k] is None:
            remaining[k] = st.cols[k][st.mdone[k]]
            begin_at[k] = st.now
        if batch is None:
            # run every remaining job of this type back to back
            while st.mdone[k] < st.n:
                if remaining[k] is None:
                    remaining[k] = st.cols[k][st.mdone[k]]
                    begin_at[k] = st.now
                begin = begin_at[k]
                st.now += remaining[k]
                row = st.mdone[k]
                st.record(k, row, begin, st.now, st.cols[k][row])
                remaining[k] = None
            continue
        if batch < 1:
            raise EngineError("batch must be at least one slot")
        r = remaining[k]
        if r <= batch * delta:
            # completes during the batch; count the full slots that elapsed
            failures = max(0, math.ceil(r / delta - 1e-12) - 1)
            st.now += r
            row = st.mdone[k]
            st.record(k, row, begin_at[k], st.now, st.cols[k][row])
            remaining[k] = None
            policy.observe(k, failures, True)
        else:
            st.now += batch * delta
            remaining[k] = r - batch * delta
            policy.observe(k, batch, False)
    return st.trace()


def inversion_counts(trace: RunTrace) -> np.ndarray:
    """K-by-K matrix counting completed-before pairs across types.

    Entry (k, ell) is the number of job pairs (j, i) whose type-k job ended
    no later than the type-ell job began, i.e. ran fully ahead of it.
    """
    begin = np.asarray(trace.begin)
    end = np.asarray(trace.end)
    K = begin.shape[1]
    counts = np.zeros((K, K), dtype=np.int64)
    for k in range(K):
        ends = np.sort(end[:, k])
        for ell in range(K):
            if ell == k:
                continue
            counts[k, ell] = int(
                np.searchsorted(ends, begin[:, ell], side="right").sum()
            )
    return counts


def trace_to_csv(trace: RunTrace, path) -> None:
    """Dump a trace as CSV rows (type, job_index, begin, end)."""
    lines = ["type,job_index,begin,end"]
    for k in range(trace.K):
        for rank in range(trace.n):
            lines.append(
                f"{k},{int(trace.job_row[rank][k])},"
                f"{trace.begin[rank][k]:.12g},{trace.end[rank][k]:.12g}"
            )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
