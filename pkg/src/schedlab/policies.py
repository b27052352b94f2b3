"""The eight scheduling policies, as state machines for the engine run modes.

Benchmarks: ``opt`` (sees realized sizes), ``ftpp`` (sees true means),
``rr`` (sees nothing).  Learners: ``etc-u`` and ``ucb-u`` run jobs to
completion; ``etc-rr`` runs its candidate set in parallel; ``ucb-rr`` works
on fixed-length slots with exponential batching; ``lsept`` greedily follows
the lowest empirical mean.  Learners are constructed from (n, K) alone and
observe only completed sizes or slot successes.
"""
from __future__ import annotations

import math
from functools import lru_cache

from .core import EngineError, Instance, ParameterError, RunTrace, TypeParams
from .engine import run_nonpreemptive, run_processor_sharing, run_slotted
from .stats import chi2_quantile, hoeffding_radius, klucb_index

KLUCB_BONUS_VARIANTS = ("n2k2", "n2")


# ---------------------------------------------------------------------------
# Benchmarks


class Opt:
    """Realization-aware benchmark: global ascending sort of all sizes."""

    def __init__(self, instance: Instance):
        n, K = instance.n, instance.K
        jobs = [
            (float(instance.sizes[i, k]), k, i)
            for k in range(K)
            for i in range(n)
        ]
        jobs.sort()
        self.type_sequence = [k for _, k, _ in jobs]
        self.row_order = [[] for _ in range(K)]
        for _, k, i in jobs:
            self.row_order[k].append(i)
        self._pos = 0

    def select(self, obs) -> int:
        k = self.type_sequence[self._pos]
        self._pos += 1
        return k


class Ftpp:
    """Benchmark that exhausts types in increasing order of true mean."""

    def __init__(self, params: TypeParams):
        self.order = sorted(range(params.K), key=lambda k: (params.lambdas[k], k))

    def select(self, obs) -> int:
        for k in self.order:
            if obs.remaining_jobs(k) > 0:
                return k
        raise EngineError("no jobs left to select")


class RoundRobin:
    """Equal sharing over every unfinished job (use per_job sharing)."""

    def active_types(self, obs):
        return obs.incomplete_types()


# ---------------------------------------------------------------------------
# Paired-comparison elimination state shared by the two ETC learners


class _EliminationMixin:
    """Candidate-set bookkeeping with stored pairwise statistics.

    ``self.stored[(k, ell)]`` holds the last (win-rate, radius) computed for
    the ordered pair while both types were candidates; the rebuild rule
    filters incomplete types by these stored values.  A type whose stored
    statistics dominate every filter is reinstated anyway when the filter
    would leave nothing (paired win rates are not transitive, so a cycle of
    dominations is possible).
    """

    def _init_elimination(self, n: int, K: int, constant: str):
        self.n, self.K = n, K
        self.constant = constant
        self.candidates: set[int] | None = None
        self.stored: dict[tuple[int, int], tuple[float, float]] = {}

    def _stored_excludes(self, k: int, ell: int) -> bool:
        rhat, radius = self.stored.get((k, ell), (0.0, 0.0))
        return rhat - radius > 0.5

    def _rebuild(self, incomplete) -> None:
        admitted = [
            ell
            for ell in incomplete
            if all(not self._stored_excludes(k, ell) for k in incomplete if k != ell)
        ]
        if not admitted:
            admitted = list(incomplete)
        self.candidates = set(admitted)

    def _sync_candidates(self, obs) -> None:
        incomplete = obs.incomplete_types()
        if self.candidates is not None:
            self.candidates &= set(incomplete)
        if not self.candidates:
            self._rebuild(incomplete)


class EtcUniform(_EliminationMixin):
    """Uniform explore-then-commit over completed-size paired comparisons.

    Runs the candidate with the fewest finished jobs to completion; compares
    types rank by rank (the i-th completed job of each) and eliminates a
    candidate whose opponent's win rate clears 0.5 by the Hoeffding radius.
    """

    def __init__(self, n: int, K: int, elimination_constant: str = "k3"):
        self._init_elimination(n, K, elimination_constant)
        self.m = [0] * K
        self.sizes = [[] for _ in range(K)]
        self.wins = [[0] * K for _ in range(K)]  # wins[k][l]: k beat l
        self.compared = [[0] * K for _ in range(K)]

    def select(self, obs) -> int:
        self._sync_candidates(obs)
        return min(self.candidates, key=lambda k: (self.m[k], k))

    def on_completion(self, ell: int, size: float, obs) -> None:
        self.sizes[ell].append(size)
        self.m[ell] += 1
        for k in range(self.K):
            if k == ell:
                continue
            lim = min(self.m[k], self.m[ell])
            while self.compared[k][ell] < lim:
                i = self.compared[k][ell]
                a, b = self.sizes[k][i], self.sizes[ell][i]
                self.wins[k][ell] += a < b
                self.wins[ell][k] += b < a
                self.compared[k][ell] += 1
                self.compared[ell][k] += 1
        if self.candidates is None:
            return
        snapshot = sorted(self.candidates)
        to_remove = set()
        for k in snapshot:
            for l2 in snapshot:
                if k == l2:
                    continue
                total = self.compared[k][l2]
                if total == 0:
                    continue
                rhat = self.wins[k][l2] / total
                radius = hoeffding_radius(total, self.n, self.K, self.constant)
                self.stored[(k, l2)] = (rhat, radius)
                if rhat - radius >= 0.5:
                    to_remove.add(l2)
        for k in snapshot:
            if self.m[k] >= self.n:
                to_remove.add(k)
        self.candidates -= to_remove


class EtcRoundRobin(_EliminationMixin):
    """Parallel explore-then-commit: candidates share the processor.

    Statistics count which type finished first while both were active; the
    elimination rule is the same win-rate test as the uniform variant.  The
    statistics persist across candidate-set rebuilds.
    """

    def __init__(self, n: int, K: int, elimination_constant: str = "k3"):
        self._init_elimination(n, K, elimination_constant)
        self.c = [0] * K
        self.beta = [[0] * K for _ in range(K)]  # beta[l][k]: l finished while k active

    def active_types(self, obs):
        self._sync_candidates(obs)
        return sorted(self.candidates)

    def on_completion(self, ell: int, size: float, obs) -> None:
        self.c[ell] += 1
        snapshot = sorted(self.candidates)
        for k in snapshot:
            if k != ell:
                self.beta[ell][k] += 1
        to_remove = set()
        for k in snapshot:
            if k == ell:
                continue
            total = self.beta[ell][k] + self.beta[k][ell]
            radius = hoeffding_radius(total, self.n, self.K, self.constant)
            r_win = self.beta[ell][k] / total
            r_lose = self.beta[k][ell] / total
            self.stored[(ell, k)] = (r_win, radius)
            self.stored[(k, ell)] = (r_lose, radius)
            if r_win - radius >= 0.5:
                to_remove.add(k)
            if r_lose - radius >= 0.5:
                to_remove.add(ell)
        if self.c[ell] >= self.n:
            to_remove.add(ell)
        self.candidates -= to_remove


# ---------------------------------------------------------------------------
# Optimistic index learners


class UcbUniform:
    """Runs to completion the type with the smallest optimistic mean bound."""

    def __init__(self, n: int, K: int):
        self.n, self.K = n, K
        self.m = [0] * K
        self.sums = [0.0] * K
        self.percentile = 1.0 - 1.0 / (2.0 * n * n * K * K)

    def _index(self, k: int) -> float:
        if self.m[k] == 0:
            return 0.0
        return 2.0 * self.sums[k] / chi2_quantile(2 * self.m[k], self.percentile)

    def select(self, obs) -> int:
        return min(obs.incomplete_types(), key=lambda k: (self._index(k), k))

    def on_completion(self, k: int, size: float, obs) -> None:
        self.m[k] += 1
        self.sums[k] += size


@lru_cache(maxsize=1 << 20)
def _cached_klucb(successes: int, pulls: int, bonus: float) -> float:
    return klucb_index(successes / pulls, pulls, bonus)


class UcbRoundRobin:
    """Slotted KL-UCB over per-slot completion indicators.

    The type with the largest index runs for a power-of-two batch of slots,
    the batch chosen as the largest whose deflated index (statistics padded
    with that many failures) still matches the runner-up index.
    """

    MAX_BATCH_EXPONENT = 30

    def __init__(self, n: int, K: int, bonus_variant: str = "n2k2"):
        if bonus_variant not in KLUCB_BONUS_VARIANTS:
            raise ParameterError(
                f"unknown bonus variant {bonus_variant!r}; expected one of "
                f"{KLUCB_BONUS_VARIANTS}"
            )
        self.n, self.K = n, K
        self.bonus = math.log(
            float(n) * n * K * K if bonus_variant == "n2k2" else float(n) * n
        )
        self.T = [0] * K
        self.S = [0] * K

    def _index(self, k: int) -> float:
        if self.T[k] == 0:
            return 1.0
        return _cached_klucb(self.S[k], self.T[k], self.bonus)

    def next_batch(self, obs):
        incomplete = obs.incomplete_types()
        if len(incomplete) == 1:
            return incomplete[0], None
        best, second = None, None
        for k in incomplete:
            u = self._index(k)
            if best is None or u > best[0]:
                best, second = (u, k), best
            elif second is None or u > second[0]:
                second = (u, k)
        k_star, u_second = best[1], second[0]
        s, t = self.S[k_star], self.T[k_star]
        if _cached_klucb(s, t + 1, self.bonus) < u_second:
            return k_star, 1
        exponent = 0
        while exponent < self.MAX_BATCH_EXPONENT:
            if _cached_klucb(s, t + (1 << (exponent + 1)), self.bonus) < u_second:
                break
            exponent += 1
        return k_star, 1 << exponent

    def observe(self, k: int, failures: int, success: bool) -> None:
        self.T[k] += failures + (1 if success else 0)
        self.S[k] += 1 if success else 0


class Lsept:
    """Greedy: run to completion the type with lowest empirical mean size.

    Untried types have estimate zero, so every type is tried before any mean
    is trusted; ties break toward the lowest type index.
    """

    def __init__(self, n: int, K: int):
        self.m = [0] * K
        self.sums = [0.0] * K

    def select(self, obs) -> int:
        def estimate(k):
            return self.sums[k] / self.m[k] if self.m[k] else 0.0

        return min(obs.incomplete_types(), key=lambda k: (estimate(k), k))

    def on_completion(self, k: int, size: float, obs) -> None:
        self.m[k] += 1
        self.sums[k] += size


# ---------------------------------------------------------------------------
# Name registry and dispatch

POLICY_NAMES = ("opt", "ftpp", "rr", "etc-u", "ucb-u", "etc-rr", "ucb-rr", "lsept")

NONPREEMPTIVE_POLICIES = ("opt", "ftpp", "etc-u", "ucb-u", "lsept")
PREEMPTIVE_POLICIES = ("rr", "etc-rr", "ucb-rr")


def run_policy(
    name: str,
    instance: Instance,
    *,
    delta: float = 0.01,
    klucb_bonus: str = "n2k2",
    elimination_constant: str = "k3",
) -> RunTrace:
    """Run one policy on one instance and return its trace."""
    n, K = instance.n, instance.K
    if name == "opt":
        policy = Opt(instance)
        return run_nonpreemptive(instance, policy, within_type_order=policy.row_order)
    if name == "ftpp":
        return run_nonpreemptive(instance, Ftpp(instance.params))
    if name == "rr":
        return run_processor_sharing(instance, RoundRobin(), per_job=True)
    if name == "etc-u":
        return run_nonpreemptive(instance, EtcUniform(n, K, elimination_constant))
    if name == "ucb-u":
        return run_nonpreemptive(instance, UcbUniform(n, K))
    if name == "etc-rr":
        return run_processor_sharing(instance, EtcRoundRobin(n, K, elimination_constant))
    if name == "ucb-rr":
        return run_slotted(instance, UcbRoundRobin(n, K, klucb_bonus), delta)
    if name == "lsept":
        return run_nonpreemptive(instance, Lsept(n, K))
    raise ParameterError(f"unknown policy {name!r}; expected one of {POLICY_NAMES}")
