"""Experiment orchestration: seeded Monte-Carlo runs, aggregation, CSV output.

One task is one (grid point, seed): a single instance is sampled and every
requested policy runs on the same realization, so per-seed competitive
ratios are paired comparisons.  Records come out in a deterministic order no
matter how many workers executed the tasks.
"""
from __future__ import annotations

import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import (
    GENERATOR_NAME,
    GENERATOR_VERSION,
    TypeParams,
    derive_seed,
    sample_instance,
)
from .policies import POLICY_NAMES, run_policy
from .stats import _LOG_CONSTANTS

AGGREGATION_MODES = ("mean-of-ratios", "ratio-of-means")


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the offending field name."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"config field '{field_name}': {message}")
        self.field = field_name


@dataclass(frozen=True)
class ExperimentConfig:
    policies: tuple[str, ...]
    lambdas: tuple[tuple[float, ...], ...]  # grid of mean vectors
    n: tuple[int, ...]                      # grid of jobs-per-type values
    seeds: int
    base_seed: int = 0
    delta: float = 0.01
    klucb_bonus: str = "n2k2"
    elimination_constant: str = "k3"
    aggregation: str = "mean-of-ratios"
    K: int | None = None

    def grid(self) -> list[tuple[tuple[float, ...], int]]:
        return [(lam, n) for lam in self.lambdas for n in self.n]


def _as_lambda_grid(value) -> tuple[tuple[float, ...], ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("lambdas", "expected a non-empty list")
    if all(isinstance(x, (int, float)) for x in value):
        value = [value]
    grid = []
    for vec in value:
        if not isinstance(vec, (list, tuple)) or not vec:
            raise ConfigError("lambdas", "each grid point must be a non-empty list")
        if any(not isinstance(x, (int, float)) or x <= 0 for x in vec):
            raise ConfigError("lambdas", "type means must be positive numbers")
        grid.append(tuple(float(x) for x in vec))
    return tuple(grid)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {
        "policies", "lambdas", "n", "seeds", "base_seed", "delta",
        "klucb_bonus", "elimination_constant", "aggregation", "K",
    }
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown field")
    for req in ("policies", "lambdas", "n", "seeds"):
        if req not in raw:
            raise ConfigError(req, "missing required field")

    policies = raw["policies"]
    if not isinstance(policies, list) or not policies:
        raise ConfigError("policies", "expected a non-empty list of policy names")
    for p in policies:
        if p not in POLICY_NAMES:
            raise ConfigError("policies", f"unknown policy {p!r}; expected {POLICY_NAMES}")

    lambdas = _as_lambda_grid(raw["lambdas"])

    n_raw = raw["n"]
    if isinstance(n_raw, int):
        n_raw = [n_raw]
    if (
        not isinstance(n_raw, list)
        or not n_raw
        or any(not isinstance(x, int) or x < 1 for x in n_raw)
    ):
        raise ConfigError("n", "expected a positive integer or list of them")

    seeds = raw["seeds"]
    if not isinstance(seeds, int) or seeds < 1:
        raise ConfigError("seeds", "expected a positive integer")

    base_seed = raw.get("base_seed", 0)
    if not isinstance(base_seed, int):
        raise ConfigError("base_seed", "expected an integer")

    delta = raw.get("delta", 0.01)
    if not isinstance(delta, (int, float)) or delta <= 0:
        raise ConfigError("delta", "expected a positive number")

    klucb_bonus = raw.get("klucb_bonus", "n2k2")
    if klucb_bonus not in ("n2k2", "n2"):
        raise ConfigError("klucb_bonus", "expected 'n2k2' or 'n2'")

    constant = raw.get("elimination_constant", "k3")
    if constant not in _LOG_CONSTANTS:
        raise ConfigError("elimination_constant", "expected 'k3' or 'k4'")

    aggregation = raw.get("aggregation", "mean-of-ratios")
    if aggregation not in AGGREGATION_MODES:
        raise ConfigError("aggregation", f"expected one of {AGGREGATION_MODES}")

    K = raw.get("K")
    if K is not None:
        if not isinstance(K, int) or K < 1:
            raise ConfigError("K", "expected a positive integer")
        for vec in lambdas:
            if len(vec) != K:
                raise ConfigError("K", f"grid point {list(vec)} has {len(vec)} types, not {K}")

    return ExperimentConfig(
        policies=tuple(policies),
        lambdas=lambdas,
        n=tuple(n_raw),
        seeds=seeds,
        base_seed=base_seed,
        delta=float(delta),
        klucb_bonus=klucb_bonus,
        elimination_constant=constant,
        aggregation=aggregation,
        K=K,
    )


def config_from_json(path) -> ExperimentConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<json>", f"not valid JSON: {exc}") from exc
    return config_from_dict(raw)


@dataclass(frozen=True)
class ExperimentRecord:
    policy: str
    K: int
    n: int
    lambdas: tuple[float, ...]
    seed: int
    flow: float
    opt_flow: float
    ftpp_flow: float

    @property
    def cr(self) -> float:
        return self.flow / self.opt_flow

    @property
    def excess(self) -> float:
        return self.flow - self.ftpp_flow


def _run_task(config: ExperimentConfig, gp_idx: int, seed_lo: int, seed_hi: int):
    """Run one block of seeds at one grid point; returns rows and warnings."""
    lam, n = config.grid()[gp_idx]
    params = TypeParams(lambdas=lam, n=n)
    rows = []
    warnings = []
    for seed_idx in range(seed_lo, seed_hi):
        seed = derive_seed(config.base_seed, gp_idx, seed_idx)
        instance = sample_instance(params, seed)
        kwargs = dict(
            delta=config.delta,
            klucb_bonus=config.klucb_bonus,
            elimination_constant=config.elimination_constant,
        )
        flows = {
            "opt": run_policy("opt", instance, **kwargs).flow_time,
            "ftpp": run_policy("ftpp", instance, **kwargs).flow_time,
        }
        for policy in config.policies:
            if policy in flows:
                continue
            try:
                flows[policy] = run_policy(policy, instance, **kwargs).flow_time
            except Exception as exc:  # error marker, not a crash
                flows[policy] = math.nan
                warnings.append(f"{policy} gp={gp_idx} seed={seed}: {exc!r}")
        for policy in config.policies:
            rows.append((gp_idx, policy, seed_idx, seed, flows[policy],
                         flows["opt"], flows["ftpp"]))
    return rows, warnings


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[ExperimentRecord]:
    """Execute every (grid point, seed) task and return ordered records."""
    grid = config.grid()
    tasks = []
    chunk = max(1, config.seeds // max(1, 4 * jobs))
    for gp_idx in range(len(grid)):
        for lo in range(0, config.seeds, chunk):
            tasks.append((gp_idx, lo, min(lo + chunk, config.seeds)))

    all_rows = []
    warnings = []
    if jobs <= 1:
        for task in tasks:
            rows, warns = _run_task(config, *task)
            all_rows.extend(rows)
            warnings.extend(warns)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_task, config, *task) for task in tasks]
            for fut in futures:
                rows, warns = fut.result()
                all_rows.extend(rows)
                warnings.extend(warns)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)

    policy_rank = {p: i for i, p in enumerate(config.policies)}
    all_rows.sort(key=lambda r: (r[0], policy_rank[r[1]], r[2]))
    records = []
    for gp_idx, policy, seed_idx, seed, flow, opt_flow, ftpp_flow in all_rows:
        lam, n = grid[gp_idx]
        records.append(
            ExperimentRecord(
                policy=policy, K=len(lam), n=n, lambdas=lam, seed=seed,
                flow=flow, opt_flow=opt_flow, ftpp_flow=ftpp_flow,
            )
        )
    return records


# ---------------------------------------------------------------------------
# Aggregation


@dataclass(frozen=True)
class SummaryRow:
    policy: str
    K: int
    n: int
    lambdas: tuple[float, ...]
    mean_cr: float
    stderr_cr: float
    mean_excess: float
    stderr_excess: float
    count: int


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    mean = float(values.mean())
    if values.size < 2:
        return mean, 0.0
    return mean, float(values.std(ddof=1) / math.sqrt(values.size))


def aggregate(records: list[ExperimentRecord], mode: str = "mean-of-ratios") -> list[SummaryRow]:
    """Summarize records per (grid point, policy), in record order.

    ``mean-of-ratios`` averages per-seed competitive ratios; the alternative
    ``ratio-of-means`` divides mean flows, with a fixed-seed bootstrap
    standard error (1000 resamples).
    """
    if mode not in AGGREGATION_MODES:
        raise ConfigError("aggregation", f"expected one of {AGGREGATION_MODES}")
    groups: dict = {}
    order = []
    for rec in records:
        key = (rec.lambdas, rec.n, rec.policy)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec)
    out = []
    for key in order:
        lam, n, policy = key
        recs = [r for r in groups[key] if not math.isnan(r.flow)]
        count = len(recs)
        if count == 0:
            out.append(SummaryRow(policy, len(lam), n, lam,
                                  math.nan, math.nan, math.nan, math.nan, 0))
            continue
        flow = np.array([r.flow for r in recs])
        opt = np.array([r.opt_flow for r in recs])
        ftpp = np.array([r.ftpp_flow for r in recs])
        mean_excess, stderr_excess = _mean_stderr(flow - ftpp)
        if mode == "mean-of-ratios":
            mean_cr, stderr_cr = _mean_stderr(flow / opt)
        else:
            mean_cr = float(flow.mean() / opt.mean())
            if count < 2:
                stderr_cr = 0.0
            else:
                rng = np.random.Generator(np.random.Philox(key=0))
                idx = rng.integers(0, count, size=(1000, count))
                ratios = flow[idx].mean(axis=1) / opt[idx].mean(axis=1)
                stderr_cr = float(ratios.std(ddof=1))
        out.append(SummaryRow(policy, len(lam), n, lam,
                              mean_cr, stderr_cr, mean_excess, stderr_excess, count))
    return out


# ---------------------------------------------------------------------------
# CSV persistence (12 significant digits throughout)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _fmt_lambdas(lam: tuple[float, ...]) -> str:
    return ";".join(_fmt(x) for x in lam)


_GENERATOR_COMMENT = f"# generator={GENERATOR_NAME} v{GENERATOR_VERSION}"

RECORDS_HEADER = "policy,K,n,lambdas,seed,flow,opt_flow,ftpp_flow,cr,excess"
SUMMARY_HEADER = "policy,K,n,lambdas,mean_cr,stderr_cr,mean_excess,stderr_excess,count"


def write_records_csv(records: list[ExperimentRecord], path) -> None:
    lines = [_GENERATOR_COMMENT, RECORDS_HEADER]
    for r in records:
        lines.append(
            f"{r.policy},{r.K},{r.n},{_fmt_lambdas(r.lambdas)},{r.seed},"
            f"{_fmt(r.flow)},{_fmt(r.opt_flow)},{_fmt(r.ftpp_flow)},"
            f"{_fmt(r.cr)},{_fmt(r.excess)}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_summary_csv(rows: list[SummaryRow], path) -> None:
    lines = [_GENERATOR_COMMENT, SUMMARY_HEADER]
    for r in rows:
        lines.append(
            f"{r.policy},{r.K},{r.n},{_fmt_lambdas(r.lambdas)},"
            f"{_fmt(r.mean_cr)},{_fmt(r.stderr_cr)},"
            f"{_fmt(r.mean_excess)},{_fmt(r.stderr_excess)},{r.count}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
