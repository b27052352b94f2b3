"""Command-line entry points: analytics, single runs, and experiment sweeps."""
from __future__ import annotations

import argparse
import json
import os
import sys

from .analytics import (
    BoundNotApplicableError,
    cr_ftpp_tilde_series,
    cr_ftpp_upper_2types,
    evaluate_formula,
)
from .core import ParameterError, TypeParams, derive_seed, sample_instance
from .engine import trace_to_csv
from .harness import (
    ConfigError,
    aggregate,
    config_from_dict,
    config_from_json,
    run_experiment,
    write_records_csv,
    write_summary_csv,
)
from .policies import POLICY_NAMES, run_policy


def _parse_lambdas(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ParameterError(f"cannot parse mean list {text!r}") from None


def _cmd_analytic(args) -> int:
    if args.kind == "cr-ftpp-tilde":
        if args.K is None:
            print("analytic cr-ftpp-tilde requires --K", file=sys.stderr)
            return 2
        _, value = cr_ftpp_tilde_series(args.K)
        payload = {"kind": args.kind, "params": {"K": args.K}, "value": value}
    elif args.kind == "cr-ftpp-upper-2":
        if args.lam is None:
            print("analytic cr-ftpp-upper-2 requires --lam", file=sys.stderr)
            return 2
        payload = {
            "kind": args.kind,
            "params": {"lam": args.lam},
            "value": cr_ftpp_upper_2types(args.lam),
        }
    else:
        if args.lambdas is None or args.n is None:
            print(f"analytic {args.kind} requires --lambdas and --n", file=sys.stderr)
            return 2
        params = TypeParams(lambdas=_parse_lambdas(args.lambdas), n=args.n)
        result = evaluate_formula(args.kind, params, delta=args.delta)
        payload = {
            "kind": result.kind,
            "params": {"lambdas": list(params.lambdas), "n": params.n},
            "value": result.value,
        }
        if args.kind.startswith("excess-upper:") and args.delta is not None:
            payload["params"]["delta"] = args.delta
    print(json.dumps(payload))
    return 0


def _cmd_simulate(args) -> int:
    params = TypeParams(lambdas=_parse_lambdas(args.lambdas), n=args.n)
    instance = sample_instance(params, args.seed)
    trace = run_policy(
        args.policy,
        instance,
        delta=args.delta,
        klucb_bonus=args.klucb_bonus,
        elimination_constant=args.elimination_constant,
    )
    if args.trace:
        trace_to_csv(trace, args.trace)
    print(json.dumps({
        "policy": args.policy,
        "lambdas": list(params.lambdas),
        "n": params.n,
        "seed": args.seed,
        "flow_time": trace.flow_time,
    }))
    return 0


def _run_and_write(config, out_dir: str, jobs: int, prefix: str = "") -> None:
    os.makedirs(out_dir, exist_ok=True)
    records = run_experiment(config, jobs=jobs)
    summary = aggregate(records, config.aggregation)
    write_records_csv(records, os.path.join(out_dir, f"{prefix}records.csv"))
    write_summary_csv(summary, os.path.join(out_dir, f"{prefix}summary.csv"))


def _cmd_experiment(args) -> int:
    config = config_from_json(args.config)
    _run_and_write(config, args.out, args.jobs)
    return 0


_LEARNING_POLICIES = ["ftpp", "rr", "etc-u", "ucb-u", "etc-rr", "ucb-rr"]

_FIGURE_PRESETS = {
    # competitive ratio against a growing number of jobs
    "fig1": dict(
        policies=_LEARNING_POLICIES,
        lambdas=[[1.0, 0.25]],
        n=[25, 100, 400],
        seeds=400,
    ),
    # normalized excess against a shrinking short-type mean
    "fig2": dict(
        policies=_LEARNING_POLICIES,
        lambdas=[[x, 1.0] for x in (0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75)],
        n=[50],
        seeds=2000,
    ),
    # greedy-baseline comparison
    "appd": dict(
        policies=["ftpp", "rr", "ucb-rr", "lsept"],
        lambdas=[[0.8, 1.0]],
        n=[25, 50, 100, 200],
        seeds=200,
    ),
}


def _cmd_figures(args) -> int:
    preset = dict(_FIGURE_PRESETS[args.figure])
    if args.seeds is not None:
        preset["seeds"] = args.seeds
    config = config_from_dict(preset)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, f"{args.figure}_config.json"), "w") as fh:
        json.dump(preset, fh, indent=2)
    _run_and_write(config, args.out, args.jobs, prefix=f"{args.figure}_")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schedlab",
        description="Stochastic scheduling lab: analytics, simulation, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analytic", help="print a closed-form value as JSON")
    p_an.add_argument("kind", help=(
        "cost-opt|cost-ftpp|cost-rr|cr-ftpp|cr-ftpp-upper|cr-ftpp-upper-2|"
        "cr-ftpp-tilde|excess-upper:<bound>|excess-lower:<bound>"
    ))
    p_an.add_argument("--lambdas", help="comma-separated type means, e.g. 1,2")
    p_an.add_argument("--n", type=int, help="jobs per type")
    p_an.add_argument("--K", type=int, help="number of types (cr-ftpp-tilde)")
    p_an.add_argument("--lam", type=float, help="mean ratio (cr-ftpp-upper-2)")
    p_an.add_argument("--delta", type=float, default=None, help="slot length (ucb-rr bound)")
    p_an.set_defaults(func=_cmd_analytic)

    p_sim = sub.add_parser("simulate", help="run one policy on one sampled instance")
    p_sim.add_argument("--policy", required=True, choices=POLICY_NAMES)
    p_sim.add_argument("--lambdas", required=True)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--delta", type=float, default=0.01)
    p_sim.add_argument("--klucb-bonus", default="n2k2", choices=("n2k2", "n2"))
    p_sim.add_argument("--elimination-constant", default="k3", choices=("k3", "k4"))
    p_sim.add_argument("--trace", help="write the run trace to this CSV path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_exp = sub.add_parser("experiment", help="run a JSON-configured experiment")
    p_exp.add_argument("config", help="path to the experiment JSON")
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p_exp.set_defaults(func=_cmd_experiment)

    p_fig = sub.add_parser("figures", help="run a preset sweep and write its CSVs")
    p_fig.add_argument("figure", choices=sorted(_FIGURE_PRESETS))
    p_fig.add_argument("--out", required=True)
    p_fig.add_argument("--seeds", type=int, default=None, help="override seed count")
    p_fig.add_argument("--jobs", type=int, default=1)
    p_fig.set_defaults(func=_cmd_figures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ParameterError, BoundNotApplicableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
