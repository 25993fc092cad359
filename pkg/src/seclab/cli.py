"""Command-line entry point: ``seclab {analyze,simulate,attack,oracle,bound,replay}``.

Every command prints its table to stdout and writes ``<command>.csv`` plus a
``<command>.manifest.json`` into ``--out``. ``seclab replay`` reruns a manifest.

Exit codes: 0 success, 2 usage/config error, 3 input-data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .analysis import (
    GapError,
    enumerate_exact,
    finite_ratio_k2,
    optimal_threshold,
    stochastic_factor,
)
from .analysis.oracle import MAX_ENUMERATION_N
from .harness import AttackDataError, attack_config, attack_over_permutations, sweep
from .policies import InvalidConfig, PolicyConfig, PolicyName
from .streamio import StreamFormatError, csv_text, load_stream

ENV_SEED = "SECLAB_SEED"
EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 2, 3
DEFAULT_ATTACK_POLICIES = "opt,naive,virtual,optimistic,virtual+"
MANIFEST_FIELDS = ("policy", "k", "t", "r", "exhaust", "seed", "trials", "input", "input_sha256")


class UsageError(Exception):
    pass


def parse_int_list(text: str) -> list[int]:
    """``"2,3,4"``, ``"1..10"`` or a mix such as ``"1..3,5"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..", 1)
                a, b = int(lo), int(hi)
                if b < a:
                    raise UsageError(f"empty range {part!r}")
                out.extend(range(a, b + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise UsageError(f"cannot parse integer list {text!r}") from None
    if not out:
        raise UsageError(f"empty list {text!r}")
    return out


def parse_policies(text: str) -> list[PolicyName]:
    try:
        return [PolicyName.parse(p) for p in str(text).split(",") if p.strip()]
    except InvalidConfig as exc:
        raise UsageError(str(exc)) from None


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(ENV_SEED)
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{ENV_SEED}={env!r} is not an integer") from None


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seclab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"seclab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"RNG seed (falls back to ${ENV_SEED}, then 0)")
    common.add_argument("--out", default="seclab-out", help="directory for result files")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout format")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for Monte Carlo trials")

    p = sub.add_parser("analyze", parents=[common], help="optimal sampling fraction and bound C_k")
    p.add_argument("--k", required=True, help="budgets, e.g. 2,3,4 or 2..10")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo competitive ratios on synthetic data")
    p.add_argument("--policy", default="virtual+", help="comma list of policies")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", default="1", help="budgets, e.g. 1..10")
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--sigma2", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--exhaust", type=_on_off, default=False, metavar="{on|off}")
    p.add_argument(
        "--metric",
        choices=("value", "intersection", "observed"),
        default="value",
        help="y column of the plot-data file",
    )

    p = sub.add_parser("attack", parents=[common], help="online attack selection over a JSONL stream")
    p.add_argument("--input", required=True, help="JSONL stream file")
    p.add_argument("--policy", default=DEFAULT_ATTACK_POLICIES, help="comma list of policies")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--r", type=int, default=None, help="reference rank (single-ref only)")
    p.add_argument("--permutations", type=int, default=100)
    p.add_argument("--exhaust", type=_on_off, default=True, metavar="{on|off}")

    p = sub.add_parser("oracle", parents=[common], help="exact selection probabilities by enumeration")
    p.add_argument("--policy", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--exhaust", type=_on_off, default=False, metavar="{on|off}")
    p.add_argument("--check-formula", action="store_true", help="compare with the k=2 closed form")

    p = sub.add_parser("bound", parents=[common], help="lower bound under noisy observations")
    p.add_argument("--delta", type=float, required=True, help="half the minimum gap between true values")
    p.add_argument("--sigma", type=float, required=True, help="noise scale")
    p.add_argument("--k", type=int, default=2)

    p = sub.add_parser("replay", help="rerun the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="override the recorded output directory")
    return parser


# -- output ------------------------------------------------------------------


def _emit(args, name: str, rows: list[dict], columns: Sequence[str], manifest: dict, extra: dict[str, str] = {}) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps([{c: r.get(c) for c in columns} for r in rows], indent=2) + "\n")
    else:
        sys.stdout.write(csv_text(rows, columns).replace("\r\n", "\n"))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(rows, columns))
    for fname, text in extra.items():
        with open(out / fname, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    manifest = {
        **dict.fromkeys(MANIFEST_FIELDS),
        **manifest,
        "tool": "seclab",
        "version": __version__,
        "command": name,
        "out": str(args.out),
    }
    with open(out / f"{name}.manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _arguments(**kw: Any) -> dict:
    """Flag/value pairs that rebuild the command line; ``None`` values are dropped."""
    return {k: v for k, v in kw.items() if v is not None and v is not False}


# -- commands ----------------------------------------------------------------


def cmd_analyze(args) -> int:
    ks = parse_int_list(args.k)
    bad = [k for k in ks if not 2 <= k <= 1000]
    if bad:
        raise UsageError(f"analyze needs 2 <= k <= 1000 (got {bad})")
    rows = []
    for k in ks:
        res = optimal_threshold(k)
        rows.append({"k": k, "alpha_k": res.alpha_star, "c_k": res.c_k})
    cols = ["k", "alpha_k", "c_k"]
    manifest = {"k": ks, "arguments": _arguments(k=args.k)}
    _emit(args, "analyze", rows, cols, manifest, {"analyze.json": json.dumps(rows, indent=2) + "\n"})
    return EXIT_OK


SIM_COLUMNS = [
    "policy",
    "n",
    "k",
    "t",
    "r",
    "sigma2",
    "trials",
    "seed",
    "value_ratio",
    "value_std_error",
    "intersection_ratio",
    "intersection_std_error",
    "observed_intersection_ratio",
    "observed_intersection_std_error",
    "ratio_of_means",
]


def cmd_simulate(args) -> int:
    seed = resolve_seed(args.seed)
    policies = parse_policies(args.policy)
    ks = parse_int_list(args.k)
    if args.trials < 1 or args.n < 1:
        raise UsageError("--trials and --n must be positive")
    reports = sweep(policies, ks, args.n, args.sigma2, args.trials, seed, args.t, args.r, args.exhaust, args.jobs)
    rows, plot = [], []
    for rep in reports:
        rows.append(
            {
                "policy": rep.policy,
                "n": rep.n,
                "k": rep.k,
                "t": rep.t,
                "r": rep.r,
                "sigma2": rep.sigma2,
                "trials": rep.trials,
                "seed": seed,
                "value_ratio": rep.value_ratio,
                "value_std_error": rep.std_error,
                "intersection_ratio": rep.intersection_ratio,
                "intersection_std_error": rep.intersection_std_error,
                "observed_intersection_ratio": rep.observed_intersection_ratio,
                "observed_intersection_std_error": rep.observed_intersection_std_error,
                "ratio_of_means": rep.ratio_of_means,
            }
        )
        y, err = {
            "value": (rep.value_ratio, rep.std_error),
            "intersection": (rep.intersection_ratio, rep.intersection_std_error),
            "observed": (rep.observed_intersection_ratio, rep.observed_intersection_std_error),
        }[args.metric]
        plot.append({"policy": rep.policy, "x": rep.k, "y": y, "err": err})
    manifest = {
        "policy": [p.value for p in policies],
        "n": args.n,
        "k": ks,
        "t": args.t,
        "r": args.r,
        "sigma2": args.sigma2,
        "trials": args.trials,
        "seed": seed,
        "exhaust": args.exhaust,
        "arguments": _arguments(
            policy=args.policy,
            n=args.n,
            k=args.k,
            t=args.t,
            r=args.r,
            sigma2=args.sigma2,
            trials=args.trials,
            exhaust="on" if args.exhaust else "off",
            metric=args.metric,
            seed=seed,
        ),
    }
    _emit(
        args,
        "simulate",
        rows,
        SIM_COLUMNS,
        manifest,
        {"simulate.plot.csv": csv_text(plot, ["policy", "x", "y", "err"])},
    )
    return EXIT_OK


ATTACK_COLUMNS = [
    "policy",
    "n",
    "k",
    "t",
    "r",
    "exhaust",
    "permutations",
    "seed",
    "fool_rate",
    "fool_rate_std",
    "fool_rate_std_error",
    "value_ratio",
    "value_std_error",
    "intersection_ratio",
    "intersection_std_error",
]


def cmd_attack(args) -> int:
    seed = resolve_seed(args.seed)
    policies = parse_policies(args.policy)
    stream = load_stream(args.input)
    if args.permutations < 1:
        raise UsageError("--permutations must be positive")
    rows, runs = [], []
    for policy in policies:
        r = args.r if policy is PolicyName.SINGLE_REF else None
        config = attack_config(args.k, args.t, r, args.exhaust)
        summary, per_perm = attack_over_permutations(stream, policy, config, seed, args.permutations)
        rows.append(
            {
                "policy": summary.policy,
                "n": summary.n,
                "k": summary.k,
                "t": summary.t,
                "r": summary.r,
                "exhaust": args.exhaust,
                "permutations": args.permutations,
                "seed": seed,
                "fool_rate": summary.fool_rate,
                "fool_rate_std": summary.fool_rate_std,
                "fool_rate_std_error": summary.fool_rate_std_error,
                "value_ratio": summary.value_ratio,
                "value_std_error": summary.std_error,
                "intersection_ratio": summary.intersection_ratio,
                "intersection_std_error": summary.intersection_std_error,
            }
        )
        for i, rep in enumerate(per_perm):
            runs.append(
                {
                    "policy": rep.policy,
                    "permutation": i,
                    "fool_rate": rep.fool_rate,
                    "value_ratio": rep.value_ratio,
                    "intersection_ratio": rep.intersection_ratio,
                }
            )
    manifest = {
        "policy": [p.value for p in policies],
        "k": args.k,
        "t": args.t,
        "r": args.r,
        "exhaust": args.exhaust,
        "seed": seed,
        "permutations": args.permutations,
        "input": str(args.input),
        "input_sha256": _sha256(args.input),
        "arguments": _arguments(
            input=str(args.input),
            policy=args.policy,
            k=args.k,
            t=args.t,
            r=args.r,
            permutations=args.permutations,
            exhaust="on" if args.exhaust else "off",
            seed=seed,
        ),
    }
    runs_csv = csv_text(runs, ["policy", "permutation", "fool_rate", "value_ratio", "intersection_ratio"])
    _emit(args, "attack", rows, ATTACK_COLUMNS, manifest, {"attack.runs.csv": runs_csv})
    return EXIT_OK


def cmd_oracle(args) -> int:
    policy = PolicyName.parse(args.policy)
    if args.n > MAX_ENUMERATION_N:
        raise UsageError(f"oracle enumerates n! orderings; n must be <= {MAX_ENUMERATION_N}")
    config = PolicyConfig(k=args.k, t=args.t, r=args.r, exhaust_budget=args.exhaust)
    rep = enumerate_exact(policy, args.n, args.k, config)
    rows = [
        {
            "rank": a,
            "count": c,
            "probability": str(p),
            "decimal": float(p),
            "top_k": a <= rep.k,
        }
        for a, (c, p) in enumerate(zip(rep.rank_counts, rep.all_rank_probability), start=1)
    ]
    summary: dict[str, Any] = {
        "policy": policy.value,
        "n": rep.n,
        "k": rep.k,
        "t": rep.t,
        "orderings": rep.orderings,
        "competitive_ratio": str(rep.competitive_ratio),
        "competitive_ratio_decimal": rep.competitive_ratio_float,
    }
    if args.check_formula:
        if rep.k != 2 or rep.t is None or not 2 <= rep.t <= rep.n - 2:
            raise UsageError("--check-formula needs k=2 and 2 <= t <= n-2")
        for conv in ("reconciled", "printed"):
            val = finite_ratio_k2(rep.n, rep.t, conv, exact=True)
            summary[f"formula_{conv}"] = str(val)
            summary[f"formula_{conv}_decimal"] = float(val)
            summary[f"delta_{conv}"] = float(val - rep.competitive_ratio)
    manifest = {
        "policy": policy.value,
        "n": args.n,
        "k": args.k,
        "t": rep.t,
        "r": args.r,
        "exhaust": args.exhaust,
        "arguments": _arguments(
            policy=args.policy,
            n=args.n,
            k=args.k,
            t=args.t,
            r=args.r,
            exhaust="on" if args.exhaust else "off",
            check_formula=args.check_formula,
        ),
    }
    cols = ["rank", "count", "probability", "decimal", "top_k"]
    summary_text = json.dumps(summary, indent=2) + "\n"
    _emit(args, "oracle", rows, cols, manifest, {"oracle.json": summary_text})
    if args.format == "csv":
        for key, val in summary.items():
            sys.stdout.write(f"# {key}: {val}\n")
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.k < 2 or args.k > 1000:
        raise UsageError("bound needs 2 <= k <= 1000")
    if not args.sigma > 0:
        raise UsageError("--sigma must be positive")
    if not args.delta > 0:
        raise UsageError("stochastic bound inapplicable: duplicate values (delta must be positive)")
    factor = stochastic_factor(args.delta, args.sigma)
    c_k = optimal_threshold(args.k).c_k
    rows = [
        {
            "delta": args.delta,
            "sigma": args.sigma,
            "x": args.delta / (2 * args.sigma**2),
            "factor": factor,
            "k": args.k,
            "c_k": c_k,
            "bound": c_k * factor,
        }
    ]
    manifest = {"k": args.k, "arguments": _arguments(delta=args.delta, sigma=args.sigma, k=args.k)}
    _emit(args, "bound", rows, list(rows[0]), manifest)
    return EXIT_OK


def _replay_argv(manifest_path: str, out: Optional[str]) -> list[str]:
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        command = manifest["command"]
        arguments = manifest["arguments"]
    except (OSError, ValueError, KeyError) as exc:
        raise StreamFormatError(f"unreadable manifest {manifest_path}: {exc}") from None
    argv = [command]
    for key, val in arguments.items():
        flag = "--" + key.replace("_", "-")
        if val is True:
            argv.append(flag)
        else:
            argv += [flag, str(val)]
    argv += ["--out", out if out is not None else manifest.get("out", "seclab-out")]
    return argv


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "attack": cmd_attack,
    "oracle": cmd_oracle,
    "bound": cmd_bound,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2 already
        return int(exc.code or 0)
    try:
        if args.command == "replay":
            return main(_replay_argv(args.manifest, args.out))
        return COMMANDS[args.command](args)
    except (UsageError, InvalidConfig, GapError) as exc:
        print(f"seclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StreamFormatError, AttackDataError, OSError) as exc:
        print(f"seclab: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"seclab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
