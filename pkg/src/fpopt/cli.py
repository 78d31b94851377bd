"""Command-line entry point.

Verbs: ``run <config>``, ``gen-pool``, ``report <runs-dir>``,
``oracle-check``. Exit codes: 0 success, 2 config error, 3 oracle-protocol
error, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import shlex
import sys

import numpy as np

from .bridge import EndpointConfig, OracleEndpoint, ProtocolError
from .config import ConfigError, config_echo, load_config
from .fingerprint import random_fingerprint
from .harness import gen_seed_pool, report_runs_dir, run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PROTOCOL = 3
EXIT_RUNTIME = 4


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.output_dir is not None:
        config.output_dir = args.output_dir
    echo = config_echo(config)
    echo["output_dir"] = config.output_dir
    output = run_experiment(config, echo)
    print(f"wrote {len(output.records)} runs under {output.output_dir}")
    if output.aggregate_path is not None:
        print(f"aggregate: {output.aggregate_path}")
    else:
        print("aggregate skipped (needs n_seeds >= 2)")
    return EXIT_OK


def _cmd_gen_pool(args: argparse.Namespace) -> int:
    try:
        path = gen_seed_pool(args.length, args.count, args.sparsity, args.seed, args.out)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    print(f"wrote {args.count} fingerprints of length {args.length} to {path}")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    aggregate_path, mismatches = report_runs_dir(args.runs_dir)
    for miss in mismatches:
        print(
            f"MISMATCH {miss.run_dir}: {miss.metric} stored={miss.stored!r} "
            f"recomputed={miss.recomputed!r}",
            file=sys.stderr,
        )
    if aggregate_path is not None:
        print(f"aggregate: {aggregate_path}")
    if mismatches:
        print(f"{len(mismatches)} stored metrics disagree with their traces", file=sys.stderr)
        return EXIT_RUNTIME
    print("all stored summaries match their traces")
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    spawn = tuple(shlex.split(args.spawn)) if args.spawn else None
    endpoint_config = EndpointConfig(
        spawn=spawn, socket_path=args.socket, timeout_s=args.timeout
    )
    with OracleEndpoint(endpoint_config) as endpoint:
        descriptor = endpoint.handshake()
        print(
            f"handshake ok: oracle={descriptor.oracle!r} fp_len={descriptor.fp_len} "
            f"aux={list(descriptor.aux)}"
        )
        rng = np.random.default_rng(args.seed)
        fps = [random_fingerprint(descriptor.fp_len, rng) for _ in range(3)]
        scores = endpoint.eval_batch(fps)
        for fp, score in zip(fps, scores):
            print(f"  {fp.to_hex()[:16]}... -> {score:.6f}")
    print("oracle-check passed (handshake + 3 round trips)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpopt",
        description="Budget-constrained black-box optimization over binary fingerprints.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="YAML experiment config")
    p_run.add_argument("--output-dir", default=None, help="override output_dir")
    p_run.set_defaults(func=_cmd_run)

    p_pool = sub.add_parser("gen-pool", help="generate a seed-pool file")
    p_pool.add_argument("--length", type=int, required=True)
    p_pool.add_argument("--count", type=int, required=True)
    p_pool.add_argument("--sparsity", type=float, required=True)
    p_pool.add_argument("--seed", type=int, default=0)
    p_pool.add_argument("--out", required=True)
    p_pool.set_defaults(func=_cmd_gen_pool)

    p_report = sub.add_parser("report", help="recompute metrics from traces")
    p_report.add_argument("runs_dir")
    p_report.set_defaults(func=_cmd_report)

    p_check = sub.add_parser("oracle-check", help="handshake + 3 round-trip evaluations")
    group = p_check.add_mutually_exclusive_group(required=True)
    group.add_argument("--spawn", help="server command line (shell-quoted)")
    group.add_argument("--socket", help="unix socket path")
    p_check.add_argument("--timeout", type=float, default=60.0)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ProtocolError as exc:
        print(f"oracle protocol error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # runtime failures keep a distinct exit code
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
