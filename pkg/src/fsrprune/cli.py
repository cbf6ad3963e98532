"""Command line entry point: ``fsrprune {prune,oracle,bench,explain}``.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .core import FSRError, PruneConfig
from .focus import AttentionInput
from .pipeline import explain, format_report, prune, result_to_document
from .synthbench import (
    bench_throughput,
    format_table,
    oracle_trials,
    quality_trials,
    scan_scaling,
    summarize,
    write_csv,
    write_summary,
)
from .tensor_io import (
    KIND_TOKENS,
    TensorFormatError,
    dumps_document,
    encode_tensor,
    read_document,
    read_tensor,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not np.isfinite(value) or value < 0:
        raise argparse.ArgumentTypeError(f"must be a finite number >= 0, got {text}")
    return value


def _unit_float(text: str) -> float:
    value = _nonneg_float(text)
    if value > 1:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [_positive_int(t) for t in text.split(",") if t]
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(f"expected comma-separated positive integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fsrprune", description="Focus-Scan-Refine token pruning")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("prune", help="prune a token matrix to a fixed budget")
    p.add_argument("--tokens", required=True, help="FSRT file, kind 0 (N x d)")
    p.add_argument("--attn", required=True, help="FSRT file, kind 1 (H x N) or 2 (N x N)")
    p.add_argument("--query", help="FSRT file, kind 3 (1 x d)")
    p.add_argument("--no-query", action="store_true", help="drop the relevance pathway")
    p.add_argument("--budget", type=_positive_int, required=True)
    p.add_argument("--alpha", type=_nonneg_float, default=3.0)
    p.add_argument("--beta", type=_nonneg_float, default=1.0)
    p.add_argument("--rho", type=_unit_float, default=0.9)
    p.add_argument("--kappa", type=_nonneg_float, default=1.0)
    p.add_argument("--saliency-mode", choices=("cls_attention", "self_attention_aggregate"),
                   help="must agree with the attention file kind (inferred if omitted)")
    p.add_argument("--no-stats", action="store_true", help="skip the coverage radius")
    p.add_argument("--out", help="result document path (stdout if omitted)")
    p.add_argument("--vectors-out", help="optional FSRT sidecar (kind 0) with the kept vectors")

    o = sub.add_parser("oracle", help="check greedy coverage against the exhaustive optimum")
    o.add_argument("--n", type=_positive_int, required=True)
    o.add_argument("--d", type=_positive_int, required=True)
    o.add_argument("--budget", type=_positive_int, required=True)
    o.add_argument("--trials", type=_positive_int, default=100)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--focus-size", type=_positive_int,
                   help="fixed focus size; default is the dynamic size under --rho")
    o.add_argument("--rho", type=_unit_float, default=0.9)
    o.add_argument("--json", action="store_true", help="print the summary as JSON")

    b = sub.add_parser("bench", help="synthetic quality sweep and throughput timing")
    b.add_argument("--trials", type=_positive_int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--clusters", type=_positive_int, default=3)
    b.add_argument("--tokens-per-cluster", type=_positive_int, default=32)
    b.add_argument("--d", type=_positive_int, default=16)
    b.add_argument("--noise", type=_nonneg_float, default=0.3)
    b.add_argument("--budget-fraction", type=_unit_float, default=0.25)
    b.add_argument("--n-list", type=_int_list, default=[576])
    b.add_argument("--d-list", type=_int_list, default=[64])
    b.add_argument("--k-list", type=_int_list, default=[64])
    b.add_argument("--repeats", type=_positive_int, default=5)
    b.add_argument("--csv", help="per-trial CSV output")
    b.add_argument("--summary", help="summary JSON output")

    e = sub.add_parser("explain", help="report on a saved result document")
    e.add_argument("--result", required=True)
    e.add_argument("--json", action="store_true")
    return parser


def _load_attention(path: str, mode: str | None) -> AttentionInput:
    attn = read_tensor(path)
    if not isinstance(attn, AttentionInput):
        raise FSRError(f"{path} does not hold an attention tensor")
    if mode is not None and attn.mode != mode:
        raise FSRError(f"--saliency-mode {mode} does not match the {attn.mode} file {path}")
    return attn


def _cmd_prune(args) -> int:
    if args.query and args.no_query:
        raise UsageError("--query and --no-query are mutually exclusive")
    if not args.query and not args.no_query:
        raise UsageError("give --query or --no-query")
    tokens = read_tensor(args.tokens)
    if not (isinstance(tokens, np.ndarray) and tokens.ndim == 2):
        raise FSRError(f"{args.tokens} does not hold a token matrix")
    attn = _load_attention(args.attn, args.saliency_mode)
    query = None
    if args.query:
        query = read_tensor(args.query)
        if not (isinstance(query, np.ndarray) and query.ndim == 1):
            raise FSRError(f"{args.query} does not hold a query vector")
    config = PruneConfig(
        budget_K=args.budget,
        alpha=args.alpha,
        beta=args.beta,
        rho=args.rho,
        kappa=args.kappa,
        saliency_mode=attn.mode,
        relevance_mode="none" if args.no_query else "query",
        compute_stats=not args.no_stats,
    )
    result = prune(tokens, attn, query, config)
    if args.vectors_out:
        blob = encode_tensor(result.kept_vectors, KIND_TOKENS)
        with open(args.vectors_out, "wb") as fh:
            fh.write(blob)
    text = dumps_document(result_to_document(result))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    if args.budget > args.n:
        raise UsageError(f"--budget {args.budget} exceeds --n {args.n}")
    if args.focus_size is not None and args.focus_size > args.budget:
        raise UsageError("--focus-size cannot exceed --budget")
    summary = oracle_trials(args.n, args.d, args.budget, args.trials, args.seed,
                            focus_size=args.focus_size, rho=args.rho)
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"trials                 {summary['trials']}  (K_S = 0 in {summary['trivial']})")
    print(f"max ratio coverage/R_opt  {summary['max_ratio']:.6f}")
    print(f"mean ratio             {summary['mean_ratio']:.6f}")
    print(f"exceeds 2 * R_opt      {summary['violations_factor_2']}")
    print(f"exceeds 4 * R_opt      {summary['violations_factor_4']}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    seeds = [args.seed + t for t in range(args.trials)]
    rows = quality_trials(
        seeds,
        n_clusters=args.clusters,
        tokens_per_cluster=args.tokens_per_cluster,
        d=args.d,
        noise_sigma=args.noise,
        budget_fraction=args.budget_fraction,
    )
    summary = summarize(rows)
    timing = bench_throughput(args.n_list, args.d_list, args.k_list, args.repeats, args.seed)
    print(format_table(summary))
    print()
    for row in timing:
        print(f"prune N={row['n']} d={row['d']} K={row['K']}: median {row['median_ms']:.2f} ms over {row['repeats']}")
    scaling = scan_scaling(args.n_list[0], args.d_list[0], args.k_list[0], args.repeats, args.seed)
    print(f"scan N={scaling['n']} -> {2 * scaling['n']}: time ratio {scaling['ratio']:.2f}")
    if args.csv:
        write_csv(rows, args.csv)
    if args.summary:
        write_summary({"quality": summary, "throughput": timing, "scan_scaling": scaling}, args.summary)
    return EXIT_OK


def _cmd_explain(args) -> int:
    report = explain(read_document(args.result))
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(format_report(report))
    return EXIT_OK


COMMANDS = {"prune": _cmd_prune, "oracle": _cmd_oracle, "bench": _cmd_bench, "explain": _cmd_explain}


def run_cli(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (FSRError, TensorFormatError, OSError, json.JSONDecodeError) as exc:
        code = getattr(exc, "code", None)
        sys.stderr.write(f"fsrprune: data error{f' [{code}]' if code else ''}: {exc}\n")
        return EXIT_DATA


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
