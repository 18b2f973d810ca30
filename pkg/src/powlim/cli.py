"""Command-line front end.

Subcommands: ``offline`` fits an interpolant on a family config and saves a
surrogate; ``eval`` evaluates a saved surrogate at one parameter vector;
``bench`` runs a convergence experiment to CSV; ``doe`` writes a maximin
design; ``gen`` materializes a built-in problem as MatrixMarket files;
``validate`` runs the invariant suite.

Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad arguments; route to exit code 1
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="powlim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    offline = sub.add_parser("offline", help="fit an interpolant and save a surrogate")
    offline.add_argument("--config", required=True, help="family JSON config")
    offline.add_argument("--m", required=True, type=int, help="total weight bound")
    offline.add_argument("--force-k0", action="store_true",
                         help="pin the zero multi-index first (implied by --quantity logdet)")
    offline.add_argument("--sample-n", type=int, default=100_000)
    offline.add_argument("--sample-seed", type=int, default=0)
    offline.add_argument("--tol", type=float, default=1e-12,
                         help="relative greedy stopping tolerance (0 disables)")
    offline.add_argument("--quantity", required=True, choices=["solve", "inverse", "logdet"])
    offline.add_argument("--rhs", default=None, help="MatrixMarket vector overriding the config rhs")
    offline.add_argument("--out", required=True, help="output surrogate JSON path")

    evaluate = sub.add_parser("eval", help="evaluate a saved surrogate at one parameter")
    evaluate.add_argument("--model", required=True, help="surrogate JSON path")
    evaluate.add_argument("--mu", required=True, help="comma-separated parameter values")
    evaluate.add_argument("--out", default=None, help="write values here instead of stdout")

    bench = sub.add_parser("bench", help="run a convergence experiment")
    bench.add_argument("--config", required=True, help="bench JSON config")
    bench.add_argument("--out", required=True, help="output CSV path")

    doe = sub.add_parser("doe", help="write a maximin LHS design on the unit box")
    doe.add_argument("--dim", required=True, type=int)
    doe.add_argument("--n", required=True, type=int)
    doe.add_argument("--seed", required=True, type=int)
    doe.add_argument("--out", required=True, help="output CSV path")

    gen = sub.add_parser("gen", help="materialize a built-in problem on disk")
    gen.add_argument("--problem", required=True, help="problem kind")
    gen.add_argument("--n", required=True, type=int, help="grid resolution")
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--out", required=True, help="output directory")

    validate = sub.add_parser("validate", help="run the invariant check suite")
    validate.add_argument("--level", choices=["fast", "full"], default="fast")

    return parser


def _cmd_offline(args) -> int:
    from .eim import EimInterpolant
    from .family import _read_vector, load_family
    from .surrogates import Surrogate

    family, rhs = load_family(args.config)
    if args.rhs is not None:
        rhs = _read_vector(args.rhs)
    if args.quantity == "solve" and rhs is None:
        raise _UsageError("--quantity solve needs an rhs (config key or --rhs)")
    force_k0 = args.force_k0 or args.quantity == "logdet"
    model = EimInterpolant(
        m=args.m, tol=args.tol, force_k0=force_k0,
        n_sample=args.sample_n, sample_seed=args.sample_seed,
    ).fit(family)
    surrogate = Surrogate(model=model, quantity=args.quantity, rhs=rhs).fit(family)
    surrogate.save(args.out)
    print(f"selected {model.n_selected_} terms "
          f"(max residual history {model.residual_history_[0]:.3e} -> "
          f"{model.residual_history_[-1]:.3e}); wrote {args.out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    from .surrogates import load_surrogate

    surrogate = load_surrogate(args.model)
    try:
        mu = np.array([float(v) for v in args.mu.split(",")])
    except ValueError as exc:
        raise _UsageError(f"--mu must be comma-separated numbers: {exc}") from exc
    value = surrogate.predict(mu)
    lines = [format(v, ".17g") for v in np.atleast_1d(np.asarray(value, dtype=float)).ravel()]
    if args.out is None:
        print("\n".join(lines))
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote {len(lines)} values to {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import BenchConfig, export_csv, run_convergence

    cfg = BenchConfig.from_json(args.config)
    report = run_convergence(cfg)
    export_csv(report, args.out)
    print(f"wrote {len(report.rows)} rows to {args.out} "
          f"(config digest {report.metadata['config_digest']})")
    return EXIT_OK


def _cmd_doe(args) -> int:
    from .sampling import maximin_lhs, save_doe_csv

    sample = maximin_lhs(args.dim, args.n, args.seed)
    save_doe_csv(sample, args.out)
    print(f"wrote {len(sample)} x {sample.r} design to {args.out}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    from .problems import generate_problem
    from .family import save_family

    family, rhs = generate_problem(args.problem, args.n, args.seed)
    config_path = save_family(family, args.out, rhs)
    print(f"wrote {family.d}-term family (n={family.n}) to {config_path}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    from .suite import validate_suite

    results = validate_suite(args.level)
    width = max(len(res.name) for res in results)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{res.name:<{width}}  {status}  {res.seconds:7.2f}s  {res.detail}")
    failed = sum(not res.passed for res in results)
    print(f"{len(results) - failed}/{len(results)} checks passed ({args.level} level)")
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


_COMMANDS = {
    "offline": _cmd_offline,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "doe": _cmd_doe,
    "gen": _cmd_gen,
    "validate": _cmd_validate,
}


def main(argv=None) -> int:
    from .linalg import NumericalError
    from .model_io import ModelFormatError

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (json.JSONDecodeError, ModelFormatError) as exc:
        print(f"file format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
