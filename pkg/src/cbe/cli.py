"""Command-line entry point wiring the library into reproducible workflows.

Subcommands: gen-data, train, encode, eval-recall, eval-angle, bench.
Every run prints its resolved configuration (seed included) and is a pure
function of flags, input files, and seed. Exit codes: 0 success, 1 usage
error, 2 data error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dataio, evaluation
from .encoders import (
    CirculantParams,
    BilinearParams,
    FjltParams,
    LshParams,
    bilinear_random,
    cbe_random,
    encode_matrix,
    fjlt_random,
    lsh_random,
    precondition,
)
from .optimizer import OptConfig, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

_METHOD_TYPES = {
    "cbe-rand": CirculantParams,
    "cbe-opt": CirculantParams,
    "lsh": LshParams,
    "bilinear": BilinearParams,
    "fjlt": FjltParams,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the contract reserves 2 for
    # data errors and 1 for usage errors.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cbe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[], help="generate a synthetic data matrix")
    p.add_argument("--kind", choices=["gaussian", "clustered"], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=32, help="cluster count (clustered kind)")
    p.add_argument("--spread", type=float, default=0.25, help="relative perturbation scale")
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="learn circulant parameters from data")
    p.add_argument("--method", choices=["cbe-opt"], default="cbe-opt")
    p.add_argument("--in", dest="input", required=True, metavar="X.cbem")
    p.add_argument("--k", type=int, default=None, help="code length (default: d)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--constraints", default=None, help="pair-constraints text file")
    p.add_argument("--iters", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--solver", choices=["radial_exact", "gradient_descent"],
                   default="radial_exact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="params.cbep")
    p.add_argument("--trace", default=None, help="objective trace CSV (default: OUT.trace.csv)")

    p = sub.add_parser("encode", help="encode a data matrix into binary codes")
    p.add_argument("--method", choices=sorted(_METHOD_TYPES), required=True)
    p.add_argument("--params", default=None, help="parameters file from train or a prior run")
    p.add_argument("--seed", type=int, default=None, help="draw fresh parameters from this seed")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, default=None, help="code length (default: d)")
    p.add_argument("--density", type=float, default=0.1, help="fjlt nonzero density")
    p.add_argument("--precondition", default="off", metavar="{off|block=B}")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, metavar="codes.cbec")

    p = sub.add_parser("eval-recall", help="recall@1..m of Hamming ranking vs l2 truth")
    p.add_argument("--db", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--codes-db", required=True)
    p.add_argument("--codes-q", required=True)
    p.add_argument("--g", type=int, default=10, help="ground-truth neighborhood size")
    p.add_argument("--m-max", type=int, default=100)
    p.add_argument("--label", default=None, help="method label in the CSV")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval-angle", help="angle-estimator statistics for one (theta, k)")
    p.add_argument("--theta", type=float, required=True, help="angle in radians")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="per-point encode timing across dimensions")
    p.add_argument("--d-list", required=True, help="comma-separated powers of two")
    p.add_argument("--methods", default="full,bilinear,circulant",
                   help="comma-separated subset of full,bilinear,circulant,fjlt,lsh,cbe-rand")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _echo_config(args):
    items = ", ".join(f"{key}={value!r}" for key, value in sorted(vars(args).items()))
    print(f"config: {items}")


def _cmd_gen_data(args) -> int:
    if args.kind == "gaussian":
        m = dataio.synth_gaussian(args.n, args.d, args.seed)
    else:
        m = dataio.synth_clustered(args.n, args.d, args.clusters, args.spread, args.seed)
    dataio.write_matrix(args.out, m)
    print(f"wrote {m.shape[0]}x{m.shape[1]} matrix to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    X = dataio.read_matrix(args.input)
    k = X.shape[1] if args.k is None else args.k
    constraints = None
    if args.constraints is not None:
        constraints = dataio.read_constraints(args.constraints, n=X.shape[0])
    config = OptConfig(k=k, lam=args.lam, mu=args.mu, max_outer_iters=args.iters,
                       objective_rel_tol=args.tol, solver_mode=args.solver)
    params, state = train(X, config, constraints=constraints, seed=args.seed)
    dataio.write_params(args.out, params, seed=args.seed)
    trace_path = args.trace if args.trace is not None else f"{args.out}.trace.csv"
    with open(trace_path, "w") as fh:
        fh.write("step,objective\n")
        for step, value in enumerate(state.objective_trace, start=1):
            fh.write(f"{step},{value!r}\n")
    print(f"wrote params to {args.out}, objective trace to {trace_path}")
    return EXIT_OK


def _parse_precondition(spec_text: str):
    if spec_text == "off":
        return None
    if spec_text.startswith("block="):
        try:
            return int(spec_text.split("=", 1)[1])
        except ValueError:
            pass
    raise UsageError(f"--precondition must be 'off' or 'block=B', got {spec_text!r}")


def _fresh_params(method: str, d: int, k: int, seed: int, density: float):
    if method in ("cbe-rand", "cbe-opt"):
        return cbe_random(d, k, seed)
    if method == "lsh":
        return lsh_random(d, k, seed)
    if method == "bilinear":
        return bilinear_random(d, k, seed)
    return fjlt_random(d, k, density, seed)


def _cmd_encode(args) -> int:
    if (args.params is None) == (args.seed is None):
        raise UsageError("encode requires exactly one of --params or --seed")
    X = dataio.read_matrix(args.input).astype(np.float64)
    d = X.shape[1]
    block = _parse_precondition(args.precondition)
    if block is not None:
        mix_seed = args.seed if args.seed is not None else 0
        mix_rng = np.random.default_rng([mix_seed, 1])
        mix_signs = (mix_rng.integers(0, 2, size=d) * 2 - 1).astype(np.int8)
        X = precondition(X, mix_signs, block)
    if args.params is not None:
        params, _ = dataio.read_params(args.params)
        expected = _METHOD_TYPES[args.method]
        if not isinstance(params, expected):
            raise dataio.DataFileError(
                f"{args.params}: holds {type(params).__name__}, but --method {args.method} "
                f"expects {expected.__name__}"
            )
    else:
        k = d if args.k is None else args.k
        params = _fresh_params(args.method, d, k, args.seed, args.density)
    codes = encode_matrix(params, X, threads=args.threads)
    dataio.write_codes(args.out, codes)
    print(f"wrote {codes.n} codes of {codes.k} bits to {args.out}")
    return EXIT_OK


def _cmd_eval_recall(args) -> int:
    db = dataio.read_matrix(args.db)
    queries = dataio.read_matrix(args.queries)
    codes_db = dataio.read_codes(args.codes_db)
    codes_q = dataio.read_codes(args.codes_q)
    truth = evaluation.ground_truth_knn(db, queries, args.g)
    label = args.label if args.label is not None else args.codes_db
    curve = evaluation.recall_at_m(codes_db, codes_q, truth, args.m_max, method=label)
    evaluation.write_recall_csv(args.out, [curve])
    print(f"recall@{args.g} = {curve.recall_at_m[args.g - 1]:.4f}; wrote {args.out}")
    return EXIT_OK


def _cmd_eval_angle(args) -> int:
    stats = evaluation.angle_experiment(args.theta, args.d, args.k, args.trials, args.seed)
    evaluation.write_angle_csv(args.out, [stats])
    print(f"mean={stats.mean_normalized_hamming:.5f} "
          f"variance={stats.empirical_variance:.3e}; wrote {args.out}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        d_values = [int(part) for part in args.d_list.split(",") if part]
    except ValueError:
        raise UsageError(f"--d-list must be comma-separated integers, got {args.d_list!r}")
    methods = [part for part in args.methods.split(",") if part]
    records = evaluation.timing_bench(d_values, methods, reps=args.reps, seed=args.seed)
    evaluation.write_timing_csv(args.out, records)
    for rec in records:
        print(f"{rec.method} d={rec.d}: {rec.value / 1e6:.3f} ms/point")
    print(f"wrote {args.out}")
    return EXIT_OK


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "encode": _cmd_encode,
    "eval-recall": _cmd_eval_recall,
    "eval-angle": _cmd_eval_angle,
    "bench": _cmd_bench,
}


def run(argv=None) -> int:
    """Parse argv and execute one subcommand, mapping failures to exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _echo_config(args)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (dataio.DataFileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ArithmeticError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
