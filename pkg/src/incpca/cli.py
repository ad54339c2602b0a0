"""Command-line front end: ``incpca {fit,stream,bench,gen}``.

Exit status: 0 on success, 1 on a data or numerical error (message on
stderr, with row/column when known), 2 on a usage error.
"""

import argparse
import json
import sys

import numpy as np

from . import bench, generators
from .config import DEFAULT_EPS_REL, PcaConfig
from .engine import IncrementalPCA
from .errors import IncPCAError, InsufficientDataError
from .io import CsvStream, DiagnosticsRecord, PcSeriesWriter, open_text, write_bench_table, write_csv
from .moments import ZERO_VARIANCE_POLICIES
from .oracle import batch_pca

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0.0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _n_start(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"must be >= 2, got {text}")
    return v


def _modes(text):
    modes = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in modes if m not in bench.MODES]
    if not modes or bad:
        raise argparse.ArgumentTypeError(
            f"choose a comma-separated subset of {','.join(bench.MODES)}"
        )
    return modes


def _add_engine_flags(p):
    g = p.add_argument_group("engine")
    g.add_argument("--n-start", type=_n_start, default=None,
                   help="warm-up sample count (default: m + 1)")
    g.add_argument("--no-center", dest="centering", action="store_false",
                   help="do not subtract the running mean")
    g.add_argument("--no-scale", dest="scaling", action="store_false",
                   help="do not divide by the running standard deviation")
    g.add_argument("--continuity", choices=("on", "off"), default="on",
                   help="track component identity, sign and degenerate bases")
    g.add_argument("--degeneracy-eps", type=_positive_float, default=DEFAULT_EPS_REL,
                   metavar="EPS", help="relative eigengap below which components are "
                   "treated as degenerate (default: %(default)g)")
    g.add_argument("--zero-variance", choices=ZERO_VARIANCE_POLICIES, default="error",
                   help="what to do with a constant column under scaling")


def _config(args, m):
    return PcaConfig(
        m=m,
        n_start=args.n_start,
        centering=args.centering,
        scaling=args.scaling,
        continuity=args.continuity == "on",
        eps_rel=args.degeneracy_eps,
        zero_variance=args.zero_variance,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="incpca", description="Exact incremental PCA over sample streams."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="run a CSV file through the engine")
    fit.add_argument("input", help="CSV file with a header row ('-' for stdin)")
    fit.add_argument("--output", default="-", help="PC series CSV (default: stdout)")
    fit.add_argument("--diagnostics", help="write one JSON record per pushed sample here")
    fit.add_argument("--compare-batch", action="store_true",
                     help="also run batch PCA on the whole file; report its spectrum and "
                     "the per-step Frobenius distance to its covariance")
    _add_engine_flags(fit)

    stream = sub.add_parser("stream", help="read CSV rows from stdin, emit a record per push")
    stream.add_argument("--output", help="also write the PC series CSV here")
    _add_engine_flags(stream)

    b = sub.add_parser("bench", help="time incremental against batch PCA")
    b.add_argument("--vars", type=_positive_int, default=27)
    b.add_argument("--samples", type=_positive_int, default=1000)
    b.add_argument("--trials", type=_positive_int, default=bench.DEFAULT_TRIALS)
    b.add_argument("--modes", type=_modes, default=bench.MODES,
                   help="comma-separated subset of " + ",".join(bench.MODES))
    b.add_argument("--points", type=_positive_int, default=20, help="prefix grid size")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--output", default="-", help="timing CSV (default: stdout)")
    _add_engine_flags(b)

    gen = sub.add_parser("gen", help="write a synthetic stream as CSV")
    gen.add_argument("--scenario", choices=generators.SCENARIOS, default="random")
    gen.add_argument("--vars", type=_positive_int, default=6)
    gen.add_argument("--samples", type=_positive_int, default=500)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", default="-", help="CSV path (default: stdout)")
    return parser


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    return obj


def _summary(engine, batch=None):
    d = engine.diagnostics()
    out = {
        "n": engine.n,
        "m": engine.m,
        "eigenvalues": d.eigenvalues.tolist(),
        "explained": d.explained.tolist(),
        "cumulative_explained": d.cumulative_explained.tolist(),
        "correction_counts": d.correction_counts,
    }
    if batch is not None:
        out["batch_eigenvalues"] = batch.eigenvalues.tolist()
        out["frob_ref"] = d.frob_ref
    return out


def _warm_rows(rows, n_start):
    block = []
    for row in rows:
        block.append(row)
        if len(block) == n_start:
            return np.array(block)
    raise InsufficientDataError(f"need n_start={n_start} rows for warm-up, got {len(block)}")


def cmd_fit(args):
    with open_text(args.input, "r") as fh:
        reader = CsvStream(fh)
        config = _config(args, reader.m)
        batch = None
        if args.compare_batch:
            # the batch reference needs the whole file anyway
            rows = np.array(list(reader), dtype=float).reshape(-1, reader.m)
            if rows.shape[0] >= 2:
                batch = batch_pca(rows, config)
            source = iter(rows)
        else:
            source = reader
        warm = _warm_rows(source, config.n_start)
        engine = IncrementalPCA.warmup(warm, config)
        if batch is not None:
            engine.reference_q = batch.q

        with open_text(args.output, "w") as out, \
                open_text(args.diagnostics, "w") if args.diagnostics else _null() as diag:
            pcs = PcSeriesWriter(out, config.m)
            for k, p in enumerate(engine.warmup_pcs, start=1):
                pcs.write(k, p)
            for row in source:
                result = engine.push(row)
                pcs.write(result.step, result.pcs)
                if diag is not None:
                    diag.write(DiagnosticsRecord.from_step(result).to_json() + "\n")
            pcs.flush()
    print(json.dumps(_summary(engine, batch)), file=sys.stderr)
    return EXIT_OK


class _null:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def cmd_stream(args):
    reader = CsvStream(sys.stdin)
    config = _config(args, reader.m)
    engine = IncrementalPCA.warmup(_warm_rows(reader, config.n_start), config)
    out = sys.stdout
    with open_text(args.output, "w") if args.output else _null() as pc_fh:
        pcs = None
        if pc_fh is not None:
            pcs = PcSeriesWriter(pc_fh, config.m)
            for k, p in enumerate(engine.warmup_pcs, start=1):
                pcs.write(k, p)
        for row in reader:
            result = engine.push(row)
            out.write(DiagnosticsRecord.from_step(result).to_json() + "\n")
            out.flush()
            if pcs is not None:
                pcs.write(result.step, result.pcs)
    return EXIT_OK


def cmd_bench(args):
    config = _config(args, args.vars)
    if args.samples < config.n_start:
        raise InsufficientDataError(
            f"--samples {args.samples} is below the warm-up size {config.n_start}"
        )
    rows = bench.run_benchmark(n=args.samples, trials=args.trials, modes=args.modes,
                               seed=args.seed, points=args.points, config=config)
    write_bench_table(rows, args.output)
    return EXIT_OK


def cmd_gen(args):
    try:
        sc = generators.generate(args.scenario, args.vars, args.samples, args.seed)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    write_csv(args.output, sc.names, sc.data)
    info = {k: _jsonable(v) for k, v in sc.info.items()}
    print(json.dumps({"scenario": sc.scenario, "seed": sc.seed, **info}), file=sys.stderr)
    return EXIT_OK


class _UsageError(Exception):
    pass


COMMANDS = {"fit": cmd_fit, "stream": cmd_stream, "bench": cmd_bench, "gen": cmd_gen}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"incpca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK
    except (IncPCAError, OSError) as exc:
        print(f"incpca: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
