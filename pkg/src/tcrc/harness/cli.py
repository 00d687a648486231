"""Command line interface: ``tcrc {generate,run,search,benchmark,report}``.

Exit codes: 0 success, 1 config error, 2 runtime/numeric error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .. import kernels
from ..errors import NoViableConfigError, NumericError, ParameterError, TCRCError
from ..mackey_glass import DEFAULT_DISCARD, MGParams, integrate_mg, write_series, z_normalize
from ..models import VARIANTS, TCRCConfig
from .bench import benchmark
from .experiment import PAPER_TAUS, ExperimentConfig, aggregate, run_experiment
from .report import emit_report, read_records
from .search import SearchSpace, search

logger = logging.getLogger("tcrc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


class ConfigFileError(Exception):
    pass


def _global_flags(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON config file")
    parser.add_argument("--out", default=default, help="output path (default: stdout)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                        help="worker threads for independent runs")
    parser.add_argument("--format", choices=("csv", "json"),
                        default=argparse.SUPPRESS if suppress else "csv")
    parser.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcrc", description=__doc__.splitlines()[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write Mackey-Glass series files")
    g.add_argument("--tau", type=float, action="append", help="delay(s); default: all paper delays")
    g.add_argument("--samples", type=int, default=10_000)
    g.add_argument("--discard", type=int, default=DEFAULT_DISCARD)
    g.add_argument("--raw", action="store_true", help="skip z-scoring")

    r = sub.add_parser("run", parents=[common], help="evaluate an experiment config")
    r.add_argument("--redact-timing", action="store_true",
                   help="blank wall-clock fields for byte-comparable reports")

    s = sub.add_parser("search", parents=[common], help="hyper-parameter search")
    s.add_argument("--log", help="write the trial log (JSON) here")
    s.add_argument("--report", help="write the final all-trajectory report here")
    s.add_argument("--budget", type=int, help="override the search budget")

    b = sub.add_parser("benchmark", parents=[common], help="runtime at matched state size")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--sizes", type=int, nargs="+", default=[300])
    b.add_argument("--variants", nargs="+", choices=VARIANTS, default=list(VARIANTS))
    b.add_argument("--compare-backends", action="store_true",
                   help="time both the compiled and the pure-Python kernels")

    rep = sub.add_parser("report", parents=[common], help="aggregate record files")
    rep.add_argument("inputs", nargs="+", help="record files (csv or json)")
    return parser


def _load_config(path):
    if path is None:
        raise ConfigFileError("--config is required for this command")
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: invalid JSON ({exc})") from exc


def _emit_text(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc}") from exc


def cmd_generate(args):
    base = MGParams.from_dict(_load_config(args.config).get("mg", {})) if args.config else MGParams()
    taus = args.tau or list(PAPER_TAUS)
    for tau in taus:
        series = integrate_mg(replace(base, tau=tau), args.samples, args.discard)
        if not args.raw:
            series = z_normalize(series)
        if args.out is None:
            if len(taus) > 1:
                raise ConfigFileError("--out (directory or pattern with {tau}) is required for several taus")
            sys.stdout.write("\n".join(repr(float(x)) for x in series.values) + "\n")
            continue
        out = Path(args.out)
        if "{tau}" in str(out):
            path = Path(str(out).format(tau=f"{tau:g}"))
        elif out.is_dir() or len(taus) > 1:
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"mackey_glass_tau{tau:g}.txt"
        else:
            path = out
        write_series(path, series)
        logger.info("wrote %s", path)


def cmd_run(args):
    cfg = ExperimentConfig.from_dict(_load_config(args.config))
    records = run_experiment(cfg, threads=args.threads)
    out = args.out or cfg.output
    text = emit_report(records, args.format, redact_timing=args.redact_timing)
    _emit_text(text, out)


def cmd_search(args):
    doc = _load_config(args.config)
    if "search" not in doc:
        raise ConfigFileError("search config needs a 'search' section")
    template = ExperimentConfig.from_dict(doc)
    space = SearchSpace.from_dict(doc["search"])
    if args.budget:
        space = replace(space, budget=args.budget)
    result = search(space, template, threads=args.threads, log_path=args.log)
    best = result.best.to_dict()
    best.pop("trajectory_ids", None)
    final = run_experiment(replace(result.best, trajectory_ids=None), threads=args.threads)
    summary = aggregate(final)
    doc_out = {"best_params": result.best_params, "search_mean_mse": result.best_score,
               "config": best, "summary": [r.to_dict() for r in summary]}
    _emit_text(json.dumps(doc_out, indent=1) + "\n", args.out)
    if args.report:
        emit_report(final, args.format, args.report)


def cmd_benchmark(args):
    if args.config:
        cfg = ExperimentConfig.from_dict(_load_config(args.config))
    else:
        cfg = ExperimentConfig(model=TCRCConfig(), taus=(17,))
    backends = kernels.available() if args.compare_backends else None
    rows = benchmark(cfg, repeats=args.repeats, sizes=args.sizes, variants=args.variants,
                     backends=backends)
    header = ("variant", "target_size", "state_dim", "backend", "repeats", "median_s")
    if args.format == "json":
        text = json.dumps([r.to_dict() for r in rows], indent=1) + "\n"
    else:
        text = ",".join(header) + "\n" + "".join(
            ",".join(format(v, ".6g") if isinstance(v, float) else str(v) for v in
                     (r.variant, r.target_size, r.state_dim, r.backend, r.repeats, r.median_s)) + "\n"
            for r in rows)
    _emit_text(text, args.out)


def cmd_report(args):
    records = []
    for path in args.inputs:
        records.extend(read_records(path))
    _emit_text(emit_report(aggregate(records), args.format), args.out)


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "search": cmd_search,
            "benchmark": cmd_benchmark, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigFileError, ParameterError, KeyError, TypeError) as exc:
        print(f"tcrc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, NoViableConfigError, TCRCError, ArithmeticError) as exc:
        print(f"tcrc: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"tcrc: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
