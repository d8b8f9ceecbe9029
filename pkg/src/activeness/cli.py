"""Command-line entry point.

    activeness caq eval --library LIB --queries Q [--weights W] [--trials N] ...
    activeness caq compare REPORT...
    activeness aq eval --manifest M [--format json|csv|md]
    activeness registry serve --library LIB [--latency MS] [--port P]

Exit codes: 0 success, 1 validation error, 2 transport error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ActivenessError, EvaluationAborted, NondeterministicLookupError, TransportError, ValidationError
from .lookup import TimingConfig, default_weights, load_library, load_weights
from .readiness import evaluate_readiness, load_manifest
from .registry import run_mock_registry
from .reporting import (
    AGGREGATES,
    compare_libraries,
    evaluate_library,
    load_queries,
    load_report,
    render_report,
)

log = logging.getLogger("activeness")

EXIT_OK, EXIT_INVALID, EXIT_TRANSPORT = 0, 1, 2

# stand-in for every timing value under --deterministic-timing
SENTINEL_SECONDS = 1e-3

FORMATS = ("json", "csv", "md", "markdown")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="activeness", description="Component library and project readiness metrics.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    caq = groups.add_parser("caq", help="component activeness quotient of a library")
    caq_cmds = caq.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = caq_cmds.add_parser("eval", help="measure a library against a query set")
    ev.add_argument("--library", required=True, type=Path)
    ev.add_argument("--queries", required=True, type=Path)
    ev.add_argument("--weights", type=Path, help="weight table JSON (default: $CAQ_DEFAULT_WEIGHTS or 3/2/1)")
    ev.add_argument("--trials", type=int, default=TimingConfig.trials)
    ev.add_argument("--warmups", type=int, default=TimingConfig.warmups)
    ev.add_argument("--aggregate", choices=AGGREGATES, default="mean")
    ev.add_argument("--workers", type=int, default=1, help="components measured concurrently")
    ev.add_argument("--timeout", type=float, default=5.0, help="remote request timeout, seconds")
    ev.add_argument("--connection-limit", type=int, default=1)
    ev.add_argument("--deterministic-timing", action="store_true",
                    help=f"record every trial as {SENTINEL_SECONDS:g} s (for golden tests)")
    _output_args(ev)

    cmp_ = caq_cmds.add_parser("compare", help="rank libraries by aggregate CAQ")
    cmp_.add_argument("reports", nargs="+", type=Path, help="JSON reports written by 'caq eval'")
    _output_args(cmp_)

    aq = groups.add_parser("aq", help="activeness quotient of a project")
    aq_cmds = aq.add_subparsers(dest="command", required=True, parser_class=_Parser)
    aq_ev = aq_cmds.add_parser("eval", help="evaluate a readiness manifest")
    aq_ev.add_argument("--manifest", required=True, type=Path)
    aq_ev.add_argument("--count-surplus", action="store_true",
                       help="count available-but-unneeded resources toward HS_a")
    aq_ev.add_argument("--no-mq-ratio-cap", dest="mq_ratio_cap", action="store_false",
                       help="count every possessed skill, not only required ones")
    _output_args(aq_ev)

    reg = groups.add_parser("registry", help="mock remote component registry")
    reg_cmds = reg.add_subparsers(dest="command", required=True, parser_class=_Parser)
    serve = reg_cmds.add_parser("serve", help="serve a library fixture over HTTP")
    serve.add_argument("--library", required=True, type=Path)
    serve.add_argument("--latency", type=float, default=0.0, help="injected delay per request, milliseconds")
    serve.add_argument("--port", type=int, default=8765)
    serve.add_argument("--host", default="127.0.0.1")
    return parser


def _output_args(p):
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")


def _emit(data: bytes, out):
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        try:
            out.write_bytes(data)
        except OSError as exc:
            raise ValidationError(f"cannot write {str(out)!r}: {exc.strerror or exc}") from None


def _caq_eval(args):
    descriptor = load_library(args.library)
    queries = load_queries(args.queries)
    weights = load_weights(args.weights) if args.weights else default_weights()
    cfg = TimingConfig(args.trials, args.warmups)
    if args.workers < 1 or args.connection_limit < 1:
        raise ValidationError("--workers and --connection-limit must be >= 1")
    report = evaluate_library(
        descriptor,
        queries,
        weights,
        cfg,
        aggregate=args.aggregate,
        sentinel=SENTINEL_SECONDS if args.deterministic_timing else None,
        workers=args.workers,
        timeout=args.timeout,
        connection_limit=args.connection_limit,
    )
    _emit(render_report(report, args.format), args.out)


def _caq_compare(args):
    ranking = compare_libraries([load_report(p) for p in args.reports])
    _emit(render_report(ranking, args.format), args.out)


def _aq_eval(args):
    manifest = load_manifest(args.manifest)
    result = evaluate_readiness(manifest, mq_ratio_cap=args.mq_ratio_cap, count_surplus=args.count_surplus)
    _emit(render_report(result, args.format), args.out)


def _registry_serve(args):
    descriptor = load_library(args.library)
    handle = run_mock_registry(descriptor, args.latency / 1000.0, host=args.host, port=args.port)
    print(f"serving {descriptor.library_id!r} at {handle.url}", file=sys.stderr, flush=True)
    try:
        handle.wait()
    except KeyboardInterrupt:
        pass
    finally:
        handle.shutdown()


COMMANDS = {
    ("caq", "eval"): _caq_eval,
    ("caq", "compare"): _caq_compare,
    ("aq", "eval"): _aq_eval,
    ("registry", "serve"): _registry_serve,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.group, args.command](args)
    except EvaluationAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.partial is not None and exc.partial.rows:
            sys.stderr.buffer.write(b"partial report:\n" + render_report(exc.partial, "json"))
        return EXIT_TRANSPORT
    except TransportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (ValidationError, NondeterministicLookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ActivenessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
