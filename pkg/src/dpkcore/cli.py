"""Command-line front end.

Exit codes: 0 success, 1 invalid arguments or spec, 2 I/O failure,
3 bound check failed under ``--assert-bounds``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from dpkcore.graph import GraphInputError, parse_generator_spec, read_edge_list
from dpkcore.harness import (
    ALGORITHMS,
    ExperimentSpec,
    SpecError,
    dp_kcore_mechanism,
    equivalence_test,
    make_event,
    privacy_audit,
    run,
    to_csv,
    to_json,
)
from dpkcore.ledp import LedpConfig, ledp_core_numbers
from dpkcore.mechanisms import NoiseOracle
from dpkcore.private_kcore import Schedule

log = logging.getLogger("dpkcore")

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_BOUNDS = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--graph", help="edge-list file")
    src.add_argument("--gen", help="generator spec model:n[:p], e.g. gnp:1000:0.01")
    p.add_argument("--relabel", action="store_true", help="map file ids to 0..k-1")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpkcore", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run seeded trials of one algorithm and report errors")
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    _add_graph_args(p)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--eta", type=float, default=0.5)
    p.add_argument("--step-const", type=float, default=60.0, help="schedule step is this times ln(n)/epsilon")
    p.add_argument("--start", type=float, help="explicit first threshold (with --step)")
    p.add_argument("--step", type=float, help="explicit additive step (with --start)")
    p.add_argument("--cprime", type=float, default=120.0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--engine", choices=("naive", "fast"), default="fast")
    p.add_argument("--zero-noise", action="store_true", help="force every Laplace draw to 0 (testing)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timings", action="store_true", help="include wall times (makes output non-reproducible)")
    p.add_argument("--assert-bounds", action="store_true", help="exit 3 if too few trials meet their bound")
    p.add_argument("--bound-fraction", type=float, default=0.96)

    a = sub.add_parser("audit", help="empirical privacy audit of dp-kcore-additive on an edge-neighboring pair")
    a.add_argument("--graph", required=True)
    a.add_argument("--neighbor", required=True, help="edge-list file differing from --graph in one edge")
    a.add_argument("--epsilon", type=float, default=1.0)
    a.add_argument("--event", choices=("quantized-label", "label", "survivor-bit", "constant"), default="quantized-label")
    a.add_argument("--vertex", type=int, default=0)
    a.add_argument("--trials", type=int, default=100_000)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--start", type=float)
    a.add_argument("--step", type=float)
    a.add_argument("--out")

    e = sub.add_parser("equivalence", help="compare naive and fast peel engines")
    _add_graph_args(e)
    e.add_argument("--epsilon", type=float, default=1.0)
    e.add_argument("--threshold", type=float)
    e.add_argument("--trials", type=int, default=10_000)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--zero-noise", action="store_true")
    e.add_argument("--out")

    t = sub.add_parser("transcript", help="run the local protocol once and export its transcript as JSON lines")
    _add_graph_args(t)
    t.add_argument("--epsilon", type=float, default=1.0)
    t.add_argument("--eta", type=float, default=0.5)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--zero-noise", action="store_true")
    t.add_argument("--out")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    if args.graph:
        return read_edge_list(args.graph, relabel=getattr(args, "relabel", False))[0]
    return parse_generator_spec(args.gen, seed=getattr(args, "seed", 0))


def _cmd_run(args) -> int:
    spec = ExperimentSpec(
        algorithm=args.algorithm,
        graph_path=args.graph,
        gen=args.gen,
        epsilon=args.epsilon,
        eta=args.eta,
        step_const=args.step_const,
        c_prime=args.cprime,
        trials=args.trials,
        seed=args.seed,
        engine=args.engine,
        zero_noise=args.zero_noise,
        start=args.start,
        step=args.step,
        relabel=args.relabel,
        workers=args.workers,
    )
    report = run(spec)
    text = to_json(report, args.timings) if args.format == "json" else to_csv(report, args.timings)
    _emit(text, args.out)
    agg = report.aggregate()
    log.info("%d/%d trials within bound", agg["within_bound"], agg["trials"])
    if args.assert_bounds and agg["pass_fraction"] < args.bound_fraction:
        print(
            f"bound check failed: {agg['within_bound']}/{agg['trials']} trials within bound "
            f"(need fraction >= {args.bound_fraction})",
            file=sys.stderr,
        )
        return EXIT_BOUNDS
    return EXIT_OK


def _cmd_audit(args) -> int:
    g, _ = read_edge_list(args.graph)
    h, _ = read_edge_list(args.neighbor)
    if g.n != h.n:
        raise SpecError({"neighbor": "graphs must have the same vertex count"})
    schedule = None
    if args.start is not None or args.step is not None:
        if args.start is None or args.step is None:
            raise SpecError({"schedule": "start and step must be given together"})
        schedule = Schedule.additive(args.start, args.step)
    event = make_event(args.event, g.n, args.epsilon, args.vertex)
    report = privacy_audit((g, h), dp_kcore_mechanism(args.epsilon, schedule), args.epsilon, event, args.trials, args.seed)
    _emit(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_equivalence(args) -> int:
    g = _load(args)
    report = equivalence_test(g, args.epsilon, args.trials, args.threshold, seed=args.seed, zero_noise=args.zero_noise)
    _emit(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_transcript(args) -> int:
    g = _load(args)
    res = ledp_core_numbers(g, LedpConfig(args.epsilon, args.eta), NoiseOracle(args.seed, zero_noise=args.zero_noise))
    _emit(res.transcript.to_jsonl(), args.out)
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "audit": _cmd_audit, "equivalence": _cmd_equivalence, "transcript": _cmd_transcript}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # Usage errors exit 1 and --help exits 0; return the code either way.
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (SpecError, GraphInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: cannot access {getattr(exc, 'filename', None) or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
