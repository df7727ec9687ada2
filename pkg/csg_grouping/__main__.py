import argparse
import json
import sys

from csg_grouping._debug import set_debug_mode
from csg_grouping._experiment import (
    ManifestError,
    load_manifest,
    run_decomposition_suite,
    run_optimization_suite
)
from csg_grouping.benchmarks import build_bms, fig1_example
from csg_grouping.decomposers import csg_decompose, detection_fe_model


def _add_suite_arguments(parser):
    parser.add_argument("--manifest", required=True, help="Path to a JSON experiment manifest.")
    parser.add_argument("--out", default=None, help="Output directory; overrides the manifest.")
    parser.add_argument("--seed", type=int, default=None, help="Base seed; overrides the manifest.")
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="Independent cells to run in parallel."
    )


def build_parser():

    parser = argparse.ArgumentParser(
        prog="csg-grouping",
        description="Variable grouping and cooperative co-evolution experiments."
    )
    parser.add_argument("--debug", action="store_true", help="Log progress and timings.")

    sub = parser.add_subparsers(dest="command", required=True)

    _add_suite_arguments(sub.add_parser("decompose", help="Run the decomposition suite."))
    _add_suite_arguments(sub.add_parser("optimize", help="Run the optimization suite."))

    info = sub.add_parser("bench-info", help="Describe a benchmark instance.")
    info.add_argument("--function-id", type=int, required=True)
    info.add_argument("--dimension", type=int, required=True)
    info.add_argument("--seed", type=int, default=None)

    sub.add_parser("fig1-demo", help="Decompose the seven-variable example and print the trace.")

    return parser


def _print_json(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _run_suite(args, runner):
    manifest = load_manifest(args.manifest)

    if args.seed is not None:
        manifest.seed = args.seed

    output = runner(manifest, output_dir=args.out, threads=args.threads)

    for path in output.files:
        print(path)

    if output.failures:
        print(f"{len(output.failures)} cell(s) failed; see the failures file", file=sys.stderr)

    return 0


def _bench_info(args):
    instance = build_bms(args.function_id, args.dimension, args.seed)
    truth = instance.ground_truth

    descriptor = instance.to_dict()
    descriptor["detection_fe_model"] = detection_fe_model(
        instance.dimension,
        len(truth.s1),
        len(truth.s2)
    )

    _print_json(descriptor)
    return 0


def _fig1_demo():
    problem, truth = fig1_example()
    trace = []
    grouping, ledger = csg_decompose(problem, trace=trace)

    for record in trace:
        print(json.dumps(record, sort_keys=True))

    _print_json({
        "grouping": grouping.to_dict(ledger),
        "matches_truth": grouping == truth
    })
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)

    if args.debug:
        set_debug_mode(True)

    try:
        if args.command == "decompose":
            return _run_suite(args, run_decomposition_suite)
        elif args.command == "optimize":
            return _run_suite(args, run_optimization_suite)
        elif args.command == "bench-info":
            return _bench_info(args)
        else:
            return _fig1_demo()
    except (ManifestError, ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
