"""Command-line entry point: ``cvcoherence <verb> ...``."""

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

from cvcoherence import __version__
from cvcoherence.core import load_state, symplectic_eigenvalues
from cvcoherence.errors import CVError
from cvcoherence.homodyne import (
    DEFAULT_SAMPLES,
    export_samples,
    ingest_samples,
    parse_plan,
    reconstruct_covariance,
    sample_quadratures,
)
from cvcoherence.metrics import coherence, ppt_value
from cvcoherence.sweep import (
    THRESHOLD_METRICS,
    emit_report,
    find_threshold,
    load_config,
    report_csv,
    run_all_figures,
    run_sweep,
)


def _print_json(obj):
    print(json.dumps(obj, indent=2))


def cmd_coherence(args):
    state = load_state(args.state)
    report = coherence(state).to_dict()
    report["symplectic_eigenvalues"] = list(symplectic_eigenvalues(state))
    _print_json(report)


def cmd_ppt(args):
    _print_json(ppt_value(load_state(args.state)).to_dict())


def cmd_sweep(args):
    config, _ = load_config(args.config)
    result = run_sweep(config)
    if args.out:
        for p in emit_report(result, args.out):
            print(p)
    else:
        sys.stdout.write(report_csv(result))


def cmd_threshold(args):
    config, metric = load_config(args.config)
    metric = args.metric or metric
    if metric is None:
        metric = "squeezing_crosses_snl" if config.scenario.startswith("squeezed") else "ppt_crosses_one"
    delta = find_threshold(config.scenario, metric, config.fixed_loss, config.source_db)
    _print_json({"scenario": config.scenario, "metric": metric, "fixed_loss": config.fixed_loss, "delta": delta})


def cmd_simulate(args):
    state = load_state(args.state)
    plan = parse_plan(args.plan) if args.plan else None
    samples = sample_quadratures(state, args.n, args.seed, plan)
    for p in export_samples(samples, args.outdir, args.stem):
        print(p)


def cmd_reconstruct(args):
    samples = ingest_samples(*args.samples)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rec = reconstruct_covariance(samples, n_blocks=args.blocks)
    payload = rec.to_dict()
    payload["coherence"] = coherence(rec.state).to_dict()
    if samples.n_modes == 2:
        payload["ppt"] = ppt_value(rec.state).to_dict()
    payload["warnings"] = [str(w.message) for w in caught]
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
        print(args.out)
    else:
        _print_json(payload)


def cmd_figures(args):
    sampling = (args.n, args.seed) if args.sample else None
    start = time.perf_counter()
    written = run_all_figures(args.outdir, points=args.points, sampling=sampling)
    for p in written.values():
        print(p)
    print(f"done in {time.perf_counter() - start:.2f} s", file=sys.stderr)


def build_parser():
    parser = argparse.ArgumentParser(prog="cvcoherence", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("coherence", help="relative-entropy coherence of a state file")
    p.add_argument("state")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("ppt", help="PPT value of a two-mode state file")
    p.add_argument("state")
    p.set_defaults(func=cmd_ppt)

    p = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    p.add_argument("config")
    p.add_argument("--out", help="CSV output path (JSON metadata written alongside)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="find where squeezing or entanglement dies")
    p.add_argument("config")
    p.add_argument("--metric", choices=THRESHOLD_METRICS)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("simulate", help="sample homodyne records from a state file")
    p.add_argument("state")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plan", help='joint rows, e.g. "X1,X2;Y1,Y2" (default: all X, then all Y)')
    p.add_argument("--outdir", default=".")
    p.add_argument("--stem", default="samples")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct a covariance matrix from sample CSVs")
    p.add_argument("samples", nargs="+")
    p.add_argument("--blocks", type=int, default=100)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("figures", help="write all figure curves and surfaces")
    p.add_argument("--outdir", default="figures")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--sample", action="store_true", help="also run the homodyne round trip")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_figures)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CVError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
