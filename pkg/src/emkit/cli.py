"""Command-line front end: ``emkit {abo,ibd,motif,deconv,histogram}``.

Reports are JSON. Exit codes: 0 success, 2 parse or usage error, 3 model or
data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .abo import UNIFORM_START, AboModel, AlleleFrequencies, absorbed_alleles
from .core import EmConfig, run_em
from .deconv import (
    BatteryMeasurement,
    DeconvModel,
    fitted_means,
    initial_distribution,
    normalize_distribution,
)
from .errors import EmError, MendelianViolation, NumericalFailure, ParseError
from .ibd import NULL_IBD, IbdModel, ibd_kernel, is_uninformative
from .motif import ALPHABET, MotifDataset, consensus, discover_motif
from . import readers

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_MODEL = 3
EXIT_NUMERIC = 4


class UsageError(EmError):
    code = "usage_error"


def _floats(values):
    return [float(v) for v in np.asarray(values, dtype=float).ravel()]


def _trace_fields(result):
    trace = result.trace
    return {
        "iterations": result.n_iterations,
        "converged": trace.converged,
        "stop_reason": trace.stop_reason.value,
        "loglik_trace": trace.logliks,
    }


def _envelope(model, config, seed, input_digest):
    return {
        "model": model,
        "tool_version": __version__,
        "seed": seed,
        "config": {
            "max_iterations": config.max_iterations,
            "rel_tol": config.rel_tol,
            "abs_tol": config.abs_tol,
            "monotonicity_slack": config.monotonicity_slack,
        },
        "input_digest": input_digest,
    }


def run_abo(args, config):
    counts = readers.read_abo_counts(args.counts)
    init = UNIFORM_START
    if args.init:
        init = AlleleFrequencies(*_parse_triple(args.init, "--init"))
    result = run_em(AboModel(), counts, init, config)
    p = result.final_params
    report = _envelope("abo", config, args.seed, readers.digest(args.counts))
    report.update(
        {
            "p_A": p.p_A,
            "p_B": p.p_B,
            "p_O": p.p_O,
            "n": counts.n,
            "absorbed_alleles": absorbed_alleles(p, counts),
        }
    )
    report.update(_trace_fields(result))
    return report


def run_ibd(args, config):
    observations, lines = readers.read_sib_pairs(args.pairs)
    kernels = []
    for obs, line in zip(observations, lines):
        try:
            kernels.append(ibd_kernel(obs))
        except MendelianViolation as exc:
            raise MendelianViolation(f"{args.pairs}: row at line {line}: {exc}") from exc
    kernels = np.array(kernels)
    init = np.asarray(_parse_triple(args.init, "--init")) if args.init else NULL_IBD.copy()
    result = run_em(IbdModel(), kernels, init, config)
    pi = result.final_params
    report = _envelope("ibd", config, args.seed, readers.digest(args.pairs))
    report.update(
        {
            "pi_0": float(pi[0]),
            "pi_1": float(pi[1]),
            "pi_2": float(pi[2]),
            "n_pairs": len(observations),
            "n_uninformative": int(sum(is_uninformative(k) for k in kernels)),
        }
    )
    report.update(_trace_fields(result))
    return report


def run_motif(args, config):
    data = MotifDataset(readers.read_sequences(args.sequences), args.width)
    fit = discover_motif(data, args.pseudocount, args.restarts, args.seed, config)
    report = _envelope("motif", config, args.seed, readers.digest(args.sequences))
    report.update(
        {
            "width": data.width,
            "pseudocount": args.pseudocount,
            "consensus": consensus(fit.model),
            "alphabet": ALPHABET,
            "theta": [_floats(row) for row in fit.model.theta],
            "theta_bg": _floats(fit.model.theta_bg),
            # starts are 1-based
            "per_sequence": [{"best_start": k + 1, "posterior": z} for k, z in fit.best_starts()],
            "loglik": fit.loglik,
            "best_restart": fit.best_restart,
            "restarts_summary": [
                {
                    "restart": o.index,
                    "loglik": o.loglik,
                    "iterations": o.iterations,
                    "converged": o.converged,
                    "consensus": o.consensus,
                }
                for o in fit.restarts
            ],
        }
    )
    report.update(_trace_fields(fit.result))
    return report


def run_deconv(args, config):
    kernel = readers.read_kernel(args.kernel)
    P0, counts = readers.read_port_counts(args.counts)
    meas = BatteryMeasurement(P0, counts, kernel)
    result = run_em(DeconvModel(), meas, initial_distribution(meas), config)
    f = result.final_params
    try:
        f_norm, total = normalize_distribution(f)
        degenerate = False
    except EmError:
        f_norm, total, degenerate = np.zeros_like(f), 0.0, True
    report = _envelope("deconv", config, args.seed, readers.digest(args.kernel, args.counts))
    report.update(
        {
            "P_0": P0,
            "f_raw": _floats(f),
            "f_normalized": _floats(f_norm),
            "total_mass": float(total),
            "degenerate": degenerate,
            "fitted_mu": _floats(fitted_means(f, meas)),
        }
    )
    report.update(_trace_fields(result))
    return report


def emit_histogram_csv(report) -> str:
    """Plot-friendly CSV: size distribution for deconv, 4 x W theta table for motif."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    model = report.get("model")
    if model == "deconv":
        values = report["f_normalized"]
        writer.writerow(["label", "value"])
        for j, v in enumerate(values, start=1):
            writer.writerow([f"size_{j}", repr(float(v))])
        if report.get("degenerate") or not any(values):
            buf.write("# degenerate=true\n")
    elif model == "motif":
        theta = report["theta"]
        writer.writerow(["letter"] + [str(p) for p in range(1, len(theta[0]) + 1)])
        for letter, row in zip(report.get("alphabet", ALPHABET), theta):
            writer.writerow([letter] + [repr(float(v)) for v in row])
    else:
        raise UsageError(f"histogram output is only available for deconv and motif reports, not {model!r}")
    return buf.getvalue()


def _parse_triple(text, flag):
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError:
        raise ParseError(f"{flag} expects three comma-separated numbers, got {text!r}") from None
    if len(values) != 3:
        raise ParseError(f"{flag} expects three comma-separated numbers, got {text!r}")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="emkit", description="EM estimators for incomplete multinomial data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8, help="relative log-likelihood tolerance")
    common.add_argument("--abs-tol", type=float, default=1e-10)
    common.add_argument("--max-iters", type=int, default=10000)
    common.add_argument("--output", "-o", default="-", help="report path, '-' for stdout")
    common.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("abo", parents=[common], help="ABO allele frequencies from blood type counts")
    p.add_argument("--counts", required=True, help="CSV with header t_A,t_B,t_AB,t_O")
    p.add_argument("--init", help="starting p_A,p_B,p_O (default 1/3 each)")
    p.set_defaults(func=run_abo)

    p = sub.add_parser("ibd", parents=[common], help="IBD sharing for affected sib pairs")
    p.add_argument("--pairs", required=True, help="CSV of parental and sib genotypes")
    p.add_argument("--init", help="starting pi_0,pi_1,pi_2 (default 0.25,0.5,0.25)")
    p.set_defaults(func=run_ibd)

    p = sub.add_parser("motif", parents=[common], help="one-occurrence-per-sequence motif discovery")
    p.add_argument("--sequences", required=True, help="one sequence per line, or FASTA")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--pseudocount", type=float, default=0.1)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--histogram", help="also write the theta table as CSV here")
    p.set_defaults(func=run_motif)

    p = sub.add_parser("deconv", parents=[common], help="size distribution from diffusion battery counts")
    p.add_argument("--kernel", required=True, help="CSV, ports x size classes")
    p.add_argument("--counts", required=True, help="P_0 followed by P_1..P_m")
    p.add_argument("--histogram", help="also write the size distribution as CSV here")
    p.set_defaults(func=run_deconv)

    p = sub.add_parser("histogram", help="CSV view of an existing motif or deconv report")
    p.add_argument("report", help="JSON report produced by the motif or deconv subcommand")
    p.add_argument("--output", "-o", default="-")
    p.set_defaults(func=None)
    return parser


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "histogram":
            try:
                report = json.loads(readers.read_text(args.report))
            except json.JSONDecodeError as exc:
                raise ParseError(exc.msg, args.report, exc.lineno, exc.colno) from None
            _write(args.output, emit_histogram_csv(report))
            return EXIT_OK
        try:
            config = EmConfig(max_iterations=args.max_iters, rel_tol=args.tol, abs_tol=args.abs_tol)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = args.func(args, config)
        report["created_at"] = datetime.now(timezone.utc).isoformat()
        text = json.dumps(report, indent=2) + "\n"
        histogram = emit_histogram_csv(report) if getattr(args, "histogram", None) else None
        _write(args.output, text)
        if histogram is not None:
            _write(args.histogram, histogram)
    except (ParseError, UsageError) as exc:
        print(f"emkit: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalFailure as exc:
        print(f"emkit: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except EmError as exc:
        print(f"emkit: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
