"""Command-line interface.

    slhrobust analyze <file> [--tol T] [--eta E] [--json OUT] [--plot PNG] [--verbose]
    slhrobust sweep <file> --wmax W --points N --out CSV [--plot PNG]
    slhrobust decompose <file> --sample K

Exit status: 0 when the analysis ran (whatever the verdicts), 2 for unusable
input, 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import InfeasibleError, NumericalError, SlhError
from .netdesc import ParseError
from .report import AnalysisOptions, run_analyze, run_decompose, run_sweep
from .robust import sigma_min_curve

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonneg_float(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slhrobust",
        description="Robust mean-square stability of uncertain linear quantum networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full robustness analysis and print a JSON report")
    p.add_argument("file")
    p.add_argument("--tol", type=_positive_float, help="relative tolerance of the margin computation")
    p.add_argument("--eta", type=_nonneg_float, help="declared perturbation bound")
    p.add_argument("--json", dest="json_out", metavar="OUT", help="also write the report to OUT")
    p.add_argument("--plot", metavar="PNG", help="render the nominal frequency sweep to PNG")
    p.add_argument("--verbose", action="store_true", help="human-readable summary on stderr")

    p = sub.add_parser("sweep", help="write sigma_min(iwI - A_n) over a frequency grid as CSV")
    p.add_argument("file")
    p.add_argument("--wmax", type=_nonneg_float, required=True)
    p.add_argument("--points", type=_positive_int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", metavar="PNG")

    p = sub.add_parser("decompose", help="print the nominal/perturbation split of one sample")
    p.add_argument("file")
    p.add_argument("--sample", type=int, required=True)
    return parser


def _summary(report) -> str:
    lines = [
        f"model            {report.model_name}",
        f"nominal stable   {report.nominal_stable} (spectral abscissa {report.spectral_abscissa:.6g})",
        f"margin           {report.margin:.10g}",
        f"eta              {report.eta:.10g} (worst sample {report.worst_sample_index})",
        f"small-gain       {'robustly stable' if report.theorem2_verdict else 'not certified'}",
    ]
    if report.zeta is not None:
        lines.append(f"zeta             {report.zeta:.10g} (bound {report.lyapunov_bound:.10g})")
    lines.append(f"lyapunov         {'robustly stable' if report.theorem3_verdict else 'not certified'}")
    lines.extend(f"warning: {w}" for w in report.warnings)
    return "\n".join(lines)


def _analyze(args) -> int:
    report = run_analyze(args.file, AnalysisOptions(tol=args.tol, eta=args.eta,
                                                    verbose=args.verbose))
    text = json.dumps(report.to_dict(), indent=2)
    if args.plot:
        from .plotting import plot_sweep
        from .netdesc import instantiate, load
        from .realization import to_state_space
        a_n = to_state_space(instantiate(load(args.file)).nominal).a_mat
        wmax = 10.0 * max(np.linalg.norm(a_n, 2), report.margin)
        omegas = np.linspace(0.0, wmax, 512)
        plot_sweep(omegas, sigma_min_curve(a_n, omegas), args.plot,
                   margin=report.margin, eta=report.eta, title=report.model_name)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    if args.verbose:
        print(_summary(report), file=sys.stderr)
    return EXIT_OK


def _sweep(args) -> int:
    run_sweep(args.file, args.wmax, args.points, args.out, plot=args.plot)
    return EXIT_OK


def _decompose(args) -> int:
    print(json.dumps(run_decompose(args.file, args.sample), indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"analyze": _analyze, "sweep": _sweep, "decompose": _decompose}[args.command]
    try:
        return handler(args)
    except ParseError as exc:
        for diag in exc.diagnostics:
            print(f"{args.file}:{diag}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, InfeasibleError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SlhError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
