"""Command-line surface: state construction, Fisher reports, QSNR sweeps,
and Cramer-Rao benchmarks, emitting JSON or CSV.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 numerical
divergence/instability.  Output files are written atomically (temp file +
rename); stdout is used when --out is omitted.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from typing import Any, Dict, List, Optional, Sequence

from . import serialize
from .algebra import DeformationKind, DeformationParams
from .errors import (
    BenchmarkError,
    DerivativeInstabilityError,
    DivergenceError,
    DomainError,
)
from .estimation import (
    DerivativeConfig,
    calibrate_intensity,
    estimation_report,
    family_class_of,
    leading_order_qsnr,
)
from .montecarlo import crb_benchmark
from .states import (
    CatSpec,
    CoherentSpec,
    ProbeSpec,
    ThermalSpec,
    build_distribution,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract wants 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _write_output(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".qdeform-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
            if not text.endswith("\n"):
                handle.write("\n")
        os.replace(tmp_path, out)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _json_text(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, allow_nan=False)


def _csv_text(write_fn, *args) -> str:
    import io

    buf = io.StringIO()
    write_fn(*args, buf)
    return buf.getvalue()


def _add_common(parser: argparse.ArgumentParser, epsilon: bool = True) -> None:
    parser.add_argument("--kind", required=True, choices=["M", "P"],
                        help="deformation kind")
    if epsilon:
        parser.add_argument("--epsilon", required=True, type=float,
                            help="deformation strength (must be > -1); use "
                                 "--epsilon=-1e-3 for negative values")
    parser.add_argument("--tol", type=float, default=1e-12,
                        help="certified tail tolerance, in (0, 1e-6]")
    parser.add_argument("--format", choices=["json", "csv"], default="json")
    parser.add_argument("--out", default=None, help="output path (default stdout)")


def _add_family_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--family", required=True,
                        choices=["coherent", "thermal", "cat"])
    parser.add_argument("--alpha-sq", type=float, default=None,
                        help="|alpha|^2 for coherent/cat probes")
    parser.add_argument("--beta", type=float, default=None,
                        help="inverse temperature for thermal probes")
    parser.add_argument("--n-mean", type=float, default=None,
                        help="thermal mean photon number (alternative to --beta)")


def _spec_from_args(parser: _Parser, args: argparse.Namespace) -> ProbeSpec:
    if args.family in ("coherent", "cat"):
        if args.alpha_sq is None:
            parser.error(f"--alpha-sq is required for family {args.family}")
        cls = CoherentSpec if args.family == "coherent" else CatSpec
        return cls(alpha_sq=args.alpha_sq)
    if args.beta is not None and args.n_mean is not None:
        parser.error("give either --beta or --n-mean, not both")
    if args.beta is not None:
        return ThermalSpec(beta=args.beta)
    if args.n_mean is not None:
        return ThermalSpec.from_mean_photon(args.n_mean)
    parser.error("thermal probes need --beta or --n-mean")
    raise AssertionError  # unreachable


def _parse_floats(parser: _Parser, text: str, flag: str) -> List[float]:
    items = [part for part in text.split(",") if part.strip()]
    if not items:
        parser.error(f"{flag} must be a nonempty comma-separated list")
    try:
        return [float(part) for part in items]
    except ValueError:
        parser.error(f"could not parse {flag} value {text!r}")
    raise AssertionError  # unreachable


def build_parser() -> _Parser:
    parser = _Parser(prog="qdeform",
                     description="Photon statistics and deformation-estimation "
                                 "bounds for q-deformed optical states.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_state = sub.add_parser("state", help="emit a photon-number distribution")
    state_sub = p_state.add_subparsers(dest="family", required=True)
    for family in ("coherent", "thermal", "cat"):
        sp = state_sub.add_parser(family)
        if family == "thermal":
            sp.add_argument("--beta", type=float, default=None)
            sp.add_argument("--n-mean", type=float, default=None)
        else:
            sp.add_argument("--alpha-sq", type=float, required=True)
        _add_common(sp)

    p_fisher = sub.add_parser("fisher", help="Fisher/QFI/QSNR report at one point")
    _add_family_flags(p_fisher)
    _add_common(p_fisher)
    p_fisher.add_argument("--hold", choices=["mean-photon", "intensity"],
                          default="mean-photon",
                          help="family parametrization for the derivative")

    p_qsnr = sub.add_parser("qsnr", help="QSNR sweep against the leading-order table")
    p_qsnr.add_argument("--family", required=True,
                        choices=["coherent", "thermal", "cat"])
    p_qsnr.add_argument("--epsilons", default=None,
                        help="comma-separated epsilon values")
    p_qsnr.add_argument("--eps-range", default=None, metavar="LO:HI:COUNT",
                        help="log-spaced epsilon range (alternative to --epsilons)")
    p_qsnr.add_argument("--n-values", required=True,
                        help="comma-separated target mean photon numbers")
    p_qsnr.add_argument("--raw-intensity", action="store_true",
                        help="treat --n-values as raw |alpha|^2 / n_T instead of "
                             "calibrating the deformed mean")
    _add_common(p_qsnr, epsilon=False)

    p_bench = sub.add_parser("benchmark", help="Monte Carlo Cramer-Rao benchmark")
    _add_family_flags(p_bench)
    _add_common(p_bench)
    p_bench.add_argument("--shots", required=True, type=int)
    p_bench.add_argument("--reps", required=True, type=int)
    p_bench.add_argument("--seed", required=True, type=int)
    return parser


def _cmd_state(parser: _Parser, args: argparse.Namespace) -> int:
    if args.family == "thermal":
        if (args.beta is None) == (args.n_mean is None):
            parser.error("thermal probes need exactly one of --beta / --n-mean")
        spec: ProbeSpec = (ThermalSpec(beta=args.beta) if args.beta is not None
                           else ThermalSpec.from_mean_photon(args.n_mean))
    elif args.family == "coherent":
        spec = CoherentSpec(alpha_sq=args.alpha_sq)
    else:
        spec = CatSpec(alpha_sq=args.alpha_sq)
    params = DeformationParams(DeformationKind(args.kind), args.epsilon)
    dist = build_distribution(spec, params, args.tol)
    if args.format == "json":
        text = _json_text(serialize.distribution_to_dict(dist))
    else:
        text = _csv_text(serialize.write_distribution_csv, dist)
    _write_output(text, args.out)
    return EXIT_OK


def _cmd_fisher(parser: _Parser, args: argparse.Namespace) -> int:
    spec = _spec_from_args(parser, args)
    kind = DeformationKind(args.kind)
    hold = args.hold.replace("-", "_")
    report = estimation_report(spec, kind, args.epsilon,
                               DerivativeConfig(), args.tol, hold)
    if args.format == "json":
        text = _json_text(serialize.report_to_dict(report))
    else:
        text = _csv_text(serialize.write_report_csv, report)
    _write_output(text, args.out)
    return EXIT_OK


def _base_spec(family: str, n_value: float) -> ProbeSpec:
    if family == "coherent":
        return CoherentSpec(alpha_sq=n_value)
    if family == "cat":
        return CatSpec(alpha_sq=n_value)
    return ThermalSpec.from_mean_photon(n_value)


def _parse_eps_grid(parser: _Parser, args: argparse.Namespace) -> List[float]:
    if (args.epsilons is None) == (args.eps_range is None):
        parser.error("give exactly one of --epsilons / --eps-range")
    if args.epsilons is not None:
        return _parse_floats(parser, args.epsilons, "--epsilons")
    parts = args.eps_range.split(":")
    if len(parts) != 3:
        parser.error("--eps-range must be LO:HI:COUNT")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        parser.error(f"could not parse --eps-range {args.eps_range!r}")
        raise AssertionError  # unreachable
    if count < 1 or lo <= 0 or hi <= 0 or hi < lo:
        parser.error("--eps-range needs 0 < LO <= HI and COUNT >= 1")
    if count == 1:
        return [lo]
    step = (math.log(hi) - math.log(lo)) / (count - 1)
    return [math.exp(math.log(lo) + k * step) for k in range(count)]


def _cmd_qsnr(parser: _Parser, args: argparse.Namespace) -> int:
    epsilons = _parse_eps_grid(parser, args)
    n_values = _parse_floats(parser, args.n_values, "--n-values")
    kind = DeformationKind(args.kind)
    rows: List[Dict[str, Any]] = []
    for eps in epsilons:
        params = DeformationParams(kind, eps)
        for n_value in n_values:
            spec = _base_spec(args.family, n_value)
            if not args.raw_intensity:
                spec = calibrate_intensity(spec, params, n_value, args.tol)
            report = estimation_report(spec, kind, eps, None, args.tol,
                                       hold="mean_photon")
            leading = leading_order_qsnr(family_class_of(spec), kind, eps, n_value)
            rows.append({
                "epsilon": eps,
                "n_target": n_value,
                "mean_photon": report.mean_photon,
                "fisher": report.fisher,
                "qfi": report.qfi,
                "qsnr": report.qsnr,
                "qsnr_leading": leading,
                "ratio": report.qsnr / leading if leading > 0 else math.nan,
                "valid_regime": abs(eps) * n_value <= 1.0,
            })
    if args.format == "json":
        text = _json_text({
            "type": "qsnr_sweep",
            "family": args.family,
            "kind": kind.value,
            "calibrated": not args.raw_intensity,
            "rows": rows,
        })
    else:
        text = _csv_text(serialize.write_sweep_csv, rows)
    _write_output(text, args.out)
    return EXIT_OK


def _cmd_benchmark(parser: _Parser, args: argparse.Namespace) -> int:
    if args.shots <= 0:
        parser.error("--shots must be a positive integer")
    if args.reps <= 0:
        parser.error("--reps must be a positive integer")
    spec = _spec_from_args(parser, args)
    kind = DeformationKind(args.kind)
    bench = crb_benchmark(spec, kind, args.epsilon, args.shots, args.reps,
                          args.seed, args.tol)
    if args.format == "json":
        text = _json_text(serialize.benchmark_to_dict(bench, spec, kind))
    else:
        text = _csv_text(serialize.write_benchmark_csv, bench)
    _write_output(text, args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "state":
            return _cmd_state(parser, args)
        if args.command == "fisher":
            return _cmd_fisher(parser, args)
        if args.command == "qsnr":
            return _cmd_qsnr(parser, args)
        if args.command == "benchmark":
            return _cmd_benchmark(parser, args)
        parser.error(f"unknown command {args.command!r}")
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    except DomainError as exc:
        sys.stderr.write(f"qdeform: domain error: {exc}\n")
        return EXIT_DOMAIN
    except (DivergenceError, DerivativeInstabilityError, BenchmarkError) as exc:
        sys.stderr.write(f"qdeform: numerical error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
