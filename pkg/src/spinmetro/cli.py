"""Command-line interface: scan, metrics, scaling and fim-rank drivers.

Exit codes: 0 on success, 2 on usage/configuration errors, 1 on numerical
consistency failures.
"""

from __future__ import annotations

import argparse
import sys

from .analysis import (
    RankExperimentConfig,
    ScanConfig,
    fim_rank_experiment,
    metrics_report,
    run_scan,
    scaling_table,
    write_json,
)
from .encoding import ModelKind, ModelPoint
from .errors import InvalidInput, NumericalFailure
from .models import ProbeSpec

__all__ = ["build_parser", "main"]


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        theta_count, b_count = text.lower().split("x")
        return int(theta_count), int(b_count)
    except ValueError as exc:
        raise InvalidInput(f"--grid expects THETAxB counts like 101x101, got {text!r}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InvalidInput(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_dims(text: str) -> tuple[int, ...]:
    try:
        if "-" in text:
            lo, hi = text.split("-")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise InvalidInput(f"--dims expects N,N,... or LO-HI, got {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=["two", "three"], default="two",
                        help="estimation model: two=(B,theta), three=(B,theta,phi)")
    parser.add_argument("--dim", type=int, default=2, help="probe Hilbert-space dimension")
    parser.add_argument("--alpha", type=float, default=0.7853981633974483,
                        help="probe mixing angle (default pi/4)")
    parser.add_argument("--phi", type=float, default=0.0, help="probe relative phase")
    parser.add_argument("--time", type=float, default=5.0, help="evolution time")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed where applicable")
    parser.add_argument("--out", required=True, help="output file path")
    parser.add_argument("--grid", default="101x101",
                        help="grid counts THETAxB (used by scan)")
    parser.add_argument("--tol", type=float, default=1e-10,
                        help="relative eigenvalue threshold for singular QFIMs")


def _point_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--b", type=float, default=0.6, help="field strength B")
    parser.add_argument("--theta", type=float, default=0.8, help="field angle theta")
    parser.add_argument("--model-phi", type=float, default=1.0,
                        help="field azimuth phi (three-parameter model only)")


def _model_point(args) -> ModelPoint:
    phi = args.model_phi if args.model == "three" else None
    return ModelPoint(b=args.b, theta=args.theta, t=args.time, phi=phi)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinmetro",
        description="Precision bounds and measurement incompatibility for "
        "su(2) unitary estimation models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="T(theta,B) grid scan to CSV")
    _add_common(scan)
    scan.add_argument("--model-phi", type=float, default=0.0,
                      help="fixed field azimuth for the three-parameter model")

    metrics = sub.add_parser("metrics", help="single-point JSON report")
    _add_common(metrics)
    _point_args(metrics)

    scaling = sub.add_parser("scaling", help="Gamma scaling table to CSV")
    _add_common(scaling)
    _point_args(scaling)
    scaling.add_argument("--alphas", default="0.7853981633974483",
                         help="comma-separated probe angles")
    scaling.add_argument("--dims", default="4-12", help="dimensions, N,N,... or LO-HI")

    rank = sub.add_parser("fim-rank", help="FIM rank Monte-Carlo report to JSON")
    _add_common(rank)
    rank.add_argument("--params", type=int, default=2, help="number of parameters d")
    rank.add_argument("--outcomes", type=int, default=3, help="number of outcomes n")
    rank.add_argument("--trials", type=int, default=1000, help="number of trials")
    return parser


def _cmd_scan(args) -> None:
    theta_count, b_count = _parse_grid(args.grid)
    config = ScanConfig(
        kind=ModelKind(args.model),
        dim=args.dim,
        probe=ProbeSpec(dim=args.dim, alpha=args.alpha, phi=args.phi),
        t=args.time,
        model_phi=args.model_phi,
        theta_count=theta_count,
        b_count=b_count,
        rel_tol=args.tol,
        seed=args.seed,
    )
    run_scan(config).write_csv(args.out)


def _cmd_metrics(args) -> None:
    doc = metrics_report(
        kind=ModelKind(args.model),
        dim=args.dim,
        spec=ProbeSpec(dim=args.dim, alpha=args.alpha, phi=args.phi),
        point=_model_point(args),
        rel_tol=args.tol,
    )
    write_json(args.out, doc)


def _cmd_scaling(args) -> None:
    table = scaling_table(
        kind=ModelKind(args.model),
        alphas=_parse_floats(args.alphas),
        dims=_parse_dims(args.dims),
        point=_model_point(args),
        probe_phi=args.phi,
        rel_tol=args.tol,
    )
    table.write_csv(args.out)


def _cmd_fim_rank(args) -> None:
    config = RankExperimentConfig(
        n_params=args.params,
        n_outcomes=args.outcomes,
        trials=args.trials,
        seed=args.seed,
    )
    write_json(args.out, fim_rank_experiment(config))


_COMMANDS = {
    "scan": _cmd_scan,
    "metrics": _cmd_metrics,
    "scaling": _cmd_scaling,
    "fim-rank": _cmd_fim_rank,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except InvalidInput as exc:
        print(f"spinmetro: {exc}", file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(f"spinmetro: numerical consistency failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"spinmetro: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
