import argparse
import logging
from typing import List

from app.config import DEFAULT_NMAX
from app.errors import SeriesDomainError, UnsupportedCurveError
from app.models.specs import CurveSpec
from app.services.closed_forms import cf_x2yv_predicted_homology, curve_rational
from app.services.partitions import (
    render_vertical,
    render_wdp,
    vertical_enumerate,
    vertical_records,
    wdp_enumerate,
    wdp_records,
    wdp_stats,
    wdp_contribution,
)
from app.services.profiling import phase
from app.services.series_core import QSeries, qs_to_payload, rf_to_series, total_degree_truncation

# Configure logging
logger = logging.getLogger(__name__)


def cmd_series(
    curve: CurveSpec, nmax: int, truncation: str = "q_degree", predicted_homology: bool = False
) -> str:
    """
    Generating function of the curve as a JSON series.

    - **q_degree**: every coefficient up to Q^nmax
    - **total_degree**: only terms Q^q T^t with q + t <= nmax

    With ``predicted_homology`` (u = 2 only) the series is the predicted
    (Sym^2, Sym^v)-coloured homology of the Hopf link, which nothing verifies.
    """
    if nmax < 0:
        raise SeriesDomainError(f"--nmax must be >= 0, got {nmax}")
    if predicted_homology and curve.u != 2:
        raise UnsupportedCurveError(f"--predicted-homology needs --u 2, got --u {curve.u}")
    logger.info(f"Series for x^{curve.u} y^{curve.v} ({curve.family}) to degree {nmax}, {truncation}")
    if predicted_homology:
        logger.info(f"Reading the series as predicted (Sym^2, Sym^{curve.v}) homology of T(2,2)")
        rational = cf_x2yv_predicted_homology(curve.v)
    else:
        rational = curve_rational(curve.u, curve.v)
    series = rf_to_series(rational, nmax)
    if truncation == "total_degree":
        series = QSeries.from_poly(total_degree_truncation(series, nmax), nmax)
    with phase("serialization"):
        return qs_to_payload(series).model_dump_json()


def cmd_enumerate(curve: CurveSpec, n: int, output_format: str = "json", plane: bool = False) -> List[str]:
    """
    One stratum per entry: a JSON line, or an ASCII block with a header.
    Vertical strata for u in {1, 2}; weak diagonal partitions for u = v >= 3
    and for the plane.
    """
    if n < 0:
        raise SeriesDomainError(f"--n must be >= 0, got {n}")
    if plane or (curve is not None and curve.u == curve.v and curve.u >= 3):
        max_rows = max(n, 1) if plane else curve.v
        if output_format == "json":
            return [record.model_dump_json() for record in wdp_records(n, max_rows)]
        blocks = []
        for p in wdp_enumerate(n, max_rows):
            stats = wdp_stats(p)
            header = f"n={stats.n} m1={stats.m1} m2={stats.m2} contribution={wdp_contribution(stats)}"
            blocks.append(header + "\n" + render_wdp(p))
        return blocks
    if curve is not None and curve.u in (1, 2):
        if output_format == "json":
            return [record.model_dump_json() for record in vertical_records(n, curve.u, curve.v)]
        return [render_vertical(stratum, dim) for stratum, dim in vertical_enumerate(n, curve.u, curve.v)]
    raise UnsupportedCurveError(
        "Strata are enumerated for u in {1, 2} (vertical), u = v >= 3 or --plane (diagonal)"
    )


def series(args: argparse.Namespace) -> int:
    curve = CurveSpec(u=args.u, v=args.v)
    print(cmd_series(curve, args.nmax, args.truncation, args.predicted_homology))
    return 0


def enumerate_strata(args: argparse.Namespace) -> int:
    curve = None if args.plane else CurveSpec(u=args.u, v=args.v)
    entries = cmd_enumerate(curve, args.n, args.format, plane=args.plane)
    separator = "\n" if args.format == "json" else "\n\n"
    if entries:
        print(separator.join(entries))
    logger.info(f"Listed {len(entries)} strata")
    return 0


def register(subparsers, parents) -> None:
    """
    Add the `series` and `enumerate` commands.
    """
    series_parser = subparsers.add_parser(
        "series", parents=parents, help="Q-series of the punctual Hilbert schemes of x^u y^v"
    )
    series_parser.add_argument("--u", type=int, required=True, help="Exponent of x")
    series_parser.add_argument("--v", type=int, required=True, help="Exponent of y")
    series_parser.add_argument("--nmax", type=int, default=DEFAULT_NMAX, help="Truncation degree")
    series_parser.add_argument(
        "--truncation", choices=("q_degree", "total_degree"), default="q_degree"
    )
    series_parser.add_argument(
        "--predicted-homology",
        action="store_true",
        help="Report x^2 y^v as the predicted (Sym^2, Sym^v) homology of the Hopf link",
    )
    series_parser.set_defaults(handler=series)

    enumerate_parser = subparsers.add_parser(
        "enumerate", parents=parents, help="List the strata of Hilb^n with their statistics"
    )
    target = enumerate_parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--plane", action="store_true", help="Strata of the plane C^2")
    target.add_argument("--u", type=int, help="Exponent of x")
    enumerate_parser.add_argument("--v", type=int, help="Exponent of y")
    enumerate_parser.add_argument("--n", type=int, required=True, help="Number of points")
    enumerate_parser.add_argument("--format", choices=("json", "ascii"), default="json")
    enumerate_parser.set_defaults(handler=enumerate_strata)
