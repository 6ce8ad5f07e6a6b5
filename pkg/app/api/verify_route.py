import argparse
import logging
from typing import List, Optional, Sequence

from pydantic import TypeAdapter

from app.config import DEFAULT_BUDGET_MS, MAX_WORKERS
from app.models.report import CheckReport
from app.services.verification import CHECK_NAMES, SuiteParams, run_suite

# Configure logging
logger = logging.getLogger(__name__)

_reports = TypeAdapter(List[CheckReport])


def cmd_verify(
    suite: Sequence[str],
    budget_ms: Optional[int] = DEFAULT_BUDGET_MS,
    params: Optional[SuiteParams] = None,
    max_workers: int = MAX_WORKERS,
) -> List[CheckReport]:
    """
    Run the named checks ("all" for every check) and return their reports
    ordered by name.
    """
    reports = run_suite(suite, params, budget_ms, max_workers)
    failed = [report.name for report in reports if not report.passed]
    if failed:
        logger.error(f"{len(failed)} of {len(reports)} checks failed: {', '.join(failed)}")
    else:
        logger.info(f"All {len(reports)} checks passed")
    return reports


def verify(args: argparse.Namespace) -> int:
    suite = [name for item in args.suite for name in item.split(",") if name]
    params = SuiteParams(u=args.u, v=args.v, nmax=args.nmax, kmax=args.kmax)
    reports = cmd_verify(suite, args.budget_ms, params, args.workers)
    print(_reports.dump_json(reports, exclude_none=True).decode("utf-8"))
    return 0 if all(report.passed for report in reports) else 1


def register(subparsers, parents) -> None:
    """
    Add the `verify` command.
    """
    parser = subparsers.add_parser(
        "verify", parents=parents, help="Run identity and oracle checks"
    )
    parser.add_argument(
        "--suite",
        nargs="+",
        default=["all"],
        help=f"Checks to run, space or comma separated: {', '.join(CHECK_NAMES)}, all",
    )
    parser.add_argument("--u", type=int, help="Restrict curve checks to this u")
    parser.add_argument("--v", type=int, help="Restrict curve checks to this v")
    parser.add_argument("--nmax", type=int, help="Truncation degree")
    parser.add_argument("--kmax", type=int, help="Rows in the Durfee sum")
    parser.add_argument(
        "--budget-ms", type=int, default=DEFAULT_BUDGET_MS, help="Wall-clock cap per oracle enumeration"
    )
    parser.add_argument("--workers", type=int, default=MAX_WORKERS, help="Checks run in parallel")
    parser.set_defaults(handler=verify)
