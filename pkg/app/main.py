import argparse
import json
import logging
import sys
import traceback
from typing import List, Optional

from pydantic import ValidationError

from app import config
from app.api import route, verify_route
from app.errors import EngineError
from app.services import profiling

# Configure logging
logger = logging.getLogger(__name__)

PROG = "hilbcurve"


def configure_logging(verbose: bool = False):
    # stdout carries the JSON output only
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, config.LOG_LEVEL),
        format=config.LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--profile", action="store_true", help="Print per-phase timings to stderr")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")

    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Virtual Poincare series of punctual Hilbert schemes on x^u y^v = 0",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include routers
    route.register(subparsers, [common])
    verify_route.register(subparsers, [common])
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv``, run the command and return its exit code:
    0 on success, 1 on a failed check or internal error, 2 on a usage error.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2

    configure_logging(args.verbose)
    logger.debug(f"Configuration: {config.get_config()}")
    profiling.reset()
    try:
        return args.handler(args)
    except ValidationError as e:
        message = "; ".join(error["msg"] for error in e.errors())
        logger.error(f"Invalid arguments: {message}")
        print(f"{PROG}: error: {message}", file=sys.stderr)
        return 2
    except EngineError as e:
        logger.error(f"{type(e).__name__}: {e.detail}")
        print(f"{PROG}: error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}")
        logger.error(traceback.format_exc())
        return 1
    finally:
        if args.profile:
            print(json.dumps({"profile_ms": profiling.snapshot()}), file=sys.stderr)
