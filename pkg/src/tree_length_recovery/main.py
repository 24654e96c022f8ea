import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from .cli import check, dist, gen, mixture, oracle, reconstruct, signature, split
from .core.config import settings
from .core.errors import TreeLengthError, TreeParseError
from .services.length_service import length_service

logger = logging.getLogger(__name__)

COMMANDS = (gen, dist, reconstruct, split, signature, mixture, check, oracle)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tree-length-recovery",
        description=f"{settings.app_name}: rebuild weighted trees from random-ordering lengths",
    )
    parser.add_argument("--version", action="version", version=settings.app_version)
    parser.add_argument("--jobs", type=int, default=None, help="worker processes for exact distributions")
    parser.add_argument(
        "--log-level",
        default=settings.log_level,
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    if args.jobs is not None:
        length_service.jobs = max(1, args.jobs)

    try:
        return args.func(args)
    except ValidationError as e:
        error = TreeParseError(f"{e.title}: {e.errors()[0]['msg']}")
    except TreeLengthError as e:
        error = e
    logger.debug(f"{args.command} failed", exc_info=error)
    print(error.error_line(), file=sys.stderr)
    return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
