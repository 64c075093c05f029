import logging
import sys
from typing import List, Optional


def setup_logging(level: str = "INFO"):
    # stdout carries command output, so logs go to stderr.
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger().setLevel(level)
    logging.getLogger("PIL").setLevel(logging.WARNING)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        from app.core.config import settings
        from app.handlers.cli_handlers import build_parser
    except Exception as e:
        setup_logging()
        exit_code = getattr(e, "exit_code", 1)
        logging.critical(f"Application failed to start: {e}", exc_info=exit_code == 1)
        return exit_code

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    level = getattr(args, "log_level", settings.log_level).upper()
    if not isinstance(logging.getLevelName(level), int):
        setup_logging()
        logging.error(f"Unknown log level {level!r}.")
        return 2
    setup_logging(level)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
