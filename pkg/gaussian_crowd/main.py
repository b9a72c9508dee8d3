import sys

from gaussian_crowd.cli import run
from gaussian_crowd.config import (
    LOG_ENABLE_CONSOLE,
    LOG_ENABLE_FILE,
    LOG_FILE_PATH,
    LOG_FORMAT_TYPE,
    LOG_LEVEL,
)
from gaussian_crowd.logger_config import CrowdLogger


def main() -> None:
    CrowdLogger.setup_logging(
        level=LOG_LEVEL,
        format_type=LOG_FORMAT_TYPE,
        enable_console=LOG_ENABLE_CONSOLE,
        enable_file=LOG_ENABLE_FILE,
        log_file_path=LOG_FILE_PATH,
    )
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
