import logging
import os

from dotenv import load_dotenv
load_dotenv()

LOG_LEVEL = os.getenv("REDUCTION_LAB_LOG_LEVEL", "INFO")
LOG_FORMAT = os.getenv(
    "REDUCTION_LAB_LOG_FORMAT",
    "%(asctime)s %(levelname)s %(name)s: %(message)s",
)


def configure_logging(level: str | None = None) -> None:
    """Install the stderr handler used by every command. Output files never carry log lines."""
    resolved = (level or LOG_LEVEL).upper()
    # getLevelNamesMapping() is 3.11+; on 3.10 use the same underlying name->level table.
    names = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))()
    if resolved not in names:
        raise ValueError(f"Unknown log level: {resolved}")
    logging.basicConfig(level=resolved, format=LOG_FORMAT, force=True)
