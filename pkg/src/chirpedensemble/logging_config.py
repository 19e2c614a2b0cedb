import logging

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: str = "INFO") -> None:
    """Configures the root logger once for CLI runs."""
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        # Unknown names fall back to INFO rather than aborting a long sweep
        logging.getLogger(__name__).warning(
            f"Unknown LOG_LEVEL '{level}', falling back to INFO."
        )
        numeric_level = logging.INFO
    logging.basicConfig(level=numeric_level, format=LOG_FORMAT, force=True)
