import logging
import re
from typing import NamedTuple, Optional

logger = logging.getLogger(__name__)


class FilenameData(NamedTuple):
    """DTO for data needed to construct an output filename."""

    kind: str  # harness command, e.g. "sweep", "scaling"
    p: Optional[int]
    q: Optional[int]
    eps1: Optional[float]
    eps2: Optional[float]
    extension: str  # e.g. ".csv", ".json"


def _normalize_token(value: Optional[str], default_placeholder: str) -> str:
    if not value or not value.strip():
        return default_placeholder
    s = value.lower().replace(" ", "-")
    s = re.sub(r"[^a-z0-9.-]", "", s)  # keep [a-z0-9.-]
    s = re.sub(r"--+", "-", s)
    s = s.strip("-.")
    return s if s else default_placeholder


def _format_scale(value: Optional[float]) -> str:
    if value is None:
        return "na"
    # 3 significant digits, exponent without '+' so the token stays filename-safe
    return f"{value:.3g}".replace("+", "")


def generate_output_filename(data: FilenameData) -> str:
    """<kind>_<p>-<q>_<eps1>_<eps2>.<ext> with normalized tokens."""
    kind = _normalize_token(data.kind, "run")
    pair = f"{data.p}-{data.q}" if data.p is not None and data.q is not None else "na"
    ext = data.extension.lower()
    if not ext:
        ext = ".dat"
        logger.warning(f"No extension given for a '{kind}' output. Defaulting to '.dat'.")
    elif not ext.startswith("."):
        ext = "." + ext
    return f"{kind}_{pair}_{_format_scale(data.eps1)}_{_format_scale(data.eps2)}{ext}"
