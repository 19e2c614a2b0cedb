import json
import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import ValidationError

from chirpedensemble.core.control import (
    ChirpedPulse,
    Control,
    concat,
    synthesize_standard,
    synthesize_tabulated,
)
from chirpedensemble.core.model import EnsembleSystem
from chirpedensemble.exceptions import ChirpedEnsembleError, ConfigError
from chirpedensemble.schemas.config_schemas import RunConfig, SegmentConfig

logger = logging.getLogger(__name__)

_TOML_POSITION = re.compile(r"at line (\d+), column (\d+)")


def _toml_error(exc: tomllib.TOMLDecodeError, path: Path) -> ConfigError:
    line = getattr(exc, "lineno", None)
    column = getattr(exc, "colno", None)
    if line is None:
        match = _TOML_POSITION.search(str(exc))
        if match:
            line, column = int(match.group(1)), int(match.group(2))
    return ConfigError(f"Malformed TOML in {path}: {exc}", line=line, column=column)


def _validation_error(exc: ValidationError, path: Path) -> ConfigError:
    first = exc.errors()[0]
    field = ".".join(str(part) for part in first["loc"])
    return ConfigError(
        f"Invalid config {path}: {field or '<root>'}: {first['msg']}", field=field or None
    )


def parse_config(data: dict, source: Union[str, Path] = "<memory>") -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise _validation_error(e, Path(source)) from e


def load_config(path: Union[str, Path]) -> RunConfig:
    """Reads a RunConfig from a .toml or .json file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e

    suffix = path.suffix.lower()
    if suffix == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as e:
            raise _toml_error(e, path) from e
    elif suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(
                f"Malformed JSON in {path}: {e.msg}", line=e.lineno, column=e.colno
            ) from e
    else:
        raise ConfigError(f"Unsupported config format '{suffix}' for {path}; use .toml or .json.")

    config = parse_config(data, path)
    logger.info(f"Loaded config from {path}: {config.system.n} levels, {len(config.pulse.segments)} segment(s).")
    return config


def save_config(config: RunConfig, path: Union[str, Path]) -> Path:
    """Writes the config as JSON; load_config reads it back to an equal RunConfig."""
    path = Path(path)
    if path.suffix.lower() != ".json":
        raise ConfigError(f"save_config writes JSON; got target {path}.")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"Saved config to {path}")
    return path


def ensemble_from_config(config: RunConfig) -> EnsembleSystem:
    system = config.system
    try:
        return EnsembleSystem.affine(
            system.offsets,
            np.array(system.coefficients, dtype=float),
            np.array(system.coupling, dtype=float),
            [list(interval) for interval in system.box],
            coupling_upper=None
            if system.coupling_upper is None
            else np.array(system.coupling_upper, dtype=float),
        )
    except ChirpedEnsembleError as e:
        raise ConfigError(f"Invalid system: {e}", field="system") from e


def pulse_from_segment(segment: SegmentConfig, eps1: float, eps2: float) -> ChirpedPulse:
    if segment.envelope == "tabulated":
        return synthesize_tabulated(
            segment.chirp_table.s,
            segment.envelope_table.values,
            segment.chirp_table.values,
            eps1,
            eps2,
        )
    return synthesize_standard(segment.v0, segment.v1, eps1, eps2, t_slow=segment.t_slow)


def pulses_from_config(config: RunConfig, eps1: float, eps2: float) -> List[ChirpedPulse]:
    try:
        return [pulse_from_segment(seg, eps1, eps2) for seg in config.pulse.segments]
    except ChirpedEnsembleError as e:
        raise ConfigError(f"Invalid pulse: {e}", field="pulse") from e


def control_from_config(config: RunConfig, eps1: float, eps2: float) -> Control:
    """The single pulse, or the concatenation when several segments are configured."""
    pulses = pulses_from_config(config, eps1, eps2)
    return pulses[0] if len(pulses) == 1 else concat(pulses)


def resolve_eps1(config: RunConfig, override: Optional[float] = None) -> float:
    if override is not None:
        return override
    if config.run.eps1 is not None:
        return config.run.eps1
    return config.run.eps1_list[0]
