from typing import List, Optional

from pydantic import Field, computed_field
from pydantic_settings import BaseSettings, SettingsConfigDict

SUPPORTED_FORMATS = ("csv", "json", "sqlite")


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Core application settings
    APP_NAME: str = "chirpedensemble"
    DEBUG: bool = False

    # Logging Configuration
    LOG_LEVEL: str = "INFO"

    # Numerical defaults, overridable per run from the config file or the CLI
    DEFAULT_WORKERS: int = 1
    DEFAULT_STEPS_PER_PERIOD: int = 50
    DEFAULT_N_SAMPLES: int = 2000
    NORM_DRIFT_TOLERANCE: float = 1e-6

    # Output
    OUTPUT_DIR: str = "./results"
    # Record store used by the "sqlite" output format
    DATABASE_URL: str = "sqlite:///./chirpedensemble.db"

    # Raw comma-separated DEFAULT_FORMATS env var, e.g. "csv,json"
    ENV_DEFAULT_FORMATS: Optional[str] = Field(
        default=None, validation_alias="DEFAULT_FORMATS"
    )

    @computed_field  # type: ignore[misc]
    @property
    def DEFAULT_FORMATS(self) -> List[str]:
        """Parses the comma-separated DEFAULT_FORMATS env var into a list."""
        raw_str = self.ENV_DEFAULT_FORMATS
        if raw_str and raw_str.strip():
            formats = [fmt.strip().lower() for fmt in raw_str.split(",") if fmt.strip()]
            unknown = [fmt for fmt in formats if fmt not in SUPPORTED_FORMATS]
            if unknown:
                raise ValueError(
                    f"Invalid DEFAULT_FORMATS value '{raw_str}': unknown format(s) {unknown}. "
                    f"Supported: {', '.join(SUPPORTED_FORMATS)}."
                )
            return formats
        return ["csv"]


settings = Settings()
