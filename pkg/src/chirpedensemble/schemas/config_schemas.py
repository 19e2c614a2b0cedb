from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

OutputFormat = Literal["csv", "json", "sqlite"]


class TableConfig(BaseModel):
    """
    Samples of a tabulated envelope or chirp on a slow-time grid.
    """

    model_config = ConfigDict(extra="forbid")

    s: List[float] = Field(min_length=4)
    values: List[float] = Field(min_length=4)

    @model_validator(mode="after")
    def _same_length(self) -> "TableConfig":
        if len(self.s) != len(self.values):
            raise ValueError(f"s has {len(self.s)} samples but values has {len(self.values)}")
        return self


class SegmentConfig(BaseModel):
    """
    One chirped pulse. With tabulated curves, v0, v1 and t_slow are read off the chirp table.
    `p`/`q` name the pair this segment is meant to invert (used for condition checks only).
    """

    model_config = ConfigDict(extra="forbid")

    v0: Optional[float] = None
    v1: Optional[float] = None
    t_slow: float = Field(default=1.0, gt=0.0)
    envelope: Literal["sine", "tabulated"] = "sine"
    chirp: Literal["linear", "tabulated"] = "linear"
    envelope_table: Optional[TableConfig] = None
    chirp_table: Optional[TableConfig] = None
    p: Optional[int] = None
    q: Optional[int] = None

    @model_validator(mode="after")
    def _consistent_shape(self) -> "SegmentConfig":
        tabulated = (self.envelope == "tabulated", self.chirp == "tabulated")
        if tabulated[0] != tabulated[1]:
            raise ValueError("envelope and chirp must both be tabulated or both analytic")
        if tabulated[0]:
            if self.envelope_table is None or self.chirp_table is None:
                raise ValueError("tabulated pulses need envelope_table and chirp_table")
            if self.envelope_table.s != self.chirp_table.s:
                raise ValueError("envelope_table and chirp_table must share the same s samples")
        else:
            if self.v0 is None or self.v1 is None:
                raise ValueError("analytic pulses need v0 and v1")
            if not 0.0 < self.v0 < self.v1:
                raise ValueError(f"need 0 < v0 < v1, got v0={self.v0}, v1={self.v1}")
        if (self.p is None) != (self.q is None):
            raise ValueError("give both p and q or neither")
        return self


class SystemConfig(BaseModel):
    """
    Affine ensemble lambda(alpha) = offsets + coefficients @ alpha with coupling intervals.
    """

    model_config = ConfigDict(extra="forbid")

    offsets: List[float] = Field(min_length=2)
    coefficients: List[List[float]]  # n rows of m entries
    coupling: List[List[float]]  # lower bounds (or exact values)
    coupling_upper: Optional[List[List[float]]] = None
    box: List[Tuple[float, float]] = Field(min_length=1)
    alphas: List[List[float]] = Field(default_factory=list)

    @field_validator("alphas", mode="before")
    @classmethod
    def _scalar_alphas(cls, value):
        if isinstance(value, list):
            return [[a] if isinstance(a, (int, float)) else a for a in value]
        return value

    @property
    def n(self) -> int:
        return len(self.offsets)

    @property
    def dim(self) -> int:
        return len(self.box)

    @model_validator(mode="after")
    def _shapes(self) -> "SystemConfig":
        n, m = self.n, self.dim
        if len(self.coefficients) != n or any(len(row) != m for row in self.coefficients):
            raise ValueError(f"coefficients must be {n} rows of {m} entries")
        for name in ("coupling", "coupling_upper"):
            matrix = getattr(self, name)
            if matrix is not None and (len(matrix) != n or any(len(row) != n for row in matrix)):
                raise ValueError(f"{name} must be an {n} x {n} matrix")
        for lo, hi in self.box:
            if lo > hi:
                raise ValueError(f"box interval ({lo}, {hi}) has lower > upper")
        for alpha in self.alphas:
            if len(alpha) != m:
                raise ValueError(f"alpha {alpha} must have {m} component(s)")
            if any(not lo - 1e-12 <= a <= hi + 1e-12 for a, (lo, hi) in zip(alpha, self.box)):
                raise ValueError(f"alpha {alpha} lies outside the box {self.box}")
        return self

    def alpha_list(self) -> List[List[float]]:
        """Configured alphas, or the box midpoint when none are given."""
        if self.alphas:
            return [list(a) for a in self.alphas]
        return [[0.5 * (lo + hi) for lo, hi in self.box]]


class PulseConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    segments: List[SegmentConfig] = Field(min_length=1)


class RunSettings(BaseModel):
    """
    Scales, target pair and numerical resolution. eps2 is either given or derived
    from eps1 through the coupling rule eps2 = eps1 ** kappa.
    """

    model_config = ConfigDict(extra="forbid")

    eps1: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    eps2: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    kappa: Optional[float] = None
    eps1_list: List[float] = Field(default_factory=list)
    p: int = Field(ge=1)
    q: int = Field(ge=1)
    initial_level: Optional[int] = Field(default=None, ge=1)
    steps_per_period: Optional[int] = Field(default=None, ge=1)
    n_samples: Optional[int] = Field(default=None, ge=2)
    delta_choice: float = Field(default=0.0, ge=0.0, le=1.0)
    delta_samples: int = Field(default=0, ge=0)
    seed: int = 0
    workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _scales(self) -> "RunSettings":
        if self.p >= self.q:
            raise ValueError(f"need p < q, got p={self.p}, q={self.q}")
        if self.kappa is not None and self.kappa <= 1.0:
            raise ValueError(f"kappa must exceed 1 so that eps2/eps1 -> 0, got {self.kappa}")
        if self.eps2 is None and self.kappa is None:
            raise ValueError("give eps2 or the coupling exponent kappa")
        if self.eps1 is None and not self.eps1_list:
            raise ValueError("give eps1 or eps1_list")
        if any(not 0.0 < e < 1.0 for e in self.eps1_list):
            raise ValueError("eps1_list entries must lie in (0, 1)")
        return self

    def eps2_for(self, eps1: float) -> float:
        return eps1**self.kappa if self.kappa is not None else float(self.eps2)

    @property
    def start_level(self) -> int:
        return self.p if self.initial_level is None else self.initial_level


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: Optional[str] = None
    formats: Optional[List[OutputFormat]] = None


class RunConfig(BaseModel):
    """
    A complete experiment description, loaded from TOML or JSON.
    """

    model_config = ConfigDict(extra="forbid")

    system: SystemConfig
    pulse: PulseConfig
    run: RunSettings
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _levels_exist(self) -> "RunConfig":
        n = self.system.n
        levels = {"run.p": self.run.p, "run.q": self.run.q, "run.initial_level": self.run.initial_level}
        for index, segment in enumerate(self.pulse.segments):
            levels[f"pulse.segments.{index}.p"] = segment.p
            levels[f"pulse.segments.{index}.q"] = segment.q
        for name, level in levels.items():
            if level is not None and not 1 <= level <= n:
                raise ValueError(f"{name} = {level} is not a level of the {n}-level system")
        for index, segment in enumerate(self.pulse.segments):
            if segment.p is not None and segment.p >= segment.q:
                raise ValueError(f"pulse.segments.{index}: need p < q")
        return self
