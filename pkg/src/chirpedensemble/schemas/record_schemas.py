import math
from typing import List, Optional, Union

from pydantic import BaseModel, Field, model_validator

from chirpedensemble.schemas.condition_schemas import ConditionReport

FIDELITY_SLACK = 1e-9
DISTANCE_ATOL = 1e-9


def distance_from_fidelity(fidelity: float) -> float:
    """Phase-invariant distance to e_q, sqrt(2 - 2 sqrt(fid))."""
    return math.sqrt(max(0.0, 2.0 - 2.0 * math.sqrt(min(max(fidelity, 0.0), 1.0))))


class SweepRecord(BaseModel):
    """
    Final-time summary of one propagation job.
    """

    run_id: str
    kind: str = "sweep"
    alpha: List[float]
    delta_choice: Union[float, List[List[float]]] = 0.0
    eps1: float = Field(gt=0.0)
    eps2: float = Field(gt=0.0)
    fidelity: float
    distance: float
    norm_drift: float
    degraded: bool = False
    wall_time: float = 0.0  # seconds; kept out of CSV output

    @model_validator(mode="after")
    def _fidelity_distance_consistent(self) -> "SweepRecord":
        if not 0.0 <= self.fidelity <= 1.0 + FIDELITY_SLACK:
            raise ValueError(f"fidelity {self.fidelity} outside [0, 1]")
        expected = distance_from_fidelity(self.fidelity)
        if abs(self.distance - expected) > DISTANCE_ATOL:
            raise ValueError(
                f"distance {self.distance} inconsistent with fidelity {self.fidelity} "
                f"(expected {expected})"
            )
        return self


class FidelityCurve(BaseModel):
    """
    fid(s) and derived quantities at the stored slow times of one run.
    """

    run_id: str
    alpha: List[float]
    eps1: float
    eps2: float
    s: List[float]
    fid: List[float]
    log10_one_minus_fid: List[float]
    distance: List[float]
    norm_drift: List[float]


class PopulationCurves(BaseModel):
    """
    |psi_j(s)|^2 for every level over a concatenated control.
    """

    run_id: str
    alpha: List[float]
    eps1: float
    eps2: float
    s: List[float]
    populations: List[List[float]]  # one list per level
    breakpoints: List[float]  # slow-time segment boundaries
    degraded: bool = False


class ScalingFit(BaseModel):
    """
    Least-squares slope of log(distance) against log(eps1).
    """

    slope: float
    intercept: float
    residual: float  # RMS residual of the log-log fit
    reliable: bool = True
    kappa: Optional[float] = None


class RunResult(BaseModel):
    """
    Everything a harness command produced, ready for persistence.
    """

    kind: str
    records: List[SweepRecord] = Field(default_factory=list)
    curves: List[FidelityCurve] = Field(default_factory=list)
    populations: List[PopulationCurves] = Field(default_factory=list)
    fit: Optional[ScalingFit] = None
    conditions: List[ConditionReport] = Field(default_factory=list)

    @property
    def degraded(self) -> bool:
        return any(r.degraded for r in self.records) or any(p.degraded for p in self.populations)
