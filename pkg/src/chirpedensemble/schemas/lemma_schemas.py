from typing import Dict, Optional

from pydantic import BaseModel, Field


class LemmaDiagnostics(BaseModel):
    """
    Measured quantities and normalized ratios of the frame-cascade bounds at one (eps1, eps2).
    Optional fields are None when the corresponding diagnostic was not requested.
    """

    eps1: float = Field(gt=0.0)
    eps2: float = Field(gt=0.0)

    theta_dot_sup: float  # sup_s |d theta / ds|
    theta_dot_ratio: float  # eps1 * sup_s |d theta / ds|
    theta_total_variation: float  # int_0^T |d theta / ds| ds

    monotonicity_margin_before: float  # min over [0, s_bar] of (-2 lam' + f') - f'/2
    monotonicity_margin_after: float  # min over [s_bar, T] of (-2 lam + f) - Delta/2
    derivative_margin: float  # min over [0, T] of |f'| - |lam'|

    residual_sups: Optional[Dict[str, float]] = None  # sup_t ||int_0^t residual||
    residual_ratios: Optional[Dict[str, float]] = None  # sqrt(eps1 eps2) * sup

    truncation_distance: Optional[float] = None  # ||psi^_RWA(T) - psi^_5(T)||
    truncation_bound: Optional[float] = None
    rwa_initial_distance: Optional[float] = None  # ||psi^_rwa(0) - psi_I(0)||
    rwa_final_distance: Optional[float] = None  # ||psi^_rwa(T) - psi_I(T)||

    adiabatic_distance: Optional[float] = None
    adiabatic_ratio: Optional[float] = None  # distance / (eps2 / eps1)

    def as_row(self) -> Dict[str, Optional[float]]:
        """Flat mapping for CSV export; residual dictionaries become one column each."""
        row = self.model_dump(exclude={"residual_sups", "residual_ratios"})
        for prefix, values in (("sup", self.residual_sups), ("ratio", self.residual_ratios)):
            for name, value in (values or {}).items():
                row[f"residual_{prefix}_{name}"] = value
        return row
