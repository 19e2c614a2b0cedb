import dataclasses
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Literal, Tuple, Union

import numpy as np

from chirpedensemble.core.conditions import crossing_time
from chirpedensemble.core.control import ChirpedPulse
from chirpedensemble.core.model import (
    ComplexArray,
    FloatArray,
    SampledSystem,
    check_level_pair,
    recenter,
)
from chirpedensemble.exceptions import ArgumentError, HypothesisViolationError

logger = logging.getLogger(__name__)

Index = Tuple[int, int, int]  # (j, k, sigma) with 1-based levels
LConvention = Literal["exact", "literal"]

DIVISOR_GRID_POINTS = 2001


@dataclass(frozen=True, eq=False)
class PhaseFamily:
    """f^sigma_jk(s) = lambda_j - lambda_k + sigma f(s) and phi^sigma_jk(t) = (lambda_j - lambda_k) t + sigma phi(t)."""

    lambdas: FloatArray
    pulse: ChirpedPulse
    p: int
    q: int

    @cached_property
    def differences(self) -> FloatArray:
        """D[j, k] = lambda_j - lambda_k."""
        return self.lambdas[:, None] - self.lambdas[None, :]

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    def f_sigma(self, sigma: int, s: FloatArray) -> FloatArray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return self.differences[None, :, :] + sigma * self.pulse.chirp.value(s)[:, None, None]

    def phi_sigma(self, sigma: int, t: FloatArray) -> FloatArray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return (
            self.differences[None, :, :] * t[:, None, None]
            + sigma * self.pulse.phase(t)[:, None, None]
        )

    # Index sets, 1-based (j, k, sigma)

    def index_i(self) -> List[Index]:
        return [(j, k, s) for j in range(1, self.n + 1) for k in range(j, self.n + 1) for s in (1, -1)]

    def index_i_prime(self) -> List[Index]:
        return [idx for idx in self.index_i() if idx != (self.p, self.q, 1)]

    def index_j(self) -> List[Index]:
        return [
            (j, k, s) for j in range(1, self.n + 1) for k in range(j, self.n + 1) for s in (-2, 0, 2)
        ]

    def index_j_prime(self) -> List[Index]:
        strict = [
            (j, k, s) for j in range(1, self.n + 1) for k in range(j + 1, self.n + 1) for s in (-2, 0)
        ]
        return strict + [(j, j, s) for j in range(1, self.n + 1) for s in (-2, 2)]

    def index_j_double_prime(self) -> List[Index]:
        return [(j, k, s) for (j, k, s) in self.index_j() if not (j == k and s == 0)]

    def index_k(self) -> List[Tuple[int, int]]:
        outside = [j for j in range(1, self.n + 1) if j not in (self.p, self.q)]
        return [(j, k) for j in outside for k in outside if j < k]

    def check_divisors(self, indices: List[Index]) -> None:
        """Raises if some f^sigma_jk used as a divisor vanishes on [0, T_slow]."""
        grid = np.linspace(0.0, self.pulse.t_slow, DIVISOR_GRID_POINTS)
        f = self.pulse.chirp.value(grid)
        for j, k, sigma in indices:
            values = self.differences[j - 1, k - 1] + sigma * f
            if np.min(values) <= 0.0 <= np.max(values):
                raise HypothesisViolationError(
                    f"Divisor f^{sigma}_{j}{k} vanishes on [0, {self.pulse.t_slow}]: "
                    f"range [{np.min(values):.6g}, {np.max(values):.6g}].",
                    index=(j, k, sigma),
                )


@dataclass(frozen=True, eq=False)
class FrameContext:
    """Recentered point system plus pulse and target pair, with cached quadratures."""

    sys: SampledSystem
    pulse: ChirpedPulse
    p: int
    q: int
    delta_gap: float
    l_convention: LConvention = "exact"

    @classmethod
    def build(
        cls,
        sys: SampledSystem,
        pulse: ChirpedPulse,
        p: int,
        q: int,
        l_convention: LConvention = "exact",
    ) -> "FrameContext":
        """Recenters on (p, q) and checks the gap hypotheses for this point system."""
        check_level_pair(sys.n, p, q)
        centered = recenter(sys, p, q)
        delta_gap = centered.gap(p, q)
        if not (pulse.v0 < delta_gap < pulse.v1):
            raise HypothesisViolationError(
                f"Target gap {delta_gap:.6g} is not inside ({pulse.v0}, {pulse.v1}).",
                index=(p, q, 1),
            )
        for j in range(1, sys.n + 1):
            for k in range(j + 1, sys.n + 1):
                if (j, k) != (p, q) and pulse.v0 <= centered.gap(j, k) <= pulse.v1:
                    raise HypothesisViolationError(
                        f"Gap ({j},{k}) = {centered.gap(j, k):.6g} lies in [{pulse.v0}, {pulse.v1}].",
                        index=(j, k, 1),
                    )
        if centered.coupling[p - 1, q - 1] == 0.0:
            raise HypothesisViolationError(f"Target coupling delta_{p}{q} is zero.", index=(p, q, 1))
        if l_convention not in ("exact", "literal"):
            raise ArgumentError(f"Unknown l-coefficient convention '{l_convention}'.")
        return cls(centered, pulse, p, q, delta_gap, l_convention)

    def with_eps(self, eps1: float, eps2: float) -> "FrameContext":
        """Same system and pulse shape at other scales."""
        pulse = dataclasses.replace(self.pulse, eps1=eps1, eps2=eps2)
        return dataclasses.replace(self, pulse=pulse)

    @property
    def n(self) -> int:
        return self.sys.n

    @property
    def ip(self) -> int:
        return self.p - 1

    @property
    def iq(self) -> int:
        return self.q - 1

    @property
    def lambdas(self) -> FloatArray:
        return self.sys.lambdas

    @property
    def coupling(self) -> FloatArray:
        return self.sys.coupling

    @property
    def delta_pq(self) -> float:
        return float(self.sys.coupling[self.ip, self.iq])

    @property
    def eps1(self) -> float:
        return self.pulse.eps1

    @property
    def eps2(self) -> float:
        return self.pulse.eps2

    @property
    def rate(self) -> float:
        return self.pulse.rate

    @property
    def horizon(self) -> float:
        return self.pulse.horizon

    @cached_property
    def phases(self) -> PhaseFamily:
        return PhaseFamily(self.lambdas, self.pulse, self.p, self.q)

    @cached_property
    def s_bar(self) -> float:
        return crossing_time(self.pulse, self.delta_gap)

    @cached_property
    def upper_pairs(self) -> Tuple[np.ndarray, np.ndarray]:
        """0-based (j, k) with j <= k, diagonal included."""
        return np.triu_indices(self.n)


def as_times(t: Union[float, FloatArray]) -> Tuple[FloatArray, bool]:
    """Batch view of t plus whether the caller passed a scalar."""
    arr = np.asarray(t, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def unbatch(matrices: ComplexArray, scalar: bool) -> ComplexArray:
    return matrices[0] if scalar else matrices
