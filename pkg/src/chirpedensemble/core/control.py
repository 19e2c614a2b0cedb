import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import List, Protocol, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline

from chirpedensemble.core.model import FloatArray
from chirpedensemble.exceptions import ArgumentError, DomainError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], FloatArray]

# Dense grid used to certify tabulated envelope/chirp invariants
INVARIANT_GRID_POINTS = 2001
ENDPOINT_ATOL = 1e-9
HORIZON_RTOL = 1e-12


class Envelope(Protocol):
    t_slow: float

    def value(self, s: ArrayLike) -> FloatArray: ...

    def derivative(self, s: ArrayLike) -> FloatArray: ...


class Chirp(Protocol):
    t_slow: float

    def value(self, s: ArrayLike) -> FloatArray: ...

    def derivative(self, s: ArrayLike) -> FloatArray: ...

    def integral(self, s: ArrayLike) -> FloatArray: ...


@dataclass(frozen=True)
class SineEnvelope:
    """u(s) = sin(pi s / T_slow)."""

    t_slow: float = 1.0

    def value(self, s: ArrayLike) -> FloatArray:
        return np.sin(np.pi * np.asarray(s, dtype=float) / self.t_slow)

    def derivative(self, s: ArrayLike) -> FloatArray:
        return (np.pi / self.t_slow) * np.cos(np.pi * np.asarray(s, dtype=float) / self.t_slow)


@dataclass(frozen=True)
class LinearChirp:
    """f(s) = v0 + s (v1 - v0) / T_slow."""

    v0: float
    v1: float
    t_slow: float = 1.0

    @property
    def slope(self) -> float:
        return (self.v1 - self.v0) / self.t_slow

    def value(self, s: ArrayLike) -> FloatArray:
        return self.v0 + self.slope * np.asarray(s, dtype=float)

    def derivative(self, s: ArrayLike) -> FloatArray:
        return np.full_like(np.asarray(s, dtype=float), self.slope)

    def integral(self, s: ArrayLike) -> FloatArray:
        s = np.asarray(s, dtype=float)
        return self.v0 * s + 0.5 * self.slope * s**2


@dataclass(frozen=True, eq=False)
class _TabulatedCurve:
    s_samples: FloatArray
    values: FloatArray

    def __post_init__(self):
        s = np.array(self.s_samples, dtype=float)
        v = np.array(self.values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or s.size < 4:
            raise ArgumentError(
                f"Tabulated curve needs >= 4 matching samples, got s{s.shape} and values{v.shape}."
            )
        if s[0] != 0.0 or np.any(np.diff(s) <= 0):
            raise ArgumentError("Tabulated sample points must start at 0 and increase strictly.")
        s.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "s_samples", s)
        object.__setattr__(self, "values", v)

    @property
    def t_slow(self) -> float:
        return float(self.s_samples[-1])

    @cached_property
    def spline(self) -> CubicSpline:
        # Cubic spline interpolant is C2
        return CubicSpline(self.s_samples, self.values)

    def value(self, s: ArrayLike) -> FloatArray:
        return self.spline(np.asarray(s, dtype=float))

    def derivative(self, s: ArrayLike) -> FloatArray:
        return self.spline(np.asarray(s, dtype=float), 1)


class TabulatedEnvelope(_TabulatedCurve):
    """Envelope u given by samples, interpolated by a cubic spline."""


class TabulatedChirp(_TabulatedCurve):
    """Chirp f given by samples; its phase integral is the exact spline antiderivative."""

    @cached_property
    def antiderivative(self):
        return self.spline.antiderivative()

    def integral(self, s: ArrayLike) -> FloatArray:
        return self.antiderivative(np.asarray(s, dtype=float))


@dataclass(frozen=True, eq=False)
class ChirpedPulse:
    """omega(t) = 2 eps1 u(eps1 eps2 t) cos(phi(t)), phi(t) = int_0^t f(eps1 eps2 tau) dtau."""

    eps1: float
    eps2: float
    v0: float
    v1: float
    envelope: Envelope
    chirp: Chirp
    t_slow: float = 1.0
    max_envelope: float = field(init=False)

    def __post_init__(self):
        if not (self.eps1 > 0 and self.eps2 > 0):
            raise ArgumentError(f"eps1, eps2 must be positive, got ({self.eps1}, {self.eps2}).")
        if not (0 < self.v0 < self.v1):
            raise ArgumentError(f"Need 0 < v0 < v1, got v0={self.v0}, v1={self.v1}.")
        if self.t_slow <= 0:
            raise ArgumentError(f"T_slow must be positive, got {self.t_slow}.")
        for name, curve in (("envelope", self.envelope), ("chirp", self.chirp)):
            if not math.isclose(curve.t_slow, self.t_slow, rel_tol=1e-12):
                raise ArgumentError(
                    f"The {name} is defined on [0, {curve.t_slow}] but T_slow = {self.t_slow}."
                )

        grid = np.linspace(0.0, self.t_slow, INVARIANT_GRID_POINTS)
        u = self.envelope.value(grid)
        if abs(u[0]) > ENDPOINT_ATOL or abs(u[-1]) > ENDPOINT_ATOL:
            raise ArgumentError(f"Envelope must vanish at both ends, got u(0)={u[0]}, u(T)={u[-1]}.")
        if np.any(u[1:-1] <= 0):
            raise ArgumentError("Envelope must be positive on the open interval (0, T_slow).")
        f = self.chirp.value(grid)
        if not (
            math.isclose(f[0], self.v0, rel_tol=1e-9) and math.isclose(f[-1], self.v1, rel_tol=1e-9)
        ):
            raise ArgumentError(
                f"Chirp must run from v0={self.v0} to v1={self.v1}, got f(0)={f[0]}, f(T)={f[-1]}."
            )
        if np.any(np.diff(f) <= 0):
            raise ArgumentError("Chirp must be strictly increasing.")
        object.__setattr__(self, "max_envelope", float(np.max(u)))

    @property
    def rate(self) -> float:
        """eps1 * eps2, the slow-time rate."""
        return self.eps1 * self.eps2

    @property
    def horizon(self) -> float:
        return self.t_slow / self.rate

    @property
    def max_carrier(self) -> float:
        return self.v1

    @property
    def segments(self) -> Tuple["ChirpedPulse", ...]:
        return (self,)

    def _checked_time(self, t: ArrayLike) -> FloatArray:
        t_arr = np.asarray(t, dtype=float)
        slack = HORIZON_RTOL * self.horizon
        if np.any(t_arr < -slack) or np.any(t_arr > self.horizon + slack):
            raise DomainError(f"Time outside the pulse horizon [0, {self.horizon:.6g}].")
        return np.clip(t_arr, 0.0, self.horizon)

    def slow_time(self, t: ArrayLike) -> FloatArray:
        return self.rate * self._checked_time(t)

    def phase(self, t: ArrayLike) -> FloatArray:
        t_arr = self._checked_time(t)
        if isinstance(self.chirp, LinearChirp):
            return self.v0 * t_arr + self.rate * (self.v1 - self.v0) * t_arr**2 / (2.0 * self.t_slow)
        return self.chirp.integral(self.rate * t_arr) / self.rate

    def amplitude(self, t: ArrayLike) -> FloatArray:
        t_arr = self._checked_time(t)
        return 2.0 * self.eps1 * self.envelope.value(self.rate * t_arr) * np.cos(self.phase(t_arr))


def omega(pulse: ChirpedPulse, t: ArrayLike) -> FloatArray:
    """Control amplitude at fast time t."""
    return pulse.amplitude(t)


def phase_phi(pulse: ChirpedPulse, t: ArrayLike) -> FloatArray:
    """Carrier phase phi(t)."""
    return pulse.phase(t)


def synthesize_standard(
    v0: float, v1: float, eps1: float, eps2: float, t_slow: float = 1.0
) -> ChirpedPulse:
    """Sine envelope with a linear chirp across (v0, v1)."""
    if not (0 < v0 < v1):
        raise ArgumentError(f"Need 0 < v0 < v1, got v0={v0}, v1={v1}.")
    return ChirpedPulse(
        eps1=eps1,
        eps2=eps2,
        v0=v0,
        v1=v1,
        envelope=SineEnvelope(t_slow),
        chirp=LinearChirp(v0, v1, t_slow),
        t_slow=t_slow,
    )


def synthesize_tabulated(
    s_samples: Sequence[float],
    envelope_values: Sequence[float],
    chirp_values: Sequence[float],
    eps1: float,
    eps2: float,
) -> ChirpedPulse:
    """Pulse from sampled u and f; v0, v1 and T_slow are read off the samples."""
    envelope = TabulatedEnvelope(s_samples, envelope_values)
    chirp = TabulatedChirp(s_samples, chirp_values)
    return ChirpedPulse(
        eps1=eps1,
        eps2=eps2,
        v0=float(chirp.values[0]),
        v1=float(chirp.values[-1]),
        envelope=envelope,
        chirp=chirp,
        t_slow=chirp.t_slow,
    )


@dataclass(frozen=True, eq=False)
class PiecewiseControl:
    """Pulses played back to back; each segment restarts its own carrier phase."""

    segments: Tuple[ChirpedPulse, ...]
    breakpoints: FloatArray = field(init=False)

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ArgumentError("A piecewise control needs at least one segment.")
        first = segments[0]
        for index, pulse in enumerate(segments[1:], start=2):
            if not (
                math.isclose(pulse.eps1, first.eps1, rel_tol=1e-12)
                and math.isclose(pulse.eps2, first.eps2, rel_tol=1e-12)
            ):
                raise ArgumentError(
                    f"Segment {index} uses (eps1, eps2) = ({pulse.eps1}, {pulse.eps2}), "
                    f"segment 1 uses ({first.eps1}, {first.eps2})."
                )
        breakpoints = np.concatenate([[0.0], np.cumsum([pulse.horizon for pulse in segments])])
        breakpoints.setflags(write=False)
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "breakpoints", breakpoints)

    @property
    def eps1(self) -> float:
        return self.segments[0].eps1

    @property
    def eps2(self) -> float:
        return self.segments[0].eps2

    @property
    def rate(self) -> float:
        return self.eps1 * self.eps2

    @property
    def horizon(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def t_slow(self) -> float:
        return sum(pulse.t_slow for pulse in self.segments)

    @property
    def max_envelope(self) -> float:
        return max(pulse.max_envelope for pulse in self.segments)

    @property
    def max_carrier(self) -> float:
        return max(pulse.max_carrier for pulse in self.segments)

    @property
    def slow_breakpoints(self) -> FloatArray:
        return self.breakpoints * self.rate

    def locate(self, t: ArrayLike) -> Tuple[np.ndarray, FloatArray]:
        """Segment index and local time; segments are [a, b) except the last, which is closed."""
        t_arr = np.asarray(t, dtype=float)
        slack = HORIZON_RTOL * self.horizon
        if np.any(t_arr < -slack) or np.any(t_arr > self.horizon + slack):
            raise DomainError(f"Time outside the total horizon [0, {self.horizon:.6g}].")
        index = np.searchsorted(self.breakpoints, t_arr, side="right") - 1
        index = np.clip(index, 0, len(self.segments) - 1)
        local = np.clip(t_arr - self.breakpoints[index], 0.0, None)
        return index, local

    def amplitude(self, t: ArrayLike) -> FloatArray:
        index, local = self.locate(t)
        out = np.zeros(np.shape(local), dtype=float)
        for k, pulse in enumerate(self.segments):
            mask = index == k
            if np.any(mask):
                local_k = np.minimum(local[mask], pulse.horizon)
                out[mask] = pulse.amplitude(local_k)
        return out if out.ndim else float(out)


Control = Union[ChirpedPulse, PiecewiseControl]


def concat(pulses: List[ChirpedPulse]) -> PiecewiseControl:
    """Plays the pulses one after another on [0, sum of horizons]."""
    control = PiecewiseControl(tuple(pulses))
    logger.debug(
        f"Concatenated {len(control.segments)} segment(s); total horizon {control.horizon:.6g}."
    )
    return control


def evaluate(pc: PiecewiseControl, t: ArrayLike) -> FloatArray:
    """Amplitude of a piecewise control at fast time t."""
    return pc.amplitude(t)
