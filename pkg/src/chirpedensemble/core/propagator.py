import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from chirpedensemble.core.control import Control
from chirpedensemble.core.model import ComplexArray, FloatArray, SampledSystem
from chirpedensemble.exceptions import ArgumentError, NumericError

logger = logging.getLogger(__name__)

StateVector = ComplexArray
HamiltonianBatch = Callable[[FloatArray], ComplexArray]

DEFAULT_STEPS_PER_PERIOD = 50
DEFAULT_N_SAMPLES = 2000
DEGRADED_NORM_DRIFT = 1e-6
NORM_ATOL = 1e-9
HERMITIAN_ATOL = 1e-12
# Steps whose unitaries are formed in one vectorized batch
CHUNK_STEPS = 4096


def basis_state(n: int, level: int) -> StateVector:
    """e_level with a 1-based level index."""
    if not 1 <= level <= n:
        raise ArgumentError(f"Level {level} out of range for an {n}-level system.")
    psi = np.zeros(n, dtype=complex)
    psi[level - 1] = 1.0
    return psi


def as_state(psi, n: Optional[int] = None) -> StateVector:
    """Validates a unit-norm complex vector."""
    arr = np.array(psi, dtype=complex)
    if arr.ndim != 1 or (n is not None and arr.shape[0] != n):
        raise ArgumentError(f"State has shape {arr.shape}, expected ({n},).")
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > NORM_ATOL:
        raise ArgumentError(f"State must have unit norm, got {norm:.12g}.")
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Decimated samples of psi at uniform slow times."""

    slow_times: FloatArray
    states: ComplexArray  # shape (n_samples, n)
    max_norm_drift: float
    degraded: bool
    dt: float
    n_steps: int
    rate: float

    @property
    def fast_times(self) -> FloatArray:
        return self.slow_times / self.rate

    @property
    def final_state(self) -> StateVector:
        return self.states[-1]

    def populations(self) -> FloatArray:
        return np.abs(self.states) ** 2

    def norms(self) -> FloatArray:
        return np.linalg.norm(self.states, axis=1)


def _check_hermitian(h: ComplexArray) -> None:
    asym = np.max(np.abs(h - np.conj(np.swapaxes(h, -1, -2))))
    if asym > HERMITIAN_ATOL:
        raise NumericError(f"Hamiltonian is not Hermitian: asymmetry {asym:.3e}.")


def step_unitary(H: ComplexArray, dt: float, psi: StateVector) -> StateVector:
    """exp(-i dt H) psi through the Hermitian eigendecomposition of H."""
    if dt <= 0:
        raise ArgumentError(f"dt must be positive, got {dt}.")
    H = np.asarray(H, dtype=complex)
    _check_hermitian(H)
    w, V = np.linalg.eigh(H)
    return V @ (np.exp(-1j * dt * w) * (V.conj().T @ psi))


def _step_unitaries(h_stack: ComplexArray, dt: float) -> ComplexArray:
    _check_hermitian(h_stack)
    w, V = np.linalg.eigh(h_stack)
    return (V * np.exp(-1j * dt * w)[:, None, :]) @ np.conj(np.swapaxes(V, -1, -2))


def _ordered_product(stack: ComplexArray) -> ComplexArray:
    """U_{m-1} ... U_1 U_0 by pairwise reduction; stack[0] acts first."""
    while stack.shape[0] > 1:
        tail = None
        if stack.shape[0] % 2:
            tail = stack[-1:]
            stack = stack[:-1]
        stack = stack[1::2] @ stack[0::2]
        if tail is not None:
            stack = np.concatenate([stack, tail])
    return stack[0]


def _integrate(
    h_batch: HamiltonianBatch,
    horizon: float,
    psi0: StateVector,
    n_intervals: int,
    steps_per_interval: int,
) -> ComplexArray:
    """Exponential midpoint rule; returns psi at the n_intervals + 1 interval ends."""
    n_steps = n_intervals * steps_per_interval
    dt = horizon / n_steps
    states = np.empty((n_intervals + 1, psi0.shape[0]), dtype=complex)
    states[0] = psi = psi0
    for interval in range(n_intervals):
        t0 = horizon * interval / n_intervals
        for start in range(0, steps_per_interval, CHUNK_STEPS):
            count = min(CHUNK_STEPS, steps_per_interval - start)
            midpoints = t0 + (start + np.arange(count) + 0.5) * dt
            psi = _ordered_product(_step_unitaries(h_batch(midpoints), dt)) @ psi
        states[interval + 1] = psi
    return states


def _steps_for(horizon: float, dt_max: float) -> int:
    return max(1, math.ceil(horizon / dt_max - 1e-9))


def propagate_hamiltonian(
    h_batch: HamiltonianBatch,
    horizon: float,
    psi0: StateVector,
    nu_max: float,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_N_SAMPLES,
    rate: float = 1.0,
    drift_tolerance: float = DEGRADED_NORM_DRIFT,
) -> Trajectory:
    """Integrates i psi' = H(t) psi on [0, horizon] for a vectorized H.

    Args:
        h_batch: Maps an array of k times to a (k, n, n) stack of Hermitian matrices.
        horizon: Final fast time.
        psi0: Unit-norm initial state.
        nu_max: Upper bound on the fastest frequency of H; sets dt.
        steps_per_period: Steps per period of nu_max.
        n_samples: Number of stored states at uniform times (endpoints included).
        rate: Factor mapping fast to slow time (eps1 * eps2).
        drift_tolerance: Norm drift above which the trajectory is flagged degraded.

    Returns:
        The decimated trajectory.
    """
    if steps_per_period < 1 or n_samples < 2:
        raise ArgumentError(
            f"Need steps_per_period >= 1 and n_samples >= 2, got {steps_per_period}, {n_samples}."
        )
    psi0 = as_state(psi0)
    dt_max = 2.0 * np.pi / (nu_max * steps_per_period)
    if dt_max > horizon:
        raise ArgumentError(f"Step {dt_max:.6g} exceeds the horizon {horizon:.6g}.")
    n_intervals = n_samples - 1
    steps_per_interval = _steps_for(horizon / n_intervals, dt_max)
    n_steps = n_intervals * steps_per_interval
    logger.debug(
        f"Midpoint integration: horizon {horizon:.6g}, nu_max {nu_max:.6g}, "
        f"{n_steps} steps of dt {horizon / n_steps:.6g}."
    )

    states = _integrate(h_batch, horizon, psi0, n_intervals, steps_per_interval)
    drift = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    degraded = drift > drift_tolerance
    if degraded:
        logger.warning(
            f"Norm drift {drift:.3e} exceeds {drift_tolerance:.1e}; trajectory flagged degraded."
        )
    return Trajectory(
        slow_times=np.linspace(0.0, horizon, n_samples) * rate,
        states=states,
        max_norm_drift=drift,
        degraded=degraded,
        dt=horizon / n_steps,
        n_steps=n_steps,
        rate=rate,
    )


def frequency_bound(sys: SampledSystem, ctrl: Control) -> float:
    """max(|lambda_n|, |lambda_1|, v1) + 2 eps1 max|delta| max u."""
    return max(abs(sys.lambdas[-1]), abs(sys.lambdas[0]), ctrl.max_carrier) + (
        2.0 * ctrl.eps1 * float(np.max(np.abs(sys.coupling))) * ctrl.max_envelope
    )


def system_hamiltonian_batch(sys: SampledSystem, ctrl: Control) -> HamiltonianBatch:
    drift = np.diag(sys.lambdas).astype(complex)
    coupling = sys.coupling.astype(complex)

    def h_batch(times: FloatArray) -> ComplexArray:
        amplitudes = np.atleast_1d(ctrl.amplitude(times))
        return drift[None, :, :] + amplitudes[:, None, None] * coupling[None, :, :]

    return h_batch


def propagate(
    sys: SampledSystem,
    ctrl: Control,
    psi0: StateVector,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_N_SAMPLES,
    drift_tolerance: float = DEGRADED_NORM_DRIFT,
) -> Trajectory:
    """Schrodinger dynamics of one sampled system under a pulse or a concatenation."""
    psi0 = as_state(psi0, sys.n)
    return propagate_hamiltonian(
        system_hamiltonian_batch(sys, ctrl),
        ctrl.horizon,
        psi0,
        frequency_bound(sys, ctrl),
        steps_per_period=steps_per_period,
        n_samples=n_samples,
        rate=ctrl.eps1 * ctrl.eps2,
        drift_tolerance=drift_tolerance,
    )


def fidelity(traj: Trajectory, q: int) -> FloatArray:
    """|<psi(s), e_q>|^2 at traj.slow_times."""
    n = traj.states.shape[1]
    if not 1 <= q <= n:
        raise ArgumentError(f"Level {q} out of range for an {n}-level system.")
    return np.abs(traj.states[:, q - 1]) ** 2


def distance_to_target(psi: StateVector, q: int) -> float:
    """min over theta of ||psi - e^{i theta} e_q|| = sqrt(2 - 2 |<psi, e_q>|)."""
    psi = np.asarray(psi, dtype=complex)
    if not 1 <= q <= psi.shape[0]:
        raise ArgumentError(f"Level {q} out of range for an {psi.shape[0]}-level system.")
    overlap = min(abs(psi[q - 1]), 1.0)
    return math.sqrt(max(0.0, 2.0 - 2.0 * overlap))


def reference_propagate_hamiltonian(
    h_batch: HamiltonianBatch,
    horizon: float,
    psi0: StateVector,
    nu_max: float,
    tol: float = 1e-10,
    start_steps_per_period: int = 16,
    max_doublings: int = 14,
) -> StateVector:
    """Richardson-extrapolated midpoint rule, doubling steps until two extrapolants agree to tol."""
    psi0 = as_state(psi0)
    n_steps = _steps_for(horizon, 2.0 * np.pi / (nu_max * start_steps_per_period))
    coarse = _integrate(h_batch, horizon, psi0, 1, n_steps)[-1]
    previous: Optional[StateVector] = None
    for doubling in range(max_doublings):
        n_steps *= 2
        fine = _integrate(h_batch, horizon, psi0, 1, n_steps)[-1]
        # Midpoint rule is symmetric: error expansion in even powers of dt
        extrapolated = (4.0 * fine - coarse) / 3.0
        if previous is not None:
            change = float(np.linalg.norm(extrapolated - previous))
            logger.debug(f"Richardson level {doubling}: {n_steps} steps, change {change:.3e}.")
            if change <= tol:
                return extrapolated / np.linalg.norm(extrapolated)
        previous, coarse = extrapolated, fine
    raise NumericError(
        f"Richardson extrapolation did not reach tol={tol:g} within {max_doublings} doublings "
        f"({n_steps} steps)."
    )


def reference_propagate(
    sys: SampledSystem,
    ctrl: Control,
    psi0: StateVector,
    tol: float = 1e-10,
    start_steps_per_period: int = 16,
    max_doublings: int = 14,
) -> StateVector:
    """Independent final-state oracle for short horizons."""
    return reference_propagate_hamiltonian(
        system_hamiltonian_batch(sys, ctrl),
        ctrl.horizon,
        as_state(psi0, sys.n),
        frequency_bound(sys, ctrl),
        tol=tol,
        start_steps_per_period=start_steps_per_period,
        max_doublings=max_doublings,
    )
