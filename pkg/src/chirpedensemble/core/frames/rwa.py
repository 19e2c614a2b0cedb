"""Truncated Hamiltonians of the last frame, their back-transformed form and the
state maps that move a Schrodinger solution through the cascade.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm

from chirpedensemble.core.frames.adiabatic import (
    dressed_quantities,
    tilde_phase,
    u3_unitary,
    u4_unitary,
)
from chirpedensemble.core.frames.cascade import assemble, h_coefficients, x1_operator, x2_operator
from chirpedensemble.core.frames.context import FrameContext, as_times, unbatch
from chirpedensemble.core.frames.residuals import x5_operator
from chirpedensemble.core.model import ComplexArray, FloatArray
from chirpedensemble.core.propagator import (
    DEFAULT_N_SAMPLES,
    DEFAULT_STEPS_PER_PERIOD,
    StateVector,
    Trajectory,
    as_state,
    distance_to_target,
    propagate_hamiltonian,
)
from chirpedensemble.exceptions import ArgumentError

logger = logging.getLogger(__name__)

H0_GRID_POINTS = 401


class RwaHamiltonians(NamedTuple):
    truncated: ComplexArray  # H^_RWA, last frame
    decoupled: ComplexArray  # 2x2 block of H^_rwa on span(e_p, e_q)
    rwa: ComplexArray  # H^_rwa, second frame


def _h0_diagonal(ctx: FrameContext, times: FloatArray) -> FloatArray:
    h0 = h_coefficients(ctx, ctx.rate * times).h0
    diag = np.arange(ctx.n)
    return h0[:, diag, diag]


def truncated_batch(ctx: FrameContext, times: FloatArray) -> ComplexArray:
    """-(eps1 eps2 / 2) theta' B_pq(-2 phi~) + eps1^2 U4 diag(h0) U4^dagger."""
    theta_dot = dressed_quantities(ctx, ctx.rate * times).theta_dot
    coeff = np.zeros((times.size, ctx.n, ctx.n))
    phases = np.zeros((times.size, ctx.n, ctx.n))
    coeff[:, ctx.ip, ctx.iq] = -0.5 * ctx.rate * theta_dot
    phases[:, ctx.ip, ctx.iq] = -2.0 * tilde_phase(ctx, times)
    rotation = assemble(coeff, phases, "B")

    u4 = u4_unitary(ctx, times)
    h0 = _h0_diagonal(ctx, times)
    dressed = (u4 * h0[:, None, :]) @ np.conj(np.swapaxes(u4, -1, -2))
    return rotation + ctx.eps1**2 * dressed


def rwa_batch(ctx: FrameContext, times: FloatArray) -> ComplexArray:
    """eps1 delta_pq u A_pq(phi^1_pq) + eps1^2 diag(h0_jj)."""
    u = ctx.pulse.envelope.value(ctx.rate * times)
    out = np.zeros((times.size, ctx.n, ctx.n), dtype=complex)
    diag = np.arange(ctx.n)
    out[:, diag, diag] = ctx.eps1**2 * _h0_diagonal(ctx, times)
    off = ctx.eps1 * ctx.delta_pq * u * np.exp(1j * ctx.phases.phi_sigma(1, times)[:, ctx.ip, ctx.iq])
    out[:, ctx.ip, ctx.iq] += off
    out[:, ctx.iq, ctx.ip] += np.conj(off)
    return out


def decoupled_batch(ctx: FrameContext, times: FloatArray) -> ComplexArray:
    block = [ctx.ip, ctx.iq]
    return rwa_batch(ctx, times)[:, block][:, :, block]


def rwa_hamiltonians(ctx: FrameContext, t) -> RwaHamiltonians:
    times, scalar = as_times(t)
    rwa = rwa_batch(ctx, times)
    block = [ctx.ip, ctx.iq]
    return RwaHamiltonians(
        truncated=unbatch(truncated_batch(ctx, times), scalar),
        decoupled=unbatch(rwa[:, block][:, :, block], scalar),
        rwa=unbatch(rwa, scalar),
    )


def _h0_bound(ctx: FrameContext) -> float:
    grid = np.linspace(0.0, ctx.pulse.t_slow, H0_GRID_POINTS)
    h0 = h_coefficients(ctx, grid).h0
    diag = np.arange(ctx.n)
    return float(np.max(np.abs(h0[:, diag, diag])))


def _max_detuning(ctx: FrameContext) -> float:
    return max(abs(ctx.delta_gap - ctx.pulse.v0), abs(ctx.delta_gap - ctx.pulse.v1))


def rwa_frequency_bound(ctx: FrameContext) -> float:
    coupling = ctx.eps1 * abs(ctx.delta_pq) * ctx.pulse.max_envelope
    return _max_detuning(ctx) + 2.0 * coupling + 2.0 * ctx.eps1**2 * _h0_bound(ctx)


def truncated_frequency_bound(ctx: FrameContext) -> float:
    lam_max = 0.5 * _max_detuning(ctx) + ctx.eps1 * abs(ctx.delta_pq) * ctx.pulse.max_envelope
    return 2.0 * lam_max + 2.0 * ctx.eps1**2 * _h0_bound(ctx)


def propagate_rwa(
    ctx: FrameContext,
    psi0: StateVector,
    which: str = "rwa",
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_N_SAMPLES,
) -> Trajectory:
    """Integrates H^_rwa ("rwa"), H^_RWA ("truncated") or the 2x2 block ("decoupled")."""
    if which == "rwa":
        h_batch, nu = (lambda t: rwa_batch(ctx, t)), rwa_frequency_bound(ctx)
    elif which == "truncated":
        h_batch, nu = (lambda t: truncated_batch(ctx, t)), truncated_frequency_bound(ctx)
    elif which == "decoupled":
        h_batch, nu = (lambda t: decoupled_batch(ctx, t)), rwa_frequency_bound(ctx)
    else:
        raise ArgumentError(f"Unknown RWA Hamiltonian '{which}'.")
    return propagate_hamiltonian(
        h_batch,
        ctx.horizon,
        psi0,
        nu,
        steps_per_period=steps_per_period,
        n_samples=n_samples,
        rate=ctx.rate,
    )


def interaction_state(ctx: FrameContext, t: float, psi: StateVector) -> StateVector:
    """psi_I(t) = exp(i t D) psi(t) for the recentered drift D."""
    return np.exp(1j * t * ctx.lambdas) * np.asarray(psi, dtype=complex)


def frame_state_transform(
    ctx: FrameContext,
    t: float,
    psi_i: StateVector,
    stage: int = 5,
    x5: Optional[ComplexArray] = None,
) -> StateVector:
    """Maps psi_I(t) to psi^_stage(t).

    The stages compose exp(-i eps1 X1), exp(-i eps1^2 X2), U3, U4 and exp(-i eps1^2 X5)
    in that order.

    Args:
        ctx: Frame context.
        t: Fast time.
        psi_i: Interaction-frame state at t.
        stage: Last change of variables to apply, 1 to 5.
        x5: Precomputed X5(t); integrated on demand otherwise.

    Returns:
        The transformed state.
    """
    if stage not in (1, 2, 3, 4, 5):
        raise ArgumentError(f"stage must be in 1..5, got {stage}.")
    psi = as_state(psi_i, ctx.n)
    psi = expm(-1j * ctx.eps1 * x1_operator(ctx, t)) @ psi
    if stage >= 2:
        psi = expm(-1j * ctx.eps1**2 * x2_operator(ctx, t)) @ psi
    if stage >= 3:
        psi = u3_unitary(ctx, np.atleast_1d(float(t)))[0] @ psi
    if stage >= 4:
        psi = u4_unitary(ctx, np.atleast_1d(float(t)))[0] @ psi
    if stage == 5:
        x5 = x5_operator(ctx, t) if x5 is None else x5
        psi = expm(-1j * ctx.eps1**2 * x5) @ psi
    return psi


def back_transform(ctx: FrameContext, t: float, psi_hat: StateVector) -> StateVector:
    """U_back(t) psi^ with U_back = U3^dagger U4^dagger."""
    times = np.atleast_1d(float(t))
    u_back = u3_unitary(ctx, times)[0].conj().T @ u4_unitary(ctx, times)[0].conj().T
    return u_back @ np.asarray(psi_hat, dtype=complex)


@dataclass(frozen=True, eq=False)
class BlockDistance:
    distance: float
    ratio: float  # distance / (eps2 / eps1)
    trajectory: Trajectory


def decoupled_block_distance(
    ctx: FrameContext,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    n_samples: int = 201,
) -> BlockDistance:
    """Runs the 2x2 block from e_p and measures the phase-invariant distance to e_q."""
    traj = propagate_rwa(
        ctx,
        np.array([1.0, 0.0], dtype=complex),
        which="decoupled",
        steps_per_period=steps_per_period,
        n_samples=n_samples,
    )
    distance = distance_to_target(traj.final_state, 2)
    ratio = distance / (ctx.eps2 / ctx.eps1)
    logger.info(
        f"Decoupled block (eps1={ctx.eps1:.3g}, eps2={ctx.eps2:.3g}): "
        f"distance {distance:.3e}, ratio {ratio:.3e}."
    )
    return BlockDistance(distance, ratio, traj)


def truncation_bound(eps1: float, eps2: float) -> float:
    """eps1^{3/2} eps2^{-1/2} + eps1 + eps1^{5/2} eps2^{-3/2}."""
    return eps1**1.5 / math.sqrt(eps2) + eps1 + eps1**2.5 / eps2**1.5
