import logging
from functools import lru_cache
from typing import NamedTuple, Tuple, Union

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from chirpedensemble.core.frames.context import FrameContext, as_times, unbatch
from chirpedensemble.core.model import ComplexArray, FloatArray
from chirpedensemble.exceptions import SingularityError

logger = logging.getLogger(__name__)

TILDE_PHASE_GRID_POINTS = 40001
CROSSING_GRID_POINTS = 4001
CROSSING_HALF_WIDTHS = 10.0


class LambdaTheta(NamedTuple):
    lam: Union[float, FloatArray]
    theta: Union[float, FloatArray]
    theta_dot: Union[float, FloatArray]


class DressedQuantities(NamedTuple):
    lam: FloatArray
    lam_dot: FloatArray
    theta: FloatArray
    theta_dot: FloatArray


def dressed_quantities(ctx: FrameContext, s: FloatArray) -> DressedQuantities:
    """lambda_eps, theta_eps and their slow-time derivatives on an s array."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    env, chirp = ctx.pulse.envelope, ctx.pulse.chirp
    u, du = env.value(s), env.derivative(s)
    f, df = chirp.value(s), chirp.derivative(s)
    delta, eps1 = ctx.delta_pq, ctx.eps1

    detuning = ctx.delta_gap - f
    lam = np.sqrt(0.25 * detuning**2 + (eps1 * delta * u) ** 2)
    if np.any(lam == 0.0):
        s_bad = float(s[np.flatnonzero(lam == 0.0)[0]])
        raise SingularityError(f"lambda_eps vanishes at s = {s_bad:.12g} (u = 0 at the crossing).")
    theta = np.sign(delta) * np.arctan2(eps1 * abs(delta) * u, 0.5 * detuning)
    theta_dot = delta * eps1 * (detuning * du + df * u) / (2.0 * lam**2)
    lam_dot = (-0.5 * detuning * df + 2.0 * (eps1 * delta) ** 2 * u * du) / (2.0 * lam)
    return DressedQuantities(lam, lam_dot, theta, theta_dot)


def lambda_theta(ctx: FrameContext, s) -> LambdaTheta:
    """(lambda_eps(s), theta_eps(s), d theta_eps / ds)."""
    s_arr, scalar = as_times(s)
    dq = dressed_quantities(ctx, s_arr)
    if scalar:
        return LambdaTheta(float(dq.lam[0]), float(dq.theta[0]), float(dq.theta_dot[0]))
    return LambdaTheta(dq.lam, dq.theta, dq.theta_dot)


def crossing_width(ctx: FrameContext) -> float:
    s_bar = ctx.s_bar
    u = float(ctx.pulse.envelope.value(s_bar))
    df = float(ctx.pulse.chirp.derivative(s_bar))
    return max(ctx.eps1 * abs(ctx.delta_pq) * u / (0.5 * df), 1e-12)


@lru_cache(maxsize=32)
def _slow_tilde_phase(ctx: FrameContext) -> CubicSpline:
    """Spline of int_0^s lambda_eps, refined around the crossing where lambda_eps bends sharply."""
    t_slow = ctx.pulse.t_slow
    width = crossing_width(ctx)
    half = CROSSING_HALF_WIDTHS * width
    dense = np.linspace(max(0.0, ctx.s_bar - half), min(t_slow, ctx.s_bar + half), CROSSING_GRID_POINTS)
    grid = np.unique(np.concatenate([np.linspace(0.0, t_slow, TILDE_PHASE_GRID_POINTS), dense]))
    grid = grid[np.concatenate([[True], np.diff(grid) > 1e-13])]
    integral = cumulative_simpson(dressed_quantities(ctx, grid).lam, x=grid, initial=0.0)
    logger.debug(
        f"Built tilde-phase table on {grid.size} slow-time points (crossing width {width:.3e})."
    )
    return CubicSpline(grid, integral)


def tilde_phase(ctx: FrameContext, t) -> FloatArray:
    """phi~(t) = int_0^t lambda_eps(eps1 eps2 tau) d tau."""
    times = np.asarray(t, dtype=float)
    return _slow_tilde_phase(ctx)(ctx.rate * times) / ctx.rate


def u3_unitary(ctx: FrameContext, times: FloatArray) -> ComplexArray:
    half = 0.5 * (ctx.delta_gap * times - ctx.pulse.phase(times))
    out = np.zeros((times.size, ctx.n, ctx.n), dtype=complex)
    out[:, np.arange(ctx.n), np.arange(ctx.n)] = 1.0
    out[:, ctx.ip, ctx.ip] = np.exp(1j * half)
    out[:, ctx.iq, ctx.iq] = np.exp(-1j * half)
    return out


def u4_unitary(ctx: FrameContext, times: FloatArray) -> ComplexArray:
    theta = dressed_quantities(ctx, ctx.rate * times).theta
    phase = np.exp(-1j * tilde_phase(ctx, times))
    c, s = np.cos(0.5 * theta), np.sin(0.5 * theta)
    out = np.zeros((times.size, ctx.n, ctx.n), dtype=complex)
    out[:, np.arange(ctx.n), np.arange(ctx.n)] = 1.0
    ip, iq = ctx.ip, ctx.iq
    out[:, ip, ip] = c * phase
    out[:, ip, iq] = -s * phase
    out[:, iq, ip] = s * np.conj(phase)
    out[:, iq, iq] = c * np.conj(phase)
    return out


def frame_unitaries(ctx: FrameContext, t) -> Tuple[ComplexArray, ComplexArray]:
    """(U3(t), U4(t)): the detuning-phase frame and the dressed (p, q) rotation."""
    times, scalar = as_times(t)
    return unbatch(u3_unitary(ctx, times), scalar), unbatch(u4_unitary(ctx, times), scalar)
