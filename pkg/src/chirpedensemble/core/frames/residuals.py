import logging
import math
from dataclasses import dataclass
from typing import Dict, Literal, NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from chirpedensemble.core.frames.adiabatic import dressed_quantities, tilde_phase
from chirpedensemble.core.frames.cascade import assemble, h_coefficients
from chirpedensemble.core.frames.context import FrameContext, as_times, unbatch
from chirpedensemble.core.model import ComplexArray, FloatArray
from chirpedensemble.exceptions import ArgumentError

logger = logging.getLogger(__name__)

RESIDUAL_NAMES = ("R", "R_pq", "R_p", "R_q")
DEFAULT_RESIDUAL_STEPS_PER_PERIOD = 16
DEFAULT_RESIDUAL_SAMPLES = 201
RESIDUAL_CHUNK_STEPS = 20_000


class Residuals(NamedTuple):
    R: ComplexArray
    R_pq: ComplexArray
    R_p: ComplexArray
    R_q: ComplexArray


def _put(out: ComplexArray, row: int, col: int, values: ComplexArray) -> None:
    """Adds values at (row, col) of a batch, row < col, and the conjugate at (col, row)."""
    out[:, row, col] += values
    out[:, col, row] += np.conj(values)


def residual_batch(ctx: FrameContext, times: FloatArray) -> Residuals:
    s = ctx.rate * times
    h2 = h_coefficients(ctx, s).h2
    phi = ctx.pulse.phase(times)
    tphi = tilde_phase(ctx, times)
    theta = dressed_quantities(ctx, s).theta
    c, sn = np.cos(0.5 * theta), np.sin(0.5 * theta)
    n, ip, iq = ctx.n, ctx.ip, ctx.iq
    lam = ctx.lambdas
    batch = times.size

    # R: pairs away from the target levels, phase phi^2_jk
    mask = np.zeros((n, n), dtype=bool)
    for j, k in ctx.phases.index_k():
        mask[j - 1, k - 1] = True
    R = assemble(np.where(mask[None], h2, 0.0), ctx.phases.phi_sigma(2, times))

    # R~_pq: dressed target block
    h_pq = h2[:, ip, iq]
    R_pq = np.zeros((batch, n, n), dtype=complex)
    R_pq[:, ip, ip] = -np.sin(theta) * h_pq * np.cos(phi)
    R_pq[:, iq, iq] = np.sin(theta) * h_pq * np.cos(phi)
    _put(
        R_pq,
        ip,
        iq,
        c**2 * h_pq * np.exp(1j * (-2.0 * tphi + phi))
        - sn**2 * h_pq * np.exp(1j * (-2.0 * tphi - phi)),
    )

    # R~_p and R~_q: couplings of the other levels to the dressed pair
    R_p = np.zeros((batch, n, n), dtype=complex)
    R_q = np.zeros((batch, n, n), dtype=complex)
    for j in range(n):
        if j in (ip, iq):
            continue
        h_jp = h2[:, min(j, ip), max(j, ip)]
        h_jq = h2[:, min(j, iq), max(j, iq)]
        lt = lam[j] * times
        if j < ip:
            p_c, p_s = lt + tphi + 2.5 * phi, lt + tphi + 1.5 * phi
            q_c, q_s = lt - tphi + 1.5 * phi, lt - tphi + 2.5 * phi
        elif j < iq:
            p_c, p_s = -tphi - lt + 1.5 * phi, -tphi - lt - 1.5 * phi
            q_c, q_s = lt - tphi + 1.5 * phi, lt - tphi - 1.5 * phi
        else:
            p_c, p_s = -tphi - lt + 1.5 * phi, -tphi - lt + 2.5 * phi
            q_c, q_s = tphi - lt + 2.5 * phi, tphi - lt + 1.5 * phi
        _put(
            R_p,
            min(j, ip),
            max(j, ip),
            c * h_jp * np.exp(1j * p_c) - sn * h_jq * np.exp(1j * p_s),
        )
        _put(
            R_q,
            min(j, iq),
            max(j, iq),
            sn * h_jp * np.exp(1j * q_s) + c * h_jq * np.exp(1j * q_c),
        )
    return Residuals(R, R_pq, R_p, R_q)


def residuals(ctx: FrameContext, t) -> Residuals:
    """(R, R~_pq, R~_p, R~_q) at fast time t."""
    times, scalar = as_times(t)
    batch = residual_batch(ctx, times)
    return Residuals(*(unbatch(m, scalar) for m in batch))


def residual_frequency_bound(ctx: FrameContext) -> float:
    """Upper bound on the phase rates appearing in the residuals."""
    lam_max = float(np.max(np.abs(ctx.lambdas)))
    detuning = max(abs(ctx.delta_gap - ctx.pulse.v0), abs(ctx.delta_gap - ctx.pulse.v1))
    dressed = 0.5 * detuning + ctx.eps1 * abs(ctx.delta_pq) * ctx.pulse.max_envelope
    return 2.0 * lam_max + 2.5 * ctx.pulse.v1 + 2.0 * dressed


@dataclass(frozen=True, eq=False)
class ResidualIntegrals:
    """Running integrals int_0^t of each residual at sample times, plus their sup norms."""

    times: FloatArray
    integrals: Dict[str, ComplexArray]  # name -> (n_samples, n, n)
    sup_norms: Dict[str, float]  # Frobenius norm, sup over every quadrature node

    def x5(self) -> ComplexArray:
        """X5 at the sample times."""
        return -sum(self.integrals[name] for name in RESIDUAL_NAMES)


def cumulative_integral(
    values: ComplexArray, x: FloatArray, rule: Literal["simpson", "trapezoid"] = "simpson"
) -> ComplexArray:
    """Running integral along axis 0, starting at 0; complex input is integrated part by part."""
    integrate = cumulative_simpson if rule == "simpson" else cumulative_trapezoid
    values = np.asarray(values)
    # cumulative_simpson writes into a real buffer and drops imaginary parts
    real = integrate(values.real, x=x, axis=0, initial=0.0)
    if not np.iscomplexobj(values):
        return real
    return real + 1j * integrate(values.imag, x=x, axis=0, initial=0.0)


def integrate_residuals(
    ctx: FrameContext,
    t_end: float = None,
    steps_per_period: int = DEFAULT_RESIDUAL_STEPS_PER_PERIOD,
    n_samples: int = DEFAULT_RESIDUAL_SAMPLES,
    rule: Literal["simpson", "trapezoid"] = "simpson",
) -> ResidualIntegrals:
    """Cumulative quadrature of the four residual families on a uniform fast-time grid."""
    if rule not in ("simpson", "trapezoid"):
        raise ArgumentError(f"Unknown quadrature rule '{rule}'.")
    if n_samples < 2:
        raise ArgumentError(f"n_samples must be >= 2, got {n_samples}.")
    t_end = ctx.horizon if t_end is None else float(t_end)
    if not 0.0 <= t_end <= ctx.horizon * (1 + 1e-12):
        raise ArgumentError(f"t_end = {t_end} outside [0, {ctx.horizon}].")
    sample_times = np.linspace(0.0, t_end, n_samples)
    n = ctx.n
    integrals = {name: np.zeros((n_samples, n, n), dtype=complex) for name in RESIDUAL_NAMES}
    sup_norms = {name: 0.0 for name in RESIDUAL_NAMES}
    if t_end == 0.0:
        return ResidualIntegrals(sample_times, integrals, sup_norms)

    dt_max = 2.0 * math.pi / (residual_frequency_bound(ctx) * steps_per_period)
    interval = t_end / (n_samples - 1)
    # Long intervals are cut into chunks; an even step count per chunk keeps Simpson's rule composite
    chunks = max(1, math.ceil(interval / (dt_max * RESIDUAL_CHUNK_STEPS)))
    steps = max(2, math.ceil(interval / (dt_max * chunks)))
    steps += steps % 2
    logger.debug(
        f"Residual quadrature ({rule}): {steps * chunks * (n_samples - 1)} steps up to t = {t_end:.6g}."
    )

    running = {name: np.zeros((n, n), dtype=complex) for name in RESIDUAL_NAMES}
    for i in range(n_samples - 1):
        edges = np.linspace(sample_times[i], sample_times[i + 1], chunks + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            nodes = np.linspace(a, b, steps + 1)
            values = residual_batch(ctx, nodes)
            for name, family in zip(RESIDUAL_NAMES, values):
                partial = cumulative_integral(family, nodes, rule) + running[name]
                sup_norms[name] = max(
                    sup_norms[name], float(np.max(np.linalg.norm(partial, axis=(1, 2))))
                )
                running[name] = partial[-1]
        for name in RESIDUAL_NAMES:
            integrals[name][i + 1] = running[name]
    return ResidualIntegrals(sample_times, integrals, sup_norms)


def x5_operator(
    ctx: FrameContext,
    t: float,
    steps_per_period: int = DEFAULT_RESIDUAL_STEPS_PER_PERIOD,
    rule: Literal["simpson", "trapezoid"] = "simpson",
) -> ComplexArray:
    """X5(t) = -int_0^t (R + R~_pq + R~_p + R~_q)."""
    result = integrate_residuals(ctx, t_end=t, steps_per_period=steps_per_period, n_samples=2, rule=rule)
    x5 = result.x5()[-1]
    return 0.5 * (x5 + x5.conj().T)
