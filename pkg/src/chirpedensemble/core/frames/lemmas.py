import logging
import math
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from chirpedensemble.core.frames.adiabatic import crossing_width, dressed_quantities
from chirpedensemble.core.frames.context import FrameContext
from chirpedensemble.core.frames.residuals import (
    DEFAULT_RESIDUAL_STEPS_PER_PERIOD,
    integrate_residuals,
)
from chirpedensemble.core.frames.rwa import (
    back_transform,
    decoupled_block_distance,
    frame_state_transform,
    interaction_state,
    propagate_rwa,
    truncation_bound,
)
from chirpedensemble.core.propagator import DEFAULT_STEPS_PER_PERIOD, basis_state, propagate
from chirpedensemble.exceptions import ArgumentError
from chirpedensemble.schemas.lemma_schemas import LemmaDiagnostics

logger = logging.getLogger(__name__)

MARGIN_GRID_POINTS = 10_000
EpsSpec = Union[float, Tuple[float, float]]


def _eps_pairs(eps_list: Iterable[EpsSpec]) -> List[Tuple[float, float]]:
    pairs = []
    for item in eps_list:
        eps1, eps2 = (item, item) if np.isscalar(item) else item
        eps1, eps2 = float(eps1), float(eps2)
        if not (0.0 < eps1 < 1.0 and 0.0 < eps2 < 1.0):
            raise ArgumentError(f"Inadmissible scales (eps1={eps1}, eps2={eps2}); need both in (0, 1).")
        pairs.append((eps1, eps2))
    if not pairs:
        raise ArgumentError("eps_list is empty.")
    return pairs


def theta_dot_sup(ctx: FrameContext) -> float:
    """sup |theta'| on a dense grid, refined by a bounded scalar search around the grid maximum."""
    grid = np.linspace(0.0, ctx.pulse.t_slow, MARGIN_GRID_POINTS)
    values = np.abs(dressed_quantities(ctx, grid).theta_dot)
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    best = float(values[i])
    if hi > lo:
        result = minimize_scalar(
            lambda s: -abs(float(dressed_quantities(ctx, s).theta_dot[0])),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-14},
        )
        best = max(best, -float(result.fun))
    return best


def theta_total_variation(ctx: FrameContext) -> float:
    """int_0^T |theta'(s)| ds with break points around the crossing."""
    width = crossing_width(ctx)
    t_slow = ctx.pulse.t_slow
    points = sorted(
        {min(max(ctx.s_bar + k * width, 0.0), t_slow) for k in (-10.0, -1.0, 0.0, 1.0, 10.0)}
        - {0.0, t_slow}
    )
    value, error = quad(
        lambda s: abs(float(dressed_quantities(ctx, s).theta_dot[0])),
        0.0,
        t_slow,
        points=points or None,
        limit=1000,
        epsabs=1e-10,
        epsrel=1e-10,
    )
    logger.debug(f"Total variation of theta: {value:.10g} (quadrature error {error:.1e}).")
    return float(value)


def monotonicity_margins(ctx: FrameContext) -> Tuple[float, float]:
    """Minima of (-2 lam' + f') - f'/2 on [0, s_bar] and of (-2 lam + f) - Delta/2 on [s_bar, T]."""
    before = np.linspace(0.0, ctx.s_bar, MARGIN_GRID_POINTS)
    after = np.linspace(ctx.s_bar, ctx.pulse.t_slow, MARGIN_GRID_POINTS)
    chirp = ctx.pulse.chirp
    dq = dressed_quantities(ctx, before)
    margin_before = -2.0 * dq.lam_dot + 0.5 * chirp.derivative(before)
    dq = dressed_quantities(ctx, after)
    margin_after = -2.0 * dq.lam + chirp.value(after) - 0.5 * ctx.delta_gap
    return float(np.min(margin_before)), float(np.min(margin_after))


def derivative_margin(ctx: FrameContext) -> float:
    """min over [0, T] of |f'| - |lam'|."""
    grid = np.linspace(0.0, ctx.pulse.t_slow, MARGIN_GRID_POINTS)
    lam_dot = dressed_quantities(ctx, grid).lam_dot
    return float(np.min(np.abs(ctx.pulse.chirp.derivative(grid)) - np.abs(lam_dot)))


def _propagation_diagnostics(
    ctx: FrameContext, steps_per_period: int, x5_final: np.ndarray
) -> Tuple[float, float, float]:
    """Final-time distances of the truncated and back-transformed dynamics, started from e_p.

    Both reduced dynamics start from the frame images of psi_I(0) = e_p, so the initial
    distance measures how far the composed changes of variables are from the identity at t = 0.
    """
    psi0 = basis_state(ctx.n, ctx.p)
    horizon = ctx.horizon
    full = propagate(ctx.sys, ctx.pulse, psi0, steps_per_period=steps_per_period, n_samples=2)
    psi_i_final = interaction_state(ctx, horizon, full.final_state)

    psi5_initial = frame_state_transform(ctx, 0.0, psi0, stage=5, x5=np.zeros((ctx.n, ctx.n)))
    psi5_final = frame_state_transform(ctx, horizon, psi_i_final, stage=5, x5=x5_final)
    truncated = propagate_rwa(ctx, psi5_initial, "truncated", steps_per_period, n_samples=2)
    truncation_distance = float(np.linalg.norm(truncated.final_state - psi5_final))

    rwa_initial = back_transform(ctx, 0.0, psi5_initial)
    initial = float(np.linalg.norm(rwa_initial - psi0))
    rwa = propagate_rwa(ctx, rwa_initial, "rwa", steps_per_period, n_samples=2)
    final = float(np.linalg.norm(rwa.final_state - psi_i_final))
    return truncation_distance, initial, final


def diagnose(
    ctx: FrameContext,
    include_residuals: bool = True,
    include_propagation: bool = False,
    include_adiabatic: bool = True,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    residual_steps_per_period: int = DEFAULT_RESIDUAL_STEPS_PER_PERIOD,
) -> LemmaDiagnostics:
    """All requested diagnostics at the scales carried by ctx."""
    eps1, eps2 = ctx.eps1, ctx.eps2
    sup_dot = theta_dot_sup(ctx)
    before, after = monotonicity_margins(ctx)
    fields = dict(
        eps1=eps1,
        eps2=eps2,
        theta_dot_sup=sup_dot,
        theta_dot_ratio=eps1 * sup_dot,
        theta_total_variation=theta_total_variation(ctx),
        monotonicity_margin_before=before,
        monotonicity_margin_after=after,
        derivative_margin=derivative_margin(ctx),
    )

    x5_final = None
    if include_residuals or include_propagation:
        integrals = integrate_residuals(ctx, steps_per_period=residual_steps_per_period)
        x5_final = integrals.x5()[-1]
        x5_final = 0.5 * (x5_final + x5_final.conj().T)
        if include_residuals:
            scale = math.sqrt(eps1 * eps2)
            fields["residual_sups"] = dict(integrals.sup_norms)
            fields["residual_ratios"] = {k: scale * v for k, v in integrals.sup_norms.items()}

    if include_propagation:
        truncation, initial, final = _propagation_diagnostics(ctx, steps_per_period, x5_final)
        fields.update(
            truncation_distance=truncation,
            truncation_bound=truncation_bound(eps1, eps2),
            rwa_initial_distance=initial,
            rwa_final_distance=final,
        )

    if include_adiabatic:
        block = decoupled_block_distance(ctx, steps_per_period=steps_per_period)
        fields.update(adiabatic_distance=block.distance, adiabatic_ratio=block.ratio)

    return LemmaDiagnostics(**fields)


def verify_lemmas(
    ctx: FrameContext,
    eps_list: Sequence[EpsSpec],
    include_residuals: bool = True,
    include_propagation: bool = False,
    include_adiabatic: bool = True,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    residual_steps_per_period: int = DEFAULT_RESIDUAL_STEPS_PER_PERIOD,
) -> List[LemmaDiagnostics]:
    """One diagnostics row per scale pair; a bare float eps means eps1 = eps2 = eps.

    Args:
        ctx: Frame context; its pulse shape is reused at every scale.
        eps_list: Scales as floats or (eps1, eps2) pairs, each in (0, 1).
        include_residuals: Integrate the four residual families (cost grows like 1/(eps1 eps2)).
        include_propagation: Also propagate the full, truncated and back-transformed dynamics.
        include_adiabatic: Run the decoupled 2x2 block.
        steps_per_period: Integrator resolution for the propagations.
        residual_steps_per_period: Quadrature resolution for the residual integrals.

    Returns:
        Diagnostics in the order of eps_list.
    """
    rows = []
    for eps1, eps2 in _eps_pairs(eps_list):
        logger.info(f"Frame diagnostics at eps1={eps1:.3g}, eps2={eps2:.3g}.")
        rows.append(
            diagnose(
                ctx.with_eps(eps1, eps2),
                include_residuals=include_residuals,
                include_propagation=include_propagation,
                include_adiabatic=include_adiabatic,
                steps_per_period=steps_per_period,
                residual_steps_per_period=residual_steps_per_period,
            )
        )
    return rows
