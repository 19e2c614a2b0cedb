import logging
from typing import List, Optional, Sequence, Tuple

from chirpedensemble.core.frames import FrameContext, verify_lemmas
from chirpedensemble.core.model import sample_system
from chirpedensemble.schemas.config_schemas import RunConfig
from chirpedensemble.schemas.lemma_schemas import LemmaDiagnostics
from chirpedensemble.services.config_loader import (
    ensemble_from_config,
    pulse_from_segment,
    resolve_eps1,
)

logger = logging.getLogger(__name__)


def context_from_config(config: RunConfig, eps1: Optional[float] = None) -> FrameContext:
    """Frame context of the first configured alpha and the first pulse segment."""
    eps1 = resolve_eps1(config, eps1)
    eps2 = config.run.eps2_for(eps1)
    sys = sample_system(
        ensemble_from_config(config), config.system.alpha_list()[0], config.run.delta_choice
    )
    pulse = pulse_from_segment(config.pulse.segments[0], eps1, eps2)
    return FrameContext.build(sys, pulse, config.run.p, config.run.q)


def eps_pairs(config: RunConfig) -> List[Tuple[float, float]]:
    eps1_values = config.run.eps1_list or [config.run.eps1]
    return [(e, config.run.eps2_for(e)) for e in eps1_values]


def run_frames(
    config: RunConfig,
    steps_per_period: int,
    include_residuals: bool = True,
    include_propagation: bool = False,
    include_adiabatic: bool = True,
    pairs: Optional[Sequence[Tuple[float, float]]] = None,
) -> List[LemmaDiagnostics]:
    """Frame-cascade diagnostics at every configured scale."""
    ctx = context_from_config(config)
    pairs = list(pairs) if pairs is not None else eps_pairs(config)
    logger.info(f"Frame diagnostics for (p, q) = ({ctx.p}, {ctx.q}) at {len(pairs)} scale(s).")
    return verify_lemmas(
        ctx,
        pairs,
        include_residuals=include_residuals,
        include_propagation=include_propagation,
        include_adiabatic=include_adiabatic,
        steps_per_period=steps_per_period,
    )
