from chirpedensemble.core.frames.adiabatic import frame_unitaries, lambda_theta, tilde_phase
from chirpedensemble.core.frames.cascade import (
    basis_AB,
    bch_transform,
    h_coefficients,
    interaction_hamiltonian,
    x1_operator,
    x2_operator,
)
from chirpedensemble.core.frames.context import FrameContext, PhaseFamily
from chirpedensemble.core.frames.lemmas import verify_lemmas
from chirpedensemble.core.frames.residuals import integrate_residuals, residuals, x5_operator
from chirpedensemble.core.frames.rwa import (
    back_transform,
    decoupled_block_distance,
    frame_state_transform,
    rwa_hamiltonians,
)

__all__ = [
    "FrameContext",
    "PhaseFamily",
    "back_transform",
    "basis_AB",
    "bch_transform",
    "decoupled_block_distance",
    "frame_state_transform",
    "frame_unitaries",
    "h_coefficients",
    "integrate_residuals",
    "interaction_hamiltonian",
    "lambda_theta",
    "residuals",
    "rwa_hamiltonians",
    "tilde_phase",
    "verify_lemmas",
    "x1_operator",
    "x2_operator",
    "x5_operator",
]
