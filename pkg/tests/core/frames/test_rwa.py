import numpy as np
import pytest

from chirpedensemble.core.frames import (
    back_transform,
    decoupled_block_distance,
    frame_state_transform,
    frame_unitaries,
    rwa_hamiltonians,
)
from chirpedensemble.core.frames.rwa import truncation_bound, propagate_rwa
from chirpedensemble.core.propagator import basis_state
from chirpedensemble.exceptions import ArgumentError


def _frame(ctx, t: float) -> np.ndarray:
    u3, u4 = frame_unitaries(ctx, t)
    return u4 @ u3


def test_decoupled_block_is_projection(four_level_context):
    times = np.array([10.0, 55.0])
    hams = rwa_hamiltonians(four_level_context, times)
    np.testing.assert_allclose(hams.decoupled, hams.rwa[:, 2:, 2:], atol=1e-10)
    assert hams.truncated.shape == (2, 4, 4)


@pytest.mark.parametrize("t", [20.0, 50.0, 80.0])
def test_truncated_hamiltonian_is_rotated_rwa(four_level_context, t):
    """H^_RWA = U H^_rwa U^dagger + i (dU/dt) U^dagger with U = U4 U3."""
    ctx = four_level_context
    h = 1e-4
    U = _frame(ctx, t)
    dU = (_frame(ctx, t + h) - _frame(ctx, t - h)) / (2 * h)
    hams = rwa_hamiltonians(ctx, t)
    expected = U @ hams.rwa @ U.conj().T + 1j * dU @ U.conj().T
    np.testing.assert_allclose(hams.truncated, expected, atol=1e-6)


def test_hamiltonians_are_hermitian(four_level_context):
    hams = rwa_hamiltonians(four_level_context, 47.0)
    for m in hams:
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)


def test_near_identity_stages_vanish_at_endpoints(four_level_context):
    rng = np.random.default_rng(3)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    for t in (0.0, four_level_context.horizon):
        np.testing.assert_allclose(frame_state_transform(four_level_context, t, psi, stage=2), psi, atol=1e-8)


def test_back_transform_inverts_frames(four_level_context):
    rng = np.random.default_rng(5)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    t = 63.0
    np.testing.assert_allclose(back_transform(four_level_context, t, _frame(four_level_context, t) @ psi), psi, atol=1e-12)


def test_frame_state_transform_rejects_stage(four_level_context):
    with pytest.raises(ArgumentError):
        frame_state_transform(four_level_context, 1.0, basis_state(4, 1), stage=6)


def test_propagate_rwa_choices(two_level_context):
    traj = propagate_rwa(two_level_context, basis_state(2, 1), "rwa", steps_per_period=20, n_samples=11)
    assert traj.states.shape == (11, 2)
    assert not traj.degraded
    with pytest.raises(ArgumentError):
        propagate_rwa(two_level_context, basis_state(2, 1), "full")


def test_decoupled_block_inverts_population(two_level_context):
    ctx = two_level_context.with_eps(0.1, 0.01)
    block = decoupled_block_distance(ctx, steps_per_period=200)
    assert block.distance < 0.1
    assert block.ratio == pytest.approx(block.distance / 0.1)
    assert block.trajectory.slow_times[-1] == pytest.approx(1.0)


def test_truncation_bound_sums_the_scales():
    assert truncation_bound(0.01, 0.01) == pytest.approx(0.01 + 0.01 + 0.01)
