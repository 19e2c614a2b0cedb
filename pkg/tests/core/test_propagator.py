import math

import numpy as np
import pytest
from scipy.linalg import expm

from chirpedensemble.core.control import concat, synthesize_standard
from chirpedensemble.core.propagator import (
    as_state,
    basis_state,
    distance_to_target,
    fidelity,
    propagate,
    propagate_hamiltonian,
    reference_propagate,
)
from chirpedensemble.exceptions import ArgumentError, NumericError

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)

RABI_DETUNING = 3.0
RABI_STRENGTH = 0.5
RABI_HORIZON = 20.0
RABI_NU_MAX = 3.5


def _rabi_batch(times):
    t = np.atleast_1d(times)[:, None, None]
    w = RABI_DETUNING
    return 0.5 * RABI_STRENGTH * (np.cos(w * t) * SIGMA_X + np.sin(w * t) * SIGMA_Y) + 0.5 * w * SIGMA_Z


def _rabi_exact(psi0):
    T = RABI_HORIZON
    return expm(-0.5j * RABI_DETUNING * T * SIGMA_Z) @ expm(-0.5j * RABI_STRENGTH * T * SIGMA_X) @ psi0


def _rabi_error(steps_per_period: int) -> float:
    psi0 = basis_state(2, 1)
    traj = propagate_hamiltonian(
        _rabi_batch, RABI_HORIZON, psi0, RABI_NU_MAX, steps_per_period=steps_per_period, n_samples=2
    )
    return float(np.linalg.norm(traj.final_state - _rabi_exact(psi0)))


def test_basis_state_is_one_based():
    np.testing.assert_array_equal(basis_state(3, 1), [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(basis_state(3, 3), [0.0, 0.0, 1.0])
    with pytest.raises(ArgumentError):
        basis_state(3, 0)
    with pytest.raises(ArgumentError):
        basis_state(3, 4)


def test_as_state_requires_unit_norm():
    np.testing.assert_allclose(as_state([0.6, 0.8j]), [0.6, 0.8j])
    with pytest.raises(ArgumentError):
        as_state([1.0, 1.0])
    with pytest.raises(ArgumentError):
        as_state([1.0, 0.0], n=3)


def test_constant_hamiltonian_matches_expm():
    rng = np.random.default_rng(7)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    H = 0.5 * (a + a.conj().T)
    psi0 = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi0 /= np.linalg.norm(psi0)
    horizon = 3.0
    nu_max = float(np.max(np.abs(np.linalg.eigvalsh(H))))

    traj = propagate_hamiltonian(
        lambda t: np.broadcast_to(H, (np.size(t), 4, 4)), horizon, psi0, nu_max, n_samples=7
    )
    np.testing.assert_allclose(traj.final_state, expm(-1j * horizon * H) @ psi0, atol=1e-10)
    np.testing.assert_allclose(traj.states[3], expm(-0.5j * horizon * H) @ psi0, atol=1e-10)


def test_rabi_oscillation_matches_closed_form():
    assert _rabi_error(2000) <= 1e-4


def test_midpoint_rule_is_second_order():
    ratio = _rabi_error(100) / _rabi_error(200)
    assert 3.5 < ratio < 4.5


def test_trajectory_layout_and_norm(two_level_system):
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    traj = propagate(two_level_system, pulse, basis_state(2, 1), steps_per_period=20, n_samples=51)
    assert traj.states.shape == (51, 2)
    assert traj.slow_times[0] == 0.0
    assert traj.slow_times[-1] == pytest.approx(pulse.t_slow)
    np.testing.assert_allclose(traj.fast_times[-1], pulse.horizon)
    assert traj.max_norm_drift <= 1e-9
    assert not traj.degraded
    np.testing.assert_allclose(traj.norms(), 1.0, atol=1e-9)
    np.testing.assert_allclose(traj.populations().sum(axis=1), 1.0, atol=1e-9)


def test_propagate_accepts_concatenation(two_level_system):
    control = concat([synthesize_standard(3.0, 5.0, 0.1, 0.1), synthesize_standard(3.0, 5.0, 0.1, 0.1)])
    traj = propagate(two_level_system, control, basis_state(2, 1), steps_per_period=20, n_samples=11)
    assert traj.slow_times[-1] == pytest.approx(2.0)
    assert not traj.degraded


def test_non_hermitian_hamiltonian_is_rejected():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(NumericError):
        propagate_hamiltonian(lambda t: np.broadcast_to(bad, (np.size(t), 2, 2)), 1.0, basis_state(2, 1), 1.0)


def test_step_larger_than_horizon_is_rejected():
    zero = np.zeros((2, 2), dtype=complex)
    with pytest.raises(ArgumentError):
        propagate_hamiltonian(
            lambda t: np.broadcast_to(zero, (np.size(t), 2, 2)),
            1.0,
            basis_state(2, 1),
            nu_max=0.1,
            steps_per_period=1,
        )
    with pytest.raises(ArgumentError):
        propagate_hamiltonian(
            lambda t: np.broadcast_to(zero, (np.size(t), 2, 2)), 1.0, basis_state(2, 1), 1.0, n_samples=1
        )


def test_fidelity_and_distance():
    assert distance_to_target(np.array([0.0, 1.0j]), 2) == pytest.approx(0.0)
    assert distance_to_target(np.array([1.0, 0.0]), 2) == pytest.approx(math.sqrt(2.0))
    psi = np.array([0.6, 0.8])
    assert distance_to_target(psi, 2) == pytest.approx(math.sqrt(2.0 - 1.6))
    with pytest.raises(ArgumentError):
        distance_to_target(psi, 3)


def test_fidelity_starts_at_one_on_initial_level(two_level_system):
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    traj = propagate(two_level_system, pulse, basis_state(2, 2), steps_per_period=20, n_samples=11)
    fid = fidelity(traj, 2)
    assert fid.shape == (11,)
    assert fid[0] == pytest.approx(1.0)
    with pytest.raises(ArgumentError):
        fidelity(traj, 0)


def test_agrees_with_reference_and_converges(two_level_system):
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    psi0 = basis_state(2, 1)
    ref = reference_propagate(two_level_system, pulse, psi0, tol=1e-10)
    errors = [
        float(np.linalg.norm(propagate(two_level_system, pulse, psi0, steps_per_period=spp, n_samples=2).final_state - ref))
        for spp in (200, 400)
    ]
    assert errors[0] <= 2e-2
    assert 3.2 < errors[0] / errors[1] < 4.8


@pytest.mark.slow
def test_long_horizon_reaches_reference_accuracy(two_level_system):
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.01)  # horizon 1000
    psi0 = basis_state(2, 1)
    ref = reference_propagate(two_level_system, pulse, psi0, tol=1e-10)

    def error(spp: int) -> float:
        final = propagate(two_level_system, pulse, psi0, steps_per_period=spp, n_samples=2).final_state
        return float(np.linalg.norm(final - ref))

    coarse = error(2000)
    # Second order: pick the resolution predicted to land a factor 4 under 1e-6
    fine_spp = max(2000, math.ceil(2000 * math.sqrt(coarse / 2.5e-7)))
    assert error(fine_spp) <= 1e-6
