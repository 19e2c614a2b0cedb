import numpy as np
import pytest

from chirpedensemble.core.control import (
    PiecewiseControl,
    concat,
    evaluate,
    omega,
    phase_phi,
    synthesize_standard,
    synthesize_tabulated,
)
from chirpedensemble.exceptions import ArgumentError, DomainError


def test_standard_pulse_horizon_and_endpoints():
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.01)
    assert pulse.rate == pytest.approx(1e-3)
    assert pulse.horizon == pytest.approx(1000.0)
    assert omega(pulse, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert omega(pulse, pulse.horizon) == pytest.approx(0.0, abs=1e-15)
    t = np.linspace(0.0, pulse.horizon, 5001)
    assert np.max(np.abs(omega(pulse, t))) <= 2.0 * pulse.eps1 + 1e-15


def test_linear_phase_closed_form():
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    t = np.linspace(0.0, pulse.horizon, 11)
    expected = 3.0 * t + pulse.rate * 2.0 * t**2 / 2.0
    np.testing.assert_allclose(phase_phi(pulse, t), expected, rtol=1e-13)


def test_phase_derivative_is_carrier_frequency():
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    t = np.array([10.0, 50.0, 90.0])
    h = 1e-4
    numeric = (phase_phi(pulse, t + h) - phase_phi(pulse, t - h)) / (2 * h)
    np.testing.assert_allclose(numeric, pulse.chirp.value(pulse.rate * t), rtol=1e-8)


@pytest.mark.parametrize(
    "v0, v1, eps1, eps2",
    [(5.0, 3.0, 0.1, 0.1), (0.0, 3.0, 0.1, 0.1), (3.0, 5.0, 0.0, 0.1), (3.0, 5.0, 0.1, -0.1)],
)
def test_standard_pulse_rejects_bad_arguments(v0, v1, eps1, eps2):
    with pytest.raises(ArgumentError):
        synthesize_standard(v0, v1, eps1, eps2)


def test_time_outside_horizon():
    pulse = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    with pytest.raises(DomainError):
        omega(pulse, pulse.horizon * 1.01)
    with pytest.raises(DomainError):
        omega(pulse, -1.0)


def test_tabulated_pulse_matches_standard():
    s = np.linspace(0.0, 1.0, 401)
    tabulated = synthesize_tabulated(s, np.sin(np.pi * s), 3.0 + 2.0 * s, 0.1, 0.1)
    standard = synthesize_standard(3.0, 5.0, 0.1, 0.1)
    assert tabulated.v0 == pytest.approx(3.0)
    assert tabulated.v1 == pytest.approx(5.0)
    t = np.linspace(0.0, standard.horizon, 101)
    # A cubic spline reproduces a linear chirp exactly, so the phases agree to rounding
    np.testing.assert_allclose(phase_phi(tabulated, t), phase_phi(standard, t), rtol=1e-10, atol=1e-9)
    np.testing.assert_allclose(omega(tabulated, t), omega(standard, t), atol=1e-7)


def test_tabulated_pulse_invariants():
    s = np.linspace(0.0, 1.0, 21)
    with pytest.raises(ArgumentError):
        synthesize_tabulated(s, np.sin(np.pi * s) + 0.1, 3.0 + 2.0 * s, 0.1, 0.1)
    with pytest.raises(ArgumentError):
        synthesize_tabulated(s, np.sin(np.pi * s), 5.0 - 2.0 * s, 0.1, 0.1)
    with pytest.raises(ArgumentError):
        synthesize_tabulated(s[:3], np.sin(np.pi * s[:3]), 3.0 + 2.0 * s[:3], 0.1, 0.1)


def test_concat_plays_segments_back_to_back():
    first = synthesize_standard(0.5, 1.5, 0.1, 0.1)
    second = synthesize_standard(1.5, 2.5, 0.1, 0.1, t_slow=2.0)
    control = concat([first, second])
    assert isinstance(control, PiecewiseControl)
    assert control.horizon == pytest.approx(first.horizon + second.horizon)
    assert control.t_slow == pytest.approx(3.0)
    np.testing.assert_allclose(control.slow_breakpoints, [0.0, 1.0, 3.0])

    local = np.array([5.0, 37.0, 99.0])
    np.testing.assert_allclose(evaluate(control, local), omega(first, local))
    np.testing.assert_allclose(evaluate(control, first.horizon + local), omega(second, local))
    assert evaluate(control, control.horizon) == pytest.approx(0.0, abs=1e-15)


def test_concat_rejects_mixed_scales():
    with pytest.raises(ArgumentError):
        concat([synthesize_standard(0.5, 1.5, 0.1, 0.1), synthesize_standard(1.5, 2.5, 0.1, 0.2)])
    with pytest.raises(ArgumentError):
        concat([])


def test_concat_domain():
    control = concat([synthesize_standard(0.5, 1.5, 0.1, 0.1)])
    with pytest.raises(DomainError):
        evaluate(control, control.horizon + 1.0)
