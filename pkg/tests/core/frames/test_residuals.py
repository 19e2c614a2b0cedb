import sys

import numpy as np
import pytest

from chirpedensemble.core.frames import integrate_residuals, residuals, x5_operator
from chirpedensemble.core.frames.residuals import RESIDUAL_NAMES, cumulative_integral
from chirpedensemble.exceptions import ArgumentError


def test_residuals_vanish_at_start(four_level_context):
    for family in residuals(four_level_context, 0.0):
        np.testing.assert_allclose(family, 0.0, atol=1e-15)


def test_residuals_are_hermitian(four_level_context):
    batch = residuals(four_level_context, np.array([17.0, 58.0]))
    for family in batch:
        assert family.shape == (2, 4, 4)
        np.testing.assert_allclose(family, np.conj(np.swapaxes(family, -1, -2)), atol=1e-12)


def test_residual_families_touch_their_levels(four_level_context):
    R, R_pq, R_p, R_q = residuals(four_level_context, 58.0)
    # Levels 1, 2 sit away from the (3, 4) target
    np.testing.assert_allclose(R[2:, :], 0.0)
    np.testing.assert_allclose(R_pq[:2, :], 0.0)
    np.testing.assert_allclose(R_p[3, :], 0.0)
    np.testing.assert_allclose(R_q[2, :], 0.0)


def test_empty_interval_gives_zero_integrals(four_level_context):
    result = integrate_residuals(four_level_context, t_end=0.0)
    for name in RESIDUAL_NAMES:
        np.testing.assert_array_equal(result.integrals[name], 0.0)
        assert result.sup_norms[name] == 0.0


def test_quadrature_rules_agree(four_level_context):
    simpson = integrate_residuals(four_level_context, steps_per_period=64, n_samples=11)
    trapezoid = integrate_residuals(four_level_context, steps_per_period=64, n_samples=11, rule="trapezoid")
    x5_s, x5_t = simpson.x5()[-1], trapezoid.x5()[-1]
    assert np.linalg.norm(x5_s - x5_t) < 1e-2 * np.linalg.norm(x5_s)
    for name in RESIDUAL_NAMES:
        assert trapezoid.sup_norms[name] == pytest.approx(simpson.sup_norms[name], rel=1e-2)


def test_x5_operator_matches_running_integrals(four_level_context):
    t = 50.0
    running = integrate_residuals(four_level_context, t_end=100.0, steps_per_period=64, n_samples=3)
    assert running.times[1] == pytest.approx(t)
    x5 = x5_operator(four_level_context, t, steps_per_period=64)
    expected = running.x5()[1]
    np.testing.assert_allclose(x5, 0.5 * (expected + expected.conj().T), atol=1e-12)
    np.testing.assert_allclose(x5, x5.conj().T, atol=1e-14)


@pytest.mark.parametrize(
    "kwargs",
    [{"rule": "midpoint"}, {"n_samples": 1}, {"t_end": 150.0}, {"t_end": -1.0}],
)
def test_integrate_residuals_arguments(four_level_context, kwargs):
    with pytest.raises(ArgumentError):
        integrate_residuals(four_level_context, **kwargs)


@pytest.mark.parametrize("rule, atol", [("simpson", 1e-4), ("trapezoid", 1e-2)])
def test_cumulative_integral_keeps_imaginary_parts(rule, atol):
    x = np.linspace(0.0, 1.0, 11)
    y = np.exp(3j * x)
    exact = (np.exp(3j * x) - 1.0) / 3j
    np.testing.assert_allclose(cumulative_integral(y, x, rule), exact, atol=atol)

    # Batched Hermitian integrands stay Hermitian
    batch = np.zeros((x.size, 2, 2), dtype=complex)
    batch[:, 0, 1] = y
    batch[:, 1, 0] = np.conj(y)
    running = cumulative_integral(batch, x, rule)
    assert running.shape == batch.shape
    np.testing.assert_allclose(running[:, 0, 1], exact, atol=atol)
    np.testing.assert_allclose(running[:, 1, 0], np.conj(running[:, 0, 1]), atol=1e-15)


def test_running_integrals_are_complex(four_level_context):
    result = integrate_residuals(four_level_context, n_samples=3)
    x5 = result.x5()[-1]
    assert np.max(np.abs(x5.imag)) > 1e-3
    np.testing.assert_allclose(x5, x5.conj().T, atol=1e-10)


def test_chunked_quadrature_matches_single_batch(four_level_context, mocker):
    whole = integrate_residuals(four_level_context, steps_per_period=32, n_samples=3)
    mocker.patch.object(sys.modules["chirpedensemble.core.frames.residuals"], "RESIDUAL_CHUNK_STEPS", 50)
    chunked = integrate_residuals(four_level_context, steps_per_period=32, n_samples=3)
    np.testing.assert_allclose(chunked.x5()[-1], whole.x5()[-1], rtol=1e-3, atol=1e-4)
