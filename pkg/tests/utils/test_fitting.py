import math

import pytest

from chirpedensemble.exceptions import ArgumentError
from chirpedensemble.utils.fitting import fit_loglog_slope, is_geometric


def test_constant_sequence_has_zero_slope():
    fit = fit_loglog_slope([0.1, 0.01, 0.001], [0.3, 0.3, 0.3])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(0.3))
    assert fit.residual == pytest.approx(0.0, abs=1e-12)


def test_power_law_is_recovered():
    x = [10 ** (-k / 3) for k in range(3, 7)]
    y = [3.0 * v**0.4 for v in x]
    fit = fit_loglog_slope(x, y)
    assert fit.slope == pytest.approx(0.4)
    assert fit.intercept == pytest.approx(math.log(3.0))
    assert fit.residual < 1e-10


def test_noisy_points_report_residual():
    fit = fit_loglog_slope([1.0, 2.0, 4.0], [1.0, 3.0, 4.0])
    assert fit.residual > 0.01


@pytest.mark.parametrize(
    "x, y",
    [([0.1], [0.2]), ([0.1, 0.01], [0.2]), ([0.1, -0.01], [0.2, 0.1]), ([0.1, 0.01], [0.2, 0.0])],
)
def test_fit_rejects_bad_data(x, y):
    with pytest.raises(ArgumentError):
        fit_loglog_slope(x, y)


def test_is_geometric():
    assert is_geometric([0.1, 10 ** (-4 / 3), 10 ** (-5 / 3)])
    assert not is_geometric([1.0, 0.5, 0.1])
    assert is_geometric([0.1, 0.03])
