import pytest

from chirpedensemble.exceptions import HypothesisViolationError
from chirpedensemble.services import frames_service
from chirpedensemble.services.config_loader import load_config, parse_config


def test_context_from_config(configs_dir):
    config = load_config(configs_dir / "frames_two_level.toml")
    ctx = frames_service.context_from_config(config)
    assert (ctx.p, ctx.q) == (1, 2)
    assert ctx.delta_gap == pytest.approx(4.0)
    assert ctx.eps1 == pytest.approx(0.1)
    assert ctx.eps2 == pytest.approx(0.1**1.25)


def test_eps_pairs_follow_coupling_rule(configs_dir, small_config_dict):
    config = load_config(configs_dir / "frames_two_level.toml")
    assert frames_service.eps_pairs(config) == pytest.approx([(0.1, 0.1**1.25), (0.01, 0.01**1.25)])
    assert frames_service.eps_pairs(parse_config(small_config_dict)) == [(0.1, 0.1)]


def test_run_frames_one_row_per_pair(small_config_dict):
    rows = frames_service.run_frames(
        parse_config(small_config_dict),
        steps_per_period=20,
        include_residuals=False,
        include_adiabatic=False,
        pairs=[(0.1, 0.1), (0.1, 0.05)],
    )
    assert [(row.eps1, row.eps2) for row in rows] == [(0.1, 0.1), (0.1, 0.05)]
    assert all(row.monotonicity_margin_before > 0 for row in rows)


def test_first_alpha_must_satisfy_gap_hypotheses(configs_dir):
    # alpha = -0.6 puts the (3, 4) gap at 5.2, outside (3, 5)
    with pytest.raises(HypothesisViolationError):
        frames_service.context_from_config(load_config(configs_dir / "four_level_sweep.toml"))
