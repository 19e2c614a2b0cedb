"""Desk-scale reproductions of the four-level example; minutes each, run with `pytest -m slow`."""

import math

import numpy as np
import pytest

from chirpedensemble.core.conditions import check_prop2
from chirpedensemble.services import persistence_service, sweep_service
from chirpedensemble.services.config_loader import ensemble_from_config, load_config, parse_config

pytestmark = pytest.mark.slow


def _resolution(config, workers: int = 1) -> sweep_service.Resolution:
    return sweep_service.Resolution.from_config(config, workers=workers)


def test_inversion_only_for_alphas_inside_the_window(configs_dir):
    config = load_config(configs_dir / "four_level_sweep.toml")
    result = sweep_service.run_fid_curves(config, _resolution(config))
    final = {record.alpha[0]: record.fidelity for record in result.records}
    assert final[-0.3] >= 0.95
    assert final[-0.1] >= 0.95
    # Gap outside the window: the transition never happens
    assert final[-0.6] <= 0.10
    # The (1, 3) gap enters the window and leaks population
    assert final[0.1] <= 0.90
    assert final[0.3] <= 0.90
    assert all(record.norm_drift <= 1e-9 for record in result.records)


def test_concatenated_pulses_climb_the_ladder(configs_dir):
    config = load_config(configs_dir / "ladder_concat.toml")
    result = sweep_service.run_concat(config, _resolution(config))
    (curves,) = result.populations
    s = np.array(curves.s)
    populations = np.array(curves.populations)
    for level, s_end in ((2, 1.0), (3, 2.0), (4, 3.0)):
        index = int(np.argmin(np.abs(s - s_end)))
        assert populations[level - 1, index] >= 0.9
    assert not result.degraded


def test_distance_shrinks_along_the_coupling_rule(configs_dir):
    config = load_config(configs_dir / "coupling_rule_scaling.toml")
    result = sweep_service.run_scaling(config, _resolution(config))
    distances = [record.distance for record in result.records]
    assert all(later < earlier for earlier, later in zip(distances, distances[1:]))
    assert result.fit.slope >= 0.25
    assert result.fit.reliable


def test_second_order_balance(configs_dir):
    config = load_config(configs_dir / "doubled_window_scaling.toml")
    segment = config.pulse.segments[0]
    assert check_prop2(ensemble_from_config(config), 1, 2, segment.v0, segment.v1).holds
    result = sweep_service.run_scaling(config, _resolution(config))
    assert len(result.records) >= 2
    # distance / sqrt(eps1) stays within a factor of 3 across the scales
    normalized = [record.distance / math.sqrt(record.eps1) for record in result.records]
    assert min(normalized) > 0.0
    assert max(normalized) / min(normalized) <= 3.0


def test_worker_count_does_not_change_files(small_config_dict, tmp_path):
    config = parse_config(small_config_dict)
    for workers in (1, 8):
        result = sweep_service.run_fid_curves(config, _resolution(config, workers))
        persistence_service.persist(result, tmp_path / str(workers), ["csv"])
    for name in ("records.csv", "curves.csv"):
        assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "8" / name).read_bytes()
