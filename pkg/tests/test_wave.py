import numpy as np
import pytest

from spinplane.wave import (
    ShuttleWaveConfig,
    TrackingError,
    displacement_per_period,
    potential,
    track_minimum,
    traveling_wave_minimum,
)

PITCH = 50e-9


@pytest.mark.parametrize("width", [0.5, 1.0, 2.0])
def test_four_pitches_per_period(width):
    cfg = ShuttleWaveConfig(kernel_width=width * PITCH)
    assert displacement_per_period(cfg) == pytest.approx(4.0, rel=0.05)


def test_reverse_flips_sign():
    fwd = displacement_per_period(ShuttleWaveConfig())
    rev = displacement_per_period(ShuttleWaveConfig(reverse=True))
    assert rev == pytest.approx(-fwd, rel=1e-3)


def test_forward_motion_is_monotone():
    cfg = ShuttleWaveConfig(kernel_width=0.8 * PITCH)
    _, pos = track_minimum(cfg, 32, cfg.period)
    running_max = np.maximum.accumulate(pos)
    assert np.max(running_max - pos) <= 0.1 * PITCH


def test_potential_periodic_in_time_and_space():
    cfg = ShuttleWaveConfig()
    n = 32
    x = np.linspace(8 * PITCH, 20 * PITCH, 97)
    v0 = potential(cfg, n, x, 0.0)
    assert np.allclose(potential(cfg, n, x, cfg.period), v0, atol=1e-12)
    # away from the ends, shifting by one 4-gate spatial period leaves the landscape unchanged
    assert np.allclose(potential(cfg, n, x + 4 * PITCH, 0.0), v0, atol=1e-9)


def test_minimum_at_time_zero_matches_start():
    cfg = ShuttleWaveConfig()
    x0 = traveling_wave_minimum(cfg, 32, 0.0)
    # the nearest minimum to the array centre, and a true local minimum
    assert abs(x0 - 15.5 * PITCH) <= 2 * PITCH
    around = potential(cfg, 32, np.array([x0 - 0.05 * PITCH, x0, x0 + 0.05 * PITCH]), 0.0)
    assert around[1] <= around[0] and around[1] <= around[2]


def test_tracking_reaches_edge():
    cfg = ShuttleWaveConfig()
    with pytest.raises(TrackingError, match="edge"):
        track_minimum(cfg, 8, 3 * cfg.period)


def test_tracking_reports_jumps(monkeypatch):
    from spinplane import wave

    # force a descent that lands three pitches away to exercise the diagnostic
    monkeypatch.setattr(wave, "_descend", lambda v, i: i + 600)
    with pytest.raises(TrackingError, match="jumped 3.00 pitches"):
        track_minimum(ShuttleWaveConfig(), 64, 1e-9, points_per_pitch=200)


def test_input_validation():
    with pytest.raises(ValueError):
        track_minimum(ShuttleWaveConfig(), 4, 1e-9)
    with pytest.raises(ValueError):
        ShuttleWaveConfig(kernel_width=0.0)
