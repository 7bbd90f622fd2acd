"""Four-phase traveling-wave shuttling: numeric tracking of the potential minimum.

Gate ``i`` sits at ``x_i = i * gate_pitch`` and carries
``amplitude * sin(2 pi f t + phi_i)`` with ``phi_i = -2 pi (i mod 4) / 4``
(negated for reverse travel). Each gate contributes through a Gaussian
kernel of standard deviation ``kernel_width``. The electron is tracked by
steepest descent on a fine spatial grid, continued from the previous
position at every time step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .arch import SHUTTLE_PHASES


class TrackingError(RuntimeError):
    """The tracked minimum jumped too far in one step or reached the array edge."""


@dataclass(frozen=True)
class ShuttleWaveConfig:
    amplitude: float = 0.1  # V
    frequency: float = 100 * units.MHZ
    gate_pitch: float = 50 * units.NM
    kernel_width: float = 50 * units.NM
    reverse: bool = False

    def __post_init__(self):
        for name in ("amplitude", "frequency", "gate_pitch", "kernel_width"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def phases(self, n_gates: int) -> np.ndarray:
        phi = -2 * np.pi * (np.arange(n_gates) % SHUTTLE_PHASES) / SHUTTLE_PHASES
        return -phi if self.reverse else phi

    @property
    def period(self) -> float:
        return 1 / self.frequency


class _Landscape:
    def __init__(self, cfg: ShuttleWaveConfig, n_gates: int, points_per_pitch: int):
        self.cfg = cfg
        self.x = np.linspace(0.0, (n_gates - 1) * cfg.gate_pitch, (n_gates - 1) * points_per_pitch + 1)
        gx = np.arange(n_gates) * cfg.gate_pitch
        self.kernel = np.exp(-((self.x[:, None] - gx[None, :]) ** 2) / (2 * cfg.kernel_width**2))
        self.phi = cfg.phases(n_gates)
        self.step = cfg.gate_pitch / points_per_pitch

    def values(self, t: float) -> np.ndarray:
        return self.kernel @ (self.cfg.amplitude * np.sin(2 * np.pi * self.cfg.frequency * t + self.phi))


def potential(cfg: ShuttleWaveConfig, n_gates: int, x: np.ndarray, t: float) -> np.ndarray:
    """Summed potential at positions ``x`` (m) and time ``t`` (s)."""
    x = np.asarray(x, dtype=float)
    gx = np.arange(n_gates) * cfg.gate_pitch
    k = np.exp(-((x[..., None] - gx) ** 2) / (2 * cfg.kernel_width**2))
    return k @ (cfg.amplitude * np.sin(2 * np.pi * cfg.frequency * t + cfg.phases(n_gates)))


def _descend(v: np.ndarray, i: int) -> int:
    n = len(v)
    while True:
        if i > 0 and v[i - 1] < v[i]:
            i -= 1
        elif i < n - 1 and v[i + 1] < v[i]:
            i += 1
        else:
            return i


def _refine(v: np.ndarray, i: int) -> float:
    """Sub-grid offset of a discrete minimum by parabolic interpolation, in grid steps."""
    if 0 < i < len(v) - 1:
        a, b, c = v[i - 1], v[i], v[i + 1]
        den = a - 2 * b + c
        if den > 0:
            return 0.5 * (a - c) / den
    return 0.0


def track_minimum(
    cfg: ShuttleWaveConfig,
    n_gates: int,
    t_end: float,
    steps_per_period: int = 400,
    points_per_pitch: int = 200,
    start: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(times, positions)`` of the tracked minimum from 0 to ``t_end``.

    The starting minimum is the one reached by descent from ``start``
    (default: the array centre) at ``t = 0``.
    """
    if n_gates < 8:
        raise ValueError("need at least 8 gates")
    if t_end < 0:
        raise ValueError("t_end must be nonnegative")
    land = _Landscape(cfg, n_gates, points_per_pitch)
    steps = max(1, math.ceil(t_end * cfg.frequency * steps_per_period))
    times = np.linspace(0.0, t_end, steps + 1)
    x0 = (n_gates - 1) * cfg.gate_pitch / 2 if start is None else start
    i = int(round(x0 / land.step))
    i = min(max(i, 0), len(land.x) - 1)
    last = len(land.x) - 1
    max_jump = 2 * points_per_pitch
    pos = np.empty(len(times))
    for k, t in enumerate(times):
        v = land.values(t)
        j = _descend(v, i)
        if k and abs(j - i) > max_jump:
            raise TrackingError(f"minimum jumped {abs(j - i) / points_per_pitch:.2f} pitches at t={t:.3e} s")
        if j in (0, last):
            raise TrackingError(f"minimum reached the array edge at t={t:.3e} s")
        i = j
        pos[k] = land.x[i] + _refine(v, i) * land.step
    return times, pos


def traveling_wave_minimum(cfg: ShuttleWaveConfig, n_gates: int, t: float, **kw) -> float:
    """Position (m) of the tracked potential minimum at time ``t``."""
    return float(track_minimum(cfg, n_gates, t, **kw)[1][-1])


def displacement_per_period(cfg: ShuttleWaveConfig, n_gates: int = 32, **kw) -> float:
    """Tracked displacement over one signal period, in gate pitches."""
    _, pos = track_minimum(cfg, n_gates, cfg.period, **kw)
    return float((pos[-1] - pos[0]) / cfg.gate_pitch)
