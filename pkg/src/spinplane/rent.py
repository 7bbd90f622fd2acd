"""Rent's-rule sweeps: boundary lines ``T`` against gate count ``G``, fitted as ``T = k G^p``."""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, replace

import numpy as np

from .arch import DC_GATES_PER_CELL, ArchParams, build_plane
from .netlist import BoundaryCount, SignalClass, closed_form_lines, count_boundary_lines, generate_netlist

BASES = ("qubits", "dc_gates")
# Above this many unit cells a sweep point uses the closed form instead of building the graph.
NETLIST_CELL_LIMIT = 4096


class FitError(ValueError):
    """Not enough distinct points for a power-law fit."""


@dataclass(frozen=True)
class RentPoint:
    params: ArchParams
    G: int
    counts: BoundaryCount
    method: str  # "netlist" or "closed_form"

    @property
    def T(self) -> int:
        return self.counts.total


@dataclass(frozen=True)
class RentFit:
    points: tuple[RentPoint, ...]
    p: float
    k: float
    residual: float  # rms of log residuals
    basis: str

    @property
    def tail_exponent(self) -> float:
        """Local log-log slope between the two largest points."""
        a, b = sorted(self.points, key=lambda pt: pt.G)[-2:]
        return float(np.log(b.T / a.T) / np.log(b.G / a.G))


def gate_count(params: ArchParams, basis: str = "qubits") -> int:
    if basis == "qubits":
        return params.qubit_count
    if basis == "dc_gates":
        return DC_GATES_PER_CELL * params.M**2 * params.N**2
    raise ValueError(f"unknown basis {basis!r} (expected one of {BASES})")


def fit_power_law(G: Sequence[float], T: Sequence[float]) -> tuple[float, float, float]:
    """Least squares on ``log T = log k + p log G``; returns ``(p, k, rms residual)``."""
    if len(G) < 3:
        raise FitError(f"need at least 3 sweep points, got {len(G)}")
    lg = np.log(np.asarray(G, dtype=float))
    lt = np.log(np.asarray(T, dtype=float))
    if np.ptp(lg) == 0:
        raise FitError("gate counts must not all be equal")
    A = np.vstack([lg, np.ones_like(lg)]).T
    (p, logk), *_ = np.linalg.lstsq(A, lt, rcond=None)
    resid = lt - (p * lg + logk)
    return float(p), float(np.exp(logk)), float(np.sqrt(np.mean(resid**2)))


def sweep_points(
    sweep: Iterable[ArchParams], basis: str = "qubits", method: str = "auto", cell_limit: int = NETLIST_CELL_LIMIT
) -> list[RentPoint]:
    out = []
    for params in sweep:
        cells = params.M**2 * params.N**2
        use_netlist = method == "netlist" or (method == "auto" and cells <= cell_limit)
        if method not in ("auto", "netlist", "closed_form"):
            raise ValueError(f"unknown method {method!r}")
        if use_netlist:
            counts = count_boundary_lines(generate_netlist(build_plane(params)))
        else:
            counts = closed_form_lines(params)
        out.append(RentPoint(params, gate_count(params, basis), counts, "netlist" if use_netlist else "closed_form"))
    return out


def rent_fit(
    sweep: Iterable[ArchParams], basis: str = "qubits", method: str = "auto", cell_limit: int = NETLIST_CELL_LIMIT
) -> RentFit:
    sweep = list(sweep)
    if len(sweep) < 3:
        raise FitError(f"need at least 3 sweep points, got {len(sweep)}")
    points = sweep_points(sweep, basis, method, cell_limit)
    p, k, res = fit_power_law([pt.G for pt in points], [pt.T for pt in points])
    return RentFit(tuple(points), p, k, res, basis)


def balanced_sweep(values: Iterable[int], base: ArchParams | None = None) -> list[ArchParams]:
    """``M = N`` for each value."""
    base = base or ArchParams(M=1, N=1)
    return [replace(base, M=v, N=v) for v in values]


def parse_sweep(spec: str, base: ArchParams) -> list[ArchParams]:
    """Parse ``"M=N:2,4,8"``, ``"M:2,4,8"`` or ``"N:1,2,3"``; other fields come from ``base``."""
    try:
        axis, values = spec.split(":", 1)
        vals = [int(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"bad sweep spec {spec!r}; expected e.g. 'M=N:2,4,8,16'") from None
    axis = axis.strip().replace(" ", "")
    if axis in ("M=N", "N=M"):
        return [replace(base, M=v, N=v) for v in vals]
    if axis == "M":
        return [replace(base, M=v) for v in vals]
    if axis == "N":
        return [replace(base, N=v) for v in vals]
    if axis == "x":
        return [replace(base, x_crossbars=v) for v in vals]
    raise ValueError(f"bad sweep axis {axis!r}; use M=N, M, N or x")


CSV_COLUMNS = ["M", "N", "x", "G", "T_total"] + [c.value for c in SignalClass]


def points_to_csv(points: Iterable[RentPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for pt in points:
        w.writerow([pt.params.M, pt.params.N, pt.params.x_crossbars, pt.G, pt.T] + [pt.counts[c] for c in SignalClass])
    return buf.getvalue()
