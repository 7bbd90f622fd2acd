"""Closed-form resource arithmetic: hold capacitors, footprint, plane budget and
the leakage-limited module size."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from . import units
from .arch import ArchParams, ParameterError, Resolution, UnitCellLayout, geometry, mn_for_qubits

REPORT_SCHEMA = "spinplane.resources/1"
N_MAX_CEILING = 1 << 20


@dataclass(frozen=True)
class ElectronicsParams:
    """Local electronics constants (SI).

    ``t_update`` and ``I_leak`` have no reference values; their defaults are
    assumptions and are flagged as such in every report.
    """

    cap_density: float = 1 * units.PF / units.UM2
    demux_footprint_per_cell: float = 60 * units.UM2
    t_update: float = 100 * units.NS
    I_leak: float = 1e-18
    e_charge: float = units.E_CHARGE
    k_B: float = units.K_B
    droop_fraction: float = 0.5  # allowed droop as a fraction of the resolution

    def __post_init__(self):
        for name in ("cap_density", "demux_footprint_per_cell", "t_update", "e_charge", "k_B", "droop_fraction"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} > 0", f"{name} must be positive, got {getattr(self, name)!r}")
        if self.I_leak < 0:
            raise ParameterError("I_leak >= 0", f"leakage current must be nonnegative, got {self.I_leak!r}")


ASSUMED_ELECTRONICS = ("t_update", "I_leak", "droop_fraction")


def min_hold_capacitance(
    resolution: float, mode: Resolution | str, T_op: float = 1.0, elec: ElectronicsParams | None = None
) -> float:
    """Smallest hold capacitance (F) supporting ``resolution`` volts.

    Coarse gates are charge-quantization limited, ``C = e / dV``. Fine gates
    are thermal-noise limited: the rms kT/C noise ``sqrt(k_B T / C)`` equals
    ``dV`` at ``C = k_B T / dV**2``.
    """
    elec = elec or ElectronicsParams()
    mode = Resolution(mode)
    if not resolution > 0:
        raise ParameterError("resolution > 0", f"got {resolution!r}")
    if mode is Resolution.COARSE:
        return elec.e_charge / resolution
    if not T_op > 0:
        raise ParameterError("T_op > 0", f"got {T_op!r}")
    return elec.k_B * T_op / resolution**2


def hold_capacitances(params: ArchParams, elec: ElectronicsParams | None = None) -> dict[Resolution, float]:
    return {
        Resolution.COARSE: min_hold_capacitance(params.dv_coarse, Resolution.COARSE, params.T_op, elec),
        Resolution.FINE: min_hold_capacitance(params.dv_fine, Resolution.FINE, params.T_op, elec),
    }


def unit_cell_capacitance(
    layout: UnitCellLayout, elec: ElectronicsParams | None, params: ArchParams
) -> float:
    caps = hold_capacitances(params, elec)
    return layout.count_fine * caps[Resolution.FINE] + layout.count_coarse * caps[Resolution.COARSE]


@dataclass(frozen=True)
class Footprint:
    capacitor_area: float  # m²
    demux_area: float
    total_area: float
    d_min: float  # m
    d: float
    feasible: bool


def footprint(layout: UnitCellLayout, elec: ElectronicsParams | None, params: ArchParams) -> Footprint:
    elec = elec or ElectronicsParams()
    cap_area = unit_cell_capacitance(layout, elec, params) / elec.cap_density
    total = cap_area + elec.demux_footprint_per_cell
    return Footprint(
        capacitor_area=cap_area,
        demux_area=elec.demux_footprint_per_cell,
        total_area=total,
        d_min=math.sqrt(total / 4),
        d=params.d,
        feasible=4 * params.d**2 >= total,
    )


@dataclass(frozen=True)
class PlaneBudget:
    plane_area: float  # m²
    plane_side: float  # m
    die_area: float
    remaining_area: float
    fits: bool  # area and side length both fit the die


def plane_area_report(params: ArchParams, target_qubits: int | None = None) -> PlaneBudget:
    """Plane area against the die; ``target_qubits`` overrides ``M*N`` when given."""
    mn = params.M * params.N if target_qubits is None else mn_for_qubits(target_qubits)
    side = 2 * params.d * mn
    area = side**2
    die = params.die_w * params.die_h
    fits = area <= die and side <= min(params.die_w, params.die_h)
    return PlaneBudget(area, side, die, die - area, fits)


@dataclass(frozen=True)
class ModuleSizeLimit:
    N_max: int | None  # None when even N=1 violates the bound
    capped: bool
    refresh_period: float | None  # s, at N_max
    refresh_rate: float | None  # Hz
    droop_at_N_max: float | None  # V
    violating_droop: float | None  # V, at N=1 when infeasible
    capacitance: float
    budget: float  # allowed droop, V

    @property
    def feasible(self) -> bool:
        return self.N_max is not None


def refresh_period(N: int, elec: ElectronicsParams, gates_per_cell: int = 64) -> float:
    """All gates of a module are written one after another; modules run in parallel."""
    return gates_per_cell * N * N * elec.t_update


def droop(N: int, elec: ElectronicsParams, capacitance: float, gates_per_cell: int = 64) -> float:
    return elec.I_leak * refresh_period(N, elec, gates_per_cell) / capacitance


def max_module_size(
    elec: ElectronicsParams,
    layout: UnitCellLayout,
    resolution: float,
    mode: Resolution | str = Resolution.FINE,
    T_op: float = 1.0,
    capacitance: float | None = None,
    ceiling: int = N_MAX_CEILING,
) -> ModuleSizeLimit:
    """Largest N whose worst-case droop over one refresh period stays within
    ``droop_fraction * resolution``.

    The hold capacitance defaults to the minimum for ``mode`` at ``resolution``.
    """
    C = capacitance if capacitance is not None else min_hold_capacitance(resolution, mode, T_op, elec)
    gates = len(layout.gates)
    budget = elec.droop_fraction * resolution
    if elec.I_leak == 0:
        T = refresh_period(ceiling, elec, gates)
        return ModuleSizeLimit(ceiling, True, T, 1 / T, 0.0, None, C, budget)
    if droop(1, elec, C, gates) > budget:
        return ModuleSizeLimit(None, False, None, None, None, droop(1, elec, C, gates), C, budget)
    n = math.isqrt(int(C * budget / (gates * elec.t_update * elec.I_leak)))
    # float guard: settle on the exact boundary
    while droop(n + 1, elec, C, gates) <= budget:
        n += 1
    while n > 1 and droop(n, elec, C, gates) > budget:
        n -= 1
    capped = n >= ceiling
    n = min(n, ceiling)
    T = refresh_period(n, elec, gates)
    return ModuleSizeLimit(n, capped, T, 1 / T, droop(n, elec, C, gates), None, C, budget)


@dataclass(frozen=True)
class ResourceReport:
    C_coarse: float
    C_fine: float
    C_unit_cell: float
    capacitor_area: float
    demux_area: float
    total_electronics_area: float
    d: float
    d_min: float
    footprint_feasible: bool
    plane_area: float
    plane_side: float
    die_area: float
    remaining_area: float
    plane_fits_die: bool
    N: int
    N_max: int | None  # fine-resolution limit
    N_max_coarse: int | None
    refresh_period: float
    refresh_rate: float
    assumptions: dict = field(default_factory=dict)

    @property
    def N_max_limiting(self) -> int | None:
        vals = [n for n in (self.N_max, self.N_max_coarse)]
        if any(v is None for v in vals):
            return None
        return min(vals)

    @property
    def feasible(self) -> bool:
        lim = self.N_max_limiting
        return self.footprint_feasible and self.plane_fits_die and lim is not None and self.N <= lim

    def to_json(self) -> dict:
        raw = asdict(self)
        return {
            "schema": REPORT_SCHEMA,
            "feasible": self.feasible,
            "capacitance": {
                "C_coarse_fF": units.to_ff(self.C_coarse),
                "C_fine_pF": units.to_pf(self.C_fine),
                "C_unit_cell_pF": units.to_pf(self.C_unit_cell),
            },
            "footprint": {
                "capacitor_area_um2": units.to_um2(self.capacitor_area),
                "demux_area_um2": units.to_um2(self.demux_area),
                "total_electronics_area_um2": units.to_um2(self.total_electronics_area),
                "unit_cell_area_um2": units.to_um2(4 * self.d**2),
                "d_um": units.to_um(self.d),
                "d_min_um": units.to_um(self.d_min),
                "feasible": self.footprint_feasible,
            },
            "plane": {
                "plane_area_mm2": units.to_mm2(self.plane_area),
                "plane_side_mm": self.plane_side / units.MM,
                "die_area_mm2": units.to_mm2(self.die_area),
                "remaining_area_mm2": units.to_mm2(self.remaining_area),
                "fits_die": self.plane_fits_die,
            },
            "module_size": {
                "N": self.N,
                "N_max_fine": self.N_max,
                "N_max_coarse": self.N_max_coarse,
                "N_max_limiting": self.N_max_limiting,
                "refresh_period_s": self.refresh_period,
                "refresh_rate_Hz": self.refresh_rate,
            },
            "assumptions": raw["assumptions"],
        }

    def to_text(self) -> str:
        j = self.to_json()
        rows = [("feasible", j["feasible"])]
        for section in ("capacitance", "footprint", "plane", "module_size"):
            for k, v in j[section].items():
                rows.append((f"{section}.{k}", v))
        for k, v in j["assumptions"].items():
            rows.append((f"assumed.{k}", v))
        width = max(len(k) for k, _ in rows)
        out = []
        for k, v in rows:
            if isinstance(v, float):
                v = f"{v:.6g}"
            out.append(f"{k.ljust(width)}  {v}")
        return "\n".join(out) + "\n"


def estimate(
    params: ArchParams,
    elec: ElectronicsParams | None = None,
    layout: UnitCellLayout | None = None,
    target_qubits: int | None = None,
    assumed: dict | None = None,
) -> ResourceReport:
    """Run the whole estimator for one configuration."""
    elec = elec or ElectronicsParams()
    layout = layout or UnitCellLayout.default()
    caps = hold_capacitances(params, elec)
    fp = footprint(layout, elec, params)
    budget = plane_area_report(params, target_qubits)
    fine = max_module_size(elec, layout, params.dv_fine, Resolution.FINE, params.T_op, caps[Resolution.FINE])
    coarse = max_module_size(elec, layout, params.dv_coarse, Resolution.COARSE, params.T_op, caps[Resolution.COARSE])
    T = refresh_period(params.N, elec, len(layout.gates))
    if assumed is None:
        assumed = {name: getattr(elec, name) for name in ASSUMED_ELECTRONICS}
    return ResourceReport(
        C_coarse=caps[Resolution.COARSE],
        C_fine=caps[Resolution.FINE],
        C_unit_cell=unit_cell_capacitance(layout, elec, params),
        capacitor_area=fp.capacitor_area,
        demux_area=fp.demux_area,
        total_electronics_area=fp.total_area,
        d=params.d,
        d_min=fp.d_min,
        footprint_feasible=fp.feasible,
        plane_area=budget.plane_area,
        plane_side=budget.plane_side,
        die_area=budget.die_area,
        remaining_area=budget.remaining_area,
        plane_fits_die=budget.fits,
        N=params.N,
        N_max=fine.N_max,
        N_max_coarse=coarse.N_max,
        refresh_period=T,
        refresh_rate=1 / T,
        assumptions=dict(assumed),
    )
