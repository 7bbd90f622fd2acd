"""Structural model of the sparse quantum plane.

The plane is an ``M x M`` array of modules, each an ``N x N`` array of unit
cells. A unit cell holds a 2 x 2 block of qubit idle vertices spaced ``d``
apart, so the full lattice is ``2MN x 2MN`` vertices joined by shuttle arms of
``d / gate_pitch`` electrodes each.

Vertex coordinates are ``(X, Y)`` with ``X`` along the horizontal axis. A
vertex is a data site when ``X + Y`` is even and an ancilla site otherwise.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from functools import cached_property

from . import units

DC_GATES_PER_CELL = 64
QUBITS_PER_CELL = 4
SHUTTLE_PHASES = 4

Vertex = tuple[int, int]


class ParameterError(ValueError):
    """Raised when parameters violate a model invariant.

    ``invariant`` names the violated rule so callers can report it.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


@dataclass(frozen=True)
class ArchParams:
    """Architecture parameters, SI units throughout.

    Only ``M`` and ``N`` lack defaults; the rest default to the reference
    design (12 um pitch, 50 nm electrodes, 1 mV / 1 uV resolutions, 1 K,
    22 mm x 33 mm die, one defect crossbar).
    """

    M: int
    N: int
    d: float = 12 * units.UM
    gate_pitch: float = 50 * units.NM
    dv_coarse: float = 1 * units.MV
    dv_fine: float = 1 * units.UV
    T_op: float = 1.0
    x_crossbars: int = 1
    die_w: float = 22 * units.MM
    die_h: float = 33 * units.MM

    def __post_init__(self):
        for name in ("M", "N", "x_crossbars"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ParameterError(f"{name} >= 1", f"{name} must be a positive integer, got {value!r}")
        for name in ("d", "gate_pitch", "dv_coarse", "dv_fine", "T_op", "die_w", "die_h"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} > 0", f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.dv_fine < self.dv_coarse:
            raise ParameterError(
                "dv_fine < dv_coarse", f"fine resolution {self.dv_fine} V must be below coarse {self.dv_coarse} V"
            )
        _integral_ratio(self.d, self.gate_pitch)

    @property
    def qubit_count(self) -> int:
        return QUBITS_PER_CELL * self.M**2 * self.N**2


def _integral_ratio(d: float, pitch: float) -> int:
    ratio = d / pitch
    n = round(ratio)
    if n < 1 or abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ParameterError(
            "d multiple of gate_pitch",
            f"qubit pitch {units.to_um(d):g} um is not an integer multiple of gate pitch {pitch / units.NM:g} nm",
        )
    return n


def arm_gate_count(params: ArchParams) -> int:
    """Electrodes along one shuttle arm, ``d / gate_pitch``."""
    return _integral_ratio(params.d, params.gate_pitch)


class GateKind(enum.Enum):
    SHUTTLE = "shuttle"
    VERTEX_BARRIER = "vertex_barrier"
    PULSED_J = "pulsed_j"
    PULSED_MW = "pulsed_mw"
    PULSED_BARRIER = "pulsed_barrier"
    PLUNGER = "plunger"
    STATIC = "static"
    SENSOR_PLUNGER = "sensor_plunger"
    OHMIC_SOURCE = "ohmic_source"
    OHMIC_DRAIN = "ohmic_drain"

    @property
    def dc_biased(self) -> bool:
        return self not in (GateKind.SHUTTLE, GateKind.OHMIC_SOURCE, GateKind.OHMIC_DRAIN)


class Resolution(enum.Enum):
    COARSE = "coarse"
    FINE = "fine"


class AcDrive(enum.Enum):
    """How the AC part of a gate's signal arrives, if it has one."""

    PULSED = "pulsed"  # dedicated shared pulse source
    MW = "mw"  # shared microwave line
    READOUT = "readout"  # pulse routed through the global readout demux


class Role(enum.Enum):
    DATA = "data"
    ANCILLA = "ancilla"


@dataclass(frozen=True)
class Gate:
    name: str
    kind: GateKind
    resolution: Resolution | None = None
    ac: AcDrive | None = None
    region: str | None = None


@dataclass(frozen=True)
class QubitSite:
    local: Vertex
    role: Role


@dataclass(frozen=True)
class Arm:
    """A shuttle arm between two lattice vertices; ``a < b`` lexicographically."""

    a: Vertex
    b: Vertex

    @property
    def axis(self) -> str:
        return "x" if self.a[1] == self.b[1] else "y"


@dataclass(frozen=True)
class Region:
    name: str
    arm: str  # local arm id, e.g. "W10" = west arm of local vertex (1, 0)
    readout: bool


def _owned_arm_ids() -> tuple[str, ...]:
    # Each vertex owns its west and south arm.
    return tuple(f"{side}{lx}{ly}" for ly in (0, 1) for lx in (0, 1) for side in ("W", "S"))


READOUT_ARM = "W10"


@dataclass(frozen=True)
class UnitCellLayout:
    """Gate inventory of one unit cell.

    Only the coarse/fine totals are contract-bearing; the itemized default
    breakdown is one consistent choice.
    """

    sites: tuple[QubitSite, ...]
    regions: tuple[Region, ...]
    gates: tuple[Gate, ...]
    ohmics: tuple[Gate, ...]

    def __post_init__(self):
        if len(self.gates) != DC_GATES_PER_CELL:
            raise ParameterError(
                "64 DC gates per unit cell", f"layout has {len(self.gates)} DC-biased gates"
            )
        for g in self.gates:
            if not g.kind.dc_biased or g.resolution is None:
                raise ParameterError("DC gates carry a resolution", f"gate {g.name} is not a DC-biased gate")
        readout = [r for r in self.regions if r.readout]
        if len(readout) != 1:
            raise ParameterError("one readout region", f"found {len(readout)} readout regions")
        kinds = sorted(o.kind.value for o in self.ohmics)
        if kinds != ["ohmic_drain", "ohmic_source"] or any(o.region != readout[0].name for o in self.ohmics):
            raise ParameterError("ohmics in readout region", "expected one source and one drain in the readout region")
        if len(self.sites) != QUBITS_PER_CELL or sum(s.role is Role.DATA for s in self.sites) != 2:
            raise ParameterError("2 data + 2 ancilla sites", "unit cell must hold two data and two ancilla qubits")

    @property
    def count_coarse(self) -> int:
        return sum(g.resolution is Resolution.COARSE for g in self.gates)

    @property
    def count_fine(self) -> int:
        return sum(g.resolution is Resolution.FINE for g in self.gates)

    def ac_gates(self, drive: AcDrive | None = None) -> tuple[Gate, ...]:
        if drive is None:
            return tuple(g for g in self.gates if g.ac is not None)
        return tuple(g for g in self.gates if g.ac is drive)

    @property
    def readout_region(self) -> Region:
        return next(r for r in self.regions if r.readout)

    @classmethod
    def default(cls) -> UnitCellLayout:
        sites = tuple(
            QubitSite((lx, ly), Role.DATA if (lx + ly) % 2 == 0 else Role.ANCILLA) for ly in (0, 1) for lx in (0, 1)
        )
        regions = tuple(
            Region(("RO" if arm == READOUT_ARM else "Q2_") + arm, arm, arm == READOUT_ARM) for arm in _owned_arm_ids()
        )
        gates: list[Gate] = []
        for s in sites:
            lx, ly = s.local
            for side in "NESW":
                gates.append(
                    Gate(f"VB{lx}{ly}{side}", GateKind.VERTEX_BARRIER, Resolution.COARSE, AcDrive.PULSED)
                )
        for r in regions:
            gates += [
                Gate(f"{r.name}.B0", GateKind.PULSED_BARRIER, Resolution.COARSE, AcDrive.PULSED, r.name),
                Gate(f"{r.name}.B1", GateKind.PULSED_BARRIER, Resolution.COARSE, AcDrive.PULSED, r.name),
                Gate(f"{r.name}.P0", GateKind.PLUNGER, Resolution.FINE, AcDrive.PULSED, r.name),
                Gate(f"{r.name}.P1", GateKind.PLUNGER, Resolution.FINE, None, r.name),
                Gate(f"{r.name}.J", GateKind.PULSED_J, Resolution.FINE, AcDrive.PULSED, r.name),
            ]
        ro = next(r for r in regions if r.readout).name
        gates += [
            Gate(f"{ro}.MW", GateKind.PULSED_MW, Resolution.FINE, AcDrive.MW, ro),
            Gate(f"{ro}.SP", GateKind.SENSOR_PLUNGER, Resolution.FINE, AcDrive.READOUT, ro),
        ]
        for name in ("SB0", "SB1", "RB0", "RB1", "SC0", "SC1"):
            gates.append(Gate(f"{ro}.{name}", GateKind.STATIC, Resolution.FINE, None, ro))
        ohmics = (Gate(f"{ro}.S", GateKind.OHMIC_SOURCE, region=ro), Gate(f"{ro}.D", GateKind.OHMIC_DRAIN, region=ro))
        return cls(sites, regions, tuple(gates), ohmics)

    @classmethod
    def from_counts(cls, count_coarse: int, count_fine: int) -> UnitCellLayout:
        """Layout with a custom coarse/fine split and generic DC-only gates."""
        base = cls.default()
        ro = base.readout_region.name
        gates = tuple(Gate(f"C{i}", GateKind.STATIC, Resolution.COARSE, None, ro) for i in range(count_coarse))
        gates += tuple(Gate(f"F{i}", GateKind.STATIC, Resolution.FINE, None, ro) for i in range(count_fine))
        return cls(base.sites, base.regions, gates, base.ohmics)


@dataclass(frozen=True)
class UnitCell:
    module: tuple[int, int]
    cell: tuple[int, int]
    layout: UnitCellLayout
    N: int

    @property
    def origin(self) -> Vertex:
        """Global vertex of local site (0, 0)."""
        return (2 * (self.module[0] * self.N + self.cell[0]), 2 * (self.module[1] * self.N + self.cell[1]))

    def vertex(self, local: Vertex) -> Vertex:
        ox, oy = self.origin
        return (ox + local[0], oy + local[1])

    def owned_arm(self, arm_id: str) -> Arm | None:
        """Global arm for a local arm id, or None where it would cross the plane edge."""
        lx, ly = int(arm_id[1]), int(arm_id[2])
        x, y = self.vertex((lx, ly))
        if arm_id[0] == "W":
            return Arm((x - 1, y), (x, y)) if x >= 1 else None
        return Arm((x, y - 1), (x, y)) if y >= 1 else None


@dataclass(frozen=True)
class Geometry:
    """Areas in m², perimeters in m."""

    unit_cell_area: float
    unit_cell_perimeter: float
    module_area: float
    module_perimeter: float
    plane_area: float
    plane_perimeter: float


def geometry(params: ArchParams) -> Geometry:
    d, N, M = params.d, params.N, params.M
    return Geometry(
        unit_cell_area=4 * d**2,
        unit_cell_perimeter=8 * d,
        module_area=(2 * d * N) ** 2,
        module_perimeter=8 * d * N,
        plane_area=(2 * d * N * M) ** 2,
        plane_perimeter=8 * d * N * M,
    )


@dataclass(frozen=True)
class QuantumPlane:
    """Immutable plane. The lattice is exposed through accessors rather than a
    materialized graph so million-qubit planes stay cheap."""

    params: ArchParams
    layout: UnitCellLayout = field(default_factory=UnitCellLayout.default)

    @property
    def M(self) -> int:
        return self.params.M

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def side(self) -> int:
        """Vertices per side of the lattice."""
        return 2 * self.M * self.N

    @property
    def qubit_count(self) -> int:
        return self.side**2

    @property
    def module_count(self) -> int:
        return self.M**2

    @property
    def unit_cell_count(self) -> int:
        return self.M**2 * self.N**2

    @cached_property
    def arm_gates(self) -> int:
        return arm_gate_count(self.params)

    def has_vertex(self, v: Vertex) -> bool:
        return 0 <= v[0] < self.side and 0 <= v[1] < self.side

    def vertices(self) -> Iterator[Vertex]:
        for y in range(self.side):
            for x in range(self.side):
                yield (x, y)

    def neighbors(self, v: Vertex) -> list[Vertex]:
        """Lattice neighbours in x-then-y order; edges terminate at the plane boundary."""
        if not self.has_vertex(v):
            raise ParameterError("vertex in plane", f"{v} is outside the {self.side}x{self.side} lattice")
        x, y = v
        cand = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)]
        return [c for c in cand if self.has_vertex(c)]

    def degree(self, v: Vertex) -> int:
        return len(self.neighbors(v))

    def has_arm(self, u: Vertex, v: Vertex) -> bool:
        return self.has_vertex(u) and self.has_vertex(v) and abs(u[0] - v[0]) + abs(u[1] - v[1]) == 1

    def arms(self) -> Iterator[Arm]:
        s = self.side
        for y in range(s):
            for x in range(s):
                if x + 1 < s:
                    yield Arm((x, y), (x + 1, y))
                if y + 1 < s:
                    yield Arm((x, y), (x, y + 1))

    @property
    def arm_count(self) -> int:
        return 2 * self.side * (self.side - 1)

    def role(self, v: Vertex) -> Role:
        return Role.DATA if (v[0] + v[1]) % 2 == 0 else Role.ANCILLA

    def cell_of(self, v: Vertex) -> UnitCell:
        gx, gy = v[0] // 2, v[1] // 2
        return UnitCell((gx // self.N, gy // self.N), (gx % self.N, gy % self.N), self.layout, self.N)

    def unit_cells(self) -> Iterator[UnitCell]:
        """Cells ordered by module (row-major), then cell within module (row-major)."""
        for mj in range(self.M):
            for mi in range(self.M):
                for cj in range(self.N):
                    for ci in range(self.N):
                        yield UnitCell((mi, mj), (ci, cj), self.layout, self.N)

    @property
    def data_grid(self) -> tuple[int, int]:
        """(rows, cols) of the data-qubit grid addressed by defect crossbars."""
        return (self.side, self.side // 2)

    def data_coordinate(self, v: Vertex) -> tuple[int, int]:
        if self.role(v) is not Role.DATA:
            raise ParameterError("data vertex", f"{v} is an ancilla site")
        return (v[1], v[0] // 2)

    def data_vertex(self, row: int, col: int) -> Vertex:
        x = 2 * col + (row % 2)
        return (x, row)


def build_plane(params: ArchParams, layout: UnitCellLayout | None = None) -> QuantumPlane:
    """Construct the plane; parameter validation happens in ``ArchParams``."""
    if not isinstance(params, ArchParams):
        raise TypeError("build_plane expects ArchParams")
    arm_gate_count(params)
    return QuantumPlane(params, layout if layout is not None else UnitCellLayout.default())


PLANE_SCHEMA = "spinplane.plane/1"


def plane_summary(plane: QuantumPlane) -> dict:
    """JSON-ready summary of counts and geometry. Lengths in um, areas in um² and mm²."""
    p = plane.params
    g = geometry(p)
    lay = plane.layout
    return {
        "schema": PLANE_SCHEMA,
        "params": {
            "M": p.M,
            "N": p.N,
            "d_um": units.to_um(p.d),
            "gate_pitch_nm": p.gate_pitch / units.NM,
            "dv_coarse_V": p.dv_coarse,
            "dv_fine_V": p.dv_fine,
            "T_op_K": p.T_op,
            "x_crossbars": p.x_crossbars,
            "die_w_mm": p.die_w / units.MM,
            "die_h_mm": p.die_h / units.MM,
        },
        "counts": {
            "modules": plane.module_count,
            "unit_cells": plane.unit_cell_count,
            "qubits": plane.qubit_count,
            "data_qubits": plane.qubit_count // 2,
            "lattice_side": plane.side,
            "arms": plane.arm_count,
            "gates_per_arm": plane.arm_gates,
            "dc_gates_per_cell": len(lay.gates),
            "coarse_gates_per_cell": lay.count_coarse,
            "fine_gates_per_cell": lay.count_fine,
        },
        "geometry": {
            "unit_cell_area_um2": units.to_um2(g.unit_cell_area),
            "unit_cell_perimeter_um": units.to_um(g.unit_cell_perimeter),
            "module_area_um2": units.to_um2(g.module_area),
            "module_perimeter_um": units.to_um(g.module_perimeter),
            "plane_area_mm2": units.to_mm2(g.plane_area),
            "plane_perimeter_mm": g.plane_perimeter / units.MM,
        },
    }


def mn_for_qubits(target_qubits: int) -> int:
    """Return ``MN`` with ``4 (MN)^2 == target_qubits``; raises with the nearest choice otherwise."""
    if target_qubits < 4:
        raise ParameterError("target = 4(MN)^2", f"{target_qubits} qubits is below one unit cell")
    mn = math.isqrt(target_qubits // 4)
    if 4 * mn * mn == target_qubits:
        return mn
    lo, hi = mn, mn + 1
    nearest = lo if target_qubits - 4 * lo * lo <= 4 * hi * hi - target_qubits else hi
    raise ParameterError(
        "target = 4(MN)^2",
        f"{target_qubits} qubits is not 4(MN)^2; nearest is MN={nearest} ({4 * nearest * nearest} qubits)",
    )
