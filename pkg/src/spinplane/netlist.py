"""Typed wiring graph of the quantum plane and boundary-cut line counting.

Every wire that leaves the plane is modelled as one edge between an outside
``REMOTE_SOURCE`` node (a DAC, pulse generator or measurement device) and an
inside ``BOUNDARY_PORT``. Inside the plane each port fans out to the
demultiplexers, switches and gates it drives. Line counts are obtained by
cutting the graph at the boundary, never from formulas; ``closed_form_lines``
is the independent closed-form route that the cut should reproduce.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field

from .arch import (
    DC_GATES_PER_CELL,
    SHUTTLE_PHASES,
    AcDrive,
    ArchParams,
    Gate,
    GateKind,
    QuantumPlane,
    Resolution,
    Role,
    UnitCellLayout,
    arm_gate_count,
)

# Routing constants. Each fixes one term of the boundary line count.
DEMUX_FAN_OUT = 16
DEMUXES_PER_CELL = DC_GATES_PER_CELL // DEMUX_FAN_OUT  # arranged 2 x 2 per cell
DEMUX_ADDRESS_LINES = math.ceil(math.log2(DEMUX_FAN_OUT))
SHUTTLE_AXES = 2  # independent 4-phase sets for x arms and y arms
READOUT_SOURCE_BIAS_LINES = 1

NETLIST_SCHEMA = "spinplane.netlist/1"


class StructuralError(ValueError):
    """The netlist is malformed (unflagged node, dangling edge, broken invariant)."""


class SignalClass(enum.Enum):
    DC_BIAS_INPUT = "DcBiasInput"
    DEMUX_ADDRESS = "DemuxAddress"
    DEMUX_ENABLE = "DemuxEnable"
    SHUTTLE = "SharedPulsed.Shuttle"
    PULSED_GATE_AC = "SharedPulsed.PulsedGateAC"
    MW = "SharedPulsed.MW"
    DEFECT_ROW = "DefectCrossbarRow"
    DEFECT_COL = "DefectCrossbarCol"
    READOUT_DRAIN = "ReadoutDrain"
    READOUT_ADDRESS = "ReadoutAddress"
    READOUT_SOURCE_BIAS = "ReadoutSourceBias"

    @property
    def group(self) -> str:
        return _GROUPS[self]


_GROUPS = {
    SignalClass.DC_BIAS_INPUT: "dc",
    SignalClass.DEMUX_ADDRESS: "dc",
    SignalClass.DEMUX_ENABLE: "dc",
    SignalClass.SHUTTLE: "shared_pulsed",
    SignalClass.PULSED_GATE_AC: "shared_pulsed",
    SignalClass.MW: "shared_pulsed",
    SignalClass.DEFECT_ROW: "defects",
    SignalClass.DEFECT_COL: "defects",
    SignalClass.READOUT_DRAIN: "readout",
    SignalClass.READOUT_ADDRESS: "readout",
    SignalClass.READOUT_SOURCE_BIAS: "readout",
}

_AC_CLASS = {AcDrive.PULSED: SignalClass.PULSED_GATE_AC, AcDrive.MW: SignalClass.MW}


class NodeKind(enum.Enum):
    REMOTE_SOURCE = "remote_source"
    BOUNDARY_PORT = "boundary_port"
    DEMUX = "demux"
    HOLD_CAPACITOR = "hold_capacitor"
    COMPLEMENTARY_SWITCH = "complementary_switch"
    DEFECT_SWITCH = "defect_switch"
    GATE = "gate"
    OHMIC = "ohmic"
    GLOBAL_READOUT_DEMUX = "global_readout_demux"
    CROSSBAR_DRIVER = "crossbar_driver"


@dataclass(frozen=True)
class GateInfo:
    """What a GATE or OHMIC node stands for. Shuttle nodes aggregate every
    electrode of one phase on one arm, hence ``multiplicity``."""

    kind: GateKind
    resolution: Resolution | None = None
    ac: AcDrive | None = None
    multiplicity: int = 1

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "resolution": self.resolution.value if self.resolution else None,
            "ac": self.ac.value if self.ac else None,
            "multiplicity": self.multiplicity,
        }

    @classmethod
    def from_json(cls, obj: dict) -> GateInfo:
        return cls(
            GateKind(obj["kind"]),
            Resolution(obj["resolution"]) if obj["resolution"] else None,
            AcDrive(obj["ac"]) if obj["ac"] else None,
            obj["multiplicity"],
        )


@dataclass
class Netlist:
    """Directed graph stored as parallel lists for speed.

    ``inside[i]`` is True for nodes inside the quantum plane, False outside
    and None if unflagged (which ``count_boundary_lines`` rejects).
    """

    kinds: list[NodeKind] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    inside: list[bool | None] = field(default_factory=list)
    info: list[GateInfo | None] = field(default_factory=list)
    edges: list[tuple[int, int, SignalClass]] = field(default_factory=list)

    def add_node(self, kind: NodeKind, label: str, inside: bool | None, info: GateInfo | None = None) -> int:
        self.kinds.append(kind)
        self.labels.append(label)
        self.inside.append(inside)
        self.info.append(info)
        return len(self.kinds) - 1

    def connect(self, u: int, v: int, cls: SignalClass) -> None:
        self.edges.append((u, v, cls))

    @property
    def node_count(self) -> int:
        return len(self.kinds)

    def nodes_of(self, kind: NodeKind) -> list[int]:
        return [i for i, k in enumerate(self.kinds) if k is kind]

    def add_line(self, cls: SignalClass, name: str, outward: bool = False) -> int:
        """Create a boundary-crossing line and return its inside port."""
        remote = self.add_node(NodeKind.REMOTE_SOURCE, f"remote:{name}", False)
        port = self.add_node(NodeKind.BOUNDARY_PORT, f"port:{name}", True)
        if outward:
            self.connect(port, remote, cls)
        else:
            self.connect(remote, port, cls)
        return port


@dataclass(frozen=True)
class BoundaryCount:
    counts: dict[SignalClass, int]

    def __post_init__(self):
        for cls in SignalClass:
            self.counts.setdefault(cls, 0)
        if any(v < 0 for v in self.counts.values()):
            raise StructuralError("negative line count")

    def __getitem__(self, cls: SignalClass) -> int:
        return self.counts[cls]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def group(self, name: str) -> int:
        return sum(v for c, v in self.counts.items() if c.group == name)

    def to_dict(self) -> dict:
        out = {c.value: self.counts[c] for c in SignalClass}
        out["groups"] = {g: self.group(g) for g in ("dc", "shared_pulsed", "defects", "readout")}
        out["total"] = self.total
        return out


def readout_groups(N: int, readout_partition: int | None) -> int:
    """Concurrent readout groups per module for ``readout_partition`` cells per group."""
    cells = N * N
    R = cells if readout_partition is None else readout_partition
    if not 1 <= R <= cells:
        raise ValueError(f"readout partition must be in [1, {cells}], got {R}")
    return -(-cells // R)


def readout_address_lines(N: int) -> int:
    return 2 * math.ceil(math.log2(N))


def closed_form_lines(
    params: ArchParams, layout: UnitCellLayout | None = None, readout_partition: int | None = None
) -> BoundaryCount:
    """Boundary line counts from the routing formulas alone.

    DC: ``M² + 4N + 4``; shared pulsed: 58 for the default layout;
    defects: ``3xMN``; readout: ``M²·G + 2⌈log2 N⌉ + 1`` with ``G`` readout
    groups per module (``G = 1`` without partitioning).
    """
    lay = layout or UnitCellLayout.default()
    M, N, x = params.M, params.N, params.x_crossbars
    G = readout_groups(N, readout_partition)
    sensor_pulse = 1 if lay.ac_gates(AcDrive.READOUT) else 0
    return BoundaryCount(
        {
            SignalClass.DC_BIAS_INPUT: M * M,
            SignalClass.DEMUX_ADDRESS: DEMUX_ADDRESS_LINES,
            SignalClass.DEMUX_ENABLE: 4 * N,
            SignalClass.SHUTTLE: SHUTTLE_PHASES * SHUTTLE_AXES,
            SignalClass.PULSED_GATE_AC: len(lay.ac_gates(AcDrive.PULSED)) + sensor_pulse,
            SignalClass.MW: len(lay.ac_gates(AcDrive.MW)),
            SignalClass.DEFECT_ROW: x * 2 * M * N,
            SignalClass.DEFECT_COL: x * M * N,
            SignalClass.READOUT_DRAIN: M * M * G,
            SignalClass.READOUT_ADDRESS: readout_address_lines(N),
            SignalClass.READOUT_SOURCE_BIAS: READOUT_SOURCE_BIAS_LINES,
        }
    )


def generate_netlist(plane: QuantumPlane, readout_partition: int | None = None) -> Netlist:
    """Build the explicit wiring graph for ``plane``.

    ``readout_partition`` splits each module's sequential readout into groups
    of that many unit cells, each with its own drain line.
    """
    p = plane.params
    M, N, x = p.M, p.N, p.x_crossbars
    lay = plane.layout
    R = N * N if readout_partition is None else readout_partition
    n_groups = readout_groups(N, readout_partition)
    nl = Netlist()
    add, connect = nl.add_node, nl.connect
    cls_dc = SignalClass.DC_BIAS_INPUT

    # plane-wide lines
    addr = [nl.add_line(SignalClass.DEMUX_ADDRESS, f"DemuxAddress:{b}") for b in range(DEMUX_ADDRESS_LINES)]
    en_rows, en_cols = [], []
    for axis, store in (("row", en_rows), ("col", en_cols)):
        for i in range(2 * N):
            port = nl.add_line(SignalClass.DEMUX_ENABLE, f"DemuxEnable:{axis}{i}")
            drv = add(NodeKind.CROSSBAR_DRIVER, f"driver:DemuxEnable:{axis}{i}", True)
            connect(port, drv, SignalClass.DEMUX_ENABLE)
            store.append(drv)
    shuttle = {
        (axis, ph): nl.add_line(SignalClass.SHUTTLE, f"Shuttle:{axis}:phase{ph}")
        for axis in ("x", "y")
        for ph in range(SHUTTLE_PHASES)
    }
    ac_port: dict[str, int] = {}
    for g in lay.gates:
        if g.ac in _AC_CLASS:
            ac_port[g.name] = nl.add_line(_AC_CLASS[g.ac], f"{_AC_CLASS[g.ac].value}:{g.name}")
    grd = None
    if lay.ac_gates(AcDrive.READOUT):
        grd = add(NodeKind.GLOBAL_READOUT_DEMUX, "global_readout_demux", True)
        pulse = nl.add_line(SignalClass.PULSED_GATE_AC, "SharedPulsed.PulsedGateAC:sensor_pulse")
        connect(pulse, grd, SignalClass.PULSED_GATE_AC)
        for b in range(readout_address_lines(N)):
            connect(nl.add_line(SignalClass.READOUT_ADDRESS, f"ReadoutAddress:{b}"), grd, SignalClass.READOUT_ADDRESS)
    src_bias = nl.add_line(SignalClass.READOUT_SOURCE_BIAS, "ReadoutSourceBias")
    rows, cols = plane.data_grid
    xb_row = [[0] * rows for _ in range(x)]
    xb_col = [[0] * cols for _ in range(x)]
    for k in range(x):
        for r in range(rows):
            port = nl.add_line(SignalClass.DEFECT_ROW, f"DefectCrossbar{k}:row{r}")
            xb_row[k][r] = add(NodeKind.CROSSBAR_DRIVER, f"driver:DefectCrossbar{k}:row{r}", True)
            connect(port, xb_row[k][r], SignalClass.DEFECT_ROW)
        for c in range(cols):
            port = nl.add_line(SignalClass.DEFECT_COL, f"DefectCrossbar{k}:col{c}")
            xb_col[k][c] = add(NodeKind.CROSSBAR_DRIVER, f"driver:DefectCrossbar{k}:col{c}", True)
            connect(port, xb_col[k][c], SignalClass.DEFECT_COL)

    gate_info = [GateInfo(g.kind, g.resolution, g.ac) for g in lay.gates]
    vb_index = {}  # local vertex -> indices of its vertex barriers in lay.gates
    for i, g in enumerate(lay.gates):
        if g.kind is GateKind.VERTEX_BARRIER:
            vb_index.setdefault((int(g.name[2]), int(g.name[3])), []).append(i)
    n_arm = arm_gate_count(p)
    shuttle_info = [GateInfo(GateKind.SHUTTLE, multiplicity=len(range(ph, n_arm, SHUTTLE_PHASES))) for ph in range(4)]
    src_info = GateInfo(GateKind.OHMIC_SOURCE)
    drn_info = GateInfo(GateKind.OHMIC_DRAIN)
    arm_ids = [r.arm for r in lay.regions]
    data_sites = [s.local for s in lay.sites if s.role is Role.DATA]
    ro_name = lay.readout_region.name

    for mj in range(M):
        for mi in range(M):
            mod = f"m{mi},{mj}"
            dc_port = nl.add_line(cls_dc, f"DcBiasInput:{mod}")
            drains = [nl.add_line(SignalClass.READOUT_DRAIN, f"ReadoutDrain:{mod}:g{g}", outward=True)
                      for g in range(n_groups)]
            for cj in range(N):
                for ci in range(N):
                    pre = f"{mod}/c{ci},{cj}"
                    demux = []
                    for k in range(DEMUXES_PER_CELL):
                        dm = add(NodeKind.DEMUX, f"{pre}/demux{k}", True)
                        connect(dc_port, dm, cls_dc)
                        for a in addr:
                            connect(a, dm, SignalClass.DEMUX_ADDRESS)
                        connect(en_rows[2 * cj + k // 2], dm, SignalClass.DEMUX_ENABLE)
                        connect(en_cols[2 * ci + k % 2], dm, SignalClass.DEMUX_ENABLE)
                        demux.append(dm)
                    gate_nodes = []
                    for i, g in enumerate(lay.gates):
                        cap = add(NodeKind.HOLD_CAPACITOR, f"{pre}/{g.name}.C", True)
                        connect(demux[i // DEMUX_FAN_OUT], cap, cls_dc)
                        gn = add(NodeKind.GATE, f"{pre}/{g.name}", True, gate_info[i])
                        if g.ac is None:
                            connect(cap, gn, cls_dc)
                        else:
                            sw = add(NodeKind.COMPLEMENTARY_SWITCH, f"{pre}/{g.name}.SW", True)
                            connect(cap, sw, cls_dc)
                            if g.ac is AcDrive.READOUT:
                                connect(grd, sw, SignalClass.PULSED_GATE_AC)
                                connect(sw, gn, SignalClass.PULSED_GATE_AC)
                            else:
                                connect(ac_port[g.name], sw, _AC_CLASS[g.ac])
                                connect(sw, gn, _AC_CLASS[g.ac])
                        gate_nodes.append(gn)
                    cell = plane.cell_of((2 * (mi * N + ci), 2 * (mj * N + cj)))
                    for arm_id in arm_ids:
                        arm = cell.owned_arm(arm_id)
                        if arm is None:
                            continue
                        for ph in range(SHUTTLE_PHASES):
                            sn = add(NodeKind.GATE, f"{pre}/arm{arm_id}.phase{ph}", True, shuttle_info[ph])
                            connect(shuttle[(arm.axis, ph)], sn, SignalClass.SHUTTLE)
                    so = add(NodeKind.OHMIC, f"{pre}/{ro_name}.S", True, src_info)
                    connect(src_bias, so, SignalClass.READOUT_SOURCE_BIAS)
                    dr = add(NodeKind.OHMIC, f"{pre}/{ro_name}.D", True, drn_info)
                    connect(dr, drains[(cj * N + ci) // R], SignalClass.READOUT_DRAIN)
                    for local in data_sites:
                        row, col = plane.data_coordinate(cell.vertex(local))
                        for k in range(x):
                            ds = add(NodeKind.DEFECT_SWITCH, f"{pre}/defect{k}.v{local[0]}{local[1]}", True)
                            connect(xb_row[k][row], ds, SignalClass.DEFECT_ROW)
                            connect(xb_col[k][col], ds, SignalClass.DEFECT_COL)
                            for gi in vb_index.get(local, ()):
                                connect(ds, gate_nodes[gi], SignalClass.DEFECT_ROW)
    return nl


def count_boundary_lines(netlist: Netlist) -> BoundaryCount:
    """Count edges with exactly one endpoint inside the plane, per class."""
    inside = netlist.inside
    counts = {c: 0 for c in SignalClass}
    n = len(inside)
    for u, v, cls in netlist.edges:
        if not (0 <= u < n and 0 <= v < n):
            raise StructuralError(f"edge ({u}, {v}) references a missing node")
        iu, iv = inside[u], inside[v]
        if iu is None or iv is None:
            bad = u if iu is None else v
            raise StructuralError(f"node {netlist.labels[bad]!r} has no boundary flag")
        if iu != iv:
            counts[cls] += 1
    return BoundaryCount(counts)


def validate_netlist(netlist: Netlist) -> None:
    """Check the structural invariants; raises StructuralError on the first violation."""
    n = netlist.node_count
    kinds = netlist.kinds
    out_edges: list[list[int]] = [[] for _ in range(n)]
    in_edges: list[list[int]] = [[] for _ in range(n)]
    for u, v, _ in netlist.edges:
        if not (0 <= u < n and 0 <= v < n):
            raise StructuralError(f"dangling edge ({u}, {v})")
        out_edges[u].append(v)
        in_edges[v].append(u)
    for i in range(n):
        if kinds[i] is NodeKind.HOLD_CAPACITOR:
            ins = [kinds[u] for u in in_edges[i]]
            outs = out_edges[i]
            if ins != [NodeKind.DEMUX] or len(outs) != 1:
                raise StructuralError(f"hold capacitor {netlist.labels[i]} must have one demux input and one output")
            t = outs[0]
            if kinds[t] is NodeKind.COMPLEMENTARY_SWITCH:
                nxt = out_edges[t]
                if len(nxt) != 1 or kinds[nxt[0]] is not NodeKind.GATE:
                    raise StructuralError(f"switch {netlist.labels[t]} must drive exactly one gate")
            elif kinds[t] is not NodeKind.GATE:
                raise StructuralError(f"hold capacitor {netlist.labels[i]} does not reach a gate")
        elif kinds[i] is NodeKind.GATE:
            info = netlist.info[i]
            if info is not None and info.ac is not None and info.resolution is not None:
                feeders = [u for u in in_edges[i] if kinds[u] is NodeKind.COMPLEMENTARY_SWITCH]
                if len(feeders) != 1:
                    raise StructuralError(f"AC+DC gate {netlist.labels[i]} lacks a complementary switch")
                srcs = {kinds[u] for u in in_edges[feeders[0]]}
                if NodeKind.HOLD_CAPACITOR not in srcs or len(in_edges[feeders[0]]) != 2:
                    raise StructuralError(f"switch for {netlist.labels[i]} must join one AC and one DC path")
    seen = [False] * n
    queue = deque(i for i in range(n) if kinds[i] is NodeKind.REMOTE_SOURCE)
    for i in queue:
        seen[i] = True
    while queue:
        u = queue.popleft()
        for v in out_edges[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    for i in range(n):
        if kinds[i] is NodeKind.GATE and not seen[i]:
            raise StructuralError(f"gate {netlist.labels[i]} is not reachable from any remote source")


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_graph(netlist: Netlist, fmt: str = "json") -> bytes:
    """Serialize deterministically as ``"dot"`` or ``"json"``."""
    if fmt == "json":
        nodes = []
        for i in range(netlist.node_count):
            info = netlist.info[i]
            nodes.append(
                {
                    "id": i,
                    "kind": netlist.kinds[i].value,
                    "label": netlist.labels[i],
                    "inside": netlist.inside[i],
                    "gate": info.to_json() if info else None,
                }
            )
        doc = {
            "schema": NETLIST_SCHEMA,
            "nodes": nodes,
            "edges": [[u, v, c.value] for u, v, c in netlist.edges],
        }
        return (json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n").encode()
    if fmt == "dot":
        lines = ["digraph netlist {", "  rankdir=LR;"]
        for i in range(netlist.node_count):
            side = {True: "inside", False: "outside", None: "unflagged"}[netlist.inside[i]]
            lines.append(
                f'  n{i} [label="{_dot_escape(netlist.labels[i])}", kind="{netlist.kinds[i].value}", side="{side}"];'
            )
        for u, v, c in netlist.edges:
            lines.append(f'  n{u} -> n{v} [class="{c.value}"];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown export format {fmt!r} (expected 'dot' or 'json')")


def import_graph(data: bytes | str) -> Netlist:
    """Inverse of ``export_graph(..., "json")``."""
    doc = json.loads(data)
    if doc.get("schema") != NETLIST_SCHEMA:
        raise StructuralError(f"unsupported netlist schema {doc.get('schema')!r}")
    nl = Netlist()
    for i, node in enumerate(doc["nodes"]):
        if node["id"] != i:
            raise StructuralError("node ids must be dense and ordered")
        gate = GateInfo.from_json(node["gate"]) if node["gate"] else None
        nl.add_node(NodeKind(node["kind"]), node["label"], node["inside"], gate)
    for u, v, c in doc["edges"]:
        nl.connect(u, v, SignalClass(c))
    return nl
