"""Deterministic discrete-event simulation of the control protocols.

The engine is a plain heap of ``(time, sequence, action)`` entries, so ties
resolve in scheduling order and runs are reproducible event for event.
Modules are identical and run in lockstep; by default only module (0, 0) is
expanded into events (``all_modules=True`` expands every module).
"""

from __future__ import annotations

import csv
import heapq
import io
import json
from collections.abc import Callable, Iterable
from dataclasses import asdict, dataclass, field

from . import units
from .arch import (
    ArchParams,
    ParameterError,
    QuantumPlane,
    Resolution,
    Role,
    UnitCellLayout,
    UnitCell,
    Vertex,
    arm_gate_count,
)
from .estimator import ElectronicsParams, hold_capacitances
from .netlist import DEMUX_FAN_OUT, readout_groups

TIMELINE_SCHEMA = "spinplane.timeline/1"


@dataclass(frozen=True)
class TimingParams:
    """Protocol timings. None of these have reference values; all defaults are assumptions.

    ``t_readout`` is the time to read one unit cell's ancillas.
    ``readout_partition`` is the number of unit cells read sequentially on one
    drain line (None means the whole module, ``N**2``).
    """

    t_update: float = 100 * units.NS
    t_readout: float = 10 * units.US
    t_1q: float = 1 * units.US
    t_2q: float = 100 * units.NS
    f_shuttle: float = 100 * units.MHZ
    readout_partition: int | None = None

    def __post_init__(self):
        for name in ("t_update", "t_1q", "t_2q", "f_shuttle"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} > 0", f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.t_readout >= 0:
            raise ParameterError("t_readout >= 0", f"got {self.t_readout!r}")
        if self.readout_partition is not None and self.readout_partition < 1:
            raise ParameterError("1 <= R <= N^2", f"readout partition {self.readout_partition} < 1")

    def partition(self, N: int) -> int:
        R = N * N if self.readout_partition is None else self.readout_partition
        if not 1 <= R <= N * N:
            raise ParameterError("1 <= R <= N^2", f"readout partition {R} outside [1, {N * N}]")
        return R


ASSUMED_TIMING = ("t_update", "t_readout", "t_1q", "t_2q", "f_shuttle")


@dataclass(frozen=True, order=True)
class Event:
    time: float
    kind: str
    location: str
    duration: float
    resource: str

    @property
    def end(self) -> float:
        return self.time + self.duration


@dataclass
class EventTimeline:
    events: list[Event] = field(default_factory=list)
    phases: dict[str, float] = field(default_factory=dict)
    period: float = 0.0

    def sorted(self) -> list[Event]:
        return sorted(self.events, key=lambda e: (e.time, e.resource, e.location, e.kind))

    def overlaps(self) -> list[tuple[Event, Event]]:
        """Pairs of events that occupy the same resource or location at once."""
        bad = []
        for key in ("resource", "location"):
            by: dict[str, list[Event]] = {}
            for e in self.events:
                by.setdefault(getattr(e, key), []).append(e)
            for evs in by.values():
                evs.sort(key=lambda e: (e.time, e.end))
                for a, b in zip(evs, evs[1:]):
                    if b.time < a.end - 1e-15 * max(1.0, abs(a.end)):
                        bad.append((a, b))
        return bad

    @property
    def dominant_phase(self) -> str | None:
        if not self.phases:
            return None
        return max(self.phases, key=lambda k: (self.phases[k], k))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "kind", "location", "duration", "resource"])
        for e in self.sorted():
            w.writerow([repr(e.time), e.kind, e.location, repr(e.duration), e.resource])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "schema": TIMELINE_SCHEMA,
            "period_s": self.period,
            "phases_s": dict(self.phases),
            "dominant_phase": self.dominant_phase,
            "events": [asdict(e) for e in self.sorted()],
        }


class EventLoop:
    def __init__(self):
        self.now = 0.0
        self._queue: list[tuple[float, int, Callable[[], None]]] = []
        self._seq = 0

    def at(self, time: float, action: Callable[[], None]) -> None:
        if time < self.now:
            raise ValueError(f"cannot schedule at {time} before current time {self.now}")
        heapq.heappush(self._queue, (time, self._seq, action))
        self._seq += 1

    def run(self) -> float:
        while self._queue:
            self.now, _, action = heapq.heappop(self._queue)
            action()
        return self.now


def _modules(params: ArchParams, all_modules: bool) -> list[tuple[int, int]]:
    if not all_modules:
        return [(0, 0)]
    return [(mi, mj) for mj in range(params.M) for mi in range(params.M)]


# --- DC refresh ------------------------------------------------------------


@dataclass
class RefreshResult:
    timeline: EventTimeline
    period: float
    droop_by_class: dict[Resolution, float]
    budget_by_class: dict[Resolution, float]
    updates: int

    @property
    def worst_case_droop(self) -> float:
        """Fine-class droop, the quantity the closed-form module-size bound constrains."""
        return self.droop_by_class[Resolution.FINE]

    @property
    def passes(self) -> bool:
        return self.droop_by_class[Resolution.FINE] <= self.budget_by_class[Resolution.FINE]

    @property
    def passes_all(self) -> bool:
        return all(self.droop_by_class[r] <= self.budget_by_class[r] for r in Resolution)

    def summary(self) -> dict:
        return {
            "refresh_period_s": self.period,
            "updates": self.updates,
            "worst_case_droop_V": {r.value: self.droop_by_class[r] for r in Resolution},
            "droop_budget_V": {r.value: self.budget_by_class[r] for r in Resolution},
            "passes_fine": self.passes,
            "passes_all": self.passes_all,
        }


def refresh_schedule(
    params: ArchParams,
    elec: ElectronicsParams | None = None,
    timing: TimingParams | None = None,
    layout: UnitCellLayout | None = None,
    cycles: int = 2,
    all_modules: bool = False,
    record: bool = True,
) -> RefreshResult:
    """Simulate ``cycles`` sequential refresh sweeps of every module.

    Demultiplexers are enabled one after another and each writes its 16 gates
    in turn. A gate's droop is the linear discharge ``I_leak * dt / C`` over
    the interval between successive writes; the first sweep only charges.
    """
    if elec is None:
        elec = ElectronicsParams(t_update=timing.t_update) if timing else ElectronicsParams()
    elif timing is not None and timing.t_update != elec.t_update:
        raise ValueError(f"t_update mismatch: timing {timing.t_update} s vs electronics {elec.t_update} s")
    layout = layout or UnitCellLayout.default()
    if cycles < 2:
        raise ValueError("need at least two refresh cycles to observe droop")
    t_up = elec.t_update
    caps = hold_capacitances(params, elec)
    budget = {
        Resolution.COARSE: elec.droop_fraction * params.dv_coarse,
        Resolution.FINE: elec.droop_fraction * params.dv_fine,
    }
    N = params.N
    gates = layout.gates
    n_demux = -(-len(gates) // DEMUX_FAN_OUT)
    cells = [(ci, cj) for cj in range(N) for ci in range(N)]
    per_module = len(cells) * len(gates)
    loop = EventLoop()
    tl = EventTimeline()
    events = tl.events
    last_write: dict[tuple, float] = {}
    worst = {Resolution.COARSE: 0.0, Resolution.FINE: 0.0}
    counter = [0]

    def sequencer(module: tuple[int, int]):
        mod = f"m{module[0]},{module[1]}"
        dc_line = f"DcBiasInput:{mod}"

        def write(step: int):
            cycle, k = divmod(step, per_module)
            cell_idx, gi = divmod(k, len(gates))
            ci, cj = cells[cell_idx]
            g = gates[gi]
            start = loop.now
            end = start + t_up
            key = (module, cell_idx, gi)
            prev = last_write.get(key)
            if prev is not None:
                dv = elec.I_leak * (end - prev) / caps[g.resolution]
                if dv > worst[g.resolution]:
                    worst[g.resolution] = dv
            last_write[key] = end
            counter[0] += 1
            if record:
                loc = f"{mod}/c{ci},{cj}"
                if gi % DEMUX_FAN_OUT == 0:
                    dm = gi // DEMUX_FAN_OUT
                    span = min(DEMUX_FAN_OUT, len(gates) - dm * DEMUX_FAN_OUT) * t_up
                    events.append(Event(start, "demux_enable", f"{loc}/demux{dm}", span, f"{loc}/demux{dm}"))
                events.append(Event(start, "dc_update", f"{loc}/{g.name}", t_up, dc_line))
            if step + 1 < cycles * per_module:
                loop.at(end, lambda: write(step + 1))

        loop.at(0.0, lambda: write(0))

    assert n_demux * DEMUX_FAN_OUT >= len(gates)
    for module in _modules(params, all_modules):
        sequencer(module)
    loop.run()
    period = per_module * t_up
    tl.period = period
    tl.phases = {"dc_refresh": period}
    return RefreshResult(tl, period, worst, budget, counter[0])


# --- shuttling -------------------------------------------------------------


def arm_transit_time(params: ArchParams, timing: TimingParams) -> float:
    """One 4-gate spatial period per signal period."""
    return (arm_gate_count(params) / 4) / timing.f_shuttle


@dataclass(frozen=True)
class Route:
    start: Vertex
    path: tuple[tuple[Vertex, Vertex], ...]  # hops
    duration: float

    @property
    def vertices(self) -> list[Vertex]:
        return [self.start] + [b for _, b in self.path]

    @property
    def hops(self) -> int:
        return len(self.path)


def shuttle_route(plane: QuantumPlane, src: Vertex, dst: Vertex, timing: TimingParams | None = None) -> Route:
    """Shortest lattice path, moving along x first and then along y."""
    timing = timing or TimingParams()
    for v in (src, dst):
        if not plane.has_vertex(v):
            raise ParameterError("vertex in plane", f"{v} is outside the {plane.side}x{plane.side} lattice")
    hops = []
    x, y = src
    while (x, y) != dst:
        if x != dst[0]:
            nxt = (x + (1 if dst[0] > x else -1), y)
        else:
            nxt = (x, y + (1 if dst[1] > y else -1))
        if not plane.has_arm((x, y), nxt):
            raise ParameterError("connected lattice", f"no arm between {(x, y)} and {nxt}")
        hops.append(((x, y), nxt))
        x, y = nxt
    return Route(src, tuple(hops), len(hops) * arm_transit_time(plane.params, timing))


def initialization_plan(plane: QuantumPlane, cell: UnitCell, timing: TimingParams | None = None) -> list[dict]:
    """Routes that carry electrons from the readout-region ohmics to each qubit vertex of ``cell``.

    The readout region sits mid-arm, so every route starts with half an arm
    to the nearer end of that arm.
    """
    timing = timing or TimingParams()
    ro = cell.owned_arm(plane.layout.readout_region.arm)
    half = arm_transit_time(plane.params, timing) / 2
    plan = []
    for site in plane.layout.sites:
        target = cell.vertex(site.local)
        routes = [shuttle_route(plane, end, target, timing) for end in (ro.a, ro.b)]
        best = min(routes, key=lambda r: (r.hops, r.start))
        plan.append({"target": target, "route": best, "duration": best.duration + half})
    return plan


# --- readout ---------------------------------------------------------------


@dataclass
class ReadoutResult:
    timeline: EventTimeline
    duration: float
    partition: int
    groups: int
    lines_delta: int  # extra drain lines per module relative to one line


def readout_schedule(
    params: ArchParams, timing: TimingParams | None = None, all_modules: bool = False, start: float = 0.0
) -> ReadoutResult:
    """Sequential sensor activation across each module, split into concurrent groups.

    Group ``g`` reads cells ``g*R .. g*R + R - 1`` (row-major, last group may
    be partial) on its own drain line.
    """
    timing = timing or TimingParams()
    N = params.N
    R = timing.partition(N)
    G = readout_groups(N, R)
    cells = [(ci, cj) for cj in range(N) for ci in range(N)]
    loop = EventLoop()
    tl = EventTimeline()

    def group_reader(mod: str, g: int):
        members = cells[g * R:(g + 1) * R]

        def read(i: int):
            ci, cj = members[i]
            tl.events.append(
                Event(loop.now, "readout", f"{mod}/c{ci},{cj}/sensor", timing.t_readout, f"ReadoutDrain:{mod}:g{g}")
            )
            if i + 1 < len(members):
                loop.at(loop.now + timing.t_readout, lambda: read(i + 1))

        loop.at(start, lambda: read(0))

    for mi, mj in _modules(params, all_modules):
        for g in range(G):
            group_reader(f"m{mi},{mj}", g)
    loop.run()
    duration = R * timing.t_readout
    tl.period = duration
    tl.phases = {"readout": duration}
    return ReadoutResult(tl, duration, R, G, G - 1)


# --- surface-code cycle ----------------------------------------------------

_DIRS = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
PHASES = ("shuttle", "two_qubit", "single_qubit", "readout")


def surface_code_cycle(
    params: ArchParams,
    timing: TimingParams | None = None,
    order: Iterable[str] = ("N", "E", "S", "W"),
    layout: UnitCellLayout | None = None,
) -> EventTimeline:
    """One error-correction cycle of a representative unit cell.

    Four neighbour rounds (ancillas and their partner data qubits meet at the
    mid-arm two-qubit region, pulse J for ``t_2q``, return), one single-qubit
    round at the MW region, ancilla readout of the whole module through
    ``readout_schedule``, and the return shuttle. Phases are serialized.
    """
    timing = timing or TimingParams()
    order = tuple(order)
    if sorted(order) != sorted(_DIRS):
        raise ValueError(f"order must be a permutation of N, E, S, W; got {order}")
    layout = layout or UnitCellLayout.default()
    from .arch import build_plane  # local import keeps module import light

    plane = build_plane(params, layout)
    cell = next(iter(plane.unit_cells()))
    arm_t = arm_transit_time(params, timing)
    half = arm_t / 2
    ancillas = [cell.vertex(s.local) for s in layout.sites if s.role is Role.ANCILLA]
    ro_arm = cell.owned_arm(layout.readout_region.arm)
    loop = EventLoop()
    tl = EventTimeline()
    phases = dict.fromkeys(PHASES, 0.0)
    loc = "m0,0/c0,0"

    def qubit(v: Vertex) -> str:
        return f"q{v[0]},{v[1]}"

    def run_phase(kind: str, items: list[tuple[str, str, str, float]], then: Callable[[], None] | None):
        start = loop.now
        span = 0.0
        for ev_kind, where, resource, dur in items:
            tl.events.append(Event(start, ev_kind, where, dur, resource))
            span = max(span, dur)
        phases[kind] += span
        if then is not None:
            loop.at(start + span, then)

    steps: list[Callable[[Callable[[], None] | None], None]] = []

    for name in order:
        dx, dy = _DIRS[name]
        pairs = [(a, (a[0] + dx, a[1] + dy)) for a in ancillas]
        pairs = [(a, d) for a, d in pairs if plane.has_vertex(d)]

        def out(then, pairs=pairs, name=name):
            items = []
            for a, d in pairs:
                region = f"{loc}/arm{min(a, d)}-{max(a, d)}"
                items.append(("shuttle", f"{qubit(a)}->{region}", f"qubit:{qubit(a)}", half))
                items.append(("shuttle", f"{qubit(d)}->{region}", f"qubit:{qubit(d)}", half))
            run_phase("shuttle", items, then)

        def exchange(then, pairs=pairs):
            items = [
                ("exchange", f"{loc}/arm{min(a, d)}-{max(a, d)}/J", f"gate:{loc}/arm{min(a, d)}-{max(a, d)}/J",
                 timing.t_2q)
                for a, d in pairs
            ]
            run_phase("two_qubit", items, then)

        def back(then, pairs=pairs):
            items = []
            for a, d in pairs:
                items.append(("shuttle", f"{qubit(a)}<-region", f"qubit:{qubit(a)}", half))
                items.append(("shuttle", f"{qubit(d)}<-region", f"qubit:{qubit(d)}", half))
            run_phase("shuttle", items, then)

        steps += [out, exchange, back]

    def ro_distance(a: Vertex) -> float:
        hops = min(shuttle_route(plane, a, end, timing).hops for end in (ro_arm.a, ro_arm.b))
        return hops * arm_t + half

    ro_name = f"{loc}/{layout.readout_region.name}"

    def to_ro(then):
        run_phase(
            "shuttle", [("shuttle", f"{qubit(a)}->{ro_name}", f"qubit:{qubit(a)}", ro_distance(a)) for a in ancillas],
            then,
        )

    def single(then):
        run_phase("single_qubit", [("mw_pulse", f"{ro_name}.MW", f"gate:{ro_name}.MW", timing.t_1q)], then)

    def readout(then):
        res = readout_schedule(params, timing, start=loop.now)
        tl.events.extend(res.timeline.events)
        phases["readout"] += res.duration
        if then is not None:
            loop.at(loop.now + res.duration, then)

    def from_ro(then):
        run_phase(
            "shuttle", [("shuttle", f"{qubit(a)}<-{ro_name}", f"qubit:{qubit(a)}", ro_distance(a)) for a in ancillas],
            then,
        )

    steps += [to_ro, single, readout, from_ro]

    def chain(i: int):
        nxt = (lambda: chain(i + 1)) if i + 1 < len(steps) else None
        steps[i](nxt)

    loop.at(0.0, lambda: chain(0))
    loop.run()
    tl.phases = phases
    tl.period = max((e.end for e in tl.events), default=0.0)
    return tl


def cycle_summary(params: ArchParams, timing: TimingParams) -> dict:
    tl = surface_code_cycle(params, timing)
    R = timing.partition(params.N)
    return {
        "period_s": tl.period,
        "phases_s": tl.phases,
        "dominant_phase": tl.dominant_phase,
        "readout_partition": R,
        "extra_drain_lines_per_module": readout_groups(params.N, R) - 1,
    }


def json_dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str)
