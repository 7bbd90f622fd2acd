import itertools
import json
import re
from collections import Counter

import pytest

from spinplane.arch import ArchParams
from spinplane.arch import build_plane
from spinplane.netlist import (
    BoundaryCount,
    Netlist,
    NodeKind,
    SignalClass,
    StructuralError,
    closed_form_lines,
    count_boundary_lines,
    export_graph,
    generate_netlist,
    import_graph,
    readout_address_lines,
    readout_groups,
    validate_netlist,
)


def cut_from_json(data: bytes) -> Counter:
    """Independent cut count on the serialized graph."""
    doc = json.loads(data)
    inside = [n["inside"] for n in doc["nodes"]]
    return Counter(c for u, v, c in doc["edges"] if inside[u] != inside[v])


def netlist_for(M, N, x=1, R=None):
    return generate_netlist(build_plane(ArchParams(M=M, N=N, x_crossbars=x)), readout_partition=R)


def test_smallest_plane_counts():
    nl = netlist_for(1, 1)
    counts = count_boundary_lines(nl)
    oracle = cut_from_json(export_graph(nl))
    assert {c: counts[c] for c in SignalClass} == {c: oracle.get(c.value, 0) for c in SignalClass}
    assert counts[SignalClass.DC_BIAS_INPUT] == 1
    assert counts[SignalClass.READOUT_DRAIN] == 1
    assert counts[SignalClass.DEMUX_ADDRESS] == 4
    assert counts.group("shared_pulsed") == 58
    assert counts.total == 72


def test_defect_lines_2x2():
    counts = count_boundary_lines(netlist_for(2, 2, 1))
    assert counts.group("defects") == 12
    assert counts[SignalClass.DEFECT_ROW] == 8
    assert counts[SignalClass.DEFECT_COL] == 4


@pytest.mark.parametrize("M, N, x", [(m, n, x) for m in range(1, 5) for n in range(1, 5) for x in (1, 2)])
def test_cut_equals_closed_form(M, N, x):
    nl = netlist_for(M, N, x)
    cut = count_boundary_lines(nl)
    cf = closed_form_lines(ArchParams(M=M, N=N, x_crossbars=x))
    assert cut.counts == cf.counts
    assert cut.group("shared_pulsed") == 58


@pytest.mark.parametrize("M, N, R", [(1, 2, 1), (1, 2, 3), (2, 3, 4), (1, 4, 8), (2, 4, 16)])
def test_partitioned_readout_cut(M, N, R):
    cut = count_boundary_lines(netlist_for(M, N, 1, R))
    cf = closed_form_lines(ArchParams(M=M, N=N), readout_partition=R)
    assert cut.counts == cf.counts
    assert cut[SignalClass.READOUT_DRAIN] == M * M * readout_groups(N, R)


def test_validate_generated():
    for M, N, x in [(1, 1, 1), (2, 3, 2), (3, 2, 1)]:
        validate_netlist(netlist_for(M, N, x))


def test_validate_catches_unreachable_gate():
    nl = netlist_for(1, 1)
    nl.add_node(NodeKind.GATE, "orphan", True)
    with pytest.raises(StructuralError, match="not reachable"):
        validate_netlist(nl)


def test_unflagged_node_rejected():
    nl = Netlist()
    a = nl.add_node(NodeKind.REMOTE_SOURCE, "r", False)
    b = nl.add_node(NodeKind.GATE, "g", None)
    nl.connect(a, b, SignalClass.DC_BIAS_INPUT)
    with pytest.raises(StructuralError, match="no boundary flag"):
        count_boundary_lines(nl)


def test_dangling_edge_rejected():
    nl = Netlist()
    nl.add_node(NodeKind.REMOTE_SOURCE, "r", False)
    nl.connect(0, 5, SignalClass.MW)
    with pytest.raises(StructuralError):
        count_boundary_lines(nl)
    with pytest.raises(StructuralError):
        validate_netlist(nl)


def test_empty_netlist():
    counts = count_boundary_lines(Netlist())
    assert counts.total == 0
    assert all(counts[c] == 0 for c in SignalClass)


def test_json_round_trip_byte_identical():
    data = export_graph(netlist_for(2, 2, 2))
    assert export_graph(import_graph(data)) == data
    assert export_graph(netlist_for(2, 2, 2)) == data


def test_import_rejects_schema():
    with pytest.raises(StructuralError):
        import_graph(json.dumps({"schema": "other", "nodes": [], "edges": []}))


def test_dot_export():
    text = export_graph(netlist_for(1, 1), "dot").decode()
    assert text.startswith("digraph netlist {") and text.rstrip().endswith("}")
    body = text.strip().splitlines()[2:-1]
    node_re = re.compile(r'^  n\d+ \[label="[^"]*", kind="[a-z_]+", side="(inside|outside)"\];$')
    edge_re = re.compile(r'^  n\d+ -> n\d+ \[class="[A-Za-z.]+"\];$')
    assert all(node_re.match(s) or edge_re.match(s) for s in body)
    drains = re.findall(r'label="port:ReadoutDrain[^"]*"', text)
    assert len(drains) == 1
    with pytest.raises(ValueError):
        export_graph(Netlist(), "xml")


def test_monotone_in_each_parameter():
    def total(M, N, x):
        return closed_form_lines(ArchParams(M=M, N=N, x_crossbars=x)).total

    for M, N, x in itertools.product(range(1, 7), range(1, 7), (1, 2)):
        t = total(M, N, x)
        assert total(M + 1, N, x) >= t
        assert total(M, N + 1, x) >= t
        assert total(M, N, x + 1) >= t


@pytest.mark.parametrize("M", [1, 2, 3, 5])
def test_dc_growth_when_M_doubles(M):
    a = closed_form_lines(ArchParams(M=M, N=3)).group("dc")
    b = closed_form_lines(ArchParams(M=2 * M, N=3)).group("dc")
    assert b - a == 3 * M * M


def test_readout_terms():
    assert readout_address_lines(1) == 0
    assert readout_address_lines(5) == 6
    cf = closed_form_lines(ArchParams(M=1, N=1))
    assert cf[SignalClass.READOUT_ADDRESS] + cf[SignalClass.READOUT_SOURCE_BIAS] == 1
    assert readout_groups(4, 8) == 2
    with pytest.raises(ValueError):
        readout_groups(2, 5)


def test_boundary_count_dict():
    d = closed_form_lines(ArchParams(M=1, N=1)).to_dict()
    assert d["total"] == 72
    assert d["groups"] == {"dc": 9, "shared_pulsed": 58, "defects": 3, "readout": 2}
    with pytest.raises(StructuralError):
        BoundaryCount({SignalClass.MW: -1})


def test_gate_nodes_per_cell():
    nl = netlist_for(1, 2)
    gates = [i for i in nl.nodes_of(NodeKind.GATE) if nl.info[i] is not None and nl.info[i].resolution is not None]
    assert len(gates) == 64 * 4
