import json

import pytest

from spinplane.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_estimate_reference(capsys):
    code, out, _ = run(capsys, "estimate", "-M", "16", "-N", "32")
    assert code == 0
    doc = json.loads(out)
    rep = doc["report"]
    assert rep["capacitance"]["C_unit_cell_pF"] == pytest.approx(450, rel=0.05)
    assert rep["footprint"]["total_electronics_area_um2"] == pytest.approx(510, rel=0.05)
    assert rep["plane"]["plane_area_mm2"] == pytest.approx(151, rel=0.01)
    assert rep["plane"]["remaining_area_mm2"] == pytest.approx(575, rel=0.01)
    assert doc["schema"] == "spinplane.cli/1"
    assert doc["config"]["values"]["arch.M"] == "16"
    assert "elec.I_leak" in doc["config"]["assumed"]


def test_estimate_text(capsys):
    code, out, _ = run(capsys, "estimate", "-M", "1", "-N", "1", "--format", "text")
    assert code == 0 and "footprint.d_min_um" in out


def test_estimate_small_pitch_infeasible(capsys):
    code, out, _ = run(capsys, "estimate", "-M", "1", "-N", "1", "--set", "arch.d=5um")
    assert code == 2
    assert json.loads(out)["report"]["footprint"]["feasible"] is False


def test_estimate_qubit_target(capsys):
    assert run(capsys, "estimate", "-M", "16", "-N", "32", "--qubits", str(2**22))[0] == 2
    assert run(capsys, "estimate", "-M", "16", "-N", "32", "--qubits", "12345")[0] == 1


def test_missing_field_and_bad_key(capsys):
    assert run(capsys, "estimate")[0] == 1
    assert run(capsys, "estimate", "-M", "1", "-N", "1", "--set", "arch.bogus=1")[0] == 1
    assert run(capsys, "estimate", "-M", "1", "-N", "1", "--set", "arch.d=12")[0] == 1
    assert run(capsys, "nosuchcommand")[0] == 1


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "plane.cfg"
    cfg.write_text("arch.M = 2\narch.N = 2\nelec.I_leak = 1fA\n")
    code, out, _ = run(capsys, "plane", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["plane"]["counts"]["qubits"] == 64
    assert run(capsys, "plane", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_netlist(tmp_path, capsys):
    out_file = tmp_path / "g.dot"
    code, out, _ = run(capsys, "netlist", "-M", "1", "-N", "1", "--format", "dot", "--out", str(out_file))
    assert code == 0
    doc = json.loads(out)
    assert doc["boundary"] == doc["closed_form"]
    assert doc["boundary"]["total"] == 72
    text = out_file.read_text()
    assert text.startswith("digraph") and text.count('label="port:ReadoutDrain') == 1
    first = out_file.read_bytes()
    run(capsys, "netlist", "-M", "1", "-N", "1", "--format", "dot", "--out", str(out_file))
    assert out_file.read_bytes() == first


def test_netlist_unwritable(tmp_path, capsys):
    bad = tmp_path / "nodir" / "g.json"
    assert run(capsys, "netlist", "-M", "1", "-N", "1", "--out", str(bad))[0] == 1


def test_netlist_repeat_identical(capsys):
    a = run(capsys, "netlist", "-M", "2", "-N", "2", "--readout-partition", "2")
    b = run(capsys, "netlist", "-M", "2", "-N", "2", "--readout-partition", "2")
    assert a == b and a[0] == 0
    assert json.loads(a[1])["boundary"]["ReadoutDrain"] == 8


def test_rent(tmp_path, capsys):
    csv_file = tmp_path / "rent.csv"
    code, out, _ = run(capsys, "rent", "--sweep", "M=N:2,4,8,16", "--csv", str(csv_file))
    assert code == 0
    doc = json.loads(out)
    assert doc["fit"]["p"] == pytest.approx(0.3290, abs=1e-3)
    lines = csv_file.read_text().splitlines()
    assert lines[0].startswith("M,N,x,G,T_total,") and len(lines) == 5


def test_rent_fixed_n(capsys):
    code, out, _ = run(capsys, "rent", "--sweep", "M:2,4,8,16", "-N", "1")
    assert code == 0 and json.loads(out)["points"][0]["N"] == 1


def test_rent_one_point(capsys):
    assert run(capsys, "rent", "--sweep", "M=N:4")[0] == 1


def test_simulate_cycle(capsys):
    code, out, _ = run(capsys, "simulate", "-M", "1", "-N", "1", "--protocol", "cycle")
    assert code == 0 and json.loads(out)["summary"]["dominant_phase"] == "readout"


def test_simulate_refresh_zero_leak(tmp_path, capsys):
    csv_file = tmp_path / "t.csv"
    code, out, _ = run(
        capsys, "simulate", "-M", "1", "-N", "1", "--protocol", "refresh", "--set", "elec.I_leak=0aA",
        "--timeline-csv", str(csv_file),
    )
    assert code == 0
    s = json.loads(out)["summary"]
    assert s["worst_case_droop_V"] == {"coarse": 0.0, "fine": 0.0}
    assert csv_file.read_text().startswith("time,kind,location,duration,resource")


def test_simulate_shuttle(capsys):
    code, out, _ = run(capsys, "simulate", "-M", "1", "-N", "1", "--protocol", "shuttle")
    s = json.loads(out)["summary"]
    assert code == 0
    assert s["per_arm_time_s"] == pytest.approx((240 / 4) / 100e6)
    assert s["wave_displacement_per_period_pitches"] == pytest.approx(4, rel=0.05)


def test_simulate_readout(tmp_path, capsys):
    js = tmp_path / "t.json"
    code, out, _ = run(
        capsys, "simulate", "-M", "1", "-N", "4", "--protocol", "readout", "--set", "timing.readout_partition=8",
        "--timeline-json", str(js),
    )
    s = json.loads(out)["summary"]
    assert code == 0
    assert s["duration_s"] == pytest.approx(80e-6) and s["extra_drain_lines_per_module"] == 1
    assert json.loads(js.read_text())["schema"] == "spinplane.timeline/1"


def test_defects(tmp_path, capsys):
    pat = tmp_path / "p.json"
    pat.write_text("[[0, 0], [1, 1]]")
    code, out, _ = run(capsys, "defects", "-M", "1", "-N", "2", "--pattern", str(pat), "-x", "2")
    assert code == 0 and json.loads(out)["realizable"] is True
    assert run(capsys, "defects", "-M", "1", "-N", "2", "--pattern", str(pat), "-x", "1")[0] == 3
    prot = tmp_path / "prot.json"
    prot.write_text("[]")
    code, out, _ = run(capsys, "defects", "-M", "1", "-N", "2", "--pattern", str(pat), "--protected", str(prot))
    assert code == 0 and json.loads(out)["mode"] == "relaxed"
    pat.write_text("[[9, 9]]")
    assert run(capsys, "defects", "-M", "1", "-N", "2", "--pattern", str(pat))[0] == 1
