"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible design,
3 infeasible defect pattern.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .arch import ParameterError, build_plane, plane_summary
from .config import Config, ConfigError, resolve_config
from .estimator import estimate
from .netlist import SignalClass, closed_form_lines, count_boundary_lines, export_graph, generate_netlist
from .rent import FitError, parse_sweep, points_to_csv, rent_fit
from .sim import (
    arm_transit_time,
    cycle_summary,
    readout_schedule,
    refresh_schedule,
    shuttle_route,
    surface_code_cycle,
)
from .surgery import crossbar_activation, load_pattern, one_defect_per_crossbar, realizable
from .units import UnitError
from .wave import ShuttleWaveConfig, displacement_per_period

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_DEFECT = 0, 1, 2, 3
REPORT_SCHEMA = "spinplane.cli/1"
NETLIST_MAX_CELLS = 65536


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def config_options(f):
    f = click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Config file (key = value).")(f)
    f = click.option("--set", "sets", multiple=True, metavar="KEY=VALUE", help="Override one config key.")(f)
    f = click.option("-M", "M", type=int, help="Modules per plane side (arch.M).")(f)
    f = click.option("-N", "N", type=int, help="Unit cells per module side (arch.N).")(f)
    f = click.option("-x", "x", type=int, help="Defect crossbars (arch.x_crossbars).")(f)
    return f


def load_config(config_path, sets, M=None, N=None, x=None) -> Config:
    text = None
    if config_path:
        try:
            text = Path(config_path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
    overrides: dict[str, str] = {}
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = v.strip()
    for key, val in (("arch.M", M), ("arch.N", N), ("arch.x_crossbars", x)):
        if val is not None:
            overrides[key] = str(val)
    return resolve_config(text, overrides, origin=config_path or "<config>")


def _envelope(cfg: Config, command: str, body: dict) -> dict:
    return {"schema": REPORT_SCHEMA, "version": __version__, "command": command, "config": cfg.echo(), **body}


def _write(path: str, data: bytes | str) -> None:
    try:
        if isinstance(data, str):
            Path(path).write_text(data)
        else:
            Path(path).write_bytes(data)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc}") from None


@click.group()
@click.version_option(__version__, prog_name="spinplane")
def cli() -> None:
    """Sparse spin-qubit plane: resources, wiring, timing and defect addressing."""


@cli.command()
@config_options
def plane(config_path, sets, M, N, x):
    """Print the plane summary (counts and geometry)."""
    cfg = load_config(config_path, sets, M, N, x)
    click.echo(_dump(_envelope(cfg, "plane", {"plane": plane_summary(build_plane(cfg.arch))})))
    return EXIT_OK


@cli.command("estimate")
@config_options
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default=None)
@click.option("--qubits", type=int, default=None, help="Size the plane for this many qubits instead of M*N.")
def cmd_estimate(config_path, sets, M, N, x, fmt, qubits):
    """Capacitance, footprint, plane area and module-size limits."""
    cfg = load_config(config_path, sets, M, N, x)
    report = estimate(cfg.arch, cfg.elec, target_qubits=qubits, assumed={k: cfg.values[k] for k in cfg.assumed})
    if (fmt or cfg.output_format) == "text":
        click.echo(report.to_text(), nl=False)
    else:
        click.echo(_dump(_envelope(cfg, "estimate", {"report": report.to_json()})))
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


@cli.command("netlist")
@config_options
@click.option("--format", "fmt", type=click.Choice(["dot", "json"]), default="json")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the graph here.")
@click.option("--readout-partition", type=int, default=None)
@click.option("--max-cells", type=int, default=NETLIST_MAX_CELLS, show_default=True)
def cmd_netlist(config_path, sets, M, N, x, fmt, out, readout_partition, max_cells):
    """Generate the wiring graph and count boundary lines by graph cut."""
    cfg = load_config(config_path, sets, M, N, x)
    plane_ = build_plane(cfg.arch)
    if plane_.unit_cell_count > max_cells:
        raise ConfigError(
            f"{plane_.unit_cell_count} unit cells exceeds --max-cells {max_cells}; use 'rent' for closed-form counts"
        )
    R = readout_partition if readout_partition is not None else cfg.timing.readout_partition
    nl = generate_netlist(plane_, readout_partition=R)
    counts = count_boundary_lines(nl)
    if out:
        _write(out, export_graph(nl, fmt))
    body = {
        "boundary": counts.to_dict(),
        "closed_form": closed_form_lines(cfg.arch, readout_partition=R).to_dict(),
        "nodes": nl.node_count,
        "edges": len(nl.edges),
        "out": out,
    }
    click.echo(_dump(_envelope(cfg, "netlist", body)))
    return EXIT_OK


@cli.command("rent")
@config_options
@click.option("--sweep", "sweep_spec", required=True, help="e.g. 'M=N:2,4,8,16', 'M:1,2,4' or 'N:1,2,4'.")
@click.option("--basis", type=click.Choice(["qubits", "dc_gates"]), default="qubits", show_default=True)
@click.option("--method", type=click.Choice(["auto", "netlist", "closed_form"]), default="auto", show_default=True)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Write sweep points as CSV.")
def cmd_rent(config_path, sets, M, N, x, sweep_spec, basis, method, csv_path):
    """Sweep plane sizes and fit Rent's exponent of boundary lines vs gate count."""
    # the sweep supplies M and/or N; 1 fills whichever is neither swept nor given
    cfg = load_config(config_path, ("arch.M=1", "arch.N=1") + tuple(sets), M, N, x)
    try:
        sweep = parse_sweep(sweep_spec, cfg.arch)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    fit = rent_fit(sweep, basis=basis, method=method)
    csv_text = points_to_csv(fit.points)
    if csv_path:
        _write(csv_path, csv_text)
    body = {
        "fit": {"p": fit.p, "k": fit.k, "residual": fit.residual, "basis": basis, "tail_exponent": fit.tail_exponent},
        "points": [
            {"M": pt.params.M, "N": pt.params.N, "x": pt.params.x_crossbars, "G": pt.G, "T": pt.T, "method": pt.method}
            for pt in fit.points
        ],
        "csv": csv_path,
    }
    click.echo(_dump(_envelope(cfg, "rent", body)))
    return EXIT_OK


def _vertex(text: str):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"vertex must be 'X,Y', got {text!r}") from None
    return (a, b)


@cli.command("simulate")
@config_options
@click.option("--protocol", type=click.Choice(["refresh", "readout", "cycle", "shuttle"]), required=True)
@click.option("--timeline-csv", type=click.Path(dir_okay=False), default=None)
@click.option("--timeline-json", type=click.Path(dir_okay=False), default=None)
@click.option("--from", "src", default="0,0", show_default=True, help="Shuttle start vertex X,Y.")
@click.option("--to", "dst", default="1,0", show_default=True, help="Shuttle end vertex X,Y.")
@click.option("--all-modules", is_flag=True, help="Expand every module into events, not just module (0,0).")
def cmd_simulate(config_path, sets, M, N, x, protocol, timeline_csv, timeline_json, src, dst, all_modules):
    """Run one protocol simulation and print its summary."""
    cfg = load_config(config_path, sets, M, N, x)
    p, timing = cfg.arch, cfg.timing
    timeline = None
    if protocol == "refresh":
        res = refresh_schedule(p, cfg.elec, timing, all_modules=all_modules)
        timeline, summary = res.timeline, res.summary()
    elif protocol == "readout":
        res = readout_schedule(p, timing, all_modules=all_modules)
        counts = closed_form_lines(p, readout_partition=res.partition)
        timeline = res.timeline
        summary = {
            "duration_s": res.duration,
            "readout_partition": res.partition,
            "groups_per_module": res.groups,
            "extra_drain_lines_per_module": res.lines_delta,
            "readout_drain_lines": counts[SignalClass.READOUT_DRAIN],
            "boundary_total": counts.total,
        }
    elif protocol == "cycle":
        timeline = surface_code_cycle(p, timing)
        summary = cycle_summary(p, timing)
    else:
        plane_ = build_plane(p)
        route = shuttle_route(plane_, _vertex(src), _vertex(dst), timing)
        wave = ShuttleWaveConfig(frequency=timing.f_shuttle, gate_pitch=p.gate_pitch, kernel_width=p.gate_pitch)
        summary = {
            "gates_per_arm": plane_.arm_gates,
            "per_arm_time_s": arm_transit_time(p, timing),
            "route": [list(v) for v in route.vertices],
            "hops": route.hops,
            "duration_s": route.duration,
            "wave_displacement_per_period_pitches": displacement_per_period(wave),
        }
    if timeline is not None:
        if timeline_csv:
            _write(timeline_csv, timeline.to_csv())
        if timeline_json:
            _write(timeline_json, _dump(timeline.to_json()) + "\n")
    click.echo(_dump(_envelope(cfg, "simulate", {"protocol": protocol, "summary": summary})))
    return EXIT_OK


@cli.command("defects")
@config_options
@click.option("--pattern", "pattern_path", type=click.Path(dir_okay=False), required=True,
              help="JSON list of [row, col] data-qubit coordinates.")
@click.option("--protected", "protected_path", type=click.Path(dir_okay=False), default=None,
              help="Relaxed mode: extra activations allowed except on these cells.")
def cmd_defects(config_path, sets, M, N, x, pattern_path, protected_path):
    """Decide whether a defect pattern is addressable with the configured crossbars."""
    cfg = load_config(config_path, sets, M, N, x)
    grid = build_plane(cfg.arch).data_grid
    try:
        pattern = load_pattern(Path(pattern_path).read_text(), grid)
        protected = None
        if protected_path:
            protected = load_pattern(Path(protected_path).read_text(), grid).cells
    except OSError as exc:
        raise ConfigError(f"cannot read pattern: {exc}") from None
    k = cfg.arch.x_crossbars
    assignment = realizable(pattern, k, grid, protected)
    body = {
        "grid": list(grid),
        "x": k,
        "pattern": pattern.to_json(),
        "realizable": assignment is not None,
        "one_defect_per_crossbar": one_defect_per_crossbar(pattern, k),
        "mode": "exact" if protected is None else "relaxed",
    }
    if assignment is not None:
        body["assignment"] = assignment.to_json()
        body["activated"] = crossbar_activation(assignment).to_json()
    click.echo(_dump(_envelope(cfg, "defects", body)))
    return EXIT_OK if assignment is not None else EXIT_DEFECT


def main(argv: list[str] | None = None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="spinplane", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except (ConfigError, ParameterError, UnitError, FitError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_USAGE
    return rv if isinstance(rv, int) else EXIT_OK


def run() -> None:
    sys.exit(main())

