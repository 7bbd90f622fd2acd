"""Layered configuration: built-in defaults <- config file <- command-line overrides.

The file format is one ``section.key = value`` per line; ``#`` starts a
comment. Physical quantities need an explicit unit suffix (``12um``, ``1mV``,
``100MHz``). Unknown keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .arch import ArchParams
from .estimator import ElectronicsParams
from .sim import TimingParams
from .units import UnitError, parse_quantity

CONFIG_SCHEMA = "spinplane.config/1"


class ConfigError(ValueError):
    pass


# key -> (dimension or "int"/"float"/"str", target section, attribute, default display)
KEYS: dict[str, tuple[str, str, str, str | None]] = {
    "arch.M": ("int", "arch", "M", None),
    "arch.N": ("int", "arch", "N", None),
    "arch.d": ("length", "arch", "d", "12um"),
    "arch.gate_pitch": ("length", "arch", "gate_pitch", "50nm"),
    "arch.dv_coarse": ("voltage", "arch", "dv_coarse", "1mV"),
    "arch.dv_fine": ("voltage", "arch", "dv_fine", "1uV"),
    "arch.T_op": ("temperature", "arch", "T_op", "1K"),
    "arch.x_crossbars": ("int", "arch", "x_crossbars", "1"),
    "arch.die_w": ("length", "arch", "die_w", "22mm"),
    "arch.die_h": ("length", "arch", "die_h", "33mm"),
    "elec.cap_density": ("cap_density", "elec", "cap_density", "1pF/um2"),
    "elec.demux_footprint": ("area", "elec", "demux_footprint_per_cell", "60um2"),
    "elec.t_update": ("time", "elec", "t_update", "100ns"),
    "elec.I_leak": ("current", "elec", "I_leak", "1aA"),
    "elec.droop_fraction": ("float", "elec", "droop_fraction", "0.5"),
    "timing.t_readout": ("time", "timing", "t_readout", "10us"),
    "timing.t_1q": ("time", "timing", "t_1q", "1us"),
    "timing.t_2q": ("time", "timing", "t_2q", "100ns"),
    "timing.f_shuttle": ("frequency", "timing", "f_shuttle", "100MHz"),
    "timing.readout_partition": ("int", "timing", "readout_partition", None),
    "output.format": ("str", "output", "format", "json"),
}

# Defaults with no reference value behind them; echoed as assumed when not overridden.
ASSUMED_KEYS = (
    "elec.t_update",
    "elec.I_leak",
    "elec.droop_fraction",
    "timing.t_readout",
    "timing.t_1q",
    "timing.t_2q",
    "timing.f_shuttle",
)
REQUIRED_KEYS = ("arch.M", "arch.N")


def _convert(key: str, raw: str):
    kind = KEYS[key][0]
    raw = raw.strip()
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw
        return parse_quantity(raw, kind)
    except (UnitError, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{n}: expected 'section.key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{origin}:{n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{origin}:{n}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class Config:
    arch: ArchParams
    elec: ElectronicsParams
    timing: TimingParams
    output_format: str
    values: dict[str, str] = field(default_factory=dict)
    sources: dict[str, str] = field(default_factory=dict)  # key -> default|file|flag

    @property
    def assumed(self) -> list[str]:
        return [k for k in ASSUMED_KEYS if self.sources.get(k) == "default"]

    def echo(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA,
            "values": {k: self.values[k] for k in sorted(self.values)},
            "assumed": self.assumed,
        }


def resolve_config(file_text: str | None = None, overrides: dict[str, str] | None = None, origin: str = "<config>"):
    layered: dict[str, str] = {}
    sources: dict[str, str] = {}
    for key, (_, _, _, default) in KEYS.items():
        if default is not None:
            layered[key] = default
            sources[key] = "default"
    if file_text is not None:
        for key, value in parse_config_text(file_text, origin).items():
            layered[key] = value
            sources[key] = "file"
    for key, value in (overrides or {}).items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        layered[key] = str(value)
        sources[key] = "flag"
    missing = [k for k in REQUIRED_KEYS if k not in layered]
    if missing:
        raise ConfigError(f"missing required field(s): {', '.join(missing)}")
    sections: dict[str, dict] = {"arch": {}, "elec": {}, "timing": {}, "output": {}}
    for key, raw in layered.items():
        _, section, attr, _ = KEYS[key]
        sections[section][attr] = _convert(key, raw)
    fmt = sections["output"].get("format", "json")
    if fmt not in ("json", "text"):
        raise ConfigError(f"output.format must be 'json' or 'text', got {fmt!r}")
    arch = ArchParams(**sections["arch"])
    elec = ElectronicsParams(**sections["elec"])
    tkw = dict(sections["timing"])
    tkw["t_update"] = elec.t_update
    timing = TimingParams(**tkw)
    return Config(arch, elec, timing, fmt, layered, sources)


def config_keys_table() -> list[tuple[str, str, str]]:
    """(key, dimension, default) rows for documentation."""
    rows = []
    for k, (kind, _, _, default) in KEYS.items():
        rows.append((k, kind, "required" if k in REQUIRED_KEYS else (default or "-")))
    return rows
