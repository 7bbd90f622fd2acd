"""Unit constants and strict parsing of unit-suffixed quantities.

Everything inside the package is SI (m, m², F, V, s, A, K, Hz). Conversions
to display units happen only through the helpers here.
"""

from __future__ import annotations

import re

# length
M = 1.0
MM = 1e-3
UM = 1e-6
NM = 1e-9
# area
MM2 = MM * MM
UM2 = UM * UM
# capacitance
PF = 1e-12
FF = 1e-15
# voltage
MV = 1e-3
UV = 1e-6
# time
S = 1.0
MS = 1e-3
US = 1e-6
NS = 1e-9
# frequency
HZ = 1.0
KHZ = 1e3
MHZ = 1e6
GHZ = 1e9

E_CHARGE = 1.602176634e-19  # C, exact SI
K_B = 1.380649e-23  # J/K, exact SI


class UnitError(ValueError):
    """A quantity string did not parse or carried the wrong dimension."""


# Accepted suffixes per dimension. "u" and "μ" both mean micro.
_SUFFIXES: dict[str, dict[str, float]] = {
    "length": {"m": 1.0, "mm": MM, "um": UM, "nm": NM},
    "area": {"m2": 1.0, "mm2": MM2, "um2": UM2, "nm2": NM * NM},
    "capacitance": {"F": 1.0, "uF": 1e-6, "nF": 1e-9, "pF": PF, "fF": FF, "aF": 1e-18},
    "voltage": {"V": 1.0, "mV": MV, "uV": UV, "nV": 1e-9},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "time": {"s": 1.0, "ms": MS, "us": US, "ns": NS, "ps": 1e-12},
    "current": {"A": 1.0, "mA": 1e-3, "uA": 1e-6, "nA": 1e-9, "pA": 1e-12, "fA": 1e-15, "aA": 1e-18},
    "frequency": {"Hz": 1.0, "kHz": KHZ, "MHz": MHZ, "GHz": GHZ},
    # capacitance density, F/m²
    "cap_density": {"F/m2": 1.0, "pF/um2": PF / UM2, "fF/um2": FF / UM2, "nF/mm2": 1e-9 / MM2},
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zμ/0-9²]*)\s*$")


def parse_quantity(text: str, dimension: str) -> float:
    """Parse ``"12um"``-style text into an SI float.

    The suffix is mandatory and must belong to ``dimension``.

    >>> parse_quantity("50nm", "length")
    5e-08
    """
    if dimension not in _SUFFIXES:
        raise UnitError(f"unknown dimension {dimension!r}")
    m = _QUANTITY.match(text)
    if not m:
        raise UnitError(f"cannot parse quantity {text!r}")
    number, suffix = m.groups()
    suffix = suffix.replace("μ", "u").replace("²", "2")
    table = _SUFFIXES[dimension]
    if not suffix:
        raise UnitError(f"{text!r}: missing unit suffix (expected one of {sorted(table)})")
    if suffix not in table:
        raise UnitError(f"{text!r}: unit {suffix!r} is not a {dimension} unit (expected one of {sorted(table)})")
    return float(number) * table[suffix]


def to_um(value_m: float) -> float:
    return value_m / UM


def to_um2(value_m2: float) -> float:
    return value_m2 / UM2


def to_mm2(value_m2: float) -> float:
    return value_m2 / MM2


def to_pf(value_f: float) -> float:
    return value_f / PF


def to_ff(value_f: float) -> float:
    return value_f / FF
