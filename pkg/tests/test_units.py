import pytest

from spinplane import units
from spinplane.units import UnitError, parse_quantity


@pytest.mark.parametrize(
    "text, dim, expected",
    [
        ("12um", "length", 12e-6),
        ("12μm", "length", 12e-6),
        ("50nm", "length", 50e-9),
        ("22mm", "length", 22e-3),
        ("1mV", "voltage", 1e-3),
        ("1uV", "voltage", 1e-6),
        ("100MHz", "frequency", 1e8),
        ("10us", "time", 1e-5),
        ("1aA", "current", 1e-18),
        ("60um2", "area", 60e-12),
        ("60μm²", "area", 60e-12),
        ("1pF/um2", "cap_density", 1.0),
        ("1K", "temperature", 1.0),
        ("1.5e-3 s", "time", 1.5e-3),
    ],
)
def test_parse_quantity(text, dim, expected):
    assert parse_quantity(text, dim) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "text, dim",
    [("12", "length"), ("12 furlong", "length"), ("1mV", "length"), ("abc", "time"), ("1um", "nope")],
)
def test_parse_quantity_rejects(text, dim):
    with pytest.raises(UnitError):
        parse_quantity(text, dim)


def test_converters():
    assert units.to_um(12e-6) == pytest.approx(12)
    assert units.to_um2(576e-12) == pytest.approx(576)
    assert units.to_mm2(1e-6) == pytest.approx(1)
    assert units.to_pf(13.8e-12) == pytest.approx(13.8)
    assert units.to_ff(0.16e-15) == pytest.approx(0.16)
