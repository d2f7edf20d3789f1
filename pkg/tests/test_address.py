import pytest
from hypothesis import given, strategies as st

from fmol.address import ParamAddress, parse_address
from fmol.errors import AddressError


def test_param_form_roundtrip():
    a = parse_address("t3.p1.param2")
    assert a == ParamAddress(3, "p1", ("param", 2))
    assert a.text() == "t3.p1.param2"


def test_lfo_form_roundtrip():
    a = parse_address("t0.g.lfo3.depth")
    assert a == ParamAddress(0, "g", ("lfo", 3, "depth"))
    assert a.text() == "t0.g.lfo3.depth"


@pytest.mark.parametrize("bad", [
    "t0.g", "t0.x.param0", "t0.g.param", "t0.g.lfo4.rate", "t0.g.lfo0.phase",
    "tX.g.param0", "t0.g.param0.extra", "", "t-1.g.param0", "t0.p3.param0",
])
def test_bad_addresses_rejected(bad):
    with pytest.raises(AddressError):
        parse_address(bad)


def test_slot_index():
    assert parse_address("t0.g.param0").slot_index == 0
    assert parse_address("t0.p0.param0").slot_index == 1
    assert parse_address("t0.p2.param0").slot_index == 3


@given(st.integers(0, 5), st.sampled_from(["g", "p0", "p1", "p2"]),
       st.integers(0, 9))
def test_param_roundtrip_property(track, slot, k):
    a = ParamAddress(track, slot, ("param", k))
    assert parse_address(a.text()) == a


@given(st.integers(0, 5), st.sampled_from(["g", "p0", "p1", "p2"]),
       st.integers(0, 3), st.sampled_from(["rate", "depth", "shape", "target"]))
def test_lfo_roundtrip_property(track, slot, j, field):
    a = ParamAddress(track, slot, ("lfo", j, field))
    assert parse_address(a.text()) == a
