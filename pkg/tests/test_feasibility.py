import math

import pytest
from hypothesis import given, strategies as st

from rydosc.feasibility import (
    TWO_PI,
    HardwareConstraints,
    Protocol,
    ScheduleError,
    Violation,
    capacity,
    rescale,
    validate,
)

A, RB = 5.42, 9.76  # um, 1 MHz baseline with R_b / a = 1.8


def test_rescale_to_20_mhz():
    p = rescale(TWO_PI, A, RB, TWO_PI * 20)
    assert p.a == pytest.approx(8.93, abs=0.005)
    # oracle: a' = a * 20^(1/6)
    assert p.a == pytest.approx(A * math.exp(math.log(20) / 6), rel=1e-12)
    assert p.effective_duration == pytest.approx(40.0)
    assert p.blockade_radius == pytest.approx(RB / 20 ** (1 / 6), rel=1e-12)


def test_rescale_to_2_mhz():
    assert rescale(TWO_PI, A, RB, TWO_PI * 2).effective_duration == pytest.approx(4.0)


def test_identity_rescale():
    p = rescale(TWO_PI, A, RB, TWO_PI, delta_glob=8 * math.pi)
    assert (p.a, p.blockade_radius, p.delta_glob) == (A, RB, 8 * math.pi)


def test_capacity_defaults():
    assert capacity(HardwareConstraints(), A) == (13, 14, 54)
    assert capacity(HardwareConstraints(), 8.93) == (8, 8, 32)
    assert capacity(HardwareConstraints(), 100.0) == (0, 0, 0)
    with pytest.raises(ValueError):
        capacity(HardwareConstraints(), 0.0)


def test_validate_flags_drive_and_detuning():
    c = HardwareConstraints()
    assert validate(rescale(TWO_PI, A, RB, TWO_PI, delta_glob=8 * math.pi), c) == []
    bad = validate(rescale(TWO_PI, A, RB, TWO_PI * 20, delta_glob=8 * math.pi), c)
    names = {v.quantity for v in bad}
    assert names == {"omega", "delta_glob"}
    omega = next(v for v in bad if v.quantity == "omega")
    assert omega.margin == pytest.approx(TWO_PI * 20 - 15.8)


def test_footprint_fits_field_of_view():
    p = rescale(TWO_PI, A, RB, TWO_PI * 20)
    assert p.footprint == pytest.approx(4 * p.a)
    assert p.footprint < 75.0


def test_violation_margin_sign():
    assert Violation("x", 1.0, (0.0, 2.0)).margin < 0
    assert Violation("x", 3.0, (0.0, 2.0)).margin == 1.0


def test_schedule_and_input_errors():
    with pytest.raises(ScheduleError):
        rescale(TWO_PI, A, RB, TWO_PI * 2, t_prep=4.0)
    with pytest.raises(ValueError):
        rescale(TWO_PI, A, RB, -1.0)
    with pytest.raises(ValueError):
        HardwareConstraints(omega_range=(2.0, 1.0))


def test_protocol_dict():
    d = Protocol(TWO_PI, A, RB, 2.0, 2.0).to_dict()
    assert d["effective_duration"] == pytest.approx(2.0)
    assert d["rb_over_a"] == pytest.approx(1.8, abs=1e-3)


@given(st.floats(0.1, 100.0))
def test_rescale_follows_printed_scalings(mhz):
    p = rescale(TWO_PI, A, RB, TWO_PI * mhz)
    # R_b shrinks and a grows by the same factor, so their product is fixed
    assert p.blockade_radius * p.a == pytest.approx(RB * A, rel=1e-12)
    assert p.effective_duration == pytest.approx(2.0 * mhz, rel=1e-12)


@given(st.floats(0.1, 100.0).filter(lambda x: abs(x - 1) > 1e-3))
def test_rescale_preserves_rb_over_a(mhz):
    # stated invariant; incompatible with a' = 8.93 at 20 MHz, which needs
    # a to grow while R_b shrinks, so this fails for any Omega' != Omega
    p = rescale(TWO_PI, A, RB, TWO_PI * mhz)
    assert p.blockade_radius / p.a == pytest.approx(RB / A, rel=1e-12)


@given(st.floats(1.0, 40.0), st.floats(1.0, 40.0))
def test_capacity_monotone_in_spacing(a1, a2):
    lo, hi = sorted((a1, a2))
    c = HardwareConstraints()
    assert all(x >= y for x, y in zip(capacity(c, lo), capacity(c, hi)))
