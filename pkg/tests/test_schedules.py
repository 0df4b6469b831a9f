import pytest

from paygsim import Schedule
from paygsim.errors import CoverageError


def test_bare_default():
    s = Schedule(default=0.02)
    assert s.value(1999) == 0.02
    assert s.value(2050) == 0.02


def test_overrides_win_then_fall_back():
    s = Schedule(default=0.02, overrides={2006: 0.04, 2007: 0.04})
    assert s.value(2006) == 0.04
    assert s.value(2007) == 0.04
    assert s.value(2008) == 0.02


def test_no_default_requires_override():
    s = Schedule(default=None, overrides={2006: 1.5})
    assert s.value(2006) == 1.5
    with pytest.raises(CoverageError, match="2007"):
        s.value(2007)


def test_covers():
    assert Schedule(default=1.0).covers(range(2000, 2100))
    gappy = Schedule(default=None, overrides={2000: 1.0, 2002: 1.0})
    assert gappy.covers([2000, 2002])
    assert not gappy.covers([2000, 2001])


def test_from_config_bare_number():
    s = Schedule.from_config(0.034)
    assert s.default == 0.034 and s.overrides == {}
    assert Schedule.from_config(3).default == 3.0


def test_from_config_mapping():
    s = Schedule.from_config({"default": 0.02, "overrides": {"2006": 0.04}})
    assert s.value(2006) == 0.04
    assert s.value(2010) == 0.02


def test_from_config_rejects_junk():
    with pytest.raises(ValueError, match="unknown keys"):
        Schedule.from_config({"default": 1, "extra": 2}, where="x")
    with pytest.raises(ValueError, match="expected"):
        Schedule.from_config("fast", where="x")
    with pytest.raises(ValueError):
        Schedule.from_config({"default": 1, "overrides": [1, 2]}, where="x")
    with pytest.raises(ValueError):
        Schedule.from_config(True, where="x")
