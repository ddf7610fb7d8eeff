import dataclasses
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omm_cascade.config import ConfigError, dump_config, parse_config, resolve_path, set_param
from omm_cascade.model import hz
from omm_cascade.sweep import baseline

BASELINE_TEXT = (Path(__file__).resolve().parents[1] / "configs" / "baseline.ini").read_text()


def test_baseline_file_matches_preset():
    p = parse_config(BASELINE_TEXT)
    b = baseline()
    assert p.system1.kappa_a == pytest.approx(hz(1.5e6), rel=1e-15)
    for f in dataclasses.fields(b.system1):
        assert getattr(p.system1, f.name) == pytest.approx(getattr(b.system1, f.name), rel=1e-15)
    assert p.system2.G_cb is None
    assert p.environment.omega_c == pytest.approx(b.environment.omega_c, rel=1e-15)


def test_empty_system2_copies_system1():
    p = parse_config(BASELINE_TEXT)
    assert dataclasses.replace(p.system2, G_cb=p.system1.G_cb) == p.system1


def test_rad_suffix():
    p = parse_config(BASELINE_TEXT.replace("kappa_a = 1.5e6", "kappa_a_rad = 12.5"))
    assert p.system1.kappa_a == 12.5


def test_system2_override():
    p = parse_config(BASELINE_TEXT.replace("[system2]", "[system2]\nkappa_c = 3e6\nG_cb = 1e6"))
    assert p.system2.kappa_c == hz(3e6) and p.system2.G_cb == hz(1e6)
    assert p.system1.kappa_c == hz(2e6)


def test_all_problems_reported():
    text = BASELINE_TEXT.replace("eta1 = 0.75", "eta1 = 1.3").replace("g_am = 4e6", "g_am = 4e6\nfoo = 1")
    text = text.replace("eta2 = 0.75", "eta2 = abc")
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    msg = str(info.value)
    assert "cascade.eta1" in msg and "system1.foo" in msg and "cascade.eta2" in msg
    assert len(info.value.problems) == 3


def test_syntax_error_has_line_number():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config("[system1]\nkappa_a = 1\nthis line is broken\n")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("kappa_a = 1\n")


def test_missing_required_keys():
    with pytest.raises(ConfigError, match="system1.g_am: missing"):
        parse_config("[system1]\nkappa_a = 1\n")


def test_unknown_section():
    with pytest.raises(ConfigError, match=r"\[stage3\]"):
        parse_config(BASELINE_TEXT + "\n[stage3]\nx = 1\n")


def test_round_trip_is_exact():
    p = parse_config(BASELINE_TEXT)
    assert parse_config(dump_config(p)) == p


def test_round_trip_with_drive():
    text = BASELINE_TEXT + "\n[drive]\nOmega = 1e7\ng_mb_bare = 10\ng_cb_bare = 5\nP_L = 1e-3\nomega_L = 1.9e14\nN = 3e18\n"
    p = parse_config(text)
    q = parse_config(dump_config(p))
    assert q == p and q.drive.extras == {"N": 3e18}


@settings(max_examples=30, deadline=None)
@given(
    values=st.lists(st.floats(1e-3, 1e9, allow_nan=False), min_size=4, max_size=4),
    eta=st.floats(0.0, 1.0),
)
def test_round_trip_property(values, eta):
    p = baseline()
    for path, v in zip(("kappa_a", "system2.delta_a", "system1.G_cb", "gamma_b"), values):
        p = set_param(p, path, v)
    p = set_param(p, "eta2", eta)
    assert parse_config(dump_config(p)) == p


class TestPaths:
    def test_bare_subsystem_key_targets_both(self):
        assert resolve_path("kappa_a")[0] == ("system1", "system2")

    def test_bare_G_cb_leaves_derived_stage2(self):
        p = set_param(baseline(), "G_cb", 5e6)
        assert p.system1.G_cb == hz(5e6) and p.system2.G_cb is None

    def test_section_keys(self):
        assert resolve_path("eta1") == (("cascade",), "eta1", False)
        assert resolve_path("system2.delta_a_rad") == (("system2",), "delta_a", True)

    @pytest.mark.parametrize("bad", ["bogus", "system3.kappa_a", "cascade.kappa_a", "eta1_rad"])
    def test_unknown(self, bad):
        with pytest.raises(KeyError, match="unknown parameter path"):
            resolve_path(bad)

    def test_value_checked(self):
        with pytest.raises(ValueError):
            set_param(baseline(), "eta1", 1.5)

    def test_hz_conversion(self):
        p = set_param(baseline(), "delta_a", -20e6)
        assert p.system1.delta_a == p.system2.delta_a == hz(-20e6)
        assert np.isclose(set_param(baseline(), "delta_a_rad", 3.0).system1.delta_a, 3.0)
