import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st
from scipy import constants as si

from lndimer.constants import UnknownSpeciesError, load_constants
from lndimer.lines import (
    LineListError,
    StrengthKind,
    TransitionRecord,
    bundled_linelist,
    einstein_a_from_dipole_sq,
    oscillator_f_from_dipole_sq,
    parse_linelist,
    reduced_dipole_sq,
)
from lndimer.wigner import AngMom

HEADER = "delta_e_cm,kind,strength,u_strength,two_j,source\n"
EA0 = si.e * si.physical_constants["Bohr radius"][0]


def sq_dipole_from_a_si(a_per_s, delta_e_cm, tb):
    """Line strength from a spontaneous rate, evaluated in SI units."""
    omega = 2 * math.pi * si.c * delta_e_cm * 100.0
    s = 3 * math.pi * si.epsilon_0 * si.hbar * si.c**3 * (tb + 1) * a_per_s / omega**3
    return s / EA0**2



def write(tmp_path, body, name="lines.csv"):
    p = tmp_path / name
    p.write_text(body)
    return p


def test_bundled_counts():
    er = bundled_linelist("Er")
    tm = bundled_linelist("Tm")
    assert er.ground_j.twice_j == 12 and tm.ground_j.twice_j == 7
    assert len(er) > 20 and len(tm) > 20
    assert {r.j_excited.twice_j for r in er} == {10, 12, 14}
    assert {r.j_excited.twice_j for r in tm} == {5, 7, 9}
    assert {r.strength_kind for r in tm} == {StrengthKind.EINSTEIN_A, StrengthKind.OSCILLATOR_F}


def test_einstein_a_conversion_si_oracle():
    rec = TransitionRecord(24943.272, StrengthKind.EINSTEIN_A, 1.5, 0.1, AngMom(14))
    got = reduced_dipole_sq(rec, AngMom(12))
    assert got == pytest.approx(sq_dipole_from_a_si(1.5e6, 24943.272, 14), rel=1e-6)


def test_oscillator_f_conversion_si_oracle():
    rec = TransitionRecord(38342.57, StrengthKind.OSCILLATOR_F, 0.00169, 0.0, AngMom(7))
    got = reduced_dipole_sq(rec, AngMom(7))
    omega = 2 * math.pi * si.c * 38342.57 * 100.0
    # f = 2 m_e omega S / (3 hbar e^2 (2j+1)) in Gaussian-like form with S in (e a0)^2
    s_over_ea0 = 0.00169 * 8 * 3 * si.hbar / (2 * si.m_e * omega * si.physical_constants["Bohr radius"][0] ** 2)
    assert got == pytest.approx(s_over_ea0, rel=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(5000.0, 60000.0), st.sampled_from([10, 12, 14]))
def test_a_round_trip(a, de, tb):
    rec = TransitionRecord(de, StrengthKind.EINSTEIN_A, a, 0.0, AngMom(tb))
    d = reduced_dipole_sq(rec, AngMom(12))
    assert einstein_a_from_dipole_sq(d, de, AngMom(tb)) == pytest.approx(a, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-5, 2.0), st.floats(5000.0, 60000.0))
def test_f_round_trip(f, de):
    rec = TransitionRecord(de, StrengthKind.OSCILLATOR_F, f, 0.0, AngMom(7))
    d = reduced_dipole_sq(rec, AngMom(7))
    assert oscillator_f_from_dipole_sq(d, de, AngMom(7)) == pytest.approx(f, rel=1e-12)


def test_parse_j_column(tmp_path):
    p = write(tmp_path, "delta_e_cm,kind,strength,u_strength,j,source\n"
                        "17000,A,1.0,0.1,7/2,x\n18000,f,0.1,0.01,9/2,y\n20000,A,1.0,0.1,5/2,z\n")
    ll = parse_linelist(p, "Tm")
    assert [r.j_excited.twice_j for r in ll] == [7, 9, 5]
    assert ll.records[1].strength_kind is StrengthKind.OSCILLATOR_F


def test_bad_rows_collected_with_line_numbers(tmp_path):
    p = write(tmp_path, HEADER + "17000,A,1.0,0.1,7,ok\n-5,A,1.0,0.1,7,neg\n18000,Q,1,0.1,7,kind\n"
                                 "19000,A,1.0,0.1,13,far\n19500,A,1.0,0.1,6,half\n")
    with pytest.raises(LineListError) as info:
        parse_linelist(p, "Tm")
    lines = [n for n, _ in info.value.problems]
    assert lines == [3, 4, 5, 6]


def test_bad_header(tmp_path):
    p = write(tmp_path, "energy,kind,strength,u,two_j\n17000,A,1,0.1,7\n")
    with pytest.raises(LineListError):
        parse_linelist(p, "Tm")


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_linelist(tmp_path / "none.csv", "Er")


def test_unknown_species(tmp_path):
    with pytest.raises(UnknownSpeciesError):
        parse_linelist(write(tmp_path, HEADER), "Dy")


def test_empty_file_warns(tmp_path):
    with pytest.warns(UserWarning):
        ll = parse_linelist(write(tmp_path, ""), "Er")
    assert len(ll) == 0


def test_missing_excited_manifold_warns(tmp_path):
    with pytest.warns(UserWarning, match="no transitions"):
        parse_linelist(write(tmp_path, HEADER + "17000,A,1.0,0.1,12,x\n"), "Er")


def test_complete_list_is_silent():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        bundled_linelist("Er")


def test_scaled_record():
    rec = TransitionRecord(1.0, StrengthKind.EINSTEIN_A, 2.0, 0.5, AngMom(2))
    s = rec.scaled(3.0)
    assert (s.strength, s.u_strength) == (6.0, 1.5)


def test_constants_file_override(tmp_path):
    import json
    from lndimer.constants import data_path

    raw = json.loads(data_path("constants.json").read_text())
    raw["hartree_in_cm"] = 2.0e5
    p = tmp_path / "c.json"
    p.write_text(json.dumps(raw))
    custom = load_constants(p)
    assert custom.hartree_in_cm == 2.0e5
    assert load_constants().hartree_in_cm == pytest.approx(219474.6313632)
    assert load_constants().reduced_mass_au("Er") == pytest.approx(167.9323767 / 2 * 1822.888486209)
