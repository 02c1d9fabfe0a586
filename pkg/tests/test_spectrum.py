import pytest
from hypothesis import given, settings, strategies as st

from aimvolcano.aim import EigenvalueCandidate
from aimvolcano.potentials import PotentialExtrema, PotentialSpec, extrema
from aimvolcano.spectrum import (classify, pair_degenerate, solve_spectrum,
                                 splitting_curve, straddling_pairs, sweep, transition_pair)
from aimvolcano.units import UnitContext

A3_LEVELS = [-6.47301, -6.3402, -2.6222, -2.6058, 0.9607, 0.9624]


def cands(energies):
    return [EigenvalueCandidate(complex(e), 1, 0.0, 0.0, True) for e in energies]


def test_classify_a3_levels():
    rep = classify(cands(A3_LEVELS), extrema(PotentialSpec.coshsech(3, 1)), threshold=0.2)
    assert rep.bound_states == sorted(A3_LEVELS)
    assert rep.below_min_states == []
    assert [(lo, hi) for lo, hi, _ in rep.pairs] == [(-6.47301, -6.3402), (-2.6222, -2.6058),
                                                     (0.9607, 0.9624)]


def test_classify_empty():
    rep = classify([], extrema(PotentialSpec.coshsech(3, 1)))
    assert rep.bound_states == [] and rep.below_min_states == [] and rep.pairs == []


def test_boundary_inclusive():
    ext = PotentialExtrema(None, None, -9.0, -9.0)
    rep = classify(cands([-9.0]), ext)
    assert rep.bound_states == [-9.0]


def test_below_min_filtered():
    ext = PotentialExtrema(None, None, -9.0, -9.0)
    rep = classify(cands([-12.0, -5.0]), ext)
    assert rep.below_min_states == [-12.0]
    assert rep.bound_states == [-5.0]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-50, 50), max_size=20), st.floats(-20, 20))
def test_partition_property(energies, v0):
    ext = PotentialExtrema(None, None, v0, v0)
    rep = classify(cands(energies), ext)
    assert sorted(rep.bound_states + rep.below_min_states) == sorted(energies)
    assert all(e >= v0 for e in rep.bound_states)
    assert all(e < v0 for e in rep.below_min_states)
    for lo, hi, gap in rep.pairs:
        assert 0 <= gap < 0.1 and lo in rep.bound_states and hi in rep.bound_states


def test_pairing_examples():
    gaps = [g for *_, g in pair_degenerate([-2.6222, -2.6058, 0.9607, 0.9624], 0.1)]
    assert gaps == pytest.approx([0.0164, 0.0017], abs=1e-9)
    assert pair_degenerate([0, 1, 2], 0.1) == []
    assert pair_degenerate([0, 0.01, 0.02], 0.05) == [(0, 0.01, 0.01)]


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10, 10), max_size=12, unique=True), st.floats(11, 20))
def test_pairing_stable_under_append(energies, extra):
    energies = sorted(energies)
    base = pair_degenerate(energies, 0.1)
    extended = pair_degenerate(energies + [extra + 0.5, extra + 5], 0.1)
    assert extended[: len(base)] == base


def test_transition_pair():
    assert transition_pair([-10, -5, 1, 4], -3) == (1, -5)
    assert transition_pair([-10, -5], -3) is None
    assert transition_pair([1.0], None) is None


def test_straddling_pairs_collapse_duplicates():
    out = straddling_pairs([-10, -9.999, -5, 1, 1.0001, 4], -3)
    assert (1, -5) in out and (4, -10) in out
    assert len(out) == 4
    assert out[0] == (1, -5)


def test_solve_spectrum_a3_reports_three_pairs():
    rep = solve_spectrum(PotentialSpec.coshsech(3, 1), k_max=12, threshold=0.2)
    assert len(rep.bound_states) == 6
    assert len(rep.pairs) == 3
    assert rep.below_min_states and all(e < -9 for e in rep.below_min_states)


def test_sweep_rows_ordered_and_deterministic():
    base = PotentialSpec.coshsech(20, 0)
    rows = sweep(base, "b", [6, 2, 4], k_max=12, jobs=1)
    assert [r.value for r in rows] == [2, 4, 6]
    again = sweep(base, "b", [2, 4, 6], k_max=12, jobs=2)
    assert [r.to_dict() for r in rows] == [r.to_dict() for r in again]


def test_sweep_with_units():
    rows = sweep(PotentialSpec.coshsech(16, 1), "b", [1.0], k_max=14, units=UnitContext())
    r = rows[0]
    assert r.status == "ok"
    assert r.wavelength_um > 0 and r.band in ("UV", "visible", "IR")


def test_sweep_rejects_bad_param():
    with pytest.raises(ValueError):
        sweep(PotentialSpec.coshsech(1, 1), "c", [0.1])
    with pytest.raises(ValueError):
        sweep(PotentialSpec.coshsech(1, 1), "z", [0.1])
    with pytest.raises(ValueError):
        sweep(PotentialSpec.coshsech(1, 1), "b", [float("nan")])


def test_splitting_curve_floor_and_trend():
    cs = [0.0, 1e-3, 0.005, 0.05, 0.5]
    rows = {r.c: r for r in splitting_curve(1, 1, cs)}
    assert rows[0.0].note == "numerical floor"
    assert rows[0.5].delta_e > rows[0.05].delta_e > rows[0.005].delta_e
    assert rows[1e-3].delta_e / rows[0.0].delta_e < 3


def test_splitting_curve_validation():
    with pytest.raises(ValueError):
        splitting_curve(1, 1, [])
    with pytest.raises(ValueError):
        splitting_curve(1, 1, [-0.1])


def test_splitting_curve_lost_pair_flagged():
    rows = splitting_curve(1, 1, [0.1], target=500.0, threshold=1e-12)
    assert rows[0].delta_e is None and rows[0].note == "pair lost"
