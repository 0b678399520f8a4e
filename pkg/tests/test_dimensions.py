import math

import numpy as np
import pytest

from fractalzeta.dimensions import (
    LanguidityEstimate,
    Pole,
    ScreenProfile,
    Window,
    conjugate_closed,
    find_poles_argument_principle,
    languidity_probe,
    lattice_poles,
    residue_contour,
    residues_closed_form,
)
from fractalzeta.errors import (
    BoundaryPole,
    ContourContaminated,
    NotAPole,
    PoleOnLine,
)
from fractalzeta.geometry import (
    CantorLike,
    FractalStringBoundary,
    SierpinskiCarpet3D,
    SierpinskiGasket,
)
from fractalzeta.zeta import catalog_zeta

LOG2_3 = math.log(3.0) / math.log(2.0)
LOG3_26 = math.log(26.0) / math.log(3.0)
LOG3_2 = math.log(2.0) / math.log(3.0)
P_GASKET = 2.0 * math.pi / math.log(2.0)
P_CARPET = 2.0 * math.pi / math.log(3.0)


def gasket_residue_formula(w: complex) -> complex:
    return 6.0 * math.sqrt(3.0) ** (1 - w) / (4.0**w * math.log(2.0) * w * (w - 1.0))


def carpet_residue_formula(w: complex) -> complex:
    return 24.0 / (13.0 * 2.0**w * w * (w - 1.0) * (w - 2.0) * math.log(3.0))


# ---------------------------------------------------------------------------
# lattice pole families
# ---------------------------------------------------------------------------


def test_lattice_poles_gasket_band_10():
    got = lattice_poles(2.0, 3.0, Window(imag_range=(-10.0, 10.0)))
    assert len(got) == 3
    assert got[1] == pytest.approx(LOG2_3)
    assert got[0] == pytest.approx(LOG2_3 - 1j * 9.064720283654388)
    assert got[2] == pytest.approx(LOG2_3 + 1j * 9.064720283654388)


def test_lattice_poles_carpet_band_6():
    got = lattice_poles(3.0, 26.0, Window(imag_range=(-6.0, 6.0)))
    assert len(got) == 3
    assert got[1] == pytest.approx(LOG3_26)
    assert abs(got[2].imag - P_CARPET) < 1e-12


def test_lattice_poles_cantor_band_1():
    got = lattice_poles(3.0, 2.0, Window(imag_range=(-1.0, 1.0)))
    assert got == [pytest.approx(LOG3_2)]


def test_lattice_poles_respect_screen():
    win = Window(imag_range=(-10.0, 10.0), screen_sup=2.0)
    assert lattice_poles(2.0, 3.0, win) == []  # Re = log2 3 < screen


def test_window_validation_and_profile():
    with pytest.raises(ValueError):
        Window(imag_range=(1.0, -1.0))
    prof = ScreenProfile(taus=(-10.0, 10.0), values=(0.5, 1.5), lipschitz=0.05)
    win = Window(imag_range=(-10.0, 10.0), screen_profile=prof)
    assert win.screen_at(0.0) == pytest.approx(1.0)
    assert win.contains(1.2 + 0.0j)
    assert not win.contains(0.4 - 9.0j)


# ---------------------------------------------------------------------------
# argument-principle pole finding
# ---------------------------------------------------------------------------


def test_find_poles_gasket_single_lattice_pole():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    poles = find_poles_argument_principle(form, (1.0, 2.0, -1.0, 1.0), tol=1e-10)
    assert len(poles) == 1
    assert poles[0].order == 1
    assert abs(poles[0].location - LOG2_3) < 1e-8


def test_find_poles_gasket_origin():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    poles = find_poles_argument_principle(form, (-0.5, 0.5, -1.0, 1.0), tol=1e-10)
    assert len(poles) == 1
    assert abs(poles[0].location) < 1e-8
    assert poles[0].residue == pytest.approx(3.0 * math.sqrt(3.0) + 2.0 * math.pi, rel=1e-9)


def test_find_poles_black_box_double_pole():
    poles = find_poles_argument_principle(
        lambda s: 1.0 / (s - 1.0) ** 2, (0.0, 2.0, -1.0, 1.0), tol=1e-10
    )
    assert len(poles) == 1
    assert poles[0].order == 2
    assert abs(poles[0].location - 1.0) < 1e-8
    assert abs(poles[0].residue) < 1e-9
    assert poles[0].principal_part[0] == pytest.approx(1.0, rel=1e-9)  # c_{-2}


def test_find_poles_boundary_pole_detected():
    with pytest.raises(BoundaryPole):
        find_poles_argument_principle(lambda s: 1.0 / s, (0.0, 1.0, -1.0, 1.0), tol=1e-9)


def test_find_poles_skips_plain_zeros():
    poles = find_poles_argument_principle(lambda s: s - 0.5, (0.0, 1.0, -1.0, 1.0), tol=1e-9)
    assert poles == []


def test_find_poles_rejects_order_above_max():
    from fractalzeta.errors import NonIsolable

    with pytest.raises(NonIsolable):
        find_poles_argument_principle(
            lambda s: 1.0 / (s - 1.0) ** 4, (0.0, 2.0, -1.0, 1.0), tol=1e-9
        )


def test_completeness_gasket_band_20():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    poles = find_poles_argument_principle(form, (-0.5, 2.0, -20.0, 20.0), tol=1e-9)
    expected = [0.0 + 0.0j] + lattice_poles(2.0, 3.0, Window(imag_range=(-20.0, 20.0)))
    assert len(poles) == len(expected)
    expected.sort(key=lambda w: (round(w.real, 6), w.imag))
    for p, e in zip(poles, expected):
        assert abs(p.location - e) < 1e-8
        assert p.order == 1
    assert conjugate_closed(poles)


def test_completeness_carpet_band_20():
    form = catalog_zeta(SierpinskiCarpet3D(), 0.25)
    poles = find_poles_argument_principle(form, (-0.5, 3.2, -20.0, 20.0), tol=1e-9)
    expected = [0.0 + 0.0j, 1.0 + 0.0j, 2.0 + 0.0j] + lattice_poles(
        3.0, 26.0, Window(imag_range=(-20.0, 20.0))
    )
    assert len(poles) == len(expected)
    expected.sort(key=lambda w: (round(w.real, 6), w.imag))
    for p, e in zip(poles, expected):
        assert abs(p.location - e) < 1e-8
        assert p.order == 1
    assert conjugate_closed(poles)


# ---------------------------------------------------------------------------
# residues
# ---------------------------------------------------------------------------


def test_residue_contour_gasket_at_zero():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    known = [w for w, _ in form.poles(25.0)]
    res = residue_contour(form, 0.0, known_poles=known)
    assert res == pytest.approx(3.0 * math.sqrt(3.0) + 2.0 * math.pi, rel=1e-12)


def test_residue_contour_carpet_at_two():
    form = catalog_zeta(SierpinskiCarpet3D(), 0.25)
    known = [w for w, _ in form.poles(25.0)]
    res = residue_contour(form, 2.0, known_poles=known)
    assert res == pytest.approx(96.0 / 17.0, rel=1e-12)


def test_residue_contour_gasket_lattice_formula():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    known = [w for w, _ in form.poles(60.0)]
    for k in range(-5, 6):
        w = LOG2_3 + 1j * P_GASKET * k
        res = residue_contour(form, w, known_poles=known)
        assert res == pytest.approx(gasket_residue_formula(w), rel=1e-8)


def test_residue_contour_contaminated():
    f = lambda s: 1.0 / s + 1.0 / (s - 0.1001)
    with pytest.raises(ContourContaminated):
        residue_contour(f, 0.0, radius=0.1)


def test_residues_closed_form_known_values():
    carpet = catalog_zeta(SierpinskiCarpet3D(), 0.25)
    assert residues_closed_form(carpet, 1.0).residue == pytest.approx(
        6.0 * math.pi + 24.0 / 23.0, rel=1e-14
    )
    assert residues_closed_form(carpet, 0.0).residue == pytest.approx(
        4.0 * math.pi - 24.0 / 25.0, rel=1e-14
    )
    string = catalog_zeta(FractalStringBoundary.cantor_string(), 0.5)
    got = residues_closed_form(string, LOG3_2).residue
    assert got == pytest.approx(2.0**-LOG3_2 / (LOG3_2 * math.log(3.0)), rel=1e-14)
    with pytest.raises(NotAPole):
        residues_closed_form(carpet, 0.37)
    with pytest.raises(NotAPole):
        residues_closed_form(string, 0.0)  # removable: term residues cancel


def test_contour_matches_closed_form_across_catalog():
    for set_, delta in [
        (SierpinskiGasket(), 0.5),
        (SierpinskiCarpet3D(), 0.25),
        (CantorLike(), 0.5),
        (FractalStringBoundary.cantor_string(), 0.5),
    ]:
        form = catalog_zeta(set_, delta)
        pairs = form.poles(50.0)
        known = [w for w, _ in pairs]
        for w, res in pairs[:8]:
            contoured = residue_contour(form, w, known_poles=known)
            assert abs(contoured - res) <= 1e-8 * max(1.0, abs(res))


def test_residues_independent_of_delta():
    for set_, d1, d2 in [
        (SierpinskiGasket(), 0.5, 0.9),
        (SierpinskiCarpet3D(), 0.25, 0.6),
        (CantorLike(), 0.5, 0.8),
    ]:
        za = catalog_zeta(set_, d1)
        zb = catalog_zeta(set_, d2)
        for (wa, ra), (wb, rb) in zip(za.poles(15.0), zb.poles(15.0)):
            assert abs(wa - wb) < 1e-12
            assert abs(ra - rb) <= 1e-10 * max(1.0, abs(ra))


def test_conjugate_closure_of_pole_lists():
    for set_, delta in [(SierpinskiGasket(), 0.5), (SierpinskiCarpet3D(), 0.25)]:
        form = catalog_zeta(set_, delta)
        poles = [Pole(w, residue=r) for w, r in form.poles(30.0)]
        assert conjugate_closed(poles)
    assert not conjugate_closed([Pole(1.0 + 2.0j, residue=1.0 + 0.0j)])


# ---------------------------------------------------------------------------
# languidity probe
# ---------------------------------------------------------------------------

HEIGHTS = tuple(np.geomspace(10.0, 1000.0, 24))


def test_languidity_gasket_along_sigma_one():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    est = languidity_probe(form, 1.0, HEIGHTS)
    assert -1.3 <= est.kappa <= -0.7
    assert est.constant > 0


def test_languidity_carpet():
    form = catalog_zeta(SierpinskiCarpet3D(), 0.25)
    est = languidity_probe(form, 1.5, HEIGHTS)
    assert -1.3 <= est.kappa <= -0.7


def test_languidity_constant_function():
    est = languidity_probe(lambda s: 1.0 + 0.0j, 1.0, HEIGHTS, pole_locations=[])
    assert abs(est.kappa) < 1e-12
    assert est.constant == pytest.approx(1.0)


def test_languidity_pole_on_line():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    heights = list(np.geomspace(10.0, 2000.0, 12)) + [P_GASKET * 2.0]
    heights.sort()
    with pytest.raises(PoleOnLine):
        languidity_probe(form, LOG2_3, heights)


def test_languidity_height_validation():
    form = catalog_zeta(SierpinskiGasket(), 0.5)
    with pytest.raises(ValueError):
        languidity_probe(form, 1.0, [10.0, 20.0, 30.0])  # too few
    with pytest.raises(ValueError):
        languidity_probe(form, 1.0, list(np.geomspace(10.0, 50.0, 12)))  # < 2 decades
