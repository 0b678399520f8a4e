import math

import numpy as np
import pytest

from fractalzeta.dimensions import Pole
from fractalzeta.errors import (
    DimensionCollision,
    InsufficientSamples,
    NonpositiveContent,
)
from fractalzeta.geometry import (
    CantorLike,
    FractalStringBoundary,
    PointSet,
    SierpinskiCarpet3D,
    SierpinskiGasket,
    TubeSample,
    sample_tube_curve,
    tube_volume,
)
from fractalzeta.tube import (
    TubeFormulaSeries,
    Verdict,
    box_dimension_fit,
    compare_tube_formula,
    content_bounds_estimate,
    measurability_criterion,
    minkowski_content_from_residue,
    series_from_zeta,
    truncation_tail_estimate,
    tube_formula_truncated,
    tube_term,
)
from fractalzeta.zeta import catalog_zeta

LOG2_3 = math.log(3.0) / math.log(2.0)
LOG3_2 = math.log(2.0) / math.log(3.0)
LOG3_26 = math.log(26.0) / math.log(3.0)
P_GASKET = 2.0 * math.pi / math.log(2.0)
P_CARPET = 2.0 * math.pi / math.log(3.0)

GASKET_T_MAX = 1.0 / (2.0 * math.sqrt(3.0))


def gasket_series(k=20):
    return series_from_zeta(catalog_zeta(SierpinskiGasket(), 0.5), k, t_valid_max=GASKET_T_MAX)


def carpet_series(k=20):
    return series_from_zeta(catalog_zeta(SierpinskiCarpet3D(), 0.25), k, t_valid_max=0.5)


def string_series(k=50):
    return series_from_zeta(
        catalog_zeta(FractalStringBoundary.cantor_string(), 1.0 / 3.0), k, t_valid_max=1.0 / 6.0
    )


# ---------------------------------------------------------------------------
# tube terms
# ---------------------------------------------------------------------------


def test_tube_term_point():
    p = Pole(0.0 + 0.0j, residue=2.0 + 0.0j)
    assert tube_term(p, 0.25, 1) == pytest.approx(0.5)


def test_tube_term_gasket_quadratic_coefficient():
    res = 3.0 * math.sqrt(3.0) + 2.0 * math.pi
    p = Pole(0.0 + 0.0j, residue=complex(res))
    t = 0.07
    expected = (3.0 * math.sqrt(3.0) / 2.0 + math.pi) * t * t
    assert tube_term(p, t, 2) == pytest.approx(expected, rel=1e-14)


def test_tube_term_carpet_linear_coefficient():
    p = Pole(2.0 + 0.0j, residue=complex(96.0 / 17.0))
    t = 0.03
    assert tube_term(p, t, 3) == pytest.approx((6.0 - 6.0 / 17.0) * t, rel=1e-14)


def test_tube_term_dimension_collision():
    with pytest.raises(DimensionCollision):
        tube_term(Pole(1.0 + 0.0j, residue=1.0 + 0.0j), 0.1, 1)


def test_tube_term_higher_order_contour_matches_analytic():
    # f(s) = 1/(s-1)^2: res of t^(2-s) f(s) / (2-s) at 1 is t (1 - ln t)
    pole = Pole(1.0 + 0.0j, order=2, residue=0.0 + 0.0j, principal_part=(1.0 + 0.0j, 0.0 + 0.0j))
    f = lambda s: 1.0 / (s - 1.0) ** 2
    for t in [0.05, 0.3]:
        got = tube_term(pole, t, 2, evaluator=f)
        assert got == pytest.approx(t * (1.0 - math.log(t)), rel=1e-10)


# ---------------------------------------------------------------------------
# truncated formula vs oracles
# ---------------------------------------------------------------------------


def test_formula_point_set_exact():
    series = series_from_zeta(catalog_zeta(PointSet([[0.0]]), 1.0), 5)
    for t in [0.01, 0.25, 0.9]:
        assert abs(tube_formula_truncated(series, t) - 2.0 * t) <= 1e-15


def test_formula_total_is_real_when_summed_without_pairing():
    series = gasket_series(10)
    t = 0.02
    total = sum(tube_term(p, t, 2) for p in series.poles)
    assert abs(total.imag) <= 1e-10 * abs(total)
    assert total.real == pytest.approx(tube_formula_truncated(series, t), rel=1e-12)


def test_formula_validity_range_enforced():
    series = gasket_series(5)
    with pytest.raises(ValueError):
        tube_formula_truncated(series, 0.5)
    with pytest.raises(ValueError):
        tube_formula_truncated(series, -0.1)


def test_gasket_formula_matches_exact_oracle():
    series = gasket_series(20)
    for t in [0.005, 0.02, 0.1, 0.25]:
        direct = tube_volume(SierpinskiGasket(), t).volume
        formula = tube_formula_truncated(series, t)
        assert abs(formula - direct) / direct < 1e-6


def test_carpet_formula_matches_exact_oracle():
    series = carpet_series(20)
    for t in [0.005, 0.05, 0.3]:
        direct = tube_volume(SierpinskiCarpet3D(), t).volume
        formula = tube_formula_truncated(series, t)
        assert abs(formula - direct) / direct < 1e-8


def test_cantor_string_formula_against_sweep():
    series = string_series(50)
    set_ = FractalStringBoundary.cantor_string()
    rel = []
    for t in np.geomspace(1e-4, 1e-1, 32):
        direct = tube_volume(set_, t).volume
        rel.append(abs(tube_formula_truncated(series, t) - direct) / direct)
    assert max(rel) <= 1e-2


def test_convergence_in_truncation_dominated_by_tail_estimate():
    t = 0.01
    v20 = tube_formula_truncated(gasket_series(20), t)
    v40 = tube_formula_truncated(gasket_series(40), t)
    assert abs(v40 - v20) <= truncation_tail_estimate(gasket_series(20), t)
    t = 0.1
    v10 = tube_formula_truncated(carpet_series(10), t)
    v30 = tube_formula_truncated(carpet_series(30), t)
    assert abs(v30 - v10) <= truncation_tail_estimate(carpet_series(10), t)


def test_tail_estimate_zero_for_single_real_pole():
    series = series_from_zeta(catalog_zeta(PointSet([[0.0]]), 1.0), 5)
    assert truncation_tail_estimate(series, 0.1) == 0.0


def test_explicit_string_formula_on_first_linear_piece():
    # a finite string's zeta has a lone pole at 0; the residue sum equals
    # |A_t| exactly while 2t stays below the smallest length
    st = FractalStringBoundary(lengths=(0.5, 0.25, 0.25, 0.1))
    series = series_from_zeta(
        catalog_zeta(st, 0.5), 10, t_valid_max=min(st.lengths) / 2.0
    )
    for t in [0.005, 0.02, 0.049]:
        direct = tube_volume(st, t).volume
        assert tube_formula_truncated(series, t) == pytest.approx(direct, rel=1e-13)
    with pytest.raises(ValueError):
        tube_formula_truncated(series, 0.2)


def test_compare_tube_formula_rows():
    series = string_series(50)
    set_ = FractalStringBoundary.cantor_string()
    samples = sample_tube_curve(set_, np.geomspace(1e-3, 1e-1, 8))
    cmp_ = compare_tube_formula(series, samples, set_id="cantor_string")
    assert cmp_.max_rel_error <= 1e-2
    assert cmp_.oracle_method == "exact_1d"
    assert len(cmp_.rows) == 8
    for row in cmp_.rows:
        assert row.rel_error == pytest.approx(row.abs_error / max(row.direct_volume, 2.3e-16))


# ---------------------------------------------------------------------------
# contents, dimensions, verdicts
# ---------------------------------------------------------------------------


def test_minkowski_content_from_residue_values():
    assert minkowski_content_from_residue(2.0, 1, 0.0) == pytest.approx(2.0)
    assert minkowski_content_from_residue(0.5, 2, 0.5) == pytest.approx(1.0 / 3.0)
    with pytest.raises(NonpositiveContent):
        minkowski_content_from_residue(-1.0, 1, 0.0)
    with pytest.raises(ValueError):
        minkowski_content_from_residue(1.0, 1, 1.5)
    string_res = 2.0**-LOG3_2 / (LOG3_2 * math.log(3.0))
    expected = 2.0**-LOG3_2 / (LOG3_2 * (1.0 - LOG3_2) * math.log(3.0))
    assert minkowski_content_from_residue(string_res, 1, LOG3_2) == pytest.approx(expected)


def test_content_bounds_point_set():
    samples = sample_tube_curve(PointSet([[0.0]]), np.geomspace(1e-3, 1e-1, 20))
    lo, hi = content_bounds_estimate(samples, 0.0, 1)
    assert lo == pytest.approx(2.0)
    assert hi == pytest.approx(2.0)


def test_content_bounds_gasket_oscillation_gap():
    samples = sample_tube_curve(SierpinskiGasket(), np.geomspace(1e-3, 1e-1, 64))
    lo, hi = content_bounds_estimate(samples, LOG2_3, 2)
    assert lo < hi
    assert hi / lo > 1.001


def test_content_diverges_below_the_dimension():
    # at r = 0 < D the quotient |A_t| / t^N blows up as t shrinks
    samples = sample_tube_curve(CantorLike(), np.geomspace(1e-4, 1e-2, 20))
    quotients = [s.volume / s.t for s in samples]
    assert quotients[0] > 10.0 * quotients[-1]


def test_content_bounds_preconditions():
    short = sample_tube_curve(PointSet([[0.0]]), np.geomspace(1e-3, 1e-1, 8))
    with pytest.raises(InsufficientSamples):
        content_bounds_estimate(short, 0.0, 1)
    narrow = sample_tube_curve(PointSet([[0.0]]), np.geomspace(1e-2, 5e-2, 20))
    with pytest.raises(InsufficientSamples):
        content_bounds_estimate(narrow, 0.0, 1)


def test_box_dimension_fit_point():
    samples = sample_tube_curve(PointSet([[0.0]]), np.geomspace(1e-3, 1e-1, 24))
    assert abs(box_dimension_fit(samples, 1) - 0.0) <= 0.02


def test_box_dimension_fit_cantor():
    samples = sample_tube_curve(CantorLike(), np.geomspace(1e-4, 1e-2, 32))
    assert abs(box_dimension_fit(samples, 1) - LOG3_2) <= 0.05


def test_measurability_verdicts_catalog():
    gasket = catalog_zeta(SierpinskiGasket(), 0.5)
    poles = [Pole(w, residue=r) for w, r in gasket.poles(20.0)]
    v = measurability_criterion(poles, LOG2_3, 1e-6, ambient_dim=2,
                                band_height=20.0, lattice_period=P_GASKET)
    assert v.verdict == Verdict.NOT_MEASURABLE
    assert v.content is None
    assert len(v.critical_line_poles) == 5

    carpet = catalog_zeta(SierpinskiCarpet3D(), 0.25)
    poles = [Pole(w, residue=r) for w, r in carpet.poles(20.0)]
    v = measurability_criterion(poles, LOG3_26, 1e-6, ambient_dim=3,
                                band_height=20.0, lattice_period=P_CARPET)
    assert v.verdict == Verdict.NOT_MEASURABLE

    point = catalog_zeta(PointSet([[0.0]]), 1.0)
    poles = [Pole(w, residue=r) for w, r in point.poles(20.0)]
    v = measurability_criterion(poles, 0.0, 1e-6, ambient_dim=1)
    assert v.verdict == Verdict.MEASURABLE
    assert v.content == pytest.approx(2.0)


def test_measurability_straddling_pole_is_inconclusive():
    tol = 1e-3
    poles = [Pole(0.5 + 0.0j, residue=1.0 + 0.0j), Pole(0.5 + 1.5 * tol + 4.0j, residue=0.1 + 0.0j)]
    v = measurability_criterion(poles, 0.5, tol, ambient_dim=1)
    assert v.verdict == Verdict.INCONCLUSIVE


def test_measurability_narrow_band_is_inconclusive():
    poles = [Pole(0.5 + 0.0j, residue=1.0 + 0.0j)]
    v = measurability_criterion(
        poles, 0.5, 1e-6, ambient_dim=1, band_height=2.0, lattice_period=5.0
    )
    assert v.verdict == Verdict.INCONCLUSIVE


def test_measurability_multiple_pole_not_measurable():
    poles = [Pole(0.5 + 0.0j, order=2, residue=1.0 + 0.0j)]
    v = measurability_criterion(poles, 0.5, 1e-6, ambient_dim=1)
    assert v.verdict == Verdict.NOT_MEASURABLE


def test_criterion_agrees_with_finite_scale_oscillation():
    # gap ratio above threshold <=> not measurable, across the catalog
    threshold = 1.001
    cases = [
        (PointSet([[0.0]]), 1, 0.0, 1.0, Verdict.MEASURABLE, (1e-3, 1e-1)),
        (CantorLike(), 1, LOG3_2, 0.5, Verdict.NOT_MEASURABLE, (1e-4, 1e-2)),
        (SierpinskiGasket(), 2, LOG2_3, 0.5, Verdict.NOT_MEASURABLE, (1e-3, 1e-1)),
        (SierpinskiCarpet3D(), 3, LOG3_26, 0.25, Verdict.NOT_MEASURABLE, (1e-3, 1e-1)),
    ]
    for set_, n_dim, d, delta, expected, (lo_t, hi_t) in cases:
        form = catalog_zeta(set_, delta)
        periods = form.lattice_periods()
        poles = [Pole(w, residue=r) for w, r in form.poles(25.0)]
        v = measurability_criterion(
            poles, d, 1e-6, ambient_dim=n_dim, band_height=25.0,
            lattice_period=min(periods) if periods else None,
        )
        assert v.verdict == expected
        samples = sample_tube_curve(set_, np.geomspace(lo_t, hi_t, 64))
        lo, hi = content_bounds_estimate(samples, d, n_dim)
        oscillates = hi / lo > threshold
        assert oscillates == (expected == Verdict.NOT_MEASURABLE)


def test_leading_order_law():
    # formula value / t^(N-D) stays within the finite-scale content proxies
    cases = [
        (SierpinskiGasket(), 2, LOG2_3, gasket_series(30), (1e-3, 1e-1)),
        (SierpinskiCarpet3D(), 3, LOG3_26, carpet_series(30), (1e-3, 1e-1)),
        (FractalStringBoundary.cantor_string(), 1, LOG3_2, string_series(60), (1e-4, 1e-2)),
    ]
    for set_, n_dim, d, series, (lo_t, hi_t) in cases:
        samples = sample_tube_curve(set_, np.geomspace(lo_t, hi_t, 48))
        lo, hi = content_bounds_estimate(samples, d, n_dim)
        for s in samples:
            if s.t > 10.0 * lo_t:
                continue
            q = tube_formula_truncated(series, s.t) / s.t ** (n_dim - d)
            assert lo * 0.95 <= q <= hi * 1.05


def test_series_construction_validations():
    with pytest.raises(DimensionCollision):
        TubeFormulaSeries(1, (Pole(1.0 + 0.0j, residue=1.0 + 0.0j),), 1)
    series = gasket_series(3)
    assert series.max_real_part == pytest.approx(LOG2_3)
    assert len(series.real_poles) == 2  # 0 and log2(3)
    assert len(series.poles) == 2 + 2 * 3  # real poles + K conjugate pairs
