import math

import numpy as np
import pytest

from jumpspectra import enclosure as en
from jumpspectra import measures, secular, spectrum as sp
from jumpspectra.svgfig import render_enclosure_svg
from conftest import make_zero_mean_v


@pytest.fixture(scope="module")
def rect_admissible(rect_basis):
    v = make_zero_mean_v(rect_basis, [0, 1, 4], [0.7, 0.4, 0.5], 0.02)
    spec = measures.PerturbedMeasure(measures.UniformMeasure(), v)
    cert = measures.check_hypothesis_v(spec, rect_basis, 2)
    mom = measures.compute_moments(spec, rect_basis)
    series = secular.build_secular_series(rect_basis, mom)
    rep = sp.assemble_spectrum(series, (-1.0, 60.0, -15.0, 15.0))
    return spec, cert, mom, series, rep


def test_halfplane_thresholds_monotone(disk_basis):
    ts = [en.halfplane_threshold(disk_basis, k) for k in range(1, 6)]
    assert all(a <= b for a, b in zip(ts, ts[1:]))
    assert ts[0] == pytest.approx(
        0.5 * (disk_basis.eigenvalues[0] + disk_basis.eigenvalues[1]))
    assert ts[0] == pytest.approx(10.2326, abs=1e-4)


def test_halfplane_membership():
    assert en.in_halfplane(3 + 1j, 5.0)
    assert not en.in_halfplane(3 + 0j, 5.0)       # real points excluded
    assert not en.in_halfplane(6 + 1j, 5.0)


def test_matryoshka_ratio_probe(disk_basis):
    # hand-checked membership probe
    ratio = float(en.matryoshka_ratio(np.array([20 + 5j]), disk_basis)[0])
    assert ratio == pytest.approx(0.4843534, abs=1e-6)
    assert ratio > 0.1      # certified outside the t = 0.1 enclosure


def test_matryoshka_monotone_in_t(disk_basis):
    pts = np.array([10 + 2j, 15 + 1j, 30 + 4j, 50 + 0.5j])
    for t1, t2 in ((0.1, 0.2), (0.2, 0.4)):
        m1 = en.matryoshka_member(pts, disk_basis, t1)
        m2 = en.matryoshka_member(pts, disk_basis, t2)
        assert np.all(m2 | ~m1)


def test_thm1_vacuous_uniform(uniform_disk, disk_basis):
    spec = measures.PerturbedMeasure(
        measures.UniformMeasure(), lambda x, y: np.zeros(np.shape(x)))
    cert = measures.check_hypothesis_v(spec, disk_basis, 1)
    rep = sp.assemble_spectrum(uniform_disk, (-1.0, 60.0, -15.0, 15.0))
    res = en.check_halfplane_exclusion(rep, cert, 1, disk_basis)
    assert res.verdict == en.PASS
    assert res.offenders == ()


def test_thm1_rectangle(rect_admissible, rect_basis):
    _, cert, _, _, rep = rect_admissible
    assert cert.passed
    res = en.check_halfplane_exclusion(rep, cert, 2, rect_basis)
    assert res.verdict == en.PASS


def test_thm1_gate_inapplicable(rect_basis):
    v = make_zero_mean_v(rect_basis, [0, 1, 4], [0.8, 0.3, 0.4], 0.8)
    spec = measures.PerturbedMeasure(measures.UniformMeasure(), v)
    cert = measures.check_hypothesis_v(spec, rect_basis, 2)
    assert not cert.passed
    rep = sp.SpectrumReport((), (-1, 60, -15, 15), None, None)
    res = en.check_halfplane_exclusion(rep, cert, 2, rect_basis)
    assert res.verdict == en.INAPPLICABLE      # a failed gate never "fails"


def test_thm1_wrong_base_inapplicable(disk_basis):
    spec = measures.PerturbedMeasure(
        measures.GroundStateMeasure(), lambda x, y: np.zeros(np.shape(x)))
    cert = measures.check_hypothesis_v(spec, disk_basis, 1)
    rep = sp.SpectrumReport((), (-1, 60, -15, 15), None, None)
    res = en.check_halfplane_exclusion(rep, cert, 1, disk_basis)
    assert res.verdict == en.INAPPLICABLE


def test_interlacing_rectangle(rect_admissible):
    _, cert, _, series, _ = rect_admissible
    res = en.check_interlacing(series, cert, 2)
    assert res.passed
    (interval, count, root) = res.intervals[0]
    assert count == 1
    assert interval[0] < root < interval[1]


def test_derivative_positive_on_gap_grid(rect_admissible):
    # under the admissibility hypothesis the secular derivative stays
    # positive across the first active gap
    _, cert, _, series, _ = rect_admissible
    assert cert.passed
    lo, hi = series.poles[0], series.poles[1]
    for lam in np.linspace(lo + 1e-3, hi - 1e-3, 40):
        assert secular.eval_secular_derivative(series, lam).real > 0


def test_interlacing_k1_vacuous(rect_admissible):
    _, cert, _, series, _ = rect_admissible
    res = en.check_interlacing(series, cert, 1)
    assert res.passed
    assert res.intervals == ()


def test_interlacing_degenerate_inapplicable(square_basis):
    # on the square the second active pole (1,3)/(3,1) is degenerate
    spec = measures.PerturbedMeasure(
        measures.UniformMeasure(), lambda x, y: np.zeros(np.shape(x)))
    cert = measures.check_hypothesis_v(spec, square_basis, 2)
    mom = measures.compute_moments(spec, square_basis)
    series = secular.build_secular_series(square_basis, mom)
    res = en.check_interlacing(series, cert, 2)
    assert res.verdict == en.INAPPLICABLE
    assert "degenerate" in res.detail


def test_first_eigenvalue_bound(rect_admissible):
    _, cert, mom, series, _ = rect_admissible
    res = en.bound_first_eigenvalue(series, cert, mom)
    assert res.verdict == en.PASS
    assert res.margin is not None and res.margin > 0


def test_first_eigenvalue_bound_groundstate_inapplicable(disk_basis):
    v = make_zero_mean_v(disk_basis, [0, 5], [0.4, 0.6], 0.02)
    spec = measures.PerturbedMeasure(measures.GroundStateMeasure(), v)
    cert = measures.check_hypothesis_v(spec, disk_basis, 2)
    mom = measures.compute_moments(spec, disk_basis)
    series = secular.build_secular_series(disk_basis, mom)
    res = en.bound_first_eigenvalue(series, cert, mom)
    assert res.verdict == en.INAPPLICABLE


def test_nested_enclosure_vacuous(groundstate_disk, disk_basis):
    spec = measures.PerturbedMeasure(
        measures.GroundStateMeasure(), lambda x, y: np.zeros(np.shape(x)))
    cert = measures.check_hypothesis_v(spec, disk_basis, 1)
    mom = measures.compute_moments(spec, disk_basis)
    rep = sp.assemble_spectrum(groundstate_disk, (-1.0, 60.0, -15.0, 15.0))
    res = en.check_nested_enclosure(rep, cert, mom, disk_basis)
    assert res.verdict == en.PASS      # no nonreal entries at all


def test_nested_enclosure_gate(disk_basis):
    spec = measures.PerturbedMeasure(
        measures.UniformMeasure(), lambda x, y: np.zeros(np.shape(x)))
    cert = measures.check_hypothesis_v(spec, disk_basis, 1)
    mom = measures.compute_moments(spec, disk_basis)
    rep = sp.SpectrumReport((), (-1, 60, -15, 15), None, None)
    res = en.check_nested_enclosure(rep, cert, mom, disk_basis)
    assert res.verdict == en.INAPPLICABLE


# --- curves -------------------------------------------------------------------

@pytest.fixture(scope="module")
def disk_curves(disk_basis):
    return en.emit_matryoshka_curves(disk_basis)


def test_matryoshka_nesting_on_grid(disk_curves):
    F = disk_curves.field_values
    assert F.size == 180_000
    ts = sorted(disk_curves.thresholds)
    for a, b in zip(ts, ts[1:]):
        assert np.all((F <= a) <= (F <= b))


def test_matryoshka_t_zero_degenerates(disk_basis):
    curves = en.emit_matryoshka_curves(disk_basis, thresholds=(0.0,),
                                       resolution=(60, 30))
    pts = {round(p[0][0], 9) for p in curves.curves[0.0]}
    eigs = {round(float(l), 9) for l in disk_basis.eigenvalues if l <= 60.0}
    assert pts == eigs


def test_curves_enclose_eigenvalues_except_first(disk_curves, disk_basis):
    F = disk_curves.field_values
    re_grid, im_grid = disk_curves.re_grid, disk_curves.im_grid
    j_mid = np.argmin(np.abs(im_grid))
    lam1 = disk_basis.eigenvalues[0]
    seen = set()
    for lam in disk_basis.eigenvalues:
        if lam > 60.0 or round(float(lam), 6) in seen:
            continue
        seen.add(round(float(lam), 6))
        i = np.argmin(np.abs(re_grid - lam))
        member = F[i, j_mid] <= 0.1
        if abs(lam - lam1) < 1e-9:
            # the ratio tends to 1 near the first eigenvalue: no curve there
            assert not member
        else:
            assert member


def test_curve_localisation_near_second_eigenvalue(disk_curves, disk_basis):
    # triangle-inequality bound: boundary points of the t = 0.1 loop around
    # lam_2 stay within t (lam_2 - lam_1)/(1 - t) of lam_2, up to a grid cell
    lam1, lam2 = disk_basis.eigenvalues[0], disk_basis.eigenvalues[1]
    bound = 0.1 * (lam2 - lam1) / 0.9
    cell = math.hypot(60.0 / 599, 30.0 / 299)
    near = []
    for poly in disk_curves.curves[0.1]:
        for (re, im) in poly:
            if abs(complex(re, im) - lam2) < 3.0:
                near.append(abs(complex(re, im) - lam2))
    assert near
    assert max(near) <= bound + cell
    assert bound == pytest.approx(0.98878, abs=1e-4)


def test_svg_rendering(disk_curves, disk_basis):
    svg = render_enclosure_svg(disk_curves, disk_basis)
    assert svg.startswith("<svg")
    assert svg.count("<polyline") >= 4
    assert "<circle" in svg
    assert "threshold 0.1" in svg
    assert svg == render_enclosure_svg(disk_curves, disk_basis)


def test_curves_csv(disk_curves):
    text = disk_curves.to_csv()
    header, first = text.split("\n", 2)[:2]
    assert header == "threshold,curve_id,re,im"
    assert len(first.split(",")) == 4
