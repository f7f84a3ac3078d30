import math

import numpy as np
import pytest

from jumpspectra import geometry
from jumpspectra.errors import (EmptyBasisError, EvaluationError,
                                ResolutionError)


# --- independent Bessel-zero oracle: power series plus bisection -----------

def bessel_series(order, x, terms=60):
    """J_order(x) by the ascending power series (adequate for x < 70)."""
    x = float(x)
    half = 0.5 * x
    term = half ** order / math.factorial(order)
    total = term
    for k in range(1, terms):
        term *= -(half * half) / (k * (k + order))
        total += term
    return total


def bisect_zero(order, lo, hi, iters=200):
    flo = bessel_series(order, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = bessel_series(order, mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


ORACLE_ZEROS = {
    (0, 1): bisect_zero(0, 2.0, 3.0),
    (1, 1): bisect_zero(1, 3.0, 4.5),
    (0, 2): bisect_zero(0, 5.0, 6.0),
}


def test_bessel_zero_values():
    assert ORACLE_ZEROS[(0, 1)] == pytest.approx(2.404825557695773, rel=1e-13)
    assert ORACLE_ZEROS[(1, 1)] == pytest.approx(3.831705970207512, rel=1e-13)
    assert ORACLE_ZEROS[(0, 2)] == pytest.approx(5.520078110286311, rel=1e-13)
    for (m, k), val in ORACLE_ZEROS.items():
        assert geometry.bessel_zero(m, k) == pytest.approx(val, rel=1e-12)


def test_bessel_zero_mcmahon_asymptotic():
    # large-index zeros approach the McMahon expansion
    for k in (20, 40):
        beta = (k - 0.25) * math.pi
        approx = beta + 1.0 / (8 * beta)
        assert geometry.bessel_zero(0, k) == pytest.approx(approx, abs=1e-4)


def test_bessel_zero_interlacing():
    for m in range(6):
        for k in range(1, 6):
            assert geometry.bessel_zero(m, k) < geometry.bessel_zero(m + 1, k)
            assert geometry.bessel_zero(m + 1, k) < geometry.bessel_zero(m, k + 1)


def test_bessel_zero_bad_index():
    with pytest.raises(ValueError):
        geometry.bessel_zero(0, 0)


# --- domains ----------------------------------------------------------------

def test_domain_constants():
    disk = geometry.unit_disk()
    assert disk.area == pytest.approx(math.pi)
    assert disk.boundary_weight == pytest.approx(2 * math.pi)
    rect = geometry.rectangle(2.0, 3.0)
    assert rect.area == pytest.approx(6.0)
    assert rect.boundary_weight == pytest.approx(10.0)
    assert rect.inradius == pytest.approx(1.0)


def test_rectangle_bad_sides():
    with pytest.raises(ValueError):
        geometry.rectangle(-1.0, 2.0)


def test_boundary_distance():
    disk = geometry.unit_disk()
    assert disk.boundary_distance(0.0, 0.0) == pytest.approx(1.0)
    rect = geometry.rectangle(2.0, 4.0)
    assert rect.boundary_distance(0.5, 2.0) == pytest.approx(0.5)


# --- basis enumeration -------------------------------------------------------

def test_square_single_mode():
    basis = geometry.build_basis(geometry.rectangle(math.pi, math.pi), 3.0)
    assert len(basis) == 1
    assert basis.modes[0].eigenvalue == pytest.approx(2.0)
    assert basis.modes[0].label == (1, 1)


def test_disk_single_mode():
    basis = geometry.build_basis(geometry.unit_disk(), 6.0)
    assert len(basis) == 1
    assert basis.modes[0].eigenvalue == pytest.approx(
        ORACLE_ZEROS[(0, 1)] ** 2, rel=1e-12)


def test_empty_basis():
    with pytest.raises(EmptyBasisError):
        geometry.build_basis(geometry.unit_disk(), 1.0)


def test_eigenvalues_sorted_and_positive(disk_basis, rect_basis):
    for basis in (disk_basis, rect_basis):
        eigs = basis.eigenvalues
        assert eigs[0] > 0
        assert np.all(np.diff(eigs) >= 0)
        assert np.all(eigs <= basis.cutoff)


def test_weyl_count(disk_basis):
    expected = disk_basis.domain.area * disk_basis.cutoff / (4 * math.pi)
    ratio = len(disk_basis) / expected
    assert 0.9 <= ratio <= 1.1


def test_one_coefficients(disk_basis, square_basis):
    m11 = square_basis.modes[0]
    assert m11.one_coeff == pytest.approx(8.0 / math.pi, rel=1e-14)
    assert m11.one_coeff == pytest.approx(2.5464790894703255, rel=1e-12)
    # any even index kills the mean coefficient
    m12 = next(m for m in square_basis.modes if m.label == (1, 2))
    assert m12.one_coeff == 0.0
    rad1 = disk_basis.modes[0]
    assert rad1.one_coeff == pytest.approx(
        2 * math.sqrt(math.pi) / ORACLE_ZEROS[(0, 1)], rel=1e-12)
    assert rad1.one_coeff == pytest.approx(1.4740810161746825, rel=1e-12)
    ang = next(m for m in disk_basis.modes if m.label[0] == 1)
    assert ang.one_coeff == 0.0


def test_one_coeff_cauchy_schwarz(disk_basis, rect_basis):
    for basis in (disk_basis, rect_basis):
        assert np.all(np.abs(basis.one_coeffs)
                      <= math.sqrt(basis.domain.area) + 1e-12)


def test_one_coeff_matches_quadrature(disk_basis_small, square_basis):
    for basis in (disk_basis_small, square_basis):
        rule = basis.quadrature
        for mode in basis.modes[:6]:
            quad = rule.integrate(mode.evaluate(rule.x, rule.y))
            assert quad == pytest.approx(mode.one_coeff, abs=1e-10)


def test_gram_identity(disk_basis, rect_basis):
    for basis in (disk_basis, rect_basis):
        rows = basis.mode_matrix()[:20]
        gram = (rows * basis.quadrature.w) @ rows.T
        assert np.abs(gram - np.eye(20)).max() < 1e-8


def test_ground_state_positive(disk_basis, rect_basis):
    for basis in (disk_basis, rect_basis):
        rule = basis.quadrature
        vals = basis.modes[0].evaluate(rule.x, rule.y)
        assert np.min(vals) > 0


# --- quadrature --------------------------------------------------------------

def test_quadrature_constants(disk):
    val = geometry.quadrature_integral(lambda x, y: np.ones_like(x), disk)
    assert val == pytest.approx(math.pi, abs=1e-10)


def test_quadrature_torsion(disk):
    val = geometry.quadrature_integral(
        lambda x, y: (1 - x * x - y * y) / 4, disk)
    assert val == pytest.approx(math.pi / 8, abs=1e-9)


def test_quadrature_mode_norm(square_basis):
    rule = square_basis.quadrature
    mode = square_basis.modes[0]
    val = rule.integrate(mode.evaluate(rule.x, rule.y) ** 2)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_quadrature_nonfinite_raises(disk):
    with np.errstate(divide="ignore", invalid="ignore"):
        with pytest.raises(EvaluationError):
            geometry.quadrature_integral(lambda x, y: x / (x - x), disk)


def test_resolution_guard(disk):
    rule = geometry.disk_quadrature(8, 16)
    with pytest.raises(ResolutionError):
        geometry.build_basis(disk, 2000.0, quadrature=rule)


def test_mode_gradient_matches_fd(disk_basis_small, rect_basis):
    for basis in (disk_basis_small, rect_basis):
        mode = basis.modes[3]
        x0, y0 = (0.3, 0.2) if basis.domain.kind == "disk" else (1.0, 1.5)
        h = 1e-6
        gx, gy = mode.gradient(np.array([x0]), np.array([y0]))
        fdx = (mode.evaluate(np.array([x0 + h]), np.array([y0]))[0]
               - mode.evaluate(np.array([x0 - h]), np.array([y0]))[0]) / (2 * h)
        fdy = (mode.evaluate(np.array([x0]), np.array([y0 + h]))[0]
               - mode.evaluate(np.array([x0]), np.array([y0 - h]))[0]) / (2 * h)
        assert gx[0] == pytest.approx(fdx, rel=1e-6, abs=1e-8)
        assert gy[0] == pytest.approx(fdy, rel=1e-6, abs=1e-8)


# --- layer quadrature and Dirichlet solves ----------------------------------

def test_layer_quadrature_area():
    disk = geometry.unit_disk()
    eps = 1e-3
    _, _, w, _ = geometry.layer_quadrature(disk, eps)
    assert np.sum(w) == pytest.approx(math.pi - math.pi * (1 - eps) ** 2,
                                      rel=1e-12)
    rect = geometry.rectangle(2.0, 3.0)
    _, _, w, _ = geometry.layer_quadrature(rect, eps)
    assert np.sum(w) == pytest.approx(10.0 * eps - 4 * eps * eps, rel=1e-12)


def test_torsion_functions_disk():
    disk = geometry.unit_disk()
    g = geometry.torsion_function(disk)
    g2 = geometry.torsion_second(disk)
    assert g(np.array([0.0]), np.array([0.0]))[0] == pytest.approx(0.25)
    assert g(np.array([1.0]), np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-15)
    assert g2(np.array([0.0]), np.array([0.0]))[0] == pytest.approx(3.0 / 64)
    # -lap g2 = g by central differences
    h = 1e-4
    for (x, y) in ((0.3, 0.1), (0.5, -0.4)):
        lap = sum(g2(np.array([x + dx]), np.array([y + dy]))[0]
                  for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h)))
        lap -= 4 * g2(np.array([x]), np.array([y]))[0]
        assert -lap / h ** 2 == pytest.approx(
            g(np.array([x]), np.array([y]))[0], abs=1e-6)


def test_torsion_functions_rectangle():
    rect = geometry.rectangle(math.pi, 1.2337 * math.pi)
    g = geometry.torsion_function(rect)
    g2 = geometry.torsion_second(rect)
    h = 1e-4
    for (x, y) in ((0.7, 0.9), (2.0, 2.5), (0.2, 3.5)):
        lapg = sum(g(np.array([x + dx]), np.array([y + dy]))[0]
                   for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h)))
        lapg -= 4 * g(np.array([x]), np.array([y]))[0]
        assert -lapg / h ** 2 == pytest.approx(1.0, abs=1e-6)
        lap2 = sum(g2(np.array([x + dx]), np.array([y + dy]))[0]
                   for dx, dy in ((h, 0), (-h, 0), (0, h), (0, -h)))
        lap2 -= 4 * g2(np.array([x]), np.array([y]))[0]
        assert -lap2 / h ** 2 == pytest.approx(
            g(np.array([x]), np.array([y]))[0], abs=1e-6)
    # boundary values vanish
    assert abs(g(np.array([0.0]), np.array([1.0]))[0]) < 1e-14
    assert abs(g2(np.array([math.pi]), np.array([2.0]))[0]) < 1e-12
