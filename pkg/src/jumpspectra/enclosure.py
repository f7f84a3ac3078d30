"""Spectral-enclosure certificates and exclusion-region geometry.

Three families of certificates are checked against assembled spectra:

* half-plane exclusion: under an admissible perturbation of the uniform
  measure at level k, no nonreal spectrum has real part below the midpoint
  of the k-th spectral gap;
* interlacing: under the same hypothesis, each gap between consecutive
  active poles of the secular series up to level k holds exactly one real
  eigenvalue;
* nested ("matryoshka") enclosure: under an admissible perturbation of the
  ground-state measure, all nonreal spectrum stays inside a neighbourhood of
  the Dirichlet spectrum whose size is set by the perturbation norm.

Every checker returns one of pass / fail / inapplicable: a failed hypothesis
gate yields "inapplicable", never "fail", so a "fail" is always a genuine
counterexample to the corresponding enclosure statement.

Level counting runs over the active (non-inert) poles of the secular
series: on symmetric domains whole families of modes have identically zero
mean coefficient and drop out of the series, carrying no obstruction.  The
literal enumeration threshold is reported alongside in the admissibility
certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import BasisSet
from .measures import AdmissibilityCertificate, MeasureMoments
from .secular import SecularSeries, real_roots_in
from .spectrum import SpectrumReport

PASS, FAIL, INAPPLICABLE = "pass", "fail", "inapplicable"


@dataclass(frozen=True)
class CheckResult:
    name: str
    verdict: str
    detail: str
    offenders: tuple = ()
    margin: float | None = None

    @property
    def failed(self) -> bool:
        return self.verdict == FAIL


# ---------------------------------------------------------------------------
# region geometry
# ---------------------------------------------------------------------------

def halfplane_threshold(basis: BasisSet, k: int) -> float:
    """Midpoint of the k-th gap of the raw Dirichlet enumeration."""
    if k >= len(basis):
        raise ValueError("k exceeds the number of retained eigenvalues")
    return 0.5 * (basis.eigenvalues[k - 1] + basis.eigenvalues[k])


def in_halfplane(lam: complex, threshold: float) -> bool:
    return lam.imag != 0.0 and lam.real <= threshold


def _ray_distance(re, im, cutoff):
    # distance to the half-line [cutoff, inf) on the real axis
    return np.where(re >= cutoff, np.abs(im), np.hypot(cutoff - re, im))


def spectral_distance(lam, basis: BasisSet):
    """Distance to the Dirichlet spectrum, tail modes handled analytically.

    Eigenvalues above the cutoff lie on ``[cutoff, inf)``, so the distance
    to that ray is a valid lower bound for their contribution.
    """
    lam = np.asarray(lam, dtype=complex)
    d = np.min(np.abs(lam[..., None] - basis.eigenvalues), axis=-1)
    return np.minimum(d, _ray_distance(lam.real, lam.imag, basis.cutoff))


def matryoshka_ratio(lam, basis: BasisSet):
    """dist(lam, Dirichlet spectrum) / |lambda_1 - lam| (enclosure field)."""
    lam = np.asarray(lam, dtype=complex)
    lam1 = basis.eigenvalues[0]
    return spectral_distance(lam, basis) / np.abs(lam1 - lam)


def matryoshka_member(lam, basis: BasisSet, t: float):
    """True where nonreal ``lam`` cannot be excluded at threshold ``t``."""
    return matryoshka_ratio(lam, basis) <= t


# ---------------------------------------------------------------------------
# theorem checkers
# ---------------------------------------------------------------------------

def check_halfplane_exclusion(report: SpectrumReport,
                              cert: AdmissibilityCertificate,
                              k: int, basis: BasisSet) -> CheckResult:
    """No nonreal certified entry in the level-k half-plane region."""
    name = f"halfplane_exclusion[k={k}]"
    if cert.base_kind != "uniform":
        return CheckResult(name, INAPPLICABLE,
                           "hypothesis concerns uniform-base perturbations")
    if not cert.passed:
        return CheckResult(name, INAPPLICABLE,
                           f"admissibility failed: {cert.summary()}")
    threshold = halfplane_threshold(basis, k)
    offenders = tuple(e for e in report.entries
                      if e.certified and in_halfplane(e.value, threshold))
    if offenders:
        worst = min(threshold - e.value.real for e in offenders)
        return CheckResult(name, FAIL,
                           f"{len(offenders)} nonreal entries below Re = "
                           f"{threshold:.6g}", offenders, worst)
    return CheckResult(name, PASS,
                       f"no nonreal spectrum with Re <= {threshold:.6g}",
                       margin=threshold)


@dataclass(frozen=True)
class InterlacingCertificate:
    k: int
    intervals: tuple            # ((lo, hi), count, root or None) per gap
    hypothesis_margin: float
    verdict: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


def check_interlacing(series: SecularSeries,
                      cert: AdmissibilityCertificate,
                      k: int) -> InterlacingCertificate:
    """Exactly one real eigenvalue per gap between active poles up to k."""
    if cert.base_kind != "uniform" or not cert.passed:
        return InterlacingCertificate(
            k, (), cert.margin, INAPPLICABLE,
            "admissibility gate failed" if cert.base_kind == "uniform"
            else "hypothesis concerns uniform-base perturbations")
    if len(series.poles) < k:
        return InterlacingCertificate(k, (), cert.margin, INAPPLICABLE,
                                      f"fewer than {k} active poles")
    basis = series.basis
    # each of the first k active poles must be a simple Dirichlet eigenvalue
    for i in range(k):
        pole = series.poles[i]
        size = sum(1 for group in basis.clusters()
                   if abs(np.mean(basis.eigenvalues[list(group)]) - pole)
                   <= 1e-9 * (1 + pole) and len(group) > 1)
        if size:
            return InterlacingCertificate(
                k, (), cert.margin, INAPPLICABLE,
                f"active pole {i + 1} at {pole:.6g} is degenerate")
    intervals = []
    all_single = True
    for i in range(k - 1):
        lo, hi = series.poles[i], series.poles[i + 1]
        roots = real_roots_in(series, lo + 1e-9 * (1 + lo), hi - 1e-9 * (1 + hi))
        intervals.append(((float(lo), float(hi)), len(roots),
                          roots[0].value if len(roots) == 1 else None))
        if len(roots) != 1:
            all_single = False
    verdict = PASS if all_single else FAIL
    return InterlacingCertificate(k, tuple(intervals), cert.margin, verdict,
                                  "one eigenvalue per gap" if all_single
                                  else "gap with count != 1")


def bound_first_eigenvalue(series: SecularSeries,
                           cert: AdmissibilityCertificate,
                           moments: MeasureMoments) -> CheckResult:
    """Bracket and two-pole bound for the smallest nonzero real eigenvalue.

    Requires the level-2 hypothesis.  Returns the located eigenvalue in the
    first active gap together with the slack of the two-pole remainder
    bound evaluated at it.
    """
    name = "first_eigenvalue_bound"
    inter = check_interlacing(series, cert, 2)
    if inter.verdict == INAPPLICABLE:
        return CheckResult(name, INAPPLICABLE, inter.detail)
    if inter.verdict == FAIL:
        return CheckResult(name, FAIL, "interlacing failed in the first gap")
    (lo, hi), count, root = inter.intervals[0]
    if count != 1 or root is None:
        return CheckResult(name, FAIL, f"expected one root in ({lo}, {hi})")
    if len(series.poles) < 3:
        return CheckResult(name, INAPPLICABLE,
                           "need three active poles for the remainder bound")
    a1, a2 = series.residues[0], series.residues[1]
    p1, p2, p3 = series.poles[0], series.poles[1], series.poles[2]
    lhs = abs(a1 / (p1 - root) + a2 / (p2 - root))
    rhs = (math.sqrt(series.basis.domain.area) * moments.l2_density_norm
           / (p3 - p2))
    slack = rhs - lhs
    detail = (f"eigenvalue {root:.9g} in ({lo:.6g}, {hi:.6g}); two-pole bound "
              f"{lhs:.4e} <= {rhs:.4e}")
    undetermined_below = [p for p in series.inert_poles if lo < p < root]
    if undetermined_below:
        detail += (f"; note {len(undetermined_below)} inert Dirichlet values "
                   f"in the bracket below it")
    return CheckResult(name, PASS if slack >= 0 else FAIL, detail,
                       margin=slack)


def check_nested_enclosure(report: SpectrumReport,
                           cert: AdmissibilityCertificate,
                           moments: MeasureMoments,
                           basis: BasisSet) -> CheckResult:
    """All nonreal certified entries inside the nested enclosure set."""
    name = "nested_enclosure"
    if cert.base_kind != "ground_state":
        return CheckResult(name, INAPPLICABLE,
                           "hypothesis concerns ground-state perturbations")
    if not cert.passed:
        return CheckResult(name, INAPPLICABLE,
                           f"admissibility failed: {cert.summary()}")
    t = basis.domain.area ** 0.25 * math.sqrt(moments.v_l2_norm)
    h1 = halfplane_threshold(basis, 1)
    offenders = []
    worst = math.inf
    for e in report.nonreal_entries():
        if not e.certified:
            continue
        ratio = float(matryoshka_ratio(np.array([e.value]), basis)[0])
        if ratio > t or in_halfplane(e.value, h1):
            offenders.append(e)
        worst = min(worst, t - ratio)
    if offenders:
        return CheckResult(name, FAIL,
                           f"{len(offenders)} nonreal entries escape the "
                           f"enclosure at t = {t:.4g}", tuple(offenders))
    detail = f"all nonreal entries inside the t = {t:.4g} enclosure"
    return CheckResult(name, PASS, detail,
                       margin=None if worst is math.inf else worst)


# ---------------------------------------------------------------------------
# enclosure boundary curves (marching squares)
# ---------------------------------------------------------------------------

def ratio_field(basis: BasisSet, re_grid: np.ndarray, im_grid: np.ndarray):
    """Enclosure field on a grid, shape (len(re_grid), len(im_grid))."""
    lam1 = basis.eigenvalues[0]
    RE, IM = np.meshgrid(re_grid, im_grid, indexing="ij")
    lam = RE + 1j * IM
    eigs = basis.eigenvalues
    d = np.full(lam.shape, np.inf)
    for chunk in range(0, eigs.size, 64):
        sub = eigs[chunk:chunk + 64]
        d = np.minimum(d, np.min(np.abs(lam[..., None] - sub[None, None, :]),
                                 axis=-1))
    d = np.minimum(d, _ray_distance(RE, IM, basis.cutoff))
    return d / np.abs(lam1 - lam)


def _interp(p0, p1, f0, f1, level):
    t = (level - f0) / (f1 - f0)
    return (p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1]))


def marching_squares(field: np.ndarray, re_grid: np.ndarray,
                     im_grid: np.ndarray, level: float):
    """Level-set polylines of ``field`` (indexed [i_re, i_im]) at ``level``.

    Plain 16-case marching squares with linear interpolation; the two
    ambiguous saddle cases are split by the cell-centre value.  Segments are
    chained into polylines; output is deterministic.
    """
    nr, ni = field.shape
    segments = []
    inside = field <= level
    for i in range(nr - 1):
        for j in range(ni - 1):
            c = (inside[i, j], inside[i + 1, j], inside[i + 1, j + 1],
                 inside[i, j + 1])
            if all(c) or not any(c):
                continue
            f00, f10 = field[i, j], field[i + 1, j]
            f11, f01 = field[i + 1, j + 1], field[i, j + 1]
            p00 = (re_grid[i], im_grid[j])
            p10 = (re_grid[i + 1], im_grid[j])
            p11 = (re_grid[i + 1], im_grid[j + 1])
            p01 = (re_grid[i], im_grid[j + 1])
            # edge crossings: bottom, right, top, left
            pts = {}
            if c[0] != c[1]:
                pts["b"] = _interp(p00, p10, f00, f10, level)
            if c[1] != c[2]:
                pts["r"] = _interp(p10, p11, f10, f11, level)
            if c[3] != c[2]:
                pts["t"] = _interp(p01, p11, f01, f11, level)
            if c[0] != c[3]:
                pts["l"] = _interp(p00, p01, f00, f01, level)
            keys = sorted(pts)
            if len(keys) == 2:
                segments.append((pts[keys[0]], pts[keys[1]]))
            elif len(keys) == 4:
                centre = 0.25 * (f00 + f10 + f11 + f01)
                if (centre <= level) == c[0]:
                    segments.append((pts["l"], pts["b"]))
                    segments.append((pts["t"], pts["r"]))
                else:
                    segments.append((pts["l"], pts["t"]))
                    segments.append((pts["b"], pts["r"]))
    return _chain_segments(segments)


def _chain_segments(segments):
    def key(p):
        return (round(p[0], 9), round(p[1], 9))

    adjacency: dict = {}
    for a, b in segments:
        adjacency.setdefault(key(a), []).append((a, b))
        adjacency.setdefault(key(b), []).append((b, a))
    used = set()
    polylines = []
    for a, b in segments:
        if (key(a), key(b)) in used or (key(b), key(a)) in used:
            continue
        line = [a, b]
        used.add((key(a), key(b)))
        grew = True
        while grew:
            grew = False
            tail = key(line[-1])
            for start, end in adjacency.get(tail, []):
                pair = (key(start), key(end))
                if pair in used or (pair[1], pair[0]) in used:
                    continue
                line.append(end)
                used.add(pair)
                grew = True
                break
        polylines.append(line)
    polylines.sort(key=lambda ln: (ln[0][0], ln[0][1]))
    return polylines


@dataclass(frozen=True)
class EnclosureCurves:
    thresholds: tuple[float, ...]
    curves: dict                 # threshold -> list of polylines
    re_grid: np.ndarray = field(repr=False, default=None)
    im_grid: np.ndarray = field(repr=False, default=None)
    field_values: np.ndarray = field(repr=False, default=None)

    def to_csv(self) -> str:
        import io
        lines = io.StringIO()
        lines.write("threshold,curve_id,re,im\n")
        for t in self.thresholds:
            for cid, poly in enumerate(self.curves[t]):
                for (re, im) in poly:
                    lines.write(f"{t},{cid},{re!r},{im!r}\n")
        return lines.getvalue()


def emit_matryoshka_curves(basis: BasisSet,
                           thresholds=(0.1, 0.2, 0.3, 0.4),
                           re_range=(0.0, 60.0), im_range=(-15.0, 15.0),
                           resolution=(600, 300)) -> EnclosureCurves:
    """Boundary curves of the nested enclosure for a list of thresholds."""
    re_grid = np.linspace(re_range[0], re_range[1], resolution[0])
    im_grid = np.linspace(im_range[0], im_range[1], resolution[1])
    F = ratio_field(basis, re_grid, im_grid)
    curves = {}
    for t in thresholds:
        if t <= 0.0:
            # the level set degenerates to the Dirichlet points themselves
            curves[t] = [[(float(l), 0.0), (float(l), 0.0)]
                         for l in basis.eigenvalues
                         if re_range[0] <= l <= re_range[1]]
            continue
        curves[t] = marching_squares(F, re_grid, im_grid, t)
    return EnclosureCurves(tuple(thresholds), curves, re_grid, im_grid, F)
