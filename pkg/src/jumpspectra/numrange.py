"""Boundary-layer probes showing the Rayleigh quotient escapes to infinity.

The trial functions are ``psi = 1 + phi - b * theta`` where ``phi`` rescales
a fixed cubic profile of the boundary distance into a collar of width eps,
``theta`` is a smooth interior bump normalised to unit measure mean, and
``b`` subtracts the measure mean of ``phi`` so that ``psi`` stays in the
generator domain (boundary value and measure mean both equal 1).

The quotient splits, by the divergence theorem with inner normal, into an
exactly computed boundary term  perimeter * direction / sqrt(eps)  plus an
O(1) gradient volume term; sweeping eps over decades and fitting the
dominant component on a log-log scale exhibits the -1/2 power in all four
axis directions of the complex plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .geometry import BasisSet, layer_quadrature
from .measures import (CircleMeasure, DiracMeasure, MeasureSpec,
                       density_function, measure_integral)

DIRECTIONS = (1.0 + 0j, -1.0 + 0j, 1j, -1j)


def profile(s):
    """Cubic boundary profile: zero at both ends, unit slope at 0."""
    s = np.asarray(s, dtype=float)
    return s * (1.0 - s) ** 2


def profile_derivative(s):
    s = np.asarray(s, dtype=float)
    return (1.0 - s) * (1.0 - 3.0 * s)


@dataclass(frozen=True)
class ProbeProfile:
    """One boundary-layer trial function."""

    direction: complex            # slope of the profile at the boundary
    epsilon: float
    bump_radius_frac: float = 0.25

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ValueError("direction must be one of +-1, +-i")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class RayleighSample:
    direction: complex
    epsilon: float
    quotient: complex
    norm_sq: float
    b_eps: complex
    mean_defect: float
    boundary_term: complex
    volume_term: float


def _bump(domain, frac):
    cx, cy = domain.incenter
    rb = frac * domain.inradius

    def theta(x, y):
        u = np.hypot(np.asarray(x, dtype=float) - cx,
                     np.asarray(y, dtype=float) - cy) / rb
        out = np.zeros_like(u)
        core = u < 1.0
        out[core] = np.exp(-1.0 / (1.0 - u[core] ** 2))
        return out

    def grad_sq(x, y):
        u = np.hypot(np.asarray(x, dtype=float) - cx,
                     np.asarray(y, dtype=float) - cy) / rb
        out = np.zeros_like(u)
        core = u < 1.0 - 1e-12
        uc = u[core]
        d = np.exp(-1.0 / (1.0 - uc ** 2)) * 2.0 * uc / (1.0 - uc ** 2) ** 2
        out[core] = (d / rb) ** 2
        return out

    return theta, grad_sq, rb


def rayleigh_probe(prof: ProbeProfile, basis: BasisSet,
                   spec: MeasureSpec) -> RayleighSample:
    """Quotient of the generator quadratic form over the layer trial state."""
    domain = basis.domain
    eps = prof.epsilon
    d = complex(prof.direction)
    theta, theta_grad_sq, rb = _bump(domain, prof.bump_radius_frac)
    if eps >= domain.inradius - rb:
        raise GeometryError(
            f"layer width {eps} reaches the bump of radius {rb}")

    lx, ly, lw, ls = layer_quadrature(domain, eps)
    g_vals = profile(ls)
    gp_vals = profile_derivative(ls)

    # measure mean of the layer profile
    if isinstance(spec, DiracMeasure):
        rho = float(domain.boundary_distance(spec.x0, spec.y0))
        b_raw = math.sqrt(eps) * profile(rho / eps) if rho < eps else 0.0
    elif isinstance(spec, CircleMeasure):
        rho = 1.0 - spec.r0
        b_raw = math.sqrt(eps) * profile(rho / eps) if rho < eps else 0.0
    else:
        w = density_function(spec, basis)
        b_raw = math.sqrt(eps) * float(np.sum(lw * g_vals * w(lx, ly)))
    b_eps = d * b_raw

    theta_mass = measure_integral(spec, basis, theta)
    if abs(theta_mass) < 1e-12:
        raise GeometryError("bump has negligible measure mean; move it")

    rule = basis.quadrature
    theta_vals = theta(rule.x, rule.y) / theta_mass
    int_theta = float(np.real(rule.integrate(theta_vals)))
    int_theta_sq = float(np.real(rule.integrate(theta_vals ** 2)))
    int_grad_theta_sq = float(np.real(rule.integrate(
        theta_grad_sq(rule.x, rule.y)))) / theta_mass ** 2

    int_phi = d * math.sqrt(eps) * float(np.sum(lw * g_vals))
    int_phi_sq = eps * float(np.sum(lw * g_vals ** 2))
    layer_grad = float(np.sum(lw * gp_vals ** 2)) / eps

    norm_sq = (domain.area + 2.0 * (int_phi - b_eps * int_theta).real
               + int_phi_sq + abs(b_eps) ** 2 * int_theta_sq)
    boundary_term = domain.boundary_weight * d / math.sqrt(eps)
    volume_term = layer_grad + abs(b_eps) ** 2 * int_grad_theta_sq
    quotient = (boundary_term + volume_term) / norm_sq

    # the bump mean is normalised to 1, so <psi>_mu - 1 equals the error of
    # the layer quadrature for b; re-evaluate b on a finer rule to measure it
    lx2, ly2, lw2, ls2 = layer_quadrature(domain, eps, n_s=48, n_tan=384)
    if isinstance(spec, (DiracMeasure, CircleMeasure)):
        b_check = b_raw
    else:
        w = density_function(spec, basis)
        b_check = math.sqrt(eps) * float(np.sum(lw2 * profile(ls2) * w(lx2, ly2)))
    mean_defect = abs(d * b_check - b_eps)

    return RayleighSample(d, eps, quotient, norm_sq, b_eps, mean_defect,
                          boundary_term, volume_term)


@dataclass(frozen=True)
class BlowupFit:
    direction: complex
    slope: float
    intercept: float
    r_squared: float


def sweep(basis: BasisSet, spec: MeasureSpec, epsilons,
          directions=DIRECTIONS) -> list[RayleighSample]:
    out = []
    for d in directions:
        for eps in epsilons:
            out.append(rayleigh_probe(ProbeProfile(d, float(eps)), basis, spec))
    return out


def blowup_fit(samples: list[RayleighSample], direction: complex) -> BlowupFit:
    """log-log fit of the dominant quotient component against eps."""
    pts = [s for s in samples if s.direction == complex(direction)]
    if len(pts) < 4:
        raise ValueError("need at least 4 sweep points for a fit")
    eps = np.array([s.epsilon for s in pts])
    dominant = np.array([(s.quotient * np.conj(s.direction)).real for s in pts])
    if np.any(dominant <= 0):
        raise ValueError("dominant component must stay positive along the sweep")
    x = np.log(eps)
    y = np.log(dominant)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), res, *_ = np.linalg.lstsq(A, y, rcond=None)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(res[0]) if res.size else float(np.sum((y - A @ [slope, intercept]) ** 2))
    return BlowupFit(complex(direction), float(slope), float(intercept),
                     1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0)


def sweep_to_csv(samples: list[RayleighSample]) -> str:
    lines = ["epsilon,direction_re,direction_im,re,im,norm"]
    for s in samples:
        lines.append(f"{s.epsilon!r},{s.direction.real!r},{s.direction.imag!r},"
                     f"{s.quotient.real!r},{s.quotient.imag!r},"
                     f"{math.sqrt(s.norm_sq)!r}")
    return "\n".join(lines) + "\n"
