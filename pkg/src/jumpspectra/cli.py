"""Command-line front end: experiment configs, certificates, figures.

A single JSON document describes an experiment: domain, measure, cutoff,
complex window, and the set of tasks to run.  Outputs are deterministic for
a fixed config and seed (sorted JSON keys, repr-formatted floats, integer
histogram counts).

Exit codes: 0 all requested certificates pass, 1 at least one failed,
2 configuration error, 3 no failure but some certificate was inapplicable
or undecidable at the configured cutoff.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys

import numpy as np

from . import enclosure as en
from . import measures as ms
from . import numrange as nr
from . import resolvent as rv
from . import secular as sec
from . import spectrum as sp
from . import stochastic as st
from .errors import ConfigError, JumpSpectraError, UndecidableError
from .geometry import BasisSet, build_basis, rectangle, unit_disk
from .svgfig import render_enclosure_svg

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_UNDECIDED = 0, 1, 2, 3
CONFIG_VERSION = 1
TASKS = ("spectrum", "enclosure_thm1", "enclosure_thm2", "enclosure_thm3",
         "prop_real", "numrange", "simulate", "figure1")

_DEFAULTS = {
    "cutoff": 2000.0,
    "window": [-1.0, 60.0, -15.0, 15.0],
    "k": 2,
    "thresholds": [0.1, 0.2, 0.3, 0.4],
    "seed": 20240817,
}


@dataclasses.dataclass
class Experiment:
    config: dict
    domain: object
    basis: BasisSet
    measure: ms.MeasureSpec
    moments: ms.MeasureMoments
    series: sec.SecularSeries
    out_dir: str


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _build_domain(cfg: dict):
    dom = cfg.get("domain", {})
    kind = dom.get("kind")
    if kind == "disk":
        return unit_disk()
    if kind == "rectangle":
        try:
            return rectangle(float(dom["side_x"]), float(dom["side_y"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"domain: bad rectangle sides ({exc})") from exc
    raise ConfigError(f"domain.kind must be 'disk' or 'rectangle', got {kind!r}")


def _load_density_grid(mcfg: dict, domain) -> np.ndarray:
    if "values" in mcfg:
        return np.asarray(mcfg["values"], dtype=float)
    path = mcfg.get("file")
    if path is None:
        raise ConfigError("density_grid measure needs 'values' or 'file'")
    if path.endswith(".json"):
        with open(path) as fh:
            return np.asarray(json.load(fh), dtype=float)
    # CSV of x,y,w rows forming a complete regular lattice
    xs, ys, ws = [], [], []
    with open(path) as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            x, y, w = (float(v) for v in row[:3])
            xs.append(x); ys.append(y); ws.append(w)
    ux = np.unique(np.asarray(xs))
    uy = np.unique(np.asarray(ys))
    if ux.size * uy.size != len(ws):
        raise ConfigError("density CSV does not form a complete lattice")
    grid = np.empty((ux.size, uy.size))
    ix = np.searchsorted(ux, xs)
    iy = np.searchsorted(uy, ys)
    grid[ix, iy] = ws
    return grid


def make_mode_perturbation(basis: BasisSet, coefficients: dict, scale: float):
    """Zero-mean combination of basis modes (mean projected out in-span)."""
    idx = sorted(int(i) for i in coefficients)
    if any(i < 0 or i >= len(basis) for i in idx):
        raise ConfigError("perturbation mode index out of range")
    coefs = np.array([float(coefficients[str(i)] if str(i) in coefficients
                            else coefficients[i]) for i in idx])
    ocs = np.array([basis.modes[i].one_coeff for i in idx])
    if float(ocs @ ocs) > 0:
        coefs = coefs - ocs * float(coefs @ ocs) / float(ocs @ ocs)
    modes = [basis.modes[i] for i in idx]

    def v(x, y):
        out = np.zeros_like(np.asarray(x, dtype=float))
        for mo, c in zip(modes, coefs):
            out = out + c * mo.evaluate(x, y)
        return scale * out

    return v


def _build_measure(cfg: dict, domain, basis: BasisSet) -> ms.MeasureSpec:
    mcfg = cfg.get("measure", {})
    variant = mcfg.get("variant")
    bm = float(mcfg.get("boundary_mass", 0.0))
    if variant == "uniform":
        return ms.UniformMeasure(bm)
    if variant == "ground_state":
        return ms.GroundStateMeasure(bm)
    if variant == "dirac":
        try:
            return ms.DiracMeasure(float(mcfg["x0"]), float(mcfg["y0"]), bm)
        except KeyError as exc:
            raise ConfigError("dirac measure needs x0 and y0") from exc
    if variant == "circle":
        if domain.kind != "disk":
            raise ConfigError("circle measure is only defined on the disk")
        try:
            return ms.CircleMeasure(float(mcfg["r0"]), bm)
        except KeyError as exc:
            raise ConfigError("circle measure needs r0") from exc
    if variant == "density_grid":
        grid = _load_density_grid(mcfg, domain)
        return ms.DensityMeasure(ms.density_from_grid(grid, domain), bm)
    if variant == "perturbed":
        base_name = mcfg.get("base", "uniform")
        if base_name == "uniform":
            base = ms.UniformMeasure()
        elif base_name == "ground_state":
            base = ms.GroundStateMeasure()
        else:
            raise ConfigError(f"unknown perturbation base {base_name!r}")
        v = make_mode_perturbation(basis, mcfg.get("v_modes", {}),
                                   float(mcfg.get("v_scale", 1.0)))
        return ms.PerturbedMeasure(base, v, bm)
    raise ConfigError(f"unknown measure variant {variant!r}")


def build_experiment(cfg: dict, out_dir: str | None = None) -> Experiment:
    merged = dict(_DEFAULTS)
    merged.update(cfg)
    if merged.get("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise ConfigError(f"unsupported config version {merged.get('version')}")
    tasks = merged.get("tasks", ["spectrum"])
    bad = [t for t in tasks if t not in TASKS]
    if bad:
        raise ConfigError(f"unknown tasks {bad}; valid: {list(TASKS)}")
    if not tasks:
        raise ConfigError("tasks must be nonempty")
    window = [float(v) for v in merged["window"]]
    if len(window) != 4 or window[0] >= window[1] or window[2] >= window[3]:
        raise ConfigError(f"window must be [re_lo, re_hi, im_lo, im_hi], got {window}")
    cutoff = float(merged["cutoff"])
    if window[1] > cutoff - max(50.0, 0.05 * cutoff):
        raise ConfigError("window exceeds the cutoff safety margin")
    domain = _build_domain(merged)
    try:
        basis = build_basis(domain, cutoff)
        measure = _build_measure(merged, domain, basis)
        moments = ms.compute_moments(measure, basis)
    except JumpSpectraError as exc:
        raise ConfigError(str(exc)) from exc
    series = sec.build_secular_series(basis, moments)
    out = out_dir or merged.get("output_dir", "out")
    os.makedirs(out, exist_ok=True)
    merged["window"] = window
    merged["tasks"] = list(tasks)
    return Experiment(merged, domain, basis, measure, moments, series, out)


# ---------------------------------------------------------------------------
# task runners
# ---------------------------------------------------------------------------

def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


def _verdict_row(name, verdict, detail=""):
    return {"name": name, "verdict": verdict, "detail": detail}


def _task_spectrum(exp: Experiment, rows: list):
    rep = sp.assemble_spectrum(exp.series, exp.config["window"])
    _write(os.path.join(exp.out_dir, "spectrum.json"), rep.to_json())
    _write(os.path.join(exp.out_dir, "spectrum.csv"), rep.to_csv())
    rows.append(_verdict_row("spectrum", en.PASS,
                             f"{len(rep.entries)} entries"))
    return rep


def _need_cert(exp: Experiment, rows, name):
    if not isinstance(exp.measure, ms.PerturbedMeasure):
        rows.append(_verdict_row(name, en.INAPPLICABLE,
                                 "measure is not a perturbation"))
        return None
    return ms.check_hypothesis_v(exp.measure, exp.basis,
                                 int(exp.config["k"]))


def _task_thm1(exp: Experiment, rows, rep):
    cert = _need_cert(exp, rows, "enclosure_thm1")
    if cert is None or rep is None:
        return
    res = en.check_halfplane_exclusion(rep, cert, int(exp.config["k"]),
                                       exp.basis)
    rows.append(_verdict_row("enclosure_thm1", res.verdict, res.detail))


def _task_thm2(exp: Experiment, rows):
    cert = _need_cert(exp, rows, "enclosure_thm2")
    if cert is None:
        return
    res = en.check_interlacing(exp.series, cert, int(exp.config["k"]))
    rows.append(_verdict_row("enclosure_thm2", res.verdict, res.detail
                             or str(res.intervals)))


def _task_thm3(exp: Experiment, rows, rep):
    cert = _need_cert(exp, rows, "enclosure_thm3")
    if cert is None or rep is None:
        return
    res = en.check_nested_enclosure(rep, cert, exp.moments, exp.basis)
    rows.append(_verdict_row("enclosure_thm3", res.verdict, res.detail))


def _task_prop_real(exp: Experiment, rows):
    cert = _need_cert(exp, rows, "prop_real")
    if cert is None:
        return
    res = en.bound_first_eigenvalue(exp.series, cert, exp.moments)
    rows.append(_verdict_row("prop_real", res.verdict, res.detail))


def _task_numrange(exp: Experiment, rows):
    eps = np.logspace(-4, -2, 9)
    samples = nr.sweep(exp.basis, exp.measure, eps)
    _write(os.path.join(exp.out_dir, "numrange_sweep.csv"),
           nr.sweep_to_csv(samples))
    verdict = en.PASS
    details = []
    for d in nr.DIRECTIONS:
        fit = nr.blowup_fit(samples, d)
        details.append(f"dir {d}: slope {fit.slope:.4f}")
        if abs(fit.slope + 0.5) > 0.05:
            verdict = en.FAIL
    defect = max(s.mean_defect for s in samples)
    if defect > 1e-8:
        verdict = en.FAIL
        details.append(f"domain mean defect {defect:.2e}")
    rows.append(_verdict_row("numrange", verdict, "; ".join(details)))


def _task_simulate(exp: Experiment, rows):
    wcfg = exp.config.get("walk", {})
    config = st.WalkConfig(
        step_dt=float(wcfg.get("step_dt", 1e-5)),
        n_steps=int(wcfg.get("n_steps", 100_000)),
        n_paths=int(wcfg.get("n_paths", 1_000)),
        seed=int(wcfg.get("seed", exp.config["seed"])),
        boundary_tolerance=wcfg.get("boundary_tolerance"),
        n_bins=int(wcfg.get("n_bins", 24)))
    hist = st.simulate_occupation(config, exp.domain, exp.measure, exp.basis)
    pred = st.stationary_prediction(exp.series, hist)
    dist = st.compare_stationary(hist, pred)
    _write(os.path.join(exp.out_dir, "occupation.csv"),
           st.histogram_to_csv(hist, pred))
    threshold = float(wcfg.get("l1_threshold", 0.05))
    rows.append(_verdict_row("simulate",
                             en.PASS if dist < threshold else en.FAIL,
                             f"L1 distance {dist:.4f} (threshold {threshold})"))


def _task_figure1(exp: Experiment, rows):
    thresholds = tuple(float(t) for t in exp.config["thresholds"])
    curves = en.emit_matryoshka_curves(exp.basis, thresholds)
    _write(os.path.join(exp.out_dir, "enclosure_curves.csv"), curves.to_csv())
    _write(os.path.join(exp.out_dir, "enclosure.svg"),
           render_enclosure_svg(curves, exp.basis))
    F = curves.field_values
    ordered = sorted(thresholds)
    nested = all(np.all((F <= ordered[i]) <= (F <= ordered[i + 1]))
                 for i in range(len(ordered) - 1))
    rows.append(_verdict_row("figure1", en.PASS if nested else en.FAIL,
                             f"nesting on {F.size} grid points"))


def run_experiment(exp: Experiment) -> tuple[int, dict]:
    rows: list = []
    tasks = exp.config["tasks"]
    rep = None

    def guarded(name, fn):
        try:
            return fn()
        except UndecidableError as exc:
            rows.append(_verdict_row(name, "undecidable", str(exc)))
        except JumpSpectraError as exc:
            rows.append(_verdict_row(name, en.FAIL,
                                     f"{type(exc).__name__}: {exc}"))
        return None

    if {"spectrum", "enclosure_thm1", "enclosure_thm3"} & set(tasks):
        rep = guarded("spectrum", lambda: _task_spectrum(exp, rows))
    if "enclosure_thm1" in tasks:
        guarded("enclosure_thm1", lambda: _task_thm1(exp, rows, rep))
    if "enclosure_thm2" in tasks:
        guarded("enclosure_thm2", lambda: _task_thm2(exp, rows))
    if "enclosure_thm3" in tasks:
        guarded("enclosure_thm3", lambda: _task_thm3(exp, rows, rep))
    if "prop_real" in tasks:
        guarded("prop_real", lambda: _task_prop_real(exp, rows))
    if "numrange" in tasks:
        guarded("numrange", lambda: _task_numrange(exp, rows))
    if "simulate" in tasks:
        guarded("simulate", lambda: _task_simulate(exp, rows))
    if "figure1" in tasks:
        guarded("figure1", lambda: _task_figure1(exp, rows))

    summary = {
        "version": CONFIG_VERSION,
        "config": {k: v for k, v in exp.config.items()
                   if k not in ("output_dir",)},
        "results": rows,
    }
    _write(os.path.join(exp.out_dir, "summary.json"),
           json.dumps(summary, sort_keys=True, indent=2, default=str) + "\n")
    verdicts = [r["verdict"] for r in rows]
    if en.FAIL in verdicts:
        return EXIT_FAIL, summary
    if any(v in (en.INAPPLICABLE, "undecidable") for v in verdicts):
        return EXIT_UNDECIDED, summary
    return EXIT_PASS, summary


# ---------------------------------------------------------------------------
# consolidated verification
# ---------------------------------------------------------------------------

def verify_experiment(exp: Experiment, inject_fault: str | None = None) -> tuple[int, list]:
    rows: list = []
    series = exp.series
    moments = exp.moments
    tampered = None
    if inject_fault == "moments":
        tampered = moments.with_moments(moments.moments + 1e-3)
    elif inject_fault is not None:
        raise ConfigError(f"unknown fault kind {inject_fault!r}")

    def row(name, fn, threshold, direction="<"):
        try:
            value = fn()
        except UndecidableError as exc:
            rows.append(_verdict_row(name, "undecidable", str(exc)))
            return
        except JumpSpectraError as exc:
            rows.append(_verdict_row(name, en.FAIL,
                                     f"{type(exc).__name__}: {exc}"))
            return
        ok = value < threshold if direction == "<" else value > threshold
        rows.append(_verdict_row(name, en.PASS if ok else en.FAIL,
                                 f"value {value:.3e} vs {direction} {threshold:g}"))

    for lam in (-1.0, -5.0):
        row(f"resolvent_identity[{lam:g}]",
            lambda lam=lam: rv.resolvent_identity_defect(
                series, lam, generator_moments=tampered), 1e-8)
    if moments.l2_density_norm is not None:
        row("adjoint_pairing[-1]",
            lambda: rv.adjoint_pairing_defect(series, -1.0), 1e-8)
        row("adjoint_kernel", lambda: rv.adjoint_kernel_defect(series), 1e-8)
        row("nonselfadjointness",
            lambda: rv.selfadjointness_defect(series), 1e-6, ">")
    else:
        rows.append(_verdict_row("adjoint_checks", en.INAPPLICABLE,
                                 "measure has no L2 density"))

    rep = sp.assemble_spectrum(series, exp.config["window"])
    values = [e.value for e in rep.entries if e.certified]
    conj_ok = all(any(abs(np.conj(v) - u) < 1e-8 * (1 + abs(v)) for u in values)
                  for v in values)
    rows.append(_verdict_row("conjugation_closure",
                             en.PASS if conj_ok else en.FAIL,
                             f"{len(values)} certified entries"))
    lam1 = exp.basis.eigenvalues[0]
    loc_ok = all(v.real >= -1e-9 for v in values) \
        and all(abs(v) < 1e-9 or abs(v.real) > 1e-9 for v in values) \
        and not any(1e-9 < v.real < lam1 - 1e-9 and abs(v.imag) < 1e-12
                    for v in values)
    rows.append(_verdict_row("spectrum_location",
                             en.PASS if loc_ok else en.FAIL,
                             "Re >= 0; only 0 on the imaginary axis; "
                             "nothing below the first Dirichlet eigenvalue"))

    if isinstance(exp.measure, ms.PerturbedMeasure):
        cert = ms.check_hypothesis_v(exp.measure, exp.basis,
                                     int(exp.config["k"]))
        if cert.base_kind == "uniform":
            res1 = en.check_halfplane_exclusion(rep, cert,
                                                int(exp.config["k"]), exp.basis)
            rows.append(_verdict_row(res1.name, res1.verdict, res1.detail))
            res2 = en.check_interlacing(series, cert, int(exp.config["k"]))
            rows.append(_verdict_row(f"interlacing[k={res2.k}]", res2.verdict,
                                     res2.detail))
            res3 = en.bound_first_eigenvalue(series, cert, moments)
            rows.append(_verdict_row(res3.name, res3.verdict, res3.detail))
        else:
            res = en.check_nested_enclosure(rep, cert, moments, exp.basis)
            rows.append(_verdict_row(res.name, res.verdict, res.detail))

    verdicts = [r["verdict"] for r in rows]
    if en.FAIL in verdicts:
        code = EXIT_FAIL
    elif any(v in (en.INAPPLICABLE, "undecidable") for v in verdicts):
        code = EXIT_UNDECIDED
    else:
        code = EXIT_PASS
    return code, rows


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _print_rows(rows):
    width = max(len(r["name"]) for r in rows) + 2
    for r in rows:
        print(f"{r['name']:<{width}} {r['verdict']:<13} {r['detail']}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jump-spectra",
        description="spectral certificates for restart diffusion generators")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the tasks of an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--cutoff", type=float, default=None)

    p_ver = sub.add_parser("verify", help="run the consolidated certificate suite")
    p_ver.add_argument("config")
    p_ver.add_argument("--out", default=None)
    p_ver.add_argument("--inject-fault", default=None,
                       help="corrupt a data path (moments) as a negative control")

    p_fig = sub.add_parser("figure1", help="emit the nested-enclosure figure")
    p_fig.add_argument("--thresholds", default="0.1,0.2,0.3,0.4")
    p_fig.add_argument("--domain", default="disk", choices=["disk", "rectangle"])
    p_fig.add_argument("--side-x", type=float, default=math.pi)
    p_fig.add_argument("--side-y", type=float, default=math.pi)
    p_fig.add_argument("--out", default="out")

    args = parser.parse_args(argv)
    try:
        if args.command == "figure1":
            cfg = {"domain": {"kind": args.domain, "side_x": args.side_x,
                              "side_y": args.side_y},
                   "measure": {"variant": "uniform"},
                   "tasks": ["figure1"],
                   "thresholds": [float(t) for t in args.thresholds.split(",")]}
            exp = build_experiment(cfg, args.out)
            code, _ = run_experiment(exp)
            return code
        cfg = load_config(args.config)
        if getattr(args, "seed", None) is not None:
            cfg["seed"] = args.seed
        if getattr(args, "cutoff", None) is not None:
            cfg["cutoff"] = args.cutoff
        exp = build_experiment(cfg, args.out)
        if args.command == "run":
            code, summary = run_experiment(exp)
            _print_rows(summary["results"])
            return code
        code, rows = verify_experiment(exp, args.inject_fault)
        _print_rows(rows)
        return code
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
