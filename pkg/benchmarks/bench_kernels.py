#!/usr/bin/env python3
"""Benchmark the numba walk kernel against the pure-numpy fallback.

Runs the same seeded restart-diffusion ensemble through both engines and
reports wall time and histogram agreement.  Invoke as

    python benchmarks/bench_kernels.py [--paths N] [--steps N] [--dt X]

The numba engine can be disabled globally with JUMPSPECTRA_NUMBA=0, in which
case both columns use the numpy path (useful to gauge the flag itself).
"""

import argparse
import time

import numpy as np

from jumpspectra import geometry, measures, stochastic
from jumpspectra._kernels import numba_enabled


def run(engine_numpy: bool, cfg: stochastic.WalkConfig, domain, spec, basis):
    t0 = time.perf_counter()
    hist = stochastic.simulate_occupation(cfg, domain, spec, basis,
                                          force_numpy=engine_numpy)
    return hist, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--dt", type=float, default=1e-5)
    ap.add_argument("--measure", default="uniform",
                    choices=["uniform", "ground_state"])
    args = ap.parse_args()

    domain = geometry.unit_disk()
    basis = geometry.build_basis(domain, 300.0)
    spec = (measures.UniformMeasure() if args.measure == "uniform"
            else measures.GroundStateMeasure())
    cfg = stochastic.WalkConfig(step_dt=args.dt, n_steps=args.steps,
                                n_paths=args.paths, seed=7)

    total = args.paths * args.steps
    print(f"ensemble: {args.paths} paths x {args.steps} steps = {total:.2e} steps")
    if numba_enabled():
        # warm the JIT cache before timing
        warm = stochastic.WalkConfig(step_dt=args.dt, n_steps=64, n_paths=8, seed=1)
        stochastic.simulate_occupation(warm, domain, spec, basis)
        h_nb, t_nb = run(False, cfg, domain, spec, basis)
        print(f"numba : {t_nb:8.3f} s   ({total / t_nb:.3e} steps/s)")
    else:
        h_nb = t_nb = None
        print("numba : disabled (JUMPSPECTRA_NUMBA=0 or not installed)")
    h_np, t_np = run(True, cfg, domain, spec, basis)
    print(f"numpy : {t_np:8.3f} s   ({total / t_np:.3e} steps/s)")
    if h_nb is not None:
        l1 = float(np.sum(np.abs(h_nb.normalized_density - h_np.normalized_density)
                          * h_nb.bin_areas))
        print(f"histogram L1(numba, numpy) = {l1:.3e}")
        print(f"speedup x{t_np / t_nb:.1f}")


if __name__ == "__main__":
    main()
