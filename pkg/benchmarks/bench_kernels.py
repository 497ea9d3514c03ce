#!/usr/bin/env python3
"""Benchmark the compiled walk kernel against the pure-Python twin.

Runs the same component-estimation workload on both backends, checks the
results are bit-identical, and reports steps/second plus the speedup. The
workload mirrors the heaviest acceptance configuration: n=4, Casablanca
noise, 1008 shots, walk length 7.

Usage: python benchmarks/bench_kernels.py [--shots N] [--components N]
"""

import argparse
import time

import numpy as np

from qrwalk.kernels import _walk_py
from qrwalk.model import generate_problem
from qrwalk.circuit import flip_probabilities
from qrwalk.noise import NOISE_PRESETS, NOISELESS, kernel_noise_probs

try:
    from qrwalk.kernels import _walk_cy
except ImportError:
    _walk_cy = None


def run_workload(kernel, inst, shots, components, noise, c=7):
    pf = flip_probabilities(inst.angles)
    zx = np.ascontiguousarray(inst.P.zero_profile(), dtype=np.uint8)
    probs = kernel_noise_probs(noise)
    results = []
    t0 = time.perf_counter()
    for comp in range(components):
        results.append(
            kernel.estimate_component(
                comp, shots, 42, c, inst.gamma, inst.b, pf, zx,
                True, 1000, noise.enabled, probs,
            )
        )
    return time.perf_counter() - t0, results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--shots", type=int, default=1008)
    parser.add_argument("--components", type=int, default=16)
    args = parser.parse_args()

    inst = generate_problem(4, 2, 0.5, 7)
    c = 7
    steps = args.shots * args.components * c

    for label, noise in (("noisy (fake-casablanca)",
                          NOISE_PRESETS["fake-casablanca"]),
                         ("noiseless", NOISELESS)):
        print(f"--- {label}: {args.components} components x {args.shots} "
              f"shots x {c} steps = {steps:,} walk steps ---")
        t_py, r_py = run_workload(_walk_py, inst, args.shots,
                                  args.components, noise, c)
        print(f"pure-python : {t_py:8.3f} s   {steps / t_py:12,.0f} steps/s")
        if _walk_cy is None:
            print("compiled    : extension not built (python setup.py "
                  "build_ext --inplace)")
            continue
        t_cy, r_cy = run_workload(_walk_cy, inst, args.shots,
                                  args.components, noise, c)
        print(f"compiled    : {t_cy:8.3f} s   {steps / t_cy:12,.0f} steps/s")
        print(f"speedup     : {t_py / t_cy:8.1f} x")
        match = all(a == b for a, b in zip(r_py, r_cy))
        print(f"bit-identical results: {match}")
        if not match:
            raise SystemExit("backend results diverged")


if __name__ == "__main__":
    main()
