"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints per-kernel call times and the wall time of a full 80-iteration
personalisation run under each available backend.
"""
import argparse
import math
import timeit

import numpy as np

from synergid import harness, kernels
from synergid.subject import load_profile


def kernel_cases(k):
    rng = np.random.default_rng(0)
    rate = np.ascontiguousarray(rng.standard_normal(76))
    t = np.ascontiguousarray(np.sort(rng.uniform(0, 1.5, 76)))
    y = np.ascontiguousarray(np.sin(t))
    c7 = np.ascontiguousarray(rng.uniform(0, 0.3, 76))
    sa = c7 + 0.1
    return {
        "fingertip_forward": lambda: k.fingertip_forward(0.5, 0.3, 0.4, 0.1, 0.02, 1.5, 0.3),
        "solve_trunk_pitch": lambda: k.solve_trunk_pitch(0.5, 0.3, 0.4, 0.8, math.pi / 2, 0.0,
                                                         0.0, 1e-6),
        "synergy_integrate": lambda: k.synergy_integrate(rate, 0.02, 1.8, 0.5, 0.0, math.pi),
        "interp_uniform": lambda: k.interp_uniform(t, y, t[0], 0.02, 70),
        "peak_displacements": lambda: k.peak_displacements(0.5, 0.18, c7, sa, 0.0, 0.1),
    }


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    names = sorted(kernels.BACKENDS)
    if "cython" not in names:
        print("compiled backend not built; timing the pure-Python kernels only")

    print(f"{'kernel':22s}" + "".join(f"{n:>14s}" for n in names) + ("   speedup" if len(names) > 1 else ""))
    for case in kernel_cases(kernels.BACKENDS["python"]):
        times = [best_of(kernel_cases(kernels.BACKENDS[n])[case], args.repeat, 2000) for n in names]
        row = f"{case:22s}" + "".join(f"{t * 1e6:12.2f}us" for t in times)
        if len(times) > 1:
            row += f"   {times[1] / times[0] if names[0] == 'cython' else times[0] / times[1]:7.1f}x"
        print(row)

    profile = load_profile("subject2")
    print()
    for n in names:
        kernels.use_backend(n)
        t = best_of(lambda: harness.run_personalization(profile, seed=0), args.repeat, 3)
        print(f"personalisation run (80 reaches), {n:>6s}: {t * 1e3:8.2f} ms")


if __name__ == "__main__":
    main()
