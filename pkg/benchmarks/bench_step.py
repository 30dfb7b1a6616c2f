"""Benchmark the compiled dynamics kernel against the pure-Python lane.

Times step_joints() on randomized joint arrays of several scene sizes and
verifies on the way that both lanes produce bit-identical results.

    python benchmarks/bench_step.py [--steps N] [--repeats R]
"""

import argparse
import time

import numpy as np

from simbridge import _fallback

try:
    from simbridge import _kernels
except ImportError:
    _kernels = None


def make_arrays(n, rng):
    return dict(
        q=rng.uniform(-1, 1, n),
        qd=rng.uniform(-2, 2, n),
        applied=np.zeros(n),
        u_motor=rng.uniform(-5, 5, n),
        ext=np.zeros(n),
        dt=0.001,
        inertia_eff=rng.uniform(0.01, 2.0, n),
        damping=rng.uniform(0, 2, n),
        coulomb=rng.uniform(0, 0.2, n),
        stiction=rng.uniform(0.2, 0.5, n),
        gravity_amp=rng.uniform(0, 3, n),
        gear=rng.uniform(0.5, 50, n),
        torque_limit=np.full(n, 100.0),
        pos_min=np.full(n, -3.0),
        pos_max=np.full(n, 3.0),
        v_eps=1e-3,
    )


def run_lane(kernel, args, steps):
    a = {k: (v.copy() if isinstance(v, np.ndarray) else v)
         for k, v in args.items()}
    start = time.perf_counter()
    for _ in range(steps):
        kernel.step_joints(**a)
    elapsed = time.perf_counter() - start
    return elapsed, a["q"], a["qd"]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=10_000,
                        help="substeps per measurement (default 10000)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="measurements per scene size; best is reported")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled kernel not available; timing the pure lane only")

    rng = np.random.default_rng(0)
    print(f"{'joints':>8} {'pure (us/step)':>16} {'compiled (us/step)':>20}"
          f" {'speedup':>9}  bit-identical")
    for n in (1, 4, 16, 64, 256):
        arrays = make_arrays(n, rng)
        pure_t = min(run_lane(_fallback, arrays, args.steps)[0]
                     for _ in range(args.repeats))
        pure_us = pure_t / args.steps * 1e6
        if _kernels is None:
            print(f"{n:>8} {pure_us:>16.2f} {'-':>20} {'-':>9}  -")
            continue
        comp_t = min(run_lane(_kernels, arrays, args.steps)[0]
                     for _ in range(args.repeats))
        comp_us = comp_t / args.steps * 1e6
        _, q_p, qd_p = run_lane(_fallback, arrays, 100)
        _, q_c, qd_c = run_lane(_kernels, arrays, 100)
        same = bool(np.array_equal(q_p, q_c) and np.array_equal(qd_p, qd_c))
        print(f"{n:>8} {pure_us:>16.2f} {comp_us:>20.2f}"
              f" {pure_t / comp_t:>8.1f}x  {same}")


if __name__ == "__main__":
    main()
