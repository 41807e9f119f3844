"""Compare the numba-compiled kernels with their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (compilation excluded), then timed as the best
of ``--repeat`` runs.  Outputs are checked for agreement before timing.
"""
import argparse
import math
import timeit

import numpy as np

from adiabreak import _kernels as K


def cases():
    rng = np.random.default_rng(0)
    x = np.sort(rng.uniform(0.0, 20.0, 20000))
    q = 0.25 * x * x
    lo = np.zeros_like(q)
    xa = np.geomspace(20.0, 1e4, 20000)
    phase = np.angle(np.exp(1j * np.cumsum(rng.uniform(-1.0, 1.0, 200000))))
    t_out = np.linspace(-20.0, 20.0, 2001)
    dopri = (0.0025, t_out, 1.0 + 0j, 1j, 1e-10, 1e-10, 1e-3, 1e-13, 400000)
    return [
        ("series_sum (20k pts)", lambda: K.series_sum_loop(0.25, q, lo), lambda: K.series_sum_vec(0.25, q, lo)),
        ("hankel_pq (20k pts)", lambda: K.hankel_pq_loop(0.25, xa, -1), lambda: K.hankel_pq_vec(0.25, xa, -1)),
        ("unwrap (200k pts)", lambda: K.unwrap_loop(phase, 100000, 0.0, 0.5 * math.pi),
         lambda: K.unwrap_vec(phase, 100000, 0.0, 0.5 * math.pi)),
        ("dopri5 eps=0.05", lambda: K.dopri_run_loop(*dopri), lambda: K.dopri_run_py(*dopri)),
    ]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    print(f"{'kernel':24s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}")
    for name, fast, slow in cases():
        a, b = fast(), slow()
        np.testing.assert_allclose(np.asarray(a[0]), np.asarray(b[0]), rtol=1e-10, atol=1e-9)
        reps = 1 if name.startswith("dopri") else args.repeat
        t_fast = min(timeit.repeat(fast, number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(slow, number=1, repeat=reps))
        print(f"{name:24s} {1e3 * t_fast:12.3f} {1e3 * t_slow:12.3f} {t_slow / t_fast:8.1f}x")


if __name__ == "__main__":
    main()
