"""Compare the numba and numpy kernels on 30 s of 192 kHz audio.

    python3 benchmarks/bench_kernels.py [--seconds 30] [--repeat 5]

Reports the best-of-N wall time per kernel and backend. The first numba
call is made before timing so compilation (or cache loading) is excluded.
"""
import argparse
import time

import numpy as np

from evacoustic import kernels
from evacoustic.filterbank import design_bandpass


def best_of(fn, repeat):
    fn()  # warm-up / JIT
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seconds", type=float, default=30.0)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    fs = 192_000
    rng = np.random.default_rng(0)
    x = rng.standard_normal(int(args.seconds * fs))
    h = design_bandpass().coefficients
    powers = kernels._block_mean_square_np(x, 96)
    decisions = (powers > np.quantile(powers, 0.995)).view(np.uint8)
    a = float(np.exp(-2 * np.pi * 2000 / fs))

    cases = [
        ("block_mean_square", lambda: kernels._block_mean_square_np(x, 96), lambda: kernels._block_mean_square_nb(x, 96)),
        ("one_pole", lambda: kernels._one_pole_np(x, a), lambda: kernels._one_pole_nb(x, a)),
        ("vote_activity", lambda: kernels._vote_activity_np(decisions, 5, 1000),
         lambda: kernels._vote_activity_nb(decisions, 5, 1000)),
        ("true_runs", lambda: kernels._true_runs_np(decisions.view(bool)), lambda: kernels._true_runs_nb(decisions.view(bool))),
        # numpy column is the FFT path used by both backends; numba column is the direct form
        ("fir 513 taps", lambda: kernels._fir_valid_np(x, h), lambda: kernels._fir_direct_nb(x, h)),
    ]

    print(f"{len(x)} samples, best of {args.repeat}")
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, np_fn, nb_fn in cases:
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{name:<20}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>9.2f}x")


if __name__ == "__main__":
    main()
