"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py --bins 524288 --repeat 5
"""
import argparse
import time

import numpy as np

from vcausal import _kernels_numpy

try:
    from vcausal import _kernels_numba
except ImportError:
    _kernels_numba = None

KEY = 0x5EED_0F_C0FFEE


def cases(n_bins):
    bins = np.arange(n_bins, dtype=np.int64)
    counts = np.random.default_rng(0).poisson(665.0, n_bins).astype(np.float64)
    return {
        "uniforms": lambda k: k.uniforms(KEY, bins, 0, 0),
        "poisson lam=3": lambda k: k.poisson(KEY, bins, 1, np.full(n_bins, 3.0)),
        "poisson lam=665": lambda k: k.poisson(KEY, bins, 2, np.full(n_bins, 665.0)),
        "poisson lam=40000": lambda k: k.poisson(KEY, bins, 3, np.full(n_bins, 40000.0)),
        "moving_average w=200": lambda k: k.moving_average(counts, 200),
        "schedule_widths": lambda k: k.schedule_widths(n_bins, 246517, 0.4643622, 100),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--bins", type=int, default=2**19)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = [_kernels_numpy] + ([_kernels_numba] if _kernels_numba else [])
    print(f"{'kernel':<22}" + "".join(f"{b.NAME + ' [ms]':>14}" for b in backends)
          + ("   speedup  same" if _kernels_numba else ""))
    for name, fn in cases(args.bins).items():
        results = [fn(b) for b in backends]  # also warms up the JIT
        times = [best_of(lambda b=b: fn(b), args.repeat) * 1e3 for b in backends]
        line = f"{name:<22}" + "".join(f"{t:14.2f}" for t in times)
        if _kernels_numba:
            same = np.allclose(results[0], results[1], rtol=0, atol=1e-12)
            line += f"{times[0] / times[1]:9.1f}x  {'yes' if same else 'NO'}"
        print(line)


if __name__ == "__main__":
    main()
