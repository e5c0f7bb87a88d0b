"""Compare the compiled and NumPy kernel backends on the hot paths.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from jamsense.kernels import available_backends


def _time(fn, repeats):
    fn()  # warm up
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_conv(mod, rng, repeats):
    x = rng.normal(size=(32, 8, 300))
    w = rng.normal(size=(16, 8, 8))
    b = rng.normal(size=16)
    fwd = lambda: mod.conv1d_forward(x, w, b, 2)
    y = mod.conv1d_forward(x, w, b, 2)
    dy = rng.normal(size=y.shape)
    bwd = lambda: mod.conv1d_backward(x, w, dy, 2)
    return _time(fwd, repeats), _time(bwd, repeats)


def bench_fading(mod, rng, repeats):
    n_rays = 23 * 20
    amps = rng.normal(size=n_rays) ** 2
    phases = rng.uniform(0, 2 * np.pi, n_rays)
    dopplers = rng.uniform(-100, 100, n_rays)
    t = np.linspace(0.0, 30.0, 3000)
    return _time(lambda: mod.fading_series(amps, phases, dopplers, t), repeats)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    backends = available_backends()
    rows = {}
    for name, mod in backends.items():
        cf, cb = bench_conv(mod, rng, args.repeats)
        fs = bench_fading(mod, rng, args.repeats)
        rows[name] = {"conv1d_forward": cf, "conv1d_backward": cb, "fading_series": fs}

    print(f"{'kernel':<18}" + "".join(f"{n + ' (ms)':>16}" for n in rows))
    for kernel in ("conv1d_forward", "conv1d_backward", "fading_series"):
        line = f"{kernel:<18}"
        for name in rows:
            line += f"{rows[name][kernel] * 1e3:>16.3f}"
        print(line)
    if "cython" in rows and "numpy" in rows:
        print("\nspeedup (numpy / cython):")
        for kernel in ("conv1d_forward", "conv1d_backward", "fading_series"):
            ratio = rows["numpy"][kernel] / rows["cython"][kernel]
            print(f"  {kernel}: {ratio:.2f}x")
    else:
        print("\ncompiled backend not built; only the NumPy fallback was timed")


if __name__ == "__main__":
    main()
