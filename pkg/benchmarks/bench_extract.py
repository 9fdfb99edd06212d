"""Compare extractor backends on the reference geometry (n=12, m=8, s=60).

Usage::

    python3 benchmarks/bench_extract.py [--samples N] [--repeats R]
"""

import argparse
import time

import numpy as np

from qrng_homodyne.toeplitz import AVAILABLE, HashParams, ToeplitzExtractor, ToeplitzSeed


def best_rate(extractor, codes, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        extractor.extract(codes)
        best = min(best, time.perf_counter() - t0)
    return codes.size / best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=3_000_000)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)

    params = HashParams(12, 8, 60)
    rng = np.random.default_rng(0)
    seed = ToeplitzSeed.random(params, rng)
    codes = rng.integers(-2048, 2048, args.samples)

    outputs, rates = {}, {}
    for name in AVAILABLE:
        ex = ToeplitzExtractor(params, seed, backend=name)
        outputs[name] = ex.extract(codes)
        rates[name] = best_rate(ex, codes, args.repeats)

    ref = next(iter(outputs.values()))
    agree = all(np.array_equal(ref, out) for out in outputs.values())
    print(f"{'backend':<8} {'samples/s':>12} {'Mbit/s':>9}")
    for name, rate in rates.items():
        print(f"{name:<8} {rate:12.3e} {rate * params.m / 1e6:9.1f}")
    if "cython" in rates and "numpy" in rates:
        print(f"speedup  {rates['cython'] / rates['numpy']:.2f}x")
    print(f"outputs identical: {agree}")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
