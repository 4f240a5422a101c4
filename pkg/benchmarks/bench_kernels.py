"""Time the numpy and numba kernel backends on dense statevectors.

    python3 benchmarks/bench_kernels.py --qubits 12 16 20 --repeat 5
"""
import argparse
import timeit

import numpy as np

from pfcsim import _kernels

H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def cases(n, rng):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    positions = np.arange(n, dtype=np.int64)
    masks = rng.integers(0, 1 << min(n, 62), size=64, dtype=np.uint64)
    return {
        "hadamard_bits": lambda k: k[0](amps, positions),
        "apply_1q": lambda k: k[1](amps, n // 2, H),
        "parity_any": lambda k: k[2](n, masks),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14} {'n':>3} " + " ".join(f"{b + ' ms':>12}" for b in backends))
    for n in args.qubits:
        for name, fn in cases(n, rng).items():
            times = []
            for b in backends:
                k = _kernels.kernels(b)
                fn(k)  # compile / warm caches
                times.append(min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat)) * 1e3)
            print(f"{name:<14} {n:>3} " + " ".join(f"{t:>12.3f}" for t in times))


if __name__ == "__main__":
    main()
