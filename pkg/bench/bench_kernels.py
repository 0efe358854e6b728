"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 bench/bench_kernels.py [--n 20000] [--walk 20000] [--repeat 5]

Prints one row per kernel with the best-of-``repeat`` time of each backend and
the speedup. Both backends receive identical seeded inputs, and a kernel whose
outputs disagree aborts the run.
"""
import argparse
import timeit

import numpy as np

from kobalab import _pycore, kernels
from kobalab.automorphisms import random_webster
from kobalab.domains import Ellipse


def workloads(n, walk, rng):
    exps = np.array([1.0, 1.0, 3.0])
    Z = 0.5 * (rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))) / np.sqrt(6)
    U = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    t0 = np.full(n, 10.0)
    E = Ellipse((1, 1, 3))
    gens = [random_webster(E, rng, 1.0) for _ in range(2)]
    mats = np.array([g.phi.matrix for g in gens])
    phases = np.array([g.phases for g in gens])
    word = rng.integers(0, 2, size=walk)
    z0 = np.array([0.1, 0.2j, 0.3])
    K = _pycore.KIND_POWER_SUM
    return {
        "defining_values": lambda m: m.defining_values(K, exps, 1.0, Z),
        "ray_scales": lambda m: m.ray_scales(K, exps, 1.0, Z),
        "ray_hits": lambda m: m.ray_hits(K, exps, 1.0, 0.3 * Z, U, t0),
        "webster_walk": lambda m: m.webster_walk(mats, phases, np.array([3.0]), word, z0),
    }


def _same(a, b):
    a, b = (a, b) if isinstance(a, tuple) else ((a,), (b,))
    return all(np.allclose(x, y, rtol=1e-10, atol=1e-12) for x, y in zip(a, b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20_000, help="points per batch kernel")
    ap.add_argument("--walk", type=int, default=20_000, help="word length for webster_walk")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    found = kernels.backends()
    if "compiled" not in found:
        print("compiled extension not built; timing the numpy fallback only")
    jobs = workloads(args.n, args.walk, np.random.default_rng(args.seed))
    print(f"{'kernel':<16}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, job in jobs.items():
        times = {}
        for label, mod in found.items():
            times[label] = min(timeit.repeat(lambda: job(mod), number=1, repeat=args.repeat)) * 1e3
        if "compiled" in found:
            if not _same(job(found["python"]), job(found["compiled"])):
                raise SystemExit(f"{name}: backends disagree")
            print(f"{name:<16}{times['python']:>14.2f}{times['compiled']:>16.2f}"
                  f"{times['python'] / times['compiled']:>9.1f}x")
        else:
            print(f"{name:<16}{times['python']:>14.2f}{'-':>16}{'-':>10}")


if __name__ == "__main__":
    main()
