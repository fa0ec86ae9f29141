"""Time the compiled and numpy RK4 kernels on random Hermitian generators.

    python benchmarks/bench_kernels.py [--steps 2000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from opgyro import kernels


def problem(dim, steps, seed=0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    K = np.ascontiguousarray((a + a.conj().T) / (2 * np.sqrt(dim)))
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    t = np.linspace(-5, 5, steps + 1)
    h = np.diff(t)
    w = lambda x: np.exp(-(x**2))  # noqa: E731
    record = np.arange(0, steps + 1, 10, dtype=np.int_)
    return K, psi, h, w(t[:-1]), w(t[:-1] + h / 2), w(t[1:]), record


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--dims", default="2,6,12,24,48,96,192")
    args = parser.parse_args()

    names = sorted(kernels.BACKENDS)
    if "cython" not in names:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'dim':>5} " + " ".join(f"{n + ' [ms]':>14}" for n in names) + f" {'speedup':>8}")
    for dim in (int(d) for d in args.dims.split(",")):
        args_ = problem(dim, args.steps)
        ms = {}
        for name in names:
            fn = kernels.BACKENDS[name].rk4_evolve
            ms[name] = 1e3 * min(timeit.repeat(lambda: fn(*args_), number=1, repeat=args.repeat))
        speed = f"{ms['python'] / ms['cython']:8.1f}" if "cython" in ms else f"{'-':>8}"
        print(f"{dim:>5} " + " ".join(f"{ms[n]:14.2f}" for n in names) + f" {speed}")


if __name__ == "__main__":
    main()
