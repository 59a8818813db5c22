"""Compare the compiled and numpy kernel backends on sounder-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from v2vchan import _pykernels, kernels


def cases(rng):
    n, m, npath = 1024, 547, 45  # one synthesis chunk, roadside layout
    x = rng.uniform(0, m, size=(n, npath))
    g = rng.normal(size=(n, npath)) + 1j * rng.normal(size=(n, npath))
    out = np.zeros((n, m), complex)
    power = rng.exponential(size=(32000, 547))
    axis = np.arange(547) / 2.048e9
    small_x, small_g = x[:64, :8].copy(), g[:64, :8].copy()
    small_out = np.zeros((64, m), complex)
    return {
        "accumulate_lanczos 1024x547, 45 paths": lambda b: b.accumulate_lanczos(out, x, g, 3),
        "accumulate_dirichlet 64x547, 8 paths": lambda b: b.accumulate_dirichlet(small_out, small_x, small_g),
        "row_spread 32000x547": lambda b: b.row_spread(power, axis),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    backends = [("python", _pykernels)]
    if kernels.compiled_backend is not None:
        backends.append(("compiled", kernels.compiled_backend))
    else:
        print("compiled extension not built; timing the numpy backend only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} " + " ".join(f"{name:>12s}" for name, _ in backends) + "     speedup")
    for label, fn in cases(rng).items():
        best = [min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) for _, b in backends]
        cells = " ".join(f"{t * 1e3:10.1f}ms" for t in best)
        speedup = f"{best[0] / best[1]:8.1f}x" if len(best) == 2 else ""
        print(f"{label:40s} {cells} {speedup}")


if __name__ == "__main__":
    main()
