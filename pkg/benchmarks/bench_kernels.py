"""Time the compiled kernels against the numpy fallback on the witness hot loops.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from weylsimplex import kernels


def workloads(d: int, starts: int, rng: np.random.Generator):
    kappa = rng.standard_normal((d, d))
    phis = rng.standard_normal((starts, d)) + 1j * rng.standard_normal((starts, d))
    phis /= np.linalg.norm(phis, axis=1, keepdims=True)
    x = rng.standard_normal(2 * d)
    eta, phi = phis[0].copy(), phis[1].copy()
    c = rng.random((d, d))
    return {
        f"alternating_descent ({starts} starts)": lambda k: k.alternating_descent(kappa, phis, 1e-12, 500),
        "mphi_min_eig": lambda k: k.mphi_min_eig(kappa, x),
        "product_overlaps": lambda k: k.product_overlaps(eta, phi),
        "convolve_phase": lambda k: k.convolve_phase(c),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--d", type=int, nargs="+", default=[3, 4])
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        raise SystemExit("compiled kernels are not built; reinstall with Cython available")
    backends = {"compiled": kernels.compiled_backend, "python": kernels.python_backend}
    print(f"{'kernel':<34}{'d':>3}{'compiled':>14}{'python':>14}{'speedup':>10}")
    for d in args.d:
        for name, fn in workloads(d, 64, np.random.default_rng(d)).items():
            best = {}
            for label, mod in backends.items():
                t = timeit.Timer(lambda: fn(mod))
                number, _ = t.autorange()
                best[label] = min(t.repeat(args.repeat, number)) / number
            print(
                f"{name:<34}{d:>3}{best['compiled'] * 1e6:>11.1f} us{best['python'] * 1e6:>11.1f} us"
                f"{best['python'] / best['compiled']:>9.1f}x"
            )


if __name__ == "__main__":
    main()
