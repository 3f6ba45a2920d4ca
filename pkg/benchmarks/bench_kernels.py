"""Benchmark of the compiled kernels against the numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.  The same comparisons can
be forced onto the fallback everywhere with MWLAB_FORCE_PY=1.
"""

import time

import numpy as np

import mwlab._kernels_py as kpy

try:
    import mwlab._kernels as kc
except ImportError:
    kc = None


def timeit(fn, *args, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    c, k = 256, 128
    vals = rng.random((c, k))
    a = rng.normal(size=(c, 2, 2))
    b = rng.normal(size=(c, 2, 2))
    f = rng.normal(size=(c, 2))
    cs = rng.random(c)
    theta = np.linspace(0, np.pi, k, endpoint=False)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    g = rng.random((c, c))

    cases = [
        ("tree_max_avg (256x128)", "tree_max_avg", (vals,)),
        ("pair_opnorm (256^2)", "pair_opnorm", (a, b)),
        ("cg_values (256^2)", "cg_values", (a, b, f)),
        ("ancestor_max_mean_rows (256^2)", "ancestor_max_mean_rows", (g,)),
        ("ellip_max_norm (256^2 x 128)", "ellip_max_norm", (cs, a, b, dirs)),
    ]
    print(f"{'kernel':36s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")
    for label, name, args in cases:
        t_py = timeit(getattr(kpy, name), *args)
        if kc is None:
            print(f"{label:36s} {t_py*1e3:9.2f}ms {'n/a':>10s}")
            continue
        t_c = timeit(getattr(kc, name), *args)
        out_py = getattr(kpy, name)(*args)
        out_c = getattr(kc, name)(*args)
        assert np.allclose(out_py, out_c, rtol=1e-12), label
        print(f"{label:36s} {t_py*1e3:9.2f}ms {t_c*1e3:9.2f}ms {t_py/t_c:7.1f}x")


if __name__ == "__main__":
    main()
