"""Time the compiled kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Both implementations are called directly, so the PROPDMG_DISABLE_NUMBA
switch does not matter here.  Compilation happens in a warm-up call that is
not timed.
"""

import argparse
import time

import numpy as np

from propdmg import _kernels as K


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    # sizes close to one cascade training run
    n, d = 20000, 233
    X = rng.standard_normal((n, d))
    X[:, -1] = 1.0
    y = np.where(X[:, 0] + 0.5 * X[:, 1] + rng.standard_normal(n) > 0, 1.0, -1.0)
    P = rng.standard_normal((30000, 232))
    C = P[rng.choice(P.shape[0], 400, replace=False)]
    labels = K.assign_numpy(P, C)
    u = rng.random(400)
    return [
        ("dual_cd (20000 x 233, 50 sweeps)", lambda f: f(X, y, 1.0, 1e-12, 50, 0), K.dual_cd_numpy, K.dual_cd_numba),
        ("kmeans++ seeding (30000 x 232, k=400)", lambda f: f(P, 400, u), K.kmeanspp_numpy, K.kmeanspp_numba),
        ("assign (30000 x 232, k=400)", lambda f: f(P, C), K.assign_numpy, K.assign_numba),
        ("update (30000 x 232, k=400)", lambda f: f(P, labels, 400), K.update_numpy, K.update_numba),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for name, call, np_fn, nb_fn in cases(np.random.default_rng(0)):
        t_np = best_of(lambda: call(np_fn), args.repeat)
        t_nb = best_of(lambda: call(nb_fn), args.repeat)
        print(f"{name:40s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
