"""Wall-clock comparison of the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py --points 4096 --steps 20000 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from kundtflow import _kernels as K


def best_of(fn, repeats: int) -> float:
    fn()  # first call compiles / loads the numba cache
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(points: int, steps: int, dim: int, seed: int):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(points, dim, dim))
    ginv = np.einsum("nij,nkj->nik", A, A) + dim * np.eye(dim)
    dg = rng.normal(size=(points, dim, dim, dim))
    dg = 0.5 * (dg + dg.transpose(0, 1, 3, 2))
    gam = rng.normal(size=(points, dim, dim, dim))
    dgam = rng.normal(size=(points, dim, dim, dim, dim))
    theta0 = np.array([0.3, 0.25, 0.1, 0.2])
    betas = np.ones((steps, 3))
    h = 1e-5
    return {
        "christoffel": (K.christoffel_numpy, K.christoffel_numba, (ginv, dg)),
        "ricci": (K.ricci_numpy, K.ricci_numba, (gam, dgam)),
        "rk4_flow": (K.rk4_flow_numpy, K.rk4_flow_numba, (theta0, 0.5, betas, h, K.ANGLE_NONE, 1e-3)),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4096, help="samples for the tensor kernels")
    ap.add_argument("--steps", type=int, default=20000, help="RK4 steps")
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':<12} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, (f_np, f_nb, a) in cases(args.points, args.steps, args.dim, args.seed).items():
        t_np = best_of(lambda: f_np(*a), args.repeats)
        t_nb = best_of(lambda: f_nb(*a), args.repeats)
        r_np, r_nb = f_np(*a), f_nb(*a)
        if isinstance(r_np, tuple):
            r_np, r_nb = r_np[1], r_nb[1]
        diff = float(np.max(np.abs(r_np - r_nb)))
        print(f"{name:<12} {t_np:>11.4g} {t_nb:>11.4g} {t_np / t_nb:>7.1f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
