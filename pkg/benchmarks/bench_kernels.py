"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from torsionlab import kernels, witten


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    rng = np.random.default_rng(0)
    c, w = witten.witten_circle(256)
    D = witten.deform(c, w, 40.0).orthonormal_differential(0)
    yield "witten N=256 t=40", D, c.rank(0)
    for n in (64, 200):
        A = rng.standard_normal((n, n))
        yield f"random {n}x{n}", A, None
    U, _ = np.linalg.qr(rng.standard_normal((150, 150)))
    V, _ = np.linalg.qr(rng.standard_normal((150, 150)))
    s = np.logspace(0, -40, 150)
    yield "graded 150x150", (U * s) @ V.T, None


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    mods = kernels.available_backends()
    backends = sorted(mods, key=lambda b: b != "cython")  # compiled first when present
    print(f"backends: {', '.join(backends)}")
    print(f"{'case':<22}{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'numpy/cython':>14}")
    for name, A, rank in cases():
        ldu = kernels.gecp(A, rank=rank, impl=mods["numpy"])
        X = ldu.L * ldu.pivots
        rows = {
            "gecp": lambda b: kernels.gecp(A, rank=rank, impl=mods[b]),
            "jacobi": lambda b: kernels.jacobi_singular_values(X, impl=mods[b]),
            "singular_values": lambda b: kernels.singular_values(A, rank=rank, impl=mods[b]),
        }
        for kname, fn in rows.items():
            ts = [_time(lambda: fn(b), args.repeat) for b in backends]
            speed = ts[-1] / ts[0] if len(ts) > 1 and ts[0] > 0 else float("nan")
            print(f"{name:<22}{kname:<18}" + "".join(f"{t * 1e3:>10.2f}ms" for t in ts)
                  + f"{speed:>13.1f}x")


if __name__ == "__main__":
    main()
