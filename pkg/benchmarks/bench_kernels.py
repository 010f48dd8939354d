"""Compare the compiled and numpy segment kernels.

Times the four queens constraint families on an n x n board for each
backend, checks that both return the same output, and optionally times a
whole product-space DR solve under each backend.

    python3 benchmarks/bench_kernels.py --sizes 10,20,50,100 --repeat 200
"""

import argparse
import time

import numpy as np

from feasor import kernels
from feasor.queens import QueensInstance, build_constraints, solve_queens, queens_policy


def time_call(fn, repeat):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def bench_projections(n, repeat, rng):
    inst = QueensInstance(n, 2, 4)
    x = rng.uniform(-0.5, 1.5, n * n)
    out = {}
    for S in build_constraints(inst):
        lay, m, at_most = S.layout, S.m, S.at_most
        res = {}
        for backend in ("python", "compiled"):
            res[backend] = (
                time_call(lambda: kernels.segment_binary(x, lay, m, at_most, backend), repeat),
                time_call(lambda: kernels.segment_sums(x, lay, m, at_most, backend), repeat))
        same = (np.array_equal(kernels.segment_binary(x, lay, m, at_most, "python"),
                               kernels.segment_binary(x, lay, m, at_most, "compiled"))
                and np.array_equal(kernels.segment_sums(x, lay, m, at_most, "python"),
                                   kernels.segment_sums(x, lay, m, at_most, "compiled")))
        out[S.name] = (res, same)
    return out


def bench_solve(n, seed, max_iters):
    inst = QueensInstance(n, 2, 3)
    pol = queens_policy(300, max_iters=max_iters)
    res = {}
    for backend in ("python", "compiled"):
        kernels.use_backend(backend)
        r = solve_queens(inst, seed, pol)
        res[backend] = (r.report.iterations, r.report.seconds)
    return res


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--sizes", default="10,20,50,100")
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--solve-iters", type=int, default=2000,
                    help="iteration cap for the end-to-end solve timing (0 skips it)")
    args = ap.parse_args(argv)
    if not kernels.compiled_available():
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    rng = np.random.default_rng(0)
    initial = kernels.BACKEND

    print(f"{'n':>4} {'set':<22} {'binary py':>10} {'binary C':>10} {'x':>6} "
          f"{'sums py':>10} {'sums C':>10} {'x':>6}  same")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, (res, same) in bench_projections(n, args.repeat, rng).items():
            (bp, sp), (bc, sc) = res["python"], res["compiled"]
            print(f"{n:>4} {name:<22} {bp * 1e6:>8.1f}us {bc * 1e6:>8.1f}us {bp / bc:>5.1f}x "
                  f"{sp * 1e6:>8.1f}us {sc * 1e6:>8.1f}us {sp / sc:>5.1f}x  {same}")

    if args.solve_iters:
        print("\nproduct-space DR, formulation 3, seed 0")
        for n in (int(s) for s in args.sizes.split(",")):
            res = bench_solve(n, 0, args.solve_iters)
            (ip, tp), (ic, tc) = res["python"], res["compiled"]
            print(f"n={n:>4}  python {tp:7.3f}s ({ip} it)  compiled {tc:7.3f}s ({ic} it)  "
                  f"speedup {tp / tc:5.2f}x")
    kernels.use_backend(initial)


if __name__ == "__main__":
    main()
