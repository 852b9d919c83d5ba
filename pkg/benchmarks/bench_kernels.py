"""Compare the compiled and pure-Python adjustment kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 100] [--repeat 5] [--generations 50]

The kernel timing calls each backend directly on the same inputs and checks
that the outputs agree bit for bit. The end-to-end timing runs a short GA in
a subprocess per backend, since the backend is fixed at import.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import textwrap
import timeit

import numpy as np

from hawkdove import kernels
from hawkdove.domain import assign_roles
from hawkdove.scenario_gen import GenSpec, generate

_E2E = textwrap.dedent("""
    import time
    from hawkdove.evolution import GaConfig, evolve
    from hawkdove.kernels import BACKEND
    from hawkdove.scenario_gen import GenSpec, generate
    sc = generate(GenSpec(n={n}))
    t0 = time.perf_counter()
    res = evolve(sc, GaConfig(generations={g}))
    print(BACKEND, time.perf_counter() - t0, repr(res.best_breakdown.score))
""")


def kernel_inputs(n: int, seed: int = 0):
    sc = assign_roles(generate(GenSpec(n=n, seed=seed)), np.random.default_rng(seed))
    proposed = np.random.default_rng(seed).uniform(0, sc.thv, size=(n, n))
    return sc, proposed


def time_kernel(fn, sc, proposed, repeat: int, number: int) -> tuple[float, np.ndarray]:
    out = np.zeros_like(proposed)

    def call():
        out[:] = 0.0
        fn(proposed, np.array(sc.surplus()), np.array(sc.deficit), sc.sellers, sc.buyers, float(sc.thv), out)

    best = min(timeit.repeat(call, repeat=repeat, number=number)) / number
    call()
    return best, out.copy()


def end_to_end(n: int, generations: int, pure: bool) -> tuple[str, float, str]:
    env = dict(os.environ, HAWKDOVE_PURE_PYTHON="1" if pure else "0")
    proc = subprocess.run([sys.executable, "-c", _E2E.format(n=n, g=generations)],
                          env=env, capture_output=True, text=True, check=True)
    backend, seconds, score = proc.stdout.split()
    return backend, float(seconds), score


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--number", type=int, default=20)
    p.add_argument("--generations", type=int, default=50)
    args = p.parse_args(argv)

    sc, proposed = kernel_inputs(args.n)
    print(f"adjust kernel, n={args.n} ({sc.sellers.size} sellers x {sc.buyers.size} buyers)")
    t_py, out_py = time_kernel(kernels.python_adjust_into, sc, proposed, args.repeat, args.number)
    print(f"  python  {t_py * 1e3:9.3f} ms/call")
    if kernels.BACKEND == "cython":
        t_cy, out_cy = time_kernel(kernels.adjust_into, sc, proposed, args.repeat, args.number)
        print(f"  cython  {t_cy * 1e3:9.3f} ms/call  ({t_py / t_cy:.1f}x)")
        print(f"  outputs bit-identical: {out_py.tobytes() == out_cy.tobytes()}")
    else:
        print("  compiled extension not built; skipping")

    print(f"end-to-end evolve, {args.generations} generations")
    results = [end_to_end(args.n, args.generations, pure) for pure in (True, False)]
    for backend, seconds, score in results:
        print(f"  {backend:<7} {seconds:8.2f} s  best fitness {score}")
    if len({r[0] for r in results}) == 2:
        print(f"  same best fitness: {results[0][2] == results[1][2]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
