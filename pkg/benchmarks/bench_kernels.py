"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the three hot kernels in isolation and two end-to-end runs with each
backend. End-to-end runs go through a subprocess per backend because the
backend is fixed at import.
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from ivpquad import kernels
from ivpquad.collocation import build_system

END_TO_END = r"""
import json, sys, time
from ivpquad import kernels, propagate
from ivpquad.problems import bender, corpus
t0 = time.perf_counter()
for p in corpus.corpus():
    propagate(p.integrand, p.a, 0.0, p.b, singular_start=p.singular_start)
t1 = time.perf_counter()
bender.solve_bender(10.0, 24.0)
t2 = time.perf_counter()
json.dump({"backend": kernels.BACKEND, "corpus": t1 - t0, "bender": t2 - t1}, sys.stdout)
"""


def micro(mod, repeat):
    s = build_system(13)
    rng = np.random.default_rng(0)
    B = rng.normal(size=13)
    taus = rng.uniform(-1, 1, 64)
    rhs = rng.normal(size=13)
    seed = np.ones(13)
    cases = {
        "clenshaw_array(64 pts)": lambda: mod.clenshaw_array(B, taus, 2),
        "lu_solve(13)": lambda: mod.lu_solve(s.lu, s.piv, rhs),
        "picard_cos_element": lambda: mod.picard_cos_element(
            s.U, s.S0, s.lu, s.piv, s.nodes, 3.0, 0.02, 1.5, np.cos(np.pi * 4.5), seed,
            1e-14, 200),
    }
    out = {}
    for name, fn in cases.items():
        timer = timeit.Timer(fn)
        n, _ = timer.autorange()
        out[name] = min(timer.repeat(repeat, n)) / n
    return out


def end_to_end(pure):
    env = dict(os.environ, IVPQUAD_PURE_PYTHON="1" if pure else "0")
    proc = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if kernels.compiled_backend is None:
        print("compiled kernels are not built; only the fallback can be timed")
    py = micro(kernels.python_backend, args.repeat)
    cy = micro(kernels.compiled_backend, args.repeat) if kernels.compiled_backend else {}
    print(f"{'kernel':<26}{'python':>12}{'compiled':>12}{'speed-up':>10}")
    for name, t in py.items():
        c = cy.get(name)
        cs = f"{c * 1e6:10.2f}us" if c else f"{'-':>12}"
        sp = f"{t / c:9.1f}x" if c else f"{'-':>10}"
        print(f"{name:<26}{t * 1e6:10.2f}us{cs}{sp}")
    runs = [end_to_end(True)]
    if kernels.compiled_backend:
        runs.append(end_to_end(False))
    print()
    print(f"{'end to end':<26}" + "".join(f"{r['backend']:>12}" for r in runs))
    for key, label in (("corpus", "15-row corpus"), ("bender", "y'=cos(pi x y), y0=10")):
        print(f"{label:<26}" + "".join(f"{r[key]:11.3f}s" for r in runs))


if __name__ == "__main__":
    main()
