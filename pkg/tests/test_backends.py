import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ivpquad import kernels
from ivpquad.collocation import build_system

compiled = kernels.compiled_backend
needs_ext = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")

PROBE = r"""
import json, sys
import numpy as np
from ivpquad import kernels, propagate
from ivpquad.problems import bender, corpus
out = {"backend": kernels.BACKEND}
for pid in (3, 6, 12):
    p = corpus.get(pid)
    s = propagate(p.integrand, p.a, 0.0, p.b, singular_start=p.singular_start)
    out[str(pid)] = [s.value, s.stats.n_evals]
s = bender.solve_bender(3.0, 4.0)
out["bender"] = [s.value, s.stats.n_evals]
json.dump(out, sys.stdout)
"""


def probe(pure):
    env = dict(os.environ)
    env["IVPQUAD_PURE_PYTHON"] = "1" if pure else "0"
    proc = subprocess.run([sys.executable, "-c", PROBE], capture_output=True, text=True,
                          env=env, check=True)
    return json.loads(proc.stdout)


def test_pure_python_selected_by_environment():
    assert probe(True)["backend"] == "python"


@needs_ext
def test_backends_give_same_results():
    fast, slow = probe(False), probe(True)
    assert fast["backend"] == "compiled"
    for key in ("3", "6", "12", "bender"):
        assert fast[key][0] == pytest.approx(slow[key][0], rel=1e-14)
        # counts may only differ if a last-bit difference flips a decision
        assert abs(fast[key][1] - slow[key][1]) <= 0.02 * slow[key][1]


@needs_ext
def test_picard_kernel_agrees(rng):
    s = build_system(13)
    seed = np.ones(13)
    args = (s.U, s.S0, s.lu, s.piv, s.nodes, 1.0, 0.05, 2.0, np.cos(np.pi * 2.0), seed,
            1e-14, 200)
    a = compiled.picard_cos_element(*args)
    b = kernels.python_backend.picard_cos_element(*args)
    assert a[2] and b[2]
    assert abs(a[1] - b[1]) <= 2
    # both stop at the rounding floor of the fixed point, a few 1e-15 wide
    assert np.allclose(a[0], b[0], rtol=0, atol=1e-13)
    assert a[3] == pytest.approx(b[3], rel=1e-3)


@needs_ext
def test_lu_kernels_agree(rng):
    A = rng.normal(size=(13, 13))
    la, pa, ma = compiled.lu_factor(A)
    lb, pb, mb = kernels.python_backend.lu_factor(A)
    assert np.array_equal(pa, pb)
    assert np.allclose(la, lb, rtol=0, atol=1e-13)
    rhs = rng.normal(size=13)
    assert np.allclose(compiled.lu_solve(la, pa, rhs),
                       kernels.python_backend.lu_solve(lb, pb, rhs), rtol=1e-13)
