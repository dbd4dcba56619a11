"""Builds the extension with cargo, loads it and checks a few known values.

Run from anywhere:  python3 python/smoke_test.py
"""

import math
import os
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "degseq-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = pathlib.Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target"))
    lib = target / "release" / "libdegseq_py.so"
    dest = pathlib.Path(tempfile.mkdtemp()) / "degseq_py.so"
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))


def main():
    build()
    import degseq_py as dg

    assert dg.is_graphical([2, 2, 2, 2])
    assert not dg.is_graphical([3, 3, 1, 1])

    d = dg.DegreeSequence([2, 2, 2, 2])
    assert len(d) == 4 and d.total == 8

    fam = dg.enumerate_graphs(d)
    assert len(fam) == 3
    w = dg.exact_edge_marginals(d)
    assert all(abs(w[i][j] - 2 / 3) < 1e-12 for i in range(4) for j in range(4) if i != j)

    p = dg.p_matrix(d)
    assert abs(p[0][1] - 4 / 12) < 1e-12

    graphs = dg.sample_gnd(d, runs=200, seed=1, mode="exact")
    assert {tuple(sorted(g)) for g in graphs} <= {tuple(sorted(g)) for g in fam}

    reg = dg.DegreeSequence.regular(60, 6)
    params = dg.CouplingParams.default(reg)
    assert 0 < params.zeta_prime < 1 and params.lambda_ > 0
    out = dg.run_coupling(reg, params, seed=3)
    assert set(out) == {"g_l", "g", "trace"}
    assert len(out["g"]) == 180
    if not out["trace"]["fallback"]:
        assert set(map(tuple, out["g_l"])) <= set(map(tuple, out["g"]))
    again = dg.run_coupling(reg, params, seed=3)
    assert again["g"] == out["g"] and again["trace"] == out["trace"]

    small = dg.DegreeSequence([2, 2, 2, 0])
    sp = dg.CouplingParams.from_slack(small, 0.5, 0.1, 0.1)
    law = dg.coupled_law(small, sp)
    assert law[0][3] == 0.0 and 0 < law[0][1] < 1
    assert all(len(g) <= 6 for g in dg.seq_approx_p(small, sp, runs=50))

    gnw = dg.sample_gnw([[0, 1, 0], [1, 0, 1], [0, 1, 0]], runs=3)
    assert all(sorted(g) == [(0, 1), (1, 2)] for g in gnw)

    bad = dg.DegreeSequence([3, 3, 1, 1])
    assert not bad.is_graphical() and dg.enumerate_graphs(bad) == []
    for call in (lambda: dg.sample_gnd(bad), lambda: dg.DegreeSequence([5, 1])):
        try:
            call()
        except ValueError:
            pass
        else:
            raise AssertionError("invalid input accepted")

    assert math.isfinite(out["trace"]["eta_min"])
    print("smoke test passed")


if __name__ == "__main__":
    main()
