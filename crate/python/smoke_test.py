"""Builds the Python extension and exercises it end to end.

Usage: python3 python/smoke_test.py [--no-build]
"""

import math
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "altxy-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )


def load(tmp):
    lib = os.path.join(ROOT, "target", "release", "libaltxy_py.so")
    shutil.copy(lib, os.path.join(tmp, "altxy.so"))
    sys.path.insert(0, tmp)
    import altxy

    return altxy


def close(a, b, tol):
    assert abs(a - b) < tol, (a, b)


def main():
    if "--no-build" not in sys.argv:
        build()
    with tempfile.TemporaryDirectory() as tmp:
        altxy = load(tmp)

        iso = altxy.Params(1.0, 0.0, 0.0)
        close(iso.ground_energy(), -0.5, 1e-9)
        line = altxy.Params(0.8, 0.6, 0.0)
        close(line.ground_energy(), -0.5, 1e-9)
        sep = line.separable()
        close(sep["epsilon"], sep["epsilon0"], 1e-9)

        gap, phi = altxy.Params(0.8, 1.0, 0.0).gap()
        assert gap < 1e-8 and phi < 1e-3, (gap, phi)
        assert len(altxy.Params(0.8, 0.3, 0.2).spectrum(0.4)) == 16

        ground = altxy.TwoSiteState.equilibrium(line)
        assert ground.log_negativity() < 1e-8
        # the symmetric ground state mixes the two Néel product states: separable, yet discordant
        assert 0.05 < ground.discord() < 0.15

        p = altxy.Params(0.8, 0.5, 0.3)
        momentum = altxy.TwoSiteState.equilibrium(p, beta=2.0, n=8, lattice="exact")
        chain = altxy.TwoSiteState.spin_chain(p, 8, 2.0)
        diff = max(
            abs(a - b)
            for ra, rb in zip(momentum.matrix(), chain.matrix())
            for a, b in zip(ra, rb)
        )
        assert diff < 1e-8, diff

        evolved = altxy.TwoSiteState.quenched(p, 1.7, beta=2.0)
        trace = sum(evolved.matrix()[i][i] for i in range(4))
        close(trace.real, 1.0, 1e-10)

        bell_like = altxy.TwoSiteState.from_observables([0.0, 0.0, 1.0, -1.0, 1.0, 0.0, 0.0])
        close(bell_like.log_negativity(), 1.0, 1e-10)
        close(bell_like.discord(), 1.0, 1e-6)

        ng, witness = altxy.nonmonotonic(altxy.Params(0.8, -0.9, 0.25), "ln", points=100)
        assert ng and witness[0] < witness[1]

        out = os.path.join(tmp, "pd.csv")
        config = (
            'task = "phase-diagram"\n[grid]\nlambda1 = "-1:1:3"\nlambda2 = 0.2\n'
            f'[run]\nmeasure = "ln"\nout = "{out}"\nworkers = 2\n'
        )
        files, rows, failed = altxy.sweep(config)
        assert files == [out] and rows == 3 and failed == 0
        with open(out) as f:
            assert "index,lambda1,lambda2,beta,ln,error" in f.read()

        try:
            altxy.Params(0.0, 0.0, 0.0)
        except ValueError:
            pass
        else:
            raise AssertionError("zero anisotropy accepted")
        assert not math.isnan(altxy.Params(0.5, 0.1, 0.1).ground_energy())
    print("python smoke test passed")


if __name__ == "__main__":
    main()
