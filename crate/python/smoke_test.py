#!/usr/bin/env python3
"""Smoke test for the ripple_py extension module.

Builds are expected at target/{release,debug}/libripple_py.so; run

    cargo build --release -p ripple-py
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def import_ripple_py():
    candidates = []
    for profile in ("release", "debug"):
        for stem in ("libripple_py", "ripple_py"):
            for ext in (".so", ".dylib", ".pyd"):
                candidates.append(ROOT / "target" / profile / f"{stem}{ext}")
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("ripple_py not built; run: cargo build --release -p ripple-py")
    stage = Path(tempfile.mkdtemp(prefix="ripple_py_"))
    shutil.copy(built, stage / "ripple_py.so")
    sys.path.insert(0, str(stage))
    import ripple_py

    return ripple_py


def check(name, ok):
    print(f"[{'ok' : ^4}] {name}" if ok else f"[FAIL] {name}")
    if not ok:
        sys.exit(1)


def main():
    rp = import_ripple_py()

    grid = rp.TorusGrid(32, 32)
    check("grid has n1*n2 modes", len(grid) == 1024)

    xi = rp.sample_white_noise(grid, 42)
    xi2 = rp.sample_white_noise(grid, 42)
    check("sampling is deterministic", xi.to_physical() == xi2.to_physical())
    check("realization is Hermitian", xi.hermitian_residual() < 1e-12)

    # Parseval: spectral energy equals the spatial mean square
    phys = xi.to_physical()
    mean_sq = sum(v * v for v in phys) / len(phys)
    check(
        "Parseval identity",
        abs(xi.spectral_energy() - mean_sq) < 1e-9 * mean_sq,
    )

    # semigroup composition
    a = rp.heat_convolve(rp.heat_convolve(xi, 0.125), 0.375)
    b = rp.heat_convolve(xi, 0.5)
    check(
        "heat semigroup composes",
        a.sub(b).spectral_inf_norm() < 1e-12 * b.spectral_inf_norm(),
    )

    # anisotropic metric
    check("cc distance x1", abs(rp.cc_distance((0, 0), (0.5, 0)) - 0.5) < 1e-15)
    check("cc distance x2", abs(rp.cc_distance((0, 0), (0, 0.001)) - 0.01) < 1e-12)
    check("cc distance wraps", abs(rp.cc_distance((0, 0), (0.9, 0)) - 0.1) < 1e-15)

    # linear solve inverts L on range(P)
    v = rp.solve_linear(xi)
    check("linear solution is mean-free in x1", abs(v.coeff(0, 3)[0]) == 0.0)

    vl = rp.mollify(v, 0.125)
    f = rp.offline_product(vl)
    check("off-line product lives in range(P)", f.coeff(0, 1) == (0.0, 0.0))

    # norms behave like (semi)norms
    n1 = rp.holder_pos(xi, 0.7)
    n2 = rp.holder_pos(xi.scale(2.0), 0.7)
    check("holder_pos is homogeneous", abs(n2 - 2.0 * n1) < 1e-9 * n1)
    check("holder_neg finite", math.isfinite(rp.holder_neg(f, -0.85)))

    # fixed point at small sigma
    rep = rp.fixed_point(xi, sigma=1e-3, ell=0.25, tol=1e-12)
    check("fixed point converges", rep["converged"])
    check("contraction below one", rep["contraction"] < 1.0)
    res = rp.euler_lagrange_residual(rep["u"], xi, 1e-3, 0.25)
    check("Euler-Lagrange residual small", res <= 1e-11)

    # snapshot round trip
    with tempfile.TemporaryDirectory() as d:
        path = str(Path(d) / "xi.ripl")
        digest = rp.write_snapshot(xi, path)
        back = rp.read_snapshot(path)
        check("snapshot digest is hex sha256", len(digest) == 64)
        check(
            "snapshot round trip",
            xi.sub(back).spectral_inf_norm() < 1e-12 * xi.spectral_inf_norm(),
        )

    slope, _, r2 = rp.fit_slope([(2.0**-n, (2.0**-n) ** 2) for n in range(6)])
    check("fit_slope recovers the exponent", abs(slope - 2.0) < 1e-10 and r2 > 0.999)

    print("smoke test passed")


if __name__ == "__main__":
    main()
