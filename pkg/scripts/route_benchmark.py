"""Time the J routes against each other on a 9x9 probe grid.

For each test state the trace route is the reference; the table lists the
maximum deviation and wall time of every other route.

    python scripts/route_benchmark.py
    python scripts/route_benchmark.py --points 17 --quad 12,201,96,1e-10
"""

import argparse
import math
import time

import numpy as np

from fresnel_qdf import fock, qdf, tomography
from fresnel_qdf.fields import PhaseGrid, QuadratureSpec

AMP = 4.0 / math.sqrt(2.0)


def states(dim):
    out = {f"fock {n}": fock.fock_state(n, dim) for n in range(6)}
    out["coherent 1+0.5i"] = fock.coherent_state(1 + 0.5j, dim)
    out["cat +"] = fock.cat_state(AMP, -AMP, 1, dim)
    out["cat -"] = fock.cat_state(AMP, -AMP, -1, dim)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--half-width", type=float, default=3.0)
    ap.add_argument("--quad", default="12,201,96,1e-10")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    grid = PhaseGrid.square(args.half_width, args.points)
    quad = QuadratureSpec.parse(args.quad)
    routes = ("j_integral", "j_multiplier")
    print(f"{'state':<16} {'trace s':>8} " + " ".join(f"{r + ' dev':>16} {'s':>6}" for r in routes) + f" {'tomo dev':>10} {'s':>6}")
    for name, psi in states(quad.fock_dim).items():
        rho = fock.density_from_pure(psi)
        qdf.clear_cache()
        t0 = time.perf_counter()
        ref = qdf.grid_eval("j_trace", rho, grid, quad, workers=args.workers).values
        cells = [f"{name:<16} {time.perf_counter() - t0:8.3f}"]
        for r in routes:
            t0 = time.perf_counter()
            vals = qdf.grid_eval(r, rho, grid, quad, workers=args.workers).values
            cells.append(f"{np.max(np.abs(vals - ref)):16.2e} {time.perf_counter() - t0:6.2f}")
        t0 = time.perf_counter()
        rec = tomography.reconstruct_j(psi, grid, workers=args.workers).values
        cells.append(f"{np.max(np.abs(rec - ref)):10.2e} {time.perf_counter() - t0:6.2f}")
        print(" ".join(cells))


if __name__ == "__main__":
    main()
