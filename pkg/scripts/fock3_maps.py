"""J and Kirkwood maps of the number state n = 3.

Writes closed-form and trace-route fields as CSV (plus sidecars) and prints the
symmetry figures the maps should show: |J| radial, K vanishing on the zero
lines of H_3.

    python scripts/fock3_maps.py --out runs/fock3
"""

import argparse
import math
from pathlib import Path

import numpy as np

from fresnel_qdf import closedform, fock, qdf
from fresnel_qdf.fields import ComplexField, PhaseGrid, QuadratureSpec, write_field


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/fock3")
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--half-width", type=float, default=4.0)
    ap.add_argument("--points", type=int, default=81)
    args = ap.parse_args()

    out = Path(args.out)
    grid = PhaseGrid.square(args.half_width, args.points)
    q, p = grid.mesh()
    state = {"kind": "fock", "n": args.n}

    j_closed = ComplexField(closedform.j_fock(args.n, q, p), grid, "closed-form", state=state)
    k_closed = ComplexField(closedform.kirkwood_fock(args.n, q, p), grid, "closed-form", state=state)
    quad = QuadratureSpec(12.0, 201, 128)
    rho = fock.density_from_pure(fock.fock_state(args.n, quad.fock_dim))
    j_trace = qdf.grid_eval("j_trace", rho, grid, quad, workers=4)
    j_trace.state = state

    write_field(j_closed, out / f"j{args.n}_closed.csv")
    write_field(k_closed, out / f"k{args.n}_closed.csv")
    write_field(j_trace, out / f"j{args.n}_trace.csv")

    mod = np.abs(j_trace.values)
    print(f"grid {grid.n_q}x{grid.n_p} over [-{args.half_width:g},{args.half_width:g}]^2")
    print(f"max |J_trace - J_closed|        {np.max(np.abs(j_trace.values - j_closed.values)):.2e}")
    print(f"max ||J|(q,p) - |J|(-p,q)|      {np.max(np.abs(mod - np.rot90(mod))):.2e}")
    print(f"|J| at origin                   {mod[grid.n_q // 2, grid.n_p // 2]:.6f}  (1/sqrt(4+pi^2) = {1 / math.sqrt(4 + math.pi**2):.6f})")
    print(f"integral of J                   {qdf.field_integral(j_trace):.6f}")

    # H_3 zeros: 0 and +-sqrt(3/2)
    zeros = [0.0, math.sqrt(1.5), -math.sqrt(1.5)]
    worst = max(abs(closedform.kirkwood_fock(args.n, z, t)) for z in zeros for t in grid.ps) if args.n == 3 else float("nan")
    print(f"max |K| on H_3 zero lines       {worst:.2e}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
