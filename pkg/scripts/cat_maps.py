"""J and Kirkwood maps of the even and odd cats with q1 = -q2 = 4, p1 = p2 = 0.

Closed forms are written on a fine grid; the trace route is evaluated on a
coarser grid as an independent check, and the J normalization is reported.

    python scripts/cat_maps.py --out runs/cats
"""

import argparse
import math
from pathlib import Path

import numpy as np

from fresnel_qdf import closedform, fock, qdf
from fresnel_qdf.fields import ComplexField, PhaseGrid, QuadratureSpec, write_field

AMP = 4.0 / math.sqrt(2.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/cats")
    ap.add_argument("--half-width", type=float, default=8.0)
    ap.add_argument("--points", type=int, default=161)
    args = ap.parse_args()

    out = Path(args.out)
    fine = PhaseGrid.square(args.half_width, args.points)
    coarse = PhaseGrid.square(4.0, 17)
    q, p = fine.mesh()
    qc, pc = coarse.mesh()
    quad = QuadratureSpec(12.0, 201, 200)

    for sign, tag in ((1, "even"), (-1, "odd")):
        spec = closedform.CatSpec(AMP, -AMP, sign)
        state = {"kind": "cat", "alpha1": [AMP, 0.0], "alpha2": [-AMP, 0.0], "sign": "+" if sign > 0 else "-"}
        j = ComplexField(closedform.j_cat(spec, q, p), fine, "closed-form", state=state)
        k = ComplexField(closedform.kirkwood_cat(spec, q, p), fine, "closed-form", state=state)
        write_field(j, out / f"j_cat_{tag}.csv")
        write_field(k, out / f"k_cat_{tag}.csv")

        rho = fock.density_from_pure(fock.cat_state(AMP, -AMP, sign, quad.fock_dim))
        traced = qdf.grid_eval("j_trace", rho, coarse, quad, workers=4)
        dev = np.max(np.abs(traced.values - closedform.j_cat(spec, qc, pc)))
        refl = np.max(np.abs(j.values - j.values[::-1, ::-1]))
        print(f"{tag} cat")
        print(f"  integral of J (closed form)    {qdf.field_integral(j):.6f}")
        print(f"  max |J_trace - J_closed|       {dev:.2e}  on {coarse.n_q}x{coarse.n_p}")
        print(f"  max |J(-q,-p) - J(q,p)|        {refl:.2e}")
        print(f"  J at origin                    {complex(closedform.j_cat(spec, 0.0, 0.0)):.6f}")
    print(f"wrote {out}/")


if __name__ == "__main__":
    main()
